use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use super::{ols_fit, vif, DesignMatrix, RegressionReport};
use crate::error::{Error, Result};

pub const MAX_CANDIDATES: usize = 20;

/// One fitted subset of candidate variables.
#[derive(Debug, Clone)]
pub struct ModelRow {
    pub variables: Vec<String>,
    /// The fit, or why it could not be computed.
    pub fit: std::result::Result<RegressionReport, String>,
    pub max_vif: f64,
    pub admissible: bool,
}

impl ModelRow {
    pub fn label(&self) -> String {
        self.variables.join(";")
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub vif_threshold: f64,
    /// Every nonempty subset: by size, then in candidate order.
    pub rows: Vec<ModelRow>,
    /// Index into `rows` of the admissible model with the lowest AIC.
    pub verdict: Option<usize>,
}

impl Selection {
    pub fn best(&self) -> Option<&ModelRow> {
        self.verdict.map(|i| &self.rows[i])
    }

    pub fn best_report(&self) -> Option<&RegressionReport> {
        self.best().and_then(|r| r.fit.as_ref().ok())
    }
}

/// Nonempty subsets of `0..p`, by size and then lexicographically.
fn subsets(p: usize) -> Vec<Vec<usize>> {
    fn grow(start: usize, p: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..p {
            cur.push(i);
            grow(i + 1, p, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity((1usize << p) - 1);
    for size in 1..=p {
        grow(0, p, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Fits every nonempty subset of the design's columns.
///
/// A model is admissible when it fits and its largest VIF is below
/// `vif_threshold`. The verdict is the admissible model with the smallest AIC;
/// ties go to fewer variables, then to the lexicographically smaller name list.
pub fn select_model(design: &DesignMatrix, vif_threshold: f64) -> Result<Selection> {
    let p = design.n_vars();
    if p == 0 || p > MAX_CANDIDATES {
        return Err(Error::InvalidArgument(format!(
            "select_model needs 1..={MAX_CANDIDATES} candidates, got {p}"
        )));
    }
    if !(vif_threshold > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "VIF threshold must exceed 1, got {vif_threshold}"
        )));
    }

    let rows: Vec<ModelRow> = subsets(p)
        .into_par_iter()
        .map(|idx| {
            let names: Vec<&str> = idx.iter().map(|&i| design.names[i].as_str()).collect();
            let sub = design.subset(&names).expect("names come from the design");
            let variables = sub.names.clone();
            match ols_fit(&sub) {
                Ok(report) => {
                    let max_vif = report.max_vif();
                    ModelRow {
                        variables,
                        admissible: max_vif < vif_threshold,
                        max_vif,
                        fit: Ok(report),
                    }
                }
                Err(e) => {
                    let max_vif = if sub.n_obs() > sub.n_vars() + 1 {
                        vif(&sub).into_iter().fold(1.0, f64::max)
                    } else {
                        f64::NAN
                    };
                    ModelRow {
                        variables,
                        fit: Err(e.to_string()),
                        max_vif,
                        admissible: false,
                    }
                }
            }
        })
        .collect();

    let verdict = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.admissible)
        .min_by(|(_, a), (_, b)| compare_models(a, b))
        .map(|(i, _)| i);

    Ok(Selection {
        vif_threshold,
        rows,
        verdict,
    })
}

fn compare_models(a: &ModelRow, b: &ModelRow) -> Ordering {
    let aic = |r: &ModelRow| r.fit.as_ref().map(|f| f.aic).unwrap_or(f64::INFINITY);
    let sorted = |r: &ModelRow| {
        let mut v = r.variables.clone();
        v.sort();
        v
    };
    aic(a)
        .total_cmp(&aic(b))
        .then(a.variables.len().cmp(&b.variables.len()))
        .then_with(|| sorted(a).cmp(&sorted(b)))
}

fn fmt_or_na(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "NA".into(),
        Some(x) => x.to_string(),
        None => "NA".into(),
    }
}

/// `variables,adjusted_r2,aic,max_vif,admissible`, one row per subset.
pub fn write_regression_report_csv<W: Write>(selection: &Selection, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variables", "adjusted_r2", "aic", "max_vif", "admissible"])?;
    for row in &selection.rows {
        let fit = row.fit.as_ref().ok();
        w.write_record([
            row.label(),
            fmt_or_na(fit.map(|f| f.adjusted_r2)),
            fmt_or_na(fit.map(|f| f.aic)),
            fmt_or_na(Some(row.max_vif)),
            row.admissible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `variable,coef,ci_lo,ci_hi,p_value`, intercept first.
pub fn write_coefficients_csv<W: Write>(report: &RegressionReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variable", "coef", "ci_lo", "ci_hi", "p_value"])?;
    for c in std::iter::once(&report.intercept).chain(&report.coefficients) {
        w.write_record([
            c.name.clone(),
            c.estimate.to_string(),
            c.ci_low.to_string(),
            c.ci_high.to_string(),
            c.p_value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
