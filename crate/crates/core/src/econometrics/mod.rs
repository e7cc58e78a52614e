//! Linear regression toolkit: Z-score standardization, OLS with coefficient
//! inference, AIC, adjusted R², variance inflation factors, Pearson screening
//! and exhaustive subset selection.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

mod ols;
mod select;
mod stats;

pub use ols::{adjusted_r2, aic, ols_fit, vif, Coefficient, RegressionReport, COLLINEARITY_RATIO};
pub use select::{
    select_model, write_coefficients_csv, write_regression_report_csv, ModelRow, Selection, MAX_CANDIDATES,
};
pub use stats::{pearson, pearson_screen, Correlation};

/// Response plus named explanatory columns over the same observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub response_name: String,
    pub response: Vec<f64>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub standardized: bool,
}

impl DesignMatrix {
    pub fn new(
        response_name: impl Into<String>,
        response: Vec<f64>,
        columns: Vec<(String, Vec<f64>)>,
    ) -> Result<DesignMatrix> {
        let response_name = response_name.into();
        let n = response.len();
        let mut seen = BTreeSet::new();
        for (name, col) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(Error::Duplicate {
                    kind: "column",
                    key: name.clone(),
                });
            }
            if col.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "column `{name}` has {} rows, response has {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("column `{name}` has non-finite values")));
            }
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "response `{response_name}` has non-finite values"
            )));
        }
        let (names, columns) = columns.into_iter().unzip();
        Ok(DesignMatrix {
            response_name,
            response,
            names,
            columns,
            standardized: false,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.response.len()
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Keeps the given columns, in the given order.
    pub fn subset<S: AsRef<str>>(&self, names: &[S]) -> Result<DesignMatrix> {
        let mut out = DesignMatrix {
            response_name: self.response_name.clone(),
            response: self.response.clone(),
            names: Vec::with_capacity(names.len()),
            columns: Vec::with_capacity(names.len()),
            standardized: self.standardized,
        };
        for name in names {
            let name = name.as_ref();
            let col = self
                .column(name)
                .ok_or_else(|| Error::InvalidArgument(format!("no column `{name}`")))?;
            out.names.push(name.to_string());
            out.columns.push(col.to_vec());
        }
        Ok(out)
    }

    /// Z-scores every column and the response (sample standard deviation, n − 1).
    pub fn standardize(&self) -> Result<DesignMatrix> {
        let mut out = self.clone();
        out.response = zscore(&self.response, &self.response_name)?;
        for (col, name) in out.columns.iter_mut().zip(&self.names) {
            *col = zscore(col, name)?;
        }
        out.standardized = true;
        Ok(out)
    }
}

pub fn standardize(design: &DesignMatrix) -> Result<DesignMatrix> {
    design.standardize()
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn zscore(xs: &[f64], name: &str) -> Result<Vec<f64>> {
    if xs.len() < 2 {
        return Err(Error::ConstantColumn(name.to_string()));
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    let sd = var.sqrt();
    let scale = xs.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if !(sd > 16.0 * f64::EPSILON * scale) {
        return Err(Error::ConstantColumn(name.to_string()));
    }
    Ok(xs.iter().map(|x| (x - m) / sd).collect())
}
