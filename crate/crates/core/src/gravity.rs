//! Log-linear gravity model of bilateral trade and its network-augmented variants.
//!
//! The base model regresses `ln BTV_ij` on `ln(GDP_i · GDP_j)` and `ln d_ij`,
//! with `d_ij` the great-circle distance between capitals. Extended variants add
//! `ln LSBCI_ij`, `ln(Gb_i · Gb_j)` or `ln(Gc_i · Gc_j)`. Country trade totals are
//! rebuilt by summing `exp` of the fitted log values over a country's pairs, with
//! no retransformation (smearing) correction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::econometrics::{adjusted_r2, ols_fit, pearson, Correlation, DesignMatrix, RegressionReport};
use crate::error::{Error, Result};
use crate::graph::Glsn;
use crate::indices::CountryIndexTable;
use crate::ingest::{ordered_pair, BilateralRecord, CountryEcon};
use crate::sum::compensated_sum;

/// Mean Earth radius used by [`great_circle_km`].
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Haversine distance in kilometres between two points given in degrees.
pub fn great_circle_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GravityVariant {
    Base,
    Lsbci,
    Gb,
    LsbciGb,
    Gc,
    LsbciGc,
}

impl GravityVariant {
    pub const ALL: [GravityVariant; 6] = [
        GravityVariant::Base,
        GravityVariant::Lsbci,
        GravityVariant::Gb,
        GravityVariant::LsbciGb,
        GravityVariant::Gc,
        GravityVariant::LsbciGc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GravityVariant::Base => "base",
            GravityVariant::Lsbci => "lsbci",
            GravityVariant::Gb => "gb",
            GravityVariant::LsbciGb => "lsbci_gb",
            GravityVariant::Gc => "gc",
            GravityVariant::LsbciGc => "lsbci_gc",
        }
    }

    pub fn needs_lsbci(self) -> bool {
        matches!(
            self,
            GravityVariant::Lsbci | GravityVariant::LsbciGb | GravityVariant::LsbciGc
        )
    }

    pub fn needs_gb(self) -> bool {
        matches!(self, GravityVariant::Gb | GravityVariant::LsbciGb)
    }

    pub fn needs_gc(self) -> bool {
        matches!(self, GravityVariant::Gc | GravityVariant::LsbciGc)
    }

    /// Explanatory columns in model order.
    pub fn columns(self) -> Vec<&'static str> {
        let mut cols = vec!["ln_gdp_product", "ln_distance"];
        if self.needs_lsbci() {
            cols.push("ln_lsbci");
        }
        if self.needs_gb() {
            cols.push("ln_gb_product");
        }
        if self.needs_gc() {
            cols.push("ln_gc_product");
        }
        cols
    }

    /// The comparison family this variant completes: the base model, the
    /// LSBCI extension, the network extension, and both extensions together.
    pub fn family(self) -> [GravityVariant; 4] {
        if self.needs_gc() {
            [
                GravityVariant::Base,
                GravityVariant::Lsbci,
                GravityVariant::Gc,
                GravityVariant::LsbciGc,
            ]
        } else {
            [
                GravityVariant::Base,
                GravityVariant::Lsbci,
                GravityVariant::Gb,
                GravityVariant::LsbciGb,
            ]
        }
    }

    /// Most demanding member of [`Self::family`]; its sample is shared by the family.
    pub fn family_sample_variant(self) -> GravityVariant {
        self.family()[3]
    }
}

impl fmt::Display for GravityVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GravityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['+', '-'], "_");
        let norm = norm.trim_start_matches('_');
        GravityVariant::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gravity variant `{s}`")))
    }
}

/// One country pair in log space. `country_i < country_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryPairSample {
    pub country_i: String,
    pub country_j: String,
    pub ln_gdp_product: f64,
    pub ln_distance: f64,
    pub ln_btv: f64,
    pub ln_lsbci: Option<f64>,
    pub ln_gb_product: Option<f64>,
    pub ln_gc_product: Option<f64>,
}

impl CountryPairSample {
    fn value(&self, column: &str) -> Option<f64> {
        match column {
            "ln_gdp_product" => Some(self.ln_gdp_product),
            "ln_distance" => Some(self.ln_distance),
            "ln_lsbci" => self.ln_lsbci,
            "ln_gb_product" => self.ln_gb_product,
            "ln_gc_product" => self.ln_gc_product,
            _ => None,
        }
    }

    /// The same pair with endpoints swapped.
    pub fn swapped(&self) -> CountryPairSample {
        CountryPairSample {
            country_i: self.country_j.clone(),
            country_j: self.country_i.clone(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExclusionReason {
    NotConnected,
    MissingGdp,
    NonPositiveTrade,
    MissingCoordinates,
    ZeroDistance,
    MissingLsbci,
    NonPositiveGb,
    NonPositiveGc,
}

impl ExclusionReason {
    pub fn name(self) -> &'static str {
        match self {
            ExclusionReason::NotConnected => "not_connected",
            ExclusionReason::MissingGdp => "missing_gdp",
            ExclusionReason::NonPositiveTrade => "non_positive_btv",
            ExclusionReason::MissingCoordinates => "missing_coordinates",
            ExclusionReason::ZeroDistance => "zero_distance",
            ExclusionReason::MissingLsbci => "missing_lsbci",
            ExclusionReason::NonPositiveGb => "non_positive_gb",
            ExclusionReason::NonPositiveGc => "non_positive_gc",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PairAssembly {
    pub samples: Vec<CountryPairSample>,
    /// Count of dropped bilateral records by the first failed requirement.
    pub excluded: BTreeMap<ExclusionReason, usize>,
}

/// Unordered country pairs joined by at least one port-to-port edge.
pub fn connected_country_pairs(g: &Glsn) -> BTreeSet<(String, String)> {
    g.edges()
        .filter(|&(u, v, _)| g.country(u) != g.country(v))
        .map(|(u, v, _)| {
            let (a, b) = ordered_pair(g.country(u), g.country(v));
            (a.to_string(), b.to_string())
        })
        .collect()
}

fn positive_ln(x: Option<f64>) -> Option<f64> {
    x.filter(|v| *v > 0.0).map(f64::ln)
}

/// Builds log-space samples from the bilateral records that pass every requirement.
///
/// Each pair must be directly connected in the network, have both GDPs, positive
/// trade and distinct capitals. `variant` adds: LSBCI present and positive; both
/// `gb` (at cut-off `gb_l_max`) positive; both `gc` positive.
pub fn assemble_pairs(
    econ: &[CountryEcon],
    bilateral: &[BilateralRecord],
    indices: &CountryIndexTable,
    glsn: &Glsn,
    variant: GravityVariant,
    gb_l_max: usize,
) -> PairAssembly {
    let econ: BTreeMap<&str, &CountryEcon> = econ.iter().map(|e| (e.country_code.as_str(), e)).collect();
    let connected = connected_country_pairs(glsn);
    let mut records: Vec<&BilateralRecord> = bilateral.iter().collect();
    records.sort_by(|a, b| a.key().cmp(&b.key()));

    let mut out = PairAssembly::default();
    for rec in records {
        match assemble_one(rec, &econ, indices, &connected, variant, gb_l_max) {
            Ok(sample) => out.samples.push(sample),
            Err(reason) => *out.excluded.entry(reason).or_default() += 1,
        }
    }
    out
}

fn assemble_one(
    rec: &BilateralRecord,
    econ: &BTreeMap<&str, &CountryEcon>,
    indices: &CountryIndexTable,
    connected: &BTreeSet<(String, String)>,
    variant: GravityVariant,
    gb_l_max: usize,
) -> std::result::Result<CountryPairSample, ExclusionReason> {
    let (ci, cj) = rec.key();
    if !connected.contains(&(ci.to_string(), cj.to_string())) {
        return Err(ExclusionReason::NotConnected);
    }
    let (ei, ej) = (econ.get(ci), econ.get(cj));
    let gdp = |e: Option<&&CountryEcon>| e.and_then(|e| e.gdp_usd).filter(|g| *g > 0.0);
    let (Some(gi), Some(gj)) = (gdp(ei), gdp(ej)) else {
        return Err(ExclusionReason::MissingGdp);
    };
    if !(rec.btv_usd > 0.0) {
        return Err(ExclusionReason::NonPositiveTrade);
    }
    let cap = |e: Option<&&CountryEcon>| e.and_then(|e| e.capital());
    let (Some((lat_i, lon_i)), Some((lat_j, lon_j))) = (cap(ei), cap(ej)) else {
        return Err(ExclusionReason::MissingCoordinates);
    };
    let d = great_circle_km(lat_i, lon_i, lat_j, lon_j);
    if !(d > 0.0) {
        return Err(ExclusionReason::ZeroDistance);
    }

    let ln_lsbci = positive_ln(rec.lsbci);
    let (xi, xj) = (indices.get(ci), indices.get(cj));
    let ln_gb_product = match (
        xi.and_then(|x| x.gb.get(&gb_l_max)),
        xj.and_then(|x| x.gb.get(&gb_l_max)),
    ) {
        (Some(&a), Some(&b)) if a > 0.0 && b > 0.0 => Some(a.ln() + b.ln()),
        _ => None,
    };
    let ln_gc_product = match (xi.map(|x| x.gc), xj.map(|x| x.gc)) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(a.ln() + b.ln()),
        _ => None,
    };
    if variant.needs_lsbci() && ln_lsbci.is_none() {
        return Err(ExclusionReason::MissingLsbci);
    }
    if variant.needs_gb() && ln_gb_product.is_none() {
        return Err(ExclusionReason::NonPositiveGb);
    }
    if variant.needs_gc() && ln_gc_product.is_none() {
        return Err(ExclusionReason::NonPositiveGc);
    }

    Ok(CountryPairSample {
        country_i: ci.to_string(),
        country_j: cj.to_string(),
        ln_gdp_product: gi.ln() + gj.ln(),
        ln_distance: d.ln(),
        ln_btv: rec.btv_usd.ln(),
        ln_lsbci,
        ln_gb_product,
        ln_gc_product,
    })
}

#[derive(Debug, Clone)]
pub struct GravityFit {
    pub variant: GravityVariant,
    pub report: RegressionReport,
}

impl GravityFit {
    /// Fitted `ln BTV` for one sample.
    pub fn predict_ln(&self, sample: &CountryPairSample) -> Result<f64> {
        let row = self
            .variant
            .columns()
            .into_iter()
            .map(|c| {
                sample.value(c).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "pair {}/{} lacks `{c}` required by variant {}",
                        sample.country_i, sample.country_j, self.variant
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.report.predict(&row))
    }
}

/// Unstandardized OLS of `ln_btv` on the variant's columns.
pub fn fit_gravity(samples: &[CountryPairSample], variant: GravityVariant) -> Result<GravityFit> {
    let columns = variant
        .columns()
        .into_iter()
        .map(|c| {
            let values = samples
                .iter()
                .map(|s| {
                    s.value(c).ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "pair {}/{} lacks `{c}` required by variant {variant}",
                            s.country_i, s.country_j
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((c.to_string(), values))
        })
        .collect::<Result<Vec<_>>>()?;
    let design = DesignMatrix::new("ln_btv", samples.iter().map(|s| s.ln_btv).collect(), columns)?;
    Ok(GravityFit {
        variant,
        report: ols_fit(&design)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryTrade {
    pub country_code: String,
    pub empirical: f64,
    pub estimated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeReconstruction {
    pub countries: Vec<CountryTrade>,
    pub correlation: Option<Correlation>,
    /// Adjusted R² of a one-regressor fit implied by `correlation`.
    pub implied_adjusted_r2: Option<f64>,
}

/// Sums predicted bilateral trade per country and compares it with `empirical`.
///
/// Only countries that are keys of `empirical` and appear in at least one sample
/// are reported.
pub fn estimate_country_trade(
    fit: &GravityFit,
    samples: &[CountryPairSample],
    empirical: &BTreeMap<String, f64>,
) -> Result<TradeReconstruction> {
    let mut per_country: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in samples {
        let btv = fit.predict_ln(s)?.exp();
        for c in [s.country_i.as_str(), s.country_j.as_str()] {
            if empirical.contains_key(c) {
                per_country.entry(c).or_default().push(btv);
            }
        }
    }
    let countries: Vec<CountryTrade> = per_country
        .into_iter()
        .map(|(c, values)| CountryTrade {
            country_code: c.to_string(),
            empirical: empirical[c],
            estimated: compensated_sum(values),
        })
        .collect();
    let emp: Vec<f64> = countries.iter().map(|c| c.empirical).collect();
    let est: Vec<f64> = countries.iter().map(|c| c.estimated).collect();
    let correlation = pearson(&emp, &est).ok();
    let implied_adjusted_r2 = correlation.filter(|c| c.n > 2).map(|c| adjusted_r2(c.r * c.r, c.n, 1));
    Ok(TradeReconstruction {
        countries,
        correlation,
        implied_adjusted_r2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverageExclusion {
    NoTradeValue,
    InsufficientCoverage { share: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coverage {
    pub retained: Vec<String>,
    pub excluded: Vec<(String, CoverageExclusion)>,
}

/// Keeps countries whose positive bilateral trade sums to strictly more than
/// `threshold` times their total trade value.
pub fn coverage_filter(econ: &[CountryEcon], bilateral: &[BilateralRecord], threshold: f64) -> Result<Coverage> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let mut partner_sum: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in bilateral.iter().filter(|r| r.btv_usd > 0.0) {
        partner_sum.entry(&r.country_i).or_default().push(r.btv_usd);
        partner_sum.entry(&r.country_j).or_default().push(r.btv_usd);
    }
    let mut codes: Vec<&CountryEcon> = econ.iter().collect();
    codes.sort_by(|a, b| a.country_code.cmp(&b.country_code));

    let mut out = Coverage::default();
    for e in codes {
        let code = e.country_code.clone();
        let Some(total) = e.trade_value_usd.filter(|t| *t > 0.0) else {
            out.excluded.push((code, CoverageExclusion::NoTradeValue));
            continue;
        };
        let sum = partner_sum
            .get(e.country_code.as_str())
            .map(|v| compensated_sum(v.iter().copied()))
            .unwrap_or(0.0);
        if sum > threshold * total {
            out.retained.push(code);
        } else {
            out.excluded
                .push((code, CoverageExclusion::InsufficientCoverage { share: sum / total }));
        }
    }
    Ok(out)
}

/// `variant,adjusted_r2,aic,max_vif`; variants that could not be fitted get `NA`.
pub fn write_gravity_report_csv<W: Write>(
    rows: &[(GravityVariant, std::result::Result<GravityFit, String>)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variant", "adjusted_r2", "aic", "max_vif"])?;
    for (variant, fit) in rows {
        match fit {
            Ok(f) => w.write_record([
                variant.name().to_string(),
                f.report.adjusted_r2.to_string(),
                f.report.aic.to_string(),
                f.report.max_vif().to_string(),
            ])?,
            Err(_) => w.write_record([variant.name(), "NA", "NA", "NA"])?,
        }
    }
    w.flush()?;
    Ok(())
}

/// `country_i,country_j,ln_btv_emp,ln_btv_pred`.
pub fn write_pair_predictions_csv<W: Write>(fit: &GravityFit, samples: &[CountryPairSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["country_i", "country_j", "ln_btv_emp", "ln_btv_pred"])?;
    for s in samples {
        w.write_record([
            s.country_i.clone(),
            s.country_j.clone(),
            s.ln_btv.to_string(),
            fit.predict_ln(s)?.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
