use nalgebra::{DMatrix, DVector};

use super::stats::{t_quantile, t_two_sided_p};
use super::{mean, DesignMatrix};
use crate::error::{Error, Result};

/// Smallest-to-largest singular value ratio (unit-norm columns) below which a
/// design counts as exactly collinear.
pub const COLLINEARITY_RATIO: f64 = 1e-10;

/// `N ln(RSS / N) + 2K`, with `K` counting the intercept.
pub fn aic(n_obs: usize, rss: f64, k_params: usize) -> f64 {
    let n = n_obs as f64;
    n * (rss / n).ln() + 2.0 * k_params as f64
}

/// `1 − (1 − R²)(N − 1)/(N − p − 1)` with `p` explanatory variables.
pub fn adjusted_r2(r2: f64, n_obs: usize, n_vars: usize) -> f64 {
    let n = n_obs as f64;
    1.0 - (1.0 - r2) * (n - 1.0) / (n - n_vars as f64 - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub response: String,
    pub variables: Vec<String>,
    pub intercept: Coefficient,
    pub coefficients: Vec<Coefficient>,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub aic: f64,
    pub rss: f64,
    /// One per variable; `f64::INFINITY` marks exact collinearity.
    pub vif: Vec<f64>,
    pub n_obs: usize,
    pub k_params: usize,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub standardized: bool,
}

impl RegressionReport {
    pub fn max_vif(&self) -> f64 {
        self.vif.iter().copied().fold(1.0, f64::max)
    }

    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// Intercept plus slopes applied to one observation (raw column values).
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept.estimate
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(c, x)| c.estimate * x)
                .sum::<f64>()
    }
}

fn with_intercept(columns: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(
        n,
        columns.len() + 1,
        |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] },
    )
}

/// Singular value ratio of the column-normalized matrix.
fn conditioning(x: &DMatrix<f64>) -> f64 {
    let mut scaled = x.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let sv = scaled.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Least squares with an intercept, solved through a Householder QR factorization.
pub fn ols_fit(design: &DesignMatrix) -> Result<RegressionReport> {
    let n = design.n_obs();
    let p = design.n_vars();
    let k = p + 1;
    if n <= k {
        return Err(Error::TooFewObservations { n_obs: n, k_params: k });
    }
    let x = with_intercept(&design.columns, n);
    let ratio = conditioning(&x);
    if ratio < COLLINEARITY_RATIO {
        return Err(Error::RankDeficient(ratio));
    }
    let y = DVector::from_column_slice(&design.response);

    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &y;
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient(0.0))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient(0.0))?;
    // (XᵀX)⁻¹ = R⁻¹R⁻ᵀ
    let xtx_inv = &r_inv * r_inv.transpose();

    let fitted = &x * &beta;
    let residuals = &y - &fitted;
    let rss = residuals.norm_squared();
    let y_mean = mean(&design.response);
    let tss: f64 = design.response.iter().map(|v| (v - y_mean).powi(2)).sum();
    if tss == 0.0 {
        return Err(Error::ConstantColumn(design.response_name.clone()));
    }
    let r2 = (1.0 - rss / tss).clamp(0.0, 1.0);
    let df = (n - k) as f64;
    let sigma2 = rss / df;
    let t_crit = t_quantile(0.975, df);

    let coef = |j: usize, name: &str| {
        let estimate = beta[j];
        let std_error = (sigma2 * xtx_inv[(j, j)]).max(0.0).sqrt();
        let t_value = if std_error > 0.0 {
            estimate / std_error
        } else if estimate == 0.0 {
            0.0
        } else {
            estimate.signum() * f64::INFINITY
        };
        Coefficient {
            name: name.to_string(),
            estimate,
            std_error,
            t_value,
            p_value: t_two_sided_p(t_value, df),
            ci_low: estimate - t_crit * std_error,
            ci_high: estimate + t_crit * std_error,
        }
    };

    Ok(RegressionReport {
        response: design.response_name.clone(),
        variables: design.names.clone(),
        intercept: coef(0, "(intercept)"),
        coefficients: design
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| coef(j + 1, name))
            .collect(),
        r2,
        adjusted_r2: adjusted_r2(r2, n, p),
        aic: aic(n, rss, k),
        rss,
        vif: vif(design),
        n_obs: n,
        k_params: k,
        fitted: fitted.iter().copied().collect(),
        residuals: residuals.iter().copied().collect(),
        standardized: design.standardized,
    })
}

/// Variance inflation factor of every column: `1 / (1 − R²_j)` where `R²_j`
/// comes from regressing column `j` on the other columns plus an intercept.
pub fn vif(design: &DesignMatrix) -> Vec<f64> {
    let p = design.n_vars();
    if p == 1 {
        return vec![1.0];
    }
    let n = design.n_obs();
    (0..p)
        .map(|j| {
            let target = &design.columns[j];
            let others: Vec<Vec<f64>> = design
                .columns
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, c)| c.clone())
                .collect();
            let x = with_intercept(&others, n);
            let y = DVector::from_column_slice(target);
            let m = mean(target);
            let tss: f64 = target.iter().map(|v| (v - m).powi(2)).sum();
            if tss == 0.0 {
                return f64::INFINITY;
            }
            // Pseudo-inverse solve tolerates collinearity among the other columns.
            let svd = x.clone().svd(true, true);
            let tol = svd.singular_values.max() * COLLINEARITY_RATIO;
            let beta = match svd.solve(&y, tol) {
                Ok(b) => b,
                Err(_) => return f64::INFINITY,
            };
            let rss = (&y - &x * beta).norm_squared();
            let unexplained = rss / tss;
            if unexplained <= COLLINEARITY_RATIO {
                f64::INFINITY
            } else {
                (1.0 / unexplained.min(1.0)).max(1.0)
            }
        })
        .collect()
}
