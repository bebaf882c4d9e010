//! Ordinary least squares through a Householder QR factorization.

use serde::Serialize;

use super::dist::{f_sf, t_two_sided_p};
use super::fmt_table;
use crate::error::{Error, Result};

pub const INTERCEPT: &str = "Intercept";

/// A column whose orthogonal remainder is below this fraction of its own
/// norm counts as linearly dependent on the preceding columns.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit {
    /// Term names in coefficient order, `Intercept` first when present.
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// Overall F test against the intercept-only (or empty) model.
    pub f_statistic: Option<f64>,
    pub f_p_value: Option<f64>,
    pub rss: f64,
    pub observations: usize,
    pub df_model: usize,
    pub df_residual: usize,
    pub intercept: bool,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl LinearFit {
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.terms.iter().position(|t| t == term).map(|i| self.coefficients[i])
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let (b0, rest) = if self.intercept {
            (self.coefficients[0], &self.coefficients[1..])
        } else {
            (0.0, &self.coefficients[..])
        };
        b0 + rest.iter().zip(row).map(|(b, x)| b * x).sum::<f64>()
    }

    /// Aligned plain-text coefficient table.
    pub fn to_text(&self) -> String {
        let mut rows = vec![vec![
            "term".to_string(),
            "coef".into(),
            "std_err".into(),
            "t".into(),
            "p".into(),
        ]];
        for i in 0..self.terms.len() {
            rows.push(vec![
                self.terms[i].clone(),
                fmt_table::num(self.coefficients[i]),
                fmt_table::num(self.std_errors[i]),
                fmt_table::num(self.t_values[i]),
                fmt_table::num(self.p_values[i]),
            ]);
        }
        let mut out = fmt_table::render(&rows);
        out.push_str(&format!(
            "n = {}, df_residual = {}, R^2 = {}, adj R^2 = {}, F = {}, p(F) = {}\n",
            self.observations,
            self.df_residual,
            fmt_table::num(self.r_squared),
            fmt_table::num(self.adj_r_squared),
            self.f_statistic.map_or("-".into(), fmt_table::num),
            self.f_p_value.map_or("-".into(), fmt_table::num),
        ));
        out
    }
}

/// Fits `y ~ rows` by least squares. `names` labels the predictor columns
/// of `rows`; with `intercept` a constant column is prepended.
pub fn ols_fit(names: &[&str], rows: &[Vec<f64>], y: &[f64], intercept: bool) -> Result<LinearFit> {
    let n = rows.len();
    if y.len() != n {
        return Err(Error::param(
            "response",
            format!("{} responses for {n} design rows", y.len()),
        ));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != names.len()) {
        return Err(Error::param(
            "design",
            format!("row {bad} has {} values, expected {}", rows[bad].len(), names.len()),
        ));
    }
    let mut terms: Vec<String> = Vec::with_capacity(names.len() + 1);
    if intercept {
        terms.push(INTERCEPT.to_string());
    }
    terms.extend(names.iter().map(|s| s.to_string()));
    let p = terms.len();
    if n < p + 1 {
        return Err(Error::param(
            "design",
            format!("{n} observations cannot fit {p} coefficients with residual degrees of freedom"),
        ));
    }

    // column-major copy of the design
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(p);
    if intercept {
        a.push(vec![1.0; n]);
    }
    for j in 0..names.len() {
        a.push(rows.iter().map(|r| r[j]).collect());
    }
    if let Some(j) = a.iter().position(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::param(
            "design",
            format!("column `{}` has a non-finite value", terms[j]),
        ));
    }
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut qty = y.to_vec();
    let mut r = vec![vec![0.0; p]; p];

    for j in 0..p {
        let alpha = {
            let x = &a[j][j..];
            let s = norm(x);
            if x[0] > 0.0 {
                -s
            } else {
                s
            }
        };
        if alpha.abs() <= RANK_TOLERANCE * col_norms[j] || col_norms[j] == 0.0 {
            return Err(Error::Singular {
                column: terms[j].clone(),
            });
        }
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vv;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut qty[j..]);
        for (i, col) in a.iter().enumerate().skip(j) {
            r[j][i] = col[j];
        }
    }

    let beta = back_substitute(&r, &qty[..p]);
    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let fitted: f64 = if intercept {
                beta[0] + beta[1..].iter().zip(&rows[i]).map(|(b, x)| b * x).sum::<f64>()
            } else {
                beta.iter().zip(&rows[i]).map(|(b, x)| b * x).sum()
            };
            y[i] - fitted
        })
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let df_residual = n - p;
    let sigma2 = rss / df_residual as f64;

    let r_inv = upper_inverse(&r);
    let std_errors: Vec<f64> = (0..p)
        .map(|i| (sigma2 * r_inv[i][i..].iter().map(|v| v * v).sum::<f64>()).sqrt())
        .collect();
    let t_values: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, se)| b / se).collect();
    let p_values: Vec<f64> = t_values.iter().map(|&t| t_two_sided_p(t, df_residual as f64)).collect();

    let tss = if intercept {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    let r_squared = if tss > 0.0 {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let df_model = p - usize::from(intercept);
    let denom_df = (n - usize::from(intercept)) as f64;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * denom_df / df_residual as f64;
    let (f_statistic, f_p_value) = if df_model > 0 {
        let f = ((tss - rss).max(0.0) / df_model as f64) / sigma2;
        (Some(f), Some(f_sf(f, df_model as f64, df_residual as f64)))
    } else {
        (None, None)
    };

    Ok(LinearFit {
        terms,
        coefficients: beta,
        std_errors,
        t_values,
        p_values,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        rss,
        observations: n,
        df_model,
        df_residual,
        intercept,
        residuals,
    })
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

fn back_substitute(r: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| r[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / r[i][i];
    }
    x
}

/// Inverse of an upper-triangular matrix (itself upper triangular).
fn upper_inverse(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = r.len();
    let mut inv = vec![vec![0.0; p]; p];
    for j in 0..p {
        inv[j][j] = 1.0 / r[j][j];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|k| r[i][k] * inv[k][j]).sum();
            inv[i][j] = -s / r[i][i];
        }
    }
    inv
}
