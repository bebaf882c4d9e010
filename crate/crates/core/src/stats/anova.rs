//! Two-way sequential (Type-I) ANOVA of a categorical factor against a
//! continuous single-df regressor, plus effect sizes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dist::f_sf;
use super::fmt_table;
use super::ols::ols_fit;
use crate::error::{Error, Result};

pub const TERM_BOT_TYPE: &str = "bot_type";
pub const TERM_PROPORTION: &str = "proportion";
pub const TERM_INTERACTION: &str = "bot_type:proportion";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaObservation {
    pub bot_type: String,
    pub proportion: f64,
    pub outcome: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub term: String,
    pub df: usize,
    pub sum_sq: f64,
    pub mean_sq: f64,
    /// `NaN` when both the term and residual mean squares vanish.
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub df: usize,
    pub sum_sq: f64,
    pub mean_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub terms: Vec<AnovaRow>,
    pub residual: ResidualRow,
    /// Centered total sum of squares of the outcome.
    pub total_sum_sq: f64,
    /// Factor levels; the first is the reference level of the dummies.
    pub levels: Vec<String>,
}

impl AnovaTable {
    pub fn term(&self, name: &str) -> Option<&AnovaRow> {
        self.terms.iter().find(|r| r.term == name)
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![vec![
            "term".to_string(),
            "df".into(),
            "sum_sq".into(),
            "mean_sq".into(),
            "F".into(),
            "p".into(),
        ]];
        for t in &self.terms {
            rows.push(vec![
                t.term.clone(),
                t.df.to_string(),
                fmt_table::num(t.sum_sq),
                fmt_table::num(t.mean_sq),
                fmt_table::num(t.f),
                fmt_table::num(t.p),
            ]);
        }
        rows.push(vec![
            "Residual".into(),
            self.residual.df.to_string(),
            fmt_table::num(self.residual.sum_sq),
            fmt_table::num(self.residual.mean_sq),
            String::new(),
            String::new(),
        ]);
        fmt_table::render(&rows)
    }
}

/// Sequential sums of squares for `bot_type`, `proportion` and their
/// interaction, in that order.
pub fn anova_two_way(data: &[AnovaObservation]) -> Result<AnovaTable> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for obs in data {
        *counts.entry(obs.bot_type.as_str()).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::param(
            TERM_BOT_TYPE,
            format!(
                "factor `{TERM_BOT_TYPE}` needs at least two levels, found {}",
                counts.len()
            ),
        ));
    }
    if let Some((level, _)) = counts.iter().find(|(_, &c)| c < 2) {
        return Err(Error::param(
            TERM_BOT_TYPE,
            format!("level `{level}` of factor `{TERM_BOT_TYPE}` has fewer than two rows"),
        ));
    }
    let levels: Vec<String> = counts.keys().map(|s| s.to_string()).collect();
    let dummies: Vec<&String> = levels.iter().skip(1).collect();

    let y: Vec<f64> = data.iter().map(|o| o.outcome).collect();
    let dummy = |o: &AnovaObservation, lvl: &str| f64::from(u8::from(o.bot_type == lvl));
    let factor_names: Vec<String> = dummies.iter().map(|l| format!("{TERM_BOT_TYPE}[{l}]")).collect();
    let inter_names: Vec<String> = dummies
        .iter()
        .map(|l| format!("{TERM_BOT_TYPE}[{l}]:{TERM_PROPORTION}"))
        .collect();

    let build = |stage: usize| -> (Vec<String>, Vec<Vec<f64>>) {
        let mut names = factor_names.clone();
        if stage >= 2 {
            names.push(TERM_PROPORTION.to_string());
        }
        if stage >= 3 {
            names.extend(inter_names.iter().cloned());
        }
        let rows = data
            .iter()
            .map(|o| {
                let mut row: Vec<f64> = dummies.iter().map(|l| dummy(o, l)).collect();
                if stage >= 2 {
                    row.push(o.proportion);
                }
                if stage >= 3 {
                    row.extend(dummies.iter().map(|l| dummy(o, l) * o.proportion));
                }
                row
            })
            .collect();
        (names, rows)
    };

    let n = data.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let total_sum_sq: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let mut rss = vec![total_sum_sq];
    let mut df_res = 0;
    for stage in 1..=3 {
        let (names, rows) = build(stage);
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let fit = ols_fit(&names, &rows, &y, true)?;
        rss.push(fit.rss);
        df_res = fit.df_residual;
    }

    let residual_ss = rss[3];
    let residual_ms = residual_ss / df_res as f64;
    let k = dummies.len();
    let terms = [(TERM_BOT_TYPE, k), (TERM_PROPORTION, 1), (TERM_INTERACTION, k)]
        .iter()
        .enumerate()
        .map(|(i, &(name, df))| {
            let sum_sq = (rss[i] - rss[i + 1]).max(0.0);
            let mean_sq = sum_sq / df as f64;
            let f = mean_sq / residual_ms;
            AnovaRow {
                term: name.to_string(),
                df,
                sum_sq,
                mean_sq,
                f,
                p: f_sf(f, df as f64, df_res as f64),
            }
        })
        .collect();

    Ok(AnovaTable {
        terms,
        residual: ResidualRow {
            df: df_res,
            sum_sq: residual_ss,
            mean_sq: residual_ms,
        },
        total_sum_sq,
        levels,
    })
}

/// `SS_term / SS_total`.
pub fn eta_squared(table: &AnovaTable, term: &str) -> Result<f64> {
    let row = table
        .term(term)
        .ok_or_else(|| Error::param("term", format!("no term `{term}` in the table")))?;
    if table.total_sum_sq <= 0.0 {
        return Err(Error::param("outcome", "total sum of squares is zero"));
    }
    Ok(row.sum_sq / table.total_sum_sq)
}

/// Cohen's `f = sqrt(η² / (1 - η²))`.
pub fn cohens_f(eta2: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta2) {
        return Err(Error::param("eta2", format!("must lie in [0, 1), got {eta2}")));
    }
    Ok((eta2 / (1.0 - eta2)).sqrt())
}

/// Inverse of [`cohens_f`].
pub fn eta_squared_from_f(f: f64) -> f64 {
    f * f / (1.0 + f * f)
}
