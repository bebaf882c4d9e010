//! Turns sweep records into inputs for the statistics routines.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::engine::SimParams;
use crate::error::{Error, Result};
use crate::experiments::{Columns, Outcome, RunRecord};
use crate::stats::{ols_fit, AnovaObservation, LinearFit};

pub const BOT_BAD: &str = "bad";
pub const BOT_INFO_CORRECTION: &str = "info_correction";
pub const BOT_GOOD: &str = "good";

/// The bot type whose share a single-variation condition varies, with
/// that share. Conditions with both defender kinds present have none.
pub fn varied_bot(params: &SimParams) -> Option<(&'static str, f64)> {
    let (ic, good) = (params.info_correction_ratio, params.good_bot_ratio);
    match (ic > 0.0, good > 0.0) {
        (false, false) => Some((BOT_BAD, params.bad_bot_ratio)),
        (true, false) => Some((BOT_INFO_CORRECTION, ic)),
        (false, true) => Some((BOT_GOOD, good)),
        (true, true) => None,
    }
}

/// One observation per record where `outcome` occurred.
pub fn anova_observations(records: &[RunRecord], outcome: Outcome) -> Vec<AnovaObservation> {
    records
        .iter()
        .filter_map(|r| {
            let tick = outcome.of(r)?;
            let (bot_type, proportion) = varied_bot(&r.params)?;
            Some(AnovaObservation {
                bot_type: bot_type.to_string(),
                proportion,
                outcome: tick as f64,
            })
        })
        .collect()
}

/// Predictors of the bot-mix regression, in model order.
pub const MIX_TERMS: [&str; 10] = [
    "bad_bots",
    "good_bots",
    "info_correction_bots",
    "bad_present",
    "good_present",
    "info_correction_present",
    "bad_bots:good_present",
    "bad_bots:info_correction_present",
    "bad_bots:good_bots",
    "bad_bots:info_correction_bots",
];

fn present(x: f64) -> f64 {
    f64::from(u8::from(x > 0.0))
}

/// Design rows and responses of the bot-mix regression over records where
/// `outcome` occurred.
pub fn mix_design(records: &[RunRecord], outcome: Outcome) -> (Vec<Vec<f64>>, Vec<f64>) {
    records
        .iter()
        .filter_map(|r| {
            let t = outcome.of(r)? as f64;
            let p = &r.params;
            let (b, g, ic) = (p.bad_bot_ratio, p.good_bot_ratio, p.info_correction_ratio);
            let row = vec![
                b,
                g,
                ic,
                present(b),
                present(g),
                present(ic),
                b * present(g),
                b * present(ic),
                b * g,
                b * ic,
            ];
            Some((row, t))
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliasedFit {
    pub fit: LinearFit,
    /// Columns left out because they were linear combinations of earlier ones.
    pub dropped: Vec<String>,
}

/// Fits with an intercept, dropping each column that is aliased with the
/// columns before it and refitting until the design has full rank.
pub fn ols_fit_dropping_aliased(names: &[&str], rows: &[Vec<f64>], y: &[f64]) -> Result<AliasedFit> {
    let mut keep: Vec<usize> = (0..names.len()).collect();
    let mut dropped = Vec::new();
    loop {
        let kept_names: Vec<&str> = keep.iter().map(|&j| names[j]).collect();
        let kept_rows: Vec<Vec<f64>> = rows.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect();
        match ols_fit(&kept_names, &kept_rows, y, true) {
            Ok(fit) => return Ok(AliasedFit { fit, dropped }),
            Err(Error::Singular { column }) => {
                let Some(pos) = kept_names.iter().position(|n| *n == column) else {
                    return Err(Error::Singular { column });
                };
                dropped.push(column);
                keep.remove(pos);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Reads named numeric columns from any CSV; empty cells become `None`.
pub fn read_numeric_columns<R: Read>(input: R, origin: &Path, names: &[&str]) -> Result<Vec<Vec<Option<f64>>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(&headers, names, origin)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let values = (0..names.len())
            .map(|c| cols.parse_opt::<f64>(&row, c, names[c]))
            .collect::<Result<Vec<_>>>()?;
        out.push(values);
    }
    Ok(out)
}

pub fn load_numeric_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<Option<f64>>>> {
    read_numeric_columns(std::fs::File::open(path)?, path, names)
}

/// Averages `t` over rows sharing the same `(b, d)`; rows with any value
/// missing are skipped.
pub fn mean_by_point(rows: &[Vec<Option<f64>>]) -> Vec<(f64, f64, f64)> {
    let mut groups: BTreeMap<(u64, u64), (f64, f64, f64, usize)> = BTreeMap::new();
    for row in rows {
        if let [Some(b), Some(d), Some(t)] = row[..] {
            let e = groups.entry((b.to_bits(), d.to_bits())).or_insert((b, d, 0.0, 0));
            e.2 += t;
            e.3 += 1;
        }
    }
    let mut pts: Vec<_> = groups.into_values().map(|(b, d, s, n)| (b, d, s / n as f64)).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pts
}
