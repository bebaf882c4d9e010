//! Named sweep designs, replicated execution and result persistence.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{DefenderBasis, FlipRule, RelayMode, SimParams, Simulation};
use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::network::GraphModel;

pub const DEFAULT_REPLICATIONS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    #[serde(rename = "threshold")]
    ThresholdSweep,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::ThresholdSweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
            ExperimentId::E5 => "E5",
            ExperimentId::ThresholdSweep => "threshold",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    /// Accepts `1`..`5`, `E1`..`E5` (any case) and `threshold`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let id = match t.trim_start_matches('e') {
            "1" => ExperimentId::E1,
            "2" => ExperimentId::E2,
            "3" => ExperimentId::E3,
            "4" => ExperimentId::E4,
            "5" => ExperimentId::E5,
            _ if t == "threshold" || t == "t" => ExperimentId::ThresholdSweep,
            _ => return Err(Error::param("experiment", format!("unknown experiment id `{s}`"))),
        };
        Ok(id)
    }
}

/// A fully expanded sweep: every condition is a complete parameter set
/// (its `seed` field is replaced per replicate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub experiment_id: ExperimentId,
    pub conditions: Vec<SimParams>,
    pub replications: usize,
    pub base_seed: u64,
    /// Free-form remark carried into output metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::param("conditions", "sweep has no conditions"));
        }
        if self.replications < 1 {
            return Err(Error::param("replications", "need at least one replication"));
        }
        for cond in &self.conditions {
            cond.validate()?;
        }
        Ok(())
    }

    pub fn total_runs(&self) -> usize {
        self.conditions.len() * self.replications
    }
}

/// `[0.1, 0.2, ..., count / 10]`, each value the nearest double to its
/// one-decimal literal.
fn tenths(count: usize) -> Vec<f64> {
    (1..=count).map(|i| i as f64 / 10.0).collect()
}

/// Builds one of the named experiment designs on top of the defaults.
pub fn build_experiment(id: ExperimentId) -> SweepSpec {
    build_experiment_from(id, &SimParams::default())
}

/// Builds a named design, taking every parameter that the design does not
/// vary from `base`. The design's own control values (bot ratios not under
/// study, threshold 72 outside the threshold sweep) override `base`.
pub fn build_experiment_from(id: ExperimentId, base: &SimParams) -> SweepSpec {
    let with = |a1: f64, a2: f64, a3: f64| SimParams {
        bad_bot_ratio: a1,
        info_correction_ratio: a2,
        good_bot_ratio: a3,
        threshold: 72,
        ..base.clone()
    };
    let mut note = None;
    let conditions: Vec<SimParams> = match id {
        ExperimentId::E1 => tenths(10).into_iter().map(|a1| with(a1, 0.0, 0.0)).collect(),
        ExperimentId::E2 => tenths(15).into_iter().map(|a2| with(0.2, a2, 0.0)).collect(),
        ExperimentId::E3 => tenths(20).into_iter().map(|a3| with(0.2, 0.0, a3)).collect(),
        ExperimentId::E4 => tenths(10)
            .into_iter()
            .flat_map(|a1| tenths(10).into_iter().map(move |a2| (a1, a2)))
            .map(|(a1, a2)| with(a1, a2, 0.0))
            .collect(),
        ExperimentId::E5 => {
            note = Some("alpha1 spans [0.1, 2.0] against ten alpha3 levels: 20 x 10 = 200 conditions".to_string());
            tenths(20)
                .into_iter()
                .flat_map(|a1| tenths(10).into_iter().map(move |a3| (a1, a3)))
                .map(|(a1, a3)| with(a1, 0.0, a3))
                .collect()
        }
        ExperimentId::ThresholdSweep => (1..=10)
            .map(|i| SimParams {
                threshold: 10 * i,
                ..with(0.2, 0.0, 0.0)
            })
            .collect(),
    };
    SweepSpec {
        experiment_id: id,
        conditions,
        replications: DEFAULT_REPLICATIONS,
        base_seed: 0,
        note,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `replicate` of condition `condition`.
pub fn derive_seed(base_seed: u64, condition: usize, replicate: usize) -> u64 {
    let c = splitmix64(splitmix64(base_seed) ^ condition as u64);
    splitmix64(c ^ (replicate as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment_id: ExperimentId,
    pub condition_index: usize,
    pub replicate_index: usize,
    /// Parameters the replicate ran with; `params.seed` is the derived seed.
    pub params: SimParams,
    pub bad_majority_tick: Option<u64>,
    pub all_bad_tick: Option<u64>,
    pub ticks_run: u64,
}

impl RunRecord {
    pub fn seed(&self) -> u64 {
        self.params.seed
    }
}

/// Runs one replicate of one condition.
pub fn run_replicate(spec: &SweepSpec, condition: usize, replicate: usize) -> Result<RunRecord> {
    let mut params = spec.conditions[condition].clone();
    params.seed = derive_seed(spec.base_seed, condition, replicate);
    let outcome = Simulation::new(params.clone())
        .map_err(|e| Error::Run {
            condition,
            replicate,
            source: Box::new(e),
        })?
        .run_to_completion();
    Ok(RunRecord {
        experiment_id: spec.experiment_id,
        condition_index: condition,
        replicate_index: replicate,
        params,
        bad_majority_tick: outcome.bad_majority_tick,
        all_bad_tick: outcome.all_bad_tick,
        ticks_run: outcome.ticks_run,
    })
}

/// Executes every `(condition, replicate)` pair once on a pool of `jobs`
/// workers. Output order is `(condition, replicate)` regardless of `jobs`.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let tasks: Vec<(usize, usize)> = (0..spec.conditions.len())
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::param("jobs", e.to_string()))?;
    pool.install(|| tasks.par_iter().map(|&(c, r)| run_replicate(spec, c, r)).collect())
}

/// Which outcome tick an analysis looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    BadMajority,
    AllBad,
}

impl Outcome {
    pub fn of(self, r: &RunRecord) -> Option<u64> {
        match self {
            Outcome::BadMajority => r.bad_majority_tick,
            Outcome::AllBad => r.all_bad_tick,
        }
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "majority" | "bad-majority" => Ok(Outcome::BadMajority),
            "all-bad" | "allbad" => Ok(Outcome::AllBad),
            _ => Err(Error::param("outcome", format!("unknown outcome `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    /// Mean over replicates where the event happened; `None` if none did.
    pub mean: Option<f64>,
    /// Sample standard deviation; `None` with fewer than two events.
    pub sd: Option<f64>,
    pub converged: usize,
    /// Share of replicates that hit the tick cap without the event.
    pub dnc_fraction: f64,
}

impl OutcomeSummary {
    pub fn from_ticks(ticks: &[Option<u64>]) -> Self {
        let hits: Vec<f64> = ticks.iter().flatten().map(|&t| t as f64).collect();
        let (mean, sd) = mean_sd(&hits);
        Self {
            mean,
            sd,
            converged: hits.len(),
            dnc_fraction: if ticks.is_empty() {
                0.0
            } else {
                (ticks.len() - hits.len()) as f64 / ticks.len() as f64
            },
        }
    }
}

/// Mean and sample (n - 1) standard deviation.
pub fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.len() >= 2).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub experiment_id: ExperimentId,
    pub condition_index: usize,
    /// Condition parameters as run by its first replicate.
    pub params: SimParams,
    pub replicates: usize,
    pub bad_majority: OutcomeSummary,
    pub all_bad: OutcomeSummary,
}

/// Per-condition statistics, ordered by `(experiment, condition)`.
pub fn summarize(records: &[RunRecord]) -> Result<Vec<ConditionSummary>> {
    if records.is_empty() {
        return Err(Error::param("records", "nothing to summarize"));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.experiment_id, r.condition_index, r.replicate_index));
    let groups = sorted.chunk_by(|a, b| a.experiment_id == b.experiment_id && a.condition_index == b.condition_index);
    Ok(groups
        .map(|group| {
            let first = group[0];
            let majority: Vec<_> = group.iter().map(|r| r.bad_majority_tick).collect();
            let all_bad: Vec<_> = group.iter().map(|r| r.all_bad_tick).collect();
            ConditionSummary {
                experiment_id: first.experiment_id,
                condition_index: first.condition_index,
                params: first.params.clone(),
                replicates: group.len(),
                bad_majority: OutcomeSummary::from_ticks(&majority),
                all_bad: OutcomeSummary::from_ticks(&all_bad),
            }
        })
        .collect())
}

/// Pools an outcome over every record (all conditions together).
pub fn pooled(records: &[RunRecord], outcome: Outcome) -> OutcomeSummary {
    let ticks: Vec<_> = records.iter().map(|r| outcome.of(r)).collect();
    OutcomeSummary::from_ticks(&ticks)
}

pub const RUNS_HEADER: [&str; 23] = [
    "experiment_id",
    "condition_index",
    "replicate_index",
    "seed",
    "n_h",
    "alpha1",
    "alpha2",
    "alpha3",
    "defender_basis",
    "p_g",
    "p_c",
    "p_p",
    "threshold_t",
    "max_ticks",
    "graph_model",
    "k",
    "beta",
    "flip_rule",
    "relay",
    "exclude_sender",
    "bad_majority_tick",
    "all_bad_tick",
    "ticks_run",
];

fn enum_str<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enum serializes to a string"),
    }
}

fn opt_tick(t: Option<u64>) -> String {
    t.map(|t| t.to_string()).unwrap_or_default()
}

fn record_row(r: &RunRecord) -> [String; 23] {
    let p = &r.params;
    [
        r.experiment_id.to_string(),
        r.condition_index.to_string(),
        r.replicate_index.to_string(),
        p.seed.to_string(),
        p.humans.to_string(),
        sig6(p.bad_bot_ratio),
        sig6(p.info_correction_ratio),
        sig6(p.good_bot_ratio),
        enum_str(&p.defender_basis),
        sig6(p.p_generate),
        sig6(p.p_consume),
        sig6(p.p_propagate),
        p.threshold.to_string(),
        p.max_ticks.to_string(),
        enum_str(&p.network.model),
        p.network.k.to_string(),
        sig6(p.network.beta),
        enum_str(&p.flip_rule),
        enum_str(&p.relay),
        p.exclude_sender.to_string(),
        opt_tick(r.bad_majority_tick),
        opt_tick(r.all_bad_tick),
        r.ticks_run.to_string(),
    ]
}

pub fn write_records_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_records_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    write_records_csv(std::fs::File::create(path)?, records)
}

/// Column lookup over a CSV header with line-numbered parse errors.
pub(crate) struct Columns<'a> {
    index: Vec<usize>,
    origin: &'a Path,
}

impl<'a> Columns<'a> {
    pub(crate) fn new(headers: &csv::StringRecord, wanted: &[&str], origin: &'a Path) -> Result<Self> {
        let mut index = Vec::with_capacity(wanted.len());
        let mut missing = Vec::new();
        for name in wanted {
            match headers.iter().position(|h| h.trim() == *name) {
                Some(i) => index.push(i),
                None => missing.push((*name).to_string()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingColumns(missing));
        }
        Ok(Self { index, origin })
    }

    pub(crate) fn get<'r>(&self, row: &'r csv::StringRecord, col: usize) -> &'r str {
        row.get(self.index[col]).unwrap_or("").trim()
    }

    pub(crate) fn parse<T: FromStr>(&self, row: &csv::StringRecord, col: usize, name: &str) -> Result<T> {
        let raw = self.get(row, col);
        raw.parse()
            .map_err(|_| self.error(row, format!("column `{name}`: cannot parse `{raw}`")))
    }

    pub(crate) fn parse_opt<T: FromStr>(&self, row: &csv::StringRecord, col: usize, name: &str) -> Result<Option<T>> {
        if self.get(row, col).is_empty() {
            Ok(None)
        } else {
            self.parse(row, col, name).map(Some)
        }
    }

    pub(crate) fn error(&self, row: &csv::StringRecord, reason: String) -> Error {
        Error::Parse {
            path: self.origin.to_path_buf(),
            line: row.position().map_or(0, |p| p.line()),
            reason,
        }
    }
}

fn parse_enum<T: for<'de> Deserialize<'de>>(
    cols: &Columns,
    row: &csv::StringRecord,
    col: usize,
    name: &str,
) -> Result<T> {
    let raw = cols.get(row, col);
    serde_json::from_value(serde_json::Value::String(raw.to_string()))
        .map_err(|_| cols.error(row, format!("column `{name}`: unknown value `{raw}`")))
}

/// Reads a runs CSV. `origin` only labels error messages.
pub fn read_records_csv<R: Read>(input: R, origin: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let cols = Columns::new(&headers, &RUNS_HEADER, origin)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let h = |i: usize| RUNS_HEADER[i];
        let experiment_id: ExperimentId = cols
            .get(&row, 0)
            .parse()
            .map_err(|_| cols.error(&row, format!("unknown experiment id `{}`", cols.get(&row, 0))))?;
        let params = SimParams {
            seed: cols.parse(&row, 3, h(3))?,
            humans: cols.parse(&row, 4, h(4))?,
            bad_bot_ratio: cols.parse(&row, 5, h(5))?,
            info_correction_ratio: cols.parse(&row, 6, h(6))?,
            good_bot_ratio: cols.parse(&row, 7, h(7))?,
            defender_basis: parse_enum::<DefenderBasis>(&cols, &row, 8, h(8))?,
            p_generate: cols.parse(&row, 9, h(9))?,
            p_consume: cols.parse(&row, 10, h(10))?,
            p_propagate: cols.parse(&row, 11, h(11))?,
            threshold: cols.parse(&row, 12, h(12))?,
            max_ticks: cols.parse(&row, 13, h(13))?,
            network: crate::engine::NetworkConfig {
                model: parse_enum::<GraphModel>(&cols, &row, 14, h(14))?,
                k: cols.parse(&row, 15, h(15))?,
                beta: cols.parse(&row, 16, h(16))?,
            },
            flip_rule: parse_enum::<FlipRule>(&cols, &row, 17, h(17))?,
            relay: parse_enum::<RelayMode>(&cols, &row, 18, h(18))?,
            exclude_sender: cols.parse(&row, 19, h(19))?,
        };
        out.push(RunRecord {
            experiment_id,
            condition_index: cols.parse(&row, 1, h(1))?,
            replicate_index: cols.parse(&row, 2, h(2))?,
            params,
            bad_majority_tick: cols.parse_opt(&row, 20, h(20))?,
            all_bad_tick: cols.parse_opt(&row, 21, h(21))?,
            ticks_run: cols.parse(&row, 22, h(22))?,
        });
    }
    Ok(out)
}

pub fn load_records_csv(path: &Path) -> Result<Vec<RunRecord>> {
    read_records_csv(std::fs::File::open(path)?, path)
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "experiment_id",
    "condition_index",
    "replicates",
    "n_h",
    "alpha1",
    "alpha2",
    "alpha3",
    "threshold_t",
    "majority_mean",
    "majority_sd",
    "majority_dnc_fraction",
    "all_bad_mean",
    "all_bad_sd",
    "all_bad_dnc_fraction",
];

pub fn write_summary_csv<W: Write>(out: W, summaries: &[ConditionSummary]) -> Result<()> {
    let opt = |x: Option<f64>| x.map(sig6).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        let p = &s.params;
        w.write_record([
            s.experiment_id.to_string(),
            s.condition_index.to_string(),
            s.replicates.to_string(),
            p.humans.to_string(),
            sig6(p.bad_bot_ratio),
            sig6(p.info_correction_ratio),
            sig6(p.good_bot_ratio),
            p.threshold.to_string(),
            opt(s.bad_majority.mean),
            opt(s.bad_majority.sd),
            sig6(s.bad_majority.dnc_fraction),
            opt(s.all_bad.mean),
            opt(s.all_bad.sd),
            sig6(s.all_bad.dnc_fraction),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_summary_csv(path: &Path, summaries: &[ConditionSummary]) -> Result<()> {
    write_summary_csv(std::fs::File::create(path)?, summaries)
}
