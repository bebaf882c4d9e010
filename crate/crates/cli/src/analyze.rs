//! `consim analyze ...` subcommands.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use consim_core::analysis::{
    anova_observations, load_numeric_columns, mean_by_point, mix_design, ols_fit_dropping_aliased, MIX_TERMS,
};
use consim_core::experiments::{load_records_csv, Outcome, RunRecord};
use consim_core::fmt::sig6;
use consim_core::save_json;
use consim_core::stats::{
    anova_power_required_n, anova_two_way, cohens_f, eta_squared, fit_quadratic_surface, ols_fit, PowerSpec, Rect,
};
use serde::Serialize;

use crate::Ctx;

#[derive(Subcommand)]
pub enum AnalyzeCommand {
    /// Two-way ANOVA of the outcome on bot type and its proportion.
    Anova(RecordInput),
    /// Regression of the outcome on the bot mix.
    Ols {
        #[command(flatten)]
        input: RecordInput,
        /// Drop columns that are linear combinations of earlier ones
        /// instead of failing.
        #[arg(long)]
        drop_aliased: bool,
    },
    /// Fit a quadratic surface T(b, d) and locate its extrema.
    Surface(SurfaceArgs),
    /// Per-group replications needed for a one-way ANOVA F test.
    Power(PowerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutcomeArg {
    Majority,
    AllBad,
}

impl From<OutcomeArg> for Outcome {
    fn from(o: OutcomeArg) -> Self {
        match o {
            OutcomeArg::Majority => Outcome::BadMajority,
            OutcomeArg::AllBad => Outcome::AllBad,
        }
    }
}

#[derive(Args)]
pub struct RecordInput {
    /// runs.csv files; repeat to pool several sweeps.
    #[arg(long, short, required = true)]
    input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "majority")]
    outcome: OutcomeArg,
}

impl RecordInput {
    fn load(&self) -> Result<Vec<RunRecord>> {
        let mut all = Vec::new();
        for p in &self.input {
            all.extend(load_records_csv(p).with_context(|| format!("cannot load {}", p.display()))?);
        }
        Ok(all)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Defender {
    InfoCorrection,
    Good,
}

#[derive(Args)]
pub struct SurfaceArgs {
    /// CSV with the b, d and T columns (a runs.csv by default).
    #[arg(long, short, required = true)]
    input: Vec<PathBuf>,
    /// Defender axis of a runs.csv: alpha2 or alpha3.
    #[arg(long, value_enum, default_value = "info-correction")]
    defender: Defender,
    #[arg(long, value_enum, default_value = "majority")]
    outcome: OutcomeArg,
    /// Override the b column name.
    #[arg(long)]
    b_column: Option<String>,
    /// Override the d column name.
    #[arg(long)]
    d_column: Option<String>,
    /// Override the T column name.
    #[arg(long)]
    t_column: Option<String>,
    /// Fit every row instead of the per-(b, d) means.
    #[arg(long)]
    raw: bool,
    /// Extrema box as `b_lo,b_hi,d_lo,d_hi`; defaults to the data range.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    r#box: Option<Vec<f64>>,
    /// Grid cells per side in surface_grid.csv.
    #[arg(long, default_value_t = 20)]
    grid_steps: usize,
}

#[derive(Args)]
pub struct PowerArgs {
    /// Effect size as eta squared.
    #[arg(long, conflicts_with = "f", required_unless_present = "f")]
    eta2: Option<f64>,
    /// Effect size as Cohen's f.
    #[arg(long)]
    f: Option<f64>,
    /// Number of groups (conditions).
    #[arg(long, short)]
    groups: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.8)]
    power: f64,
}

pub fn run(ctx: &Ctx, cmd: AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Anova(input) => anova(ctx, &input),
        AnalyzeCommand::Ols { input, drop_aliased } => ols(ctx, &input, drop_aliased),
        AnalyzeCommand::Surface(args) => surface(ctx, &args),
        AnalyzeCommand::Power(args) => power(ctx, &args),
    }
}

fn write_json<T: Serialize>(ctx: &Ctx, name: &str, value: &T) -> Result<()> {
    if ctx.out.is_some() {
        let path = ctx.out_dir("out")?.join(name);
        save_json(&path, value)?;
    }
    Ok(())
}

fn anova(ctx: &Ctx, input: &RecordInput) -> Result<()> {
    let obs = anova_observations(&input.load()?, input.outcome.into());
    let table = anova_two_way(&obs)?;
    #[derive(Serialize)]
    struct Effect {
        term: String,
        eta_squared: f64,
        cohens_f: f64,
    }
    let effects = table
        .terms
        .iter()
        .map(|t| {
            let eta2 = eta_squared(&table, &t.term)?;
            Ok(Effect {
                term: t.term.clone(),
                eta_squared: eta2,
                cohens_f: cohens_f(eta2).unwrap_or(f64::INFINITY),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ctx.say(format!("levels: {} (first is the reference)", table.levels.join(", ")));
    ctx.say(table.to_text().trim_end());
    for e in &effects {
        ctx.say(format!(
            "eta^2({}) = {}, f = {}",
            e.term,
            sig6(e.eta_squared),
            sig6(e.cohens_f)
        ));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        observations: usize,
        table: &'a consim_core::AnovaTable,
        effects: Vec<Effect>,
    }
    write_json(
        ctx,
        "anova.json",
        &Report {
            observations: obs.len(),
            table: &table,
            effects,
        },
    )
}

fn ols(ctx: &Ctx, input: &RecordInput, drop_aliased: bool) -> Result<()> {
    let (rows, y) = mix_design(&input.load()?, input.outcome.into());
    let (fit, dropped) = if drop_aliased {
        let out = ols_fit_dropping_aliased(&MIX_TERMS, &rows, &y)?;
        (out.fit, out.dropped)
    } else {
        (ols_fit(&MIX_TERMS, &rows, &y, true)?, Vec::new())
    };
    ctx.say(fit.to_text().trim_end());
    if !dropped.is_empty() {
        ctx.say(format!("dropped aliased columns: {}", dropped.join(", ")));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        fit: &'a consim_core::LinearFit,
        dropped: &'a [String],
    }
    write_json(
        ctx,
        "ols.json",
        &Report {
            fit: &fit,
            dropped: &dropped,
        },
    )
}

fn surface(ctx: &Ctx, args: &SurfaceArgs) -> Result<()> {
    let b = args.b_column.clone().unwrap_or_else(|| "alpha1".into());
    let d = args.d_column.clone().unwrap_or_else(|| {
        match args.defender {
            Defender::InfoCorrection => "alpha2",
            Defender::Good => "alpha3",
        }
        .into()
    });
    let t = args.t_column.clone().unwrap_or_else(|| {
        match args.outcome {
            OutcomeArg::Majority => "bad_majority_tick",
            OutcomeArg::AllBad => "all_bad_tick",
        }
        .into()
    });
    let mut rows = Vec::new();
    for p in &args.input {
        rows.extend(load_numeric_columns(p, &[&b, &d, &t]).with_context(|| format!("cannot load {}", p.display()))?);
    }
    let points: Vec<(f64, f64, f64)> = if args.raw {
        rows.iter()
            .filter_map(|r| match r[..] {
                [Some(b), Some(d), Some(t)] => Some((b, d, t)),
                _ => None,
            })
            .collect()
    } else {
        mean_by_point(&rows)
    };
    if points.is_empty() {
        bail!("no rows with all of `{b}`, `{d}` and `{t}` present");
    }
    let (surface, fit) = fit_quadratic_surface(&points)?;
    let rect = match &args.r#box {
        Some(v) => Rect {
            b_lo: v[0],
            b_hi: v[1],
            d_lo: v[2],
            d_hi: v[3],
        },
        None => {
            let range = |f: fn(&(f64, f64, f64)) -> f64| {
                points
                    .iter()
                    .map(f)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
            };
            let (b_lo, b_hi) = range(|p| p.0);
            let (d_lo, d_hi) = range(|p| p.1);
            Rect { b_lo, b_hi, d_lo, d_hi }
        }
    };
    if !(rect.b_lo <= rect.b_hi && rect.d_lo <= rect.d_hi) {
        bail!("empty extrema box");
    }
    let stationary = surface.stationary_point();
    let extrema = surface.extrema_on_box(rect);

    let names = [
        "beta0",
        "beta1 (b)",
        "beta2 (d)",
        "beta3 (b*d)",
        "beta4 (b^2)",
        "beta5 (d^2)",
    ];
    ctx.say(format!(
        "T({b}, {d}) fitted to {} points, R^2 = {}",
        points.len(),
        sig6(fit.r_squared)
    ));
    for (n, v) in names.iter().zip(surface.beta) {
        ctx.say(format!("  {n:<12} {}", sig6(v)));
    }
    match (stationary.point, stationary.value) {
        (Some((sb, sd)), Some(v)) => ctx.say(format!(
            "stationary point: ({}, {}) T = {} [{:?}]",
            sig6(sb),
            sig6(sd),
            sig6(v),
            stationary.classification
        )),
        _ => ctx.say("stationary point: none (degenerate Hessian)"),
    }
    ctx.say(format!(
        "on [{}, {}] x [{}, {}]: min {} at ({}, {}), max {} at ({}, {})",
        sig6(rect.b_lo),
        sig6(rect.b_hi),
        sig6(rect.d_lo),
        sig6(rect.d_hi),
        sig6(extrema.min),
        sig6(extrema.argmin.0),
        sig6(extrema.argmin.1),
        sig6(extrema.max),
        sig6(extrema.argmax.0),
        sig6(extrema.argmax.1),
    ));
    if ctx.out.is_some() {
        #[derive(Serialize)]
        struct Report<'a> {
            b_column: &'a str,
            d_column: &'a str,
            t_column: &'a str,
            points: usize,
            surface: consim_core::QuadraticSurface,
            r_squared: f64,
            stationary_point: consim_core::stats::StationaryPoint,
            region: Rect,
            extrema: consim_core::stats::BoxExtrema,
        }
        write_json(
            ctx,
            "surface.json",
            &Report {
                b_column: &b,
                d_column: &d,
                t_column: &t,
                points: points.len(),
                surface,
                r_squared: fit.r_squared,
                stationary_point: stationary,
                region: rect,
                extrema,
            },
        )?;
        let grid = std::fs::File::create(ctx.out_dir("out")?.join("surface_grid.csv"))?;
        surface.write_grid_csv(grid, rect, args.grid_steps)?;
    }
    Ok(())
}

fn power(ctx: &Ctx, args: &PowerArgs) -> Result<()> {
    let f = match (args.eta2, args.f) {
        (Some(eta2), _) => cohens_f(eta2)?,
        (None, Some(f)) => f,
        (None, None) => bail!("pass --eta2 or --f"),
    };
    let spec = PowerSpec {
        effect_size: f,
        groups: args.groups,
        alpha: args.alpha,
        power: args.power,
    };
    let sol = anova_power_required_n(&spec)?;
    ctx.say(format!("f = {}", sig6(f)));
    ctx.say(format!("n = {} per group (continuous)", sig6(sol.n)));
    ctx.say(format!(
        "n = {} per group (whole), power {}",
        sol.n_ceil,
        sig6(sol.achieved_power)
    ));
    #[derive(Serialize)]
    struct Report {
        spec: PowerSpec,
        solution: consim_core::stats::PowerSolution,
    }
    write_json(ctx, "power.json", &Report { spec, solution: sol })
}
