//! The `trust-game` command line: `oracle`, `simulate` and `sweep`.
//!
//! Commands write to a caller-supplied stdout so they can be driven from
//! tests. Exit codes come from [`Error::exit_code`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{
    self, convergence_report, run_batch_detailed, ExperimentConfig, DEFAULT_AGENTS,
    DEFAULT_RECORD_EVERY, DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_WINDOW,
};
use crate::game::{ActionGrid, GameParams, TrusteePolicy};
use crate::oracle::{grid_argmax, Classification, OracleVerdict};
use crate::output::{
    config_comment, fmt_f64, write_comments, write_curves_csv, write_report_csv, SimulationConfig,
    SimulationDocument,
};

#[derive(Debug, Parser)]
#[command(
    name = "trust-game",
    version,
    about = "Trust game oracle and Thompson-Sampling simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal transfer fraction for a power-law trustee.
    Oracle(OracleArgs),
    /// Run a batch of learning trustors and write their choice curves.
    Simulate(SimulateArgs),
    /// Oracle (and optionally simulation) over a grid of trustee parameters.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    /// Transfer multiplier.
    #[arg(long = "K", default_value_t = 3.0)]
    pub multiplier: f64,
    #[arg(long, default_value_t = 0)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 11)]
    pub grid_size: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    #[arg(long = "K", default_value_t = 3.0)]
    pub multiplier: f64,
    #[arg(long, default_value_t = 0)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    /// Endowment.
    #[arg(long = "T", default_value_t = 1.0)]
    pub endowment: f64,
    #[arg(long, default_value_t = 11)]
    pub grid_size: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_AGENTS)]
    pub agents: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Curve sampling stride in trials.
    #[arg(long, default_value_t = DEFAULT_RECORD_EVERY)]
    pub record_every: u64,
    /// Final-window length for the convergence report; capped at --trials.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Curves file. In CSV mode the report goes next to it as
    /// `<stem>.report.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated list (`0.2,0.4`) or inclusive range (`0.2:0.2:1`).
    #[arg(long, default_value = "0:0.1:1")]
    pub alpha0: String,
    #[arg(long, default_value = "0.5")]
    pub p0: String,
    #[arg(long = "K", default_value = "3")]
    pub multiplier: String,
    #[arg(long, default_value = "0")]
    pub m: String,
    #[arg(long, default_value = "0")]
    pub n: String,
    #[arg(long, default_value_t = 11)]
    pub grid_size: usize,
    /// Also run a batch per row and report the empirical modal arm.
    #[arg(long)]
    pub simulate: bool,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_AGENTS)]
    pub agents: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Oracle(args) => cmd_oracle(&args, stdout),
        Command::Simulate(args) => cmd_simulate(&args, stdout),
        Command::Sweep(args) => cmd_sweep(&args, stdout),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Runs `f` against the file at `out`, or against `stdout`.
fn with_sink(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        None => f(stdout),
    }
}

fn join_fractions(fractions: &[f64]) -> String {
    fractions
        .iter()
        .map(|f| format!("{f:?}"))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Serialize)]
struct OracleConfig {
    alpha0: f64,
    p0: f64,
    #[serde(rename = "K")]
    multiplier: f64,
    m: u32,
    n: u32,
    grid_size: usize,
}

#[derive(Debug, Serialize)]
struct OracleDocument<'a> {
    config: OracleConfig,
    product: f64,
    classification: Classification,
    optimal_fractions: Vec<f64>,
    verdict: &'a OracleVerdict,
}

/// Verdict for one power-law trustee.
pub fn oracle_verdict(
    alpha0: f64,
    p0: f64,
    multiplier: f64,
    m: u32,
    n: u32,
    grid_size: usize,
) -> Result<(ActionGrid, OracleVerdict)> {
    let policy = TrusteePolicy::power_law(alpha0, m, p0, n)?;
    GameParams::with_multiplier(multiplier)?;
    let grid = ActionGrid::new(grid_size)?;
    let verdict = grid_argmax(&policy, multiplier, &grid)?;
    Ok((grid, verdict))
}

pub fn cmd_oracle(args: &OracleArgs, stdout: &mut dyn Write) -> Result<()> {
    let (grid, verdict) = oracle_verdict(
        args.alpha0,
        args.p0,
        args.multiplier,
        args.m,
        args.n,
        args.grid_size,
    )?;
    let config = OracleConfig {
        alpha0: args.alpha0,
        p0: args.p0,
        multiplier: args.multiplier,
        m: args.m,
        n: args.n,
        grid_size: args.grid_size,
    };
    let doc = OracleDocument {
        product: args.alpha0 * args.p0 * args.multiplier,
        classification: verdict.classification,
        optimal_fractions: verdict.optimal_fractions(&grid),
        verdict: &verdict,
        config,
    };
    let path = args.out.as_deref();
    with_sink(path, stdout, |w| match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w).map_err(|e| Error::io("<oracle>", e))
        }
        Format::Csv => {
            let comments = [
                config_comment(&doc.config)?,
                ("product", fmt_f64(doc.product)),
                ("classification", doc.classification.to_string()),
                ("optimal_fractions", join_fractions(&doc.optimal_fractions)),
            ];
            write_comments(w, &comments).map_err(|e| Error::io("<oracle>", e))?;
            let mut out = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            out.write_record(["arm", "fraction", "objective", "optimal"])?;
            for (arm, g) in verdict.objective_values.iter().enumerate() {
                out.write_record([
                    arm.to_string(),
                    grid.label(arm),
                    fmt_f64(*g),
                    verdict.is_optimal(arm).to_string(),
                ])?;
            }
            out.flush().map_err(|e| Error::io("<oracle>", e))
        }
    })
}

/// `path/run.csv` -> `path/run.report.csv`.
pub fn report_path(out: &Path) -> PathBuf {
    out.with_extension("report.csv")
}

pub fn simulation_config(args: &SimulateArgs) -> Result<SimulationConfig> {
    let experiment = ExperimentConfig {
        params: GameParams::new(args.endowment, args.multiplier)?,
        policy: TrusteePolicy::power_law(args.alpha0, args.m, args.p0, args.n)?,
        grid: ActionGrid::new(args.grid_size)?,
        trials: args.trials,
        agents: args.agents,
        base_seed: args.seed,
        record_every: args.record_every,
    };
    experiment.validate()?;
    if args.window == 0 {
        return Err(Error::validation("window", "must be at least 1"));
    }
    Ok(SimulationConfig {
        window: args.window.min(args.trials),
        experiment,
    })
}

/// Run one batch and build the full output document.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationDocument> {
    let exp = &config.experiment;
    let batch = run_batch_detailed(exp)?;
    let verdict = grid_argmax(&exp.policy, exp.params.multiplier, &exp.grid)?;
    let report = convergence_report(&batch, &exp.grid, &verdict, config.window)?;
    Ok(SimulationDocument {
        config: config.clone(),
        curves: batch.curves,
        report,
    })
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = simulation_config(args)?;
    let doc = simulate(&config)?;
    match args.format {
        Format::Json => with_sink(Some(&args.out), stdout, |w| {
            serde_json::to_writer(&mut *w, &doc)?;
            writeln!(w).map_err(|e| Error::io(&args.out, e))
        })?,
        Format::Csv => {
            let comments = [config_comment(&config)?];
            write_curves_csv(create(&args.out)?, &doc.curves, &comments)?;
            write_report_csv(create(&report_path(&args.out))?, &doc.report, &comments)?;
        }
    }
    let grid = &config.experiment.grid;
    let pooled = &doc.report.pooled;
    writeln!(
        stdout,
        "modal arm over the last {} trials: r={:?} (share on oracle arms {:.4}); oracle r*={{{}}}; \
         agents matching {}/{}; match={}",
        doc.report.window,
        pooled.modal_fraction,
        pooled.oracle_share,
        join_fractions(&doc.report.optimal_set.iter().map(|&i| grid.fraction(i)).collect::<Vec<_>>()),
        doc.report.agents_matching,
        doc.report.per_agent.len(),
        pooled.matches_oracle,
    )
    .map_err(|e| Error::io("<stdout>", e))
}

/// Parses `a,b,c` or `start:step:end` (inclusive, values `start + i·step`
/// rounded to 12 decimals).
pub fn parse_values(field: &'static str, spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::validation(field, "range is empty"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::validation(field, format!("has a bad value {s:?}")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (num(start)?, num(step)?, num(end)?);
            if step <= 0.0 {
                return Err(Error::validation(field, "range step must be positive"));
            }
            if end < start {
                return Err(Error::validation(field, "range is empty"));
            }
            let count = ((end - start) / step + 1e-9).floor() as u64 + 1;
            // Snap to 12 decimals so 0.2:0.2:1 yields 0.6, not 0.6000000000000001.
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(Error::validation(
            field,
            "must be a list a,b,c or a range start:step:end",
        )),
    }
}

fn parse_ints(field: &'static str, spec: &str) -> Result<Vec<u32>> {
    parse_values(field, spec)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(Error::validation(field, "must hold non-negative integers"))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha0: f64,
    pub p0: f64,
    #[serde(rename = "K")]
    pub multiplier: f64,
    pub m: u32,
    pub n: u32,
    pub product: f64,
    pub classification: Classification,
    pub oracle_fractions: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalResult {
    pub modal_fraction: f64,
    pub agents_matching: usize,
    pub matches_oracle: bool,
}

#[derive(Clone, Debug, Serialize)]
struct SweepConfig {
    alpha0: Vec<f64>,
    p0: Vec<f64>,
    #[serde(rename = "K")]
    multiplier: Vec<f64>,
    m: Vec<u32>,
    n: Vec<u32>,
    grid_size: usize,
    simulate: bool,
    trials: u64,
    agents: u64,
    seed: u64,
    window: u64,
}

/// Evaluate every combination, in the nesting order alpha0, p0, K, m, n.
pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    Ok(sweep(args)?.1)
}

fn sweep(args: &SweepArgs) -> Result<(SweepConfig, Vec<SweepRow>)> {
    let config = SweepConfig {
        alpha0: parse_values("alpha0", &args.alpha0)?,
        p0: parse_values("p0", &args.p0)?,
        multiplier: parse_values("K", &args.multiplier)?,
        m: parse_ints("m", &args.m)?,
        n: parse_ints("n", &args.n)?,
        grid_size: args.grid_size,
        simulate: args.simulate,
        trials: args.trials,
        agents: args.agents,
        seed: args.seed,
        window: args.window.min(args.trials),
    };
    let mut rows = Vec::new();
    for &alpha0 in &config.alpha0 {
        for &p0 in &config.p0 {
            for &k in &config.multiplier {
                for &m in &config.m {
                    for &n in &config.n {
                        rows.push(sweep_row(&config, alpha0, p0, k, m, n)?);
                    }
                }
            }
        }
    }
    Ok((config, rows))
}

fn sweep_row(c: &SweepConfig, alpha0: f64, p0: f64, k: f64, m: u32, n: u32) -> Result<SweepRow> {
    let (grid, verdict) = oracle_verdict(alpha0, p0, k, m, n, c.grid_size)?;
    let empirical = if c.simulate {
        let sim = SimulationConfig {
            experiment: ExperimentConfig {
                grid,
                trials: c.trials,
                agents: c.agents,
                base_seed: c.seed,
                record_every: c.trials,
                ..ExperimentConfig::new(
                    GameParams::with_multiplier(k)?,
                    TrusteePolicy::power_law(alpha0, m, p0, n)?,
                )
            },
            window: c.window,
        };
        if sim.window == 0 {
            return Err(Error::validation("window", "must be at least 1"));
        }
        let batch = experiment::run_batch_detailed(&sim.experiment)?;
        let report = convergence_report(&batch, &grid, &verdict, sim.window)?;
        Some(EmpiricalResult {
            modal_fraction: report.pooled.modal_fraction,
            agents_matching: report.agents_matching,
            matches_oracle: report.pooled.matches_oracle,
        })
    } else {
        None
    };
    Ok(SweepRow {
        alpha0,
        p0,
        multiplier: k,
        m,
        n,
        product: alpha0 * p0 * k,
        classification: verdict.classification,
        oracle_fractions: verdict.optimal_fractions(&grid),
        empirical,
    })
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let (config, rows) = sweep(args)?;
    with_sink(args.out.as_deref(), stdout, |w| match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                config: &'a SweepConfig,
                rows: &'a [SweepRow],
            }
            serde_json::to_writer_pretty(
                &mut *w,
                &Doc {
                    config: &config,
                    rows: &rows,
                },
            )?;
            writeln!(w).map_err(|e| Error::io("<sweep>", e))
        }
        Format::Csv => {
            write_comments(w, &[config_comment(&config)?]).map_err(|e| Error::io("<sweep>", e))?;
            let mut out = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            let mut header = vec![
                "alpha0",
                "p0",
                "K",
                "m",
                "n",
                "product",
                "classification",
                "oracle_fractions",
            ];
            if config.simulate {
                header.extend(["modal_fraction", "agents_matching", "matches_oracle"]);
            }
            out.write_record(&header)?;
            for row in &rows {
                let mut rec = vec![
                    fmt_f64(row.alpha0),
                    fmt_f64(row.p0),
                    fmt_f64(row.multiplier),
                    row.m.to_string(),
                    row.n.to_string(),
                    fmt_f64(row.product),
                    row.classification.to_string(),
                    join_fractions(&row.oracle_fractions),
                ];
                if let Some(e) = &row.empirical {
                    rec.extend([
                        format!("{:?}", e.modal_fraction),
                        e.agents_matching.to_string(),
                        e.matches_oracle.to_string(),
                    ]);
                }
                out.write_record(&rec)?;
            }
            out.flush().map_err(|e| Error::io("<sweep>", e))
        }
    })
}
