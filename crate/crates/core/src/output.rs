//! File formats.
//!
//! CSV files start with `# `-prefixed comment lines carrying the resolved
//! configuration as one-line JSON, followed by a header row and data rows.
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields bit-identical values. JSON output is a single document.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ConvergenceReport, ExperimentConfig, FrequencyCurves};

/// Everything needed to rerun a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    pub window: u64,
}

/// The `--format json` output of `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub config: SimulationConfig,
    pub curves: FrequencyCurves,
    pub report: ConvergenceReport,
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Writes `# key: value` lines.
pub fn write_comments<W: Write + ?Sized>(
    w: &mut W,
    lines: &[(&str, String)],
) -> std::io::Result<()> {
    for (k, v) in lines {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn config_comment<T: Serialize>(config: &T) -> Result<(&'static str, String)> {
    Ok(("config", serde_json::to_string(config)?))
}

fn curve_header(curves: &FrequencyCurves) -> Vec<String> {
    std::iter::once("trial".to_string())
        .chain(curves.fractions.iter().map(|f| format!("arm_{f:?}")))
        .collect()
}

/// `trial,arm_0.0,...,arm_1.0`, one row per checkpoint.
pub fn write_curves_csv<W: Write>(
    mut w: W,
    curves: &FrequencyCurves,
    comments: &[(&str, String)],
) -> Result<()> {
    write_comments(&mut w, comments).map_err(|e| Error::io("<curves>", e))?;
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(curve_header(curves))?;
    for (t, row) in curves.checkpoints.iter().zip(&curves.mean_freq) {
        out.write_record(std::iter::once(t.to_string()).chain(row.iter().map(|&x| fmt_f64(x))))?;
    }
    out.flush().map_err(|e| Error::io("<curves>", e))?;
    Ok(())
}

fn bad_file(msg: impl Into<String>) -> Error {
    Error::Usage(format!("malformed curves file: {}", msg.into()))
}

pub fn read_curves_csv<R: Read>(r: R) -> Result<FrequencyCurves> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let header = rdr.headers()?.clone();
    let fractions = header
        .iter()
        .skip(1)
        .map(|h| {
            h.strip_prefix("arm_")
                .and_then(|f| f.parse::<f64>().ok())
                .ok_or_else(|| bad_file(format!("bad column {h:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut checkpoints = Vec::new();
    let mut mean_freq = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut fields = rec.iter();
        let t = fields
            .next()
            .and_then(|t| t.parse::<u64>().ok())
            .ok_or_else(|| bad_file("bad trial index"))?;
        let row = fields
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|_| bad_file(format!("bad value {x:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        checkpoints.push(t);
        mean_freq.push(row);
    }
    Ok(FrequencyCurves {
        fractions,
        checkpoints,
        mean_freq,
    })
}

/// One row per agent plus a final `pooled` row.
pub fn write_report_csv<W: Write>(
    mut w: W,
    report: &ConvergenceReport,
    comments: &[(&str, String)],
) -> Result<()> {
    write_comments(&mut w, comments).map_err(|e| Error::io("<report>", e))?;
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record([
        "agent",
        "window",
        "modal_arm",
        "modal_fraction",
        "oracle_share",
        "matches_oracle",
    ])?;
    let rows = report
        .per_agent
        .iter()
        .enumerate()
        .map(|(k, s)| (k.to_string(), s))
        .chain(std::iter::once(("pooled".to_string(), &report.pooled)));
    for (agent, s) in rows {
        out.write_record([
            agent,
            report.window.to_string(),
            s.modal_arm.to_string(),
            format!("{:?}", s.modal_fraction),
            fmt_f64(s.oracle_share),
            s.matches_oracle.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}
