//! The `sweep` subcommand: fit every cell of a penalty-weight grid, write
//! one result document per cell plus a summary table. Cells run
//! concurrently with independent output files; only the summary writer is
//! serialized. A failed cell is recorded in its own file and becomes a NaN
//! row, and the summary is still written.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use crate::dataset::{fit_document, load_dataset, SolverFlags};
use crate::errors::CliError;
use crate::resultfile;

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// Path to the dataset manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// λ1 as a fixed number ("0.5") or a log grid ("1e-3..1e3 log7").
    #[arg(long)]
    pub lambda1: String,
    /// λ2, same syntax as --lambda1.
    #[arg(long)]
    pub lambda2: String,
    /// λ3, same syntax as --lambda1.
    #[arg(long)]
    pub lambda3: String,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Output directory for per-cell documents and summary.csv.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses "A..B logN" into N log10-spaced points from A to B inclusive, or
/// a plain number into a single fixed point. Endpoints are taken verbatim
/// so grid corners match the flag text exactly.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |detail: &str| {
        CliError::Usage(format!(
            "bad grid {spec:?}: {detail}; expected a number or \"A..B logN\""
        ))
    };
    let spec = spec.trim();
    if !spec.contains("..") {
        let v: f64 = spec.parse().map_err(|_| bad("not a number"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad("weights must be finite and nonnegative"));
        }
        return Ok(vec![v]);
    }
    let mut parts = spec.split_whitespace();
    let range = parts.next().ok_or_else(|| bad("missing range"))?;
    let count = parts.next().ok_or_else(|| bad("missing point count"))?;
    if parts.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    let (a, b) = range.split_once("..").ok_or_else(|| bad("missing \"..\""))?;
    let a: f64 = a.parse().map_err(|_| bad("bad range start"))?;
    let b: f64 = b.parse().map_err(|_| bad("bad range end"))?;
    let n: usize = count
        .strip_prefix("log")
        .ok_or_else(|| bad("count must look like log7"))?
        .parse()
        .map_err(|_| bad("bad point count"))?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(bad("log grids need positive finite endpoints"));
    }
    if n == 0 {
        return Err(bad("need at least one point"));
    }
    if n == 1 {
        if a != b {
            return Err(bad("log1 needs equal endpoints"));
        }
        return Ok(vec![a]);
    }
    let (la, lb) = (a.log10(), b.log10());
    Ok((0..n)
        .map(|i| match i {
            0 => a,
            i if i == n - 1 => b,
            i => 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64),
        })
        .collect())
}

fn format_metric(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NaN".into(),
    }
}

pub fn run(args: SweepArgs) -> Result<(), CliError> {
    let (dataset, _man) = load_dataset(&args.manifest)?;
    let g1 = parse_grid(&args.lambda1)?;
    let g2 = parse_grid(&args.lambda2)?;
    let g3 = parse_grid(&args.lambda3)?;
    // Validate the shared flags once before spending time on cells.
    args.solver.config(dataset.k(), (g1[0], g2[0], g3[0]))?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let mut cells = Vec::new();
    for a in 0..g1.len() {
        for b in 0..g2.len() {
            for c in 0..g3.len() {
                cells.push((a, b, c));
            }
        }
    }

    let outcomes: Vec<Result<Option<dscmc::MetricScores>, CliError>> = cells
        .par_iter()
        .map(|&(a, b, c)| {
            let path = args.out.join(format!("cell_{a}_{b}_{c}.json"));
            let lambdas = (g1[a], g2[b], g3[c]);
            let cfg = args.solver.config(dataset.k(), lambdas)?;
            match fit_document(&dataset, &cfg) {
                Ok(doc) => {
                    let metrics = doc.get("metrics").and_then(|m| m.as_object()).map(|m| {
                        dscmc::MetricScores {
                            accuracy: m["acc"].as_f64().unwrap_or(f64::NAN),
                            nmi: m["nmi"].as_f64().unwrap_or(f64::NAN),
                            fscore: m["fscore"].as_f64().unwrap_or(f64::NAN),
                            ari: m["ari"].as_f64().unwrap_or(f64::NAN),
                        }
                    });
                    resultfile::write(&path, &doc)?;
                    Ok(metrics)
                }
                // A solver failure is a per-cell outcome, not a sweep
                // failure: record it and let the summary carry a NaN row.
                Err(CliError::Solver(msg)) => {
                    let doc = json!({
                        "error": msg,
                        "hyperparameters": {
                            "lambda1": lambdas.0,
                            "lambda2": lambdas.1,
                            "lambda3": lambdas.2,
                        },
                    });
                    resultfile::write(&path, &doc)?;
                    Ok(None)
                }
                Err(other) => Err(other),
            }
        })
        .collect();

    let mut summary = String::from("lambda1,lambda2,lambda3,acc,nmi,fscore,ari\n");
    for (&(a, b, c), outcome) in cells.iter().zip(outcomes) {
        let metrics = outcome?;
        summary.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            g1[a],
            g2[b],
            g3[c],
            format_metric(metrics.map(|m| m.accuracy)),
            format_metric(metrics.map(|m| m.nmi)),
            format_metric(metrics.map(|m| m.fscore)),
            format_metric(metrics.map(|m| m.ari)),
        ));
    }
    crate::matio::write_verified(&args.out.join("summary.csv"), summary.as_bytes())
}
