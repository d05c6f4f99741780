//! Analytic-gradient verification against central finite differences.

use crate::cmd::Outcome;
use crate::config::{parse_mode, Resolver};
use asgpose_core::loss::{finite_diff_check, GradCheckConfig};
use asgpose_core::{Error, Result};
use serde::Serialize;
use std::path::PathBuf;

/// A run fails (exit 1) above this.
const FAIL_THRESHOLD: f64 = 1e-4;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Lattice size for the checked configurations
    #[arg(long)]
    m: Option<usize>,
    /// Number of seeded random configurations
    #[arg(long)]
    seeds: Option<u64>,
    /// Central-difference step
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Normalization: softmax | linear
    #[arg(long)]
    mode: Option<String>,
    /// Softmax scale
    #[arg(long)]
    scale: Option<f64>,
    /// Optional JSON report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    m: usize,
    seeds: u64,
    step: f64,
    alpha: f64,
    mode: String,
    max_rel_err: f64,
    worst_component: usize,
    passed: bool,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let m = resolver.get("m", args.m, 60usize)?;
    let seeds = resolver.get("seeds", args.seeds, 20u64)?;
    let step = resolver.get("step", args.step, 1e-5)?;
    let alpha = resolver.get("alpha", args.alpha, 0.2)?;
    let mode_name = resolver.get("mode", args.mode, "softmax".to_string())?;
    let scale = resolver.get("scale", args.scale, 1.0)?;
    let out = resolver.get_path_opt("out", args.out);

    let cfg = GradCheckConfig {
        m,
        seeds,
        alpha,
        mode: parse_mode(&mode_name, scale)?,
    };
    let report = finite_diff_check(&cfg, step)?;
    let passed = report.max_rel_err <= FAIL_THRESHOLD;
    println!(
        "gradcheck m={m} seeds={seeds} step={step} mode={mode_name}: max_rel_err={:e} worst_component={} -> {}",
        report.max_rel_err,
        report.worst_component,
        if passed { "pass" } else { "FAIL" }
    );

    let mut artifacts = Vec::new();
    if let Some(path) = out {
        let dto = Report {
            m,
            seeds,
            step,
            alpha,
            mode: mode_name,
            max_rel_err: report.max_rel_err,
            worst_component: report.worst_component,
            passed,
        };
        let text = serde_json::to_string_pretty(&dto)
            .map_err(|e| Error::Validation(format!("report serialization: {e}")))?;
        std::fs::write(&path, text + "\n")?;
        artifacts.push(path);
    }
    if !passed {
        return Err(Error::Validation(format!(
            "gradient check failed: max_rel_err {:e} exceeds {FAIL_THRESHOLD:e}",
            report.max_rel_err
        )));
    }
    Ok(Outcome {
        artifacts,
        seed: None,
    })
}
