//! Batch evaluation of predicted poses against ground truth.

use crate::cmd::Outcome;
use crate::config::Resolver;
use asgpose_core::io::RotationFormat;
use asgpose_core::metrics::{evaluate_files, write_report_csv};
use asgpose_core::{Error, Result};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Predicted poses
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Ground-truth poses
    #[arg(long)]
    gt: Option<PathBuf>,
    /// File format: euler | matrix
    #[arg(long)]
    format: Option<String>,
    /// Per-record report CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let pred = resolver.get_path("pred", args.pred)?;
    let gt = resolver.get_path("gt", args.gt)?;
    let format_name = resolver.get("format", args.format, "euler".to_string())?;
    let out = resolver.get_path("out", args.out)?;

    let format: RotationFormat = format_name.parse()?;
    if !matches!(format, RotationFormat::Euler | RotationFormat::Matrix) {
        return Err(Error::invalid(format!(
            "eval supports euler or matrix files, got '{format_name}'"
        )));
    }
    let report = evaluate_files(&pred, &gt, format)?;
    write_report_csv(&out, &report)?;
    println!(
        "{} records: MAE {} deg (pitch {}, yaw {}, roll {}), MAEV {} deg (left {}, down {}, front {})",
        report.records.len(),
        report.aggregate_mae.mean,
        report.aggregate_mae.pitch_err,
        report.aggregate_mae.yaw_err,
        report.aggregate_mae.roll_err,
        report.aggregate_maev.mean,
        report.aggregate_maev.left_err,
        report.aggregate_maev.down_err,
        report.aggregate_maev.front_err,
    );
    Ok(Outcome {
        artifacts: vec![out],
        seed: None,
    })
}
