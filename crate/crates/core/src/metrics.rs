//! Orientation error metrics and batch evaluation over pose files.
//!
//! Two metrics are provided. Euler MAE takes per-angle absolute differences
//! with wraparound into `(-180, 180]` — without the wrap, labels near the
//! +-180 boundary would report absurd errors for nearly identical poses.
//! MAEV measures the angle in degrees between corresponding matrix columns,
//! which is well defined for every pose.

use crate::error::{Error, Result};
use crate::io::{read_pose_records, RotationFormat};
use crate::rotation::{matrix_to_euler, wrap_degrees, EulerAngles, RotationMatrix};
use crate::vec3;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufWriter, Write};
use std::path::Path;

/// A pose keyed by a record id, converted to the canonical matrix form on
/// ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub id: String,
    pub pose: RotationMatrix,
}

/// Per-angle absolute Euler errors in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaeBreakdown {
    pub pitch_err: f64,
    pub yaw_err: f64,
    pub roll_err: f64,
    pub mean: f64,
}

/// Per-column angular errors in degrees (left, down, front pose vectors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaevBreakdown {
    pub left_err: f64,
    pub down_err: f64,
    pub front_err: f64,
    pub mean: f64,
}

/// Absolute Euler-angle error with wraparound.
pub fn mae_euler(pred: &EulerAngles, gt: &EulerAngles) -> MaeBreakdown {
    let pitch_err = wrap_degrees(pred.pitch - gt.pitch).abs();
    let yaw_err = wrap_degrees(pred.yaw - gt.yaw).abs();
    let roll_err = wrap_degrees(pred.roll - gt.roll).abs();
    MaeBreakdown {
        pitch_err,
        yaw_err,
        roll_err,
        mean: (pitch_err + yaw_err + roll_err) / 3.0,
    }
}

/// Mean absolute error of vectors: the angle between corresponding columns.
pub fn maev(pred: &RotationMatrix, gt: &RotationMatrix) -> MaevBreakdown {
    let col_err = |i: usize| {
        vec3::dot(pred.column(i), gt.column(i))
            .clamp(-1.0, 1.0)
            .acos()
            .to_degrees()
    };
    let left_err = col_err(0);
    let down_err = col_err(1);
    let front_err = col_err(2);
    MaevBreakdown {
        left_err,
        down_err,
        front_err,
        mean: (left_err + down_err + front_err) / 3.0,
    }
}

/// Both metrics for one prediction / ground-truth pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordErrors {
    pub id: String,
    pub mae: MaeBreakdown,
    pub maev: MaevBreakdown,
}

/// Per-record errors plus their aggregates (plain means over records).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub records: Vec<RecordErrors>,
    pub aggregate_mae: MaeBreakdown,
    pub aggregate_maev: MaevBreakdown,
}

fn find_duplicates(records: &[PoseRecord]) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *counts.entry(&r.id).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, c)| *c > 1)
        .map(|(id, _)| id.to_string())
        .collect()
}

/// Joins predictions and ground truth by id and aggregates both metrics.
/// Ids must match one-to-one; offenders are listed in the error.
pub fn evaluate_records(pred: &[PoseRecord], gt: &[PoseRecord]) -> Result<EvalReport> {
    for (label, records) in [("prediction", pred), ("ground-truth", gt)] {
        let dups = find_duplicates(records);
        if !dups.is_empty() {
            return Err(Error::Validation(format!(
                "duplicate {label} ids: {}",
                dups.join(", ")
            )));
        }
    }
    let gt_by_id: HashMap<&str, &RotationMatrix> =
        gt.iter().map(|r| (r.id.as_str(), &r.pose)).collect();
    let pred_ids: HashMap<&str, ()> = pred.iter().map(|r| (r.id.as_str(), ())).collect();
    let mut missing: Vec<String> = pred
        .iter()
        .filter(|r| !gt_by_id.contains_key(r.id.as_str()))
        .map(|r| format!("{} (no ground truth)", r.id))
        .collect();
    missing.extend(
        gt.iter()
            .filter(|r| !pred_ids.contains_key(r.id.as_str()))
            .map(|r| format!("{} (no prediction)", r.id)),
    );
    if !missing.is_empty() {
        missing.sort();
        return Err(Error::Validation(format!(
            "unmatched ids: {}",
            missing.join(", ")
        )));
    }
    if pred.is_empty() {
        return Err(Error::Validation("no records to evaluate".into()));
    }

    let mut records = Vec::with_capacity(pred.len());
    for p in pred {
        let g = gt_by_id[p.id.as_str()];
        let mae = mae_euler(&matrix_to_euler(&p.pose).angles, &matrix_to_euler(g).angles);
        let maev = maev(&p.pose, g);
        records.push(RecordErrors {
            id: p.id.clone(),
            mae,
            maev,
        });
    }
    let n = records.len() as f64;
    let sum_mae = records.iter().fold([0.0; 4], |acc, r| {
        [
            acc[0] + r.mae.pitch_err,
            acc[1] + r.mae.yaw_err,
            acc[2] + r.mae.roll_err,
            acc[3] + r.mae.mean,
        ]
    });
    let sum_maev = records.iter().fold([0.0; 4], |acc, r| {
        [
            acc[0] + r.maev.left_err,
            acc[1] + r.maev.down_err,
            acc[2] + r.maev.front_err,
            acc[3] + r.maev.mean,
        ]
    });
    Ok(EvalReport {
        records,
        aggregate_mae: MaeBreakdown {
            pitch_err: sum_mae[0] / n,
            yaw_err: sum_mae[1] / n,
            roll_err: sum_mae[2] / n,
            mean: sum_mae[3] / n,
        },
        aggregate_maev: MaevBreakdown {
            left_err: sum_maev[0] / n,
            down_err: sum_maev[1] / n,
            front_err: sum_maev[2] / n,
            mean: sum_maev[3] / n,
        },
    })
}

/// Reads both files in `format`, joins by id, and aggregates.
pub fn evaluate_files(
    pred_path: &Path,
    gt_path: &Path,
    format: RotationFormat,
) -> Result<EvalReport> {
    let pred = read_pose_records(pred_path, format)?;
    let gt = read_pose_records(gt_path, format)?;
    evaluate_records(&pred, &gt)
}

/// Writes per-record rows followed by an `aggregate` row.
pub fn write_report_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "id,pitch_err,yaw_err,roll_err,mae,left_err,down_err,front_err,maev"
    )?;
    for r in &report.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.id,
            r.mae.pitch_err,
            r.mae.yaw_err,
            r.mae.roll_err,
            r.mae.mean,
            r.maev.left_err,
            r.maev.down_err,
            r.maev.front_err,
            r.maev.mean
        )?;
    }
    let (am, av) = (&report.aggregate_mae, &report.aggregate_maev);
    writeln!(
        out,
        "aggregate,{},{},{},{},{},{},{},{}",
        am.pitch_err,
        am.yaw_err,
        am.roll_err,
        am.mean,
        av.left_err,
        av.down_err,
        av.front_err,
        av.mean
    )?;
    out.flush()?;
    Ok(())
}
