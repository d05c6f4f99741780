//! File encodings for rotations and distributions.
//!
//! Euler-angle pose files are CSV (`id,pitch,yaw,roll`, degrees, header
//! optional on read); every other representation is JSON lines with an `id`
//! field. Matrices are row-major 9-arrays, quaternions `{w, x, y, z}`,
//! axis-angle `{axis: [3], theta_rad}`. Distributions over a lattice are
//! CSV with columns `k,x,y,z,p`.

use crate::error::{Error, Result};
use crate::lattice::SphereLattice;
use crate::metrics::PoseRecord;
use crate::rotation::{
    axis_angle_to_matrix, euler_to_matrix, matrix_to_axis_angle, matrix_to_euler, matrix_to_quat,
    project_to_so3, quat_to_matrix, AxisAngle, EulerAngles, RotationMatrix, UnitQuaternion,
};
use crate::vec3;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

/// On-disk rotation representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationFormat {
    Euler,
    Matrix,
    Quaternion,
    AxisAngle,
}

impl FromStr for RotationFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Self::Euler),
            "matrix" => Ok(Self::Matrix),
            "quat" | "quaternion" => Ok(Self::Quaternion),
            "axis-angle" | "axisangle" => Ok(Self::AxisAngle),
            other => Err(Error::invalid(format!(
                "unknown rotation format '{other}' (euler | matrix | quat | axis-angle)"
            ))),
        }
    }
}

impl fmt::Display for RotationFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Euler => "euler",
            Self::Matrix => "matrix",
            Self::Quaternion => "quat",
            Self::AxisAngle => "axis-angle",
        };
        f.write_str(s)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    id: String,
    matrix: [f64; 9],
}

#[derive(Serialize, Deserialize)]
struct QuatComponents {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize, Deserialize)]
struct QuatRecord {
    id: String,
    quat: QuatComponents,
}

#[derive(Serialize, Deserialize)]
struct AxisAngleComponents {
    axis: [f64; 3],
    theta_rad: f64,
}

#[derive(Serialize, Deserialize)]
struct AxisAngleRecord {
    id: String,
    axis_angle: AxisAngleComponents,
}

fn parse_err(line: usize, msg: impl fmt::Display) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

fn open_input(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path)
        .map_err(|e| Error::Validation(format!("cannot open {}: {e}", path.display())))
}

fn parse_euler_csv_line(line_no: usize, line: &str) -> Result<PoseRecord> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(parse_err(
            line_no,
            format!("expected 4 comma-separated fields, got {}", fields.len()),
        ));
    }
    let mut angles = [0.0; 3];
    for (slot, field) in angles.iter_mut().zip(&fields[1..]) {
        *slot = field
            .parse::<f64>()
            .map_err(|e| parse_err(line_no, format!("'{field}': {e}")))?;
    }
    let euler = EulerAngles::new(angles[0], angles[1], angles[2]);
    let pose = euler_to_matrix(&euler).map_err(|e| parse_err(line_no, e))?;
    Ok(PoseRecord {
        id: fields[0].to_string(),
        pose,
    })
}

fn looks_like_header(line: &str) -> bool {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    fields.len() == 4 && fields[1..].iter().any(|f| f.parse::<f64>().is_err())
}

/// Reads pose records; matrix inputs are projected to the nearest rotation
/// on ingestion so downstream metrics always see valid poses.
pub fn read_pose_records(path: &Path, format: RotationFormat) -> Result<Vec<PoseRecord>> {
    let file = open_input(path)?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match format {
            RotationFormat::Euler => {
                if idx == 0 && looks_like_header(trimmed) {
                    continue;
                }
                records.push(parse_euler_csv_line(line_no, trimmed)?);
            }
            RotationFormat::Matrix => {
                let rec: MatrixRecord =
                    serde_json::from_str(trimmed).map_err(|e| parse_err(line_no, e))?;
                let rows = [
                    [rec.matrix[0], rec.matrix[1], rec.matrix[2]],
                    [rec.matrix[3], rec.matrix[4], rec.matrix[5]],
                    [rec.matrix[6], rec.matrix[7], rec.matrix[8]],
                ];
                let pose = project_to_so3(&rows).map_err(|e| parse_err(line_no, e))?;
                records.push(PoseRecord { id: rec.id, pose });
            }
            RotationFormat::Quaternion => {
                let rec: QuatRecord =
                    serde_json::from_str(trimmed).map_err(|e| parse_err(line_no, e))?;
                let q = UnitQuaternion::new(rec.quat.w, rec.quat.x, rec.quat.y, rec.quat.z)
                    .map_err(|e| parse_err(line_no, e))?;
                records.push(PoseRecord {
                    id: rec.id,
                    pose: quat_to_matrix(&q),
                });
            }
            RotationFormat::AxisAngle => {
                let rec: AxisAngleRecord =
                    serde_json::from_str(trimmed).map_err(|e| parse_err(line_no, e))?;
                let aa = AxisAngle::new(rec.axis_angle.axis, rec.axis_angle.theta_rad)
                    .map_err(|e| parse_err(line_no, e))?;
                records.push(PoseRecord {
                    id: rec.id,
                    pose: axis_angle_to_matrix(&aa),
                });
            }
        }
    }
    Ok(records)
}

/// Writes pose records in the requested representation. Euler output is the
/// canonical decomposition; the gimbal-lock flag is not part of the file
/// format.
pub fn write_pose_records(
    path: &Path,
    format: RotationFormat,
    records: &[PoseRecord],
) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    if format == RotationFormat::Euler {
        writeln!(out, "id,pitch,yaw,roll")?;
    }
    for rec in records {
        match format {
            RotationFormat::Euler => {
                let e = matrix_to_euler(&rec.pose).angles;
                writeln!(out, "{},{},{},{}", rec.id, e.pitch, e.yaw, e.roll)?;
            }
            RotationFormat::Matrix => {
                let dto = MatrixRecord {
                    id: rec.id.clone(),
                    matrix: rec.pose.to_flat(),
                };
                writeln!(out, "{}", to_json(&dto)?)?;
            }
            RotationFormat::Quaternion => {
                let q = matrix_to_quat(&rec.pose);
                let dto = QuatRecord {
                    id: rec.id.clone(),
                    quat: QuatComponents {
                        w: q.w,
                        x: q.x,
                        y: q.y,
                        z: q.z,
                    },
                };
                writeln!(out, "{}", to_json(&dto)?)?;
            }
            RotationFormat::AxisAngle => {
                let aa = matrix_to_axis_angle(&rec.pose);
                let dto = AxisAngleRecord {
                    id: rec.id.clone(),
                    axis_angle: AxisAngleComponents {
                        axis: aa.axis,
                        theta_rad: aa.theta,
                    },
                };
                writeln!(out, "{}", to_json(&dto)?)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Validation(format!("serialization: {e}")))
}

#[derive(Serialize, Deserialize)]
struct MatrixOnly {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    matrix: [f64; 9],
}

/// Reads a single rotation from a `{"matrix": [9 floats]}` JSON file,
/// projecting to the nearest rotation.
pub fn read_matrix_json(path: &Path) -> Result<RotationMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot open {}: {e}", path.display())))?;
    let rec: MatrixOnly = serde_json::from_str(&text).map_err(|e| parse_err(1, e))?;
    let rows = [
        [rec.matrix[0], rec.matrix[1], rec.matrix[2]],
        [rec.matrix[3], rec.matrix[4], rec.matrix[5]],
        [rec.matrix[6], rec.matrix[7], rec.matrix[8]],
    ];
    project_to_so3(&rows)
}

/// Writes a single rotation as `{"matrix": [9 floats]}`.
pub fn write_matrix_json(path: &Path, r: &RotationMatrix) -> Result<()> {
    let dto = MatrixOnly {
        id: None,
        matrix: r.to_flat(),
    };
    std::fs::write(path, to_json(&dto)? + "\n")?;
    Ok(())
}

/// Writes a distribution as `k,x,y,z,p` rows over its lattice.
pub fn write_distribution_csv(path: &Path, probs: &[f64], lat: &SphereLattice) -> Result<()> {
    if probs.len() != lat.m() {
        return Err(Error::Incompatible(format!(
            "{} probabilities for a lattice of {} points",
            probs.len(),
            lat.m()
        )));
    }
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "k,x,y,z,p")?;
    for (k, (point, p)) in lat.points().iter().zip(probs).enumerate() {
        writeln!(out, "{},{},{},{},{}", k, point[0], point[1], point[2], p)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a `k,x,y,z,p` distribution file back into probabilities and points.
pub fn read_distribution_csv(path: &Path) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
    let file = open_input(path)?;
    let reader = std::io::BufReader::new(file);
    let mut probs = Vec::new();
    let mut points = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (idx == 0 && trimmed.starts_with("k,")) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(parse_err(
                line_no,
                format!("expected 5 fields k,x,y,z,p, got {}", fields.len()),
            ));
        }
        let k: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("index '{}': {e}", fields[0])))?;
        if k != probs.len() {
            return Err(parse_err(
                line_no,
                format!("index {k} out of order, expected {}", probs.len()),
            ));
        }
        let mut vals = [0.0; 4];
        for (slot, field) in vals.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|e| parse_err(line_no, format!("'{field}': {e}")))?;
        }
        points.push([vals[0], vals[1], vals[2]]);
        probs.push(vals[3]);
    }
    if probs.is_empty() {
        return Err(Error::Validation(format!(
            "no distribution rows in {}",
            path.display()
        )));
    }
    Ok((probs, points))
}

/// Checks that stored points match the deterministic lattice of their count.
pub fn verify_lattice_points(points: &[[f64; 3]], lat: &SphereLattice) -> Result<()> {
    if points.len() != lat.m() {
        return Err(Error::Incompatible(format!(
            "{} points vs lattice of {}",
            points.len(),
            lat.m()
        )));
    }
    for (i, (got, want)) in points.iter().zip(lat.points()).enumerate() {
        if vec3::norm(vec3::sub(*got, *want)) > 1e-9 {
            return Err(Error::Validation(format!(
                "point {i} does not lie on the size-{} lattice",
                lat.m()
            )));
        }
    }
    Ok(())
}
