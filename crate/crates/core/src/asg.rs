//! Anisotropic spherical Gaussian label distributions over a sphere lattice.
//!
//! A rotation's column vector `r_i` is encoded as probabilities over the
//! lattice points. The kernel at a direction `v` is
//!
//! ```text
//! G(v) = max(v . r_i, 0) * exp(-lambda (v . r_j)^2 - eta (v . r_k)^2)
//! ```
//!
//! with `j = (i + 1) mod 3`, `k = (i + 2) mod 3`. The quadratic exponent is
//! antipodally symmetric; the clamped-cosine factor suppresses the peak at
//! `-r_i`. Decoding takes the probability-weighted mean of the lattice
//! points and, for a full pose, projects the three decoded columns back to
//! the nearest rotation.

use crate::error::{Error, Result};
use crate::lattice::SphereLattice;
use crate::plot;
use crate::rotation::{project_to_so3, RotationMatrix};
use crate::vec3;
use std::io::Write;
use std::path::Path;

/// Concentration pair controlling how fast probability falls off along the
/// two tangent axes. Both must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsgParams {
    lambda: f64,
    eta: f64,
}

impl AsgParams {
    pub fn new(lambda: f64, eta: f64) -> Result<Self> {
        if !(lambda.is_finite() && eta.is_finite() && lambda > 0.0 && eta > 0.0) {
            return Err(Error::invalid(format!(
                "concentrations must be finite and positive, got lambda={lambda}, eta={eta}"
            )));
        }
        Ok(Self { lambda, eta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn swapped(&self) -> Self {
        Self {
            lambda: self.eta,
            eta: self.lambda,
        }
    }
}

/// How kernel values over the lattice become probabilities.
///
/// `Softmax` exponentiates `scale * G` before normalizing; `Linear` divides
/// each kernel value by their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizationMode {
    Softmax { scale: f64 },
    Linear,
}

impl Default for NormalizationMode {
    fn default() -> Self {
        NormalizationMode::Softmax { scale: 1.0 }
    }
}

impl NormalizationMode {
    pub fn validate(&self) -> Result<()> {
        if let NormalizationMode::Softmax { scale } = self {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(Error::invalid(format!(
                    "softmax scale must be finite and positive, got {scale}"
                )));
            }
        }
        Ok(())
    }
}

/// Probabilities over the lattice points for one pose vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseDistribution {
    probs: Vec<f64>,
    lattice_m: usize,
    head_index: usize,
}

impl PoseDistribution {
    /// Validates non-negativity, unit sum (within 1e-12) and the head index.
    pub fn new(probs: Vec<f64>, lattice_m: usize, head_index: usize) -> Result<Self> {
        check_head_index(head_index)?;
        if probs.len() != lattice_m {
            return Err(Error::Incompatible(format!(
                "{} probabilities for a lattice of {lattice_m} points",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("probabilities must be finite and >= 0"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "probabilities sum to {sum:.15}, not 1"
            )));
        }
        Ok(Self {
            probs,
            lattice_m,
            head_index,
        })
    }

    pub(crate) fn from_normalized(probs: Vec<f64>, lattice_m: usize, head_index: usize) -> Self {
        Self {
            probs,
            lattice_m,
            head_index,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn lattice_m(&self) -> usize {
        self.lattice_m
    }

    pub fn head_index(&self) -> usize {
        self.head_index
    }
}

pub(crate) fn check_head_index(i: usize) -> Result<()> {
    if i > 2 {
        Err(Error::invalid(format!("head index {i} not in {{0, 1, 2}}")))
    } else {
        Ok(())
    }
}

/// Kernel value at a unit direction `v` for pose vector `i` of `r`.
pub fn asg_kernel(v: [f64; 3], r: &RotationMatrix, head: usize, params: &AsgParams) -> Result<f64> {
    check_head_index(head)?;
    let j = (head + 1) % 3;
    let k = (head + 2) % 3;
    let ti = vec3::dot(v, r.column(head));
    let tj = vec3::dot(v, r.column(j));
    let tk = vec3::dot(v, r.column(k));
    Ok(ti.max(0.0) * (-params.lambda * tj * tj - params.eta * tk * tk).exp())
}

fn kernel_over_lattice(
    r: &RotationMatrix,
    head: usize,
    params: &AsgParams,
    lat: &SphereLattice,
) -> Result<Vec<f64>> {
    check_head_index(head)?;
    let j = (head + 1) % 3;
    let k = (head + 2) % 3;
    let ri = r.column(head);
    let rj = r.column(j);
    let rk = r.column(k);
    Ok(lat
        .points()
        .iter()
        .map(|d| {
            let ti = vec3::dot(*d, ri);
            let tj = vec3::dot(*d, rj);
            let tk = vec3::dot(*d, rk);
            ti.max(0.0) * (-params.lambda * tj * tj - params.eta * tk * tk).exp()
        })
        .collect())
}

/// Converts pose vector `head` of `r` into a probability distribution over
/// the lattice points.
pub fn encode(
    r: &RotationMatrix,
    head: usize,
    params: &AsgParams,
    lat: &SphereLattice,
    mode: NormalizationMode,
) -> Result<PoseDistribution> {
    mode.validate()?;
    let kernel = kernel_over_lattice(r, head, params, lat)?;
    let probs = match mode {
        NormalizationMode::Softmax { scale } => {
            let max = kernel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = kernel.iter().map(|g| (scale * (g - max)).exp()).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        }
        NormalizationMode::Linear => {
            let sum: f64 = kernel.iter().sum();
            if sum <= 0.0 {
                return Err(Error::Degenerate(
                    "kernel mass is zero over the entire lattice".into(),
                ));
            }
            kernel.into_iter().map(|g| g / sum).collect()
        }
    };
    Ok(PoseDistribution::from_normalized(probs, lat.m(), head))
}

/// Probability-weighted mean of the lattice points. Its norm is at most 1;
/// the direction is the decoded pose vector.
pub fn decode_vector(p: &PoseDistribution, lat: &SphereLattice) -> Result<[f64; 3]> {
    if p.lattice_m() != lat.m() {
        return Err(Error::Incompatible(format!(
            "distribution built over {} points, lattice has {}",
            p.lattice_m(),
            lat.m()
        )));
    }
    let mut acc = [0.0; 3];
    for (prob, point) in p.probs().iter().zip(lat.points()) {
        acc = vec3::add(acc, vec3::scale(*point, *prob));
    }
    Ok(acc)
}

/// Decodes the three head distributions, assembles them as matrix columns,
/// and projects to the nearest rotation.
pub fn decode_pose(
    p0: &PoseDistribution,
    p1: &PoseDistribution,
    p2: &PoseDistribution,
    lat: &SphereLattice,
) -> Result<RotationMatrix> {
    let heads = [p0.head_index(), p1.head_index(), p2.head_index()];
    if heads != [0, 1, 2] {
        return Err(Error::Incompatible(format!(
            "expected head indices [0, 1, 2], got {heads:?}"
        )));
    }
    let c0 = decode_vector(p0, lat)?;
    let c1 = decode_vector(p1, lat)?;
    let c2 = decode_vector(p2, lat)?;
    let assembled = [
        [c0[0], c1[0], c2[0]],
        [c0[1], c1[1], c2[1]],
        [c0[2], c1[2], c2[2]],
    ];
    project_to_so3(&assembled)
}

/// Writes the distribution as `k,x,y,z,p` CSV rows plus an orthographic heat
/// plot (view along +z, near hemisphere) as SVG.
pub fn render_distribution(
    p: &PoseDistribution,
    lat: &SphereLattice,
    csv_path: &Path,
    svg_path: &Path,
) -> Result<()> {
    if p.lattice_m() != lat.m() {
        return Err(Error::Incompatible(format!(
            "distribution built over {} points, lattice has {}",
            p.lattice_m(),
            lat.m()
        )));
    }
    let mut csv = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    writeln!(csv, "k,x,y,z,p")?;
    for (k, (point, prob)) in lat.points().iter().zip(p.probs()).enumerate() {
        writeln!(csv, "{},{},{},{},{}", k, point[0], point[1], point[2], prob)?;
    }
    csv.flush()?;

    let weighted: Vec<([f64; 3], f64)> = lat
        .points()
        .iter()
        .zip(p.probs())
        .map(|(pt, pr)| (*pt, *pr))
        .collect();
    let svg = plot::sphere_scatter(&weighted, &format!("head {}", p.head_index()));
    std::fs::write(svg_path, svg)?;
    Ok(())
}
