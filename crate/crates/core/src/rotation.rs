//! Rotation representations and conversions.
//!
//! Four interchangeable representations are provided: Euler angles in
//! degrees, unit quaternions, axis-angle pairs, and 3x3 rotation matrices.
//! The matrix is the canonical internal form; its columns are the left,
//! down and front pose vectors of an oriented body.
//!
//! # Euler convention
//!
//! Euler angles are extrinsic x-y-z: `R = Rz(roll) * Ry(yaw) * Rx(pitch)`,
//! all angles in degrees. The middle (yaw) angle is singular at +-90 deg;
//! [`matrix_to_euler`] resolves that branch with `roll = 0` and flags it.

use crate::error::{Error, Result};
use crate::vec3;
use nalgebra::Matrix3;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Wraps an angle in degrees into `(-180, +180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d <= -180.0 {
        d += 360.0;
    } else if d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Euler angles in degrees (pitch about x, yaw about y, roll about z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

impl EulerAngles {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Self {
        Self { pitch, yaw, roll }
    }

    /// Each angle wrapped into `(-180, +180]`.
    pub fn canonicalized(&self) -> Self {
        Self {
            pitch: wrap_degrees(self.pitch),
            yaw: wrap_degrees(self.yaw),
            roll: wrap_degrees(self.roll),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pitch.is_finite() && self.yaw.is_finite() && self.roll.is_finite()
    }
}

/// 3x3 rotation matrix, row-major storage. Orthonormal with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    m: [[f64; 3]; 3],
}

/// Orthonormality tolerance enforced on validated construction.
pub const ROTATION_TOL: f64 = 1e-9;

impl RotationMatrix {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Validates orthonormality (Frobenius) and determinant within `ROTATION_TOL`.
    pub fn try_from_rows(m: [[f64; 3]; 3]) -> Result<Self> {
        let cand = Self { m };
        if !cand.m.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::invalid("rotation matrix has non-finite entries"));
        }
        let ortho = cand.orthonormality_error();
        if ortho > ROTATION_TOL {
            return Err(Error::invalid(format!(
                "matrix is not orthonormal: |R'R - I|_F = {ortho:.3e}"
            )));
        }
        let det = cand.det();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::invalid(format!(
                "matrix determinant {det:.12} != +1"
            )));
        }
        Ok(cand)
    }

    /// For outputs of conversions that are orthonormal by construction.
    pub(crate) fn from_rows_unchecked(m: [[f64; 3]; 3]) -> Self {
        debug_assert!({
            let c = Self { m };
            c.orthonormality_error() < 1e-7 && (c.det() - 1.0).abs() < 1e-7
        });
        Self { m }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Row-major flattening `[m00, m01, m02, m10, ...]`.
    pub fn to_flat(&self) -> [f64; 9] {
        let m = self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn try_from_flat(v: &[f64; 9]) -> Result<Self> {
        Self::try_from_rows([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    /// Column `i`; columns 0, 1, 2 are the left, down and front pose vectors.
    pub fn column(&self, i: usize) -> [f64; 3] {
        [self.m[0][i], self.m[1][i], self.m[2][i]]
    }

    pub fn transpose(&self) -> Self {
        let m = self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * rhs.m[0][j]
                    + self.m[i][1] * rhs.m[1][j]
                    + self.m[i][2] * rhs.m[2][j];
            }
        }
        Self { m: out }
    }

    /// Applies the rotation to a column vector: `R * v`.
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        [
            vec3::dot(self.m[0], v),
            vec3::dot(self.m[1], v),
            vec3::dot(self.m[2], v),
        ]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm of `R'R - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let rt_r = self.transpose().mul(self);
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = rt_r.m[i][j] - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

/// Unit quaternion, scalar-first. Canonical form has `w >= 0`; a zero `w`
/// ties break on the first nonzero vector component being positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    /// Rejects inputs whose norm deviates from 1 by more than 1e-6, then
    /// normalizes exactly and canonicalizes the sign.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if ![w, x, y, z].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("quaternion has non-finite components"));
        }
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "quaternion norm {n:.9} deviates from 1 by more than 1e-6"
            )));
        }
        Ok(Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        }
        .canonicalized())
    }

    pub fn identity() -> Self {
        Self {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    fn canonicalized(self) -> Self {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else if self.x != 0.0 {
            self.x < 0.0
        } else if self.y != 0.0 {
            self.y < 0.0
        } else {
            self.z < 0.0
        };
        if flip {
            Self {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            self
        }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Axis-angle pair: unit axis, angle in radians within `[-pi, +pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub theta: f64,
}

impl AxisAngle {
    /// Normalizes the axis and wraps the angle into `[-pi, +pi]`.
    /// A zero axis is only accepted together with a zero angle.
    pub fn new(axis: [f64; 3], theta: f64) -> Result<Self> {
        if !vec3::is_finite(axis) || !theta.is_finite() {
            return Err(Error::invalid("axis-angle has non-finite components"));
        }
        let mut t = theta % (2.0 * std::f64::consts::PI);
        if t > std::f64::consts::PI {
            t -= 2.0 * std::f64::consts::PI;
        } else if t < -std::f64::consts::PI {
            t += 2.0 * std::f64::consts::PI;
        }
        match vec3::normalize(axis) {
            Some(a) => Ok(Self { axis: a, theta: t }),
            None if t == 0.0 => Ok(Self {
                axis: [1.0, 0.0, 0.0],
                theta: 0.0,
            }),
            None => Err(Error::invalid("zero axis with nonzero angle")),
        }
    }
}

/// Elementary rotation about x by `rad`.
pub fn rot_x(rad: f64) -> RotationMatrix {
    let (s, c) = rad.sin_cos();
    RotationMatrix::from_rows_unchecked([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

/// Elementary rotation about y by `rad`.
pub fn rot_y(rad: f64) -> RotationMatrix {
    let (s, c) = rad.sin_cos();
    RotationMatrix::from_rows_unchecked([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
}

/// Elementary rotation about z by `rad`.
pub fn rot_z(rad: f64) -> RotationMatrix {
    let (s, c) = rad.sin_cos();
    RotationMatrix::from_rows_unchecked([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// `R = Rz(roll) * Ry(yaw) * Rx(pitch)`, angles in degrees.
pub fn euler_to_matrix(e: &EulerAngles) -> Result<RotationMatrix> {
    if !e.is_finite() {
        return Err(Error::invalid("euler angles must be finite"));
    }
    let r = rot_z(e.roll.to_radians())
        .mul(&rot_y(e.yaw.to_radians()))
        .mul(&rot_x(e.pitch.to_radians()));
    Ok(r)
}

/// Result of a matrix -> Euler decomposition. `gimbal_lock` is set when the
/// yaw angle is within 1e-7 deg of +-90 and the returned branch fixes roll = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerDecomposition {
    pub angles: EulerAngles,
    pub gimbal_lock: bool,
}

/// Inverse of [`euler_to_matrix`] under the fixed extrinsic x-y-z convention.
pub fn matrix_to_euler(r: &RotationMatrix) -> EulerDecomposition {
    let m = r.rows();
    let sin_yaw = (-m[2][0]).clamp(-1.0, 1.0);
    let yaw = sin_yaw.asin().to_degrees();
    let locked = 90.0 - yaw.abs() < 1e-7;
    if locked {
        // Only pitch -+ roll is determined; take the roll = 0 branch.
        let pitch = if sin_yaw > 0.0 {
            m[0][1].atan2(m[0][2]).to_degrees()
        } else {
            (-m[0][1]).atan2(-m[0][2]).to_degrees()
        };
        return EulerDecomposition {
            angles: EulerAngles::new(wrap_degrees(pitch), yaw, 0.0),
            gimbal_lock: true,
        };
    }
    let pitch = m[2][1].atan2(m[2][2]).to_degrees();
    let roll = m[1][0].atan2(m[0][0]).to_degrees();
    EulerDecomposition {
        angles: EulerAngles::new(wrap_degrees(pitch), yaw, wrap_degrees(roll)),
        gimbal_lock: false,
    }
}

/// Standard quaternion -> matrix homomorphism; `q` and `-q` map identically.
pub fn quat_to_matrix(q: &UnitQuaternion) -> RotationMatrix {
    let (w, x, y, z) = (q.w, q.x, q.y, q.z);
    RotationMatrix::from_rows_unchecked([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

/// Shepperd's method: branch on the largest of the four diagonal combinations.
pub fn matrix_to_quat(r: &RotationMatrix) -> UnitQuaternion {
    let m = r.rows();
    let trace = r.trace();
    let (w, x, y, z);
    if trace > 0.0 {
        let s = (trace + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (m[2][1] - m[1][2]) / s;
        y = (m[0][2] - m[2][0]) / s;
        z = (m[1][0] - m[0][1]) / s;
    } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
        let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
        w = (m[2][1] - m[1][2]) / s;
        x = 0.25 * s;
        y = (m[0][1] + m[1][0]) / s;
        z = (m[0][2] + m[2][0]) / s;
    } else if m[1][1] > m[2][2] {
        let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
        w = (m[0][2] - m[2][0]) / s;
        x = (m[0][1] + m[1][0]) / s;
        y = 0.25 * s;
        z = (m[1][2] + m[2][1]) / s;
    } else {
        let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
        w = (m[1][0] - m[0][1]) / s;
        x = (m[0][2] + m[2][0]) / s;
        y = (m[1][2] + m[2][1]) / s;
        z = 0.25 * s;
    }
    let n = (w * w + x * x + y * y + z * z).sqrt();
    UnitQuaternion {
        w: w / n,
        x: x / n,
        y: y / n,
        z: z / n,
    }
    .canonicalized()
}

/// Rodrigues formula: `R = I + sin(t) K + (1 - cos(t)) K^2`.
pub fn axis_angle_to_matrix(a: &AxisAngle) -> RotationMatrix {
    let [x, y, z] = a.axis;
    let (s, c) = a.theta.sin_cos();
    let t = 1.0 - c;
    RotationMatrix::from_rows_unchecked([
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ])
}

/// Log map. Returns `theta >= 0`; the axis comes from the skew part away
/// from `theta = pi`, and from the symmetric part near `pi`, where the sign
/// is canonicalized (first nonzero component positive) at exactly `pi`.
pub fn matrix_to_axis_angle(r: &RotationMatrix) -> AxisAngle {
    let m = r.rows();
    let cos_t = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let theta = cos_t.acos();
    // skew = 2 sin(theta) * axis
    let skew = [m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]];
    if theta < 1e-12 {
        return AxisAngle {
            axis: [1.0, 0.0, 0.0],
            theta: 0.0,
        };
    }
    if theta < std::f64::consts::PI - 1e-4 {
        let axis = vec3::normalize(skew).expect("skew part nonzero away from 0 and pi");
        return AxisAngle { axis, theta };
    }
    // Near pi the arccos of the trace loses half the significant digits;
    // recover the angle from the skew norm instead: |skew| = 2 sin(theta).
    let theta = std::f64::consts::PI - (vec3::norm(skew) / 2.0).clamp(0.0, 1.0).asin();
    // Axis from the outer product (R + R') / 2 = cos t I + (1 - cos t) aa'.
    let denom = 1.0 - cos_t;
    let sym = |i: usize, j: usize| (m[i][j] + m[j][i]) / 2.0;
    let diag = [
        (m[0][0] - cos_t) / denom,
        (m[1][1] - cos_t) / denom,
        (m[2][2] - cos_t) / denom,
    ];
    let lead = (0..3).max_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap();
    let mut axis = [0.0; 3];
    axis[lead] = diag[lead].max(0.0).sqrt();
    for j in 0..3 {
        if j != lead {
            axis[j] = sym(lead, j) / denom / axis[lead];
        }
    }
    let axis = vec3::normalize(axis).expect("axis magnitude near 1");
    let skew_norm = vec3::norm(skew);
    let axis = if skew_norm > 1e-9 {
        // Sign from the remaining skew part.
        if vec3::dot(axis, skew) < 0.0 {
            vec3::scale(axis, -1.0)
        } else {
            axis
        }
    } else {
        canonical_axis_sign(axis)
    };
    AxisAngle { axis, theta }
}

fn canonical_axis_sign(axis: [f64; 3]) -> [f64; 3] {
    for c in axis {
        if c.abs() > 1e-9 {
            return if c < 0.0 {
                vec3::scale(axis, -1.0)
            } else {
                axis
            };
        }
    }
    axis
}

/// Nearest rotation to an arbitrary 3x3 matrix (orthogonal Procrustes with
/// the det = +1 constraint). The singular vector pair of the smallest
/// singular value carries the sign correction, so reflections are never
/// produced even when `det(U V') = -1`.
pub fn project_to_so3(a: &[[f64; 3]; 3]) -> Result<RotationMatrix> {
    if !a.iter().flatten().all(|x| x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let na = Matrix3::new(
        a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2],
    );
    let svd = na.svd(true, true);
    let sv = svd.singular_values;
    let min_idx = (0..3).min_by(|&i, &j| sv[i].total_cmp(&sv[j])).unwrap();
    if sv[min_idx] <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "smallest singular value {:.3e} is below 1e-12",
            sv[min_idx]
        )));
    }
    let u = svd.u.expect("svd with u requested");
    let v_t = svd.v_t.expect("svd with v_t requested");
    let sign = if (u * v_t).determinant() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let mut d = Matrix3::identity();
    d[(min_idx, min_idx)] = sign;
    let r = u * d * v_t;
    Ok(RotationMatrix::from_rows_unchecked([
        [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
        [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
        [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
    ]))
}

/// Rotation angle of `R1' R2` in degrees — the intrinsic metric on SO(3).
pub fn geodesic_distance_deg(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    let rel = r1.transpose().mul(r2);
    let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Uniform random rotation from a normalized 4-Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let w: f64 = StandardNormal.sample(rng);
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n > 1e-6 {
            let q = UnitQuaternion {
                w: w / n,
                x: x / n,
                y: y / n,
                z: z / n,
            }
            .canonicalized();
            return quat_to_matrix(&q);
        }
    }
}
