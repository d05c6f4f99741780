//! Orientation learning toolkit built around anisotropic spherical Gaussian
//! label distributions.
//!
//! The crate provides, bottom to top:
//!
//! - [`rotation`]: Euler / quaternion / axis-angle / matrix conversions,
//!   nearest-rotation projection and the geodesic metric on SO(3);
//! - [`lattice`]: deterministic Fibonacci sampling of the unit sphere;
//! - [`asg`]: encoding pose vectors as probability distributions over the
//!   lattice and decoding them back through expectation plus projection;
//! - [`loss`]: the compound KL + MSE training loss with analytic gradients
//!   and a finite-difference checker;
//! - [`metrics`]: wraparound-aware Euler MAE and per-column vector MAEV;
//! - [`train`]: a synthetic-data trainer exercising adaptive concentrations
//!   end to end;
//! - [`bias`]: quantitative comparison of range-limited 1D label
//!   distributions (biased expectation) against the spherical construction.

pub mod asg;
pub mod bias;
pub mod error;
pub mod io;
pub mod lattice;
pub mod loss;
pub mod metrics;
pub mod plot;
pub mod rotation;
pub mod train;
pub mod vec3;

pub use asg::{AsgParams, NormalizationMode, PoseDistribution};
pub use error::{Error, Result};
pub use lattice::SphereLattice;
pub use loss::{HeadOutput, LossBreakdown};
pub use rotation::{AxisAngle, EulerAngles, RotationMatrix, UnitQuaternion};
