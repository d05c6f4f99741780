//! Expectation bias of range-limited 1D label distributions versus the
//! spherical construction.
//!
//! A Gaussian over the integer-degree bins `{-179, ..., 180}` loses the tail
//! mass that falls outside the range, so its expectation shifts toward the
//! center of the support — and the shift grows as the mean approaches the
//! boundary. The spherical encoding has no boundary: decoding the
//! distribution of a pose vector recovers its direction to within a small
//! lattice-dependent angle regardless of where it points. This module
//! measures both effects and emits them as a paired report.

use crate::asg::{decode_vector, encode, AsgParams, NormalizationMode};
use crate::error::{Error, Result};
use crate::lattice::SphereLattice;
use crate::plot;
use crate::rotation::{random_rotation, wrap_degrees};
use crate::vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;

/// Discretized Gaussian over integer-degree bins `{-179, ..., 180}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussianSpec {
    mu: f64,
    sigma: f64,
}

pub const BIN_LO: i32 = -179;
pub const BIN_HI: i32 = 180;

impl TruncatedGaussianSpec {
    /// `mu` is wrapped into `(-180, 180]`; `sigma` must be positive.
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid("mu must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            mu: wrap_degrees(mu),
            sigma,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Expectation over the bins and its deviation from the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedExpectation {
    pub expectation: f64,
    pub bias: f64,
}

/// Normalizes `exp(-(b - mu)^2 / (2 sigma^2))` over the bins and takes the
/// expectation. No wraparound: this is the plain bounded-range construction.
pub fn truncated_expectation(spec: &TruncatedGaussianSpec) -> TruncatedExpectation {
    let inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
    let mut mass = 0.0;
    let mut weighted = 0.0;
    for b in BIN_LO..=BIN_HI {
        let d = b as f64 - spec.mu;
        let p = (-d * d * inv).exp();
        mass += p;
        weighted += p * b as f64;
    }
    let expectation = weighted / mass;
    TruncatedExpectation {
        expectation,
        bias: expectation - spec.mu,
    }
}

/// Bias at each requested mean, fixed sigma.
pub fn bias_sweep(sigma: f64, mus: &[f64]) -> Result<Vec<(f64, f64)>> {
    mus.iter()
        .map(|mu| {
            let spec = TruncatedGaussianSpec::new(*mu, sigma)?;
            Ok((*mu, truncated_expectation(&spec).bias))
        })
        .collect()
}

/// Angles (degrees) between each pose vector and its decoded direction, for
/// `n_trials` seeded random rotations — three angles per trial.
pub fn spherical_decode_angles(
    m: usize,
    params: &AsgParams,
    mode: NormalizationMode,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_trials == 0 {
        return Err(Error::invalid("at least one trial required"));
    }
    let lat = SphereLattice::fibonacci(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angles = Vec::with_capacity(3 * n_trials);
    for _ in 0..n_trials {
        let r = random_rotation(&mut rng);
        for head in 0..3 {
            let p = encode(&r, head, params, &lat, mode)?;
            let decoded = decode_vector(&p, &lat)?;
            angles.push(vec3::angle_between_deg(decoded, r.column(head)));
        }
    }
    Ok(angles)
}

/// Mean and maximum decode angle over all trials and heads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalBiasStats {
    pub mean_angle_deg: f64,
    pub max_angle_deg: f64,
}

pub fn spherical_bias(
    m: usize,
    params: &AsgParams,
    mode: NormalizationMode,
    n_trials: usize,
    seed: u64,
) -> Result<SphericalBiasStats> {
    let angles = spherical_decode_angles(m, params, mode, n_trials, seed)?;
    let mean = angles.iter().sum::<f64>() / angles.len() as f64;
    let max = angles.iter().cloned().fold(0.0f64, f64::max);
    Ok(SphericalBiasStats {
        mean_angle_deg: mean,
        max_angle_deg: max,
    })
}

/// Settings for the paired report.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasLabConfig {
    pub sigma: f64,
    pub mus: Vec<f64>,
    pub m: usize,
    pub params: AsgParams,
    pub mode: NormalizationMode,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BiasLabConfig {
    fn default() -> Self {
        Self {
            sigma: 30.0,
            mus: vec![0.0, 60.0, 120.0, 175.0],
            m: 600,
            params: AsgParams::new(5.0, 5.0).expect("positive"),
            mode: NormalizationMode::Linear,
            trials: 1000,
            seed: 0,
        }
    }
}

/// Headline numbers of the paired experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasLabSummary {
    pub spherical: SphericalBiasStats,
    /// Smallest 1D bias magnitude over integer means in `[90, 179]` at
    /// sigma = 30 — the comparison baseline.
    pub min_abs_bias_90_179: f64,
    pub spherical_beats_1d: bool,
}

/// Runs both experiments and writes the paired artifacts into `out_dir`:
/// `bias_curve.csv` / `.svg` (1D bias across all integer means at the
/// configured sigma), `decode_angle_hist.csv` / `.svg` (spherical decode
/// angles), and `summary.txt`. Byte-identical for identical configurations.
pub fn biased_vs_unbiased_report(cfg: &BiasLabConfig, out_dir: &Path) -> Result<BiasLabSummary> {
    std::fs::create_dir_all(out_dir)?;

    // 1D curve over the full integer support at the configured sigma.
    let mut curve = Vec::with_capacity(360);
    for mu in BIN_LO..=BIN_HI {
        let spec = TruncatedGaussianSpec::new(mu as f64, cfg.sigma)?;
        curve.push((mu as f64, truncated_expectation(&spec).bias));
    }
    let mut curve_csv = String::from("mu,bias_deg\n");
    for (mu, bias) in &curve {
        let _ = writeln!(curve_csv, "{mu},{bias}");
    }
    std::fs::write(out_dir.join("bias_curve.csv"), curve_csv)?;
    std::fs::write(
        out_dir.join("bias_curve.svg"),
        plot::line_chart(
            &curve,
            "label mean (deg)",
            "expectation bias (deg)",
            &format!("bounded-range 1D bias, sigma = {}", cfg.sigma),
        ),
    )?;

    // Spherical decode angles with a fixed-width histogram.
    let angles = spherical_decode_angles(cfg.m, &cfg.params, cfg.mode, cfg.trials, cfg.seed)?;
    let max_angle = angles.iter().cloned().fold(0.0f64, f64::max);
    let bin_width = 0.05;
    let n_bins = ((max_angle / bin_width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; n_bins];
    for a in &angles {
        let idx = ((a / bin_width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let bins: Vec<(f64, f64, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * bin_width, (i + 1) as f64 * bin_width, *c))
        .collect();
    let mut hist_csv = String::from("bin_lo_deg,bin_hi_deg,count\n");
    for (lo, hi, c) in &bins {
        let _ = writeln!(hist_csv, "{lo},{hi},{c}");
    }
    std::fs::write(out_dir.join("decode_angle_hist.csv"), hist_csv)?;
    std::fs::write(
        out_dir.join("decode_angle_hist.svg"),
        plot::histogram(
            &bins,
            "decode angle (deg)",
            &format!(
                "spherical decode angles, m = {}, {} trials",
                cfg.m, cfg.trials
            ),
        ),
    )?;

    // Comparison baseline: sigma = 30, integer means in [90, 179].
    let mut min_abs_bias = f64::INFINITY;
    for mu in 90..=179 {
        let spec = TruncatedGaussianSpec::new(mu as f64, 30.0)?;
        min_abs_bias = min_abs_bias.min(truncated_expectation(&spec).bias.abs());
    }
    let mean = angles.iter().sum::<f64>() / angles.len() as f64;
    let spherical = SphericalBiasStats {
        mean_angle_deg: mean,
        max_angle_deg: max_angle,
    };
    let summary = BiasLabSummary {
        spherical,
        min_abs_bias_90_179: min_abs_bias,
        spherical_beats_1d: max_angle < min_abs_bias,
    };

    let mut text = String::new();
    let _ = writeln!(text, "sigma = {}", cfg.sigma);
    let _ = writeln!(
        text,
        "m = {}, lambda = {}, eta = {}, mode = {:?}, trials = {}, seed = {}",
        cfg.m,
        cfg.params.lambda(),
        cfg.params.eta(),
        cfg.mode,
        cfg.trials,
        cfg.seed
    );
    let _ = writeln!(text, "\n1d bias at requested means (mu, bias_deg):");
    for (mu, bias) in bias_sweep(cfg.sigma, &cfg.mus)? {
        let _ = writeln!(text, "  {mu}: {bias}");
    }
    let _ = writeln!(
        text,
        "\nspherical decode angle: mean = {} deg, max = {} deg",
        spherical.mean_angle_deg, spherical.max_angle_deg
    );
    let _ = writeln!(
        text,
        "min |1d bias| over mu in [90, 179] at sigma 30: {min_abs_bias} deg"
    );
    let _ = writeln!(
        text,
        "max spherical decode angle < min |1d bias| on that range: {}",
        summary.spherical_beats_1d
    );
    std::fs::write(out_dir.join("summary.txt"), text)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_support_gives_zero_bias() {
        // Bins are symmetric about 0.5, so mu = 0.5 is exactly unbiased.
        let spec = TruncatedGaussianSpec::new(0.5, 10.0).unwrap();
        let got = truncated_expectation(&spec);
        assert!(got.bias.abs() < 1e-12, "bias {}", got.bias);
    }

    #[test]
    fn mu_zero_residual_is_tiny() {
        for sigma in [5.0, 30.0, 60.0] {
            let spec = TruncatedGaussianSpec::new(0.0, sigma).unwrap();
            let got = truncated_expectation(&spec);
            assert!(got.bias.abs() <= 0.51, "sigma {sigma}: {}", got.bias);
        }
    }

    #[test]
    fn boundary_mean_shifts_toward_center() {
        let spec = TruncatedGaussianSpec::new(120.0, 30.0).unwrap();
        let got = truncated_expectation(&spec);
        assert!(got.bias < 0.0, "bias {}", got.bias);

        // Direct summation oracle.
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for b in -179..=180 {
            let p = (-(b as f64 - 120.0).powi(2) / (2.0 * 900.0)).exp();
            mass += p;
            weighted += p * b as f64;
        }
        let oracle = weighted / mass - 120.0;
        assert!((got.bias - oracle).abs() < 1e-12);
    }

    #[test]
    fn sigma_must_be_positive() {
        assert!(TruncatedGaussianSpec::new(0.0, 0.0).is_err());
        assert!(TruncatedGaussianSpec::new(0.0, -3.0).is_err());
    }

    #[test]
    fn bias_magnitude_grows_toward_the_boundary() {
        let sweep = bias_sweep(30.0, &[0.0, 60.0, 120.0, 175.0]).unwrap();
        for pair in sweep.windows(2) {
            assert!(
                pair[1].1.abs() > pair[0].1.abs(),
                "|bias| not increasing: {pair:?}"
            );
        }
        assert!(sweep[3].1.abs() > 0.5);
    }

    #[test]
    fn opposite_boundaries_have_opposite_near_equal_bias() {
        let plus = truncated_expectation(&TruncatedGaussianSpec::new(175.0, 30.0).unwrap());
        let minus = truncated_expectation(&TruncatedGaussianSpec::new(-174.0, 30.0).unwrap());
        assert!(plus.bias < 0.0 && minus.bias > 0.0);
        // One-bin support asymmetry keeps the magnitudes from matching exactly.
        let rel = (plus.bias.abs() - minus.bias.abs()).abs() / plus.bias.abs();
        assert!(rel < 0.05, "magnitudes differ by {rel}");
    }

    #[test]
    fn bias_sign_points_at_the_support_center() {
        for sigma in [5.0, 20.0, 45.0, 60.0] {
            for mu in [-150.0, -40.0, 17.0, 90.0, 179.0] {
                let got = truncated_expectation(&TruncatedGaussianSpec::new(mu, sigma).unwrap());
                if (mu - 0.5f64).abs() > 1e-9 {
                    let want_sign = -(mu - 0.5).signum();
                    // far from the boundary the bias is zero up to summation noise
                    assert!(
                        got.bias.abs() < 1e-9 || got.bias.signum() == want_sign,
                        "mu {mu} sigma {sigma}: bias {}",
                        got.bias
                    );
                }
            }
        }
    }

    #[test]
    fn bias_monotone_in_distance_from_center() {
        for sigma in [10.0, 30.0] {
            let mus: Vec<f64> = (0..=17).map(|i| 0.5 + i as f64 * 10.0).collect();
            let sweep = bias_sweep(sigma, &mus).unwrap();
            for pair in sweep.windows(2) {
                assert!(
                    pair[0].1.abs() <= pair[1].1.abs() + 1e-12,
                    "sigma {sigma}: {pair:?}"
                );
            }
        }
    }

    #[test]
    fn spherical_one_hot_is_exact() {
        // A distribution concentrated on a lattice point decodes to exactly
        // that point.
        let lat = SphereLattice::fibonacci(64).unwrap();
        let mut probs = vec![0.0; 64];
        probs[7] = 1.0;
        let p = crate::asg::PoseDistribution::new(probs, 64, 0).unwrap();
        let decoded = decode_vector(&p, &lat).unwrap();
        assert_eq!(decoded, lat.points()[7]);
    }

    #[test]
    fn spherical_bias_small_and_shrinking_with_m() {
        let params = AsgParams::new(5.0, 5.0).unwrap();
        let coarse = spherical_bias(150, &params, NormalizationMode::Linear, 60, 7).unwrap();
        let mid = spherical_bias(600, &params, NormalizationMode::Linear, 60, 7).unwrap();
        let fine = spherical_bias(2400, &params, NormalizationMode::Linear, 60, 7).unwrap();
        assert!(mid.mean_angle_deg < coarse.mean_angle_deg);
        assert!(fine.mean_angle_deg < mid.mean_angle_deg);
        assert!(mid.mean_angle_deg <= 1.0);
    }

    #[test]
    fn report_writes_five_files_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = BiasLabConfig {
            m: 150,
            trials: 20,
            ..BiasLabConfig::default()
        };
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        let summary_a = biased_vs_unbiased_report(&cfg, &out_a).unwrap();
        let summary_b = biased_vs_unbiased_report(&cfg, &out_b).unwrap();
        assert_eq!(summary_a, summary_b);
        for name in [
            "bias_curve.csv",
            "bias_curve.svg",
            "decode_angle_hist.csv",
            "decode_angle_hist.svg",
            "summary.txt",
        ] {
            let a = std::fs::read(out_a.join(name)).unwrap();
            let b = std::fs::read(out_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }
}
