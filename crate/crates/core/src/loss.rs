//! Compound per-head training loss and its analytic gradient.
//!
//! Each head emits `m` logits plus two raw concentration pre-activations.
//! The logits become the predicted distribution `Q` through a softmax; the
//! raw pair becomes `(lambda, eta)` through a floored softplus and, together
//! with the ground-truth rotation, the target distribution `P`. The loss is
//!
//! ```text
//! total = KL(P || Q) + alpha * MSE(r_i, expectation(Q))
//! ```
//!
//! The gradient flows through `Q` (softmax and expectation) and through
//! `P`'s dependence on the raw concentration pair, so the concentrations
//! receive a learning signal. A central-difference checker validates every
//! component of the analytic gradient.

use crate::asg::{check_head_index, AsgParams, NormalizationMode, PoseDistribution};
use crate::error::{Error, Result};
use crate::lattice::SphereLattice;
use crate::rotation::{random_rotation, RotationMatrix};
use crate::vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Predicted probabilities below this are clamped before the log.
pub const PROB_CLAMP: f64 = 1e-12;

/// Additive floor keeping softplus-mapped concentrations strictly positive.
pub const PARAM_FLOOR: f64 = 1e-3;

/// Raw output of one head: `m` logits plus two concentration pre-activations.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutput {
    pub logits: Vec<f64>,
    pub raw_lambda: f64,
    pub raw_eta: f64,
}

impl HeadOutput {
    /// Splits a flat `m + 2` vector into logits and the raw pair.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() < 3 {
            return Err(Error::invalid(format!(
                "head output needs at least 3 entries, got {}",
                flat.len()
            )));
        }
        let m = flat.len() - 2;
        Ok(Self {
            logits: flat[..m].to_vec(),
            raw_lambda: flat[m],
            raw_eta: flat[m + 1],
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.logits.clone();
        out.push(self.raw_lambda);
        out.push(self.raw_eta);
        out
    }

    pub fn m(&self) -> usize {
        self.logits.len()
    }
}

/// The two loss terms and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub cls: f64,
    pub reg: f64,
    pub alpha: f64,
    pub total: f64,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Maps unconstrained raw values to strictly positive concentrations:
/// `softplus(raw) + PARAM_FLOOR`.
pub fn softplus_params(raw_lambda: f64, raw_eta: f64) -> AsgParams {
    AsgParams::new(
        softplus(raw_lambda) + PARAM_FLOOR,
        softplus(raw_eta) + PARAM_FLOOR,
    )
    .expect("softplus output is positive")
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// `KL(p || q)` with `q` clamped below at `PROB_CLAMP`; `0 log 0 = 0`.
pub fn kl_div(p: &PoseDistribution, q: &PoseDistribution) -> Result<f64> {
    if p.probs().len() != q.probs().len() {
        return Err(Error::Incompatible(format!(
            "distribution lengths {} vs {}",
            p.probs().len(),
            q.probs().len()
        )));
    }
    let mut acc = 0.0;
    for (pk, qk) in p.probs().iter().zip(q.probs()) {
        if *pk > 0.0 {
            acc += pk * (pk.ln() - qk.max(PROB_CLAMP).ln());
        }
    }
    Ok(acc.max(0.0))
}

/// Mean squared error over the three vector components.
pub fn mse_vec(r: [f64; 3], r_hat: [f64; 3]) -> f64 {
    let d = vec3::sub(r, r_hat);
    vec3::dot(d, d) / 3.0
}

/// How the target distribution obtains its concentration pair.
enum ParamsSource {
    /// Softplus of the head's raw outputs; gradient flows into them.
    FromRaw,
    /// Frozen constants; the raw outputs receive zero gradient.
    Fixed(AsgParams),
}

/// Full per-head loss using the head's own raw concentration outputs.
pub fn head_loss(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
) -> Result<LossBreakdown> {
    let (loss, _) = evaluate_head(h, r, head, lat, alpha, mode, ParamsSource::FromRaw, false)?;
    Ok(loss)
}

/// Per-head loss with the concentration pair frozen to `params`.
pub fn head_loss_fixed(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
    params: AsgParams,
) -> Result<LossBreakdown> {
    let (loss, _) = evaluate_head(
        h,
        r,
        head,
        lat,
        alpha,
        mode,
        ParamsSource::Fixed(params),
        false,
    )?;
    Ok(loss)
}

/// Analytic gradient of the total loss with respect to every logit and the
/// two raw concentration pre-activations (length `m + 2`).
pub fn head_loss_grad(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
) -> Result<Vec<f64>> {
    let (_, grad) = evaluate_head(h, r, head, lat, alpha, mode, ParamsSource::FromRaw, true)?;
    Ok(grad.expect("gradient requested"))
}

/// Loss and gradient in one pass over the lattice.
pub fn head_loss_with_grad(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
) -> Result<(LossBreakdown, Vec<f64>)> {
    let (loss, grad) = evaluate_head(h, r, head, lat, alpha, mode, ParamsSource::FromRaw, true)?;
    Ok((loss, grad.expect("gradient requested")))
}

/// Loss and gradient with frozen concentrations; raw-slot gradients are zero.
pub fn head_loss_with_grad_fixed(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
    params: AsgParams,
) -> Result<(LossBreakdown, Vec<f64>)> {
    let (loss, grad) = evaluate_head(
        h,
        r,
        head,
        lat,
        alpha,
        mode,
        ParamsSource::Fixed(params),
        true,
    )?;
    Ok((loss, grad.expect("gradient requested")))
}

/// Gradient in fixed-concentration mode; the last two slots are zero.
pub fn head_loss_grad_fixed(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
    params: AsgParams,
) -> Result<Vec<f64>> {
    let (_, grad) = evaluate_head(
        h,
        r,
        head,
        lat,
        alpha,
        mode,
        ParamsSource::Fixed(params),
        true,
    )?;
    Ok(grad.expect("gradient requested"))
}

/// Shared loss/gradient evaluation. One pass over the lattice computes the
/// kernel, both distributions and, when asked, every partial derivative.
#[allow(clippy::too_many_arguments)]
fn evaluate_head(
    h: &HeadOutput,
    r: &RotationMatrix,
    head: usize,
    lat: &SphereLattice,
    alpha: f64,
    mode: NormalizationMode,
    source: ParamsSource,
    with_grad: bool,
) -> Result<(LossBreakdown, Option<Vec<f64>>)> {
    check_head_index(head)?;
    mode.validate()?;
    let m = lat.m();
    if h.logits.len() != m {
        return Err(Error::Incompatible(format!(
            "{} logits for a lattice of {m} points",
            h.logits.len()
        )));
    }
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::invalid(format!("alpha {alpha} not in [0, 1]")));
    }

    let params = match source {
        ParamsSource::FromRaw => softplus_params(h.raw_lambda, h.raw_eta),
        ParamsSource::Fixed(p) => p,
    };

    // Predicted distribution Q from the logits.
    let q = softmax(&h.logits);
    let max_logit = h.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_z: f64 = h
        .logits
        .iter()
        .map(|l| (l - max_logit).exp())
        .sum::<f64>()
        .ln();
    let ln_q_clamped: Vec<f64> = h
        .logits
        .iter()
        .zip(&q)
        .map(|(l, qk)| {
            if *qk < PROB_CLAMP {
                PROB_CLAMP.ln()
            } else {
                (l - max_logit) - ln_z
            }
        })
        .collect();

    // Kernel over the lattice and its tangent alignments.
    let ri = r.column(head);
    let rj = r.column((head + 1) % 3);
    let rk = r.column((head + 2) % 3);
    let mut kernel = vec![0.0; m];
    let mut u = vec![0.0; m]; // (d . r_j)^2
    let mut w = vec![0.0; m]; // (d . r_k)^2
    for (idx, d) in lat.points().iter().enumerate() {
        let ti = vec3::dot(*d, ri);
        let tj = vec3::dot(*d, rj);
        let tk = vec3::dot(*d, rk);
        u[idx] = tj * tj;
        w[idx] = tk * tk;
        kernel[idx] = ti.max(0.0) * (-params.lambda() * u[idx] - params.eta() * w[idx]).exp();
    }

    // Target distribution P with its logs.
    let (p, ln_p): (Vec<f64>, Vec<f64>) = match mode {
        NormalizationMode::Softmax { scale } => {
            let gmax = kernel.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = kernel.iter().map(|g| (scale * (g - gmax)).exp()).collect();
            let z: f64 = exps.iter().sum();
            let ln_z = z.ln();
            let p: Vec<f64> = exps.iter().map(|e| e / z).collect();
            let ln_p = kernel.iter().map(|g| scale * (g - gmax) - ln_z).collect();
            (p, ln_p)
        }
        NormalizationMode::Linear => {
            let z: f64 = kernel.iter().sum();
            if z <= 0.0 {
                return Err(Error::Degenerate(
                    "kernel mass is zero over the entire lattice".into(),
                ));
            }
            let ln_z = z.ln();
            let p: Vec<f64> = kernel.iter().map(|g| g / z).collect();
            // ln is only consumed where p > 0.
            let ln_p = kernel
                .iter()
                .map(|g| {
                    if *g > 0.0 {
                        g.ln() - ln_z
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            (p, ln_p)
        }
    };

    // Loss terms.
    let mut cls = 0.0;
    for k in 0..m {
        if p[k] > 0.0 {
            cls += p[k] * (ln_p[k] - ln_q_clamped[k]);
        }
    }
    cls = cls.max(0.0);

    let mut r_hat = [0.0; 3];
    for (qk, d) in q.iter().zip(lat.points()) {
        r_hat = vec3::add(r_hat, vec3::scale(*d, *qk));
    }
    let reg = mse_vec(ri, r_hat);
    let total = cls + alpha * reg;
    let loss = LossBreakdown {
        cls,
        reg,
        alpha,
        total,
    };
    if !with_grad {
        return Ok((loss, None));
    }

    let mut grad = vec![0.0; m + 2];

    // Logit gradient. The classification part uses the clamp-aware softmax
    // Jacobian; the regression part differentiates the expectation.
    let unclamped_p_mass: f64 = (0..m).filter(|k| q[*k] >= PROB_CLAMP).map(|k| p[k]).sum();
    let residual = vec3::sub(r_hat, ri);
    for k in 0..m {
        let cls_part = q[k] * unclamped_p_mass - if q[k] >= PROB_CLAMP { p[k] } else { 0.0 };
        let reg_part = 2.0 / 3.0 * q[k] * vec3::dot(vec3::sub(lat.points()[k], r_hat), residual);
        grad[k] = cls_part + alpha * reg_part;
    }

    // Raw concentration gradients only when the target depends on them.
    if let ParamsSource::FromRaw = source {
        let (dp_dl, dp_de): (Vec<f64>, Vec<f64>) = match mode {
            NormalizationMode::Softmax { scale } => {
                let mean_ug: f64 = (0..m).map(|k| p[k] * u[k] * kernel[k]).sum();
                let mean_wg: f64 = (0..m).map(|k| p[k] * w[k] * kernel[k]).sum();
                (
                    (0..m)
                        .map(|k| scale * p[k] * (mean_ug - u[k] * kernel[k]))
                        .collect(),
                    (0..m)
                        .map(|k| scale * p[k] * (mean_wg - w[k] * kernel[k]))
                        .collect(),
                )
            }
            NormalizationMode::Linear => {
                let mean_u: f64 = (0..m).map(|k| p[k] * u[k]).sum();
                let mean_w: f64 = (0..m).map(|k| p[k] * w[k]).sum();
                (
                    (0..m).map(|k| p[k] * (mean_u - u[k])).collect(),
                    (0..m).map(|k| p[k] * (mean_w - w[k])).collect(),
                )
            }
        };
        let mut dcls_dlambda = 0.0;
        let mut dcls_deta = 0.0;
        for k in 0..m {
            if p[k] > 0.0 {
                let factor = ln_p[k] + 1.0 - ln_q_clamped[k];
                dcls_dlambda += dp_dl[k] * factor;
                dcls_deta += dp_de[k] * factor;
            }
        }
        grad[m] = dcls_dlambda * sigmoid(h.raw_lambda);
        grad[m + 1] = dcls_deta * sigmoid(h.raw_eta);
    }

    Ok((loss, Some(grad)))
}

/// Central-difference gradient of a scalar function.
pub fn finite_diff_gradient<F>(f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let plus = f(&probe);
        probe[i] = x[i] - step;
        let minus = f(&probe);
        probe[i] = x[i];
        grad.push((plus - minus) / (2.0 * step));
    }
    grad
}

/// Worst per-component relative disagreement between two gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_component: usize,
}

/// Per-component relative error with an absolute floor of 1e-4 in the
/// denominator so near-zero components compare on an absolute scale.
pub fn compare_gradients(analytic: &[f64], numeric: &[f64]) -> GradCheckReport {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst = 0.0;
    let mut worst_component = 0;
    for (i, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        let denom = a.abs().max(n.abs()).max(1e-4);
        let rel = (a - n).abs() / denom;
        if rel > worst {
            worst = rel;
            worst_component = i;
        }
    }
    GradCheckReport {
        max_rel_err: worst,
        worst_component,
    }
}

/// Settings for the seeded head-loss gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub m: usize,
    pub seeds: u64,
    pub alpha: f64,
    pub mode: NormalizationMode,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            m: 60,
            seeds: 20,
            alpha: 0.2,
            mode: NormalizationMode::default(),
        }
    }
}

/// Compares the analytic head-loss gradient against central differences at
/// `cfg.seeds` deterministic random configurations.
pub fn finite_diff_check(cfg: &GradCheckConfig, step: f64) -> Result<GradCheckReport> {
    if !(step.is_finite() && step > 0.0 && step <= 1e-2) {
        return Err(Error::invalid(format!("step {step} not in (0, 1e-2]")));
    }
    if cfg.seeds == 0 {
        return Err(Error::invalid("at least one seed required"));
    }
    let lat = SphereLattice::fibonacci(cfg.m)?;
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_component: 0,
    };
    for seed in 0..cfg.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e3779b9 ^ seed);
        let r = random_rotation(&mut rng);
        let head = (seed % 3) as usize;
        let mut flat: Vec<f64> = (0..cfg.m + 2)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        // keep later draws independent of the vector length
        flat.truncate(cfg.m + 2);
        let h = HeadOutput::from_flat(&flat)?;
        let analytic = head_loss_grad(&h, &r, head, &lat, cfg.alpha, cfg.mode)?;
        let numeric = finite_diff_gradient(
            |x| {
                let probe = HeadOutput::from_flat(x).expect("same length");
                head_loss(&probe, &r, head, &lat, cfg.alpha, cfg.mode)
                    .expect("valid configuration")
                    .total
            },
            &flat,
            step,
        );
        let one = compare_gradients(&analytic, &numeric);
        if one.max_rel_err > report.max_rel_err {
            report = one;
        }
    }
    Ok(report)
}
