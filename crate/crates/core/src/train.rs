//! Desk-scale end-to-end training on a synthetic orientation task.
//!
//! Targets are uniform random rotations; features are the flattened target
//! matrix plus Gaussian noise, standing in for backbone image features. One
//! small head per pose vector maps features to `m + 2` outputs, Adam
//! minimizes the summed three-head compound loss, and evaluation decodes
//! through expectation plus nearest-rotation projection. Training is
//! bitwise deterministic for a given `(seed, config)`; the opt-in parallel
//! batch mode reduces per-sample gradients in a fixed order so it matches
//! the serial path exactly.

use crate::asg::{decode_pose, AsgParams, NormalizationMode, PoseDistribution};
use crate::error::{Error, Result};
use crate::lattice::SphereLattice;
use crate::loss::{
    head_loss, head_loss_fixed, head_loss_with_grad, head_loss_with_grad_fixed, softmax,
    softplus_params, HeadOutput,
};
use crate::metrics::{mae_euler, maev};
use crate::rotation::{matrix_to_euler, random_rotation, RotationMatrix};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufWriter, Write};
use std::path::Path;

/// One training example: noisy flattened rotation plus the exact target.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub features: Vec<f64>,
    pub target: RotationMatrix,
}

/// Deterministic synthetic dataset: targets uniform over rotations,
/// features `vec(R) + N(0, sigma^2)` per component.
pub fn generate_dataset(n: usize, noise_sigma: f64, seed: u64) -> Result<Vec<SyntheticSample>> {
    if n == 0 {
        return Err(Error::invalid("dataset size must be at least 1"));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::invalid(format!(
            "noise sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let target = random_rotation(&mut rng);
        let features = target
            .to_flat()
            .iter()
            .map(|v| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                v + noise_sigma * noise
            })
            .collect();
        data.push(SyntheticSample { features, target });
    }
    Ok(data)
}

/// Training settings. Defaults: `m = 600`, `alpha = 0.2`, Adam at
/// `lr = 1e-4` decayed by 0.95 per epoch, batch 64.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub m: usize,
    pub alpha: f64,
    pub lr: f64,
    pub lr_decay: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub mode: NormalizationMode,
    /// When set, the target distribution uses these frozen concentrations
    /// and the raw parameter slots receive no gradient.
    pub fixed_params: Option<AsgParams>,
    /// Optional hidden layer width (tanh); affine heads by default.
    pub hidden: Option<usize>,
    /// Parallel per-sample gradient evaluation with ordered reduction.
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            m: 600,
            alpha: 0.2,
            lr: 1e-4,
            lr_decay: 0.95,
            epochs: 30,
            batch: 64,
            seed: 0,
            mode: NormalizationMode::default(),
            fixed_params: None,
            hidden: None,
            parallel: false,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.epochs == 0 || self.batch == 0 {
            return Err(Error::invalid("m, epochs and batch must all be at least 1"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::invalid(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if !(self.lr_decay.is_finite() && self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::invalid(format!(
                "lr decay must be in (0, 1], got {}",
                self.lr_decay
            )));
        }
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            return Err(Error::invalid(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        if let Some(h) = self.hidden {
            if h == 0 {
                return Err(Error::invalid("hidden width must be at least 1"));
            }
        }
        Ok(())
    }
}

/// One head: a flat parameter vector with a fixed layout. Affine heads
/// store `[w (out x in) | b (out)]`; one-hidden-layer heads store
/// `[w1 (h x in) | b1 (h) | w2 (out x h) | b2 (out)]` with tanh activation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HeadNet {
    pub in_dim: usize,
    pub out_dim: usize,
    pub hidden: Option<usize>,
    pub params: Vec<f64>,
}

impl HeadNet {
    fn init(in_dim: usize, out_dim: usize, hidden: Option<usize>, rng: &mut ChaCha8Rng) -> Self {
        let len = match hidden {
            None => out_dim * in_dim + out_dim,
            Some(h) => h * in_dim + h + out_dim * h + out_dim,
        };
        let mut params = vec![0.0; len];
        match hidden {
            None => {
                for p in params[..out_dim * in_dim].iter_mut() {
                    let n: f64 = StandardNormal.sample(rng);
                    *p = 0.01 * n;
                }
            }
            Some(h) => {
                let w1_scale = 1.0 / (in_dim as f64).sqrt();
                for p in params[..h * in_dim].iter_mut() {
                    let n: f64 = StandardNormal.sample(rng);
                    *p = w1_scale * n;
                }
                let w2_start = h * in_dim + h;
                for p in params[w2_start..w2_start + out_dim * h].iter_mut() {
                    let n: f64 = StandardNormal.sample(rng);
                    *p = 0.01 * n;
                }
            }
        }
        Self {
            in_dim,
            out_dim,
            hidden,
            params,
        }
    }

    /// Returns the raw output and, with a hidden layer, its activations.
    fn forward(&self, x: &[f64]) -> (Vec<f64>, Option<Vec<f64>>) {
        match self.hidden {
            None => {
                let w = &self.params[..self.out_dim * self.in_dim];
                let b = &self.params[self.out_dim * self.in_dim..];
                let out = (0..self.out_dim)
                    .map(|k| {
                        b[k] + w[k * self.in_dim..(k + 1) * self.in_dim]
                            .iter()
                            .zip(x)
                            .map(|(wi, xi)| wi * xi)
                            .sum::<f64>()
                    })
                    .collect();
                (out, None)
            }
            Some(h) => {
                let (w1, rest) = self.params.split_at(h * self.in_dim);
                let (b1, rest) = rest.split_at(h);
                let (w2, b2) = rest.split_at(self.out_dim * h);
                let act: Vec<f64> = (0..h)
                    .map(|i| {
                        (b1[i]
                            + w1[i * self.in_dim..(i + 1) * self.in_dim]
                                .iter()
                                .zip(x)
                                .map(|(wi, xi)| wi * xi)
                                .sum::<f64>())
                        .tanh()
                    })
                    .collect();
                let out = (0..self.out_dim)
                    .map(|k| {
                        b2[k]
                            + w2[k * h..(k + 1) * h]
                                .iter()
                                .zip(&act)
                                .map(|(wi, ai)| wi * ai)
                                .sum::<f64>()
                    })
                    .collect();
                (out, Some(act))
            }
        }
    }

    /// Accumulates parameter gradients from the output gradient.
    fn backward(&self, x: &[f64], act: Option<&[f64]>, g_out: &[f64], grad: &mut [f64]) {
        match self.hidden {
            None => {
                let b_off = self.out_dim * self.in_dim;
                for (k, g) in g_out.iter().enumerate() {
                    for (j, xi) in x.iter().enumerate() {
                        grad[k * self.in_dim + j] += g * xi;
                    }
                    grad[b_off + k] += g;
                }
            }
            Some(h) => {
                let act = act.expect("hidden activations recorded in forward");
                let w1_len = h * self.in_dim;
                let b1_off = w1_len;
                let w2_off = w1_len + h;
                let b2_off = w2_off + self.out_dim * h;
                let w2 = &self.params[w2_off..b2_off];
                let mut g_act = vec![0.0; h];
                for (k, g) in g_out.iter().enumerate() {
                    for (i, ai) in act.iter().enumerate() {
                        grad[w2_off + k * h + i] += g * ai;
                        g_act[i] += w2[k * h + i] * g;
                    }
                    grad[b2_off + k] += g;
                }
                for (i, ga) in g_act.iter().enumerate() {
                    let g_pre = ga * (1.0 - act[i] * act[i]);
                    for (j, xi) in x.iter().enumerate() {
                        grad[i * self.in_dim + j] += g_pre * xi;
                    }
                    grad[b1_off + i] += g_pre;
                }
            }
        }
    }
}

/// Three heads sharing the input features, one per pose vector.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToyModel {
    pub feat_dim: usize,
    pub m: usize,
    pub heads: Vec<HeadNet>,
}

impl ToyModel {
    pub fn init(feat_dim: usize, m: usize, hidden: Option<usize>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
        let heads = (0..3)
            .map(|_| HeadNet::init(feat_dim, m + 2, hidden, &mut rng))
            .collect();
        Self { feat_dim, m, heads }
    }

    /// Raw head outputs for one feature vector.
    pub fn head_outputs(&self, features: &[f64]) -> Result<Vec<HeadOutput>> {
        if features.len() != self.feat_dim {
            return Err(Error::Incompatible(format!(
                "{} features for a model expecting {}",
                features.len(),
                self.feat_dim
            )));
        }
        self.heads
            .iter()
            .map(|head| HeadOutput::from_flat(&head.forward(features).0))
            .collect()
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        const BETA1: f64 = 0.9;
        const BETA2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t as i32);
        let bc2 = 1.0 - BETA2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
}

/// Loss and evaluation metrics after each epoch; epoch 0 is the untouched
/// initial model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub maev_deg: f64,
    pub mae_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub model: ToyModel,
    pub history: Vec<EpochStats>,
    pub config: TrainConfig,
}

/// Mean MAEV / MAE over a dataset, decoding through the full expectation
/// plus projection pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalStats {
    pub maev_deg: f64,
    pub mae_deg: f64,
}

/// Softmax each head's logits and decode the three distributions to a pose.
pub fn decode_head_outputs(outs: &[HeadOutput], lat: &SphereLattice) -> Result<RotationMatrix> {
    if outs.len() != 3 {
        return Err(Error::Incompatible(format!(
            "expected 3 head outputs, got {}",
            outs.len()
        )));
    }
    let dists: Vec<PoseDistribution> = outs
        .iter()
        .enumerate()
        .map(|(i, h)| PoseDistribution::from_normalized(softmax(&h.logits), h.m(), i))
        .collect();
    decode_pose(&dists[0], &dists[1], &dists[2], lat)
}

pub fn evaluate(
    model: &ToyModel,
    lat: &SphereLattice,
    data: &[SyntheticSample],
) -> Result<EvalStats> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty dataset"));
    }
    let mut maev_sum = 0.0;
    let mut mae_sum = 0.0;
    for sample in data {
        let outs = model.head_outputs(&sample.features)?;
        let pred = decode_head_outputs(&outs, lat)?;
        maev_sum += maev(&pred, &sample.target).mean;
        mae_sum += mae_euler(
            &matrix_to_euler(&pred).angles,
            &matrix_to_euler(&sample.target).angles,
        )
        .mean;
    }
    let n = data.len() as f64;
    Ok(EvalStats {
        maev_deg: maev_sum / n,
        mae_deg: mae_sum / n,
    })
}

/// Per-head output gradient paired with the hidden activations backprop needs.
type HeadPass = (Vec<f64>, Option<Vec<f64>>);

/// Per-sample forward pass: summed three-head loss plus, when training, the
/// output gradients and hidden activations needed for backprop.
fn sample_pass(
    model: &ToyModel,
    lat: &SphereLattice,
    cfg: &TrainConfig,
    sample: &SyntheticSample,
    with_grad: bool,
) -> Result<(f64, Vec<HeadPass>)> {
    let mut total = 0.0;
    let mut per_head = Vec::with_capacity(if with_grad { 3 } else { 0 });
    for (head_idx, head) in model.heads.iter().enumerate() {
        let (flat, act) = head.forward(&sample.features);
        let h = HeadOutput::from_flat(&flat)?;
        if with_grad {
            let (loss, grad) = match cfg.fixed_params {
                None => {
                    head_loss_with_grad(&h, &sample.target, head_idx, lat, cfg.alpha, cfg.mode)?
                }
                Some(params) => head_loss_with_grad_fixed(
                    &h,
                    &sample.target,
                    head_idx,
                    lat,
                    cfg.alpha,
                    cfg.mode,
                    params,
                )?,
            };
            total += loss.total;
            per_head.push((grad, act));
        } else {
            let loss = match cfg.fixed_params {
                None => head_loss(&h, &sample.target, head_idx, lat, cfg.alpha, cfg.mode)?,
                Some(params) => head_loss_fixed(
                    &h,
                    &sample.target,
                    head_idx,
                    lat,
                    cfg.alpha,
                    cfg.mode,
                    params,
                )?,
            };
            total += loss.total;
        }
    }
    Ok((total, per_head))
}

fn mean_loss(
    model: &ToyModel,
    lat: &SphereLattice,
    cfg: &TrainConfig,
    data: &[SyntheticSample],
) -> Result<f64> {
    let mut sum = 0.0;
    for sample in data {
        sum += sample_pass(model, lat, cfg, sample, false)?.0;
    }
    Ok(sum / data.len() as f64)
}

/// Adam training of the summed three-head loss. History row 0 records the
/// initial model; rows 1..=epochs record the mean training loss of the epoch
/// and post-epoch evaluation metrics.
pub fn train(cfg: &TrainConfig, data: &[SyntheticSample]) -> Result<TrainResult> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    let feat_dim = data[0].features.len();
    if data.iter().any(|s| s.features.len() != feat_dim) {
        return Err(Error::Incompatible(
            "samples disagree on feature dimension".into(),
        ));
    }
    let lat = SphereLattice::fibonacci(cfg.m)?;
    let mut model = ToyModel::init(feat_dim, cfg.m, cfg.hidden, cfg.seed);
    let mut adam: Vec<AdamState> = model
        .heads
        .iter()
        .map(|h| AdamState::new(h.params.len()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x00c0ffee);

    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let eval0 = evaluate(&model, &lat, data)?;
    history.push(EpochStats {
        epoch: 0,
        loss: mean_loss(&model, &lat, cfg, data)?,
        maev_deg: eval0.maev_deg,
        mae_deg: eval0.mae_deg,
    });

    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut grads: Vec<Vec<f64>> = model
        .heads
        .iter()
        .map(|h| vec![0.0; h.params.len()])
        .collect();

    for epoch in 1..=cfg.epochs {
        let lr = cfg.lr * cfg.lr_decay.powi(epoch as i32 - 1);
        indices.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in indices.chunks(cfg.batch) {
            for g in grads.iter_mut() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            let passes: Vec<(f64, Vec<HeadPass>)> = if cfg.parallel {
                batch
                    .par_iter()
                    .map(|&idx| sample_pass(&model, &lat, cfg, &data[idx], true))
                    .collect::<Result<Vec<_>>>()?
            } else {
                batch
                    .iter()
                    .map(|&idx| sample_pass(&model, &lat, cfg, &data[idx], true))
                    .collect::<Result<Vec<_>>>()?
            };
            // Reduction stays in batch order regardless of execution mode.
            let scale = 1.0 / batch.len() as f64;
            for (&idx, (sample_loss, per_head)) in batch.iter().zip(&passes) {
                if !sample_loss.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "loss diverged at epoch {epoch} on sample {idx}"
                    )));
                }
                loss_sum += sample_loss;
                for (head_idx, (g_out, act)) in per_head.iter().enumerate() {
                    model.heads[head_idx].backward(
                        &data[idx].features,
                        act.as_deref(),
                        g_out,
                        &mut grads[head_idx],
                    );
                }
            }
            for ((head, grad), state) in model.heads.iter_mut().zip(&mut grads).zip(&mut adam) {
                grad.iter_mut().for_each(|g| *g *= scale);
                state.step(&mut head.params, grad, lr);
            }
        }
        let eval = evaluate(&model, &lat, data)?;
        history.push(EpochStats {
            epoch,
            loss: loss_sum / data.len() as f64,
            maev_deg: eval.maev_deg,
            mae_deg: eval.mae_deg,
        });
    }
    Ok(TrainResult {
        model,
        history,
        config: cfg.clone(),
    })
}

/// Per-sample learned concentrations with the target's yaw bucket
/// (thirds of the `[-90, 90]` yaw range).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRow {
    pub sample: usize,
    pub head: usize,
    pub lambda: f64,
    pub eta: f64,
    pub yaw_deg: f64,
    pub yaw_bucket: u8,
}

pub fn dump_learned_params(
    model: &ToyModel,
    data: &[SyntheticSample],
    fixed: Option<AsgParams>,
) -> Result<Vec<ParamRow>> {
    let mut rows = Vec::with_capacity(3 * data.len());
    for (sample_idx, sample) in data.iter().enumerate() {
        let yaw = matrix_to_euler(&sample.target).angles.yaw;
        let bucket = if yaw < -30.0 {
            0
        } else if yaw < 30.0 {
            1
        } else {
            2
        };
        let outs = model.head_outputs(&sample.features)?;
        for (head_idx, out) in outs.iter().enumerate() {
            let params = match fixed {
                Some(p) => p,
                None => softplus_params(out.raw_lambda, out.raw_eta),
            };
            rows.push(ParamRow {
                sample: sample_idx,
                head: head_idx,
                lambda: params.lambda(),
                eta: params.eta(),
                yaw_deg: yaw,
                yaw_bucket: bucket,
            });
        }
    }
    Ok(rows)
}

pub fn write_history_csv(path: &Path, history: &[EpochStats]) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epoch,loss,maev_deg,mae_deg")?;
    for row in history {
        writeln!(
            out,
            "{},{},{},{}",
            row.epoch, row.loss, row.maev_deg, row.mae_deg
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_params_csv(path: &Path, rows: &[ParamRow]) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "sample,head,lambda,eta,yaw_deg,yaw_bucket")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.sample, r.head, r.lambda, r.eta, r.yaw_deg, r.yaw_bucket
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_model_json(path: &Path, model: &ToyModel) -> Result<()> {
    let text = serde_json::to_string_pretty(model)
        .map_err(|e| Error::Validation(format!("serialization: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_model_json(path: &Path) -> Result<ToyModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })
}

/// Adaptive concentrations versus a frozen pair on identical data and seed.
pub fn run_ablation(
    cfg: &TrainConfig,
    data: &[SyntheticSample],
    fixed: AsgParams,
) -> Result<(TrainResult, TrainResult)> {
    let adaptive = train(
        &TrainConfig {
            fixed_params: None,
            ..cfg.clone()
        },
        data,
    )?;
    let frozen = train(
        &TrainConfig {
            fixed_params: Some(fixed),
            ..cfg.clone()
        },
        data,
    )?;
    Ok((adaptive, frozen))
}

/// Side-by-side final metrics of the two ablation arms.
pub fn write_ablation_csv(path: &Path, adaptive: &TrainResult, frozen: &TrainResult) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "variant,lambda,eta,epoch0_maev_deg,final_maev_deg,final_mae_deg,final_loss"
    )?;
    for result in [adaptive, frozen] {
        let first = result.history.first().expect("history never empty");
        let last = result.history.last().expect("history never empty");
        let (variant, lambda, eta) = match result.config.fixed_params {
            None => ("adaptive".to_string(), String::new(), String::new()),
            Some(p) => (
                "fixed".to_string(),
                p.lambda().to_string(),
                p.eta().to_string(),
            ),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            variant, lambda, eta, first.maev_deg, last.maev_deg, last.mae_deg, last.loss
        )?;
    }
    out.flush()?;
    Ok(())
}
