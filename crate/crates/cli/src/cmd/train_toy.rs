//! Synthetic-task training with optional fixed-concentration ablation.

use crate::cmd::Outcome;
use crate::config::{parse_mode, Resolver};
use asgpose_core::asg::AsgParams;
use asgpose_core::train::{
    dump_learned_params, generate_dataset, run_ablation, train, write_ablation_csv,
    write_history_csv, write_model_json, write_params_csv, TrainConfig,
};
use asgpose_core::{Error, Result};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Lattice size
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    /// Per-epoch learning-rate decay
    #[arg(long = "lr-decay")]
    lr_decay: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Feature noise sigma
    #[arg(long)]
    noise: Option<f64>,
    /// Dataset size
    #[arg(long = "n-samples")]
    n_samples: Option<usize>,
    /// Normalization: softmax | linear
    #[arg(long)]
    mode: Option<String>,
    /// Softmax scale
    #[arg(long)]
    scale: Option<f64>,
    /// Freeze the target concentration pair (requires --fixed-eta)
    #[arg(long = "fixed-lambda")]
    fixed_lambda: Option<f64>,
    #[arg(long = "fixed-eta")]
    fixed_eta: Option<f64>,
    /// Optional hidden-layer width
    #[arg(long)]
    hidden: Option<usize>,
    /// Parallel batch gradients (ordered reduction, same results)
    #[arg(long)]
    parallel: bool,
    /// Train both the adaptive and the fixed arm and emit comparison.csv
    #[arg(long)]
    ablation: bool,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let m = resolver.get("m", args.m, 600usize)?;
    let alpha = resolver.get("alpha", args.alpha, 0.2)?;
    let lr = resolver.get("lr", args.lr, 1e-4)?;
    let lr_decay = resolver.get("lr-decay", args.lr_decay, 0.95)?;
    let epochs = resolver.get("epochs", args.epochs, 30usize)?;
    let batch = resolver.get("batch", args.batch, 64usize)?;
    let seed = resolver.get("seed", args.seed, 0u64)?;
    let noise = resolver.get("noise", args.noise, 0.1)?;
    let n_samples = resolver.get("n-samples", args.n_samples, 2000usize)?;
    let mode_name = resolver.get("mode", args.mode, "softmax".to_string())?;
    let scale = resolver.get("scale", args.scale, 1.0)?;
    let fixed_lambda = resolver.get_opt("fixed-lambda", args.fixed_lambda)?;
    let fixed_eta = resolver.get_opt("fixed-eta", args.fixed_eta)?;
    let hidden = resolver.get_opt("hidden", args.hidden)?;
    let parallel = resolver.get_bool("parallel", args.parallel)?;
    let ablation = resolver.get_bool("ablation", args.ablation)?;
    let out = resolver.get_path("out", args.out)?;

    let fixed_params = match (fixed_lambda, fixed_eta) {
        (Some(l), Some(e)) => Some(AsgParams::new(l, e)?),
        (None, None) => None,
        _ => {
            return Err(Error::invalid(
                "--fixed-lambda and --fixed-eta must be given together",
            ))
        }
    };
    let cfg = TrainConfig {
        m,
        alpha,
        lr,
        lr_decay,
        epochs,
        batch,
        seed,
        mode: parse_mode(&mode_name, scale)?,
        fixed_params,
        hidden,
        parallel,
    };
    let data = generate_dataset(n_samples, noise, seed)?;
    std::fs::create_dir_all(&out)?;

    let history_path = out.join("history.csv");
    let params_path = out.join("params.csv");
    let model_path = out.join("model.json");
    let mut artifacts = vec![
        history_path.clone(),
        params_path.clone(),
        model_path.clone(),
    ];

    let result = if ablation {
        let frozen_pair = fixed_params.unwrap_or(AsgParams::new(1.0, 1.0)?);
        let (adaptive, frozen) = run_ablation(&cfg, &data, frozen_pair)?;
        let comparison = out.join("comparison.csv");
        write_ablation_csv(&comparison, &adaptive, &frozen)?;
        artifacts.push(comparison);
        let last_fixed = frozen.history.last().expect("history never empty");
        println!(
            "fixed({}, {}) final: loss {} maev {} deg",
            frozen_pair.lambda(),
            frozen_pair.eta(),
            last_fixed.loss,
            last_fixed.maev_deg
        );
        adaptive
    } else {
        train(&cfg, &data)?
    };

    write_history_csv(&history_path, &result.history)?;
    let rows = dump_learned_params(&result.model, &data, result.config.fixed_params)?;
    write_params_csv(&params_path, &rows)?;
    write_model_json(&model_path, &result.model)?;

    let first = result.history.first().expect("history never empty");
    let last = result.history.last().expect("history never empty");
    println!(
        "trained {} epochs on {} samples: loss {} -> {}, maev {} -> {} deg ({})",
        epochs,
        n_samples,
        first.loss,
        last.loss,
        first.maev_deg,
        last.maev_deg,
        out.display()
    );
    Ok(Outcome {
        artifacts,
        seed: Some(seed),
    })
}
