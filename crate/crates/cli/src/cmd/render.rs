//! Render distributions for a grid of concentration pairs.

use crate::cmd::Outcome;
use crate::config::{parse_mode, Resolver};
use asgpose_core::asg::{encode, render_distribution, AsgParams};
use asgpose_core::lattice::SphereLattice;
use asgpose_core::rotation::RotationMatrix;
use asgpose_core::{Error, Result};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Lattice size
    #[arg(long)]
    m: Option<usize>,
    /// Pose vector index (0 left, 1 down, 2 front)
    #[arg(long)]
    head: Option<usize>,
    /// Concentration pairs, e.g. "1,1;5,5;1,5;5,1"
    #[arg(long)]
    pairs: Option<String>,
    /// Normalization: softmax | linear
    #[arg(long)]
    mode: Option<String>,
    /// Softmax scale
    #[arg(long)]
    scale: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pairs(raw: &str) -> Result<Vec<AsgParams>> {
    raw.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::invalid(format!("pair '{pair}' must be lambda,eta")));
            }
            let lambda: f64 = parts[0]
                .parse()
                .map_err(|e| Error::invalid(format!("lambda '{}': {e}", parts[0])))?;
            let eta: f64 = parts[1]
                .parse()
                .map_err(|e| Error::invalid(format!("eta '{}': {e}", parts[1])))?;
            AsgParams::new(lambda, eta)
        })
        .collect()
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let m = resolver.get("m", args.m, 600usize)?;
    let head = resolver.get("head", args.head, 2usize)?;
    let pairs_raw = resolver.get("pairs", args.pairs, "1,1;5,5;1,5;5,1".to_string())?;
    let mode_name = resolver.get("mode", args.mode, "linear".to_string())?;
    let scale = resolver.get("scale", args.scale, 1.0)?;
    let out = resolver.get_path("out", args.out)?;

    let pairs = parse_pairs(&pairs_raw)?;
    if pairs.is_empty() {
        return Err(Error::invalid("no concentration pairs given"));
    }
    let mode = parse_mode(&mode_name, scale)?;
    let lat = SphereLattice::fibonacci(m)?;
    let rotation = RotationMatrix::identity();
    std::fs::create_dir_all(&out)?;

    let mut artifacts = Vec::new();
    for params in &pairs {
        let dist = encode(&rotation, head, params, &lat, mode)?;
        let stem = format!("asg_l{}_e{}", params.lambda(), params.eta());
        let csv = out.join(format!("{stem}.csv"));
        let svg = out.join(format!("{stem}.svg"));
        render_distribution(&dist, &lat, &csv, &svg)?;
        artifacts.push(csv);
        artifacts.push(svg);
    }
    println!(
        "rendered {} concentration pairs at m = {m} ({})",
        pairs.len(),
        out.display()
    );
    Ok(Outcome {
        artifacts,
        seed: None,
    })
}
