//! Encode one pose vector of a rotation as a lattice distribution.

use crate::cmd::Outcome;
use crate::config::{parse_mode, Resolver};
use asgpose_core::asg::{encode, AsgParams};
use asgpose_core::io::{read_matrix_json, write_distribution_csv};
use asgpose_core::lattice::SphereLattice;
use asgpose_core::Result;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Rotation as {"matrix": [9 floats]} JSON
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Pose vector index (0 left, 1 down, 2 front)
    #[arg(long)]
    head: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Lattice size
    #[arg(long)]
    m: Option<usize>,
    /// Normalization: softmax | linear
    #[arg(long)]
    mode: Option<String>,
    /// Softmax scale
    #[arg(long)]
    scale: Option<f64>,
    /// Output CSV (k,x,y,z,p)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let matrix_path = resolver.get_path("matrix", args.matrix)?;
    let head = resolver.get("head", args.head, 2usize)?;
    let lambda = resolver.get("lambda", args.lambda, 5.0)?;
    let eta = resolver.get("eta", args.eta, 5.0)?;
    let m = resolver.get("m", args.m, 600usize)?;
    let mode_name = resolver.get("mode", args.mode, "softmax".to_string())?;
    let scale = resolver.get("scale", args.scale, 1.0)?;
    let out = resolver.get_path("out", args.out)?;

    let mode = parse_mode(&mode_name, scale)?;
    let rotation = read_matrix_json(&matrix_path)?;
    let lat = SphereLattice::fibonacci(m)?;
    let params = AsgParams::new(lambda, eta)?;
    let dist = encode(&rotation, head, &params, &lat, mode)?;
    write_distribution_csv(&out, dist.probs(), &lat)?;
    println!(
        "encoded head {head} over {m} points, mode {mode_name} ({})",
        out.display()
    );
    Ok(Outcome {
        artifacts: vec![out],
        seed: None,
    })
}
