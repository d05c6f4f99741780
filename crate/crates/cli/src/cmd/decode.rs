//! Decode three head distributions back to a rotation matrix.

use crate::cmd::Outcome;
use crate::config::Resolver;
use asgpose_core::asg::{decode_pose, PoseDistribution};
use asgpose_core::io::{read_distribution_csv, verify_lattice_points, write_matrix_json};
use asgpose_core::lattice::SphereLattice;
use asgpose_core::{Error, Result};
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Three distribution CSVs (heads 0, 1, 2), comma-separated
    #[arg(long)]
    dists: Option<String>,
    /// Output rotation JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let dists = resolver.get_required::<String>("dists", args.dists)?;
    let out = resolver.get_path("out", args.out)?;

    let paths: Vec<PathBuf> = dists
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect();
    if paths.len() != 3 {
        return Err(Error::invalid(format!(
            "--dists needs exactly 3 files, got {}",
            paths.len()
        )));
    }

    let mut distributions = Vec::with_capacity(3);
    let mut lat: Option<SphereLattice> = None;
    for (head, path) in paths.iter().enumerate() {
        let (probs, points) = read_distribution_csv(path)?;
        let lattice = match &lat {
            Some(l) => l,
            None => {
                lat = Some(SphereLattice::fibonacci(probs.len())?);
                lat.as_ref().unwrap()
            }
        };
        verify_lattice_points(&points, lattice)?;
        distributions.push(PoseDistribution::new(probs, lattice.m(), head)?);
    }
    let lat = lat.expect("three distributions read");
    let rotation = decode_pose(
        &distributions[0],
        &distributions[1],
        &distributions[2],
        &lat,
    )?;
    write_matrix_json(&out, &rotation)?;
    println!(
        "decoded rotation over {} points ({})",
        lat.m(),
        out.display()
    );
    Ok(Outcome {
        artifacts: vec![out],
        seed: None,
    })
}
