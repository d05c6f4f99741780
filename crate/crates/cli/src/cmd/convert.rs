//! Per-record conversion between rotation file formats.

use crate::cmd::Outcome;
use crate::config::Resolver;
use asgpose_core::io::{read_pose_records, write_pose_records, RotationFormat};
use asgpose_core::Result;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Input representation: euler | matrix | quat | axis-angle
    #[arg(long)]
    from: Option<String>,
    /// Output representation: euler | matrix | quat | axis-angle
    #[arg(long)]
    to: Option<String>,
    /// Input file (CSV for euler, JSON lines otherwise)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let from: RotationFormat = resolver
        .get_required::<String>("from", args.from)?
        .parse()?;
    let to: RotationFormat = resolver.get_required::<String>("to", args.to)?.parse()?;
    let input = resolver.get_path("in", args.input)?;
    let out = resolver.get_path("out", args.out)?;

    let records = read_pose_records(&input, from)?;
    write_pose_records(&out, to, &records)?;
    println!(
        "converted {} records: {from} -> {to} ({})",
        records.len(),
        out.display()
    );
    Ok(Outcome {
        artifacts: vec![out],
        seed: None,
    })
}
