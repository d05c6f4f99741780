//! Lattice construction, spacing statistics, and the size/spacing curve.

use crate::cmd::Outcome;
use crate::config::{parse_list, Resolver};
use asgpose_core::lattice::{spacing_curve, SphereLattice};
use asgpose_core::Result;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Number of lattice points
    #[arg(long)]
    m: Option<usize>,
    /// Write the points as x,y,z CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print min/mean/max nearest-neighbor angles
    #[arg(long)]
    stats: bool,
    /// Comma-separated lattice sizes for the spacing curve
    #[arg(long)]
    curve: Option<String>,
    /// Output CSV for the spacing curve (m, mean_angle_deg)
    #[arg(long = "curve-out")]
    curve_out: Option<PathBuf>,
}

pub fn run(args: Args, resolver: &mut Resolver) -> Result<Outcome> {
    let m = resolver.get("m", args.m, 600usize)?;
    let out = resolver.get_path_opt("out", args.out);
    let stats = resolver.get_bool("stats", args.stats)?;
    let curve = resolver.get_opt::<String>("curve", args.curve)?;
    let mut artifacts = Vec::new();

    if let Some(list) = curve {
        let sizes = parse_list::<usize>(&list, "curve size")?;
        let rows = spacing_curve(&sizes)?;
        let curve_out = resolver.get_path("curve-out", args.curve_out)?;
        let mut file = std::io::BufWriter::new(std::fs::File::create(&curve_out)?);
        writeln!(file, "m,mean_angle_deg")?;
        for (size, angle) in &rows {
            writeln!(file, "{size},{angle}")?;
        }
        file.flush()?;
        println!(
            "spacing curve over {} sizes ({})",
            rows.len(),
            curve_out.display()
        );
        artifacts.push(curve_out);
    }

    let lat = SphereLattice::fibonacci(m)?;
    if let Some(path) = out {
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(file, "x,y,z")?;
        for p in lat.points() {
            writeln!(file, "{},{},{}", p[0], p[1], p[2])?;
        }
        file.flush()?;
        println!("{} lattice points ({})", lat.m(), path.display());
        artifacts.push(path);
    }
    if stats {
        let s = lat.neighbor_angle_stats()?;
        println!(
            "m={} min_deg={} mean_deg={} max_deg={}",
            lat.m(),
            s.min_deg,
            s.mean_deg,
            s.max_deg
        );
    }
    Ok(Outcome {
        artifacts,
        seed: None,
    })
}
