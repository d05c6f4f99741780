//! `asgpose`: rotation conversions, sphere lattices, spherical label
//! distributions, gradient checking, toy training, and bias experiments.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, bad input files,
//! failed tolerance), 2 internal error (I/O, numeric failure).

mod cmd;
mod config;
mod manifest;

use asgpose_core::Error;
use clap::Parser;
use config::Resolver;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "asgpose",
    version,
    about = "Orientation learning with spherical label distributions"
)]
struct Cli {
    /// Config file (key=value lines or a JSON object); explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Convert rotation files between representations
    Convert(cmd::convert::Args),
    /// Build a sphere lattice and report its spacing
    Lattice(cmd::lattice::Args),
    /// Encode a pose vector as a lattice distribution
    Encode(cmd::encode::Args),
    /// Decode three distributions back to a rotation
    Decode(cmd::decode::Args),
    /// Evaluate predictions against ground truth (MAE / MAEV)
    Eval(cmd::eval::Args),
    /// Check analytic gradients against finite differences
    Gradcheck(cmd::gradcheck::Args),
    /// Train the synthetic-task model
    TrainToy(cmd::train_toy::Args),
    /// Compare bounded-range 1D bias with spherical decoding
    BiasLab(cmd::bias_lab::Args),
    /// Render distributions for a grid of concentration pairs
    Render(cmd::render::Args),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Convert(_) => "convert",
            Command::Lattice(_) => "lattice",
            Command::Encode(_) => "encode",
            Command::Decode(_) => "decode",
            Command::Eval(_) => "eval",
            Command::Gradcheck(_) => "gradcheck",
            Command::TrainToy(_) => "train-toy",
            Command::BiasLab(_) => "bias-lab",
            Command::Render(_) => "render",
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::NonFinite(_) => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> asgpose_core::Result<()> {
    let mut resolver = Resolver::load(cli.config.as_deref())?;
    let name = cli.command.name();
    let outcome = match cli.command {
        Command::Convert(args) => cmd::convert::run(args, &mut resolver)?,
        Command::Lattice(args) => cmd::lattice::run(args, &mut resolver)?,
        Command::Encode(args) => cmd::encode::run(args, &mut resolver)?,
        Command::Decode(args) => cmd::decode::run(args, &mut resolver)?,
        Command::Eval(args) => cmd::eval::run(args, &mut resolver)?,
        Command::Gradcheck(args) => cmd::gradcheck::run(args, &mut resolver)?,
        Command::TrainToy(args) => cmd::train_toy::run(args, &mut resolver)?,
        Command::BiasLab(args) => cmd::bias_lab::run(args, &mut resolver)?,
        Command::Render(args) => cmd::render::run(args, &mut resolver)?,
    };
    if let Some(path) =
        manifest::write_manifest(name, resolver.resolved(), outcome.seed, &outcome.artifacts)?
    {
        println!("manifest: {}", path.display());
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help / --version are successful outcomes; anything else is
            // a usage error.
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = execute(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
