//! One module per subcommand. Each `run` resolves its flags against the
//! config file, does the work, and reports which artifacts it wrote so the
//! caller can emit the run manifest.

pub mod bias_lab;
pub mod convert;
pub mod decode;
pub mod encode;
pub mod eval;
pub mod gradcheck;
pub mod lattice;
pub mod render;
pub mod train_toy;

use std::path::PathBuf;

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub seed: Option<u64>,
}
