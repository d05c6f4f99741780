//! Shared fixtures for the benchmark targets.

use asgpose_core::rotation::{random_rotation, RotationMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic rotations for benchmark inputs.
pub fn fixed_rotations(n: usize) -> Vec<RotationMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe5c);
    (0..n).map(|_| random_rotation(&mut rng)).collect()
}

/// A perturbed (non-orthonormal) matrix for projection benchmarks.
pub fn perturbed_matrix() -> [[f64; 3]; 3] {
    let r = fixed_rotations(1)[0];
    let mut a = r.rows();
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += 0.05 * ((i * 3 + j) as f64 * 0.731).sin();
        }
    }
    a
}
