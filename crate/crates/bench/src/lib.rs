//! Benchmark fixtures.

use copocone::{random_unit_symmetric, Seed, SymMatrix};

/// A fixed batch of unit-sphere samples of order `n`.
pub fn unit_batch(n: usize, count: usize) -> Vec<SymMatrix> {
    (0..count as u64).map(|i| random_unit_symmetric(n, Seed(0xBE4C).child(i))).collect()
}
