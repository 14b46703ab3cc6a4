//! Shared inputs for the benchmarks.

use weaklab_core::sample::{seeded_rng, StepSampler};
use weaklab_core::{Mesh, MeshFunction, Result};

pub const SEED: u64 = 7;

/// Mesh on `[-4, 4)` with `2^(level + 1)` cells.
pub fn mesh(level: u32) -> Result<Mesh> {
    Mesh::new(4.0, level)
}

/// A seeded nonnegative step function.
pub fn input(level: u32) -> Result<MeshFunction> {
    StepSampler::default().nonnegative().sample(&mut seeded_rng(SEED), mesh(level)?)
}
