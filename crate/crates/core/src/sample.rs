//! Seeded random inputs: step functions with dyadic values and SPD matrix
//! weights. Everything is driven by a caller-supplied ChaCha generator so runs
//! are reproducible from one integer seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::grid::{Mesh, MeshFunction};
use crate::matrix::MatrixWeight;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random step functions whose values are multiples of `1/8`, so that sums of
/// up to `2^49` cells are computed without rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSampler {
    /// Up to this many constant pieces inside the support.
    pub max_pieces: usize,
    /// Values are `k/8` with `|k| <= max_numerator`.
    pub max_numerator: i64,
    pub nonnegative: bool,
    /// Fraction of the mesh (centered) the support is drawn inside.
    pub support_fraction: f64,
}

impl Default for StepSampler {
    fn default() -> Self {
        Self { max_pieces: 8, max_numerator: 16, nonnegative: false, support_fraction: 0.5 }
    }
}

impl StepSampler {
    pub fn nonnegative(self) -> Self {
        Self { nonnegative: true, ..self }
    }

    pub fn with_support_fraction(self, support_fraction: f64) -> Self {
        Self { support_fraction, ..self }
    }

    /// A nonzero step function on `mesh`.
    pub fn sample<R: Rng>(&self, rng: &mut R, mesh: Mesh) -> Result<MeshFunction> {
        let n = mesh.n_cells();
        if !(self.support_fraction > 0.0 && self.support_fraction <= 1.0) || self.max_pieces == 0 || self.max_numerator < 1 {
            return Err(invalid("step sampler needs pieces, numerators and a support fraction in (0, 1]"));
        }
        let window = ((n as f64 * self.support_fraction) as usize).clamp(1, n);
        let start = (n - window) / 2;
        loop {
            let mut values = vec![0.0; n];
            let pieces = rng.random_range(1..=self.max_pieces);
            for _ in 0..pieces {
                let a = start + rng.random_range(0..window);
                let len = rng.random_range(1..=(window / 4).max(1));
                let b = (a + len).min(start + window);
                let lo = if self.nonnegative { 0 } else { -self.max_numerator };
                let k = rng.random_range(lo..=self.max_numerator);
                for v in &mut values[a..b] {
                    *v = k as f64 / 8.0;
                }
            }
            if values.iter().any(|v| *v != 0.0) {
                return MeshFunction::new(mesh, values);
            }
        }
    }
}

/// `W(x) = R(θ(x)) diag(e^{a(x)}, e^{b(x)}) R(θ(x))ᵀ` with `θ`, `a`, `b`
/// constant on random runs of cells; `a`, `b` are drawn from
/// `[-log_amplitude, log_amplitude]`.
pub fn random_matrix_weight<R: Rng>(rng: &mut R, mesh: Mesh, log_amplitude: f64, pieces: usize) -> Result<MatrixWeight> {
    let n = mesh.n_cells();
    let pieces = pieces.clamp(1, n);
    let mut cuts: Vec<usize> = (0..pieces - 1).map(|_| rng.random_range(1..n)).collect();
    cuts.push(0);
    cuts.push(n);
    cuts.sort_unstable();
    cuts.dedup();
    let (mut theta, mut l1, mut l2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for win in cuts.windows(2) {
        let t = rng.random_range(0.0..std::f64::consts::PI);
        let a = rng.random_range(-log_amplitude..=log_amplitude).exp();
        let b = rng.random_range(-log_amplitude..=log_amplitude).exp();
        for i in win[0]..win[1] {
            theta[i] = t;
            l1[i] = a;
            l2[i] = b;
        }
    }
    MatrixWeight::rotated(mesh, &theta, &l1, &l2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_samples_repeat() {
        let mesh = Mesh::new(1.0, 5).unwrap();
        let s = StepSampler::default();
        let a = s.sample(&mut seeded_rng(3), mesh).unwrap();
        let b = s.sample(&mut seeded_rng(3), mesh).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().all(|v| (v * 8.0).fract() == 0.0));
        let w1 = random_matrix_weight(&mut seeded_rng(9), mesh, 1.0, 4).unwrap();
        let w2 = random_matrix_weight(&mut seeded_rng(9), mesh, 1.0, 4).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn nonnegative_support_window() {
        let mesh = Mesh::new(1.0, 6).unwrap();
        let s = StepSampler::default().nonnegative().with_support_fraction(0.25);
        let mut rng = seeded_rng(1);
        for _ in 0..50 {
            let f = s.sample(&mut rng, mesh).unwrap();
            assert!(f.values.iter().all(|v| *v >= 0.0));
            assert!(f.values[..48].iter().all(|v| *v == 0.0) && f.values[80..].iter().all(|v| *v == 0.0));
        }
    }
}
