//! Matrix weights: norms, reducing matrices, matrix characteristics, the
//! Christ–Goldberg maximal operator and the dominating scalar sparse operator.

mod characteristic;
mod operators;
mod reducing;

pub use characteristic::{
    matrix_a1_characteristic, matrix_a1q_characteristic, matrix_ap_characteristic,
    matrix_apq_characteristic, restriction_weight, scalar_ainfty_sup, scalar_restriction_apq,
    scalar_restriction_characteristic, Restriction,
};
pub use operators::{
    christ_goldberg_fractional_maximal, christ_goldberg_maximal, directional_rh_exponent,
    dominating_scalar_sparse, reducers_for_family, reducing_estimate_chain, sharp_rhi_matrix_bound,
    ReducerMap, ReducingChain, SharpRhiBound,
};
pub use reducing::{norm_directions, reducing_matrix, ReducerKind, ReducingMatrix};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::grid::{Mesh, MeshFunction};

/// Largest singular value.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 2 && m.ncols() == 2 {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        // Largest eigenvalue of MᵀM.
        let p = a * a + c * c;
        let q = b * b + d * d;
        let r = a * b + c * d;
        let half = 0.5 * (p - q);
        let top = 0.5 * (p + q) + (half * half + r * r).sqrt();
        return top.max(0.0).sqrt();
    }
    m.singular_values().max()
}

/// `Σ_i |M e_i|`, comparable to the operator norm within a factor `d`.
pub fn alt_norm_sum(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}

/// `M^s` for symmetric positive-definite `M`, via the spectral decomposition,
/// reprojected onto symmetric matrices. Diagonal inputs are powered entrywise.
pub fn spd_pow(m: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    if is_diagonal(m) {
        return DMatrix::from_diagonal(&m.diagonal().map(|v| v.powf(s)));
    }
    let eig = SymmetricEigen::new(m.clone());
    let d = eig.eigenvalues.map(|v| v.powf(s));
    let mut out = &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose();
    symmetrize(&mut out);
    out
}

fn check_spd(m: &DMatrix<f64>, cell: usize) -> Result<()> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(invalid(format!("cell {cell}: matrix is not square")));
    }
    for i in 0..n {
        for j in 0..n {
            if !m[(i, j)].is_finite() {
                return Err(invalid(format!("cell {cell}: non-finite entry")));
            }
            if m[(i, j)] != m[(j, i)] {
                return Err(invalid(format!("cell {cell}: matrix is not symmetric")));
            }
        }
    }
    let min = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::Degenerate {
            interval: crate::Interval::new(cell as f64, cell as f64 + 1.0),
            detail: format!("cell {cell}: smallest eigenvalue {min} is not positive"),
        });
    }
    Ok(())
}

/// Symmetric positive-definite `d × d` matrix per mesh cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixWeight {
    pub mesh: Mesh,
    pub dim: usize,
    pub cells: Vec<DMatrix<f64>>,
}

impl MatrixWeight {
    pub fn new(mesh: Mesh, cells: Vec<DMatrix<f64>>) -> Result<Self> {
        if cells.len() != mesh.n_cells() {
            return Err(invalid(format!("expected {} matrices, got {}", mesh.n_cells(), cells.len())));
        }
        let dim = cells.first().map_or(0, |m| m.nrows());
        if !(1..=3).contains(&dim) {
            return Err(invalid(format!("matrix dimension must be 1, 2 or 3, got {dim}")));
        }
        for (i, m) in cells.iter().enumerate() {
            if m.nrows() != dim {
                return Err(invalid(format!("cell {i} has dimension {}", m.nrows())));
            }
            check_spd(m, i)?;
        }
        Ok(Self { mesh, dim, cells })
    }

    pub fn identity(mesh: Mesh, dim: usize) -> Result<Self> {
        Self::new(mesh, vec![DMatrix::identity(dim, dim); mesh.n_cells()])
    }

    /// `diag(w_1(x), ..., w_d(x))` from per-cell scalar values.
    pub fn diagonal(mesh: Mesh, entries: &[Vec<f64>]) -> Result<Self> {
        let cells = (0..mesh.n_cells())
            .map(|i| DMatrix::from_diagonal(&DVector::from_iterator(entries.len(), entries.iter().map(|e| e[i]))))
            .collect();
        Self::new(mesh, cells)
    }

    /// `R(θ) diag(λ_1, λ_2) R(θ)ᵀ` per cell.
    pub fn rotated(mesh: Mesh, theta: &[f64], l1: &[f64], l2: &[f64]) -> Result<Self> {
        let cells = (0..mesh.n_cells())
            .map(|i| {
                let (s, c) = theta[i].sin_cos();
                let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
                let mut m = &r * DMatrix::from_diagonal(&DVector::from_vec(vec![l1[i], l2[i]])) * r.transpose();
                symmetrize(&mut m);
                m
            })
            .collect();
        Self::new(mesh, cells)
    }

    /// `W(x)^s` per cell.
    pub fn powers(&self, s: f64) -> Vec<DMatrix<f64>> {
        if s == 1.0 {
            return self.cells.clone();
        }
        self.cells.iter().map(|m| spd_pow(m, s)).collect()
    }

    /// `W^s` as a matrix weight.
    pub fn pow(&self, s: f64) -> Result<Self> {
        Self::new(self.mesh, self.powers(s))
    }
}

/// Vector-valued step function on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeshFunction {
    pub mesh: Mesh,
    pub dim: usize,
    pub values: Vec<DVector<f64>>,
}

impl VectorMeshFunction {
    pub fn new(mesh: Mesh, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(invalid(format!("expected {} vectors, got {}", mesh.n_cells(), values.len())));
        }
        let dim = values.first().map_or(0, |v| v.len());
        if values.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite())) {
            return Err(invalid("vector values must share a dimension and be finite"));
        }
        Ok(Self { mesh, dim, values })
    }

    /// `(f, 0, ..., 0)`.
    pub fn from_scalar(f: &MeshFunction, dim: usize, axis: usize) -> Self {
        let values = f
            .values
            .iter()
            .map(|&v| {
                let mut e = DVector::zeros(dim);
                e[axis] = v;
                e
            })
            .collect();
        Self { mesh: f.mesh, dim, values }
    }

    /// Pointwise Euclidean norm.
    pub fn norms(&self) -> MeshFunction {
        MeshFunction { mesh: self.mesh, values: self.values.iter().map(|v| v.norm()).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { mesh: self.mesh, dim: self.dim, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.norms().lp_norm(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norms_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        assert_eq!(op_norm(&m), 3.0);
        assert_eq!(alt_norm_sum(&m), 4.0);
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(op_norm(&id), 1.0);
        assert_eq!(alt_norm_sum(&id), 3.0);
    }

    #[test]
    fn random_spd_sandwich_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = if rng.random_bool(0.5) { 2 } else { 3 };
            let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let mut a = &g * g.transpose() + DMatrix::identity(d, d) * 0.1;
            symmetrize(&mut a);
            let h = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
            let mut b = &h * h.transpose() + DMatrix::identity(d, d) * 0.1;
            symmetrize(&mut b);
            // Eigenvalue oracle for the operator norm of an SPD matrix.
            let oracle = SymmetricEigen::new(a.clone()).eigenvalues.max();
            let n = op_norm(&a);
            assert!((n - oracle).abs() <= 1e-12 * oracle);
            let s = alt_norm_sum(&a);
            assert!(n <= s * (1.0 + 1e-12) && s <= d as f64 * n * (1.0 + 1e-12));
            let (ab, ba) = (op_norm(&(&a * &b)), op_norm(&(&b * &a)));
            assert!((ab - ba).abs() <= 1e-12 * ab);
        }
    }

    #[test]
    fn powers_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let r = spd_pow(&spd_pow(&m, 0.5), 2.0);
        assert!((r - &m).abs().max() < 1e-14);
        let inv = spd_pow(&m, -1.0);
        assert!((&inv * &m - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn rejects_non_spd() {
        let mesh = Mesh::new(1.0, 0).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(MatrixWeight::new(mesh, vec![bad.clone(), bad]).is_err());
    }
}
