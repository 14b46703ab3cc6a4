//! Calderón–Zygmund decomposition, stopping-time sparse families, sparse
//! operators, and the exceptional set of the weak-type argument.

mod cz;
mod family;

pub use cz::{block_sum, cz_decompose, CZDecomposition};
pub use family::{
    build_sparse_family, interior_roots, sparse_apply, verify_sparseness, SparseFamily, SparsenessReport, Violation,
    ViolationKind, STOPPING_RATIO,
};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{CellSet, MeshFunction};

/// `Ω = {M^D(|f|^p) > K/|E|}` and `E' = E \ Ω`, in input-mesh cell indices.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalSet {
    pub omega: CellSet,
    pub e_prime: CellSet,
    pub omega_measure: f64,
    pub e_measure: f64,
    pub e_prime_measure: f64,
}

pub fn exceptional_set(f: &MeshFunction, p: f64, e: &CellSet, k: f64, shift: u8) -> Result<ExceptionalSet> {
    if !(k > 2.0) {
        return Err(invalid(format!("exceptional-set constant must exceed 2, got {k}")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(format!("need p >= 1, got {p}")));
    }
    let norm = f.lp_norm(p);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("f must be normalized in L^p, got norm {norm}")));
    }
    let e = e.clip(f.len());
    let e_measure = e.measure(&f.mesh);
    if !(e_measure > 0.0) {
        return Err(invalid("E must have positive measure"));
    }
    let power = f.map(|v| v.abs().powf(p));
    // Ω is the union of the maximal cubes with average above K/|E|.
    let cz = cz_decompose(&power, k / e_measure, shift)?;
    let omega = cz.omega_in_input();
    let e_prime = e.difference(&omega);
    Ok(ExceptionalSet {
        omega_measure: omega.measure(&f.mesh),
        e_prime_measure: e_prime.measure(&f.mesh),
        omega,
        e_prime,
        e_measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh;

    #[test]
    fn far_support_leaves_e_intact() {
        let mesh = Mesh::new(8.0, 6).unwrap();
        let f = MeshFunction::indicator(mesh, -8.0, -6.0).unwrap().scale(0.5f64.sqrt());
        let e = CellSet::from_ranges([(100, 120)]);
        let x = exceptional_set(&f, 2.0, &e, 4.0, 0).unwrap();
        assert_eq!(x.e_prime, e);
        assert!(x.omega_measure <= x.e_measure / 4.0);
    }

    #[test]
    fn constant_must_exceed_two() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let f = MeshFunction::constant(mesh, 0.5f64.sqrt());
        let e = CellSet::from_ranges([(0, 4)]);
        assert!(exceptional_set(&f, 2.0, &e, 2.0, 0).is_err());
        assert!(exceptional_set(&f, 2.0, &e, 2.5, 0).is_ok());
    }
}
