use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::weights::{ainfty_characteristic, ap_characteristic, apq_characteristic, CharacteristicReport};
use crate::weights::{Candidate, ScalarWeight, SearchSpace};

use super::reducing::norm_directions;
use super::{op_norm, MatrixWeight};

/// Scalar weight extracted from a matrix weight along a direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Restriction {
    /// `w_v = |W^{1/p} v|^p`.
    Ap { p: f64 },
    /// `w_v = |W v|^q`.
    Fractional { q: f64 },
}

#[derive(Debug, Clone, Copy)]
enum Outer {
    /// `⨍_x (⨍_y t)^r`.
    Mean(f64),
    /// `max_x ⨍_y t`.
    Max,
}

/// Row-major table `t(x, y)` over all cell pairs.
fn pair_table(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
    (0..n).into_par_iter().flat_map_iter(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| f(x, y)).collect()
}

fn cube_value(table: &[f64], n: usize, lo: usize, hi: usize, outer: Outer) -> f64 {
    let m = (hi - lo) as f64;
    let inner = (lo..hi).map(|x| table[x * n + lo..x * n + hi].iter().sum::<f64>() / m);
    match outer {
        Outer::Mean(r) => inner.map(|v| v.powf(r)).sum::<f64>() / m,
        Outer::Max => inner.fold(0.0, f64::max),
    }
}

fn search_table(w: &MatrixWeight, search: &SearchSpace, table: &[f64], outer: Outer) -> Result<CharacteristicReport> {
    if search.mesh != w.mesh {
        return Err(invalid("matrix weight and search mesh differ"));
    }
    let n = w.mesh.n_cells();
    let cands: Vec<Candidate> = search.snapped_cubes()?;
    if cands.is_empty() {
        return Err(Error::SearchFailed("empty search space".into()));
    }
    let values: Vec<f64> = cands
        .par_iter()
        .map(|c| {
            let cc = c.cells.expect("snapped cube");
            cube_value(table, n, cc.first as usize, cc.end() as usize, outer)
        })
        .collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v.is_nan() {
            return Err(Error::Degenerate { interval: cands[i].interval, detail: "matrix characteristic is NaN".into() });
        }
        if *v > values[best] {
            best = i;
        }
    }
    Ok(CharacteristicReport {
        value: values[best],
        witness: cands[best].interval,
        witness_cube: cands[best].cube,
        search_levels: search.levels(),
        grids_used: search.grids_used(),
        cubes_scanned: cands.len(),
    })
}

fn check_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("need 1 < p < ∞, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// `sup_Q ⨍_Q (⨍_Q ‖W^{1/p}(x) W^{-1/p}(y)‖^{p'} dy)^{p/p'} dx` over the
/// snapped cubes of `search`.
pub fn matrix_ap_characteristic(w: &MatrixWeight, p: f64, search: &SearchSpace) -> Result<CharacteristicReport> {
    let pc = check_p(p)?;
    let a = w.powers(1.0 / p);
    let b = w.powers(-1.0 / p);
    let table = pair_table(w.mesh.n_cells(), |x, y| op_norm(&(&a[x] * &b[y])).powf(pc));
    search_table(w, search, &table, Outer::Mean(p / pc))
}

/// `sup_Q esssup_{x ∈ Q} ⨍_Q ‖W(y) W^{-1}(x)‖ dy`.
pub fn matrix_a1_characteristic(w: &MatrixWeight, search: &SearchSpace) -> Result<CharacteristicReport> {
    let inv = w.powers(-1.0);
    let table = pair_table(w.mesh.n_cells(), |x, y| op_norm(&(&w.cells[y] * &inv[x])));
    search_table(w, search, &table, Outer::Max)
}

/// `sup_Q ⨍_Q (⨍_Q ‖W(x) W^{-1}(y)‖^{p'} dy)^{q/p'} dx`; `p = 1` uses the
/// `𝒜_{1,q}` form.
pub fn matrix_apq_characteristic(w: &MatrixWeight, p: f64, q: f64, search: &SearchSpace) -> Result<CharacteristicReport> {
    if p == 1.0 {
        return matrix_a1q_characteristic(w, q, search);
    }
    let pc = check_p(p)?;
    if !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("need p <= q < ∞, got p={p}, q={q}")));
    }
    let inv = w.powers(-1.0);
    let table = pair_table(w.mesh.n_cells(), |x, y| op_norm(&(&w.cells[x] * &inv[y])).powf(pc));
    search_table(w, search, &table, Outer::Mean(q / pc))
}

/// `sup_Q esssup_{x ∈ Q} ⨍_Q ‖W(y) W^{-1}(x)‖^q dy`.
pub fn matrix_a1q_characteristic(w: &MatrixWeight, q: f64, search: &SearchSpace) -> Result<CharacteristicReport> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("need 1 <= q < ∞, got {q}")));
    }
    let inv = w.powers(-1.0);
    let table = pair_table(w.mesh.n_cells(), |x, y| op_norm(&(&w.cells[y] * &inv[x])).powf(q));
    search_table(w, search, &table, Outer::Max)
}

/// The scalar weight `w_v` of `restriction` on the mesh cells.
pub fn restriction_weight(w: &MatrixWeight, restriction: Restriction, v: &DVector<f64>) -> Result<ScalarWeight> {
    if v.len() != w.dim {
        return Err(invalid(format!("direction has dimension {}, weight has {}", v.len(), w.dim)));
    }
    let (mats, s): (Vec<DMatrix<f64>>, f64) = match restriction {
        Restriction::Ap { p } => (w.powers(1.0 / p), p),
        Restriction::Fractional { q } => (w.cells.clone(), q),
    };
    ScalarWeight::sampled(w.mesh, mats.iter().map(|m| (m * v).norm().powf(s)).collect())
}

/// `[w_v]_{A_p}` for `w_v = |W^{1/p} v|^p`.
pub fn scalar_restriction_characteristic(
    w: &MatrixWeight,
    p: f64,
    v: &DVector<f64>,
    search: &SearchSpace,
) -> Result<CharacteristicReport> {
    if (v.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("direction must be a unit vector"));
    }
    let wv = restriction_weight(w, Restriction::Ap { p }, v)?;
    ap_characteristic(&wv, p, search)
}

/// `[w_v]_{A_{p,q}}` for `w_v = |W v|`, i.e. the scalar fractional
/// characteristic of the restriction.
pub fn scalar_restriction_apq(
    w: &MatrixWeight,
    p: f64,
    q: f64,
    v: &DVector<f64>,
    search: &SearchSpace,
) -> Result<CharacteristicReport> {
    let wv = restriction_weight(w, Restriction::Fractional { q: 1.0 }, v)?;
    apq_characteristic(&wv, p, q, search)
}

/// `sup_v [w_v]_{A_∞}` over `n_dirs` sampled directions. A lower bound on the
/// supremum over all directions. Returns the maximizing direction as well.
pub fn scalar_ainfty_sup(
    w: &MatrixWeight,
    restriction: Restriction,
    n_dirs: usize,
    search: &SearchSpace,
) -> Result<(CharacteristicReport, DVector<f64>)> {
    let mut best: Option<(CharacteristicReport, DVector<f64>)> = None;
    for v in norm_directions(w.dim, n_dirs) {
        let r = ainfty_characteristic(&restriction_weight(w, restriction, &v)?, search)?;
        if best.as_ref().map_or(true, |(b, _)| r.value > b.value) {
            best = Some((r, v));
        }
    }
    best.ok_or_else(|| Error::SearchFailed("no directions".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh;
    use crate::weights::a1_characteristic;

    fn mesh() -> Mesh {
        Mesh::new(1.0, 5).unwrap()
    }

    fn diagonal_pair(mesh: Mesh) -> (Vec<f64>, Vec<f64>) {
        let c = mesh.centers();
        let w1 = c.iter().map(|x| x.abs().powf(0.5)).collect();
        let w2 = c.iter().map(|x| 1.0 + (3.0 * x).sin().powi(2) * 4.0).collect();
        (w1, w2)
    }

    #[test]
    fn identity_characteristics_are_one() {
        let m = mesh();
        let w = MatrixWeight::identity(m, 2).unwrap();
        let s = SearchSpace::new(m);
        assert_eq!(matrix_ap_characteristic(&w, 3.0, &s).unwrap().value, 1.0);
        assert_eq!(matrix_a1_characteristic(&w, &s).unwrap().value, 1.0);
        assert_eq!(matrix_apq_characteristic(&w, 2.0, 4.0, &s).unwrap().value, 1.0);
        assert_eq!(matrix_apq_characteristic(&w, 1.0, 2.0, &s).unwrap().value, 1.0);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(scalar_restriction_characteristic(&w, 2.0, &e1, &s).unwrap().value, 1.0);
    }

    #[test]
    fn scalar_multiple_of_identity_matches_scalar() {
        let m = mesh();
        let (w1, _) = diagonal_pair(m);
        let w = MatrixWeight::diagonal(m, &[w1.clone(), w1.clone()]).unwrap();
        let sw = ScalarWeight::sampled(m, w1).unwrap();
        let s = SearchSpace::new(m);
        for p in [1.5, 2.0, 3.0] {
            let a = matrix_ap_characteristic(&w, p, &s).unwrap().value;
            let b = ap_characteristic(&sw, p, &s).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * b, "p={p}: {a} vs {b}");
        }
        let a = matrix_a1_characteristic(&w, &s).unwrap().value;
        let b = a1_characteristic(&sw, &s).unwrap().value;
        assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn diagonal_is_bracketed_by_scalar_entries() {
        // max_i [w_i] <= [diag(w_i)] <= d^{max(1, p/p')} max_i [w_i].
        let m = mesh();
        let (w1, w2) = diagonal_pair(m);
        let w = MatrixWeight::diagonal(m, &[w1.clone(), w2.clone()]).unwrap();
        let s = SearchSpace::new(m);
        for p in [1.5, 2.0, 4.0] {
            let mx = [&w1, &w2]
                .iter()
                .map(|wi| ap_characteristic(&ScalarWeight::sampled(m, (*wi).clone()).unwrap(), p, &s).unwrap().value)
                .fold(0.0, f64::max);
            let v = matrix_ap_characteristic(&w, p, &s).unwrap().value;
            let factor = 2f64.powf((p - 1.0).max(1.0));
            assert!(v >= mx * (1.0 - 1e-12) && v <= factor * mx, "p={p}: {v} vs {mx}");
        }
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let r = scalar_restriction_characteristic(&w, 2.0, &e1, &s).unwrap().value;
        let direct = ap_characteristic(&ScalarWeight::sampled(m, w1).unwrap(), 2.0, &s).unwrap().value;
        assert!((r - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn rejects_bad_exponents() {
        let m = mesh();
        let w = MatrixWeight::identity(m, 2).unwrap();
        let s = SearchSpace::new(m);
        assert!(matches!(matrix_ap_characteristic(&w, 1.0, &s), Err(Error::InvalidExponent(_))));
        assert!(matches!(matrix_apq_characteristic(&w, 2.0, 1.5, &s), Err(Error::InvalidExponent(_))));
    }
}
