use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{CellCube, CellGrid, MeshFunction};
use crate::sparse::{block_sum, SparseFamily};
use crate::weights::{sharp_rh_exponent, SearchSpace};

use super::characteristic::{restriction_weight, Restriction};
use super::reducing::{norm_directions, reducing_matrix, ReducerKind, ReducingMatrix};
use super::{op_norm, MatrixWeight, VectorMeshFunction};

/// Reducing matrices of one kind, keyed by cube. Entries are written once.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducerMap {
    pub kind: ReducerKind,
    map: HashMap<CellCube, ReducingMatrix>,
}

impl ReducerMap {
    pub fn new(kind: ReducerKind) -> Self {
        Self { kind, map: HashMap::new() }
    }

    /// Inserts `r` unless its cube already has a reducer.
    pub fn insert(&mut self, r: ReducingMatrix) -> Result<()> {
        if r.kind != self.kind {
            return Err(invalid(format!("reducer of kind {:?} in a map of kind {:?}", r.kind, self.kind)));
        }
        self.map.entry(r.cube).or_insert(r);
        Ok(())
    }

    pub fn get(&self, q: &CellCube) -> Result<&ReducingMatrix> {
        self.map.get(q).ok_or_else(|| Error::MissingReducer(format!("{q:?}")))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Largest `c_plus / c_minus` stored.
    pub fn worst_ratio(&self) -> f64 {
        self.map.values().map(|r| r.ratio()).fold(1.0, f64::max)
    }
}

/// Reducers for every cube of `family`; the cubes must lie inside the mesh.
pub fn reducers_for_family(w: &MatrixWeight, family: &SparseFamily, kind: ReducerKind) -> Result<ReducerMap> {
    let fitted: Vec<ReducingMatrix> =
        family.cubes.par_iter().map(|q| reducing_matrix(w, q, kind)).collect::<Result<_>>()?;
    let mut map = ReducerMap::new(kind);
    for r in fitted {
        map.insert(r)?;
    }
    Ok(map)
}

/// `M_W f(x) = sup_Q ⨍_Q |W^{1/p}(x) W^{-1/p}(y) f(y)| dy` over the cubes of
/// the given snapped grids containing `x`, up to side `2R`.
pub fn christ_goldberg_maximal(w: &MatrixWeight, p: f64, f: &VectorMeshFunction, grids: &[u8]) -> Result<MeshFunction> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("need 1 <= p < ∞, got {p}")));
    }
    weighted_maximal(w, w.powers(1.0 / p), w.powers(-1.0 / p), f, grids, |_| 1.0)
}

/// `M_{W,α} f(x) = sup_Q |Q|^α ⨍_Q |W(x) W^{-1}(y) f(y)| dy`.
pub fn christ_goldberg_fractional_maximal(
    w: &MatrixWeight,
    alpha: f64,
    f: &VectorMeshFunction,
    grids: &[u8],
) -> Result<MeshFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidExponent(format!("need 0 < α < 1, got {alpha}")));
    }
    let h = w.mesh.width();
    weighted_maximal(w, w.cells.clone(), w.powers(-1.0), f, grids, |j| (h * (1u64 << j) as f64).powf(alpha))
}

fn weighted_maximal(
    w: &MatrixWeight,
    left: Vec<DMatrix<f64>>,
    right: Vec<DMatrix<f64>>,
    f: &VectorMeshFunction,
    grids: &[u8],
    scale: impl Fn(u32) -> f64 + Sync,
) -> Result<MeshFunction> {
    if f.mesh != w.mesh || f.dim != w.dim {
        return Err(invalid("vector function and matrix weight do not match"));
    }
    if grids.is_empty() {
        return Err(invalid("no grids given"));
    }
    let grids: Vec<CellGrid> = grids.iter().map(|&t| CellGrid::for_mesh(&w.mesh, t)).collect::<Result<_>>()?;
    let inner: Vec<DVector<f64>> = right.iter().zip(&f.values).map(|(b, v)| b * v).collect();
    let n = w.mesh.n_cells();
    let values = (0..n)
        .into_par_iter()
        .map(|x| {
            let g: Vec<f64> = inner.iter().map(|u| (&left[x] * u).norm()).collect();
            let mut best = 0.0f64;
            for cg in &grids {
                let pyr = cg.pyramid(&g);
                let m = (0..=cg.top())
                    .map(|j| scale(j) * pyr.sum(j, cg.block_of(x as i64, j)) / (1u64 << j) as f64)
                    .fold(0.0, f64::max);
                best = best.max(m);
            }
            best
        })
        .collect();
    Ok(MeshFunction { mesh: w.mesh, values })
}

/// `Σ_Q ‖B(x) R_Q^{-1}‖ |Q|^α <f>_{p,Q} 1_Q(x)` with `B = W^{1/p}` and `R_Q`
/// the primal reducer when `α = 0`, and `B = W`, `R_Q` the fractional reducer
/// otherwise.
pub fn dominating_scalar_sparse(
    w: &MatrixWeight,
    p: f64,
    family: &SparseFamily,
    reducers: &ReducerMap,
    f: &MeshFunction,
    alpha: f64,
) -> Result<MeshFunction> {
    if f.mesh != w.mesh || family.mesh != w.mesh {
        return Err(invalid("function, family and weight live on different meshes"));
    }
    if !(p >= 1.0) || !p.is_finite() || !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidExponent(format!("need 1 <= p < ∞ and 0 <= α < 1, got p={p}, α={alpha}")));
    }
    let left = match (alpha == 0.0, reducers.kind) {
        (true, ReducerKind::Primal { p: rp }) if rp == p => w.powers(1.0 / p),
        (false, ReducerKind::Fractional { .. }) => w.cells.clone(),
        (_, k) => return Err(invalid(format!("reducer kind {k:?} does not fit p={p}, α={alpha}"))),
    };
    let h = w.mesh.width();
    let powered: Vec<f64> = f.values.iter().map(|v| v.abs().powf(p)).collect();
    let n = w.mesh.n_cells() as i64;
    let mut out = MeshFunction::zeros(w.mesh);
    for q in &family.cubes {
        let r = reducers.get(q)?;
        if q.first < 0 || q.end() > n {
            return Err(invalid(format!("cube {q:?} leaves the mesh")));
        }
        let mut avg = (block_sum(&powered, q.first, q.side_log2) / q.n_cells() as f64).powf(1.0 / p);
        if alpha > 0.0 {
            avg *= (q.n_cells() as f64 * h).powf(alpha);
        }
        if avg == 0.0 {
            continue;
        }
        let inv = r.inverse();
        for i in q.first..q.end() {
            out.values[i as usize] += op_norm(&(&left[i as usize] * &inv)) * avg;
        }
    }
    Ok(out)
}

/// Both sides of the sharp reverse Hölder estimate on one cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpRhiBound {
    /// `⨍_Q ‖W^{1/p}(x) R_Q^{-1}‖^{pν} dx`.
    pub op_average: f64,
    /// `Σ_i ⨍_Q |W^{1/p}(x) R_Q^{-1} e_i|^{pν} dx`.
    pub column_sum: f64,
}

/// Evaluates the sharp reverse Hölder bound for the primal reducer `r`.
pub fn sharp_rhi_matrix_bound(w: &MatrixWeight, p: f64, r: &ReducingMatrix, nu: f64) -> Result<SharpRhiBound> {
    if r.kind != (ReducerKind::Primal { p }) {
        return Err(invalid(format!("expected a primal reducer for p={p}, got {:?}", r.kind)));
    }
    if !(nu >= 1.0) || !nu.is_finite() {
        return Err(Error::InvalidExponent(format!("need ν >= 1, got {nu}")));
    }
    let q = r.cube;
    if q.first < 0 || q.end() > w.mesh.n_cells() as i64 {
        return Err(invalid(format!("cube {q:?} leaves the mesh")));
    }
    let inv = r.inverse();
    let e = p * nu;
    let m = q.n_cells() as f64;
    let (mut op, mut cols) = (0.0, 0.0);
    for i in q.first as usize..q.end() as usize {
        let a = super::spd_pow(&w.cells[i], 1.0 / p) * &inv;
        op += op_norm(&a).powf(e);
        cols += a.column_iter().map(|c| c.norm().powf(e)).sum::<f64>();
    }
    Ok(SharpRhiBound { op_average: op / m, column_sum: cols / m })
}

/// `min_v ν(w_v)` over sampled directions, `w_v = |W^{1/p} v|^p`, with `ν` the
/// searched sharp reverse Hölder exponent.
pub fn directional_rh_exponent(w: &MatrixWeight, p: f64, n_dirs: usize, search: &SearchSpace) -> Result<f64> {
    let mut nu = f64::INFINITY;
    for v in norm_directions(w.dim, n_dirs) {
        nu = nu.min(sharp_rh_exponent(&restriction_weight(w, Restriction::Ap { p }, &v)?, search)?);
    }
    Ok(nu)
}

/// Terms of `<|R_Q W^{-1/p} f|>_Q <= C <|f|>_{p,Q} [W]_{𝒜_p}^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducingChain {
    /// `⨍_Q |R_Q W^{-1/p}(y) f(y)| dy`.
    pub lhs: f64,
    /// `<|f|>_{p,Q}`.
    pub p_average: f64,
}

pub fn reducing_estimate_chain(
    w: &MatrixWeight,
    p: f64,
    r: &ReducingMatrix,
    f: &VectorMeshFunction,
) -> Result<ReducingChain> {
    if r.kind != (ReducerKind::Primal { p }) {
        return Err(invalid(format!("expected a primal reducer for p={p}, got {:?}", r.kind)));
    }
    let q = r.cube;
    if q.first < 0 || q.end() > w.mesh.n_cells() as i64 || f.mesh != w.mesh {
        return Err(invalid("cube or function does not fit the weight's mesh"));
    }
    let m = q.n_cells() as f64;
    let (mut lhs, mut pow) = (0.0, 0.0);
    for i in q.first as usize..q.end() as usize {
        let b = super::spd_pow(&w.cells[i], -1.0 / p);
        lhs += (&r.matrix * (b * &f.values[i])).norm();
        pow += f.values[i].norm().powf(p);
    }
    Ok(ReducingChain { lhs: lhs / m, p_average: (pow / m).powf(1.0 / p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh;
    use crate::operators::{hl_maximal, multiplier_apply, Operator};
    use crate::sparse::{build_sparse_family, interior_roots, sparse_apply};
    use crate::weights::ScalarWeight;

    fn mesh() -> Mesh {
        Mesh::new(1.0, 5).unwrap()
    }

    fn vector_fn(m: Mesh) -> VectorMeshFunction {
        let vals = (0..m.n_cells())
            .map(|i| DVector::from_vec(vec![((i * 7) % 5) as f64 / 8.0 - 0.25, ((i * 3) % 4) as f64 / 8.0]))
            .collect();
        VectorMeshFunction::new(m, vals).unwrap()
    }

    #[test]
    fn identity_weight_gives_scalar_maximal_exactly() {
        let m = mesh();
        let w = MatrixWeight::identity(m, 2).unwrap();
        let f = vector_fn(m);
        let mw = christ_goldberg_maximal(&w, 3.0, &f, &[0, 1, 2]).unwrap();
        let scalar = hl_maximal(&f.norms()).unwrap();
        assert_eq!(mw.values, scalar.values);
    }

    #[test]
    fn homogeneity() {
        let m = mesh();
        let c = m.centers();
        let w = MatrixWeight::rotated(
            m,
            &c.iter().map(|x| 2.0 * x).collect::<Vec<_>>(),
            &c.iter().map(|x| 1.0 + x * x).collect::<Vec<_>>(),
            &vec![0.5; c.len()],
        )
        .unwrap();
        let f = vector_fn(m);
        let a = christ_goldberg_maximal(&w, 2.0, &f, &[0, 1, 2]).unwrap();
        let b = christ_goldberg_maximal(&w, 2.0, &f.scale(-4.0), &[0, 1, 2]).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((4.0 * x - y).abs() <= 1e-13 * y.max(1.0));
        }
    }

    #[test]
    fn diagonal_weight_reduces_to_scalar_multiplier_maximal() {
        let m = mesh();
        let c = m.centers();
        let w1: Vec<f64> = c.iter().map(|x| x.abs().powf(0.5)).collect();
        let w = MatrixWeight::diagonal(m, &[w1.clone(), vec![3.0; c.len()]]).unwrap();
        let f1 = MeshFunction::new(m, (0..c.len()).map(|i| ((i % 6) as f64 - 2.0) / 8.0).collect()).unwrap();
        let mw = christ_goldberg_maximal(&w, 2.0, &VectorMeshFunction::from_scalar(&f1, 2, 0), &[0, 1, 2]).unwrap();
        let sw = ScalarWeight::sampled(m, w1).unwrap();
        let scalar = multiplier_apply(Operator::Maximal, &sw, 2.0, &f1).unwrap();
        for (a, b) in mw.values.iter().zip(&scalar.values) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn identity_sparse_operator_is_scalar_sparse() {
        let m = mesh();
        let w = MatrixWeight::identity(m, 2).unwrap();
        let f = MeshFunction::new(m, (0..m.n_cells()).map(|i| ((i * 5) % 7) as f64 / 8.0).collect()).unwrap();
        let roots = interior_roots(&m, 0).unwrap();
        let fam = build_sparse_family(&f, 0, Some(&roots)).unwrap();
        let red = reducers_for_family(&w, &fam, ReducerKind::Primal { p: 1.0 }).unwrap();
        let a = dominating_scalar_sparse(&w, 1.0, &fam, &red, &f, 0.0).unwrap();
        let b = sparse_apply(&fam, &f, 0.0).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-9 * y.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn constant_weight_coefficient_is_one_at_p2() {
        let m = mesh();
        let k = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let w = MatrixWeight::new(m, vec![k; m.n_cells()]).unwrap();
        let f = MeshFunction::constant(m, 1.0);
        let fam = SparseFamily {
            mesh: m,
            shift: 0,
            cubes: interior_roots(&m, 0).unwrap(),
            sets: vec![],
        };
        let red = reducers_for_family(&w, &fam, ReducerKind::Primal { p: 2.0 }).unwrap();
        let a = dominating_scalar_sparse(&w, 2.0, &fam, &red, &f, 0.0).unwrap();
        assert!(a.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn missing_reducer_is_error() {
        let m = mesh();
        let w = MatrixWeight::identity(m, 2).unwrap();
        let fam = SparseFamily { mesh: m, shift: 0, cubes: interior_roots(&m, 0).unwrap(), sets: vec![] };
        let empty = ReducerMap::new(ReducerKind::Primal { p: 2.0 });
        let f = MeshFunction::constant(m, 1.0);
        assert!(matches!(dominating_scalar_sparse(&w, 2.0, &fam, &empty, &f, 0.0), Err(Error::MissingReducer(_))));
    }

    #[test]
    fn identity_rhi_bound() {
        let m = mesh();
        let w = MatrixWeight::identity(m, 2).unwrap();
        let q = interior_roots(&m, 0).unwrap()[0];
        let r = reducing_matrix(&w, &q, ReducerKind::Primal { p: 2.0 }).unwrap();
        let b = sharp_rhi_matrix_bound(&w, 2.0, &r, 1.5).unwrap();
        assert!((b.op_average - 1.0).abs() < 1e-13);
        assert!((b.column_sum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn rhi_bound_is_monotone_in_nu() {
        let m = mesh();
        let c = m.centers();
        let w = MatrixWeight::rotated(
            m,
            &c.iter().map(|x| 3.0 * x).collect::<Vec<_>>(),
            &c.iter().map(|x| 1.0 + x.abs()).collect::<Vec<_>>(),
            &c.iter().map(|x| 0.3 + x * x).collect::<Vec<_>>(),
        )
        .unwrap();
        let q = interior_roots(&m, 0).unwrap()[1];
        let r = reducing_matrix(&w, &q, ReducerKind::Primal { p: 3.0 }).unwrap();
        let mut last = 0.0;
        for nu in [1.0, 1.2, 1.5, 2.0, 3.0] {
            let b = sharp_rhi_matrix_bound(&w, 3.0, &r, nu).unwrap().op_average.powf(1.0 / nu);
            assert!(b >= last * (1.0 - 1e-12));
            last = b;
        }
    }
}
