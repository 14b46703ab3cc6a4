use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::{CellCube, CellGrid, CellSet, Mesh, MeshFunction, Pyramid};

use super::cz::block_sum;

/// Stopping ratio `2^{n+1}` at `n = 1`.
pub const STOPPING_RATIO: f64 = 4.0;

/// Cubes of one snapped grid, each owning a designated subset `E_Q`.
/// Cell indices refer to `mesh` and may fall outside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseFamily {
    #[serde(skip)]
    pub mesh: Mesh,
    pub shift: u8,
    pub cubes: Vec<CellCube>,
    pub sets: Vec<CellSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ViolationKind {
    NotInside,
    Overlap { other: CellCube },
    TooSmall { ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub cube: CellCube,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SparsenessReport {
    pub violations: Vec<Violation>,
    /// `min |E_Q| / |Q|` over the family.
    pub min_ratio: f64,
}

impl SparsenessReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl SparseFamily {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }
}

fn average(pyr: &Pyramid, cg: &CellGrid, q: &CellCube) -> f64 {
    pyr.sum(q.side_log2, cg.block_of(q.first, q.side_log2)) / q.n_cells() as f64
}

fn stopping_children(pyr: &Pyramid, cg: &CellGrid, q: &CellCube, threshold: f64, out: &mut Vec<CellCube>) {
    if q.side_log2 == 0 {
        return;
    }
    let j = q.side_log2 - 1;
    let first = cg.block_of(q.first, j);
    for block in [first, first + 1] {
        let c = cg.cube(j, block);
        let s = pyr.sum(j, block);
        if s / c.n_cells() as f64 > threshold {
            out.push(c);
        } else if s > 0.0 {
            stopping_children(pyr, cg, &c, threshold, out);
        }
    }
}

/// Stopping-time family for `f >= 0` under each root: a cube's stopping
/// children are its maximal subcubes whose average exceeds four times its own.
/// `E_Q` is `Q` minus its stopping children. With `roots = None` the roots are
/// the top blocks of the grid (side `2R`).
pub fn build_sparse_family(f: &MeshFunction, shift: u8, roots: Option<&[CellCube]>) -> Result<SparseFamily> {
    if let Some(i) = f.values.iter().position(|v| *v < 0.0) {
        return Err(invalid(format!("sparse family input is negative on cell {i}")));
    }
    let cg = CellGrid::for_mesh(&f.mesh, shift)?;
    let pyr = cg.pyramid(&f.values);
    let roots: Vec<CellCube> = match roots {
        Some(r) => {
            for q in r {
                if q.shift != shift || q.first < cg.start() || q.side_log2 > cg.top() || cg.cube_of(q.first, q.side_log2) != *q {
                    return Err(invalid(format!("root {q:?} is not a cube of grid {shift}")));
                }
            }
            r.to_vec()
        }
        None => (0..cg.blocks(cg.top())).map(|b| cg.cube(cg.top(), b)).collect(),
    };
    let mut cubes = Vec::new();
    let mut sets = Vec::new();
    let mut stack = roots;
    stack.reverse();
    while let Some(q) = stack.pop() {
        let avg = average(&pyr, &cg, &q);
        let mut kids = Vec::new();
        if avg > 0.0 {
            stopping_children(&pyr, &cg, &q, STOPPING_RATIO * avg, &mut kids);
        }
        let set = CellSet::from_ranges([(q.first, q.end())])
            .difference(&CellSet::from_ranges(kids.iter().map(|c| (c.first, c.end()))));
        cubes.push(q);
        sets.push(set);
        for k in kids.into_iter().rev() {
            stack.push(k);
        }
    }
    Ok(SparseFamily { mesh: f.mesh, shift, cubes, sets })
}

/// Maximal cubes of grid `shift` lying inside the mesh. They partition the
/// mesh cells.
pub fn interior_roots(mesh: &Mesh, shift: u8) -> Result<Vec<CellCube>> {
    let cg = CellGrid::for_mesh(mesh, shift)?;
    let n = mesh.n_cells() as i64;
    let mut out = Vec::new();
    let mut i = 0i64;
    while i < n {
        let q = (0..=cg.top())
            .rev()
            .map(|j| cg.cube_of(i, j))
            .find(|q| q.first >= 0 && q.end() <= n)
            .expect("single cells lie inside the mesh");
        out.push(q);
        i = q.end();
    }
    Ok(out)
}

/// `Σ_Q |Q|^α <f>_Q 1_Q` on the mesh cells (`α = 0` gives `A_S f`).
pub fn sparse_apply(s: &SparseFamily, f: &MeshFunction, alpha: f64) -> Result<MeshFunction> {
    if f.mesh != s.mesh {
        return Err(invalid("function and family live on different meshes"));
    }
    if !(alpha >= 0.0 && alpha < 1.0) {
        return Err(crate::Error::InvalidExponent(format!("need 0 <= α < 1, got {alpha}")));
    }
    let h = f.mesh.width();
    let n = f.len() as i64;
    let mut out = MeshFunction::zeros(f.mesh);
    for q in &s.cubes {
        let mut coef = block_sum(&f.values, q.first, q.side_log2) / q.n_cells() as f64;
        if alpha > 0.0 {
            coef *= (q.n_cells() as f64 * h).powf(alpha);
        }
        for i in q.first.max(0)..q.end().min(n) {
            out.values[i as usize] += coef;
        }
    }
    Ok(out)
}

/// Checks `E_Q ⊆ Q`, pairwise disjointness, and `|Q| <= 2|E_Q|`.
pub fn verify_sparseness(s: &SparseFamily) -> SparsenessReport {
    let mut violations = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut owned: Vec<(i64, i64, usize)> = Vec::new();
    for (k, (q, e)) in s.cubes.iter().zip(&s.sets).enumerate() {
        if !e.is_subset(&CellSet::from_ranges([(q.first, q.end())])) {
            violations.push(Violation { cube: *q, kind: ViolationKind::NotInside });
        }
        let ratio = e.count() as f64 / q.n_cells() as f64;
        min_ratio = min_ratio.min(ratio);
        if ratio < 0.5 {
            violations.push(Violation { cube: *q, kind: ViolationKind::TooSmall { ratio } });
        }
        owned.extend(e.ranges().iter().map(|&(a, b)| (a, b, k)));
    }
    owned.sort_unstable();
    let mut reach: Option<(i64, usize)> = None;
    for &(a, b, k) in &owned {
        if let Some((end, owner)) = reach {
            if a < end && owner != k {
                violations.push(Violation { cube: s.cubes[k], kind: ViolationKind::Overlap { other: s.cubes[owner] } });
            }
            if b > end {
                reach = Some((b, k));
            }
        } else {
            reach = Some((b, k));
        }
    }
    SparsenessReport { violations, min_ratio: if min_ratio.is_finite() { min_ratio } else { 1.0 } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dyadic_maximal;

    #[test]
    fn constant_input_single_root() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let f = MeshFunction::constant(mesh, 1.0);
        let cg = CellGrid::for_mesh(&mesh, 0).unwrap();
        let root = [cg.cube_of(0, mesh.level() + 1)];
        let fam = build_sparse_family(&f, 0, Some(&root)).unwrap();
        assert_eq!(fam.len(), 1);
        let a = sparse_apply(&fam, &f, 0.0).unwrap();
        // The root is [-2, 0): half of it is outside the mesh.
        assert!(a.values[..4].iter().all(|&v| v == 0.5));
    }

    #[test]
    fn quarter_spike_family() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let f = MeshFunction::from_steps(mesh, &[(0.0, 0.25, 4.0)]).unwrap();
        let fam = build_sparse_family(&f, 0, None).unwrap();
        let intervals: Vec<(f64, f64)> = fam
            .cubes
            .iter()
            .map(|q| q.interval(&mesh))
            .map(|i| (i.lo, i.hi))
            .collect();
        // Root [0, 2) has average 1/2; [0, 1/4) has average 4 > 2 and is maximal.
        assert!(intervals.contains(&(0.0, 2.0)));
        assert!(intervals.contains(&(0.0, 0.25)));
        assert!(verify_sparseness(&fam).is_valid());
        let md = dyadic_maximal(&f, 0).unwrap();
        let a = sparse_apply(&fam, &f, 0.0).unwrap();
        for i in 0..mesh.n_cells() {
            assert!(md.values[i] <= STOPPING_RATIO * a.values[i]);
            assert!(a.values[i] <= 2.0 * md.values[i]);
        }
    }

    #[test]
    fn zero_input_keeps_roots() {
        let mesh = Mesh::new(1.0, 2).unwrap();
        let fam = build_sparse_family(&MeshFunction::zeros(mesh), 1, None).unwrap();
        let cg = CellGrid::for_mesh(&mesh, 1).unwrap();
        assert_eq!(fam.len(), cg.blocks(cg.top()));
    }

    #[test]
    fn injected_violations_are_flagged() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let q1 = CellCube { shift: 0, side_log2: 2, first: 0 };
        let q2 = CellCube { shift: 0, side_log2: 1, first: 2 };
        let good = SparseFamily {
            mesh,
            shift: 0,
            cubes: vec![q1, q2],
            sets: vec![CellSet::from_ranges([(0, 2)]), CellSet::from_ranges([(2, 4)])],
        };
        assert!(verify_sparseness(&good).is_valid());
        let mut overlap = good.clone();
        overlap.sets[0] = CellSet::from_ranges([(0, 3)]);
        assert!(verify_sparseness(&overlap)
            .violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::Overlap { .. })));
        let mut small = good.clone();
        small.sets[0] = CellSet::from_ranges([(0, 1)]);
        assert!(verify_sparseness(&small)
            .violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::TooSmall { .. })));
    }
}
