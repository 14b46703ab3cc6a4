use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{tree_sum, CellCube, CellGrid, CellSet, Mesh, MeshFunction};

/// Calderón–Zygmund decomposition `h = g + b` at a given height.
///
/// Stopping cubes may reach past the input mesh, so the decomposition lives on
/// an enlarged mesh with the same cell width; `offset` is the enlarged index
/// of the input's cell 0.
#[derive(Debug, Clone, Serialize)]
pub struct CZDecomposition {
    pub height: f64,
    pub shift: u8,
    #[serde(skip)]
    pub mesh: Mesh,
    pub offset: i64,
    /// Maximal grid cubes with average above the height (enlarged indices).
    pub cubes: Vec<CellCube>,
    #[serde(skip)]
    pub h: MeshFunction,
    #[serde(skip)]
    pub g: MeshFunction,
    #[serde(skip)]
    pub b: MeshFunction,
    pub omega: CellSet,
}

impl CZDecomposition {
    /// Ω in the input mesh's indices (may extend past `0..n_cells`).
    pub fn omega_in_input(&self) -> CellSet {
        CellSet::from_ranges(self.omega.ranges().iter().map(|&(a, b)| (a - self.offset, b - self.offset)))
    }

    pub fn omega_measure(&self) -> f64 {
        self.omega.measure(&self.mesh)
    }

    /// The grid the cubes belong to, on the enlarged mesh.
    pub fn grid(&self) -> Result<CellGrid> {
        CellGrid::for_mesh(&self.mesh, self.shift)
    }

    /// Names of the decomposition properties that fail: reconstruction,
    /// mean-zero, support, L∞ and L¹ bounds, disjointness. Comparisons are
    /// exact, which suits inputs whose sums are exact in floating point.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let n = self.mesh.n_cells();
        let inside: Vec<bool> = (0..n as i64).map(|i| self.omega.contains(i)).collect();
        let (h, g, b) = (&self.h.values, &self.g.values, &self.b.values);
        if (0..n).any(|i| g[i] + b[i] != h[i]) {
            out.push("reconstruction");
        }
        if self.cubes.iter().any(|q| (q.first..q.end()).map(|i| b[i as usize]).sum::<f64>() != 0.0) {
            out.push("mean-zero");
        }
        if (0..n).any(|i| !inside[i] && b[i] != 0.0) {
            out.push("support");
        }
        if (0..n).any(|i| g[i] > 2.0 * self.height || (!inside[i] && g[i] > self.height)) {
            out.push("sup-bound");
        }
        let h1: f64 = h.iter().sum();
        let g1: f64 = g.iter().map(|v| v.abs()).sum();
        let b1: f64 = b.iter().map(|v| v.abs()).sum();
        if g1 > h1 || b1 > 2.0 * h1 || self.omega_measure() > h1 * self.mesh.width() / self.height {
            out.push("l1-bound");
        }
        if self.cubes.windows(2).any(|w| w[0].end() > w[1].first) {
            out.push("disjointness");
        }
        out
    }
}

/// Sum of `values` over the block `[first, first + 2^j)`, zero outside the
/// array, using the same pairwise tree as [`CellGrid::pyramid`].
pub fn block_sum(values: &[f64], first: i64, j: u32) -> f64 {
    let n = values.len() as i64;
    let len = 1i64 << j;
    if first >= n || first + len <= 0 {
        return 0.0;
    }
    if j == 0 {
        return values[first as usize];
    }
    if first >= 0 && first + len <= n {
        return tree_sum(&values[first as usize..(first + len) as usize]);
    }
    block_sum(values, first, j - 1) + block_sum(values, first + len / 2, j - 1)
}

/// Smallest `e` such that the mesh with radius `R 2^e` and the same cell
/// width contains cells `lo..hi` of `mesh`.
pub(crate) fn enlarge_to_cover(mesh: &Mesh, lo: i64, hi: i64) -> Result<(Mesh, i64)> {
    let n = mesh.n_cells() as i64;
    let mut e = 0u32;
    loop {
        let pad = (n * ((1i64 << e) - 1)) / 2;
        if pad >= -lo && pad >= hi - n {
            let big = Mesh::from_log2(mesh.radius_log2() + e as i32, mesh.level() + e)?;
            return Ok((big, pad));
        }
        e += 1;
        if e > 24 {
            return Err(invalid("decomposition would need an enormous mesh"));
        }
    }
}

pub(crate) fn embed(f: &MeshFunction, big: Mesh, offset: i64) -> MeshFunction {
    let mut out = MeshFunction::zeros(big);
    let o = offset as usize;
    out.values[o..o + f.len()].copy_from_slice(&f.values);
    out
}

fn collect_stopping(pyr: &crate::grid::Pyramid, cg: &CellGrid, height: f64, j: u32, block: usize, out: &mut Vec<CellCube>) {
    if j == 0 {
        return;
    }
    for child in [2 * block, 2 * block + 1] {
        let s = pyr.sum(j - 1, child);
        if s / (1u64 << (j - 1)) as f64 > height {
            out.push(cg.cube(j - 1, child));
        } else if s > 0.0 {
            collect_stopping(pyr, cg, height, j - 1, child, out);
        }
    }
}

/// Decomposition of `h >= 0` at `height` in the snapped grid with shift `t/3`.
pub fn cz_decompose(h: &MeshFunction, height: f64, shift: u8) -> Result<CZDecomposition> {
    if !(height > 0.0) || !height.is_finite() {
        return Err(invalid(format!("height must be positive, got {height}")));
    }
    if let Some(i) = h.values.iter().position(|v| *v < 0.0) {
        return Err(invalid(format!("decomposed function is negative on cell {i}")));
    }
    let mesh = h.mesh;
    let cells_sum = tree_sum(&h.values);
    // Top blocks must have average at most `height`.
    let mut top = mesh.level() + 1;
    while cells_sum / 2f64.powi(top as i32) > height {
        top += 1;
    }
    let probe = CellGrid::with_top(&mesh, shift, top)?;
    let (big, offset) = enlarge_to_cover(&mesh, probe.start(), probe.start() + probe.padded_len() as i64)?;
    let hb = embed(h, big, offset);
    let cg = CellGrid::with_top(&big, shift, top)?;
    let pyr = cg.pyramid(&hb.values);
    let mut cubes = Vec::new();
    for block in 0..cg.blocks(top) {
        if pyr.sum(top, block) / 2f64.powi(top as i32) > height {
            return Err(Error::Unresolved("top block exceeds the height".into()));
        }
        collect_stopping(&pyr, &cg, height, top, block, &mut cubes);
    }
    cubes.sort_by_key(|c| c.first);
    let mut g = hb.clone();
    for q in &cubes {
        let avg = pyr.sum(q.side_log2, cg.block_of(q.first, q.side_log2)) / q.n_cells() as f64;
        for i in q.first..q.end() {
            g.values[i as usize] = avg;
        }
    }
    let b = hb.zip_with(&g, |x, y| x - y)?;
    let omega = CellSet::from_ranges(cubes.iter().map(|q| (q.first, q.end())));
    Ok(CZDecomposition { height, shift, mesh: big, offset, cubes, h: hb, g, b, omega })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_sum_matches_pyramid() {
        let mesh = Mesh::new(1.0, 4).unwrap();
        let vals: Vec<f64> = (0..mesh.n_cells()).map(|i| (i as f64 * 0.61).cos()).collect();
        for t in 0..3 {
            let cg = CellGrid::for_mesh(&mesh, t).unwrap();
            let pyr = cg.pyramid(&vals);
            for j in 0..=cg.top() {
                for b in 0..cg.blocks(j) {
                    let c = cg.cube(j, b);
                    assert_eq!(pyr.sum(j, b), block_sum(&vals, c.first, j));
                }
            }
        }
    }

    #[test]
    fn no_stopping_cube_below_height() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let h = MeshFunction::constant(mesh, 0.5);
        let cz = cz_decompose(&h, 1.0, 0).unwrap();
        assert!(cz.cubes.is_empty());
        assert!(cz.b.values.iter().all(|&v| v == 0.0));
        assert_eq!(cz.g, cz.h);
        assert!(cz.violations().is_empty());
    }

    #[test]
    fn quarter_spike_example() {
        // h = 4 on [0, 1/4) inside [0, 1): maximal cube [0, 1/2).
        let mesh = Mesh::new(1.0, 3).unwrap();
        let h = MeshFunction::from_steps(mesh, &[(0.0, 0.25, 4.0)]).unwrap();
        let cz = cz_decompose(&h, 1.0, 0).unwrap();
        assert_eq!(cz.cubes.len(), 1);
        let q = cz.cubes[0].interval(&cz.mesh);
        assert_eq!((q.lo, q.hi), (0.0, 0.5));
        for i in 0..cz.mesh.n_cells() {
            let x = cz.mesh.center(i);
            let expect_g = if (0.0..0.5).contains(&x) { 2.0 } else { 0.0 };
            let expect_b = if (0.0..0.25).contains(&x) { 2.0 } else if (0.25..0.5).contains(&x) { -2.0 } else { 0.0 };
            assert_eq!(cz.g.values[i], expect_g);
            assert_eq!(cz.b.values[i], expect_b);
        }
        assert!(cz.omega_measure() <= h.integral() / 1.0);
        assert!(cz.violations().is_empty());
        let mut broken = cz.clone();
        broken.b.values[cz.cubes[0].first as usize] = 0.0;
        assert_eq!(broken.violations(), vec!["reconstruction", "mean-zero"]);
    }
}
