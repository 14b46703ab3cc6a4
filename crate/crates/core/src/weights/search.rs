use rayon::prelude::*;

use crate::error::{Error, Interval, Result};
use crate::grid::{enumerate_cubes, CellCube, CellGrid, Cube, DyadicGrid, Mesh};

use super::ScalarWeight;

/// Family of intervals a supremum over cubes is taken over.
///
/// Closed-form weights are scanned over the continuum cubes of the shifted
/// grids that meet the mesh domain; sampled weights over the snapped cubes
/// lying inside it. The anchored family `[0, t]` is optional.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub mesh: Mesh,
    pub grids: Vec<u8>,
    pub min_level: i32,
    pub max_level: i32,
    pub include_grids: bool,
    pub anchored: bool,
    pub anchored_per_octave: u32,
    /// The maximal function inside a cube is resolved on `2^depth` cells.
    pub ainfty_depth: u32,
}

/// One interval of the search, with its cube identity when it has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub interval: Interval,
    pub cube: Option<Cube>,
    pub cells: Option<CellCube>,
}

impl SearchSpace {
    /// Three shifted grids from side `2R` down to one cell.
    pub fn new(mesh: Mesh) -> Self {
        Self {
            mesh,
            grids: vec![0, 1, 2],
            min_level: -(mesh.radius_log2() + 1),
            max_level: mesh.cell_level(),
            include_grids: true,
            anchored: false,
            anchored_per_octave: 8,
            ainfty_depth: 6,
        }
    }

    /// Only the intervals `[0, t]`.
    pub fn anchored_only(mesh: Mesh) -> Self {
        Self { include_grids: false, anchored: true, ..Self::new(mesh) }
    }

    pub fn with_anchored(mut self, anchored: bool) -> Self {
        self.anchored = anchored;
        self
    }

    pub fn with_levels(mut self, min_level: i32, max_level: i32) -> Self {
        self.min_level = min_level;
        self.max_level = max_level;
        self
    }

    pub fn with_ainfty_depth(mut self, depth: u32) -> Self {
        self.ainfty_depth = depth;
        self
    }

    pub fn levels(&self) -> (i32, i32) {
        (self.min_level, self.max_level)
    }

    pub fn grids_used(&self) -> usize {
        if self.include_grids {
            self.grids.len()
        } else {
            0
        }
    }

    pub fn candidates(&self, w: &ScalarWeight) -> Result<Vec<Candidate>> {
        let mut out = Vec::new();
        if self.include_grids {
            match w {
                ScalarWeight::PowerLog(_) => {
                    for &t in &self.grids {
                        let g = DyadicGrid::line(t);
                        for q in enumerate_cubes(&g, self.mesh.domain(), self.min_level, self.max_level)? {
                            out.push(Candidate { interval: q.interval(), cube: Some(q), cells: None });
                        }
                    }
                }
                ScalarWeight::Sampled(s) => {
                    if s.mesh != self.mesh {
                        return Err(Error::InvalidParameter("sampled weight and search mesh differ".into()));
                    }
                    out.extend(self.snapped_cubes()?);
                }
            }
        }
        if self.anchored {
            let r = self.mesh.radius();
            let steps = self.anchored_per_octave.max(1) as i32 * self.mesh.level() as i32;
            let mut ts: Vec<f64> = (0..=steps)
                .map(|i| r * 2f64.powf(-(i as f64) / self.anchored_per_octave.max(1) as f64))
                .collect();
            if r > 1.0 {
                ts.push(1.0);
            }
            ts.sort_by(|a, b| b.total_cmp(a));
            ts.dedup();
            out.extend(ts.into_iter().map(|t| Candidate {
                interval: Interval::new(0.0, t),
                cube: None,
                cells: None,
            }));
        }
        Ok(out)
    }

    /// Snapped cubes inside the mesh, at the configured levels.
    pub fn snapped_cubes(&self) -> Result<Vec<Candidate>> {
        let mesh = self.mesh;
        let n = mesh.n_cells() as i64;
        let mut out = Vec::new();
        for &t in &self.grids {
            let cg = CellGrid::for_mesh(&mesh, t)?;
            for j in 0..=cg.top() {
                let level = mesh.cell_level() - j as i32;
                if level < self.min_level || level > self.max_level {
                    continue;
                }
                for b in 0..cg.blocks(j) {
                    let cc = cg.cube(j, b);
                    if cc.first >= 0 && cc.end() <= n {
                        out.push(Candidate {
                            interval: cc.interval(&mesh),
                            cube: Some(cg.continuum(&cc)),
                            cells: Some(cc),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Evaluates `f` on every candidate and returns the first maximizer.
    pub(crate) fn maximize<F>(&self, w: &ScalarWeight, f: F) -> Result<(f64, Candidate, usize)>
    where
        F: Fn(&Candidate) -> Result<f64> + Sync,
    {
        let cands = self.candidates(w)?;
        if cands.is_empty() {
            return Err(Error::SearchFailed("empty search space".into()));
        }
        let values: Vec<Result<f64>> = cands.par_iter().map(&f).collect();
        let mut best: Option<(f64, usize)> = None;
        for (i, v) in values.into_iter().enumerate() {
            let v = v?;
            if v.is_nan() {
                return Err(Error::Degenerate {
                    interval: cands[i].interval,
                    detail: "characteristic quantity is NaN".into(),
                });
            }
            if best.map_or(true, |(b, _)| v > b) {
                best = Some((v, i));
            }
        }
        let (v, i) = best.expect("nonempty");
        Ok((v, cands[i], cands.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_counts() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let s = SearchSpace::new(mesh);
        let w = ScalarWeight::constant(1.0).unwrap();
        let c = s.candidates(&w).unwrap();
        // Standard grid: levels -1..=3 meet [-1,1) in 2 + 2 + 4 + 8 + 16 cubes.
        let standard = c.iter().filter(|c| c.cube.unwrap().grid.shift(0) == 0).count();
        assert_eq!(standard, 32);
        let a = SearchSpace::anchored_only(mesh).candidates(&w).unwrap();
        assert_eq!(a.len(), 25);
        assert!(a.iter().all(|c| c.interval.lo == 0.0));
    }

    #[test]
    fn snapped_cubes_stay_inside() {
        let mesh = Mesh::new(2.0, 4).unwrap();
        let s = SearchSpace::new(mesh);
        for c in s.snapped_cubes().unwrap() {
            assert!(mesh.domain().contains_interval(&c.interval));
        }
    }
}
