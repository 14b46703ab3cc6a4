//! Uniform meshes, dyadic grids with the one-third shifts, and the
//! mesh-realized pyramids used by every maximal and sparse computation.
//!
//! Two views of a shifted grid coexist. [`DyadicGrid`]/[`Cube`] describe the
//! continuum cubes `2^{-k}([0,1) + m + (-1)^k t/3)`. A mesh of cell width
//! `2^{-k_cell}` cannot represent thirds, so [`CellGrid`] snaps each level's
//! offset to the nearest cell boundary. Snapping keeps the nesting property,
//! hence every snapped grid is an ordinary binary pyramid over a zero-padded
//! copy of the cell array.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Interval, Result};

pub const MAX_DIM: usize = 3;
const MAX_LEVEL: u32 = 28;

/// Uniform mesh on `[-R, R)` with `2^{L+1}` half-open cells. `R` is a power of two
/// so that cell boundaries are dyadic rationals and every width is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mesh {
    radius_log2: i32,
    level: u32,
}

impl Mesh {
    pub fn new(radius: f64, level: u32) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid(format!("mesh radius must be positive, got {radius}")));
        }
        let r = radius.log2().round() as i32;
        if 2f64.powi(r) != radius {
            return Err(invalid(format!("mesh radius must be a power of two, got {radius}")));
        }
        Self::from_log2(r, level)
    }

    pub fn from_log2(radius_log2: i32, level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(invalid(format!("mesh level {level} exceeds {MAX_LEVEL}")));
        }
        if radius_log2.abs() > 60 {
            return Err(invalid("mesh radius out of range"));
        }
        Ok(Self { radius_log2, level })
    }

    pub fn radius(&self) -> f64 {
        2f64.powi(self.radius_log2)
    }

    pub fn radius_log2(&self) -> i32 {
        self.radius_log2
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_cells(&self) -> usize {
        1usize << (self.level + 1)
    }

    /// Cell width `h = R 2^{-L}`.
    pub fn width(&self) -> f64 {
        2f64.powi(self.radius_log2 - self.level as i32)
    }

    /// Dyadic level of a single cell: cells have side `2^{-cell_level}`.
    pub fn cell_level(&self) -> i32 {
        self.level as i32 - self.radius_log2
    }

    /// Index of the cell whose left edge is `x = 0`.
    pub fn origin(&self) -> i64 {
        (self.n_cells() / 2) as i64
    }

    pub fn domain(&self) -> Interval {
        Interval::new(-self.radius(), self.radius())
    }

    /// Left edge of (possibly out-of-range) cell `i`.
    pub fn edge(&self, i: i64) -> f64 {
        (i - self.origin()) as f64 * self.width()
    }

    pub fn cell(&self, i: usize) -> Interval {
        Interval::new(self.edge(i as i64), self.edge(i as i64 + 1))
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 - self.origin() as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells()).map(|i| self.center(i)).collect()
    }

    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !self.domain().contains(x) {
            return None;
        }
        let i = (x / self.width()).floor() as i64 + self.origin();
        Some(i.clamp(0, self.n_cells() as i64 - 1) as usize)
    }

    /// Cell index (possibly out of range) of the edge at `x`, if `x` is an edge.
    pub fn edge_index(&self, x: f64) -> Option<i64> {
        let u = x / self.width();
        (u.fract() == 0.0 && u.abs() < 2f64.powi(62)).then(|| u as i64 + self.origin())
    }
}

/// Piecewise-constant real function on a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFunction {
    pub mesh: Mesh,
    pub values: Vec<f64>,
}

impl MeshFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(invalid(format!(
                "expected {} cell values, got {}",
                mesh.n_cells(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value in cell {i}")));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self { mesh, values: vec![0.0; mesh.n_cells()] }
    }

    pub fn constant(mesh: Mesh, c: f64) -> Self {
        Self { mesh, values: vec![c; mesh.n_cells()] }
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(mesh, mesh.centers().into_iter().map(f).collect())
    }

    /// Sum of `value * 1_[lo, hi)` pieces; each endpoint must be a mesh edge.
    pub fn from_steps(mesh: Mesh, steps: &[(f64, f64, f64)]) -> Result<Self> {
        let mut out = Self::zeros(mesh);
        for &(lo, hi, v) in steps {
            let a = mesh.edge_index(lo).ok_or_else(|| invalid(format!("{lo} is not a mesh edge")))?;
            let b = mesh.edge_index(hi).ok_or_else(|| invalid(format!("{hi} is not a mesh edge")))?;
            let n = mesh.n_cells() as i64;
            for i in a.clamp(0, n)..b.clamp(0, n) {
                out.values[i as usize] += v;
            }
        }
        Ok(out)
    }

    pub fn indicator(mesh: Mesh, lo: f64, hi: f64) -> Result<Self> {
        Self::from_steps(mesh, &[(lo, hi, 1.0)])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { mesh: self.mesh, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.mesh != other.mesh {
            return Err(invalid("mesh mismatch"));
        }
        Ok(Self {
            mesh: self.mesh,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn integral(&self) -> f64 {
        tree_sum(&self.values) * self.mesh.width()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let s: Vec<f64> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        (tree_sum(&s) * self.mesh.width()).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Measure of `{x : value(x) != 0}`.
    pub fn support_measure(&self) -> f64 {
        self.values.iter().filter(|v| **v != 0.0).count() as f64 * self.mesh.width()
    }
}

/// Sum by recursive halving. Every summation over a dyadic block in this crate
/// goes through the same tree, so equal inputs give bit-identical sums.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n.next_power_of_two() / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

/// One member of the one-third-trick family: shift `t_i / 3` along axis `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicGrid {
    shift: [u8; MAX_DIM],
    dim: usize,
}

impl DyadicGrid {
    pub fn standard(dim: usize) -> Result<Self> {
        Self::with_shift(&vec![0; dim])
    }

    pub fn with_shift(shift: &[u8]) -> Result<Self> {
        let dim = shift.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        if shift.iter().any(|&t| t > 2) {
            return Err(invalid("grid shift numerators must be 0, 1 or 2"));
        }
        let mut s = [0u8; MAX_DIM];
        s[..dim].copy_from_slice(shift);
        Ok(Self { shift: s, dim })
    }

    /// One-dimensional grid with shift `t/3`.
    pub fn line(t: u8) -> Self {
        Self::with_shift(&[t]).expect("t must be 0, 1 or 2")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Shift numerator along `axis` (the shift is this over 3).
    pub fn shift(&self, axis: usize) -> u8 {
        self.shift[axis]
    }

    fn signed_shift(&self, level: i32, axis: usize) -> f64 {
        let s = self.shift[axis] as f64 / 3.0;
        if level.rem_euclid(2) == 0 {
            s
        } else {
            -s
        }
    }

    pub fn cube(&self, level: i32, index: &[i64]) -> Cube {
        let mut m = [0i64; MAX_DIM];
        m[..self.dim].copy_from_slice(&index[..self.dim]);
        Cube { grid: *self, level, index: m }
    }

    /// The level-`k` cube of this grid containing the point `x`.
    pub fn cube_containing(&self, level: i32, x: &[f64]) -> Cube {
        let scale = 2f64.powi(level);
        let mut m = [0i64; MAX_DIM];
        for axis in 0..self.dim {
            m[axis] = (x[axis] * scale - self.signed_shift(level, axis)).floor() as i64;
        }
        Cube { grid: *self, level, index: m }
    }
}

/// `2^{-k}([0,1)^n + m + (-1)^k s)` in a given grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    pub grid: DyadicGrid,
    pub level: i32,
    pub index: [i64; MAX_DIM],
}

impl Cube {
    pub fn side(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn measure(&self) -> f64 {
        self.side().powi(self.grid.dim as i32)
    }

    /// Projection onto `axis` as an interval.
    pub fn edge(&self, axis: usize) -> Interval {
        let lo = (self.index[axis] as f64 + self.grid.signed_shift(self.level, axis)) * self.side();
        Interval::new(lo, lo + self.side())
    }

    /// The cube as an interval (`n = 1`).
    pub fn interval(&self) -> Interval {
        self.edge(0)
    }

    pub fn parent(&self) -> Cube {
        // Left child of (k-1, m) has index 2m + (-1)^{k-1} t.
        let mut m = [0i64; MAX_DIM];
        let sign = if (self.level - 1).rem_euclid(2) == 0 { 1 } else { -1 };
        for axis in 0..self.grid.dim {
            let t = self.grid.shift[axis] as i64;
            m[axis] = (self.index[axis] - sign * t).div_euclid(2);
        }
        Cube { grid: self.grid, level: self.level - 1, index: m }
    }

    pub fn children(&self) -> Vec<Cube> {
        let dim = self.grid.dim;
        let sign = if self.level.rem_euclid(2) == 0 { 1 } else { -1 };
        let mut first = [0i64; MAX_DIM];
        for axis in 0..dim {
            first[axis] = 2 * self.index[axis] + sign * self.grid.shift[axis] as i64;
        }
        (0..1usize << dim)
            .map(|bits| {
                let mut m = first;
                for (axis, v) in m.iter_mut().enumerate().take(dim) {
                    *v += ((bits >> axis) & 1) as i64;
                }
                Cube { grid: self.grid, level: self.level + 1, index: m }
            })
            .collect()
    }

    /// True if `other` is this cube or one of its descendants.
    pub fn contains(&self, other: &Cube) -> bool {
        if other.grid != self.grid || other.level < self.level {
            return false;
        }
        let mut c = *other;
        while c.level > self.level {
            c = c.parent();
        }
        c == *self
    }
}

/// All cubes of `grid` at levels `min_level..=max_level` meeting `domain`
/// (a one-dimensional interval).
pub fn enumerate_cubes(
    grid: &DyadicGrid,
    domain: Interval,
    min_level: i32,
    max_level: i32,
) -> Result<Vec<Cube>> {
    if !domain.is_bounded() {
        return Err(Error::UnboundedDomain(domain));
    }
    if grid.dim != 1 {
        return Err(invalid("cube enumeration is implemented for n = 1"));
    }
    let mut out = Vec::new();
    if min_level > max_level || domain.is_empty() {
        return Ok(out);
    }
    for k in min_level..=max_level {
        let scale = 2f64.powi(k);
        let s = grid.signed_shift(k, 0);
        // Cube m meets [lo, hi) iff (m + s + 1) 2^{-k} > lo and (m + s) 2^{-k} < hi.
        let first = (domain.lo * scale - s - 1.0).floor() as i64 + 1;
        let last = (domain.hi * scale - s).ceil() as i64 - 1;
        for m in first..=last {
            let q = grid.cube(k, &[m]);
            if q.interval().overlap(&domain) > 0.0 {
                out.push(q);
            }
        }
    }
    Ok(out)
}

/// The `3^n` one-third-trick grids.
pub fn shifted_grids(n: usize) -> Result<Vec<DyadicGrid>> {
    if n == 0 || n > MAX_DIM {
        return Err(invalid(format!("dimension must be in 1..={MAX_DIM}, got {n}")));
    }
    let total = 3usize.pow(n as u32);
    Ok((0..total)
        .map(|mut code| {
            let mut shift = [0u8; MAX_DIM];
            for s in shift.iter_mut().take(n) {
                *s = (code % 3) as u8;
                code /= 3;
            }
            DyadicGrid::with_shift(&shift[..n]).expect("valid shift")
        })
        .collect())
}

/// Smallest cube among `grids` containing the interval.
pub fn smallest_containing_cube(grids: &[DyadicGrid], interval: Interval) -> Result<Cube> {
    if !interval.is_bounded() {
        return Err(Error::UnboundedDomain(interval));
    }
    let mut best: Option<Cube> = None;
    let start = (-interval.len().log2()).ceil() as i32 + 1;
    for grid in grids {
        for k in (start - 64..=start).rev() {
            let q = grid.cube_containing(k, &[interval.lo]);
            if q.interval().contains_interval(&interval) {
                if best.map_or(true, |b| q.level > b.level) {
                    best = Some(q);
                }
                break;
            }
        }
    }
    best.ok_or_else(|| Error::SearchFailed(format!("no cube contains {interval}")))
}

/// `<f>_Q`: exact integral of the step function over `Q` divided by `|Q|`.
/// Cells outside the mesh contribute zero.
pub fn average(f: &MeshFunction, q: &Cube) -> Result<f64> {
    let iv = q.interval();
    if !(iv.len() > 0.0) {
        return Err(Error::Degenerate { interval: iv, detail: "cube has zero measure".into() });
    }
    let mesh = f.mesh;
    let h = mesh.width();
    let n = mesh.n_cells() as i64;
    let first = ((iv.lo / h).floor() as i64 + mesh.origin()).clamp(0, n);
    let last = ((iv.hi / h).ceil() as i64 + mesh.origin()).clamp(0, n);
    let mut total = 0.0;
    for i in first..last {
        let w = mesh.cell(i as usize).overlap(&iv);
        total += w * f.values[i as usize];
    }
    Ok(total / iv.len())
}

/// A block of `2^side_log2` consecutive cells of a snapped grid. `first` is a
/// mesh cell index and may fall outside `0..n_cells` (padding).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellCube {
    pub shift: u8,
    pub side_log2: u32,
    pub first: i64,
}

impl CellCube {
    pub fn n_cells(&self) -> i64 {
        1i64 << self.side_log2
    }

    pub fn end(&self) -> i64 {
        self.first + self.n_cells()
    }

    pub fn interval(&self, mesh: &Mesh) -> Interval {
        Interval::new(mesh.edge(self.first), mesh.edge(self.end()))
    }

    pub fn contains_cell(&self, i: i64) -> bool {
        self.first <= i && i < self.end()
    }

    /// True if `other` is nested inside this block.
    pub fn contains(&self, other: &CellCube) -> bool {
        self.first <= other.first && other.end() <= self.end()
    }
}

/// Snapped version of one shifted grid over a row of `n_cells` cells whose cell
/// `origin` has its left edge at `x = 0` and whose cells have dyadic level
/// `cell_level`. Blocks up to `2^top` cells are represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellGrid {
    shift: u8,
    cell_level: i32,
    origin: i64,
    n_cells: usize,
    top: u32,
    offsets: Vec<i64>,
    start: i64,
    padded: usize,
}

impl CellGrid {
    pub fn new(n_cells: usize, origin: i64, cell_level: i32, shift: u8, top: u32) -> Result<Self> {
        if shift > 2 {
            return Err(invalid("grid shift numerators must be 0, 1 or 2"));
        }
        if top > 40 {
            return Err(invalid(format!("pyramid height {top} too large")));
        }
        let offsets: Vec<i64> = (0..=top)
            .map(|j| {
                // Nearest integer to (-1)^k t 2^j / 3 with k = cell_level - j.
                let sign = if (cell_level - j as i32).rem_euclid(2) == 0 { 1 } else { -1 };
                let v = sign * shift as i64 * (1i64 << j);
                (v + 1).div_euclid(3)
            })
            .collect();
        let step = 1i64 << top;
        let anchor = origin + offsets[top as usize];
        let start = anchor + (-anchor).div_euclid(step) * step;
        let end = anchor + (n_cells as i64 - anchor + step - 1).div_euclid(step) * step;
        Ok(Self {
            shift,
            cell_level,
            origin,
            n_cells,
            top,
            offsets,
            start,
            padded: (end - start) as usize,
        })
    }

    /// Grid `t` on a mesh with blocks up to the full width `2R`.
    pub fn for_mesh(mesh: &Mesh, shift: u8) -> Result<Self> {
        Self::with_top(mesh, shift, mesh.level() + 1)
    }

    pub fn with_top(mesh: &Mesh, shift: u8, top: u32) -> Result<Self> {
        Self::new(mesh.n_cells(), mesh.origin(), mesh.cell_level(), shift, top)
    }

    pub fn all_for_mesh(mesh: &Mesh) -> Result<Vec<Self>> {
        (0..3).map(|t| Self::for_mesh(mesh, t)).collect()
    }

    pub fn shift(&self) -> u8 {
        self.shift
    }

    pub fn top(&self) -> u32 {
        self.top
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// First padded cell index (`<= 0`).
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn padded_len(&self) -> usize {
        self.padded
    }

    pub fn blocks(&self, j: u32) -> usize {
        self.padded >> j
    }

    pub fn block_of(&self, cell: i64, j: u32) -> usize {
        ((cell - self.start) >> j) as usize
    }

    pub fn cube(&self, j: u32, block: usize) -> CellCube {
        CellCube { shift: self.shift, side_log2: j, first: self.start + ((block as i64) << j) }
    }

    pub fn cube_of(&self, cell: i64, j: u32) -> CellCube {
        self.cube(j, self.block_of(cell, j))
    }

    /// The continuum cube this block approximates.
    pub fn continuum(&self, c: &CellCube) -> Cube {
        let j = c.side_log2;
        let m = (c.first - self.origin - self.offsets[j as usize]) >> j;
        DyadicGrid::line(self.shift).cube(self.cell_level - j as i32, &[m])
    }

    /// Block sums for every level `0..=top`, computed bottom-up.
    pub fn pyramid(&self, values: &[f64]) -> Pyramid {
        debug_assert_eq!(values.len(), self.n_cells);
        let mut base = vec![0.0; self.padded];
        let pad = (-self.start) as usize;
        base[pad..pad + values.len()].copy_from_slice(values);
        let mut levels = Vec::with_capacity(self.top as usize + 1);
        levels.push(base);
        for _ in 0..self.top {
            let prev = levels.last().expect("nonempty");
            let next: Vec<f64> = prev.chunks_exact(2).map(|c| c[0] + c[1]).collect();
            levels.push(next);
        }
        Pyramid { levels }
    }
}

/// Block sums of a padded cell array, one vector per level.
#[derive(Debug, Clone)]
pub struct Pyramid {
    pub levels: Vec<Vec<f64>>,
}

impl Pyramid {
    pub fn sum(&self, j: u32, block: usize) -> f64 {
        self.levels[j as usize][block]
    }
}

/// Finite union of half-open cell ranges `[a, b)`, kept sorted and merged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellSet {
    ranges: Vec<(i64, i64)>,
}

impl CellSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ranges(ranges: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut r: Vec<(i64, i64)> = ranges.into_iter().filter(|(a, b)| a < b).collect();
        r.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(r.len());
        for (a, b) in r {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { ranges: merged }
    }

    pub fn from_cells(cells: impl IntoIterator<Item = i64>) -> Self {
        Self::from_ranges(cells.into_iter().map(|i| (i, i + 1)))
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self::from_cells(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as i64))
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn count(&self) -> i64 {
        self.ranges.iter().map(|(a, b)| b - a).sum()
    }

    pub fn measure(&self, mesh: &Mesh) -> f64 {
        self.count() as f64 * mesh.width()
    }

    pub fn contains(&self, i: i64) -> bool {
        let k = self.ranges.partition_point(|r| r.1 <= i);
        k < self.ranges.len() && self.ranges[k].0 <= i
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.ranges.iter().flat_map(|&(a, b)| a..b)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_ranges(self.ranges.iter().chain(&other.ranges).copied())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a0, a1) = self.ranges[i];
            let (b0, b1) = other.ranges[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { ranges: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let mut j = 0;
        for &(a, b) in &self.ranges {
            let mut lo = a;
            while j < other.ranges.len() && other.ranges[j].1 <= lo {
                j += 1;
            }
            let mut k = j;
            while lo < b && k < other.ranges.len() && other.ranges[k].0 < b {
                let (c, d) = other.ranges[k];
                if c > lo {
                    out.push((lo, c));
                }
                lo = lo.max(d);
                k += 1;
            }
            if lo < b {
                out.push((lo, b));
            }
        }
        Self { ranges: out }
    }

    /// Restriction to the mesh cells `0..n`.
    pub fn clip(&self, n: usize) -> Self {
        self.intersection(&Self::from_ranges([(0, n as i64)]))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intervals(cubes: &[Cube]) -> Vec<(f64, f64)> {
        let mut v: Vec<_> = cubes.iter().map(|q| (q.interval().lo, q.interval().hi)).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn enumerate_standard_unit_interval() {
        let g = DyadicGrid::standard(1).unwrap();
        let c = enumerate_cubes(&g, Interval::new(0.0, 1.0), 0, 1).unwrap();
        assert_eq!(intervals(&c), vec![(0.0, 0.5), (0.0, 1.0), (0.5, 1.0)]);
        let c = enumerate_cubes(&g, Interval::new(0.0, 1.0), 0, 0).unwrap();
        assert_eq!(intervals(&c), vec![(0.0, 1.0)]);
        let c = enumerate_cubes(&g, Interval::new(0.4, 0.6), 1, 1).unwrap();
        assert_eq!(intervals(&c), vec![(0.0, 0.5), (0.5, 1.0)]);
    }

    #[test]
    fn enumerate_edge_cases() {
        let g = DyadicGrid::standard(1).unwrap();
        assert!(enumerate_cubes(&g, Interval::new(0.0, 1.0), 2, 1).unwrap().is_empty());
        assert!(matches!(
            enumerate_cubes(&g, Interval::new(0.0, f64::INFINITY), 0, 1),
            Err(Error::UnboundedDomain(_))
        ));
    }

    #[test]
    fn shifted_grid_counts() {
        assert_eq!(shifted_grids(1).unwrap().len(), 3);
        assert_eq!(shifted_grids(2).unwrap().len(), 9);
        assert!(shifted_grids(0).is_err());
    }

    #[test]
    fn one_third_containment_example() {
        let grids = shifted_grids(1).unwrap();
        let i = Interval::new(0.49, 0.51);
        let q = smallest_containing_cube(&grids, i).unwrap();
        assert!(q.interval().contains_interval(&i));
        assert!(q.side() <= 0.125 * 6.0);
        assert!(q.side() <= 6.0 * i.len());
    }

    #[test]
    fn parent_child_consistency() {
        for g in shifted_grids(1).unwrap() {
            for k in -3..5 {
                for m in -4..4 {
                    let q = g.cube(k, &[m]);
                    let kids = q.children();
                    assert_eq!(kids.len(), 2);
                    for c in &kids {
                        assert_eq!(c.parent(), q);
                        let (qi, ci) = (q.interval(), c.interval());
                        assert!(ci.lo >= qi.lo - 1e-12 && ci.hi <= qi.hi + 1e-12);
                    }
                    assert!((kids[0].interval().lo - q.interval().lo).abs() < 1e-12);
                    assert!((kids[1].interval().hi - q.interval().hi).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn averages() {
        let mesh = Mesh::new(1.0, 4).unwrap();
        let g = DyadicGrid::standard(1).unwrap();
        let unit = g.cube(0, &[0]);
        let c = MeshFunction::constant(mesh, 3.5);
        assert_eq!(average(&c, &unit).unwrap(), 3.5);
        let f = MeshFunction::indicator(mesh, 0.0, 0.25).unwrap();
        assert_eq!(average(&f, &unit).unwrap(), 0.25);
        let f4 = f.scale(4.0);
        assert_eq!(average(&f4, &g.cube(1, &[0])).unwrap(), 2.0);
    }

    #[test]
    fn snapped_offsets_nest() {
        for cell_level in -3..12 {
            for t in 0..3 {
                let cg = CellGrid::new(64, 32, cell_level, t, 20).unwrap();
                for j in 1..=20usize {
                    let diff = cg.offsets[j] - cg.offsets[j - 1];
                    assert_eq!(diff.rem_euclid(1 << (j - 1)), 0);
                }
            }
        }
    }

    #[test]
    fn snapped_blocks_track_continuum_cubes() {
        let mesh = Mesh::new(1.0, 8).unwrap();
        for cg in CellGrid::all_for_mesh(&mesh).unwrap() {
            assert!(cg.start() <= 0);
            assert!(cg.start() + cg.padded_len() as i64 >= mesh.n_cells() as i64);
            for j in 0..=cg.top() {
                for b in 0..cg.blocks(j) {
                    let cc = cg.cube(j, b);
                    let q = cg.continuum(&cc).interval();
                    let s = cc.interval(&mesh);
                    assert!((q.lo - s.lo).abs() <= 0.5 * mesh.width() + 1e-12);
                    assert!((q.len() - s.len()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pyramid_matches_tree_sum() {
        let mesh = Mesh::new(2.0, 5).unwrap();
        let vals: Vec<f64> = (0..mesh.n_cells()).map(|i| (i as f64 * 0.37).sin()).collect();
        let cg = CellGrid::for_mesh(&mesh, 0).unwrap();
        let p = cg.pyramid(&vals);
        let half = mesh.n_cells() / 2;
        let j = mesh.level();
        assert_eq!(p.sum(j, cg.block_of(0, j)), tree_sum(&vals[..half]));
        assert_eq!(p.sum(j, cg.block_of(half as i64, j)), tree_sum(&vals[half..]));
    }

    #[test]
    fn cellset_algebra() {
        let a = CellSet::from_ranges([(0, 5), (3, 8), (10, 12)]);
        assert_eq!(a.ranges(), &[(0, 8), (10, 12)]);
        let b = CellSet::from_ranges([(2, 4), (7, 11)]);
        assert_eq!(a.difference(&b).ranges(), &[(0, 2), (4, 7), (11, 12)]);
        assert_eq!(a.intersection(&b).ranges(), &[(2, 4), (7, 8), (10, 11)]);
        assert_eq!(a.union(&b).ranges(), &[(0, 12)]);
        assert!(a.contains(7) && !a.contains(8) && a.contains(11));
        assert_eq!(a.count(), 10);
    }

    #[test]
    fn mesh_layout() {
        let mesh = Mesh::new(4.0, 3).unwrap();
        assert_eq!(mesh.n_cells(), 16);
        assert_eq!(mesh.width(), 0.5);
        assert_eq!(mesh.cell(8), Interval::new(0.0, 0.5));
        assert_eq!(mesh.cell_of(-4.0), Some(0));
        assert_eq!(mesh.cell_of(4.0), None);
        assert!(Mesh::new(3.0, 2).is_err());
    }
}
