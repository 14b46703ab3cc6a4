//! Hilbert transform with kernel `1/(x - y)` and no `1/π` factor.

use crate::error::{invalid, Error, Interval, Result};
use crate::grid::{Mesh, MeshFunction};
use crate::quad::Quadrature;
use crate::weights::ScalarWeight;

/// `Σ c_k 1_[a_k, b_k)`, optionally multiplied by a weight-like density.
#[derive(Debug, Clone)]
pub struct HilbertIntegrand {
    pub pieces: Vec<(f64, f64, f64)>,
    pub density: Option<ScalarWeight>,
}

impl HilbertIntegrand {
    pub fn step(pieces: Vec<(f64, f64, f64)>) -> Self {
        Self { pieces, density: None }
    }

    pub fn weighted(pieces: Vec<(f64, f64, f64)>, density: ScalarWeight) -> Self {
        Self { pieces, density: Some(density) }
    }

    pub fn from_mesh_function(f: &MeshFunction) -> Self {
        let pieces = (0..f.len())
            .filter(|&i| f.values[i] != 0.0)
            .map(|i| {
                let c = f.mesh.cell(i);
                (c.lo, c.hi, f.values[i])
            })
            .collect();
        Self::step(pieces)
    }
}

/// Prepared transform: pieces merged into maximal runs of constant value.
#[derive(Debug, Clone)]
pub struct HilbertTransform {
    runs: Vec<(f64, f64, f64)>,
    density: Option<ScalarWeight>,
    quad: Quadrature,
}

pub fn hilbert_transform(integrand: HilbertIntegrand) -> Result<HilbertTransform> {
    let mut edges = Vec::with_capacity(2 * integrand.pieces.len());
    for &(a, b, c) in &integrand.pieces {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || a >= b {
            return Err(invalid(format!("bad piece [{a}, {b}) with value {c}")));
        }
        edges.push((a, c));
        edges.push((b, -c));
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut runs: Vec<(f64, f64, f64)> = Vec::new();
    let mut level = 0.0;
    let mut k = 0;
    while k < edges.len() {
        let x = edges[k].0;
        let mut next = level;
        while k < edges.len() && edges[k].0 == x {
            next += edges[k].1;
            k += 1;
        }
        // Snap sums that cancel to exact zero.
        if next.abs() < 1e-15 * (level.abs() + 1.0) {
            next = 0.0;
        }
        if let Some(end) = edges.get(k).map(|e| e.0) {
            if next != 0.0 {
                match runs.last_mut() {
                    Some(last) if last.1 == x && last.2 == next => last.1 = end,
                    _ => runs.push((x, end, next)),
                }
            }
        }
        level = next;
    }
    Ok(HilbertTransform {
        runs,
        density: integrand.density,
        quad: Quadrature::with_tolerance(1e-13, 1e-12),
    })
}

impl HilbertTransform {
    pub fn runs(&self) -> &[(f64, f64, f64)] {
        &self.runs
    }

    /// Points where the integrand jumps.
    pub fn jumps(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, &(a, b, _)) in self.runs.iter().enumerate() {
            if k == 0 || self.runs[k - 1].1 != a {
                out.push(a);
            }
            out.push(b);
        }
        out
    }

    fn is_jump(&self, x: f64) -> bool {
        self.runs.iter().enumerate().any(|(k, &(a, b, _))| {
            x == b || (x == a && (k == 0 || self.runs[k - 1].1 != a))
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.is_jump(x) {
            return Err(Error::JumpPoint(x));
        }
        match &self.density {
            None => Ok(self
                .runs
                .iter()
                .map(|&(a, b, c)| c * ((x - a).abs().ln() - (x - b).abs().ln()))
                .sum()),
            Some(u) => {
                let mut total = 0.0;
                for &(a, b, c) in &self.runs {
                    total += c * self.weighted_piece(u, x, a, b)?;
                }
                Ok(total)
            }
        }
    }

    /// Values at the cell centers of `mesh`.
    pub fn on_mesh(&self, mesh: &Mesh) -> Result<MeshFunction> {
        let values = mesh.centers().into_iter().map(|x| self.eval(x)).collect::<Result<Vec<_>>>()?;
        MeshFunction::new(*mesh, values)
    }

    fn plain(&self, u: &ScalarWeight, x: f64, a: f64, b: f64) -> Result<f64> {
        // Split where power-log densities are not smooth.
        let mut cuts = vec![a];
        for s in [-1.0, 0.0, 1.0] {
            if a < s && s < b {
                cuts.push(s);
            }
        }
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += self.quad.integrate(|y| u.eval(y) / (x - y), w[0], w[1])?;
        }
        Ok(total)
    }

    /// `PV ∫_a^b u(y)/(x - y) dy`: symmetric excision `ε, ε/2, ε/4` followed by
    /// two Richardson steps (the excision error has only odd powers of `ε`).
    fn weighted_piece(&self, u: &ScalarWeight, x: f64, a: f64, b: f64) -> Result<f64> {
        if x < a || x > b {
            return self.plain(u, x, a, b);
        }
        let eps0 = ((b - a) / 16.0).min(0.5 * (x - a)).min(0.5 * (b - x));
        if !(eps0 > 0.0) {
            return Err(Error::Degenerate {
                interval: Interval::new(a, b),
                detail: format!("no room for principal value at {x}"),
            });
        }
        let excised = |eps: f64| -> Result<f64> {
            Ok(self.plain(u, x, a, x - eps)? + self.plain(u, x, x + eps, b)?)
        };
        let (i0, i1, i2) = (excised(eps0)?, excised(eps0 / 2.0)?, excised(eps0 / 4.0)?);
        let r0 = 2.0 * i1 - i0;
        let r1 = 2.0 * i2 - i1;
        Ok((8.0 * r1 - r0) / 7.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_block_at_origin() {
        let h = hilbert_transform(HilbertIntegrand::step(vec![(1.0, 2.0, 1.0)])).unwrap();
        let v = h.eval(0.0).unwrap();
        assert!((v + 2f64.ln()).abs() < 1e-15);
        for &x in &[0.0, 0.25, 0.49] {
            let m = h.eval(x).unwrap().abs();
            assert!(m > 0.5);
            assert!((m - ((2.0 - x) / (1.0 - x)).ln()).abs() < 1e-14);
        }
        assert!(matches!(h.eval(1.0), Err(Error::JumpPoint(_))));
    }

    #[test]
    fn adjacent_equal_pieces_merge() {
        let h = hilbert_transform(HilbertIntegrand::step(vec![(0.0, 1.0, 2.0), (1.0, 2.0, 2.0)])).unwrap();
        assert_eq!(h.runs(), &[(0.0, 2.0, 2.0)]);
        assert!(h.eval(1.0).is_ok());
        // Principal value through the middle of a block.
        assert!(h.eval(1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn even_bump_gives_odd_output() {
        let h = hilbert_transform(HilbertIntegrand::step(vec![(-1.0, 1.0, 1.0), (-0.5, 0.5, 1.0)])).unwrap();
        for &x in &[0.1, 0.7, 1.3, 4.0] {
            let (p, m) = (h.eval(x).unwrap(), h.eval(-x).unwrap());
            assert!((p + m).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_principal_value_matches_closed_form() {
        let one = ScalarWeight::constant(1.0).unwrap();
        let closed = hilbert_transform(HilbertIntegrand::step(vec![(0.25, 0.75, 1.0)])).unwrap();
        let quad = hilbert_transform(HilbertIntegrand::weighted(vec![(0.25, 0.75, 1.0)], one)).unwrap();
        for &x in &[0.3, 0.5, 0.7, 2.0, -3.0] {
            let (a, b) = (closed.eval(x).unwrap(), quad.eval(x).unwrap());
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-3), "x={x}: {a} vs {b}");
        }
    }
}
