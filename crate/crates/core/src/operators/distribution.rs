use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::MeshFunction;

/// Distribution function of a step function, exact at every distinct `|g|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionCurve {
    /// Distinct nonzero values of `|g|`, ascending.
    pub thresholds: Vec<f64>,
    /// `|{|g| > thresholds[i]}|`.
    pub above: Vec<f64>,
    /// `|{|g| >= thresholds[i]}|`.
    pub at_least: Vec<f64>,
}

impl DistributionCurve {
    /// `|{|g| > λ}|`.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let k = self.thresholds.partition_point(|&t| t <= lambda);
        if k < self.at_least.len() {
            self.at_least[k]
        } else {
            0.0
        }
    }

    /// `max_i v_i^q |{|g| >= v_i}|`, the supremum of `λ^q |{|g| > λ}|`, with its `v_i`.
    pub fn sup_weighted(&self, q: f64) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        for (&v, &m) in self.thresholds.iter().zip(&self.at_least) {
            let s = v.powf(q) * m;
            if s > best.0 {
                best = (s, v);
            }
        }
        best
    }
}

pub fn distribution(g: &MeshFunction) -> DistributionCurve {
    let mut mags: Vec<f64> = g.values.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    mags.sort_by(f64::total_cmp);
    let h = g.mesh.width();
    let n = mags.len();
    let mut thresholds = Vec::new();
    let mut above = Vec::new();
    let mut at_least = Vec::new();
    let mut i = 0;
    while i < n {
        let v = mags[i];
        let mut j = i;
        while j < n && mags[j] == v {
            j += 1;
        }
        thresholds.push(v);
        at_least.push((n - i) as f64 * h);
        above.push((n - j) as f64 * h);
        i = j;
    }
    DistributionCurve { thresholds, above, at_least }
}

/// `sup_λ λ |{|g| > λ}|^{1/p}`, attained as `λ` increases to a value of `|g|`.
pub fn weak_lp_norm(g: &MeshFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("weak norm needs 1 <= p < ∞, got {p}")));
    }
    let d = distribution(g);
    Ok(d.thresholds
        .iter()
        .zip(&d.at_least)
        .map(|(v, m)| v * m.powf(1.0 / p))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh;

    fn two_step() -> MeshFunction {
        let mesh = Mesh::new(4.0, 3).unwrap();
        MeshFunction::from_steps(mesh, &[(0.0, 1.0, 2.0), (1.0, 3.0, 1.0)]).unwrap()
    }

    #[test]
    fn two_step_distribution() {
        let d = distribution(&two_step());
        assert_eq!(d.measure_above(1.5), 1.0);
        assert_eq!(d.measure_above(0.5), 3.0);
        assert_eq!(d.measure_above(2.0), 0.0);
        assert_eq!(weak_lp_norm(&two_step(), 1.0).unwrap(), 3.0);
    }

    #[test]
    fn zero_function() {
        let g = MeshFunction::zeros(Mesh::new(1.0, 2).unwrap());
        let d = distribution(&g);
        assert_eq!(d.measure_above(0.0), 0.0);
        assert_eq!(weak_lp_norm(&g, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn indicator_weak_norm() {
        let mesh = Mesh::new(2.0, 4).unwrap();
        let g = MeshFunction::indicator(mesh, -0.5, 1.25).unwrap();
        assert_eq!(weak_lp_norm(&g, 2.0).unwrap(), 1.75f64.sqrt());
    }
}
