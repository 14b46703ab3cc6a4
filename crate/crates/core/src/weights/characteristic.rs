use serde::Serialize;

use crate::error::{invalid, Error, Interval, Result};
use crate::grid::{tree_sum, CellGrid, Cube};

use super::{Candidate, ScalarWeight, SearchSpace};

/// Ceiling of the reverse-Hölder exponent search.
pub const RH_CEILING: f64 = 64.0;
const RH_FLOOR: f64 = 1.0 + 1e-6;
const RH_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicReport {
    pub value: f64,
    pub witness: Interval,
    pub witness_cube: Option<Cube>,
    pub search_levels: (i32, i32),
    pub grids_used: usize,
    pub cubes_scanned: usize,
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("need 1 < p < ∞, got {p}")));
    }
    Ok(())
}

fn report(search: &SearchSpace, (value, c, n): (f64, Candidate, usize)) -> CharacteristicReport {
    CharacteristicReport {
        value,
        witness: c.interval,
        witness_cube: c.cube,
        search_levels: search.levels(),
        grids_used: search.grids_used(),
        cubes_scanned: n,
    }
}

/// `(⨍ w)(⨍ w^{1-p'})^{p-1}` on one interval.
pub fn cube_ap(w: &ScalarWeight, p: f64, iv: Interval) -> Result<f64> {
    check_p(p)?;
    let dual = w.pow(1.0 - conjugate(p)).average(iv)?;
    Ok(w.average(iv)? * dual.powf(p - 1.0))
}

/// `⨍ w / essinf w` on one interval.
pub fn cube_a1(w: &ScalarWeight, iv: Interval) -> Result<f64> {
    let m = w.essinf(iv)?;
    if !(m > 0.0) {
        return Err(Error::Degenerate { interval: iv, detail: "essential infimum is zero".into() });
    }
    Ok(w.average(iv)? / m)
}

/// `(⨍ w^s)^{1/s} / ⨍ w` on one interval.
pub fn cube_rh(w: &ScalarWeight, s: f64, iv: Interval) -> Result<f64> {
    Ok(w.pow(s).average(iv)?.powf(1.0 / s) / w.average(iv)?)
}

/// `w(Q)^{-1} ∫_Q M(w 1_Q)` with `M` the maximum of the three shifted dyadic
/// maximal operators on a `2^depth`-cell subdivision of `Q`.
pub fn cube_fujii_wilson(w: &ScalarWeight, iv: Interval, depth: u32) -> Result<f64> {
    let mut n_log2 = depth;
    if let Some(mesh) = w.mesh() {
        let cells = iv.len() / mesh.width();
        if cells.fract() == 0.0 && (cells as u64).is_power_of_two() {
            n_log2 = n_log2.min((cells as u64).trailing_zeros());
        }
    }
    let n = 1usize << n_log2;
    let width = iv.len() / n as f64;
    let masses: Vec<f64> = (0..n)
        .map(|i| {
            let lo = iv.lo + i as f64 * width;
            let hi = if i + 1 == n { iv.hi } else { iv.lo + (i + 1) as f64 * width };
            w.integral(Interval::new(lo, hi))
        })
        .collect::<Result<_>>()?;
    let total = tree_sum(&masses);
    if !(total > 0.0) {
        return Err(Error::Degenerate { interval: iv, detail: "w(Q) = 0".into() });
    }
    let averages: Vec<f64> = masses.iter().map(|m| m / width).collect();
    let mut maximal = vec![0.0f64; n];
    for t in 0..3 {
        let cg = CellGrid::new(n, 0, n_log2 as i32, t, n_log2 + 1)?;
        let pyr = cg.pyramid(&averages);
        for (i, m) in maximal.iter_mut().enumerate() {
            for j in 0..=cg.top() {
                let avg = pyr.sum(j, cg.block_of(i as i64, j)) / (1u64 << j) as f64;
                *m = m.max(avg);
            }
        }
    }
    Ok(tree_sum(&maximal) * width / total)
}

pub fn ap_characteristic(w: &ScalarWeight, p: f64, search: &SearchSpace) -> Result<CharacteristicReport> {
    check_p(p)?;
    search.maximize(w, |c| cube_ap(w, p, c.interval)).map(|r| report(search, r))
}

pub fn a1_characteristic(w: &ScalarWeight, search: &SearchSpace) -> Result<CharacteristicReport> {
    search.maximize(w, |c| cube_a1(w, c.interval)).map(|r| report(search, r))
}

pub fn ainfty_characteristic(w: &ScalarWeight, search: &SearchSpace) -> Result<CharacteristicReport> {
    let depth = search.ainfty_depth;
    search
        .maximize(w, |c| cube_fujii_wilson(w, c.interval, depth))
        .map(|r| report(search, r))
}

pub fn rh_characteristic(w: &ScalarWeight, s: f64, search: &SearchSpace) -> Result<CharacteristicReport> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::InvalidExponent(format!("reverse Hölder exponent must exceed 1, got {s}")));
    }
    search.maximize(w, |c| cube_rh(w, s, c.interval)).map(|r| report(search, r))
}

/// Largest `s` in `(1, RH_CEILING]` with `[w]_{RH_s} <= 2`, by bisection to
/// relative tolerance `1e-4`. Exponents making `w^s` non-integrable fail.
pub fn sharp_rh_exponent(w: &ScalarWeight, search: &SearchSpace) -> Result<f64> {
    let passes = |s: f64| -> Result<bool> {
        match rh_characteristic(w, s, search) {
            Ok(r) => Ok(r.value <= 2.0),
            Err(Error::NonIntegrable { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if passes(RH_CEILING)? {
        return Ok(RH_CEILING);
    }
    if !passes(RH_FLOOR)? {
        return Err(Error::SearchFailed(
            "no reverse Hölder exponent above 1 keeps the characteristic below 2".into(),
        ));
    }
    let (mut lo, mut hi) = (RH_FLOOR, RH_CEILING);
    while hi / lo - 1.0 > RH_REL_TOL {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0) || !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("need 1 <= p <= q < ∞, got p={p}, q={q}")));
    }
    Ok(())
}

/// `(⨍ w^q)(⨍ w^{-p'})^{q/p'}` for `p > 1`, and `⨍ w^q / essinf w^q` for `p = 1`.
pub fn cube_apq(w: &ScalarWeight, p: f64, q: f64, iv: Interval) -> Result<f64> {
    check_pq(p, q)?;
    let upper = w.pow(q).average(iv)?;
    if p == 1.0 {
        let m = w.essinf(iv)?;
        if !(m > 0.0) {
            return Err(Error::Degenerate { interval: iv, detail: "essential infimum is zero".into() });
        }
        return Ok(upper / m.powf(q));
    }
    let pc = conjugate(p);
    Ok(upper * w.pow(-pc).average(iv)?.powf(q / pc))
}

pub fn apq_characteristic(
    w: &ScalarWeight,
    p: f64,
    q: f64,
    search: &SearchSpace,
) -> Result<CharacteristicReport> {
    if p == 1.0 {
        return a1q_characteristic(w, q, search);
    }
    check_p(p)?;
    check_pq(p, q)?;
    search.maximize(w, |c| cube_apq(w, p, q, c.interval)).map(|r| report(search, r))
}

pub fn a1q_characteristic(w: &ScalarWeight, q: f64, search: &SearchSpace) -> Result<CharacteristicReport> {
    check_pq(1.0, q).map_err(|_| invalid(format!("need q >= 1, got {q}")))?;
    search.maximize(w, |c| cube_apq(w, 1.0, q, c.interval)).map(|r| report(search, r))
}
