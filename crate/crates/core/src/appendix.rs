//! The explicit `A_1` example: the profile `μ`, its approximate inverse `ν`,
//! the weights `w_δ(x) = log(e/|x|)/|x|^{1-δ}`, and the weak-type lower bound
//! for `w_δ H(f w_δ^{-1})` with `f = 1_[1,2]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::Mesh;
use crate::operators::{hilbert_transform, HilbertIntegrand};
use crate::weights::{a1_characteristic, sharp_rh_exponent, ScalarWeight, SearchSpace};

/// `log(e/|x|)/|x|` for `0 < |x| <= 1`, `1` beyond.
pub fn mu(x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(invalid(format!("μ is undefined at {x}")));
    }
    let a = x.abs();
    Ok(if a <= 1.0 { (1.0 - a.ln()) / a } else { 1.0 })
}

/// `log(e x)/x`, an approximate inverse of `μ` near the origin. Evaluated for
/// every `x > 0`.
pub fn nu(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("ν needs x > 0, got {x}")));
    }
    Ok((1.0 + x.ln()) / x)
}

/// Largest `x` in `(0, hi]` with `g(x) > level`, for `g` decreasing; `hi` if
/// `g(hi) > level`. Bisection in `log x`.
fn decreasing_crossing(g: impl Fn(f64) -> f64, level: f64, hi: f64) -> f64 {
    if g(hi) > level {
        return hi;
    }
    let (mut lo_l, mut hi_l) = (-700.0f64, hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo_l + hi_l);
        if g(mid.exp()) > level {
            lo_l = mid;
        } else {
            hi_l = mid;
        }
        if hi_l - lo_l < 1e-15 {
            break;
        }
    }
    lo_l.exp()
}

/// Both sides of the necessary condition `(λ/t)|{x ∈ [0,t] : μ(x) > λ}| <= C μ(t)`
/// with `C = 1`, and the lower bound `log(eλ)/(2t)` for the left side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NecessaryCondition {
    pub t: f64,
    pub lambda: f64,
    pub measure: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub lower: f64,
}

impl NecessaryCondition {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

pub fn necessary_condition_violation(t: f64, lambda: f64) -> Result<NecessaryCondition> {
    if !(t > 0.0 && t < 1.0) || !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("need 0 < t < 1 and λ > 0, got t={t}, λ={lambda}")));
    }
    let measure = decreasing_crossing(|x| mu(x).unwrap_or(f64::INFINITY), lambda, t);
    Ok(NecessaryCondition {
        t,
        lambda,
        measure,
        lhs: lambda / t * measure,
        rhs: mu(t)?,
        lower: (1.0 + lambda.ln()) / (2.0 * t),
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid(format!("need 0 < δ < 1/2, got {delta}")));
    }
    Ok(())
}

pub fn w_delta(delta: f64) -> Result<ScalarWeight> {
    check_delta(delta)?;
    ScalarWeight::power_log(delta - 1.0, 1.0, 1.0)
}

/// `⨍_[0,t] w_δ` in closed form.
pub fn exact_a1_interval_average(delta: f64, t: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("need t > 0, got {t}")));
    }
    let inner = 1.0 / delta + 1.0 / (delta * delta);
    if t <= 1.0 {
        let s = t.powf(1.0 - delta);
        Ok((1.0 / delta) * (1.0 - t.ln()) / s + (1.0 / (delta * delta)) / s)
    } else {
        Ok(inner / t + (t - 1.0) / t)
    }
}

/// `F(λ) = λ^{1 - 1/(1-δ)} log(λ)^{1/(1-δ)}`.
pub fn f_lambda(delta: f64, lambda: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(invalid(format!("F needs λ > 1, got {lambda}")));
    }
    let e = 1.0 / (1.0 - delta);
    Ok(lambda.powf(1.0 - e) * lambda.ln().powf(e))
}

/// `(λ*, F(λ*))` with `λ* = e^{1/δ}`.
pub fn f_argmax(delta: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    let e = 1.0 / (1.0 - delta);
    Ok(((1.0 / delta).exp(), (-e).exp() * delta.powf(-delta * e) / delta))
}

/// `|H(1_[1,2])(x)| = |log((2-x)/(1-x))|` off `{1, 2}`.
pub fn hilbert_of_unit_step(x: f64) -> f64 {
    ((2.0 - x) / (1.0 - x)).abs().ln().abs()
}

/// Settings of the lower-bound experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixConfig {
    /// Uniform cells per octave `[2^{-k-1}, 2^{-k})` of the graded mesh.
    pub per_octave: usize,
    /// The graded mesh reaches at least down to this point.
    pub floor: f64,
    /// `λ` is searched in `[λ*/window, window λ*]`.
    pub window: f64,
    /// Uniform mesh used for the `A_1` and reverse Hölder searches.
    pub search_radius: f64,
    pub search_level: u32,
}

impl Default for AppendixConfig {
    fn default() -> Self {
        Self { per_octave: 64, floor: 1e-8, window: 16.0, search_radius: 4.0, search_level: 16 }
    }
}

/// Cells `[edges[i], edges[i+1])` refining geometrically toward the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    pub edges: Vec<f64>,
}

impl GradedMesh {
    /// Octaves `[2^{-k-1}, 2^{-k})`, `k = 1..=octaves`, each cut into
    /// `per_octave` cells, preceded by the remainder cell `(0, 2^{-octaves-1})`.
    pub fn new(octaves: u32, per_octave: usize) -> Result<Self> {
        if octaves == 0 || octaves > 1000 || per_octave == 0 {
            return Err(invalid("graded mesh needs octaves in 1..=1000 and cells per octave"));
        }
        let mut edges = vec![0.0];
        for k in (1..=octaves as i32).rev() {
            let lo = 2f64.powi(-k - 1);
            let width = lo / per_octave as f64;
            for i in 0..per_octave {
                edges.push(lo + i as f64 * width);
            }
        }
        edges.push(0.5);
        Ok(Self { edges })
    }

    pub fn n_cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }
}

/// Outcome of the lower-bound experiment for one `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub delta: f64,
    /// `[w_δ]_{A_1}` over the anchored intervals `[0, t]`.
    pub a1_char: f64,
    pub sharp_rh_nu: f64,
    /// Maximizing `λ` of the mesh quotient inside the window.
    pub lambda_star: f64,
    /// `sup λ |{x ∈ (0, 1/2] : w_δ |H(f w_δ^{-1})| > λ}|` over the window,
    /// from the graded mesh; `‖f‖_1 = 1`.
    pub quotient: f64,
    /// The same supremum with the level set located by root finding.
    pub closed_quotient: f64,
    pub closed_lambda: f64,
    /// `C_0 >= quotient`.
    pub c0_lower: f64,
    pub ratio_to_sqrt_a1: f64,
    /// `F(e^{1/δ}) / 4`, the lower bound of the chain.
    pub chain_bound: f64,
    pub mesh_cells: usize,
    pub cells_in_level_set: usize,
}

/// `x ↦ w_δ(x) |H(1_[1,2])(x)|` by the closed-form transform.
fn closed_output(delta: f64, x: f64) -> f64 {
    (1.0 - x.ln()) / x.powf(1.0 - delta) * hilbert_of_unit_step(x)
}

/// `λ |{x ∈ (0, 1/2] : output > λ}|` with the level set `(0, x_λ)` found by
/// root finding; the output is decreasing there.
pub fn closed_quotient(delta: f64, lambda: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(lambda * decreasing_crossing(|x| closed_output(delta, x), lambda, 0.5))
}

pub fn lower_bound_experiment(delta: f64, config: &AppendixConfig) -> Result<LowerBoundReport> {
    check_delta(delta)?;
    if !(config.window >= 4.0) || config.per_octave < 4 || !(config.floor > 0.0 && config.floor < 0.25) {
        return Err(invalid("window must be at least 4, at least 4 cells per octave, floor in (0, 1/4)"));
    }
    let w = w_delta(delta)?;
    let (lambda_peak, f_peak) = f_argmax(delta)?;
    let (lam_lo, lam_hi) = (lambda_peak / config.window, lambda_peak * config.window);

    // Deep enough that the remainder cell lies inside every level set of the window.
    let mut octaves = (-config.floor.log2()).ceil().max(2.0) as u32;
    while closed_output(delta, 2f64.powi(-(octaves as i32) - 1)) <= lam_hi {
        octaves += 1;
        if octaves > 1000 {
            return Err(Error::Unresolved("graded mesh cannot reach the level sets".into()));
        }
    }
    let mesh = GradedMesh::new(octaves, config.per_octave)?;

    let transform = hilbert_transform(HilbertIntegrand::weighted(vec![(1.0, 2.0, 1.0)], w.pow(-1.0)))?;
    let values: Vec<f64> = (1..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let x = mesh.center(i);
            transform.eval(x).map(|h| w.eval(x) * h.abs())
        })
        .collect::<Result<_>>()?;
    // Output on cells 1.. (cell 0 is the remainder, above every windowed λ).
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut measure = mesh.width(0);
    let (mut best, mut best_lambda, mut best_count) = (0.0f64, f64::NAN, 0usize);
    let mut k = 0;
    while k < order.len() {
        let v = values[order[k]];
        while k < order.len() && values[order[k]] == v {
            measure += mesh.width(order[k] + 1);
            k += 1;
        }
        // λ increasing to v: the level set is {output >= v}.
        if v >= lam_lo && v <= lam_hi && v * measure > best {
            best = v * measure;
            best_lambda = v;
            best_count = k;
        }
    }
    if best_lambda.is_nan() {
        return Err(Error::Unresolved(format!("no output value in the window [{lam_lo:e}, {lam_hi:e}]; refine the mesh")));
    }
    if best_count < 4 {
        return Err(Error::Unresolved(format!(
            "level set at λ = {best_lambda:e} spans {best_count} cells; increase cells per octave"
        )));
    }

    // Closed path: log-spaced λ over the window, then golden-section refinement.
    let grid: Vec<f64> = (0..=400).map(|i| lam_lo * (lam_hi / lam_lo).powf(i as f64 / 400.0)).collect();
    let qs: Vec<f64> = grid.iter().map(|&l| closed_quotient(delta, l)).collect::<Result<_>>()?;
    let i = (0..qs.len()).fold(0, |b, i| if qs[i] > qs[b] { i } else { b });
    let (mut a, mut b) = (grid[i.saturating_sub(1)].ln(), grid[(i + 1).min(grid.len() - 1)].ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if closed_quotient(delta, c.exp())? >= closed_quotient(delta, d.exp())? {
            b = d;
        } else {
            a = c;
        }
    }
    let closed_lambda = (0.5 * (a + b)).exp();
    let closed_q = closed_quotient(delta, closed_lambda)?.max(qs[i]);

    let search = SearchSpace::anchored_only(Mesh::new(config.search_radius, config.search_level)?);
    let a1_char = a1_characteristic(&w, &search)?.value;
    let sharp_rh_nu = sharp_rh_exponent(&w, &search)?;
    Ok(LowerBoundReport {
        delta,
        a1_char,
        sharp_rh_nu,
        lambda_star: best_lambda,
        quotient: best,
        closed_quotient: closed_q,
        closed_lambda,
        c0_lower: best,
        ratio_to_sqrt_a1: best / a1_char.sqrt(),
        chain_bound: f_peak / 4.0,
        mesh_cells: mesh.n_cells(),
        cells_in_level_set: best_count,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(invalid("slope needs at least two positive pairs"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
