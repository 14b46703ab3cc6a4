//! Scalar weights and their Muckenhoupt-type characteristics.

mod characteristic;
mod search;

pub use characteristic::{
    a1_characteristic, a1q_characteristic, ainfty_characteristic, ap_characteristic,
    apq_characteristic, cube_a1, cube_ap, cube_fujii_wilson, cube_rh, rh_characteristic,
    sharp_rh_exponent, CharacteristicReport, RH_CEILING,
};
pub use search::{Candidate, SearchSpace};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Interval, Result};
use crate::grid::{Mesh, MeshFunction};
use crate::quad::Quadrature;

/// `c |x|^a log(e/|x|)^b` for `0 < |x| <= 1`, and `c` for `|x| > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLog {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Cell values of a weight on a mesh (piecewise constant).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWeight {
    pub mesh: Mesh,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarWeight {
    PowerLog(PowerLog),
    Sampled(SampledWeight),
}

impl PowerLog {
    /// Validated constructor: requires local integrability at the origin.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || c <= 0.0 {
            return Err(invalid(format!("power-log parameters must be finite with c > 0 (a={a}, b={b}, c={c})")));
        }
        if a <= -1.0 {
            return Err(invalid(format!("|x|^{a} is not integrable at 0; need a > -1")));
        }
        Ok(Self { a, b, c })
    }

    /// `|x|^a` (no log factor, unit constant).
    pub fn power(a: f64) -> Result<Self> {
        Self::new(a, 0.0, 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let r = x.abs();
        if r > 1.0 {
            self.c
        } else if r == 0.0 {
            self.c * self.limit_at_zero()
        } else {
            self.c * profile(self.a, self.b, r)
        }
    }

    fn limit_at_zero(&self) -> f64 {
        let dominant = if self.a != 0.0 { -self.a } else { self.b };
        if dominant > 0.0 {
            f64::INFINITY
        } else if dominant < 0.0 {
            0.0
        } else {
            1.0
        }
    }

    fn pow(&self, s: f64) -> Self {
        Self { a: self.a * s, b: self.b * s, c: self.c.powf(s) }
    }

    pub fn integral(&self, iv: Interval) -> Result<f64> {
        if !iv.is_bounded() {
            return Err(Error::UnboundedDomain(iv));
        }
        if iv.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        if iv.lo < 0.0 {
            total += self.radial_integral((-iv.hi).max(0.0), -iv.lo, iv)?;
        }
        if iv.hi > 0.0 {
            total += self.radial_integral(iv.lo.max(0.0), iv.hi, iv)?;
        }
        Ok(total)
    }

    /// `∫_u^v w(r) dr` for `0 <= u < v`.
    fn radial_integral(&self, u: f64, v: f64, whole: Interval) -> Result<f64> {
        let mut total = 0.0;
        if u < 1.0 {
            total += self.c * profile_integral(self.a, self.b, u, v.min(1.0), whole)?;
        }
        if v > 1.0 {
            total += self.c * (v - u.max(1.0));
        }
        Ok(total)
    }

    /// Essential infimum over the interval (closed-form via unimodality in `log |x|`).
    pub fn essinf(&self, iv: Interval) -> f64 {
        let (m0, m1) = radial_range(iv);
        let mut best = f64::INFINITY;
        if m0 < 1.0 {
            let hi = m1.min(1.0);
            best = best.min(if m0 == 0.0 { self.limit_at_zero() } else { profile(self.a, self.b, m0) });
            best = best.min(profile(self.a, self.b, hi));
            if self.a != 0.0 {
                let x_c = (1.0 - self.b / self.a).exp();
                if m0 < x_c && x_c < hi {
                    best = best.min(profile(self.a, self.b, x_c));
                }
            }
        }
        if m1 > 1.0 {
            best = best.min(1.0);
        }
        self.c * best
    }
}

fn radial_range(iv: Interval) -> (f64, f64) {
    let m1 = iv.lo.abs().max(iv.hi.abs());
    let m0 = if iv.lo <= 0.0 && iv.hi > 0.0 { 0.0 } else { iv.lo.abs().min(iv.hi.abs()) };
    (m0, m1)
}

/// `x^a log(e/x)^b` on `(0, 1]`.
pub fn profile(a: f64, b: f64, x: f64) -> f64 {
    let log_profile = 1.0 - x.ln();
    x.powf(a) * log_profile.powf(b)
}

fn integer_exponent(b: f64) -> Option<u32> {
    (b >= 0.0 && b <= 64.0 && b.fract() == 0.0).then_some(b as u32)
}

fn integrable_at_zero(a: f64, b: f64) -> bool {
    a > -1.0 || (a == -1.0 && b < -1.0)
}

fn quad() -> Quadrature {
    Quadrature::with_tolerance(1e-300, 1e-13)
}

/// `∫_0^t x^a log(e/x)^b dx` for `0 < t <= 1`.
pub fn anchored_profile_integral(a: f64, b: f64, t: f64) -> Result<f64> {
    let alpha = a + 1.0;
    let log_t = 1.0 - t.ln();
    if alpha > 0.0 {
        if let Some(n) = integer_exponent(b) {
            // t^α Σ_k (n!/k!) L^k α^{k-n-1}, summed from k = n downwards.
            let mut term = log_t.powi(n as i32) / alpha;
            let mut sum = term;
            for k in (1..=n).rev() {
                term *= k as f64 / (log_t * alpha);
                sum += term;
            }
            return Ok(t.powf(alpha) * sum);
        }
        let y0 = -t.ln();
        return quad().integrate_to_infinity(|y| (-alpha * y).exp() * (1.0 + y).powf(b), y0);
    }
    if alpha == 0.0 && b < -1.0 {
        return Ok(log_t.powf(b + 1.0) / -(b + 1.0));
    }
    Err(Error::NonIntegrable {
        interval: Interval::new(0.0, t),
        detail: format!("x^{a} log(e/x)^{b} near 0"),
    })
}

/// `∫_u^v x^a log(e/x)^b dx` for `0 <= u < v <= 1`.
pub fn profile_integral(a: f64, b: f64, u: f64, v: f64, whole: Interval) -> Result<f64> {
    if v <= u {
        return Ok(0.0);
    }
    let named = |e: Error| match e {
        Error::NonIntegrable { detail, .. } => Error::NonIntegrable { interval: whole, detail },
        other => other,
    };
    if u == 0.0 {
        return anchored_profile_integral(a, b, v).map_err(named);
    }
    if integrable_at_zero(a, b) && integer_exponent(b).is_some() && u <= 0.5 * v {
        return Ok(anchored_profile_integral(a, b, v)? - anchored_profile_integral(a, b, u)?);
    }
    // x = e^{-y}: integrand e^{-(a+1)y}(1+y)^b on [-ln v, -ln u].
    let alpha = a + 1.0;
    quad().integrate(|y| (-alpha * y).exp() * (1.0 + y).powf(b), -v.ln(), -u.ln())
}

impl SampledWeight {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(invalid(format!("expected {} weight values, got {}", mesh.n_cells(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid(format!("weight must be positive and finite; cell {i} has {}", values[i])));
        }
        Ok(Self { mesh, values })
    }

    fn cell_range(&self, iv: Interval) -> Result<(usize, usize)> {
        let dom = self.mesh.domain();
        if !dom.contains_interval(&iv) {
            return Err(invalid(format!("interval {iv} leaves the sampled domain {dom}")));
        }
        let h = self.mesh.width();
        let n = self.mesh.n_cells() as i64;
        let first = ((iv.lo / h).floor() as i64 + self.mesh.origin()).clamp(0, n) as usize;
        let last = ((iv.hi / h).ceil() as i64 + self.mesh.origin()).clamp(0, n) as usize;
        Ok((first, last))
    }

    pub fn integral(&self, iv: Interval) -> Result<f64> {
        if iv.is_empty() {
            return Ok(0.0);
        }
        let (first, last) = self.cell_range(iv)?;
        Ok((first..last).map(|i| self.values[i] * self.mesh.cell(i).overlap(&iv)).sum())
    }

    pub fn essinf(&self, iv: Interval) -> Result<f64> {
        let (first, last) = self.cell_range(iv)?;
        Ok((first..last)
            .filter(|&i| self.mesh.cell(i).overlap(&iv) > 0.0)
            .map(|i| self.values[i])
            .fold(f64::INFINITY, f64::min))
    }
}

impl ScalarWeight {
    pub fn power_log(a: f64, b: f64, c: f64) -> Result<Self> {
        PowerLog::new(a, b, c).map(Self::PowerLog)
    }

    /// `|x|^a`.
    pub fn power(a: f64) -> Result<Self> {
        PowerLog::power(a).map(Self::PowerLog)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::power_log(0.0, 0.0, c)
    }

    pub fn sampled(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        SampledWeight::new(mesh, values).map(Self::Sampled)
    }

    /// Samples a closed-form weight at the cell centers of `mesh`.
    pub fn sample_on(&self, mesh: Mesh) -> Result<Self> {
        Self::sampled(mesh, self.cell_values(&mesh)?)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::PowerLog(w) => w.eval(x),
            Self::Sampled(w) => w.mesh.cell_of(x).map_or(f64::NAN, |i| w.values[i]),
        }
    }

    /// Value per cell of `mesh`: center values for closed forms, the stored
    /// values for a sampled weight on the same mesh.
    pub fn cell_values(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        match self {
            Self::PowerLog(w) => Ok(mesh.centers().into_iter().map(|x| w.eval(x)).collect()),
            Self::Sampled(w) if w.mesh == *mesh => Ok(w.values.clone()),
            Self::Sampled(_) => Err(invalid("sampled weight lives on a different mesh")),
        }
    }

    pub fn as_mesh_function(&self, mesh: &Mesh) -> Result<MeshFunction> {
        MeshFunction::new(*mesh, self.cell_values(mesh)?)
    }

    /// `w^s`; power-log weights stay in closed form.
    pub fn pow(&self, s: f64) -> Self {
        match self {
            Self::PowerLog(w) => Self::PowerLog(w.pow(s)),
            Self::Sampled(w) => Self::Sampled(SampledWeight {
                mesh: w.mesh,
                values: w.values.iter().map(|v| v.powf(s)).collect(),
            }),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        match self {
            Self::PowerLog(w) => Self::PowerLog(PowerLog { c: w.c * c, ..*w }),
            Self::Sampled(w) => Self::Sampled(SampledWeight {
                mesh: w.mesh,
                values: w.values.iter().map(|v| v * c).collect(),
            }),
        }
    }

    pub fn integral(&self, iv: Interval) -> Result<f64> {
        match self {
            Self::PowerLog(w) => w.integral(iv),
            Self::Sampled(w) => w.integral(iv),
        }
    }

    pub fn average(&self, iv: Interval) -> Result<f64> {
        if !(iv.len() > 0.0) {
            return Err(Error::Degenerate { interval: iv, detail: "zero-length interval".into() });
        }
        Ok(self.integral(iv)? / iv.len())
    }

    pub fn essinf(&self, iv: Interval) -> Result<f64> {
        match self {
            Self::PowerLog(w) => Ok(w.essinf(iv)),
            Self::Sampled(w) => w.essinf(iv),
        }
    }

    /// Mesh of a sampled weight, if any.
    pub fn mesh(&self) -> Option<&Mesh> {
        match self {
            Self::PowerLog(_) => None,
            Self::Sampled(w) => Some(&w.mesh),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_quadrature_for_integer_log_power() {
        for &(a, b) in &[(-0.9, 1.0), (0.5, 2.0), (-0.5, 0.0), (1.5, 3.0)] {
            for &t in &[1e-6, 0.01, 0.3, 1.0] {
                let closed = anchored_profile_integral(a, b, t).unwrap();
                let alpha: f64 = a + 1.0;
                let oracle = quad()
                    .integrate_to_infinity(|y| (-alpha * y).exp() * (1.0 + y).powf(b), -t.ln())
                    .unwrap();
                assert!((closed - oracle).abs() <= 1e-10 * oracle, "a={a} b={b} t={t}");
            }
        }
    }

    #[test]
    fn delta_weight_parts_identity() {
        // (1/t)∫_0^t log(e/x) x^{δ-1} dx = (1/δ) log(e/t) t^{δ-1} + (1/δ²) t^{δ-1}.
        let delta = 0.1f64;
        for &t in &[0.01, 0.25, 1.0] {
            let avg = anchored_profile_integral(delta - 1.0, 1.0, t).unwrap() / t;
            let l = 1.0 - t.ln();
            let expected = l * t.powf(delta - 1.0) / delta + t.powf(delta - 1.0) / (delta * delta);
            assert!((avg - expected).abs() <= 1e-13 * expected);
        }
        let at_one = anchored_profile_integral(delta - 1.0, 1.0, 1.0).unwrap();
        assert!((at_one - 110.0).abs() < 1e-12);
    }

    #[test]
    fn borderline_log_integrable() {
        // ∫_0^t dx / (x log(e/x)^2) = 1 / log(e/t).
        let v = anchored_profile_integral(-1.0, -2.0, 0.5).unwrap();
        assert!((v - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!(anchored_profile_integral(-1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn even_weight_integral_splits_at_zero_and_one() {
        let w = PowerLog::new(0.5, 0.0, 2.0).unwrap();
        let v = w.integral(Interval::new(-1.0, 3.0)).unwrap();
        // 2 * (2/3) on each side of 0, plus 2 * 2 beyond 1
        assert!((v - (8.0 / 3.0 + 4.0)).abs() < 1e-14);
        let neg = w.pow(-3.0);
        assert!(matches!(
            neg.integral(Interval::new(-0.5, 0.5)),
            Err(Error::NonIntegrable { .. })
        ));
        assert!(neg.integral(Interval::new(0.25, 0.5)).unwrap() > 0.0);
    }

    #[test]
    fn essinf_candidates() {
        let w = PowerLog::new(-0.9, 1.0, 1.0).unwrap();
        assert_eq!(w.essinf(Interval::new(0.0, 0.5)), w.eval(0.5));
        assert_eq!(w.essinf(Interval::new(-2.0, 0.5)), 1.0);
        let up = PowerLog::new(0.5, 0.0, 1.0).unwrap();
        assert_eq!(up.essinf(Interval::new(-0.1, 0.5)), 0.0);
        // a < 0, b < 0 has an interior minimum at e^{1 - b/a}.
        let v = PowerLog::new(-0.5, -2.0, 1.0).unwrap();
        let xc = (1.0f64 - 4.0).exp();
        let m = v.essinf(Interval::new(1e-4, 0.9));
        assert!((m - v.eval(xc)).abs() < 1e-15);
        for k in 1..100 {
            let x = 1e-4 + (0.9 - 1e-4) * k as f64 / 100.0;
            assert!(v.eval(x) >= m);
        }
    }

    #[test]
    fn sampled_integrals_are_cell_sums() {
        let mesh = Mesh::new(1.0, 2).unwrap();
        let w = SampledWeight::new(mesh, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(w.integral(Interval::new(0.0, 0.5)).unwrap(), 2.75);
        assert_eq!(w.essinf(Interval::new(-0.5, 0.5)).unwrap(), 3.0);
        assert!(w.integral(Interval::new(0.0, 2.0)).is_err());
    }
}
