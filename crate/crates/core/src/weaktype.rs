//! Weak-type quotients, the dual `E/E'` functional, proof-exponent
//! bookkeeping and empirical bound checks.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{CellSet, MeshFunction};
use crate::operators::{distribution, multiplier_apply, Operator};
use crate::sparse::exceptional_set;
use crate::weights::{sharp_rh_exponent, ScalarWeight, SearchSpace};

/// `sup_λ λ^q |{|output| > λ}| / ‖f‖_p^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakTypeQuotient {
    pub operator: String,
    pub p: f64,
    pub q: f64,
    pub best_lambda: f64,
    pub quotient: f64,
    pub f_norm: f64,
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0) || !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidExponent(format!("need 1 <= p <= q < ∞, got p={p}, q={q}")));
    }
    Ok(())
}

/// Exact quotient of a step output: the supremum is approached as `λ`
/// increases to one of the output's values.
pub fn weak_quotient(operator: &str, output: &MeshFunction, f: &MeshFunction, p: f64, q: f64) -> Result<WeakTypeQuotient> {
    check_exponents(p, q)?;
    let f_norm = f.lp_norm(p);
    if !(f_norm > 0.0) {
        return Err(invalid("‖f‖_p vanishes"));
    }
    let (sup, best_lambda) = distribution(output).sup_weighted(q);
    Ok(WeakTypeQuotient {
        operator: operator.to_string(),
        p,
        q,
        best_lambda,
        quotient: sup / f_norm.powf(q),
        f_norm,
    })
}

/// Quotient of `w^{1/p} T(f w^{-1/p})` (with `q = p`), or of `w T(f w^{-1})`
/// for the fractional form (`q > p`).
pub fn multiplier_weak_quotient(op: Operator<'_>, w: &ScalarWeight, p: f64, q: f64, f: &MeshFunction) -> Result<WeakTypeQuotient> {
    check_exponents(p, q)?;
    let power = if q == p { p } else { 1.0 };
    let out = multiplier_apply(op, w, power, f)?;
    weak_quotient(op.name(), &out, f, p, q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualEstimate {
    /// `|E|^{1/p - 1} ∫_{E'} |output|`.
    pub value: f64,
    pub e_measure: f64,
    pub e_prime_measure: f64,
    pub omega_measure: f64,
}

/// The duality functional with `E' = E \ Ω`, `Ω = {M^D(|f|^p) > K/|E|}`.
/// `f` must be normalized in `L^p`.
pub fn dual_weak_estimate(output: &MeshFunction, f: &MeshFunction, p: f64, e: &CellSet, k: f64, shift: u8) -> Result<DualEstimate> {
    if output.mesh != f.mesh {
        return Err(invalid("output and f live on different meshes"));
    }
    let x = exceptional_set(f, p, e, k, shift)?;
    let h = f.mesh.width();
    let pairing: f64 = x.e_prime.iter().map(|i| output.values[i as usize].abs() * h).sum();
    Ok(DualEstimate {
        value: x.e_measure.powf(1.0 / p - 1.0) * pairing,
        e_measure: x.e_measure,
        e_prime_measure: x.e_prime_measure,
        omega_measure: x.omega_measure,
    })
}

/// The exponents fixed in the weak-type argument: `r' = s ν' + 1` for the
/// working exponent `s` (`p`, or `q` in the fractional case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProofConstants {
    pub exponent: f64,
    pub nu: f64,
    pub nu_conj: f64,
    pub r_conj: f64,
    pub r: f64,
    /// `(s r)'`.
    pub sr_conj: f64,
    /// `(s ν)'`.
    pub snu_conj: f64,
    /// `(r')^r`.
    pub r_conj_pow_r: f64,
}

fn conj(x: f64) -> f64 {
    x / (x - 1.0)
}

pub fn proof_constants(exponent: f64, nu: f64) -> Result<ProofConstants> {
    if !(exponent >= 1.0) || !exponent.is_finite() {
        return Err(Error::InvalidExponent(format!("need exponent >= 1, got {exponent}")));
    }
    if !(nu > 1.0) || !nu.is_finite() {
        return Err(Error::InvalidExponent(format!("reverse Hölder exponent must exceed 1, got {nu}")));
    }
    let nu_conj = conj(nu);
    let r_conj = exponent * nu_conj + 1.0;
    let r = conj(r_conj);
    let c = ProofConstants {
        exponent,
        nu,
        nu_conj,
        r_conj,
        r,
        sr_conj: conj(exponent * r),
        snu_conj: conj(exponent * nu),
        r_conj_pow_r: r_conj.powf(r),
    };
    if !(c.r > 1.0 && c.r < nu * (1.0 + 1e-9)) {
        return Err(Error::Unresolved(format!("r = {} is not in (1, ν)", c.r)));
    }
    if (c.sr_conj - c.r * c.snu_conj).abs() > 1e-12 * c.sr_conj {
        return Err(Error::Unresolved(format!("(sr)' = {} but r (sν)' = {}", c.sr_conj, c.r * c.snu_conj)));
    }
    if !c.r_conj_pow_r.is_finite() {
        return Err(Error::Unresolved("(r')^r overflows".into()));
    }
    Ok(c)
}

/// [`proof_constants`] with `ν` from the sharp reverse Hölder search.
pub fn proof_constants_for(w: &ScalarWeight, exponent: f64, search: &SearchSpace) -> Result<ProofConstants> {
    proof_constants(exponent, sharp_rh_exponent(w, search)?)
}

/// Which characteristic product a quotient is normalized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// `[w]_{A_p} [w]_{A_∞}^p`.
    Scalar,
    /// `[w]_{A_{p,q}} [w^q]_{A_∞}^q`.
    Fractional,
    /// `[W]_{𝒜_p} [W]_{A_∞^sc}^p`.
    Matrix,
}

impl BoundKind {
    pub fn product(&self, p: f64, q: f64, characteristic: f64, ainfty: f64) -> f64 {
        match self {
            BoundKind::Scalar | BoundKind::Matrix => characteristic * ainfty.powf(p),
            BoundKind::Fractional => characteristic * ainfty.powf(q),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCase {
    pub label: String,
    pub quotient: f64,
    pub characteristic: f64,
    pub ainfty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub p: f64,
    pub q: f64,
    /// `quotient / product` per case.
    pub constants: Vec<f64>,
    pub max_constant: f64,
    pub witness: String,
}

/// Empirical constants `quotient / product` and their maximum.
pub fn bound_check(kind: BoundKind, p: f64, q: f64, cases: &[BoundCase]) -> Result<BoundReport> {
    check_exponents(p, q)?;
    if cases.is_empty() {
        return Err(invalid("bound check needs at least one case"));
    }
    let constants: Vec<f64> =
        cases.iter().map(|c| c.quotient / kind.product(p, q, c.characteristic, c.ainfty)).collect();
    let mut best = 0;
    for (i, c) in constants.iter().enumerate() {
        if c.is_nan() {
            return Err(Error::Unresolved(format!("case {} gives a NaN constant", cases[i].label)));
        }
        if *c > constants[best] {
            best = i;
        }
    }
    Ok(BoundReport { kind, p, q, max_constant: constants[best], witness: cases[best].label.clone(), constants })
}
