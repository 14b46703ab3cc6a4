//! Distribution functions, maximal operators, fractional operators, the Hilbert
//! transform, and the multiplier form `w^{1/p} T(f w^{-1/p})`.

mod distribution;
mod fractional;
mod hilbert;
mod maximal;

pub use crate::grid::MeshFunction;
pub use distribution::{distribution, weak_lp_norm, DistributionCurve};
pub use fractional::{fractional_integral, riesz_cell_integral};
pub use hilbert::{hilbert_transform, HilbertIntegrand, HilbertTransform};
pub use maximal::{
    dyadic_maximal, dyadic_maximal_on, fractional_maximal, fractional_maximal_on, hl_fractional_maximal,
    hl_maximal,
};

use crate::error::{invalid, Result};
use crate::sparse::{sparse_apply, SparseFamily};
use crate::weights::ScalarWeight;

/// The operators `T` the multiplier form is exercised with.
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    Identity,
    /// Maximum over the three shifted dyadic maximal operators.
    Maximal,
    DyadicMaximal { shift: u8 },
    FractionalMaximal { alpha: f64 },
    FractionalIntegral { alpha: f64 },
    Hilbert,
    Sparse(&'a SparseFamily),
    FractionalSparse(&'a SparseFamily, f64),
}

impl Operator<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Identity => "identity",
            Operator::Maximal => "maximal",
            Operator::DyadicMaximal { .. } => "dyadic-maximal",
            Operator::FractionalMaximal { .. } => "fractional-maximal",
            Operator::FractionalIntegral { .. } => "fractional-integral",
            Operator::Hilbert => "hilbert",
            Operator::Sparse(_) => "sparse",
            Operator::FractionalSparse(..) => "fractional-sparse",
        }
    }

    pub fn apply(&self, f: &MeshFunction) -> Result<MeshFunction> {
        match *self {
            Operator::Identity => Ok(f.clone()),
            Operator::Maximal => hl_maximal(f),
            Operator::DyadicMaximal { shift } => dyadic_maximal(f, shift),
            Operator::FractionalMaximal { alpha } => hl_fractional_maximal(f, alpha),
            Operator::FractionalIntegral { alpha } => fractional_integral(f, alpha),
            Operator::Hilbert => hilbert_transform(HilbertIntegrand::from_mesh_function(f))?.on_mesh(&f.mesh),
            Operator::Sparse(s) => sparse_apply(s, f, 0.0),
            Operator::FractionalSparse(s, alpha) => sparse_apply(s, f, alpha),
        }
    }
}

/// `x -> w(x)^{1/p} T(f w^{-1/p})(x)`, with `w` taken at cell centers.
/// The output keeps its sign; weak norms use its magnitude.
pub fn multiplier_apply(op: Operator<'_>, w: &ScalarWeight, p: f64, f: &MeshFunction) -> Result<MeshFunction> {
    if !(p >= 1.0) {
        return Err(crate::Error::InvalidExponent(format!("need p >= 1, got {p}")));
    }
    let wc = w.cell_values(&f.mesh)?;
    let mut folded = f.clone();
    for (i, v) in folded.values.iter_mut().enumerate() {
        if *v != 0.0 {
            if !(wc[i] > 0.0 && wc[i].is_finite()) {
                return Err(invalid(format!("weight is {} on cell {i} of the support", wc[i])));
            }
            *v *= wc[i].powf(-1.0 / p);
        }
    }
    let mut out = op.apply(&folded)?;
    for (o, wi) in out.values.iter_mut().zip(&wc) {
        *o *= wi.powf(1.0 / p);
    }
    Ok(out)
}
