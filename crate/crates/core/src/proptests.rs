//! Property tests over seeded random inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;

use crate::grid::{Mesh, MeshFunction};
use crate::matrix::{alt_norm_sum, op_norm};
use crate::operators::{dyadic_maximal, hl_maximal};
use crate::sample::{seeded_rng, StepSampler};
use crate::sparse::{build_sparse_family, cz_decompose, sparse_apply, verify_sparseness};
use crate::weaktype::{proof_constants, weak_quotient};
use crate::weights::{ainfty_characteristic, ap_characteristic, ScalarWeight, SearchSpace};

fn mesh() -> Mesh {
    Mesh::new(4.0, 5).unwrap()
}

fn step(seed: u64, nonnegative: bool) -> MeshFunction {
    let sampler = if nonnegative { StepSampler::default().nonnegative() } else { StepSampler::default() };
    sampler.sample(&mut seeded_rng(seed), mesh()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quotient_is_scale_invariant(seed in any::<u64>(), shift in 0u8..3, k in -3i32..4, p in 1.0f64..4.0) {
        let f = step(seed, false);
        let c = 2f64.powi(k);
        let cf = f.scale(c);
        let a = weak_quotient("maximal", &dyadic_maximal(&f, shift).unwrap(), &f, p, p).unwrap();
        let b = weak_quotient("maximal", &dyadic_maximal(&cf, shift).unwrap(), &cf, p, p).unwrap();
        prop_assert!((a.quotient - b.quotient).abs() <= 1e-12 * a.quotient);
        prop_assert!((b.best_lambda - c * a.best_lambda).abs() <= 1e-12 * b.best_lambda);
    }

    #[test]
    fn stopping_family_is_sparse_and_dominates(seed in any::<u64>(), shift in 0u8..3) {
        let f = step(seed, true);
        let fam = build_sparse_family(&f, shift, None).unwrap();
        let rep = verify_sparseness(&fam);
        prop_assert!(rep.is_valid(), "{:?}", rep.violations);
        prop_assert!(rep.min_ratio >= 0.5);
        let md = dyadic_maximal(&f, shift).unwrap();
        let av = sparse_apply(&fam, &f, 0.0).unwrap();
        for (m, a) in md.values.iter().zip(&av.values) {
            prop_assert!(*m <= 4.0 * a);
        }
    }

    #[test]
    fn maximal_dominates_input(seed in any::<u64>()) {
        let f = step(seed, false);
        let m = hl_maximal(&f).unwrap();
        for t in 0..3 {
            let d = dyadic_maximal(&f, t).unwrap();
            for ((x, y), v) in m.values.iter().zip(&d.values).zip(&f.values) {
                prop_assert!(x >= y && *y >= v.abs());
            }
        }
    }

    #[test]
    fn cz_decomposition_holds(seed in any::<u64>(), shift in 0u8..3, e in -2i32..3, p in 1i32..4) {
        let h = step(seed, true).map(|v| v.powi(p));
        let cz = cz_decompose(&h, 2f64.powi(e), shift).unwrap();
        prop_assert!(cz.violations().is_empty(), "{:?}", cz.violations());
        prop_assert!(cz.omega_measure() <= h.integral() / cz.height * (1.0 + 1e-12));
    }

    #[test]
    fn operator_norm_sandwich(entries in prop::array::uniform4(-8.0f64..8.0)) {
        let m = DMatrix::from_row_slice(2, 2, &entries);
        let n = op_norm(&m);
        let svd = m.singular_values().max();
        prop_assert!((n - svd).abs() <= 1e-12 * (1.0 + svd));
        let widest = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(widest <= n * (1.0 + 1e-12));
        prop_assert!(n <= alt_norm_sum(&m) * (1.0 + 1e-12));
        prop_assert!((op_norm(&m.transpose()) - n).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn proof_exponents_are_consistent(exponent in 1.0f64..8.0, nu in 1.01f64..64.0) {
        let c = proof_constants(exponent, nu).unwrap();
        prop_assert!(c.r > 1.0 && c.r < nu);
        prop_assert!((1.0 / c.r + 1.0 / c.r_conj - 1.0).abs() < 1e-12);
        prop_assert!((c.sr_conj - c.r * c.snu_conj).abs() <= 1e-12 * c.sr_conj);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn characteristics_are_at_least_one(t in -0.9f64..0.9, p in 1.2f64..4.0) {
        // |x|^a is in A_p exactly for -1 < a < p - 1.
        let a = if t < 0.0 { t } else { t * (p - 1.0).min(1.0) };
        let w = ScalarWeight::power(a).unwrap();
        let search = SearchSpace::new(Mesh::new(1.0, 4).unwrap());
        let ap = ap_characteristic(&w, p, &search).unwrap().value;
        let ainf = ainfty_characteristic(&w, &search).unwrap().value;
        prop_assert!(ap >= 1.0 - 1e-9);
        prop_assert!(ainf >= 1.0 - 1e-9);
    }
}
