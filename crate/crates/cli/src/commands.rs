use clap::ValueEnum;
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use weaklab_core::appendix::{loglog_slope, lower_bound_experiment, AppendixConfig};
use weaklab_core::matrix::{
    christ_goldberg_maximal, directional_rh_exponent, matrix_ap_characteristic, norm_directions, op_norm,
    reducing_matrix, scalar_ainfty_sup, scalar_restriction_characteristic, sharp_rhi_matrix_bound, ReducerKind,
    Restriction, VectorMeshFunction,
};
use weaklab_core::operators::{dyadic_maximal, Operator};
use weaklab_core::sample::{random_matrix_weight, seeded_rng, StepSampler};
use weaklab_core::sparse::{build_sparse_family, cz_decompose, sparse_apply, verify_sparseness};
use weaklab_core::weaktype::{bound_check, multiplier_weak_quotient, proof_constants, proof_constants_for, weak_quotient, BoundCase, BoundKind};
use weaklab_core::weights::{
    a1_characteristic, ainfty_characteristic, ap_characteristic, apq_characteristic, rh_characteristic,
    sharp_rh_exponent, CharacteristicReport,
};
use weaklab_core::{Mesh, MeshFunction, ScalarWeight, SearchSpace};

use crate::config::*;
use crate::table::{Cell, Table};
use crate::CliError;

fn mesh(args: &MeshArgs, file: &FileConfig, radius: f64, level: u32) -> Result<Mesh, CliError> {
    Ok(Mesh::new(pick(args.radius, file.radius, radius), pick(args.level, file.level, level))?)
}

/// Independent stream per trial.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(trial as u64);
    rng
}

fn kind_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn witness_cells(r: &CharacteristicReport) -> [Cell; 4] {
    [
        r.witness.lo.into(),
        r.witness.hi.into(),
        r.witness_cube.map(|c| c.level as i64).into(),
        r.witness_cube.map(|c| c.grid.shift(0) as i64).into(),
    ]
}

pub fn characteristic(a: &CharacteristicArgs, file: &FileConfig) -> Result<Table, CliError> {
    let kind = pick(a.kind, file.kind, Kind::Ap);
    let p = pick(a.p, file.p, 2.0);
    let anchored = a.anchored || file.anchored.unwrap_or(false);
    let search = SearchSpace::new(mesh(&a.mesh, file, 1.0, 8)?).with_anchored(anchored);
    let weights = pick_list(&a.weight, &file.weight, &["power:a=-0.5".to_string()]);
    let parsed: Vec<ScalarWeight> = weights.iter().map(|d| parse_weight(d)).collect::<Result<_, _>>()?;
    let q = a.q.or(file.q);
    if kind == Kind::Apq {
        exponent_triple(p, Some(q.ok_or_else(|| CliError::Usage("--kind apq needs --q".into()))?), None)?;
    }
    let s = pick(a.s, file.s, 2.0);
    let rows: Vec<Result<Vec<Cell>, CliError>> = parsed
        .par_iter()
        .zip(&weights)
        .map(|(w, desc)| {
            let (pc, qc, report) = match kind {
                Kind::Ap => (Some(p), None, ap_characteristic(w, p, &search)?),
                Kind::A1 => (None, None, a1_characteristic(w, &search)?),
                Kind::Ainfty => (None, None, ainfty_characteristic(w, &search)?),
                Kind::Rh => (None, Some(s), rh_characteristic(w, s, &search)?),
                Kind::Apq => (Some(p), q, apq_characteristic(w, p, q.expect("checked"), &search)?),
                Kind::SharpRh => {
                    let nu = sharp_rh_exponent(w, &search)?;
                    let mut row = vec![desc.as_str().into(), kind_name(&kind).into(), Cell::Empty, Cell::Empty, nu.into()];
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                    return Ok(row);
                }
            };
            let mut row = vec![desc.as_str().into(), kind_name(&kind).into(), pc.into(), qc.into(), report.value.into()];
            row.extend(witness_cells(&report));
            row.push(report.cubes_scanned.into());
            Ok(row)
        })
        .collect();
    let mut t = Table::new("characteristic");
    for (i, row) in rows.into_iter().enumerate() {
        t.push(vec![i as i64], row?);
    }
    Ok(t)
}

fn fold(f: &MeshFunction, w: &[f64], power: f64) -> Result<MeshFunction, CliError> {
    Ok(MeshFunction::new(f.mesh, f.values.iter().zip(w).map(|(v, c)| v.abs() * c.powf(-power)).collect())?)
}

pub fn weaktype(a: &WeaktypeArgs, file: &FileConfig, seed: u64) -> Result<Table, CliError> {
    let op = pick(a.operator, file.operator, OperatorKind::Sparse);
    let (p, q, alpha) = exponent_triple(pick(a.p, file.p, 2.0), a.q.or(file.q), a.alpha.or(file.alpha))?;
    if op.is_fractional() != (alpha > 0.0) {
        return Err(CliError::Usage(format!(
            "invalid exponent relation: operator {} needs {}",
            kind_name(&op),
            if alpha > 0.0 { "α = 0 (q = p)" } else { "α > 0 (--alpha or --q)" }
        )));
    }
    let m = mesh(&a.mesh, file, 4.0, 6)?;
    let search = SearchSpace::new(m);
    let trials = pick(a.trials, file.trials, 20);
    let default_weights: Vec<String> = if op.is_fractional() {
        ["power:a=-0.2", "power:a=0", "power:a=0.2"].map(String::from).to_vec()
    } else {
        ["power:a=-0.5", "power:a=0", "power:a=0.5"].map(String::from).to_vec()
    };
    let weights = pick_list(&a.weight, &file.weight, &default_weights);
    let kind = if op.is_fractional() { BoundKind::Fractional } else { BoundKind::Scalar };
    let mut prepared = Vec::new();
    for desc in &weights {
        let w = parse_weight(desc)?;
        let (characteristic, ainfty) = if op.is_fractional() {
            (apq_characteristic(&w, p, q, &search)?.value, ainfty_characteristic(&w.pow(q), &search)?.value)
        } else if p == 1.0 {
            (a1_characteristic(&w, &search)?.value, ainfty_characteristic(&w, &search)?.value)
        } else {
            (ap_characteristic(&w, p, &search)?.value, ainfty_characteristic(&w, &search)?.value)
        };
        let cells = w.cell_values(&m)?;
        prepared.push((desc.clone(), w, cells, characteristic, ainfty));
    }
    let jobs: Vec<(usize, usize)> = (0..prepared.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let sampler = StepSampler::default();
    let results: Vec<Result<(usize, usize, BoundCase, f64), CliError>> = jobs
        .par_iter()
        .map(|&(i, trial)| {
            let (desc, w, cells, characteristic, ainfty) = &prepared[i];
            let f = sampler.sample(&mut trial_rng(seed, trial), m)?;
            let shift = (trial % 3) as u8;
            let power = if op.is_fractional() { 1.0 } else { 1.0 / p };
            let family = match op {
                OperatorKind::Sparse | OperatorKind::FractionalSparse => {
                    Some(build_sparse_family(&fold(&f, cells, power)?, shift, None)?)
                }
                _ => None,
            };
            let operator = match op {
                OperatorKind::Identity => Operator::Identity,
                OperatorKind::Maximal => Operator::Maximal,
                OperatorKind::Hilbert => Operator::Hilbert,
                OperatorKind::FractionalMaximal => Operator::FractionalMaximal { alpha },
                OperatorKind::FractionalIntegral => Operator::FractionalIntegral { alpha },
                OperatorKind::Sparse => Operator::Sparse(family.as_ref().expect("built")),
                OperatorKind::FractionalSparse => Operator::FractionalSparse(family.as_ref().expect("built"), alpha),
            };
            let input = if family.is_some() { f.abs() } else { f };
            let r = multiplier_weak_quotient(operator, w, p, q, &input)?;
            let case = BoundCase {
                label: format!("{desc} trial {trial}"),
                quotient: r.quotient,
                characteristic: *characteristic,
                ainfty: *ainfty,
            };
            Ok((i, trial, case, r.best_lambda))
        })
        .collect();
    let mut t = Table::new("weaktype");
    let mut cases = Vec::new();
    for res in results {
        let (i, trial, case, lambda) = res?;
        let constant = case.quotient / kind.product(p, q, case.characteristic, case.ainfty);
        t.push(
            vec![i as i64, trial as i64],
            vec![
                weights[i].as_str().into(),
                trial.into(),
                kind_name(&op).into(),
                p.into(),
                q.into(),
                case.quotient.into(),
                lambda.into(),
                case.characteristic.into(),
                case.ainfty.into(),
                constant.into(),
            ],
        );
        cases.push(case);
    }
    if !cases.is_empty() {
        let report = bound_check(kind, p, q, &cases)?;
        t.note("max_constant", report.max_constant);
        t.note("witness", report.witness);
    }
    Ok(t)
}

pub fn lowerbound(a: &LowerboundArgs, file: &FileConfig) -> Result<Table, CliError> {
    let deltas = pick_list(&a.delta, &file.delta, &[0.05, 0.1, 0.2]);
    for d in &deltas {
        check_delta(*d)?;
    }
    let config = AppendixConfig {
        per_octave: pick(a.per_octave, file.per_octave, AppendixConfig::default().per_octave),
        ..AppendixConfig::default()
    };
    let reports = deltas.par_iter().map(|&d| lower_bound_experiment(d, &config)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("lowerbound");
    for (i, r) in reports.iter().enumerate() {
        t.push(
            vec![i as i64],
            vec![
                r.delta.into(),
                r.a1_char.into(),
                r.sharp_rh_nu.into(),
                r.lambda_star.into(),
                r.quotient.into(),
                r.closed_quotient.into(),
                r.closed_lambda.into(),
                r.ratio_to_sqrt_a1.into(),
                r.chain_bound.into(),
                r.mesh_cells.into(),
                r.cells_in_level_set.into(),
            ],
        );
    }
    if reports.len() >= 2 {
        let inv: Vec<f64> = reports.iter().map(|r| 1.0 / r.delta).collect();
        let q: Vec<f64> = reports.iter().map(|r| r.quotient).collect();
        let a1: Vec<f64> = reports.iter().map(|r| r.a1_char).collect();
        t.note("slope_quotient_vs_inverse_delta", loglog_slope(&inv, &q)?);
        t.note("slope_quotient_vs_a1", loglog_slope(&a1, &q)?);
    }
    Ok(t)
}

pub fn sparse_check(a: &SparseCheckArgs, file: &FileConfig, seed: u64) -> Result<Table, CliError> {
    let trials = pick(a.trials, file.trials, 100);
    let p = pick(a.p, file.p, 2.0);
    if !(p >= 1.0 && p.fract() == 0.0 && p <= 8.0) {
        return Err(CliError::Usage(format!("invalid exponent relation: exact checks need an integer 1 <= p <= 8, got {p}")));
    }
    let m = mesh(&a.mesh, file, 4.0, 6)?;
    let sampler = StepSampler::default();
    let rows: Vec<Result<Vec<Cell>, CliError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let f = sampler.sample(&mut rng, m)?.abs();
            let shift = (trial % 3) as u8;
            let mut violations: Vec<&str> = Vec::new();
            let fam = build_sparse_family(&f, shift, None)?;
            let rep = verify_sparseness(&fam);
            if !rep.is_valid() {
                violations.push("sparseness");
            }
            let md = dyadic_maximal(&f, shift)?;
            let av = sparse_apply(&fam, &f, 0.0)?;
            let ratio = md
                .values
                .iter()
                .zip(&av.values)
                .map(|(x, y)| if *x == 0.0 { 0.0 } else { x / y })
                .fold(0.0, f64::max);
            if ratio > 4.0 {
                violations.push("maximal-domination");
            }
            let height = [0.25, 0.5, 1.0, 2.0][rng.random_range(0..4)];
            let cz = cz_decompose(&f.map(|v| v.powi(p as i32)), height, shift)?;
            violations.extend(cz.violations());
            let cg = cz.grid()?;
            let (ph, pg) = (cg.pyramid(&cz.h.values), cg.pyramid(&cz.g.values));
            let identity = (0..=cg.top()).all(|j| {
                (0..cg.blocks(j)).all(|b| {
                    let q = cg.cube(j, b);
                    cz.cubes.iter().any(|s| s.contains(&q)) || ph.sum(j, b) == pg.sum(j, b)
                })
            });
            if !identity {
                violations.push("average-identity");
            }
            Ok(vec![
                trial.into(),
                (shift as i64).into(),
                fam.len().into(),
                rep.min_ratio.into(),
                ratio.into(),
                height.into(),
                cz.cubes.len().into(),
                cz.omega_measure().into(),
                violations.join(";").into(),
            ])
        })
        .collect();
    let mut t = Table::new("sparse-check");
    let mut failed = 0;
    for (trial, row) in rows.into_iter().enumerate() {
        let row = row?;
        if row[8] != Cell::Str(String::new()) {
            failed += 1;
            t.failures.push(format!("trial {trial}"));
        }
        t.push(vec![trial as i64], row);
    }
    t.note("trials", trials);
    t.note("failed", failed as usize);
    Ok(t)
}

fn vector_step(rng: &mut ChaCha8Rng, m: Mesh) -> Result<VectorMeshFunction, CliError> {
    let sampler = StepSampler::default();
    let (a, b) = (sampler.sample(rng, m)?, sampler.sample(rng, m)?);
    let values = (0..m.n_cells()).map(|i| DVector::from_vec(vec![a.values[i], b.values[i]])).collect();
    Ok(VectorMeshFunction::new(m, values)?)
}

pub fn matrix_check(a: &MatrixCheckArgs, file: &FileConfig, seed: u64) -> Result<Table, CliError> {
    let trials = pick(a.trials, file.trials, 10);
    let p = pick(a.p, file.p, 2.0);
    if !(p > 1.0) || !p.is_finite() {
        return Err(CliError::Usage(format!("invalid exponent relation: need 1 < p < ∞, got {p}")));
    }
    let dirs = pick(a.dirs, file.dirs, 16).max(1);
    let m = mesh(&a.mesh, file, 1.0, 4)?;
    let search = SearchSpace::new(m);
    let cubes: Vec<_> = search.snapped_cubes()?.into_iter().filter_map(|c| c.cells).collect();
    let d = 2.0f64;
    let rows: Vec<Result<(Vec<Cell>, BoundCase), CliError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let w = random_matrix_weight(&mut rng, m, 1.0, 4)?;
            let ap = matrix_ap_characteristic(&w, p, &search)?.value;
            let (ainf, _) = scalar_ainfty_sup(&w, Restriction::Ap { p }, dirs, &search)?;
            let (mut sup, mut worst) = (0.0f64, 1.0f64);
            let mut primal = Vec::with_capacity(cubes.len());
            for q in &cubes {
                let r = reducing_matrix(&w, q, ReducerKind::Primal { p })?;
                let rd = reducing_matrix(&w, q, ReducerKind::Dual { p })?;
                sup = sup.max(op_norm(&(&r.matrix * &rd.matrix)));
                worst = worst.max(r.ratio()).max(rd.ratio());
                primal.push(r);
            }
            let ratio = sup / ap.powf(1.0 / p);
            let factor = ratio.max(1.0 / ratio);
            let mut restriction = 0.0f64;
            for v in norm_directions(2, dirs) {
                restriction = restriction.max(scalar_restriction_characteristic(&w, p, &v, &search)?.value / ap);
            }
            let nu = directional_rh_exponent(&w, p, dirs, &search)?.min(1.0 + 1.0 / ainf.value);
            let mut rhi = 0.0f64;
            for r in &primal {
                rhi = rhi.max(sharp_rhi_matrix_bound(&w, p, r, nu)?.op_average);
            }
            let f = vector_step(&mut rng, m)?;
            let out = christ_goldberg_maximal(&w, p, &f, &[0, 1, 2])?;
            let quotient = weak_quotient("matrix-maximal", &out, &f.norms(), p, p)?.quotient;
            let case = BoundCase { label: format!("trial {trial}"), quotient, characteristic: ap, ainfty: ainf.value };
            let constant = quotient / BoundKind::Matrix.product(p, p, ap, ainf.value);
            let mut violations = Vec::new();
            if restriction > 1.0 + 1e-9 {
                violations.push("restriction");
            }
            if factor > 4.0 {
                violations.push("reducer-product");
            }
            if rhi > 4.0 * d {
                violations.push("reverse-holder");
            }
            let row = vec![
                trial.into(),
                ap.into(),
                ainf.value.into(),
                factor.into(),
                worst.into(),
                restriction.into(),
                nu.into(),
                rhi.into(),
                quotient.into(),
                constant.into(),
                violations.join(";").into(),
            ];
            Ok((row, case))
        })
        .collect();
    let mut t = Table::new("matrix-check");
    let mut cases = Vec::new();
    for (trial, res) in rows.into_iter().enumerate() {
        let (row, case) = res?;
        if row[10] != Cell::Str(String::new()) {
            t.failures.push(format!("trial {trial}"));
        }
        t.push(vec![trial as i64], row);
        cases.push(case);
    }
    if !cases.is_empty() {
        let report = bound_check(BoundKind::Matrix, p, p, &cases)?;
        t.note("max_constant", report.max_constant);
        t.note("witness", report.witness);
    }
    Ok(t)
}

pub fn constants(a: &ConstantsArgs, file: &FileConfig) -> Result<Table, CliError> {
    let p = pick(a.p, file.p, 2.0);
    exponent_triple(p, None, None)?;
    let weights = pick_list(&a.weight, &file.weight, &[]);
    let default_nu: &[f64] = if weights.is_empty() { &[1.1, 1.5, 2.0, 4.0] } else { &[] };
    let nus = pick_list(&a.nu, &file.nu, default_nu);
    let search = SearchSpace::new(mesh(&a.mesh, file, 1.0, 8)?).with_anchored(true);
    let mut sets = Vec::new();
    for nu in &nus {
        sets.push(("nu".to_string(), proof_constants(p, *nu)?));
    }
    let computed = weights
        .par_iter()
        .map(|d| -> Result<_, CliError> { Ok((d.clone(), proof_constants_for(&parse_weight(d)?, p, &search)?)) })
        .collect::<Result<Vec<_>, _>>()?;
    sets.extend(computed);
    let mut t = Table::new("constants");
    for (i, (source, c)) in sets.into_iter().enumerate() {
        t.push(
            vec![i as i64],
            vec![
                source.into(),
                c.exponent.into(),
                c.nu.into(),
                c.nu_conj.into(),
                c.r_conj.into(),
                c.r.into(),
                c.sr_conj.into(),
                c.snu_conj.into(),
                c.r_conj_pow_r.into(),
            ],
        );
    }
    Ok(t)
}
