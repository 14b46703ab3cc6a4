use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{CellCube, Mesh};

use super::{spd_pow, symmetrize, MatrixWeight};

/// Which averaged norm a reducing matrix represents.
///
/// Each kind is `v ↦ (⨍_Q |B(x) v|^s dx)^{1/s}` for a power `B = W^e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ReducerKind {
    /// `B = W^{1/p}`, `s = p`.
    Primal { p: f64 },
    /// `B = W^{-1/p}`, `s = p'`.
    Dual { p: f64 },
    /// `B = W`, `s = q`.
    Fractional { q: f64 },
    /// `B = W^{-1}`, `s = p'`.
    FractionalDual { p: f64 },
}

impl ReducerKind {
    /// `(e, s)` with `B = W^e`.
    pub fn exponents(&self) -> Result<(f64, f64)> {
        let conj = |p: f64| -> Result<f64> {
            if !(p > 1.0) || !p.is_finite() {
                return Err(Error::InvalidExponent(format!("dual reducer needs 1 < p < ∞, got {p}")));
            }
            Ok(p / (p - 1.0))
        };
        match *self {
            Self::Primal { p } => {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(Error::InvalidExponent(format!("need 1 <= p < ∞, got {p}")));
                }
                Ok((1.0 / p, p))
            }
            Self::Dual { p } => Ok((-1.0 / p, conj(p)?)),
            Self::Fractional { q } => {
                if !(q >= 1.0) || !q.is_finite() {
                    return Err(Error::InvalidExponent(format!("need 1 <= q < ∞, got {q}")));
                }
                Ok((1.0, q))
            }
            Self::FractionalDual { p } => Ok((-1.0, conj(p)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducingMatrix {
    pub cube: CellCube,
    pub kind: ReducerKind,
    pub matrix: DMatrix<f64>,
    /// `c_minus |𝒲 v| <= ρ(v) <= c_plus |𝒲 v|` on the fit directions.
    pub c_minus: f64,
    pub c_plus: f64,
}

impl ReducingMatrix {
    pub fn ratio(&self) -> f64 {
        self.c_plus / self.c_minus
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        spd_pow(&self.matrix, -1.0)
    }
}

/// Unit directions covering the projective sphere: `n` angles on a half
/// circle for `d = 2`, a Fibonacci lattice on the upper hemisphere for `d = 3`.
pub fn norm_directions(d: usize, n: usize) -> Vec<DVector<f64>> {
    match d {
        1 => vec![DVector::from_element(1, 1.0)],
        2 => (0..n)
            .map(|k| {
                let (s, c) = (std::f64::consts::PI * k as f64 / n as f64).sin_cos();
                DVector::from_vec(vec![c, s])
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (golden * k as f64).sin_cos();
                    DVector::from_vec(vec![r * c, r * s, z])
                })
                .collect()
        }
    }
}

/// `ρ(u) = (⨍ |B u|^s)^{1/s}` over the given cell matrices.
pub(crate) fn averaged_norm(bs: &[DMatrix<f64>], s: f64, u: &DVector<f64>) -> f64 {
    let n = bs.len() as f64;
    if s == 2.0 {
        return (bs.iter().map(|b| (b * u).norm_squared()).sum::<f64>() / n).sqrt();
    }
    (bs.iter().map(|b| (b * u).norm().powf(s)).sum::<f64>() / n).powf(1.0 / s)
}

fn cube_cells(mesh: &Mesh, cube: &CellCube) -> Result<std::ops::Range<usize>> {
    if cube.first < 0 || cube.end() > mesh.n_cells() as i64 {
        return Err(invalid(format!(
            "cube of {} cells at {} is not inside the mesh",
            cube.n_cells(),
            cube.first
        )));
    }
    Ok(cube.first as usize..cube.end() as usize)
}

/// Reducing matrix of the norm `kind` on `cube`.
pub fn reducing_matrix(w: &MatrixWeight, cube: &CellCube, kind: ReducerKind) -> Result<ReducingMatrix> {
    let (e, s) = kind.exponents()?;
    let range = cube_cells(&w.mesh, cube)?;
    let cells = &w.cells[range];
    let bs: Vec<DMatrix<f64>> = cells.iter().map(|m| if e == 1.0 { m.clone() } else { spd_pow(m, e) }).collect();
    let squares: Option<Vec<DMatrix<f64>>> =
        (s == 2.0).then(|| cells.iter().map(|m| if e == 0.5 { m.clone() } else { spd_pow(m, 2.0 * e) }).collect());
    reduce(&bs, squares.as_deref(), s, w.dim, *cube, kind)
}

/// Fits the reducing matrix given the cell matrices `B` of the cube. When
/// `s = 2` and the squares `B²` are supplied, the fit is `(⨍ B²)^{1/2}`.
pub(crate) fn reduce(
    bs: &[DMatrix<f64>],
    squares: Option<&[DMatrix<f64>]>,
    s: f64,
    d: usize,
    cube: CellCube,
    kind: ReducerKind,
) -> Result<ReducingMatrix> {
    let dirs = norm_directions(d, 64 * d);
    let rho: Vec<f64> = dirs.iter().map(|u| averaged_norm(bs, s, u)).collect();
    if let Some(i) = rho.iter().position(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::Degenerate {
            interval: crate::Interval::new(cube.first as f64, cube.end() as f64),
            detail: format!("averaged norm is {} in direction {}", rho[i], i),
        });
    }
    let matrix = match squares {
        Some(sq) if s == 2.0 => {
            let mut avg = sq.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m) / sq.len() as f64;
            symmetrize(&mut avg);
            spd_pow(&avg, 0.5)
        }
        _ if d == 1 => DMatrix::from_element(1, 1, rho[0]),
        _ => {
            let a = john_ellipsoid(&dirs, &rho, d);
            let l = polish(&dirs, &rho, a.cholesky().map(|c| c.l()).unwrap_or_else(|| DMatrix::identity(d, d)));
            let mut g = &l * l.transpose();
            symmetrize(&mut g);
            spd_pow(&g, 0.5)
        }
    };
    let (lo, hi) = factors(&dirs, &rho, &matrix);
    let scale = (lo * hi).sqrt();
    let matrix = matrix * scale;
    Ok(ReducingMatrix { cube, kind, matrix, c_minus: lo / scale, c_plus: hi / scale })
}

fn factors(dirs: &[DVector<f64>], rho: &[f64], m: &DMatrix<f64>) -> (f64, f64) {
    dirs.iter().zip(rho).fold((f64::INFINITY, 0.0f64), |(lo, hi), (u, &r)| {
        let q = r / (m * u).norm();
        (lo.min(q), hi.max(q))
    })
}

/// Minimum-volume centered ellipsoid `{x : xᵀ A x <= 1}` containing the points
/// `u_i / ρ(u_i)` (Khachiyan's algorithm).
fn john_ellipsoid(dirs: &[DVector<f64>], rho: &[f64], d: usize) -> DMatrix<f64> {
    let pts: Vec<DVector<f64>> = dirs.iter().zip(rho).map(|(u, r)| u / *r).collect();
    let n = pts.len();
    let mut weights = vec![1.0 / n as f64; n];
    let df = d as f64;
    let mut xinv = DMatrix::identity(d, d);
    for _ in 0..2000 {
        let x = pts.iter().zip(&weights).fold(DMatrix::zeros(d, d), |acc, (p, &w)| acc + p * p.transpose() * w);
        xinv = match x.try_inverse() {
            Some(m) => m,
            None => break,
        };
        let (j, mj) = pts
            .iter()
            .map(|p| (p.transpose() * &xinv * p)[(0, 0)])
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, m)| if m > b.1 { (i, m) } else { b });
        if mj <= df * (1.0 + 1e-7) {
            break;
        }
        let step = (mj / df - 1.0) / (mj - 1.0);
        for w in weights.iter_mut() {
            *w *= 1.0 - step;
        }
        weights[j] += step;
    }
    let mmax = pts.iter().map(|p| (p.transpose() * &xinv * p)[(0, 0)]).fold(0.0, f64::max);
    let mut a = xinv / mmax;
    symmetrize(&mut a);
    a
}

/// Compass search over the Cholesky factor `L` minimizing the spread
/// `max ρ/|Lᵀu| / min ρ/|Lᵀu|`.
fn polish(dirs: &[DVector<f64>], rho: &[f64], l0: DMatrix<f64>) -> DMatrix<f64> {
    let d = l0.nrows();
    let spread = |l: &DMatrix<f64>| -> f64 {
        let lt = l.transpose();
        let (lo, hi) = dirs.iter().zip(rho).fold((f64::INFINITY, 0.0f64), |(lo, hi), (u, &r)| {
            let q = r / (&lt * u).norm();
            (lo.min(q), hi.max(q))
        });
        if lo > 0.0 && hi.is_finite() {
            (hi / lo).ln()
        } else {
            f64::INFINITY
        }
    };
    let slots: Vec<(usize, usize)> = (0..d).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
    let mut l = l0;
    let mut best = spread(&l);
    let mut step = 0.05 * l.abs().max();
    let floor = 1e-10 * l.abs().max();
    let mut evals = 0;
    while step > floor && evals < 20_000 {
        let mut improved = false;
        for &(i, j) in &slots {
            for sign in [1.0, -1.0] {
                let mut cand = l.clone();
                cand[(i, j)] += sign * step;
                let v = spread(&cand);
                evals += 1;
                if v < best {
                    best = v;
                    l = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh;

    fn whole(mesh: &Mesh) -> CellCube {
        CellCube { shift: 0, side_log2: mesh.n_cells().trailing_zeros(), first: 0 }
    }

    #[test]
    fn constant_diagonal_p2_is_exact() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let w = MatrixWeight::diagonal(mesh, &[vec![4.0; 16], vec![1.0; 16]]).unwrap();
        let r = reducing_matrix(&w, &whole(&mesh), ReducerKind::Primal { p: 2.0 }).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert!((&r.matrix - expect).abs().max() < 1e-14);
        assert!((r.c_minus - 1.0).abs() < 1e-12 && (r.c_plus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_gives_identity() {
        let mesh = Mesh::new(1.0, 3).unwrap();
        let w = MatrixWeight::identity(mesh, 2).unwrap();
        for kind in [ReducerKind::Primal { p: 3.0 }, ReducerKind::Dual { p: 1.5 }, ReducerKind::Fractional { q: 4.0 }] {
            let r = reducing_matrix(&w, &whole(&mesh), kind).unwrap();
            assert!((&r.matrix - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-9, "{kind:?}");
        }
    }

    #[test]
    fn rejects_cube_outside_mesh() {
        let mesh = Mesh::new(1.0, 2).unwrap();
        let w = MatrixWeight::identity(mesh, 2).unwrap();
        let c = CellCube { shift: 1, side_log2: 2, first: -2 };
        assert!(reducing_matrix(&w, &c, ReducerKind::Primal { p: 2.0 }).is_err());
    }

    #[test]
    fn fit_is_within_sqrt_d_on_dense_directions() {
        let mesh = Mesh::new(1.0, 4).unwrap();
        let n = mesh.n_cells();
        let theta: Vec<f64> = (0..n).map(|i| 0.4 * i as f64).collect();
        let l1: Vec<f64> = (0..n).map(|i| 1.0 + (i % 5) as f64).collect();
        let l2: Vec<f64> = (0..n).map(|i| 0.2 + 0.1 * (i % 3) as f64).collect();
        let w = MatrixWeight::rotated(mesh, &theta, &l1, &l2).unwrap();
        let r = reducing_matrix(&w, &whole(&mesh), ReducerKind::Primal { p: 3.0 }).unwrap();
        assert!(r.c_minus <= 1.0 && r.c_plus >= 1.0);
        // Oracle: ten times denser directions, ρ from its definition.
        let bs: Vec<_> = w.cells.iter().map(|m| spd_pow(m, 1.0 / 3.0)).collect();
        let (lo, hi) = norm_directions(2, 1280).iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), u| {
            let q = averaged_norm(&bs, 3.0, u) / (&r.matrix * u).norm();
            (lo.min(q), hi.max(q))
        });
        assert!(hi / lo <= 2f64.sqrt(), "{}", hi / lo);
    }

    #[test]
    fn fibonacci_directions_are_unit() {
        for u in norm_directions(3, 192) {
            assert!((u.norm() - 1.0).abs() < 1e-14 && u[2] > 0.0);
        }
    }
}
