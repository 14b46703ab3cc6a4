use crate::error::{Error, Result};
use crate::grid::{CellGrid, MeshFunction};

/// Per cell, `max_j scale(j) * (block sum at level j) / 2^j` over the blocks of
/// `cg` containing the cell. `values` are already nonnegative.
pub(crate) fn block_maximum(values: &[f64], cg: &CellGrid, scale: impl Fn(u32) -> f64) -> Vec<f64> {
    let pyr = cg.pyramid(values);
    (0..values.len())
        .map(|i| {
            (0..=cg.top())
                .map(|j| scale(j) * pyr.sum(j, cg.block_of(i as i64, j)) / (1u64 << j) as f64)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `M^D f` over one snapped grid.
pub fn dyadic_maximal_on(f: &MeshFunction, cg: &CellGrid) -> MeshFunction {
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    MeshFunction { mesh: f.mesh, values: block_maximum(&abs, cg, |_| 1.0) }
}

/// `M^D f` for the grid with shift `t/3`, cubes up to side `2R`.
pub fn dyadic_maximal(f: &MeshFunction, shift: u8) -> Result<MeshFunction> {
    Ok(dyadic_maximal_on(f, &CellGrid::for_mesh(&f.mesh, shift)?))
}

/// Maximum of the three shifted dyadic maximal functions; comparable to the
/// Hardy–Littlewood maximal function.
pub fn hl_maximal(f: &MeshFunction) -> Result<MeshFunction> {
    let mut out = dyadic_maximal(f, 0)?;
    for t in 1..3 {
        let m = dyadic_maximal(f, t)?;
        for (o, v) in out.values.iter_mut().zip(m.values) {
            *o = o.max(v);
        }
    }
    Ok(out)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidExponent(format!("need 0 < α < 1, got {alpha}")));
    }
    Ok(())
}

/// `M_α^D f = sup_Q |Q|^α <|f|>_Q` over one snapped grid.
pub fn fractional_maximal_on(f: &MeshFunction, alpha: f64, cg: &CellGrid) -> Result<MeshFunction> {
    check_alpha(alpha)?;
    let h = f.mesh.width();
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let values = block_maximum(&abs, cg, |j| (h * (1u64 << j) as f64).powf(alpha));
    Ok(MeshFunction { mesh: f.mesh, values })
}

pub fn fractional_maximal(f: &MeshFunction, alpha: f64, shift: u8) -> Result<MeshFunction> {
    fractional_maximal_on(f, alpha, &CellGrid::for_mesh(&f.mesh, shift)?)
}

pub fn hl_fractional_maximal(f: &MeshFunction, alpha: f64) -> Result<MeshFunction> {
    let mut out = fractional_maximal(f, alpha, 0)?;
    for t in 1..3 {
        let m = fractional_maximal(f, alpha, t)?;
        for (o, v) in out.values.iter_mut().zip(m.values) {
            *o = o.max(v);
        }
    }
    Ok(out)
}
