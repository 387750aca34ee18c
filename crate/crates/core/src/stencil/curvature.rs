//! Curvature of level sets from central differences.

use super::{diff, mixed_diff, second_diff, Scheme, StencilSpec};
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Marker stored at cells whose gradient vanishes (medial axis, extrema).
pub const SINGULAR: f64 = f64::MAX;

/// Gradient norms below this mark a cell singular.
pub const SINGULAR_GRADIENT: f64 = 1e-8;

pub fn is_singular(v: f64) -> bool {
    v == SINGULAR
}

fn first(phi: &ScalarField, axis: usize) -> Result<ScalarField> {
    diff(phi, StencilSpec::new(Scheme::Central2, axis))
}

/// Curvature of the level sets of a 2D field:
/// `(φxx φy² - 2 φx φy φxy + φyy φx²) / (φx² + φy²)^{3/2}`.
pub fn curvature_2d(phi: &ScalarField) -> Result<ScalarField> {
    if phi.spec().ndim() != 2 {
        return Err(Error::invalid("curvature_2d needs a 2D field"));
    }
    let (px, py) = (first(phi, 0)?, first(phi, 1)?);
    let (pxx, pyy) = (second_diff(phi, 0)?, second_diff(phi, 1)?);
    let pxy = mixed_diff(phi, 0, 1)?;
    let values = (0..phi.len())
        .map(|i| {
            let (x, y) = (px.values()[i], py.values()[i]);
            let g2 = x * x + y * y;
            if g2.sqrt() < SINGULAR_GRADIENT {
                return SINGULAR;
            }
            (pxx.values()[i] * y * y - 2.0 * x * y * pxy.values()[i] + pyy.values()[i] * x * x)
                / g2.powf(1.5)
        })
        .collect();
    Ok(ScalarField::from_vec_unchecked(phi.spec().clone(), values))
}

/// Divergence of the normalized gradient of a 3D field (sum of principal
/// curvatures; `2/ρ` on a sphere of radius ρ).
pub fn mean_curvature_3d(phi: &ScalarField) -> Result<ScalarField> {
    if phi.spec().ndim() != 3 {
        return Err(Error::invalid("mean_curvature_3d needs a 3D field"));
    }
    let d: Vec<ScalarField> = (0..3).map(|a| first(phi, a)).collect::<Result<_>>()?;
    let dd: Vec<ScalarField> = (0..3).map(|a| second_diff(phi, a)).collect::<Result<_>>()?;
    let (dxy, dxz, dyz) = (mixed_diff(phi, 0, 1)?, mixed_diff(phi, 0, 2)?, mixed_diff(phi, 1, 2)?);
    let values = (0..phi.len())
        .map(|i| {
            let (x, y, z) = (d[0].values()[i], d[1].values()[i], d[2].values()[i]);
            let g2 = x * x + y * y + z * z;
            if g2.sqrt() < SINGULAR_GRADIENT {
                return SINGULAR;
            }
            let num = (y * y + z * z) * dd[0].values()[i]
                + (x * x + z * z) * dd[1].values()[i]
                + (x * x + y * y) * dd[2].values()[i]
                - 2.0 * x * y * dxy.values()[i]
                - 2.0 * x * z * dxz.values()[i]
                - 2.0 * y * z * dyz.values()[i];
            num / g2.powf(1.5)
        })
        .collect();
    Ok(ScalarField::from_vec_unchecked(phi.spec().clone(), values))
}

/// [`curvature_2d`] or [`mean_curvature_3d`] by dimension.
pub fn curvature(phi: &ScalarField) -> Result<ScalarField> {
    match phi.spec().ndim() {
        2 => curvature_2d(phi),
        3 => mean_curvature_3d(phi),
        n => Err(Error::invalid(format!("curvature needs a 2D or 3D field, got {n}D"))),
    }
}
