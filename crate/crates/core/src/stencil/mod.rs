//! Finite-difference operators on scalar fields.
//!
//! Every operator works line by line along one axis on a copy of the line
//! padded with [`GHOST`] cells per side. Ghost values continue the edge slope
//! (`φ[-k] = φ[0] - k·(φ[1] - φ[0])`), so linear fields stay linear across the
//! boundary and distance-like fields keep a unit gradient there.

mod curvature;
mod weno;

pub use curvature::{curvature, curvature_2d, is_singular, mean_curvature_3d, SINGULAR};
pub use weno::{godunov_gradmag, weno5, Side};

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Ghost cells per side.
pub const GHOST: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Forward1,
    Backward1,
    Central2,
    Central4,
    Weno5Minus,
    Weno5Plus,
}

impl Scheme {
    /// Cells read on either side of the evaluation point.
    pub fn halo(self) -> usize {
        match self {
            Scheme::Forward1 | Scheme::Backward1 | Scheme::Central2 => 1,
            Scheme::Central4 => 2,
            Scheme::Weno5Minus | Scheme::Weno5Plus => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Forward1 => "forward1",
            Scheme::Backward1 => "backward1",
            Scheme::Central2 => "central2",
            Scheme::Central4 => "central4",
            Scheme::Weno5Minus => "weno5_minus",
            Scheme::Weno5Plus => "weno5_plus",
        }
    }
}

/// A scheme applied along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StencilSpec {
    pub scheme: Scheme,
    pub axis: usize,
}

impl StencilSpec {
    pub fn new(scheme: Scheme, axis: usize) -> Self {
        StencilSpec { scheme, axis }
    }
}

fn check_axis(phi: &ScalarField, axis: usize, halo: usize) -> Result<()> {
    let spec = phi.spec();
    if axis >= spec.ndim() {
        return Err(Error::invalid(format!(
            "axis {axis} out of range for a {}-dimensional field",
            spec.ndim()
        )));
    }
    let n = spec.dims()[axis];
    if n < halo + 1 {
        return Err(Error::invalid(format!(
            "extent {n} along axis {axis} is too small; the stencil needs at least {}",
            halo + 1
        )));
    }
    Ok(())
}

/// Runs `kernel(ext, out)` on every line along `axis`. `ext` holds the line
/// with [`GHOST`] extrapolated cells per side, so cell `i` is `ext[i + GHOST]`.
pub(crate) fn map_lines(
    phi: &ScalarField,
    axis: usize,
    halo: usize,
    mut kernel: impl FnMut(&[f64], &mut [f64]),
) -> Result<ScalarField> {
    check_axis(phi, axis, halo)?;
    let spec = phi.spec();
    let src = phi.values();
    let mut dst = vec![0.0; src.len()];
    let n_max = spec.dims()[axis];
    let mut ext = vec![0.0; n_max + 2 * GHOST];
    let mut out = vec![0.0; n_max];
    spec.for_each_line(axis, |base, stride, n| {
        for k in 0..n {
            ext[GHOST + k] = src[base + k * stride];
        }
        let lo = ext[GHOST + 1] - ext[GHOST];
        let hi = ext[GHOST + n - 1] - ext[GHOST + n - 2];
        for k in 1..=GHOST {
            ext[GHOST - k] = ext[GHOST] - k as f64 * lo;
            ext[GHOST + n - 1 + k] = ext[GHOST + n - 1] + k as f64 * hi;
        }
        kernel(&ext[..n + 2 * GHOST], &mut out[..n]);
        for k in 0..n {
            dst[base + k * stride] = out[k];
        }
    });
    ScalarField::new(spec.clone(), dst)
        .map_err(|_| Error::invalid("finite difference produced a non-finite value"))
}

/// First difference along one axis.
pub fn diff(phi: &ScalarField, stencil: StencilSpec) -> Result<ScalarField> {
    let h = phi.spec().spacing();
    let g = GHOST;
    match stencil.scheme {
        Scheme::Forward1 => map_lines(phi, stencil.axis, 1, |e, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (e[g + i + 1] - e[g + i]) / h;
            }
        }),
        Scheme::Backward1 => map_lines(phi, stencil.axis, 1, |e, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (e[g + i] - e[g + i - 1]) / h;
            }
        }),
        Scheme::Central2 => map_lines(phi, stencil.axis, 1, |e, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (e[g + i + 1] - e[g + i - 1]) / (2.0 * h);
            }
        }),
        Scheme::Central4 => map_lines(phi, stencil.axis, 2, |e, out| {
            for (i, o) in out.iter_mut().enumerate() {
                let c = g + i;
                *o = (-e[c + 2] + 8.0 * e[c + 1] - 8.0 * e[c - 1] + e[c - 2]) / (12.0 * h);
            }
        }),
        Scheme::Weno5Minus => weno5(phi, stencil.axis, Side::Minus),
        Scheme::Weno5Plus => weno5(phi, stencil.axis, Side::Plus),
    }
}

/// `(φ(x+h) - 2φ(x) + φ(x-h)) / h²` along `axis`.
pub fn second_diff(phi: &ScalarField, axis: usize) -> Result<ScalarField> {
    let h2 = phi.spec().spacing().powi(2);
    map_lines(phi, axis, 1, |e, out| {
        for (i, o) in out.iter_mut().enumerate() {
            let c = GHOST + i;
            *o = (e[c + 1] - 2.0 * e[c] + e[c - 1]) / h2;
        }
    })
}

/// Central2 along `axis_a` of central2 along `axis_b`.
pub fn mixed_diff(phi: &ScalarField, axis_a: usize, axis_b: usize) -> Result<ScalarField> {
    let inner = diff(phi, StencilSpec::new(Scheme::Central2, axis_b))?;
    diff(&inner, StencilSpec::new(Scheme::Central2, axis_a))
}

/// Per-axis differences under one scheme.
pub fn gradient(phi: &ScalarField, scheme: Scheme) -> Result<Vec<ScalarField>> {
    (0..phi.spec().ndim())
        .map(|axis| diff(phi, StencilSpec::new(scheme, axis)))
        .collect()
}

/// Euclidean norm of the per-axis differences.
pub fn gradient_magnitude(phi: &ScalarField, scheme: Scheme) -> Result<ScalarField> {
    let grad = gradient(phi, scheme)?;
    let values = (0..phi.len())
        .map(|i| grad.iter().map(|g| g.values()[i].powi(2)).sum::<f64>().sqrt())
        .collect();
    Ok(ScalarField::from_vec_unchecked(phi.spec().clone(), values))
}

/// Sum of second differences over all axes.
pub fn laplacian(phi: &ScalarField) -> Result<ScalarField> {
    let mut acc = vec![0.0; phi.len()];
    for axis in 0..phi.spec().ndim() {
        let d = second_diff(phi, axis)?;
        for (a, v) in acc.iter_mut().zip(d.values()) {
            *a += v;
        }
    }
    Ok(ScalarField::from_vec_unchecked(phi.spec().clone(), acc))
}
