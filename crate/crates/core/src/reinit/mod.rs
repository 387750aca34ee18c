//! Dithering and reinitialization of quantized signed distance fields.
//!
//! The pipeline is two-stage: bounded noise is added once to break up the
//! flat bands of a quantized transform, then `φ_t = -S(φ₀)(|∇φ| - 1)` is
//! integrated in pseudo-time with WENO5 upwind differences and TVD-RK3. The
//! sign of every cell is pinned to its initial sign, so the represented set
//! never changes.

mod metrics;

pub use metrics::{
    curvature_band_histogram, error_metrics, error_metrics_in, write_convergence_csv,
    ConvergenceLog, ErrorReport, Histogram,
};

use crate::error::{Error, Result};
use crate::grid::{binarize, BinaryField, ScalarField};
use crate::stencil::{godunov_gradmag, weno5, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherParams {
    /// Amplitude divisor; the noise amplitude is at most `h / alpha`.
    pub alpha: f64,
    pub seed: u64,
}

impl DitherParams {
    pub fn new(alpha: f64, seed: u64) -> Result<Self> {
        let p = DitherParams { alpha, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) || self.alpha.is_nan() {
            return Err(Error::invalid(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        Ok(())
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-cell draw in the open interval (-1, 1).
///
/// The top 53 bits of `splitmix64(seed ^ index)` select one of 2^53 evenly
/// spaced midpoints `-1 + (2m + 1)·2^-53`; every step is exact in binary64.
pub fn dither_draw(seed: u64, index: u64) -> f64 {
    let m = splitmix64(seed ^ index) >> 11;
    m as f64 * f64::powi(2.0, -52) - 1.0 + f64::powi(2.0, -53)
}

/// `φ̂ = φ̃ + min(h/α, |φ̃|)·u` with `u` from [`dither_draw`].
pub fn dither(phi_q: &ScalarField, params: DitherParams) -> Result<ScalarField> {
    params.validate()?;
    let cap = phi_q.spec().spacing() / params.alpha;
    let mut out = Vec::with_capacity(phi_q.len());
    for (i, &v) in phi_q.values().iter().enumerate() {
        if v == 0.0 {
            let idx = phi_q.spec().unravel(i);
            return Err(Error::InvalidInput(format!(
                "cell {:?} is exactly zero; dithering cannot preserve its sign",
                &idx[..phi_q.spec().ndim()]
            )));
        }
        let amplitude = cap.min(v.abs());
        let mut d = v + amplitude * dither_draw(params.seed, i as u64);
        if d * v <= 0.0 {
            // |u| < 1 but the product can round onto -v
            d = v * f64::EPSILON;
        }
        out.push(d);
    }
    Ok(ScalarField::from_vec_unchecked(phi_q.spec().clone(), out))
}

/// `S = φ₀ / sqrt(φ₀² + h²)`.
pub fn smoothed_sign(phi0: &ScalarField) -> ScalarField {
    let h2 = phi0.spec().spacing().powi(2);
    let values = phi0.values().iter().map(|&v| v / (v * v + h2).sqrt()).collect();
    ScalarField::from_vec_unchecked(phi0.spec().clone(), values)
}

/// `-S (|∇φ|_G - 1)`, with `|∇φ|_G` the Godunov magnitude of the WENO5
/// one-sided derivatives.
pub fn reinit_rhs(phi: &ScalarField, sign_field: &ScalarField) -> Result<ScalarField> {
    phi.spec().ensure_same(sign_field.spec(), "reinit_rhs")?;
    let n = phi.spec().ndim();
    let minus: Vec<ScalarField> = (0..n).map(|a| weno5(phi, a, Side::Minus)).collect::<Result<_>>()?;
    let plus: Vec<ScalarField> = (0..n).map(|a| weno5(phi, a, Side::Plus)).collect::<Result<_>>()?;
    let g = godunov_gradmag(&minus, &plus, sign_field)?;
    let values = g
        .values()
        .iter()
        .zip(sign_field.values())
        .map(|(&g, &s)| -s * (g - 1.0))
        .collect();
    Ok(ScalarField::from_vec_unchecked(phi.spec().clone(), values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReinitParams {
    pub iterations: usize,
    /// `dt = cfl * h`.
    pub cfl: f64,
    /// Sign-violating cells are reset to `±sign_epsilon * h`.
    pub sign_epsilon: f64,
    /// Metric logging stride; iteration 0 and the last iteration are always
    /// logged.
    pub log_every: usize,
}

impl Default for ReinitParams {
    fn default() -> Self {
        ReinitParams {
            iterations: 400,
            cfl: 0.3,
            sign_epsilon: 1e-9,
            log_every: 1,
        }
    }
}

impl ReinitParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.sign_epsilon > 0.0 && self.sign_epsilon.is_finite()) {
            return Err(Error::invalid("sign_epsilon must be positive"));
        }
        if self.log_every == 0 {
            return Err(Error::invalid("log_every must be at least 1"));
        }
        Ok(())
    }

    fn logs(&self, iteration: usize) -> bool {
        iteration == 0 || iteration % self.log_every == 0 || iteration == self.iterations
    }
}

/// State handed to a [`reinitialize_with`] observer after each iteration
/// (and once for the input, at iteration 0).
#[derive(Debug)]
pub struct Progress<'a> {
    pub iteration: usize,
    pub field: &'a ScalarField,
    pub report: Option<&'a ErrorReport>,
}

#[derive(Debug, Clone)]
pub struct ReinitOutcome {
    pub field: ScalarField,
    pub reports: Vec<ErrorReport>,
}

/// Runs the reinitialization and returns the final field with its log.
pub fn reinitialize(
    phi0: &ScalarField,
    reference: &BinaryField,
    exact_gradient: Option<&[ScalarField]>,
    params: &ReinitParams,
) -> Result<ReinitOutcome> {
    reinitialize_with(phi0, reference, exact_gradient, params, |_| Ok(()))
}

fn pin_signs(values: &mut [f64], phi0: &[f64], clamp: f64) {
    for (v, &s) in values.iter_mut().zip(phi0) {
        let want = if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        };
        let have = if *v > 0.0 {
            1.0
        } else if *v < 0.0 {
            -1.0
        } else {
            0.0
        };
        if have != want {
            *v = want * clamp;
        }
    }
}

fn stage(
    a: f64,
    base: &[f64],
    b: f64,
    cur: &ScalarField,
    rhs: &ScalarField,
    dt: f64,
    iteration: usize,
) -> Result<ScalarField> {
    let mut out = Vec::with_capacity(base.len());
    for ((&p, &c), &r) in base.iter().zip(cur.values()).zip(rhs.values()) {
        let v = a * p + b * (c + dt * r);
        if !v.is_finite() {
            return Err(Error::NumericalFailure {
                iteration,
                message: "non-finite value in a Runge-Kutta stage".into(),
            });
        }
        out.push(v);
    }
    Ok(ScalarField::from_vec_unchecked(cur.spec().clone(), out))
}

/// [`reinitialize`] with a callback invoked at iteration 0 and after every
/// step. Logged iterations carry their [`ErrorReport`]. An observer error
/// aborts the run.
pub fn reinitialize_with(
    phi0: &ScalarField,
    reference: &BinaryField,
    exact_gradient: Option<&[ScalarField]>,
    params: &ReinitParams,
    mut observer: impl FnMut(Progress<'_>) -> Result<()>,
) -> Result<ReinitOutcome> {
    params.validate()?;
    phi0.spec().ensure_same(reference.spec(), "reinitialize")?;
    if binarize(phi0) != *reference {
        return Err(Error::InvalidInput(
            "initial field does not represent the reference set".into(),
        ));
    }
    let h = phi0.spec().spacing();
    let dt = params.cfl * h;
    let clamp = params.sign_epsilon * h;
    let sign = smoothed_sign(phi0);
    let mut reports = Vec::new();

    let mut phi = phi0.clone();
    let report = error_metrics(&phi, reference, exact_gradient)?;
    observer(Progress {
        iteration: 0,
        field: &phi,
        report: Some(&report),
    })?;
    reports.push(report);

    for it in 1..=params.iterations {
        let base = phi.values();
        let l0 = reinit_rhs(&phi, &sign)?;
        let p1 = stage(0.0, base, 1.0, &phi, &l0, dt, it)?;
        let l1 = reinit_rhs(&p1, &sign)?;
        let p2 = stage(0.75, base, 0.25, &p1, &l1, dt, it)?;
        let l2 = reinit_rhs(&p2, &sign)?;
        let p3 = stage(1.0 / 3.0, base, 2.0 / 3.0, &p2, &l2, dt, it)?;
        let mut next = p3.into_values();
        pin_signs(&mut next, phi0.values(), clamp);
        phi = ScalarField::from_vec_unchecked(phi.spec().clone(), next);

        if params.logs(it) {
            let mut report = error_metrics(&phi, reference, exact_gradient)?;
            report.iteration = it;
            observer(Progress {
                iteration: it,
                field: &phi,
                report: Some(&report),
            })?;
            reports.push(report);
        } else {
            observer(Progress {
                iteration: it,
                field: &phi,
                report: None,
            })?;
        }
    }
    Ok(ReinitOutcome { field: phi, reports })
}
