//! Fifth-order WENO one-sided derivatives (Jiang-Shu weights) and the
//! Godunov upwind gradient magnitude.

use super::{map_lines, GHOST};
use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Smoothness-indicator regularization.
pub const WENO_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Left-biased (backward) derivative.
    Minus,
    /// Right-biased (forward) derivative.
    Plus,
}

/// WENO5 combination of five consecutive divided differences, ordered from
/// the upwind end.
#[inline]
fn weno5_combine(v1: f64, v2: f64, v3: f64, v4: f64, v5: f64) -> f64 {
    let p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
    let p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
    let p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;

    let s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2) + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).powi(2);
    let s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (v2 - v4).powi(2);
    let s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).powi(2) + 0.25 * (3.0 * v3 - 4.0 * v4 + v5).powi(2);

    let a1 = 0.1 / (s1 + WENO_EPSILON).powi(2);
    let a2 = 0.6 / (s2 + WENO_EPSILON).powi(2);
    let a3 = 0.3 / (s3 + WENO_EPSILON).powi(2);
    (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3)
}

/// One-sided WENO5 first derivative along `axis`.
pub fn weno5(phi: &ScalarField, axis: usize, side: Side) -> Result<ScalarField> {
    let h = phi.spec().spacing();
    map_lines(phi, axis, GHOST, |e, out| {
        // backward difference at extended position j
        let d = |j: usize| (e[j] - e[j - 1]) / h;
        for (i, o) in out.iter_mut().enumerate() {
            let c = GHOST + i;
            *o = match side {
                Side::Minus => weno5_combine(d(c - 2), d(c - 1), d(c), d(c + 1), d(c + 2)),
                // forward difference at c+k is the backward difference at c+k+1
                Side::Plus => weno5_combine(d(c + 3), d(c + 2), d(c + 1), d(c), d(c - 1)),
            };
        }
    })
}

/// Upwind gradient magnitude from backward (`minus`) and forward (`plus`)
/// per-axis differences, upwinded by the sign of `sign_field`.
pub fn godunov_gradmag(
    minus: &[ScalarField],
    plus: &[ScalarField],
    sign_field: &ScalarField,
) -> Result<ScalarField> {
    let spec = sign_field.spec();
    if minus.len() != spec.ndim() || plus.len() != spec.ndim() {
        return Err(Error::invalid(format!(
            "expected {} difference fields per side, got {} and {}",
            spec.ndim(),
            minus.len(),
            plus.len()
        )));
    }
    for f in minus.iter().chain(plus) {
        spec.ensure_same(f.spec(), "godunov_gradmag")?;
    }
    let values = sign_field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if s == 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            for (m, p) in minus.iter().zip(plus) {
                let (a, b) = (m.values()[i], p.values()[i]);
                sum += if s > 0.0 {
                    a.max(0.0).powi(2).max(b.min(0.0).powi(2))
                } else {
                    a.min(0.0).powi(2).max(b.max(0.0).powi(2))
                };
            }
            sum.sqrt()
        })
        .collect();
    Ok(ScalarField::from_vec_unchecked(spec.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::stencil::tests::{field, interior};

    fn constant(dims: &[usize], v: f64) -> ScalarField {
        ScalarField::constant(GridSpec::new(dims, 1.0).unwrap(), v).unwrap()
    }

    #[test]
    fn godunov_examples() {
        let one = |d: &[usize]| constant(d, 1.0);
        let g = godunov_gradmag(&[one(&[3, 3]), one(&[3, 3])], &[one(&[3, 3]), one(&[3, 3])], &one(&[3, 3]))
            .unwrap();
        assert!(g.values().iter().all(|&v| v == 2f64.sqrt()));
        let g = godunov_gradmag(&[one(&[4])], &[one(&[4])], &one(&[4])).unwrap();
        assert!(g.values().iter().all(|&v| v == 1.0));

        let neg = constant(&[4], -1.0);
        let rarefaction = godunov_gradmag(&[neg.clone()], &[one(&[4])], &one(&[4])).unwrap();
        assert!(rarefaction.values().iter().all(|&v| v == 0.0));
        let shock = godunov_gradmag(&[one(&[4])], &[neg.clone()], &one(&[4])).unwrap();
        assert!(shock.values().iter().all(|&v| v == 1.0));

        let zero = constant(&[4], 0.0);
        let g = godunov_gradmag(&[one(&[4])], &[one(&[4])], &zero).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
        // negative sign picks the mirrored branches
        let g = godunov_gradmag(&[neg.clone()], &[one(&[4])], &neg).unwrap();
        assert!(g.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn godunov_spec_mismatch() {
        let a = constant(&[4], 1.0);
        let b = constant(&[5], 1.0);
        assert!(godunov_gradmag(&[a.clone()], &[b], &a).is_err());
        assert!(godunov_gradmag(&[], &[], &a).is_err());
    }

    fn max_interior_error(n: usize) -> f64 {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let phi = field(&[n + 1], h, |x| x[0].sin());
        let mut worst: f64 = 0.0;
        for side in [Side::Minus, Side::Plus] {
            let d = weno5(&phi, 0, side).unwrap();
            for i in interior(phi.spec(), GHOST) {
                let x = phi.spec().coord_of(i)[0];
                worst = worst.max((d.values()[i] - x.cos()).abs());
            }
        }
        worst
    }

    #[test]
    fn weno5_convergence_order() {
        let errs: Vec<f64> = [40, 80, 160].iter().map(|&n| max_interior_error(n)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 4.5, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn godunov_on_exact_circle() {
        let h = 0.1;
        let phi = field(&[101, 101], h, |x| {
            ((x[0] - 5.0).powi(2) + (x[1] - 5.0).powi(2)).sqrt() - 2.5
        });
        let minus: Vec<_> = (0..2).map(|a| weno5(&phi, a, Side::Minus).unwrap()).collect();
        let plus: Vec<_> = (0..2).map(|a| weno5(&phi, a, Side::Plus).unwrap()).collect();
        let g = godunov_gradmag(&minus, &plus, &phi).unwrap();
        for i in interior(phi.spec(), GHOST) {
            let c = phi.spec().coord_of(i);
            let rho = ((c[0] - 5.0).powi(2) + (c[1] - 5.0).powi(2)).sqrt();
            if rho > 2.0 * h && phi.values()[i] != 0.0 {
                assert!((g.values()[i] - 1.0).abs() < h, "rho {rho}: {}", g.values()[i]);
            }
        }
    }
}
