//! Reachable distance levels and the checks built on them: residual against
//! the level set, Voronoi edge maps, exact/quantized pairs and the census of
//! exactly flat differences.

use std::io::Write;
use std::path::Path;

use crate::dt::{feature_transform, FeatureMap, Metric, Target};
use crate::error::{Error, Result};
use crate::grid::{BinaryField, GridSpec, ScalarField};
use crate::stencil::{diff, Scheme, StencilSpec};

/// Levels closer than this are merged.
pub const LEVEL_TOLERANCE: f64 = 1e-12;

/// Sorted distinct values `g(z, 0)`, `z` an integer offset, up to a cutoff.
/// Levels are in lattice units; multiply by `h` for physical distances.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    metric: Metric,
    ndim: usize,
    cutoff: f64,
    levels: Vec<f64>,
}

impl LevelSet {
    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Closest level to `v` and its distance from `v`.
    pub fn nearest(&self, v: f64) -> (f64, f64) {
        let k = self.levels.partition_point(|&l| l < v);
        let mut best = (f64::NAN, f64::INFINITY);
        for j in [k.wrapping_sub(1), k] {
            if let Some(&l) = self.levels.get(j) {
                let d = (l - v).abs();
                if d < best.1 {
                    best = (l, d);
                }
            }
        }
        best
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.nearest(v).1 <= tol
    }
}

/// All distinct `g(z, 0) <= l_max` over integer offsets `z` in `ndim`
/// dimensions.
pub fn enumerate_levels(metric: Metric, ndim: usize, l_max: f64) -> Result<LevelSet> {
    metric.validate()?;
    if !(1..=3).contains(&ndim) {
        return Err(Error::invalid(format!("ndim must be 1, 2 or 3, got {ndim}")));
    }
    if !(l_max > 0.0 && l_max.is_finite()) {
        return Err(Error::invalid(format!("level cutoff must be positive, got {l_max}")));
    }
    let step = match metric {
        Metric::Chamfer { axial, .. } => axial,
        _ => 1.0,
    };
    // every metric here grows at least `step` per unit of the largest component
    let side = (l_max / step).floor() as i64;
    let range = |axis: usize| if axis < ndim { 0..=side } else { 0..=0 };
    let mut raw = Vec::new();
    for a in range(0) {
        for b in range(1) {
            for c in range(2) {
                // metrics are symmetric under sign flips, so the positive orthant suffices
                let l = metric.lattice_norm(&[a, b, c][..ndim]);
                if l <= l_max {
                    raw.push(l);
                }
            }
        }
    }
    raw.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = Vec::with_capacity(raw.len());
    for l in raw {
        if levels.last().is_none_or(|&last| l - last > LEVEL_TOLERANCE) {
            levels.push(l);
        }
    }
    Ok(LevelSet {
        metric,
        ndim,
        cutoff: l_max,
        levels,
    })
}

/// How a field value maps to a candidate level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `|φ| / h`.
    Raw,
    /// `(|φ| + h/2) / h`, undoing the half-sample offset of the corrected
    /// signed distance transform.
    CorrectedSdt,
}

impl Convention {
    pub fn normalize(self, v: f64, h: f64) -> f64 {
        match self {
            Convention::Raw => v.abs() / h,
            Convention::CorrectedSdt => (v.abs() + 0.5 * h) / h,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Largest residual over the checked cells.
    pub max: f64,
    /// Per-cell distance to the nearest level, in lattice units. Skipped
    /// cells hold 0.
    pub residuals: ScalarField,
    /// Cells whose normalized value exceeds the level cutoff.
    pub skipped: usize,
}

/// Distance of every normalized cell value to the nearest reachable level.
pub fn quantization_residual(phi: &ScalarField, ls: &LevelSet, convention: Convention) -> ResidualReport {
    let h = phi.spec().spacing();
    let mut skipped = 0;
    let mut max: f64 = 0.0;
    let values = phi
        .values()
        .iter()
        .map(|&v| {
            let l = convention.normalize(v, h);
            if l > ls.cutoff() + 1e-9 {
                skipped += 1;
                return 0.0;
            }
            let r = ls.nearest(l).1;
            max = max.max(r);
            r
        })
        .collect();
    ResidualReport {
        max,
        residuals: ScalarField::from_vec_unchecked(phi.spec().clone(), values),
        skipped,
    }
}

fn face_neighbours(spec: &GridSpec, lin: usize, mut f: impl FnMut(usize)) {
    let idx = spec.unravel(lin);
    for axis in 0..spec.ndim() {
        let s = spec.stride(axis);
        if idx[axis] > 0 {
            f(lin - s);
        }
        if idx[axis] + 1 < spec.dims()[axis] {
            f(lin + s);
        }
    }
}

fn edges_from_labels(ft: &FeatureMap, eligible: impl Fn(usize, usize) -> bool) -> BinaryField {
    let spec = ft.spec();
    let sites = ft.sites();
    let values = (0..spec.len())
        .map(|i| {
            let mut edge = false;
            face_neighbours(spec, i, |j| edge |= eligible(i, j) && sites[j] != sites[i]);
            edge
        })
        .collect();
    BinaryField::new(spec.clone(), values).expect("length matches spec")
}

/// Cells with a face neighbour carrying a different nearest-site label,
/// the sites being the cells of `target`.
pub fn voronoi_edges(b: &BinaryField, target: Target) -> Result<BinaryField> {
    let ft = feature_transform(b, target)?;
    Ok(edges_from_labels(&ft, |_, _| true))
}

/// Voronoi edges of the signed transform: cells outside A are labeled by
/// their nearest cell of A, cells inside A by their nearest cell outside,
/// and only neighbours on the same side are compared.
pub fn signed_voronoi_edges(b: &BinaryField) -> Result<BinaryField> {
    let to_fg = feature_transform(b, Target::Foreground)?;
    let to_bg = feature_transform(b, Target::Background)?;
    let v = b.values();
    let outside = edges_from_labels(&to_fg, |i, j| !v[i] && !v[j]);
    let inside = edges_from_labels(&to_bg, |i, j| v[i] && v[j]);
    let values = outside
        .values()
        .iter()
        .zip(inside.values())
        .map(|(&a, &b)| a || b)
        .collect();
    BinaryField::new(b.spec().clone(), values)
}

/// One `(exact, quantized)` pair per cell in row-major order.
pub fn regression_pairs(exact: &ScalarField, quantized: &ScalarField) -> Result<Vec<(f64, f64)>> {
    exact.spec().ensure_same(quantized.spec(), "regression_pairs")?;
    Ok(exact
        .values()
        .iter()
        .copied()
        .zip(quantized.values().iter().copied())
        .collect())
}

#[derive(Debug, Clone)]
pub struct Census {
    pub count: usize,
    pub mask: BinaryField,
}

/// Cells whose central difference of `quantized` along `axis` is exactly
/// zero although the exact gradient component exceeds 0.1 in magnitude.
pub fn flat_gradient_census(
    quantized: &ScalarField,
    exact_gradient_axis: &ScalarField,
    axis: usize,
) -> Result<Census> {
    quantized
        .spec()
        .ensure_same(exact_gradient_axis.spec(), "flat_gradient_census")?;
    let d = diff(quantized, StencilSpec::new(Scheme::Central2, axis))?;
    let values: Vec<bool> = d
        .values()
        .iter()
        .zip(exact_gradient_axis.values())
        .map(|(&q, &e)| q == 0.0 && e.abs() > 0.1)
        .collect();
    let count = values.iter().filter(|&&v| v).count();
    Ok(Census {
        count,
        mask: BinaryField::new(quantized.spec().clone(), values)?,
    })
}

/// `exact,quantized` CSV.
pub fn write_pairs_csv(path: impl AsRef<Path>, pairs: &[(f64, f64)]) -> Result<()> {
    let mut out = String::from("exact,quantized\n");
    for (e, q) in pairs {
        out.push_str(&format!("{},{}\n", crate::grid::fmt_f64(*e), crate::grid::fmt_f64(*q)));
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// `index,level` CSV with levels scaled to physical units by `h`.
pub fn write_levels_csv(path: impl AsRef<Path>, ls: &LevelSet, h: f64) -> Result<()> {
    let mut out = String::from("index,level\n");
    for (i, l) in ls.levels().iter().enumerate() {
        out.push_str(&format!("{i},{}\n", crate::grid::fmt_f64(h * l)));
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dt::signed_distance_transform;
    use crate::grid::{rasterize, sample_sphere_sdf, Shape};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(dims: &[usize], seed: u64) -> BinaryField {
        let spec = GridSpec::new(dims, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let b = BinaryField::new(spec.clone(), (0..spec.len()).map(|_| rng.gen_bool(0.3)).collect())
                .unwrap();
            if b.count() > 0 && b.count() < b.len() {
                return b;
            }
        }
    }

    #[test]
    fn euclidean_2d_levels() {
        let ls = enumerate_levels(Metric::Euclidean, 2, 2.5).unwrap();
        let want = [0.0, 1.0, 2f64.sqrt(), 2.0, 5f64.sqrt()];
        assert_eq!(ls.levels(), &want);
    }

    #[test]
    fn integer_metric_levels() {
        for n in 1..=3 {
            let ls = enumerate_levels(Metric::Manhattan, n, 3.0).unwrap();
            assert_eq!(ls.levels(), &[0.0, 1.0, 2.0, 3.0]);
        }
        let ls = enumerate_levels(Metric::Euclidean, 1, 3.0).unwrap();
        assert_eq!(ls.levels(), &[0.0, 1.0, 2.0, 3.0]);
        let ls = enumerate_levels(Metric::chamfer_3_4(), 2, 8.0).unwrap();
        assert_eq!(ls.levels(), &[0.0, 3.0, 4.0, 6.0, 7.0, 8.0]);
        assert!(enumerate_levels(Metric::Euclidean, 2, 0.0).is_err());
    }

    #[test]
    fn euclidean_levels_cover_integer_box() {
        for n in 1..=3 {
            let l_max = 7.3;
            let ls = enumerate_levels(Metric::Euclidean, n, l_max).unwrap();
            let side = l_max.ceil() as i64;
            let range = |axis: usize| if axis < n { -side..=side } else { 0..=0 };
            for a in range(0) {
                for b in range(1) {
                    for c in range(2) {
                        let l = ((a * a + b * b + c * c) as f64).sqrt();
                        if l <= l_max {
                            assert!(ls.contains(l, 0.0), "missing {l}");
                        }
                    }
                }
            }
            assert_eq!(ls.levels()[0], 0.0);
            assert!(ls.levels().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn residual_of_corrected_sdt_vanishes() {
        let metrics = [
            Metric::Euclidean,
            Metric::Manhattan,
            Metric::Chebyshev,
            Metric::chamfer_3_4(),
        ];
        for seed in 0..8 {
            let b = random_field(&[32, 32], seed);
            for metric in metrics {
                let phi = signed_distance_transform(&b, metric, true).unwrap();
                let l_max = phi.max_abs() + 1.0;
                let ls = enumerate_levels(metric, 2, l_max).unwrap();
                let r = quantization_residual(&phi, &ls, Convention::CorrectedSdt);
                assert_eq!(r.skipped, 0);
                assert!(r.max < 1e-9, "{metric:?} seed {seed}: {}", r.max);
                let raw = signed_distance_transform(&b, metric, false).unwrap();
                assert!(quantization_residual(&raw, &ls, Convention::Raw).max < 1e-9);
            }
        }
    }

    #[test]
    fn exact_circle_misses_levels() {
        let spec = GridSpec::new(&[11, 11], 1.0).unwrap();
        let phi = sample_sphere_sdf(&spec, &Shape::sphere(&[5.0, 5.0], 2.25)).unwrap();
        let ls = enumerate_levels(Metric::Euclidean, 2, 20.0).unwrap();
        assert!(quantization_residual(&phi, &ls, Convention::CorrectedSdt).max > 0.01);
    }

    #[test]
    fn residual_on_level_and_skip() {
        let h = 0.5;
        let spec = GridSpec::new(&[3], h).unwrap();
        let phi = ScalarField::constant(spec.clone(), h * 2f64.sqrt() - h / 2.0).unwrap();
        let ls = enumerate_levels(Metric::Euclidean, 2, 3.0).unwrap();
        let r = quantization_residual(&phi, &ls, Convention::CorrectedSdt);
        assert!(r.max < 1e-12);
        let far = ScalarField::constant(spec, 100.0).unwrap();
        let r = quantization_residual(&far, &ls, Convention::Raw);
        assert_eq!(r.skipped, 3);
        assert_eq!(r.max, 0.0);
    }

    #[test]
    fn forward_differences_lie_in_level_difference_set() {
        for seed in 0..4 {
            let b = random_field(&[24, 24], 100 + seed);
            let phi = signed_distance_transform(&b, Metric::Euclidean, true).unwrap();
            let h = phi.spec().spacing();
            let ls = enumerate_levels(Metric::Euclidean, 2, 2.0 * (phi.max_abs() / h + 1.0)).unwrap();
            for axis in 0..2 {
                let d = diff(&phi, StencilSpec::new(Scheme::Forward1, axis)).unwrap();
                let n = phi.spec().dims()[axis];
                for i in 0..phi.len() {
                    if phi.spec().unravel(i)[axis] + 1 == n {
                        continue; // ghost-extrapolated edge
                    }
                    // d = l_p - l_q for some levels p, q
                    let v = d.values()[i];
                    let hit = ls.levels().iter().any(|&lq| ls.contains(v + lq, 1e-9));
                    assert!(hit, "seed {seed} cell {i} difference {v}");
                }
            }
        }
    }

    #[test]
    fn voronoi_two_sites() {
        let spec = GridSpec::new(&[5, 5], 1.0).unwrap();
        let mut b = BinaryField::filled(spec.clone(), false);
        b.set(&[0, 0], true);
        b.set(&[4, 0], true);
        let e = voronoi_edges(&b, Target::Foreground).unwrap();
        // brute-force labels: ties go to (0, 0), so rows 0..=2 vs 3..=4
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(e.get(&[i, j]), i == 2 || i == 3, "({i},{j})");
            }
        }
        let mut single = BinaryField::filled(spec, false);
        single.set(&[2, 3], true);
        assert_eq!(voronoi_edges(&single, Target::Foreground).unwrap().count(), 0);
    }

    #[test]
    fn voronoi_symmetric_and_translation_invariant() {
        let spec = GridSpec::new(&[9, 12], 1.0).unwrap();
        let mut b = BinaryField::filled(spec.clone(), false);
        b.set(&[4, 2], true);
        b.set(&[4, 9], true);
        let e = voronoi_edges(&b, Target::Foreground).unwrap();
        for i in 0..9 {
            for j in 0..12 {
                assert_eq!(e.get(&[i, j]), e.get(&[8 - i, j]));
            }
        }
        assert!(e.count() > 0);

        let wide = GridSpec::new(&[20, 20], 1.0).unwrap();
        let sites = [[3usize, 4usize], [6, 9], [10, 5]];
        let place = |di: usize, dj: usize| {
            let mut f = BinaryField::filled(wide.clone(), false);
            for s in sites {
                f.set(&[s[0] + di, s[1] + dj], true);
            }
            voronoi_edges(&f, Target::Foreground).unwrap()
        };
        let (e0, e1) = (place(0, 0), place(2, 3));
        // compare away from the edges the translation pushes in
        for i in 0..14 {
            for j in 0..13 {
                assert_eq!(e0.get(&[i + 2, j + 3]), e1.get(&[i + 4, j + 6]), "({i},{j})");
            }
        }
    }

    #[test]
    fn signed_edges_of_circle() {
        let spec = GridSpec::new(&[21, 21], 0.5).unwrap();
        let b = rasterize(&spec, &Shape::sphere(&[5.0, 5.0], 2.5)).unwrap();
        let e = signed_voronoi_edges(&b).unwrap();
        assert!(e.count() > 0);
        assert!(signed_voronoi_edges(&BinaryField::filled(spec, false)).is_err());
    }

    #[test]
    fn regression_pairs_cases() {
        let spec = GridSpec::new(&[11, 11], 1.0).unwrap();
        let shape = Shape::sphere(&[5.0, 5.0], 2.25);
        let exact = sample_sphere_sdf(&spec, &shape).unwrap();
        let same = regression_pairs(&exact, &exact).unwrap();
        assert!(same.iter().all(|(a, b)| a == b));
        let q = signed_distance_transform(&rasterize(&spec, &shape).unwrap(), Metric::Euclidean, true)
            .unwrap();
        let pairs = regression_pairs(&exact, &q).unwrap();
        assert_eq!(pairs.len(), 121);
        let ls = enumerate_levels(Metric::Euclidean, 2, 20.0).unwrap();
        for (_, v) in pairs {
            assert!(ls.contains(Convention::CorrectedSdt.normalize(v, 1.0), 1e-9));
        }
        let tiny = ScalarField::zeros(GridSpec::new(&[1], 1.0).unwrap());
        assert_eq!(regression_pairs(&tiny, &tiny).unwrap(), vec![(0.0, 0.0)]);
        let other = ScalarField::zeros(GridSpec::new(&[2], 1.0).unwrap());
        assert!(regression_pairs(&tiny, &other).is_err());
    }

    fn census_for(r: f64, h: f64, c: f64, exact_input: bool) -> usize {
        let spec = GridSpec::new(&[21, 21], h).unwrap();
        let shape = Shape::sphere(&[c, c], r);
        let field = if exact_input {
            sample_sphere_sdf(&spec, &shape).unwrap()
        } else {
            signed_distance_transform(&rasterize(&spec, &shape).unwrap(), Metric::Euclidean, true).unwrap()
        };
        let gx = ScalarField::from_fn(spec, |x| {
            let rho = ((x[0] - c).powi(2) + (x[1] - c).powi(2)).sqrt();
            if rho == 0.0 { 0.0 } else { (x[0] - c) / rho }
        })
        .unwrap();
        flat_gradient_census(&field, &gx, 0).unwrap().count
    }

    #[test]
    fn census_counts() {
        let q = census_for(2.5, 0.5, 5.0, false);
        assert!(q > 0);
        assert_eq!(census_for(2.3, 0.5, 5.0, true), 0);
        assert_eq!(census_for(5.0, 1.0, 10.0, false), q);
        let spec = GridSpec::new(&[6, 6], 1.0).unwrap();
        let flat = ScalarField::constant(spec.clone(), 3.0).unwrap();
        let zero = ScalarField::zeros(spec);
        assert_eq!(flat_gradient_census(&flat, &zero, 1).unwrap().count, 0);
    }

    proptest! {
        #[test]
        fn levels_closed_under_lattice_symmetry(
            z in proptest::array::uniform3(-6i64..=6),
            metric_id in 0usize..4,
        ) {
            let metric = [Metric::Euclidean, Metric::Manhattan, Metric::Chebyshev, Metric::chamfer_3_4()][metric_id];
            let ls = enumerate_levels(metric, 3, 40.0).unwrap();
            let l = metric.lattice_norm(&z);
            prop_assert!(ls.contains(l, 0.0));
            let permuted = [-z[2], z[0], -z[1]];
            prop_assert_eq!(metric.lattice_norm(&permuted), l);
        }

        #[test]
        fn corrected_sdt_residual_random(seed in any::<u64>(), rows in 2usize..20, cols in 2usize..20) {
            let spec = GridSpec::new(&[rows, cols], 0.75).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = BinaryField::new(spec.clone(), (0..spec.len()).map(|_| rng.gen_bool(0.5)).collect()).unwrap();
            prop_assume!(b.count() > 0 && b.count() < b.len());
            let phi = signed_distance_transform(&b, Metric::Euclidean, true).unwrap();
            let ls = enumerate_levels(Metric::Euclidean, 2, 30.0).unwrap();
            prop_assert!(quantization_residual(&phi, &ls, Convention::CorrectedSdt).max < 1e-9);
        }
    }
}
