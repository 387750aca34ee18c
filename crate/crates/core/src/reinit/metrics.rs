//! Error metrics and curvature histograms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{binarize, fmt_f64, BinaryField, ScalarField};
use crate::stencil::{curvature, gradient, is_singular, Scheme};

/// Representation, magnitude-gradient and gradient errors at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub iteration: usize,
    /// Max over cells of `|H(-φ) - I|`: 0 when the field represents the set.
    pub e_r: f64,
    /// `(1/N) · ||(|Dφ| - 1)||₂`.
    pub e_mg: f64,
    /// `(1/N) · ||Dφ - ∇φ_exact||₂`, when an exact gradient is known.
    pub e_d: Option<f64>,
}

/// Errors of `phi` against `reference` over the whole grid, with central4
/// differences.
pub fn error_metrics(
    phi: &ScalarField,
    reference: &BinaryField,
    exact_gradient: Option<&[ScalarField]>,
) -> Result<ErrorReport> {
    error_metrics_in(phi, reference, exact_gradient, None)
}

/// [`error_metrics`] restricted to the cells set in `region`; `N` is then
/// the region's cell count. `e_R` always covers the whole grid.
pub fn error_metrics_in(
    phi: &ScalarField,
    reference: &BinaryField,
    exact_gradient: Option<&[ScalarField]>,
    region: Option<&BinaryField>,
) -> Result<ErrorReport> {
    let spec = phi.spec();
    spec.ensure_same(reference.spec(), "error_metrics reference")?;
    if let Some(r) = region {
        spec.ensure_same(r.spec(), "error_metrics region")?;
    }
    if let Some(g) = exact_gradient {
        if g.len() != spec.ndim() {
            return Err(Error::invalid(format!(
                "exact gradient needs {} components, got {}",
                spec.ndim(),
                g.len()
            )));
        }
        for c in g {
            spec.ensure_same(c.spec(), "error_metrics exact gradient")?;
        }
    }

    let rep = binarize(phi);
    let e_r = if rep.values().iter().zip(reference.values()).any(|(a, b)| a != b) {
        1.0
    } else {
        0.0
    };

    let grad = gradient(phi, Scheme::Central4)?;
    let inside = |i: usize| region.is_none_or(|r| r.values()[i]);
    let n = (0..phi.len()).filter(|&i| inside(i)).count();
    if n == 0 {
        return Err(Error::invalid("error metrics region is empty"));
    }
    let mut mg = 0.0;
    let mut d = 0.0;
    for i in (0..phi.len()).filter(|&i| inside(i)) {
        let mag = grad.iter().map(|g| g.values()[i].powi(2)).sum::<f64>().sqrt();
        mg += (mag - 1.0).powi(2);
        if let Some(exact) = exact_gradient {
            d += grad
                .iter()
                .zip(exact)
                .map(|(g, e)| (g.values()[i] - e.values()[i]).powi(2))
                .sum::<f64>();
        }
    }
    let n = n as f64;
    Ok(ErrorReport {
        iteration: 0,
        e_r,
        e_mg: mg.sqrt() / n,
        e_d: exact_gradient.map(|_| d.sqrt() / n),
    })
}

fn report_row(r: &ErrorReport) -> String {
    format!(
        "{},{},{},{}\n",
        r.iteration,
        fmt_f64(r.e_r),
        fmt_f64(r.e_mg),
        r.e_d.map(fmt_f64).unwrap_or_default()
    )
}

/// Convergence log written row by row, so rows logged before a failure
/// survive it.
pub struct ConvergenceLog {
    out: BufWriter<File>,
}

impl ConvergenceLog {
    pub const HEADER: &'static str = "iter,e_R,e_MG,e_D\n";

    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(Self::HEADER.as_bytes())?;
        out.flush()?;
        Ok(ConvergenceLog { out })
    }

    pub fn push(&mut self, report: &ErrorReport) -> Result<()> {
        self.out.write_all(report_row(report).as_bytes())?;
        self.out.flush()?;
        Ok(())
    }
}

/// `iter,e_R,e_MG,e_D` CSV; `e_D` is blank when absent.
pub fn write_convergence_csv(path: impl AsRef<Path>, reports: &[ErrorReport]) -> Result<()> {
    let mut log = ConvergenceLog::create(path)?;
    for r in reports {
        log.push(r)?;
    }
    Ok(())
}

/// Fixed-width histogram of curvature samples from a band around the zero
/// level set.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Every non-singular band sample, including those outside the range.
    pub samples: Vec<f64>,
}

impl Histogram {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population standard deviation of the samples.
    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        (self.samples.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn median(&self) -> f64 {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        if n % 2 == 1 {
            s[n / 2]
        } else {
            0.5 * (s[n / 2 - 1] + s[n / 2])
        }
    }

    /// `[left, right)` of the fullest bin (first one on ties).
    pub fn mode_bin(&self) -> (f64, f64) {
        let mut k = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[k] {
                k = i;
            }
        }
        (self.edges[k], self.edges[k + 1])
    }

    /// `bin_left,bin_right,count` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::from("bin_left,bin_right,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{c}\n", fmt_f64(self.edges[k]), fmt_f64(self.edges[k + 1])));
        }
        File::create(path)?.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// Histogram over `range` in `bins` bins of the (mean) curvature at cells
/// with `|φ| < band_halfwidth`. Singular cells are skipped.
pub fn curvature_band_histogram(
    phi: &ScalarField,
    band_halfwidth: f64,
    range: (f64, f64),
    bins: usize,
) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!(
            "histogram needs bins > 0 and a finite range lo < hi, got {bins} over ({lo}, {hi})"
        )));
    }
    if !(band_halfwidth > 0.0) {
        return Err(Error::EmptyBand(format!(
            "band half-width {band_halfwidth} selects no cells"
        )));
    }
    let k = curvature(phi)?;
    let samples: Vec<f64> = phi
        .values()
        .iter()
        .zip(k.values())
        .filter(|(p, k)| p.abs() < band_halfwidth && !is_singular(**k))
        .map(|(_, &k)| k)
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyBand(format!(
            "no non-singular cells with |phi| < {band_halfwidth}"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &v in &samples {
        if v < lo || v > hi {
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram {
        edges,
        counts,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dt::{signed_distance_transform, Metric};
    use crate::grid::{rasterize, sample_sphere_sdf, GridSpec, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ramp_has_zero_errors() {
        let spec = GridSpec::new(&[9, 7], 0.5).unwrap();
        let phi = ScalarField::from_fn(spec.clone(), |x| x[0] - 2.1).unwrap();
        let b = binarize(&phi);
        let gx = ScalarField::constant(spec.clone(), 1.0).unwrap();
        let gy = ScalarField::zeros(spec);
        let r = error_metrics(&phi, &b, Some(&[gx, gy])).unwrap();
        assert_eq!(r.e_r, 0.0);
        assert!(r.e_mg < 1e-14);
        assert!(r.e_d.unwrap() < 1e-14);
    }

    #[test]
    fn corrected_sdt_represents_and_self_gradient_is_zero() {
        let spec = GridSpec::new(&[15, 15], 0.5).unwrap();
        let b = rasterize(&spec, &Shape::sphere(&[3.5, 3.5], 2.0)).unwrap();
        let phi = signed_distance_transform(&b, Metric::Euclidean, true).unwrap();
        let own = gradient(&phi, Scheme::Central4).unwrap();
        let r = error_metrics(&phi, &b, Some(&own)).unwrap();
        assert_eq!(r.e_r, 0.0);
        assert_eq!(r.e_d, Some(0.0));
        let flipped = error_metrics(&phi, &b.complement(), None).unwrap();
        assert_eq!(flipped.e_r, 1.0);
        assert_eq!(flipped.e_d, None);
    }

    #[test]
    fn metrics_match_independent_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let (nx, ny) = (rng.gen_range(5..12), rng.gen_range(5..12));
            let h = rng.gen_range(0.2..1.5);
            let spec = GridSpec::new(&[nx, ny], h).unwrap();
            let v: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let phi = ScalarField::new(spec.clone(), v.clone()).unwrap();
            let gx: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gy: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let exact = [
                ScalarField::new(spec.clone(), gx.clone()).unwrap(),
                ScalarField::new(spec.clone(), gy.clone()).unwrap(),
            ];
            let r = error_metrics(&phi, &binarize(&phi), Some(&exact)).unwrap();

            // direct 2D loops with explicit ghost extrapolation
            let at = |i: i64, j: i64| -> f64 {
                let clamp = |k: i64, n: usize| k.clamp(0, n as i64 - 1);
                let (ci, cj) = (clamp(i, nx), clamp(j, ny));
                let base = v[ci as usize * ny + cj as usize];
                let (di, dj) = (i - ci, j - cj);
                let slope_i = if di < 0 {
                    v[ny + cj as usize] - v[cj as usize]
                } else {
                    v[(nx - 1) * ny + cj as usize] - v[(nx - 2) * ny + cj as usize]
                };
                let slope_j = if dj < 0 {
                    v[ci as usize * ny + 1] - v[ci as usize * ny]
                } else {
                    v[ci as usize * ny + ny - 1] - v[ci as usize * ny + ny - 2]
                };
                base + di as f64 * slope_i + dj as f64 * slope_j
            };
            let (mut smg, mut sd) = (0.0, 0.0);
            for i in 0..nx as i64 {
                for j in 0..ny as i64 {
                    let dx = (-at(i + 2, j) + 8.0 * at(i + 1, j) - 8.0 * at(i - 1, j) + at(i - 2, j)) / (12.0 * h);
                    let dy = (-at(i, j + 2) + 8.0 * at(i, j + 1) - 8.0 * at(i, j - 1) + at(i, j - 2)) / (12.0 * h);
                    let k = i as usize * ny + j as usize;
                    smg += ((dx * dx + dy * dy).sqrt() - 1.0).powi(2);
                    sd += (dx - gx[k]).powi(2) + (dy - gy[k]).powi(2);
                }
            }
            let n = (nx * ny) as f64;
            let (bmg, bd) = (smg.sqrt() / n, sd.sqrt() / n);
            assert!((r.e_mg - bmg).abs() <= 1e-12 * bmg, "{} vs {bmg}", r.e_mg);
            assert!((r.e_d.unwrap() - bd).abs() <= 1e-12 * bd);
        }
    }

    #[test]
    fn region_restricts_normalization() {
        let spec = GridSpec::new(&[6, 6], 1.0).unwrap();
        let phi = ScalarField::from_fn(spec.clone(), |x| 2.0 * x[0] - 5.5).unwrap();
        let b = binarize(&phi);
        let all = error_metrics(&phi, &b, None).unwrap();
        let region = BinaryField::from_fn(spec, |x| x[1] < 3.0);
        let half = error_metrics_in(&phi, &b, None, Some(&region)).unwrap();
        // uniform per-cell error 1: (1/N)·sqrt(N) = 1/sqrt(N)
        assert!((all.e_mg - 1.0 / 6.0).abs() < 1e-12);
        assert!((half.e_mg - 1.0 / 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn histogram_of_exact_sphere() {
        let spec = GridSpec::centered(&[24, 24, 24], 1.0, &[11.5, 11.5, 11.5]).unwrap();
        let phi = sample_sphere_sdf(&spec, &Shape::sphere(&[11.5, 11.5, 11.5], 8.0)).unwrap();
        let hist = curvature_band_histogram(&phi, 1.0, (0.0, 0.5), 50).unwrap();
        let target = 2.0 / 8.0;
        let near = hist.samples.iter().filter(|v| (*v - target).abs() < 0.15 * target).count();
        assert!(near as f64 > 0.9 * hist.samples.len() as f64);
        let (l, r) = hist.mode_bin();
        assert!(l <= target + 0.02 && target - 0.02 <= r, "mode [{l}, {r})");
        assert_eq!(hist.counts.iter().sum::<usize>(), hist.samples.len());
    }

    #[test]
    fn histogram_errors() {
        let spec = GridSpec::new(&[8, 8], 1.0).unwrap();
        let phi = ScalarField::from_fn(spec, |x| ((x[0] - 3.5).powi(2) + (x[1] - 3.5).powi(2)).sqrt() - 2.0)
            .unwrap();
        assert!(matches!(curvature_band_histogram(&phi, 0.0, (0.0, 1.0), 10), Err(Error::EmptyBand(_))));
        let far = phi.map(|v| v + 100.0).unwrap();
        assert!(matches!(curvature_band_histogram(&far, 1.0, (0.0, 1.0), 10), Err(Error::EmptyBand(_))));
        assert!(curvature_band_histogram(&phi, 1.0, (1.0, 0.0), 10).is_err());
    }

    #[test]
    fn statistics() {
        let h = Histogram {
            edges: vec![0.0, 1.0],
            counts: vec![4],
            samples: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(h.median(), 2.5);
        assert_eq!(h.mean(), 2.5);
        assert!((h.std_dev() - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn convergence_csv_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let reports = [
            ErrorReport { iteration: 0, e_r: 0.0, e_mg: 0.5, e_d: None },
            ErrorReport { iteration: 1, e_r: 0.0, e_mg: 0.25, e_d: Some(0.125) },
        ];
        write_convergence_csv(&path, &reports).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,e_R,e_MG,e_D");
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2].split(',').count(), 4);
        assert_eq!(lines[2].split(',').nth(3).unwrap().parse::<f64>().unwrap(), 0.125);
    }
}
