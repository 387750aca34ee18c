//! Distance, feature and signed distance transforms of binary fields.
//!
//! Distances are measured between sample centers and returned in physical
//! units (lattice distance times `h`). The Euclidean transform is exact: a
//! separable lower-envelope scan over squared integer distances, one axis at a
//! time. Manhattan, Chebyshev and chamfer metrics use raster scans over a
//! neighbour mask, repeated until stable, which yields the exact path metric
//! of the mask on a box domain.

use crate::error::{Error, Result};
use crate::grid::{BinaryField, GridSpec, ScalarField, MAX_DIM};

/// Distance rule `g` between lattice offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    Manhattan,
    Chebyshev,
    /// Axial steps cost `axial`, two-axis diagonal steps cost `diagonal`.
    Chamfer { axial: f64, diagonal: f64 },
}

impl Metric {
    pub fn chamfer(axial: f64, diagonal: f64) -> Result<Self> {
        let m = Metric::Chamfer { axial, diagonal };
        m.validate()?;
        Ok(m)
    }

    /// The classic 3-4 chamfer mask.
    pub fn chamfer_3_4() -> Self {
        Metric::Chamfer {
            axial: 3.0,
            diagonal: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Metric::Chamfer { axial, diagonal } = *self {
            let ok = axial.is_finite()
                && diagonal.is_finite()
                && axial > 0.0
                && axial <= diagonal
                && diagonal <= 2.0 * axial;
            if !ok {
                return Err(Error::invalid(format!(
                    "chamfer weights need 0 < axial <= diagonal <= 2*axial, got ({axial}, {diagonal})"
                )));
            }
        }
        Ok(())
    }

    /// `g(z, 0)` for an integer offset, in lattice units.
    pub fn lattice_norm(&self, z: &[i64]) -> f64 {
        let mut a: Vec<u64> = z.iter().map(|v| v.unsigned_abs()).collect();
        match *self {
            Metric::Euclidean => (a.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt(),
            Metric::Manhattan => a.iter().sum::<u64>() as f64,
            Metric::Chebyshev => a.iter().copied().max().unwrap_or(0) as f64,
            Metric::Chamfer { axial, diagonal } => {
                a.sort_unstable_by(|x, y| y.cmp(x));
                let total: u64 = a.iter().sum();
                let largest = a.first().copied().unwrap_or(0);
                let rest = total - largest;
                // each diagonal step consumes one unit from two different axes
                let diagonals = if largest >= rest { rest } else { total / 2 };
                diagonals as f64 * diagonal + (total - 2 * diagonals) as f64 * axial
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Metric::Euclidean => "euclidean".into(),
            Metric::Manhattan => "manhattan".into(),
            Metric::Chebyshev => "chebyshev".into(),
            Metric::Chamfer { axial, diagonal } => format!("chamfer:{axial}:{diagonal}"),
        }
    }

    /// Parses `euclidean`, `manhattan`, `chebyshev`, `chamfer` (3-4) or
    /// `chamfer:<axial>:<diagonal>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "chebyshev" => Ok(Metric::Chebyshev),
            "chamfer" => Ok(Metric::chamfer_3_4()),
            _ => {
                let parts: Vec<&str> = s.split(':').collect();
                if parts.len() == 3 && parts[0] == "chamfer" {
                    let a = parts[1].parse::<f64>();
                    let b = parts[2].parse::<f64>();
                    if let (Ok(a), Ok(b)) = (a, b) {
                        return Metric::chamfer(a, b);
                    }
                }
                Err(Error::invalid(format!("unknown metric {s:?}")))
            }
        }
    }
}

/// Which set a distance is measured to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Distance to A (cells set in the binary field).
    Foreground,
    /// Distance to the complement of A.
    Background,
}

fn target_mask(b: &BinaryField, target: Target) -> Result<Vec<bool>> {
    let mask: Vec<bool> = match target {
        Target::Foreground => b.values().to_vec(),
        Target::Background => b.values().iter().map(|v| !v).collect(),
    };
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptySet(format!(
            "{} set is empty; distance is undefined",
            match target {
                Target::Foreground => "foreground",
                Target::Background => "background",
            }
        )));
    }
    Ok(mask)
}

/// Distance from every cell to the nearest cell of the target set, in
/// physical units. Target cells hold 0.
pub fn distance_transform(b: &BinaryField, metric: Metric, target: Target) -> Result<ScalarField> {
    metric.validate()?;
    let mask = target_mask(b, target)?;
    let spec = b.spec();
    let h = spec.spacing();
    let values = match metric {
        Metric::Euclidean => squared_edt(spec, &mask)
            .into_iter()
            .map(|d2| h * d2.sqrt())
            .collect(),
        _ => mask_scan_dt(spec, &mask, metric)
            .into_iter()
            .map(|d| h * d)
            .collect(),
    };
    Ok(ScalarField::from_vec_unchecked(spec.clone(), values))
}

/// Squared Euclidean lattice distance to the nearest `mask` cell.
fn squared_edt(spec: &GridSpec, mask: &[bool]) -> Vec<f64> {
    let mut d2: Vec<f64> = mask
        .iter()
        .map(|&m| if m { 0.0 } else { f64::INFINITY })
        .collect();
    let max_n = *spec.dims().iter().max().unwrap();
    let mut line = vec![0.0; max_n];
    let mut out = vec![0.0; max_n];
    let mut sites = Vec::with_capacity(max_n);
    let mut bounds = Vec::with_capacity(max_n);
    for axis in 0..spec.ndim() {
        spec.for_each_line(axis, |base, stride, n| {
            for k in 0..n {
                line[k] = d2[base + k * stride];
            }
            lower_envelope(&line[..n], &mut out[..n], &mut sites, &mut bounds);
            for k in 0..n {
                d2[base + k * stride] = out[k];
            }
        });
    }
    d2
}

/// `out[x] = min_y (f[y] + (x - y)^2)` over finite `f[y]`. `f` holds
/// integers, so every candidate value is exact.
fn lower_envelope(f: &[f64], out: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    for q in 0..f.len() {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            let Some(&p) = sites.last() else {
                sites.push(q);
                bounds.push(f64::NEG_INFINITY);
                break;
            };
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= *bounds.last().unwrap() {
                sites.pop();
                bounds.pop();
                continue;
            }
            sites.push(q);
            bounds.push(s);
            break;
        }
    }
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (x, o) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && bounds[k + 1] < x as f64 {
            k += 1;
        }
        let y = sites[k];
        let dx = x.abs_diff(y) as f64;
        *o = dx * dx + f[y];
    }
}

/// Neighbour offsets and step costs of the raster-scan mask for `metric`.
fn scan_mask(ndim: usize, metric: Metric) -> Vec<([i64; MAX_DIM], f64)> {
    let mut mask = Vec::new();
    let range = |axis: usize| if axis < ndim { -1i64..=1 } else { 0..=0 };
    for a in range(0) {
        for b in range(1) {
            for c in range(2) {
                let z = [a, b, c];
                let nonzero = z.iter().filter(|&&v| v != 0).count();
                let cost = match (metric, nonzero) {
                    (_, 0) => continue,
                    (Metric::Manhattan, 1) => 1.0,
                    (Metric::Manhattan, _) => continue,
                    (Metric::Chebyshev, _) => 1.0,
                    (Metric::Chamfer { axial, .. }, 1) => axial,
                    (Metric::Chamfer { diagonal, .. }, 2) => diagonal,
                    (Metric::Chamfer { .. }, _) => continue,
                    (Metric::Euclidean, _) => unreachable!("euclidean uses the separable scan"),
                };
                mask.push((z, cost));
            }
        }
    }
    mask
}

fn mask_scan_dt(spec: &GridSpec, mask: &[bool], metric: Metric) -> Vec<f64> {
    let ndim = spec.ndim();
    let dims = spec.dims();
    let strides = spec.strides();
    let neighbours = scan_mask(ndim, metric);
    // offsets that precede the cell in row-major order are relaxed on the
    // forward pass; the rest on the backward pass
    let (before, after): (Vec<_>, Vec<_>) = neighbours
        .into_iter()
        .partition(|(z, _)| z.iter().find(|&&v| v != 0).copied().unwrap_or(0) < 0);

    let mut d: Vec<f64> = mask
        .iter()
        .map(|&m| if m { 0.0 } else { f64::INFINITY })
        .collect();

    let relax = |d: &mut Vec<f64>, lin: usize, offsets: &[([i64; MAX_DIM], f64)]| -> bool {
        let idx = spec.unravel(lin);
        let mut best = d[lin];
        for (z, w) in offsets {
            let mut nb = 0usize;
            let mut inside = true;
            for axis in 0..ndim {
                let p = idx[axis] as i64 + z[axis];
                if p < 0 || p >= dims[axis] as i64 {
                    inside = false;
                    break;
                }
                nb += p as usize * strides[axis];
            }
            if inside {
                let cand = d[nb] + w;
                if cand < best {
                    best = cand;
                }
            }
        }
        if best < d[lin] {
            d[lin] = best;
            true
        } else {
            false
        }
    };

    loop {
        let mut changed = false;
        for lin in 0..spec.len() {
            changed |= relax(&mut d, lin, &before);
        }
        for lin in (0..spec.len()).rev() {
            changed |= relax(&mut d, lin, &after);
        }
        if !changed {
            break;
        }
    }
    d
}

/// For every cell, the linear index of one nearest target cell under the
/// Euclidean metric. Ties go to the smallest linear index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMap {
    spec: GridSpec,
    sites: Vec<usize>,
    squared: Vec<u64>,
}

impl FeatureMap {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Linear index of the nearest target cell, per cell.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Squared lattice distance to the site, per cell.
    pub fn squared_distances(&self) -> &[u64] {
        &self.squared
    }

    pub fn site_index(&self, linear: usize) -> Vec<usize> {
        let idx = self.spec.unravel(self.sites[linear]);
        idx[..self.spec.ndim()].to_vec()
    }
}

/// Nearest-target-cell map (the Voronoi labeling of the target cells).
pub fn feature_transform(b: &BinaryField, target: Target) -> Result<FeatureMap> {
    let mask = target_mask(b, target)?;
    let spec = b.spec();
    const NONE: u64 = u64::MAX;
    let mut squared: Vec<u64> = mask.iter().map(|&m| if m { 0 } else { NONE }).collect();
    let mut sites: Vec<usize> = (0..spec.len())
        .map(|i| if mask[i] { i } else { usize::MAX })
        .collect();

    let max_n = *spec.dims().iter().max().unwrap();
    let mut line_d = vec![0u64; max_n];
    let mut line_s = vec![0usize; max_n];
    for axis in 0..spec.ndim() {
        spec.for_each_line(axis, |base, stride, n| {
            for k in 0..n {
                line_d[k] = squared[base + k * stride];
                line_s[k] = sites[base + k * stride];
            }
            for x in 0..n {
                // lexicographic minimum of (distance, site) scanning outward
                let mut best = (NONE, usize::MAX);
                for r in 0..n {
                    let r2 = (r * r) as u64;
                    if best.0 != NONE && r2 > best.0 {
                        break;
                    }
                    let left = x.checked_sub(r);
                    let right = if r > 0 && x + r < n { Some(x + r) } else { None };
                    if left.is_none() && right.is_none() && r > 0 {
                        break;
                    }
                    for y in left.into_iter().chain(right) {
                        if line_d[y] != NONE {
                            let cand = (line_d[y] + r2, line_s[y]);
                            if cand < best {
                                best = cand;
                            }
                        }
                    }
                }
                squared[base + x * stride] = best.0;
                sites[base + x * stride] = best.1;
            }
        });
    }
    Ok(FeatureMap {
        spec: spec.clone(),
        sites,
        squared,
    })
}

/// Signed distance transform, negative inside A.
///
/// Uncorrected: `+d(x, A)` on the complement, `-d(x, A^C)` on A.
/// Corrected: the same shifted by half a sample toward zero, so the zero
/// crossing falls midway between edge samples and no cell is exactly zero.
pub fn signed_distance_transform(
    b: &BinaryField,
    metric: Metric,
    corrected: bool,
) -> Result<ScalarField> {
    let inside = b.count();
    if inside == 0 || inside == b.len() {
        return Err(Error::EmptySet(
            "signed distance needs both foreground and background cells".into(),
        ));
    }
    let to_fg = distance_transform(b, metric, Target::Foreground)?;
    let to_bg = distance_transform(b, metric, Target::Background)?;
    let half = if corrected {
        0.5 * b.spec().spacing()
    } else {
        0.0
    };
    let values = b
        .values()
        .iter()
        .zip(to_fg.values().iter().zip(to_bg.values()))
        .map(|(&in_a, (&dfg, &dbg))| if in_a { half - dbg } else { dfg - half })
        .collect();
    Ok(ScalarField::from_vec_unchecked(b.spec().clone(), values))
}
