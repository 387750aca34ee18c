//! Grid geometry, dense field containers, analytic shape sampling and
//! binarization.
//!
//! Fields are stored row-major with the last axis varying fastest. The
//! physical coordinate of multi-index `n` is `origin + h * n`.

mod io;

pub use io::{
    load_binary, load_field, load_scalar, save_binary, save_scalar, write_csv_binary,
    write_csv_scalar, write_pgm, LoadedField,
};
pub(crate) use io::fmt_f64;

use crate::error::{Error, Result};

/// Maximum supported dimensionality.
pub const MAX_DIM: usize = 3;

/// Multi-index padded with zeros past `ndim`.
pub type Index = [usize; MAX_DIM];

/// Sample lattice: per-axis counts, isotropic spacing and origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dims: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
    len: usize,
}

impl GridSpec {
    /// Lattice with its first sample at the physical origin.
    pub fn new(dims: &[usize], spacing: f64) -> Result<Self> {
        Self::with_origin(dims, spacing, &vec![0.0; dims.len()])
    }

    pub fn with_origin(dims: &[usize], spacing: f64, origin: &[f64]) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_DIM {
            return Err(Error::invalid(format!(
                "grid must have 1 to {MAX_DIM} axes, got {}",
                dims.len()
            )));
        }
        if origin.len() != dims.len() {
            return Err(Error::invalid(format!(
                "origin has {} components for a {}-axis grid",
                origin.len(),
                dims.len()
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("origin must be finite"));
        }
        let mut len: usize = 1;
        for &d in dims {
            if d == 0 {
                return Err(Error::invalid("every axis needs at least one sample"));
            }
            if d > u32::MAX as usize {
                return Err(Error::invalid(format!("axis length {d} exceeds u32")));
            }
            len = len
                .checked_mul(d)
                .ok_or_else(|| Error::invalid("cell count overflows the index type"))?;
        }
        Ok(Self {
            dims: dims.to_vec(),
            spacing,
            origin: origin.to_vec(),
            len,
        })
    }

    /// Lattice whose geometric center sits at `center`:
    /// `origin = center - h * (dims - 1) / 2`.
    pub fn centered(dims: &[usize], spacing: f64, center: &[f64]) -> Result<Self> {
        if center.len() != dims.len() {
            return Err(Error::invalid(format!(
                "center has {} components for a {}-axis grid",
                center.len(),
                dims.len()
            )));
        }
        let origin: Vec<f64> = dims
            .iter()
            .zip(center)
            .map(|(&d, &c)| c - spacing * (d as f64 - 1.0) / 2.0)
            .collect();
        Self::with_origin(dims, spacing, &origin)
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Total cell count N.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Linear-index stride of each axis.
    pub fn strides(&self) -> Index {
        let mut strides = [0; MAX_DIM];
        let mut s = 1;
        for axis in (0..self.ndim()).rev() {
            strides[axis] = s;
            s *= self.dims[axis];
        }
        strides
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.ndim());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn unravel(&self, mut linear: usize) -> Index {
        let mut index = [0; MAX_DIM];
        for axis in (0..self.ndim()).rev() {
            index[axis] = linear % self.dims[axis];
            linear /= self.dims[axis];
        }
        index
    }

    /// Physical coordinate of a multi-index: `origin + h * n`.
    pub fn coord(&self, index: &[usize]) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for (axis, &i) in index.iter().enumerate().take(self.ndim()) {
            x[axis] = self.origin[axis] + self.spacing * i as f64;
        }
        x
    }

    pub fn coord_of(&self, linear: usize) -> [f64; MAX_DIM] {
        let index = self.unravel(linear);
        self.coord(&index[..self.ndim()])
    }

    /// Calls `f(base, stride, n)` once for every 1D line of cells along `axis`;
    /// the line's cells are `base + k * stride` for `k < n`.
    pub fn for_each_line(&self, axis: usize, mut f: impl FnMut(usize, usize, usize)) {
        let n = self.dims[axis];
        let stride = self.stride(axis);
        let outer = self.len / (n * stride);
        for o in 0..outer {
            for inner in 0..stride {
                f(o * n * stride + inner, stride, n);
            }
        }
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what}: grid specs differ")))
        }
    }
}

/// Real-valued field over a grid. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at cell {i}")));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let values = vec![0.0; spec.len()];
        Self { spec, values }
    }

    pub fn constant(spec: GridSpec, value: f64) -> Result<Self> {
        let values = vec![value; spec.len()];
        Self::new(spec, values)
    }

    /// Evaluates `f` at the physical coordinate of every cell.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let ndim = spec.ndim();
        let values = (0..spec.len())
            .map(|i| f(&spec.coord_of(i)[..ndim]))
            .collect();
        Self::new(spec, values)
    }

    pub(crate) fn from_vec_unchecked(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.spec.linear_index(index)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cellwise map; fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.spec.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

// Spacing and origin are validated finite, so equality is reflexive.
impl Eq for GridSpec {}

/// {0,1} field; `true` cells form the set A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryField {
    spec: GridSpec,
    values: Vec<bool>,
}

impl BinaryField {
    pub fn new(spec: GridSpec, values: Vec<bool>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn filled(spec: GridSpec, value: bool) -> Self {
        let values = vec![value; spec.len()];
        Self { spec, values }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> bool) -> Self {
        let ndim = spec.ndim();
        let values = (0..spec.len())
            .map(|i| f(&spec.coord_of(i)[..ndim]))
            .collect();
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, index: &[usize]) -> bool {
        self.values[self.spec.linear_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: bool) {
        let i = self.spec.linear_index(index);
        self.values[i] = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of cells in A.
    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// 1.0 on A, 0.0 elsewhere.
    pub fn to_indicator(&self) -> ScalarField {
        ScalarField::from_vec_unchecked(
            self.spec.clone(),
            self.values.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
        )
    }

    pub fn complement(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| !v).collect(),
        }
    }
}

/// Analytic shape in physical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `||x - center|| - radius` (absolute value in 1D).
    Sphere { center: Vec<f64>, radius: f64 },
    /// Closed 2D polygon; interior by the even-odd rule.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Shape {
    pub fn sphere(center: &[f64], radius: f64) -> Self {
        Shape::Sphere {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Sphere { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::invalid(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
                if center.is_empty() || center.len() > MAX_DIM {
                    return Err(Error::invalid("sphere center must have 1 to 3 components"));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("sphere center must be finite"));
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::invalid(format!(
                        "polygon needs at least 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("polygon vertices must be finite"));
                }
            }
        }
        Ok(())
    }
}

fn sphere_value(x: &[f64], center: &[f64], radius: f64) -> f64 {
    let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
    r2.sqrt() - radius
}

/// Samples the exact signed distance of a sphere at every cell.
pub fn sample_sphere_sdf(spec: &GridSpec, shape: &Shape) -> Result<ScalarField> {
    shape.validate()?;
    let Shape::Sphere { center, radius } = shape else {
        return Err(Error::invalid("sample_sphere_sdf needs a sphere"));
    };
    if center.len() != spec.ndim() {
        return Err(Error::invalid(format!(
            "sphere center has {} components for a {}-axis grid",
            center.len(),
            spec.ndim()
        )));
    }
    ScalarField::from_fn(spec.clone(), |x| sphere_value(x, center, *radius))
}

/// Cell is set iff its physical center lies strictly inside the shape.
pub fn rasterize(spec: &GridSpec, shape: &Shape) -> Result<BinaryField> {
    shape.validate()?;
    match shape {
        Shape::Sphere { center, radius } => {
            if center.len() != spec.ndim() {
                return Err(Error::invalid(format!(
                    "sphere center has {} components for a {}-axis grid",
                    center.len(),
                    spec.ndim()
                )));
            }
            Ok(BinaryField::from_fn(spec.clone(), |x| {
                sphere_value(x, center, *radius) < 0.0
            }))
        }
        Shape::Polygon { vertices } => {
            if spec.ndim() != 2 {
                return Err(Error::invalid("polygons can only be rasterized on 2D grids"));
            }
            Ok(BinaryField::from_fn(spec.clone(), |x| {
                polygon_contains(vertices, [x[0], x[1]])
            }))
        }
    }
}

/// Even-odd test; points on an edge count as outside.
fn polygon_contains(vertices: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if on_segment(a, b, p) {
            return false;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let cross = dx * (p[1] - a[1]) - dy * (p[0] - a[0]);
    let scale = dx.abs().max(dy.abs()).max(1.0);
    if cross.abs() > 1e-12 * scale * scale {
        return false;
    }
    let within = |lo: f64, hi: f64, v: f64| v >= lo.min(hi) - 1e-12 && v <= lo.max(hi) + 1e-12;
    within(a[0], b[0], p[0]) && within(a[1], b[1], p[1])
}

/// `I = H(-phi)` with `H(0) = 0`: a cell is set iff `phi < 0`.
pub fn binarize(phi: &ScalarField) -> BinaryField {
    BinaryField {
        spec: phi.spec.clone(),
        values: phi.values.iter().map(|&v| v < 0.0).collect(),
    }
}
