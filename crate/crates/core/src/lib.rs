//! Distance-field toolkit: exact distance and signed distance transforms of
//! binary grids, finite-difference analysis of the quantization those
//! transforms carry, and a dither + reinitialization pipeline that removes it
//! without changing the represented set.
//!
//! Modules, bottom-up:
//!
//! - [`grid`]: lattice geometry, field containers, shape sampling, file I/O.
//! - [`dt`]: distance, feature and signed distance transforms.
//! - [`stencil`]: finite differences, curvature, WENO5, Godunov Hamiltonian.
//! - [`quant`]: reachable distance levels, residual checks, Voronoi edges.
//! - [`reinit`]: dithering, reinitialization and error metrics.
//! - [`experiments`]: file-emitting experiment drivers used by the CLI.

pub mod dt;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod quant;
pub mod reinit;
pub mod stencil;

pub use dt::{distance_transform, feature_transform, signed_distance_transform, Metric, Target};
pub use error::{Error, ErrorKind, Result};
pub use grid::{binarize, rasterize, sample_sphere_sdf, BinaryField, GridSpec, ScalarField, Shape};
