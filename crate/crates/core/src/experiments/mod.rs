//! File-emitting experiment drivers behind the command-line tool.
//!
//! Each command validates its configuration before touching the file
//! system, writes everything under `config.out_dir`, and returns a
//! [`RunReport`] listing the files and the scalar results that also go to
//! `summary.csv`.

mod config;

pub use config::{Experiment, ExperimentConfig, KEYS};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dt::{signed_distance_transform, Target};
use crate::error::Result;
use crate::grid::{
    fmt_f64, rasterize, sample_sphere_sdf, save_binary, save_scalar, write_csv_binary, write_csv_scalar,
    write_pgm, BinaryField, GridSpec, ScalarField,
};
use crate::quant::{
    enumerate_levels, flat_gradient_census, quantization_residual, regression_pairs, signed_voronoi_edges,
    voronoi_edges, write_levels_csv, write_pairs_csv, Convention,
};
use crate::reinit::{
    curvature_band_histogram, dither, reinitialize_with, ConvergenceLog, DitherParams, ErrorReport,
    ReinitParams,
};
use crate::stencil::{
    curvature_2d, diff, gradient_magnitude, is_singular, laplacian, mixed_diff, second_diff, Scheme,
    StencilSpec,
};

/// Iterations at which reinitialization snapshots are saved.
pub const SNAPSHOT_ITERATIONS: [usize; 6] = [0, 10, 20, 50, 100, 400];

/// Outcome of one command.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Scalar results in emission order, as written to `summary.csv`.
    pub summary: Vec<(String, f64)>,
    /// Convergence log of reinitialization commands (all runs, in order).
    pub reports: Vec<ErrorReport>,
}

impl RunReport {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

struct Emitter {
    dir: PathBuf,
    report: RunReport,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Emitter {
            dir: dir.to_path_buf(),
            report: RunReport::default(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.report.files.push(p.clone());
        p
    }

    /// SDF1 always, CSV for 1D/2D, PGM for 2D. Singular curvature markers
    /// are zeroed in the PGM preview only.
    fn scalar(&mut self, name: &str, field: &ScalarField) -> Result<()> {
        save_scalar(self.path(&format!("{name}.sdf1")), field)?;
        let ndim = field.spec().ndim();
        if ndim <= 2 {
            write_csv_scalar(self.path(&format!("{name}.csv")), field)?;
        }
        if ndim == 2 {
            let preview = field.map(|v| if is_singular(v) { 0.0 } else { v })?;
            write_pgm(self.path(&format!("{name}.pgm")), &preview)?;
        }
        Ok(())
    }

    fn binary(&mut self, name: &str, field: &BinaryField) -> Result<()> {
        save_binary(self.path(&format!("{name}.sdf1")), field)?;
        let ndim = field.spec().ndim();
        if ndim <= 2 {
            write_csv_binary(self.path(&format!("{name}.csv")), field)?;
        }
        if ndim == 2 {
            write_pgm(self.path(&format!("{name}.pgm")), &field.to_indicator())?;
        }
        Ok(())
    }

    fn put(&mut self, key: impl Into<String>, value: f64) {
        self.report.summary.push((key.into(), value));
    }

    fn finish(mut self, config: &ExperimentConfig) -> Result<RunReport> {
        let mut text = String::from("key,value\n");
        for (k, v) in &self.report.summary {
            text.push_str(&format!("{k},{}\n", fmt_f64(*v)));
        }
        let p = self.path("summary.csv");
        fs::write(p, text)?;
        let p = self.path("config.txt");
        fs::write(p, config.to_text())?;
        Ok(self.report)
    }
}

/// Runs the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    match config.experiment {
        Experiment::Quant1d | Experiment::Quant2d => cmd_quant(config),
        Experiment::Gradients => cmd_gradients(config),
        Experiment::Higher => cmd_higher(config),
        Experiment::Voronoi => cmd_voronoi(config),
        Experiment::Reinit => cmd_reinit(config),
        Experiment::SweepAlpha => cmd_sweep_alpha(config),
        Experiment::CurvatureHist => cmd_curvature_hist(config),
    }
}

fn quantized(config: &ExperimentConfig, spec: &GridSpec) -> Result<(BinaryField, ScalarField)> {
    let b = rasterize(spec, &config.shape()?)?;
    let phi = signed_distance_transform(&b, config.metric, true)?;
    Ok((b, phi))
}

/// Offset from the sphere center and its length, per cell.
fn radial(spec: &GridSpec, center: &[f64], i: usize) -> ([f64; 3], f64) {
    let c = spec.coord_of(i);
    let mut r = [0.0; 3];
    for k in 0..spec.ndim() {
        r[k] = c[k] - center[k];
    }
    (r, r.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Analytic gradient of the sphere distance, zero at the center.
pub fn sphere_gradient(spec: &GridSpec, center: &[f64]) -> Vec<ScalarField> {
    (0..spec.ndim())
        .map(|axis| {
            let values = (0..spec.len())
                .map(|i| {
                    let (r, rho) = radial(spec, center, i);
                    if rho == 0.0 {
                        0.0
                    } else {
                        r[axis] / rho
                    }
                })
                .collect();
            ScalarField::from_vec_unchecked(spec.clone(), values)
        })
        .collect()
}

fn analytic(spec: &GridSpec, center: &[f64], f: impl Fn([f64; 3], f64) -> f64) -> ScalarField {
    let values = (0..spec.len())
        .map(|i| {
            let (r, rho) = radial(spec, center, i);
            if rho == 0.0 {
                0.0
            } else {
                f(r, rho)
            }
        })
        .collect();
    ScalarField::from_vec_unchecked(spec.clone(), values)
}

fn difference(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| if is_singular(*x) || is_singular(*y) { 0.0 } else { x - y })
        .collect();
    ScalarField::from_vec_unchecked(a.spec().clone(), values)
}

/// Cells farther than `2h` from the sphere center, where the exact
/// distance is smooth.
fn smooth_region(spec: &GridSpec, center: &[f64]) -> Vec<bool> {
    (0..spec.len())
        .map(|i| radial(spec, center, i).1 > 2.0 * spec.spacing())
        .collect()
}

fn max_abs_in(field: &ScalarField, region: &[bool]) -> f64 {
    field
        .values()
        .iter()
        .zip(region)
        .filter(|(v, &r)| r && !is_singular(**v))
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max)
}

fn mean_in(field: &ScalarField, region: &[bool]) -> f64 {
    let (sum, n) = field
        .values()
        .iter()
        .zip(region)
        .filter(|(_, &r)| r)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    sum / n as f64
}

/// `quant1d` / `quant2d`: exact distance, raster, signed transforms,
/// exact-vs-quantized pairs and the reachable level table.
pub fn cmd_quant(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let spec = config.grid()?;
    let shape = config.shape()?;
    let exact = sample_sphere_sdf(&spec, &shape)?;
    let b = rasterize(&spec, &shape)?;
    let corrected = signed_distance_transform(&b, config.metric, true)?;
    let uncorrected = signed_distance_transform(&b, config.metric, false)?;
    let h = spec.spacing();
    let l_max = corrected.max_abs() / h + 1.0;
    let levels = enumerate_levels(config.metric, spec.ndim(), l_max)?;
    let pairs = regression_pairs(&exact, &corrected)?;

    let mut out = Emitter::new(&config.out_dir)?;
    out.scalar("exact_sdf", &exact)?;
    out.binary("binary", &b)?;
    out.scalar("sdt", &corrected)?;
    out.scalar("sdt_uncorrected", &uncorrected)?;
    let p = out.path("regression.csv");
    write_pairs_csv(p, &pairs)?;
    let p = out.path("levels.csv");
    write_levels_csv(p, &levels, h)?;

    let res = quantization_residual(&corrected, &levels, Convention::CorrectedSdt);
    let raw = quantization_residual(&uncorrected, &levels, Convention::Raw);
    let exact_res = quantization_residual(&exact, &levels, Convention::CorrectedSdt);
    out.put("level_count", levels.len() as f64);
    out.put("sdt_max_residual", res.max);
    out.put("sdt_uncorrected_max_residual", raw.max);
    out.put("exact_max_residual", exact_res.max);
    out.put("skipped_cells", res.skipped as f64);
    out.finish(config)
}

/// `gradients`: central x-difference and gradient magnitude of the exact and
/// quantized embeddings, their errors, and the flat-gradient census.
pub fn cmd_gradients(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let spec = config.grid()?;
    let exact = sample_sphere_sdf(&spec, &config.shape()?)?;
    let (_, q) = quantized(config, &spec)?;
    let c2x = StencilSpec::new(Scheme::Central2, 0);
    let ax = sphere_gradient(&spec, &config.center).swap_remove(0);
    let one = ScalarField::constant(spec.clone(), 1.0)?;
    let smooth = smooth_region(&spec, &config.center);

    let mut out = Emitter::new(&config.out_dir)?;
    let mut fields = Vec::new();
    for (label, phi) in [("exact", &exact), ("quantized", &q)] {
        let dx = diff(phi, c2x)?;
        let gm = gradient_magnitude(phi, Scheme::Central2)?;
        out.scalar(&format!("{label}_sdf"), phi)?;
        out.scalar(&format!("{label}_dx"), &dx)?;
        out.scalar(&format!("{label}_gradmag"), &gm)?;
        let (tdx, tgm) = (difference(&dx, &ax), difference(&gm, &one));
        out.put(format!("{label}_dx_max_error_smooth"), max_abs_in(&tdx, &smooth));
        out.put(format!("{label}_gradmag_max_error_smooth"), max_abs_in(&tgm, &smooth));
        out.put(format!("{label}_gradmag_mean_smooth"), mean_in(&gm, &smooth));
        fields.push((dx, gm));
    }
    let err_dx = difference(&fields[1].0, &fields[0].0);
    let err_gm = difference(&fields[1].1, &fields[0].1);
    out.scalar("error_dx", &err_dx)?;
    out.scalar("error_gradmag", &err_gm)?;
    out.put("error_dx_max_smooth", max_abs_in(&err_dx, &smooth));
    out.put("error_gradmag_max_smooth", max_abs_in(&err_gm, &smooth));

    let census = flat_gradient_census(&q, &ax, 0)?;
    out.binary("flat_gradient_mask", &census.mask)?;
    out.put("census_count", census.count as f64);
    let exact_census = flat_gradient_census(&exact, &ax, 0)?;
    out.put("census_count_exact", exact_census.count as f64);
    out.finish(config)
}

/// `higher`: second and mixed differences, Laplacian and curvature of the
/// exact and quantized embeddings, with their errors.
pub fn cmd_higher(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let spec = config.grid()?;
    let exact = sample_sphere_sdf(&spec, &config.shape()?)?;
    let (_, q) = quantized(config, &spec)?;
    let c = &config.center;
    let smooth = smooth_region(&spec, c);
    let truth = [
        ("dxx", analytic(&spec, c, |r, rho| r[1] * r[1] / rho.powi(3))),
        ("dxy", analytic(&spec, c, |r, rho| -r[0] * r[1] / rho.powi(3))),
        ("laplacian", analytic(&spec, c, |_, rho| 1.0 / rho)),
        ("curvature", analytic(&spec, c, |_, rho| 1.0 / rho)),
    ];

    let mut out = Emitter::new(&config.out_dir)?;
    let mut computed: Vec<Vec<ScalarField>> = Vec::new();
    for (label, phi) in [("exact", &exact), ("quantized", &q)] {
        let ops = vec![
            second_diff(phi, 0)?,
            mixed_diff(phi, 0, 1)?,
            laplacian(phi)?,
            curvature_2d(phi)?,
        ];
        out.scalar(&format!("{label}_sdf"), phi)?;
        for ((name, t), f) in truth.iter().zip(&ops) {
            out.scalar(&format!("{label}_{name}"), f)?;
            out.put(format!("{label}_{name}_max_error_smooth"), max_abs_in(&difference(f, t), &smooth));
        }
        let singular = ops[3].values().iter().filter(|v| is_singular(**v)).count();
        out.put(format!("{label}_curvature_singular_cells"), singular as f64);
        computed.push(ops);
    }
    for (k, (name, _)) in truth.iter().enumerate() {
        let err = difference(&computed[1][k], &computed[0][k]);
        out.scalar(&format!("error_{name}"), &err)?;
        out.put(format!("error_{name}_max_smooth"), max_abs_in(&err, &smooth));
    }
    out.finish(config)
}

/// `voronoi`: Voronoi edge mask with the signed transform and its first
/// differences for overlay.
pub fn cmd_voronoi(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let spec = config.grid()?;
    let (b, edges) = match &config.sites {
        Some(sites) => {
            let mut b = BinaryField::filled(spec.clone(), false);
            for s in sites {
                b.set(s, true);
            }
            let e = voronoi_edges(&b, Target::Foreground)?;
            (b, e)
        }
        None => {
            let b = rasterize(&spec, &config.shape()?)?;
            let e = signed_voronoi_edges(&b)?;
            (b, e)
        }
    };
    let sdt = signed_distance_transform(&b, config.metric, true)?;
    let dx = diff(&sdt, StencilSpec::new(Scheme::Central2, 0))?;
    let gm = gradient_magnitude(&sdt, Scheme::Central2)?;

    let mut out = Emitter::new(&config.out_dir)?;
    out.binary("binary", &b)?;
    out.binary("voronoi_edges", &edges)?;
    out.scalar("sdt", &sdt)?;
    out.scalar("sdt_dx", &dx)?;
    out.scalar("sdt_gradmag", &gm)?;
    out.put("edge_cells", edges.count() as f64);
    out.finish(config)
}

fn alpha_label(alpha: Option<f64>) -> String {
    alpha.map(|a| format!("{a}")).unwrap_or_else(|| "none".into())
}

/// Shared body of `reinit` and each `sweep-alpha` run.
fn reinit_run(config: &ExperimentConfig, dir: &Path, alpha: Option<f64>) -> Result<RunReport> {
    let spec = config.grid()?;
    let (b, q) = quantized(config, &spec)?;
    let phi0 = match alpha {
        Some(a) => dither(&q, DitherParams::new(a, config.seed)?)?,
        None => q.clone(),
    };
    let exact = config.polygon.is_none().then(|| sphere_gradient(&spec, &config.center));

    let mut out = Emitter::new(dir)?;
    out.scalar("quantized", &q)?;
    out.scalar("input", &phi0)?;
    let log_path = out.path("convergence.csv");
    let mut log = ConvergenceLog::create(&log_path)?;
    let snapshots: Vec<usize> = SNAPSHOT_ITERATIONS
        .into_iter()
        .filter(|&i| i <= config.iterations)
        .collect();

    if config.iterations == 0 {
        out.scalar("snapshot_0", &phi0)?;
        out.put("iterations", 0.0);
        return out.finish(config);
    }
    let params = ReinitParams {
        iterations: config.iterations,
        cfl: config.cfl,
        log_every: config.log_every,
        ..ReinitParams::default()
    };
    let result = reinitialize_with(&phi0, &b, exact.as_deref(), &params, |p| {
        if let Some(r) = p.report {
            log.push(r)?;
        }
        if snapshots.contains(&p.iteration) {
            out.scalar(&format!("snapshot_{}", p.iteration), p.field)?;
        }
        Ok(())
    })?;
    out.scalar("final", &result.field)?;
    let first = result.reports.first().copied().expect("iteration 0 is logged");
    let last = result.reports.last().copied().expect("final iteration is logged");
    out.put("iterations", config.iterations as f64);
    out.put("initial_e_MG", first.e_mg);
    out.put("final_e_MG", last.e_mg);
    if let (Some(d0), Some(d1)) = (first.e_d, last.e_d) {
        out.put("initial_e_D", d0);
        out.put("final_e_D", d1);
    }
    out.put(
        "max_e_R",
        result.reports.iter().map(|r| r.e_r).fold(0.0, f64::max),
    );
    let mut report = out.finish(config)?;
    report.reports = result.reports;
    Ok(report)
}

/// `reinit`: dither the quantized transform, reinitialize, log the errors
/// and save snapshots.
pub fn cmd_reinit(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    reinit_run(config, &config.out_dir, config.alpha)
}

/// `sweep-alpha`: one reinitialization per dither amplitude plus a combined
/// `alpha,iter,e_R,e_MG,e_D` table.
pub fn cmd_sweep_alpha(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)?;
    let mut combined = String::from("alpha,iter,e_R,e_MG,e_D\n");
    let mut all = RunReport::default();
    for &alpha in &config.alphas {
        let label = alpha_label(alpha);
        let dir = config.out_dir.join(format!("alpha_{label}"));
        let run = reinit_run(config, &dir, alpha)?;
        for r in &run.reports {
            combined.push_str(&format!(
                "{label},{},{},{},{}\n",
                r.iteration,
                fmt_f64(r.e_r),
                fmt_f64(r.e_mg),
                r.e_d.map(fmt_f64).unwrap_or_default()
            ));
        }
        for (k, v) in run.summary {
            all.summary.push((format!("alpha_{label}.{k}"), v));
        }
        all.files.extend(run.files);
        all.reports.extend(run.reports);
    }
    let mut out = Emitter::new(&config.out_dir)?;
    let p = out.path("sweep.csv");
    fs::File::create(p)?.write_all(combined.as_bytes())?;
    out.report.summary = all.summary;
    let mut report = out.finish(config)?;
    all.files.append(&mut report.files);
    report.files = all.files;
    report.reports = all.reports;
    Ok(report)
}

/// `curvature-hist`: band histograms of mean curvature for the exact,
/// quantized and corrected (dithered + reinitialized) sphere.
pub fn cmd_curvature_hist(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let spec = config.grid()?;
    let exact = sample_sphere_sdf(&spec, &config.shape()?)?;
    let (b, q) = quantized(config, &spec)?;
    let hist = |phi: &ScalarField| curvature_band_histogram(phi, config.band, config.hist_range, config.bins);
    let h_exact = hist(&exact)?;
    let h_quant = hist(&q)?;
    let phi0 = match config.alpha {
        Some(a) => dither(&q, DitherParams::new(a, config.seed)?)?,
        None => q.clone(),
    };
    let corrected = if config.iterations == 0 {
        phi0
    } else {
        let params = ReinitParams {
            iterations: config.iterations,
            cfl: config.cfl,
            log_every: config.iterations,
            ..ReinitParams::default()
        };
        reinitialize_with(&phi0, &b, None, &params, |_| Ok(()))?.field
    };
    let h_corr = hist(&corrected)?;

    let mut out = Emitter::new(&config.out_dir)?;
    out.scalar("quantized", &q)?;
    out.scalar("corrected", &corrected)?;
    for (label, h) in [("exact", &h_exact), ("quantized", &h_quant), ("corrected", &h_corr)] {
        let p = out.path(&format!("hist_{label}.csv"));
        h.write_csv(p)?;
        out.put(format!("{label}_samples"), h.samples.len() as f64);
        out.put(format!("{label}_std"), h.std_dev());
        out.put(format!("{label}_median"), h.median());
        let (l, r) = h.mode_bin();
        out.put(format!("{label}_mode_left"), l);
        out.put(format!("{label}_mode_right"), r);
    }
    out.put("target", (spec.ndim() - 1) as f64 / config.radius);
    out.finish(config)
}
