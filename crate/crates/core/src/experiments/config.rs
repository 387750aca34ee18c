//! Experiment configuration and its `key=value` text form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::dt::Metric;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Quant1d,
    Quant2d,
    Gradients,
    Higher,
    Voronoi,
    Reinit,
    SweepAlpha,
    CurvatureHist,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Quant1d,
        Experiment::Quant2d,
        Experiment::Gradients,
        Experiment::Higher,
        Experiment::Voronoi,
        Experiment::Reinit,
        Experiment::SweepAlpha,
        Experiment::CurvatureHist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Quant1d => "quant1d",
            Experiment::Quant2d => "quant2d",
            Experiment::Gradients => "gradients",
            Experiment::Higher => "higher",
            Experiment::Voronoi => "voronoi",
            Experiment::Reinit => "reinit",
            Experiment::SweepAlpha => "sweep-alpha",
            Experiment::CurvatureHist => "curvature-hist",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown experiment {s:?}")))
    }
}

/// Everything one experiment run depends on. Defaults are per experiment;
/// a config file and then command-line flags override them key by key.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dims: Vec<usize>,
    pub h: f64,
    pub radius: f64,
    /// Sphere center, also the center of the sample lattice.
    pub center: Vec<f64>,
    /// Replaces the sphere with an even-odd polygon (2D only).
    pub polygon: Option<Vec<[f64; 2]>>,
    /// Voronoi only: explicit site cells instead of a shape.
    pub sites: Option<Vec<Vec<usize>>>,
    pub metric: Metric,
    /// `None` skips dithering.
    pub alpha: Option<f64>,
    pub alphas: Vec<Option<f64>>,
    pub seed: u64,
    pub iterations: usize,
    pub cfl: f64,
    pub log_every: usize,
    /// Curvature band half-width, physical units.
    pub band: f64,
    pub bins: usize,
    pub hist_range: (f64, f64),
    pub out_dir: PathBuf,
}

pub const KEYS: [&str; 18] = [
    "experiment",
    "dims",
    "h",
    "radius",
    "center",
    "polygon",
    "sites",
    "metric",
    "alpha",
    "alphas",
    "seed",
    "iterations",
    "cfl",
    "log_every",
    "band",
    "bins",
    "hist_range",
    "out_dir",
];

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| Error::invalid(format!("{key}: cannot parse {p:?}")))
        })
        .collect()
}

fn scalar<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse {v:?}")))
}

fn opt_alpha(key: &str, v: &str) -> Result<Option<f64>> {
    match v.trim() {
        "none" => Ok(None),
        s => scalar(key, s).map(Some),
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn fmt_float(v: f64) -> String {
    // Debug output is the shortest text that parses back to the same bits
    format!("{v:?}")
}

fn fmt_alpha(a: Option<f64>) -> String {
    a.map(fmt_float).unwrap_or_else(|| "none".into())
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            dims: vec![21, 21],
            h: 0.5,
            radius: 2.5,
            center: vec![5.0, 5.0],
            polygon: None,
            sites: None,
            metric: Metric::Euclidean,
            alpha: Some(2.0),
            alphas: vec![None, Some(2.0), Some(20.0)],
            seed: 42,
            iterations: 400,
            cfl: 0.3,
            log_every: 1,
            band: 1.0,
            bins: 50,
            hist_range: (-0.25, 0.75),
            out_dir: PathBuf::from("out").join(experiment.name()),
        };
        match experiment {
            Experiment::Quant1d => {
                c.dims = vec![11];
                c.h = 1.0;
                c.radius = 2.25;
                c.center = vec![5.0];
            }
            Experiment::Quant2d => {
                c.dims = vec![11, 11];
                c.h = 1.0;
                c.radius = 2.25;
            }
            Experiment::Gradients | Experiment::Higher | Experiment::Voronoi => {}
            Experiment::Reinit | Experiment::SweepAlpha => {
                c.dims = vec![64, 64];
            }
            Experiment::CurvatureHist => {
                c.dims = vec![24, 24, 24];
                c.h = 1.0;
                c.radius = 8.0;
                c.center = vec![11.5; 3];
                c.alpha = Some(20.0);
                c.iterations = 100;
                c.band = 1.0;
            }
        }
        c
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "experiment" => self.experiment = Experiment::parse(v)?,
            "dims" => self.dims = list("dims", v)?,
            "h" => self.h = scalar("h", v)?,
            "radius" => self.radius = scalar("radius", v)?,
            "center" => self.center = list("center", v)?,
            "polygon" => {
                self.polygon = if v == "none" {
                    None
                } else {
                    Some(
                        v.split(';')
                            .map(|p| {
                                let xy: Vec<f64> = list("polygon", p)?;
                                match xy.as_slice() {
                                    [x, y] => Ok([*x, *y]),
                                    _ => Err(Error::invalid(format!("polygon vertex {p:?} needs two coordinates"))),
                                }
                            })
                            .collect::<Result<_>>()?,
                    )
                }
            }
            "sites" => {
                self.sites = if v == "none" {
                    None
                } else {
                    Some(v.split(';').map(|p| list("sites", p)).collect::<Result<_>>()?)
                }
            }
            "metric" => self.metric = Metric::parse(v)?,
            "alpha" => self.alpha = opt_alpha("alpha", v)?,
            "alphas" => {
                self.alphas = v.split(',').map(|a| opt_alpha("alphas", a)).collect::<Result<_>>()?
            }
            "seed" => self.seed = scalar("seed", v)?,
            "iterations" => self.iterations = scalar("iterations", v)?,
            "cfl" => self.cfl = scalar("cfl", v)?,
            "log_every" => self.log_every = scalar("log_every", v)?,
            "band" => self.band = scalar("band", v)?,
            "bins" => self.bins = scalar("bins", v)?,
            "hist_range" => match list::<f64>("hist_range", v)?.as_slice() {
                [lo, hi] => self.hist_range = (*lo, *hi),
                _ => return Err(Error::invalid("hist_range needs two values")),
            },
            "out_dir" => self.out_dir = PathBuf::from(v),
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("config line {}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Parses a full text form; starts from the defaults of its
    /// `experiment` key.
    pub fn from_text(text: &str) -> Result<Self> {
        let experiment = text
            .lines()
            .filter_map(|l| l.trim().split_once('='))
            .find(|(k, _)| k.trim() == "experiment")
            .map(|(_, v)| Experiment::parse(v))
            .transpose()?
            .ok_or_else(|| Error::invalid("config has no experiment key"))?;
        let mut c = ExperimentConfig::defaults(experiment);
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn load_overrides(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("experiment", self.experiment.name().into());
        put("dims", join(&self.dims, ","));
        put("h", fmt_float(self.h));
        put("radius", fmt_float(self.radius));
        put("center", join(self.center.iter().map(|&v| fmt_float(v)), ","));
        put(
            "polygon",
            match &self.polygon {
                None => "none".into(),
                Some(p) => join(p.iter().map(|[x, y]| format!("{},{}", fmt_float(*x), fmt_float(*y))), ";"),
            },
        );
        put(
            "sites",
            match &self.sites {
                None => "none".into(),
                Some(s) => join(s.iter().map(|i| join(i, ",")), ";"),
            },
        );
        put("metric", self.metric.name());
        put("alpha", fmt_alpha(self.alpha));
        put("alphas", join(self.alphas.iter().map(|&a| fmt_alpha(a)), ","));
        put("seed", self.seed.to_string());
        put("iterations", self.iterations.to_string());
        put("cfl", fmt_float(self.cfl));
        put("log_every", self.log_every.to_string());
        put("band", fmt_float(self.band));
        put("bins", self.bins.to_string());
        put(
            "hist_range",
            format!("{},{}", fmt_float(self.hist_range.0), fmt_float(self.hist_range.1)),
        );
        put("out_dir", self.out_dir.to_string_lossy().into_owned());
        s
    }

    /// Lattice of `dims` samples centered on `center`.
    pub fn grid(&self) -> Result<GridSpec> {
        if self.center.len() != self.dims.len() {
            return Err(Error::invalid(format!(
                "center has {} coordinates but dims has {} axes",
                self.center.len(),
                self.dims.len()
            )));
        }
        GridSpec::centered(&self.dims, self.h, &self.center)
    }

    pub fn shape(&self) -> Result<Shape> {
        let shape = match &self.polygon {
            Some(v) => Shape::Polygon { vertices: v.clone() },
            None => Shape::sphere(&self.center, self.radius),
        };
        shape.validate()?;
        Ok(shape)
    }

    /// Checks everything that can be checked before any file is written.
    pub fn validate(&self) -> Result<()> {
        let spec = self.grid()?;
        self.shape()?;
        self.metric.validate()?;
        let ndim = spec.ndim();
        let wanted: &[usize] = match self.experiment {
            Experiment::Quant1d => &[1],
            Experiment::Quant2d | Experiment::Gradients | Experiment::Higher | Experiment::Voronoi => &[2],
            Experiment::Reinit | Experiment::SweepAlpha => &[1, 2, 3],
            Experiment::CurvatureHist => &[3],
        };
        if !wanted.contains(&ndim) {
            return Err(Error::invalid(format!(
                "{} needs a {:?}-dimensional grid, got {ndim}",
                self.experiment.name(),
                wanted
            )));
        }
        if self.polygon.is_some() && ndim != 2 {
            return Err(Error::invalid("polygon shapes need a 2D grid"));
        }
        let needs_sphere = matches!(
            self.experiment,
            Experiment::Quant1d
                | Experiment::Quant2d
                | Experiment::Gradients
                | Experiment::Higher
                | Experiment::CurvatureHist
        );
        if needs_sphere && self.polygon.is_some() {
            return Err(Error::invalid(format!(
                "{} compares against the analytic sphere and cannot use a polygon",
                self.experiment.name()
            )));
        }
        if let Some(sites) = &self.sites {
            if sites.is_empty() {
                return Err(Error::invalid("sites list is empty"));
            }
            for s in sites {
                if s.len() != ndim || s.iter().zip(spec.dims()).any(|(i, n)| i >= n) {
                    return Err(Error::invalid(format!("site {s:?} lies outside the grid")));
                }
            }
        }
        for a in self.alpha.iter().chain(self.alphas.iter().flatten()) {
            if !(*a > 1.0) {
                return Err(Error::invalid(format!("alpha must exceed 1, got {a}")));
            }
        }
        if self.experiment == Experiment::SweepAlpha && self.alphas.is_empty() {
            return Err(Error::invalid("alphas list is empty"));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if self.log_every == 0 || self.bins == 0 {
            return Err(Error::invalid("log_every and bins must be at least 1"));
        }
        if !(self.hist_range.0 < self.hist_range.1) {
            return Err(Error::invalid("hist_range needs lo < hi"));
        }
        Ok(())
    }
}
