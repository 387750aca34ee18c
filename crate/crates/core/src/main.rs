use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind as ClapKind, Args, Parser, Subcommand};
use dtquant::experiments::{run, Experiment, ExperimentConfig};
use dtquant::Error;

#[derive(Parser)]
#[command(name = "dtquant", version, about = "Distance transform quantization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1D sphere: exact distance, corrected transform, level table
    Quant1d(Flags),
    /// 2D circle: exact distance, corrected transform, regression pairs
    Quant2d(Flags),
    /// Flat x-differences and gradient magnitude of the quantized circle
    Gradients(Flags),
    /// Second derivatives, Laplacian and curvature errors
    Higher(Flags),
    /// Voronoi edge map with the signed transform for overlay
    Voronoi(Flags),
    /// Dither + reinitialization convergence run
    Reinit(Flags),
    /// Reinitialization runs over a list of dither amplitudes
    SweepAlpha(Flags),
    /// Mean-curvature band histograms of a 3D sphere
    CurvatureHist(Flags),
}

/// Every flag maps to the config key of the same name; flags override the
/// config file, which overrides the experiment defaults.
#[derive(Args)]
struct Flags {
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    /// Comma-separated physical coordinates
    #[arg(long)]
    center: Option<String>,
    /// Comma-separated sample counts, e.g. 64,64
    #[arg(long)]
    dims: Option<String>,
    /// euclidean, manhattan, chebyshev, chamfer or chamfer:<axial>:<diagonal>
    #[arg(long)]
    metric: Option<String>,
    /// Dither amplitude divisor, or `none`
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated alphas for sweep-alpha (`none` allowed)
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    #[arg(long = "log-every")]
    log_every: Option<String>,
    /// Curvature band half-width (physical units)
    #[arg(long)]
    band: Option<String>,
    #[arg(long)]
    bins: Option<String>,
    /// Histogram range as lo,hi
    #[arg(long = "hist-range", allow_hyphen_values = true)]
    hist_range: Option<String>,
    /// Polygon vertices as x,y;x,y;...
    #[arg(long, allow_hyphen_values = true)]
    polygon: Option<String>,
    /// Voronoi site cells as i,j;i,j;...
    #[arg(long)]
    sites: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// key=value file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let text = [
            ("h", &self.h),
            ("radius", &self.radius),
            ("center", &self.center),
            ("dims", &self.dims),
            ("metric", &self.metric),
            ("alpha", &self.alpha),
            ("alphas", &self.alphas),
            ("seed", &self.seed),
            ("iterations", &self.iterations),
            ("cfl", &self.cfl),
            ("log_every", &self.log_every),
            ("band", &self.band),
            ("bins", &self.bins),
            ("hist_range", &self.hist_range),
            ("polygon", &self.polygon),
            ("sites", &self.sites),
        ];
        let mut out: Vec<(&'static str, String)> = text
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if let Some(dir) = &self.out_dir {
            out.push(("out_dir", dir.to_string_lossy().into_owned()));
        }
        out
    }
}

fn build(command: Command) -> Result<ExperimentConfig, Error> {
    let (experiment, flags) = match command {
        Command::Quant1d(f) => (Experiment::Quant1d, f),
        Command::Quant2d(f) => (Experiment::Quant2d, f),
        Command::Gradients(f) => (Experiment::Gradients, f),
        Command::Higher(f) => (Experiment::Higher, f),
        Command::Voronoi(f) => (Experiment::Voronoi, f),
        Command::Reinit(f) => (Experiment::Reinit, f),
        Command::SweepAlpha(f) => (Experiment::SweepAlpha, f),
        Command::CurvatureHist(f) => (Experiment::CurvatureHist, f),
    };
    let mut config = ExperimentConfig::defaults(experiment);
    if let Some(path) = &flags.config {
        config.load_overrides(path)?;
        config.experiment = experiment;
    }
    for (key, value) in flags.pairs() {
        let value = if key == "dims" { value.replace('x', ",") } else { value };
        config.set(key, &value)?;
    }
    Ok(config)
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let message = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: kind={kind} message={message}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) => e.exit(),
        Err(e) if e.kind() == ClapKind::DisplayHelpOnMissingArgumentOrSubcommand => e.exit(),
        Err(e) => return fail("invalid-argument", &e.to_string()),
    };
    let result = build(cli.command).and_then(|config| run(&config).map(|r| (config, r)));
    match result {
        Ok((config, report)) => {
            println!(
                "{}: wrote {} files to {}",
                config.experiment.name(),
                report.files.len(),
                config.out_dir.display()
            );
            for (k, v) in &report.summary {
                println!("{k}={v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind().as_str(), &e.to_string()),
    }
}
