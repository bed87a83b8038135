//! Command-line front end. Data goes to files; diagnostics go to stderr; the
//! only thing ever written to stdout is the optional one-line `--json` summary.

pub mod config;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csalsa::bench::{
    run_batch, run_experiment, BlurSpec, ExperimentOutcome, ExperimentSpec, ImageSource,
    OutputPaths, Report, SolverSettings,
};
use csalsa::solver::Status;
use csalsa::{Error, Result};
use serde::Serialize;

pub use config::{RunConfig, CONFIG_SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// Caps the number of concurrent batch jobs.
pub const THREADS_ENV: &str = "CSALSA_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "csalsa",
    version,
    about = "Constrained sparse recovery with C-SALSA"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame-based l1 deblurring of an image.
    Deblur(DeblurArgs),
    /// TV reconstruction of the Shepp-Logan phantom from radial Fourier samples.
    Mri(MriArgs),
    /// Run the problem described by a JSON config file.
    Solve(SolveArgs),
    /// Run several config files, optionally in parallel.
    Batch(BatchArgs),
    /// Check the fast operators and proximity maps against slow oracles.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlurChoice {
    Uniform9,
    Gaussian,
    Hij,
}

impl BlurChoice {
    fn spec(self) -> BlurSpec {
        match self {
            BlurChoice::Uniform9 => BlurSpec::Uniform9,
            BlurChoice::Gaussian => BlurSpec::gaussian(),
            BlurChoice::Hij => BlurSpec::hij(),
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Penalty used for both splitting terms (defaults depend on the problem).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Scales the noise-derived data-fit radius.
    #[arg(long, default_value_t = 1.0)]
    pub eps_factor: f64,
    /// Explicit data-fit radius; overrides the noise rule. 0 solves the equality-constrained problem.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iteration budget (300 for deblurring, 500 for MRI by default).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Reconstructed image, 16-bit PGM.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration trace, CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Run report, JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print a one-line JSON summary on stdout.
    #[arg(long)]
    pub json: bool,
}

impl CommonArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            mu: self.mu,
            max_iters: self.max_iters,
            ..Default::default()
        }
    }

    fn outputs(&self) -> OutputPaths {
        OutputPaths {
            trace: self.trace.clone(),
            report: self.report.clone(),
            image: self.out.clone(),
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["image", "synthetic"]))]
pub struct DeblurArgs {
    /// Grayscale image (PGM, PNG, ...).
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Use the built-in synthetic scene of this size instead of a file.
    #[arg(long, value_name = "N")]
    pub synthetic: Option<usize>,
    #[arg(long, value_enum, default_value_t = BlurChoice::Uniform9)]
    pub blur: BlurChoice,
    /// Noise variance on the 0-255 pixel scale.
    #[arg(long, default_value_t = 0.3136)]
    pub sigma2: f64,
    /// Haar frame decomposition levels; both image sides must divide by 2^levels.
    #[arg(long, default_value_t = csalsa::bench::DEFAULT_FRAME_LEVELS)]
    pub levels: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MriArgs {
    /// Phantom side length in pixels.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    /// Radial sampling lines through the origin of k-space.
    #[arg(long, default_value_t = csalsa::bench::DEFAULT_MRI_LINES)]
    pub lines: usize,
    /// Noise variance per complex sample, on the [0, 1] image scale.
    #[arg(long, default_value_t = 0.0)]
    pub sigma2: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(required = true)]
    pub configs: Vec<PathBuf>,
    /// Concurrent jobs (further capped by CSALSA_THREADS).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Fewer random draws.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
    #[arg(long, hide = true)]
    pub perturb_adjoint: Option<f64>,
}

impl DeblurArgs {
    pub fn to_config(&self) -> Result<RunConfig> {
        let image = match (&self.image, self.synthetic) {
            (Some(path), _) => ImageSource::File { path: path.clone() },
            (None, Some(size)) => ImageSource::Synthetic { size },
            (None, None) => return Err(Error::invalid("--image or --synthetic is required")),
        };
        let mut spec = ExperimentSpec::deblur_preset("1", image)?;
        spec.name = "deblur".to_string();
        spec.blur = Some(self.blur.spec());
        spec.noise_variance = self.sigma2;
        spec.regularizer = csalsa::bench::RegularizerSpec::L1Frame {
            levels: self.levels,
        };
        spec.eps_factor = self.common.eps_factor;
        spec.epsilon = self.common.epsilon;
        spec.seed = self.common.seed;
        Ok(RunConfig::new(
            spec,
            self.common.settings(),
            self.common.outputs(),
        ))
    }
}

impl MriArgs {
    pub fn to_config(&self) -> RunConfig {
        let mut spec = ExperimentSpec::mri_preset(self.size, self.lines);
        spec.noise_variance = self.sigma2;
        spec.eps_factor = self.common.eps_factor;
        spec.epsilon = self.common.epsilon;
        spec.seed = self.common.seed;
        RunConfig::new(spec, self.common.settings(), self.common.outputs())
    }
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    name: &'a str,
    status: Status,
    iterations: usize,
    final_residual: f64,
    epsilon: f64,
    mse: f64,
    isnr: Option<f64>,
}

impl<'a> From<&'a Report> for Summary<'a> {
    fn from(r: &'a Report) -> Self {
        Self {
            name: &r.spec.name,
            status: r.status,
            iterations: r.iterations,
            final_residual: r.final_residual,
            epsilon: r.epsilon,
            mse: r.mse,
            isnr: r.isnr,
        }
    }
}

fn status_code(status: Status) -> i32 {
    if status.is_feasible() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

fn describe(r: &Report) -> String {
    let mut line = format!(
        "{}: {} after {} iterations, residual {:.6e} (eps {:.6e}), MSE {:.6e}",
        r.spec.name,
        r.status.as_str(),
        r.iterations,
        r.final_residual,
        r.epsilon,
        r.mse
    );
    if let Some(isnr) = r.isnr {
        line += &format!(", ISNR {isnr:.3} dB");
    }
    line + &format!(", {:.2} s", r.elapsed_seconds)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string(value)?).map_err(|e| Error::io("<stdout>", e))
}

fn finish(outcome: &ExperimentOutcome, json: bool) -> Result<i32> {
    let r = &outcome.report;
    eprintln!("{}", describe(r));
    if json {
        print_json(&Summary::from(r))?;
    }
    Ok(status_code(r.status))
}

fn run_config(cfg: &RunConfig, json: bool) -> Result<i32> {
    let out = run_experiment(&cfg.experiment, &cfg.solver, &cfg.outputs)?;
    finish(&out, json)
}

/// Worker count for `--jobs`, capped by `CSALSA_THREADS` when set.
pub fn worker_count(jobs: usize, env: Option<&str>) -> Result<usize> {
    if jobs == 0 {
        return Err(Error::invalid("--jobs must be at least 1"));
    }
    match env {
        None => Ok(jobs),
        Some(v) => {
            let cap: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                Error::invalid(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                ))
            })?;
            Ok(jobs.min(cap))
        }
    }
}

fn run_batch_cmd(args: &BatchArgs) -> Result<i32> {
    let env = std::env::var(THREADS_ENV).ok();
    let workers = worker_count(args.jobs, env.as_deref())?;
    let jobs = args
        .configs
        .iter()
        .map(|p| RunConfig::load(p).map(RunConfig::into_job))
        .collect::<Result<Vec<_>>>()?;
    let mut code = EXIT_OK;
    let mut summaries = Vec::new();
    for (path, result) in args.configs.iter().zip(run_batch(&jobs, workers)) {
        match result {
            Ok(out) => {
                eprintln!("{}", describe(&out.report));
                if code == EXIT_OK {
                    code = status_code(out.report.status);
                }
                summaries.push(serde_json::to_value(Summary::from(&out.report))?);
            }
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                code = EXIT_ERROR;
                summaries.push(serde_json::json!({ "config": path, "error": e.to_string() }));
            }
        }
    }
    if args.json {
        print_json(&summaries)?;
    }
    Ok(code)
}

fn run_selftest_cmd(args: &SelftestArgs) -> Result<i32> {
    let rows = selftest::run_selftest(&selftest::SelftestOptions {
        quick: args.quick,
        perturb_adjoint: args.perturb_adjoint,
        seed: args.seed,
    })?;
    for row in &rows {
        eprintln!("{row}");
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    eprintln!("{} of {} checks passed", rows.len() - failed, rows.len());
    if args.json {
        print_json(&rows)?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_ERROR })
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Deblur(a) => run_config(&a.to_config()?, a.common.json),
        Command::Mri(a) => run_config(&a.to_config(), a.common.json),
        Command::Solve(a) => run_config(&RunConfig::load(&a.config)?, a.json),
        Command::Batch(a) => run_batch_cmd(a),
        Command::Selftest(a) => run_selftest_cmd(a),
    }
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_ERROR,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn thread_cap() {
        assert_eq!(worker_count(4, None).unwrap(), 4);
        assert_eq!(worker_count(4, Some("2")).unwrap(), 2);
        assert_eq!(worker_count(1, Some("8")).unwrap(), 1);
        assert!(worker_count(4, Some("zero")).is_err());
        assert!(worker_count(4, Some("0")).is_err());
        assert!(worker_count(0, None).is_err());
    }

    #[test]
    fn deblur_flags_map_to_spec() {
        let cli = Cli::try_parse_from([
            "csalsa",
            "deblur",
            "--synthetic",
            "64",
            "--blur",
            "hij",
            "--sigma2",
            "8",
            "--seed",
            "3",
        ])
        .unwrap();
        let Command::Deblur(a) = cli.command else {
            panic!()
        };
        let cfg = a.to_config().unwrap();
        assert_eq!(cfg.experiment.blur, Some(BlurSpec::hij()));
        assert_eq!(cfg.experiment.noise_variance, 8.0);
        assert_eq!(cfg.experiment.seed, 3);
        cfg.experiment.validate().unwrap();
    }

    #[test]
    fn deblur_needs_a_source() {
        assert!(Cli::try_parse_from(["csalsa", "deblur"]).is_err());
        assert!(
            Cli::try_parse_from(["csalsa", "deblur", "--image", "a.pgm", "--synthetic", "8"])
                .is_err()
        );
    }
}
