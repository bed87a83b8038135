//! Declarative benchmark runs: deblurring with an ℓ1-regularized Haar frame and
//! radial-sampling MRI with TV, each ending in a [`Report`].

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::kernels::{make_blur_kernel, BlurSpec};
use super::mask::radial_mask;
use super::metrics::{isnr, mse};
use super::noise::{add_noise, eps_from_noise};
use super::pgm::{read_image, write_pgm16};
use super::phantom::{shepp_logan, synthetic_image};
use crate::error::{Error, Result};
use crate::operators::{
    make_circulant, make_partial_fourier, CoeffStack, FrameComposite, Grid2D, LinearOp, Signal,
};
use crate::proximity::{Regularizer, DEFAULT_TV_INNER_ITERS, DEFAULT_TV_INNER_TOL};
use crate::solver::{
    csalsa_solve, SolverConfig, SolverTrace, Status, DEFAULT_CHANGE_RTOL, DEFAULT_FEAS_RTOL,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Noise levels of deblurring specs are given on the 0–255 pixel scale.
pub const DEBLUR_NOISE_SCALE: f64 = 255.0;
pub const DEFAULT_FRAME_LEVELS: usize = 4;
pub const DEFAULT_MRI_LINES: usize = 22;
/// Relative data-fit radius used for noiseless MRI, `ε = 1e-6·‖y‖`.
pub const MRI_NOISELESS_EPS_REL: f64 = 1e-6;
pub const DEFAULT_DEBLUR_MAX_ITERS: usize = 300;
pub const DEFAULT_MRI_MAX_ITERS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Deblur,
    Mri,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImageSource {
    File { path: PathBuf },
    SheppLogan { size: usize },
    Synthetic { size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularizerSpec {
    /// `‖·‖₁` on the coefficients of an undecimated Haar frame.
    L1Frame {
        levels: usize,
    },
    TvIso,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskSpec {
    RadialLines { count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: ProblemKind,
    #[serde(default)]
    pub blur: Option<BlurSpec>,
    /// σ²; on the 0–255 scale for deblurring, on the image scale for MRI.
    pub noise_variance: f64,
    pub regularizer: RegularizerSpec,
    #[serde(default = "one")]
    pub eps_factor: f64,
    /// Lower bound on ε relative to `‖y‖₂`.
    #[serde(default)]
    pub eps_rel_floor: f64,
    /// Explicit ε; overrides the noise rule.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub image: ImageSource,
    #[serde(default)]
    pub mask: Option<MaskSpec>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl ExperimentSpec {
    /// The five deblurring configurations: `"1"`, `"2A"`, `"2B"`, `"3A"`, `"3B"`.
    pub fn deblur_preset(id: &str, image: ImageSource) -> Result<Self> {
        let (blur, noise_variance) = match id {
            "1" => (BlurSpec::Uniform9, 0.56 * 0.56),
            "2A" => (BlurSpec::gaussian(), 2.0),
            "2B" => (BlurSpec::gaussian(), 8.0),
            "3A" => (BlurSpec::hij(), 2.0),
            "3B" => (BlurSpec::hij(), 8.0),
            other => {
                return Err(Error::invalid(format!(
                    "unknown deblurring experiment {other:?}"
                )))
            }
        };
        Ok(Self {
            name: format!("deblur-{id}"),
            problem: ProblemKind::Deblur,
            blur: Some(blur),
            noise_variance,
            regularizer: RegularizerSpec::L1Frame {
                levels: DEFAULT_FRAME_LEVELS,
            },
            eps_factor: 1.0,
            eps_rel_floor: 0.0,
            epsilon: None,
            image,
            mask: None,
            seed: 0,
        })
    }

    pub const DEBLUR_PRESETS: [&'static str; 5] = ["1", "2A", "2B", "3A", "3B"];

    /// Noiseless radial-sampling MRI of the Shepp–Logan phantom.
    pub fn mri_preset(size: usize, lines: usize) -> Self {
        Self {
            name: format!("mri-{size}-{lines}"),
            problem: ProblemKind::Mri,
            blur: None,
            noise_variance: 0.0,
            regularizer: RegularizerSpec::TvIso,
            eps_factor: 1.0,
            eps_rel_floor: MRI_NOISELESS_EPS_REL,
            epsilon: None,
            image: ImageSource::SheppLogan { size },
            mask: Some(MaskSpec::RadialLines { count: lines }),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::invalid("noise_variance must be nonnegative"));
        }
        if !(self.eps_factor > 0.0 && self.eps_factor.is_finite()) {
            return Err(Error::invalid("eps_factor must be positive"));
        }
        if !(self.eps_rel_floor >= 0.0 && self.eps_rel_floor.is_finite()) {
            return Err(Error::invalid("eps_rel_floor must be nonnegative"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::invalid("epsilon must be nonnegative"));
            }
        }
        match self.problem {
            ProblemKind::Deblur => {
                if self.blur.is_none() {
                    return Err(Error::invalid("deblurring spec needs a blur"));
                }
                if !matches!(self.regularizer, RegularizerSpec::L1Frame { .. }) {
                    return Err(Error::invalid(
                        "deblurring spec needs an l1_frame regularizer",
                    ));
                }
                if self.mask.is_some() {
                    return Err(Error::invalid("deblurring spec takes no mask"));
                }
            }
            ProblemKind::Mri => {
                if self.mask.is_none() {
                    return Err(Error::invalid("MRI spec needs a mask"));
                }
                if self.regularizer != RegularizerSpec::TvIso {
                    return Err(Error::invalid("MRI spec needs the tv_iso regularizer"));
                }
                if self.blur.is_some() {
                    return Err(Error::invalid("MRI spec takes no blur"));
                }
            }
        }
        Ok(())
    }

    fn noise_scale(&self) -> f64 {
        match self.problem {
            ProblemKind::Deblur => DEBLUR_NOISE_SCALE,
            ProblemKind::Mri => 1.0,
        }
    }

    fn default_max_iters(&self) -> usize {
        match self.problem {
            ProblemKind::Deblur => DEFAULT_DEBLUR_MAX_ITERS,
            ProblemKind::Mri => DEFAULT_MRI_MAX_ITERS,
        }
    }
}

/// Solver knobs a run may override; everything else comes from the spec.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Sets both penalties; `mu1`/`mu2` override it individually.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub mu1: Option<f64>,
    #[serde(default)]
    pub mu2: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub feas_rtol: Option<f64>,
    #[serde(default)]
    pub change_rtol: Option<f64>,
    #[serde(default)]
    pub tv_inner_iters: Option<usize>,
    #[serde(default)]
    pub tv_inner_tol: Option<f64>,
    #[serde(default)]
    pub tv_warm_start: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub image: Option<PathBuf>,
}

/// Default penalty per problem, relative to the data scale.
///
/// Deblurring works on frame coefficients of a `[0, 1]` image, MRI on a
/// unitary spectrum of one; both defaults were tuned on the acceptance runs.
pub fn default_mu(problem: ProblemKind, y_mean_abs: f64) -> f64 {
    match problem {
        ProblemKind::Deblur => DEFAULT_DEBLUR_MU,
        ProblemKind::Mri => MRI_MU_PER_MEAN_ABS / y_mean_abs.max(f64::MIN_POSITIVE),
    }
}

pub const DEFAULT_DEBLUR_MU: f64 = 1000.0;
pub const MRI_MU_PER_MEAN_ABS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub spec: ExperimentSpec,
    pub solver: SolverConfig,
    pub status: Status,
    pub iterations: usize,
    pub elapsed_seconds: f64,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub epsilon: f64,
    pub mse: f64,
    pub isnr: Option<f64>,
    /// Real-to-pixel scale applied to `noise_variance`.
    pub noise_scale: f64,
    /// Noise standard deviation on the `[0, 1]` image scale.
    pub sigma: f64,
    /// Number of (possibly complex) observations.
    pub observations: usize,
    pub sampling_ratio: Option<f64>,
    /// Largest imaginary part discarded by `Bᴴy` (MRI only).
    pub adjoint_imag_residual: Option<f64>,
    pub image_rows: usize,
    pub image_cols: usize,
    pub image_bit_depth: Option<u32>,
    pub trace_path: Option<PathBuf>,
    pub image_path: Option<PathBuf>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    /// The report with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// Everything a run produced, in memory.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub report: Report,
    pub trace: SolverTrace,
    pub reconstruction: Grid2D,
    pub truth: Grid2D,
    /// Blurred/noisy image (deblurring) or zero-filled adjoint image (MRI).
    pub observation_image: Grid2D,
}

fn load_image(source: &ImageSource) -> Result<(Grid2D, Option<u32>)> {
    match source {
        ImageSource::File { path } => {
            let loaded = read_image(path)?;
            Ok((loaded.image, Some(loaded.bit_depth)))
        }
        ImageSource::SheppLogan { size } => Ok((shepp_logan(*size)?, None)),
        ImageSource::Synthetic { size } => Ok((synthetic_image(*size)?, None)),
    }
}

fn build_config(
    spec: &ExperimentSpec,
    settings: &SolverSettings,
    epsilon: f64,
    y_mean_abs: f64,
) -> Result<SolverConfig> {
    let base_mu = settings
        .mu
        .unwrap_or_else(|| default_mu(spec.problem, y_mean_abs));
    let cfg = SolverConfig {
        mu1: settings.mu1.unwrap_or(base_mu),
        mu2: settings.mu2.unwrap_or(base_mu),
        epsilon,
        max_iters: settings.max_iters.unwrap_or(spec.default_max_iters()),
        feas_rtol: settings.feas_rtol.unwrap_or(DEFAULT_FEAS_RTOL),
        change_rtol: settings.change_rtol.unwrap_or(DEFAULT_CHANGE_RTOL),
        tv_inner_iters: settings.tv_inner_iters.unwrap_or(DEFAULT_TV_INNER_ITERS),
        tv_inner_tol: settings.tv_inner_tol.unwrap_or(DEFAULT_TV_INNER_TOL),
        tv_warm_start: settings.tv_warm_start.unwrap_or(true),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn epsilon_for(spec: &ExperimentSpec, sigma: f64, m: usize, y_norm: f64) -> Result<f64> {
    if let Some(eps) = spec.epsilon {
        return Ok(eps);
    }
    let from_noise = eps_from_noise(sigma, m, spec.eps_factor)?;
    Ok(from_noise.max(spec.eps_rel_floor * y_norm))
}

fn mean_abs<S: Signal>(y: &S) -> f64 {
    let per = y.components_per_entry();
    let vals = y.values();
    let entries = vals.len() / per;
    vals.chunks_exact(per)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .sum::<f64>()
        / entries.max(1) as f64
}

/// Runs one experiment and writes whichever outputs are requested.
pub fn run_experiment(
    spec: &ExperimentSpec,
    settings: &SolverSettings,
    outputs: &OutputPaths,
) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let (truth, bit_depth) = load_image(&spec.image)?;
    let sigma = spec.noise_variance.sqrt() / spec.noise_scale();
    let start = Instant::now();

    let mut outcome = match spec.problem {
        ProblemKind::Deblur => run_deblur(spec, settings, truth, sigma)?,
        ProblemKind::Mri => run_mri(spec, settings, truth, sigma)?,
    };
    let report = &mut outcome.report;
    report.elapsed_seconds = start.elapsed().as_secs_f64();
    report.image_bit_depth = bit_depth;
    report.trace_path = outputs.trace.clone();
    report.image_path = outputs.image.clone();

    if let Some(path) = &outputs.trace {
        outcome.trace.write_csv(path)?;
    }
    if let Some(path) = &outputs.image {
        write_pgm16(path, &outcome.reconstruction)?;
    }
    if let Some(path) = &outputs.report {
        outcome.report.write_json(path)?;
    }
    Ok(outcome)
}

fn run_deblur(
    spec: &ExperimentSpec,
    settings: &SolverSettings,
    truth: Grid2D,
    sigma: f64,
) -> Result<ExperimentOutcome> {
    let blur = spec.blur.as_ref().expect("validated");
    let RegularizerSpec::L1Frame { levels } = spec.regularizer else {
        unreachable!("validated");
    };
    let (rows, cols) = truth.dim();
    let kernel = make_blur_kernel(blur)?;
    let blur_op = make_circulant(&kernel, rows, cols)?;
    let op = FrameComposite::new(blur_op, levels)?;

    let clean = op.blur().apply(&truth)?;
    let y = add_noise(&clean, sigma * sigma, spec.seed)?;
    let m = y.len();
    let epsilon = epsilon_for(spec, sigma, m, y.norm())?;
    let cfg = build_config(spec, settings, epsilon, mean_abs(&y))?;

    let probe = |c: &CoeffStack| -> f64 {
        op.synthesize(c)
            .and_then(|img| mse(&img, &truth))
            .unwrap_or(f64::NAN)
    };
    let initial_residual = initial_residual(&op, &y)?;
    let sol = csalsa_solve(&op, &y, &Regularizer::L1, &cfg, None, Some(&probe))?;
    let reconstruction = op.synthesize(&sol.x)?;
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        solver: cfg.clone(),
        status: sol.status,
        iterations: sol.iterations(),
        elapsed_seconds: 0.0,
        initial_residual,
        final_residual: sol.final_residual,
        epsilon,
        mse: mse(&reconstruction, &truth)?,
        isnr: Some(isnr(&y, &reconstruction, &truth)?),
        noise_scale: spec.noise_scale(),
        sigma,
        observations: m,
        sampling_ratio: None,
        adjoint_imag_residual: None,
        image_rows: rows,
        image_cols: cols,
        image_bit_depth: None,
        trace_path: None,
        image_path: None,
    };
    Ok(ExperimentOutcome {
        report,
        trace: sol.trace,
        reconstruction,
        truth,
        observation_image: y,
    })
}

fn run_mri(
    spec: &ExperimentSpec,
    settings: &SolverSettings,
    truth: Grid2D,
    sigma: f64,
) -> Result<ExperimentOutcome> {
    let (rows, cols) = truth.dim();
    if rows != cols {
        return Err(Error::invalid(format!(
            "MRI needs a square image, got {rows}x{cols}"
        )));
    }
    let Some(MaskSpec::RadialLines { count }) = spec.mask else {
        unreachable!("validated");
    };
    let op = make_partial_fourier(radial_mask(rows, count)?)?;
    let clean = op.apply(&truth)?;
    let y = add_noise(&clean, sigma * sigma, spec.seed)?;
    let m = y.len();
    let epsilon = epsilon_for(spec, sigma, m, y.norm())?;
    let cfg = build_config(spec, settings, epsilon, mean_abs(&y))?;
    let reg = cfg.tv_regularizer();

    let probe = |x: &Grid2D| -> f64 { mse(x, &truth).unwrap_or(f64::NAN) };
    let initial_residual = initial_residual(&op, &y)?;
    let sol = csalsa_solve(&op, &y, &reg, &cfg, None, Some(&probe))?;
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: spec.clone(),
        solver: cfg.clone(),
        status: sol.status,
        iterations: sol.iterations(),
        elapsed_seconds: 0.0,
        initial_residual,
        final_residual: sol.final_residual,
        epsilon,
        mse: mse(&sol.x, &truth)?,
        isnr: None,
        noise_scale: spec.noise_scale(),
        sigma,
        observations: m,
        sampling_ratio: Some(op.mask().sampling_ratio()),
        adjoint_imag_residual: Some(op.adjoint_imag_residual(&y)?),
        image_rows: rows,
        image_cols: cols,
        image_bit_depth: None,
        trace_path: None,
        image_path: None,
    };
    Ok(ExperimentOutcome {
        report,
        trace: sol.trace,
        observation_image: op.adjoint(&y)?,
        reconstruction: sol.x,
        truth,
    })
}

/// `‖B Bᴴy − y‖`, the residual of the default starting point.
fn initial_residual<Op: LinearOp>(op: &Op, y: &Op::Range) -> Result<f64> {
    Ok(op.apply(&op.adjoint(y)?)?.minus(y).norm())
}

/// One self-contained run for [`run_batch`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentJob {
    pub spec: ExperimentSpec,
    pub settings: SolverSettings,
    pub outputs: OutputPaths,
}

/// Runs `jobs` on up to `workers` threads. Each job owns its operator, solver
/// state, generator and output files; results come back in input order.
pub fn run_batch(jobs: &[ExperimentJob], workers: usize) -> Vec<Result<ExperimentOutcome>> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let workers = workers.clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ExperimentOutcome>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let out = run_experiment(&job.spec, &job.settings, &job.outputs);
                results.lock().expect("no worker panicked")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}
