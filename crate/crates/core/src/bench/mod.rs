//! Desk-scale reproductions of the deblurring and compressive-MRI benchmarks.

mod experiment;
mod kernels;
mod mask;
mod metrics;
mod noise;
mod pgm;
mod phantom;

pub use experiment::{
    default_mu, run_batch, run_experiment, ExperimentJob, ExperimentOutcome, ExperimentSpec,
    ImageSource, MaskSpec, OutputPaths, ProblemKind, RegularizerSpec, Report, SolverSettings,
    DEBLUR_NOISE_SCALE, DEFAULT_DEBLUR_MAX_ITERS, DEFAULT_DEBLUR_MU, DEFAULT_FRAME_LEVELS,
    DEFAULT_MRI_LINES, DEFAULT_MRI_MAX_ITERS, MRI_MU_PER_MEAN_ABS, MRI_NOISELESS_EPS_REL,
    REPORT_SCHEMA_VERSION,
};
pub use kernels::{
    make_blur_kernel, raw_blur_kernel, BlurSpec, DEFAULT_GAUSSIAN_SIZE, DEFAULT_GAUSSIAN_STD,
    DEFAULT_HIJ_HALFWIDTH,
};
pub use mask::radial_mask;
pub use metrics::{isnr, mse};
pub use noise::{add_noise, eps_from_noise, rng_from_seed};
pub use pgm::{encode_pgm16, encode_pgm8, parse_pgm, read_image, write_pgm16, LoadedImage};
pub use phantom::{
    rasterize_ellipses, shepp_logan, synthetic_image, Ellipse, MIN_PHANTOM_SIZE, SHEPP_LOGAN,
};
