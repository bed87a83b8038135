use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operators::Signal;

/// The generator behind every random draw in the harness.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adds i.i.d. zero-mean Gaussian noise of variance `variance` per entry. For
/// complex entries the real and imaginary parts each get `variance / 2`.
pub fn add_noise<S: Signal>(y: &S, variance: f64, seed: u64) -> Result<S> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::invalid(format!(
            "noise variance must be nonnegative, got {variance}"
        )));
    }
    let mut out = y.clone();
    if variance == 0.0 {
        return Ok(out);
    }
    let sd = (variance / y.components_per_entry() as f64).sqrt();
    let mut rng = rng_from_seed(seed);
    for v in out.values_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += sd * z;
    }
    Ok(out)
}

/// `ε = factor · σ · √m`: the expected norm of `m` noise entries of std `σ`.
pub fn eps_from_noise(sigma: f64, m: usize, factor: f64) -> Result<f64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma must be nonnegative, got {sigma}"
        )));
    }
    if m == 0 {
        return Err(Error::invalid("observation count must be positive"));
    }
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::invalid(format!(
            "eps factor must be positive, got {factor}"
        )));
    }
    Ok(factor * sigma * (m as f64).sqrt())
}
