use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Grid2D;

pub const DEFAULT_GAUSSIAN_SIZE: usize = 9;
pub const DEFAULT_GAUSSIAN_STD: f64 = 2.0;
pub const DEFAULT_HIJ_HALFWIDTH: usize = 7;

/// Point-spread functions of the deblurring benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BlurSpec {
    /// No blur (a unit impulse); useful for denoising and sanity runs.
    Identity,
    /// 9x9 box filter.
    Uniform9,
    /// `size x size` sampled Gaussian with standard deviation `std` pixels.
    Gaussian { size: usize, std: f64 },
    /// `h_ij = 1 / (1 + i² + j²)` for `|i|, |j| ≤ halfwidth`.
    Hij { halfwidth: usize },
}

impl BlurSpec {
    pub fn gaussian() -> Self {
        BlurSpec::Gaussian {
            size: DEFAULT_GAUSSIAN_SIZE,
            std: DEFAULT_GAUSSIAN_STD,
        }
    }

    pub fn hij() -> Self {
        BlurSpec::Hij {
            halfwidth: DEFAULT_HIJ_HALFWIDTH,
        }
    }
}

/// Kernel samples before normalization to unit sum.
pub fn raw_blur_kernel(blur: &BlurSpec) -> Result<Grid2D> {
    match *blur {
        BlurSpec::Identity => Ok(Grid2D::filled(1, 1, 1.0)),
        BlurSpec::Uniform9 => Ok(Grid2D::filled(9, 9, 1.0)),
        BlurSpec::Gaussian { size, std } => {
            if size == 0 || !(std > 0.0 && std.is_finite()) {
                return Err(Error::invalid(format!(
                    "gaussian blur needs positive size and std, got size={size} std={std}"
                )));
            }
            let center = (size / 2) as f64;
            let two_var = 2.0 * std * std;
            Ok(Grid2D::from_fn(size, size, |(r, c)| {
                let (dr, dc) = (r as f64 - center, c as f64 - center);
                (-(dr * dr + dc * dc) / two_var).exp()
            }))
        }
        BlurSpec::Hij { halfwidth } => {
            if halfwidth == 0 {
                return Err(Error::invalid("hij blur needs a positive halfwidth"));
            }
            let size = 2 * halfwidth + 1;
            let h = halfwidth as f64;
            Ok(Grid2D::from_fn(size, size, |(r, c)| {
                let (i, j) = (r as f64 - h, c as f64 - h);
                1.0 / (1.0 + i * i + j * j)
            }))
        }
    }
}

/// Kernel normalized to unit sum, centered at `(rows / 2, cols / 2)`.
pub fn make_blur_kernel(blur: &BlurSpec) -> Result<Grid2D> {
    let raw = raw_blur_kernel(blur)?;
    let total = raw.sum();
    Ok(raw.map(|v| v / total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Signal;

    #[test]
    fn uniform_is_flat() {
        let k = make_blur_kernel(&BlurSpec::Uniform9).unwrap();
        assert_eq!(k.dim(), (9, 9));
        assert!(k.values().iter().all(|&v| (v - 1.0 / 81.0).abs() < 1e-16));
    }

    #[test]
    fn hij_center_is_one_before_normalization() {
        let raw = raw_blur_kernel(&BlurSpec::hij()).unwrap();
        assert_eq!(raw.dim(), (15, 15));
        assert_eq!(raw.get(7, 7), 1.0);
        assert_eq!(raw.get(7, 8), 0.5);
        assert_eq!(raw.get(0, 0), 1.0 / 99.0);
    }

    #[test]
    fn all_kernels_sum_to_one() {
        for blur in [
            BlurSpec::Identity,
            BlurSpec::Uniform9,
            BlurSpec::gaussian(),
            BlurSpec::Gaussian { size: 5, std: 0.7 },
            BlurSpec::hij(),
        ] {
            let k = make_blur_kernel(&blur).unwrap();
            assert!((k.sum() - 1.0).abs() < 1e-12, "{blur:?}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_blur_kernel(&BlurSpec::Gaussian { size: 0, std: 1.0 }).is_err());
        assert!(make_blur_kernel(&BlurSpec::Gaussian { size: 5, std: 0.0 }).is_err());
        assert!(make_blur_kernel(&BlurSpec::Hij { halfwidth: 0 }).is_err());
    }
}
