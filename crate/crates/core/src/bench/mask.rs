use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operators::SamplingMask;

/// Radial sampling of an `n x n` DFT: `lines` lines through the spectrum
/// center at angles `kπ / lines`, rasterized with one cell per step along the
/// dominant axis on the centered grid, then wrapped to DFT index order.
///
/// Rounding is symmetric about zero, so the mask is conjugate-symmetric and
/// always contains DC.
pub fn radial_mask(n: usize, lines: usize) -> Result<SamplingMask> {
    if n == 0 {
        return Err(Error::invalid("mask size must be positive"));
    }
    if lines == 0 {
        return Err(Error::invalid("need at least one radial line"));
    }
    let mut selected = ndarray::Array2::from_elem((n, n), false);
    let half = (n / 2) as i64;
    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
    for line in 0..lines {
        let theta = PI * line as f64 / lines as f64;
        let (cos, sin) = (theta.cos(), theta.sin());
        for t in -half..=half {
            let (row_off, col_off) = if cos.abs() >= sin.abs() {
                ((t as f64 * sin / cos).round() as i64, t)
            } else {
                (t, (t as f64 * cos / sin).round() as i64)
            };
            selected[[wrap(row_off), wrap(col_off)]] = true;
        }
    }
    SamplingMask::new(selected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_is_one_row() {
        let m = radial_mask(16, 1).unwrap();
        assert_eq!(m.m(), 16);
        assert!((0..16).all(|c| m.is_selected(0, c)));
    }

    #[test]
    fn contains_dc_and_is_symmetric() {
        for lines in [1, 2, 5, 22] {
            let m = radial_mask(32, lines).unwrap();
            assert!(m.is_selected(0, 0));
            assert!(m.is_conjugate_symmetric());
        }
        assert!(radial_mask(31, 7).unwrap().is_conjugate_symmetric());
    }

    #[test]
    fn count_grows_with_lines() {
        let counts: Vec<usize> = (1..=24).map(|l| radial_mask(64, l).unwrap().m()).collect();
        assert!(counts.windows(2).all(|w| w[1] > w[0]), "{counts:?}");
    }

    #[test]
    fn desk_scale_sampling_ratio() {
        let ratio = radial_mask(128, 22).unwrap().sampling_ratio();
        assert!((ratio - 0.15).abs() <= 0.05, "ratio {ratio}");
    }

    #[test]
    fn rejects_zero_lines() {
        assert!(radial_mask(16, 0).is_err());
    }
}
