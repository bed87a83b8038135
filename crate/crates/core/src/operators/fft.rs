//! Unitary 2-D DFT: `1/sqrt(n)` scaling on both the forward and the inverse
//! transform, so `U^H = U^{-1}` holds literally.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid2D, Spectrum2D};

/// Precomputed row/column plans for one grid size. Immutable and shareable
/// across threads; scratch space is allocated per call.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "fft size must be positive");
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
            scale: 1.0 / ((rows * cols) as f64).sqrt(),
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn forward(&self, s: &mut Spectrum2D) {
        self.transform(s, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, s: &mut Spectrum2D) {
        self.transform(s, &self.row_inv, &self.col_inv);
    }

    /// Forward transform of a real image.
    pub fn forward_real(&self, g: &Grid2D) -> Spectrum2D {
        let mut s = g.to_spectrum();
        self.forward(&mut s);
        s
    }

    fn transform(
        &self,
        s: &mut Spectrum2D,
        row_plan: &Arc<dyn Fft<f64>>,
        col_plan: &Arc<dyn Fft<f64>>,
    ) {
        assert_eq!(
            s.dim(),
            (self.rows, self.cols),
            "fft plan/grid size mismatch"
        );
        let (rows, cols) = (self.rows, self.cols);
        let scratch_len = row_plan
            .get_inplace_scratch_len()
            .max(col_plan.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];

        let data = s.as_slice_mut();
        row_plan.process_with_scratch(data, &mut scratch);

        if rows == cols {
            transpose_square(data, rows);
            col_plan.process_with_scratch(data, &mut scratch);
            transpose_square(data, rows);
        } else {
            let mut transposed = vec![Complex64::new(0.0, 0.0); rows * cols];
            transpose(data, &mut transposed, rows, cols);
            col_plan.process_with_scratch(&mut transposed, &mut scratch);
            transpose(&transposed, data, cols, rows);
        }
        let scale = self.scale;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

// Blocked in-place transpose of an `n x n` array.
fn transpose_square(a: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for r0 in (0..n).step_by(B) {
        for c0 in (r0..n).step_by(B) {
            for r in r0..(r0 + B).min(n) {
                let start = if c0 == r0 { r + 1 } else { c0 };
                for c in start..(c0 + B).min(n) {
                    a.swap(r * n + c, c * n + r);
                }
            }
        }
    }
}

// Blocked out-of-place transpose of a row-major `rows x cols` array.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Unitary forward DFT of a real image.
pub fn fft2_unitary(g: &Grid2D) -> Spectrum2D {
    Fft2::new(g.rows(), g.cols()).forward_real(g)
}

/// Unitary forward DFT of a complex array.
pub fn fft2_unitary_complex(s: &Spectrum2D) -> Spectrum2D {
    let mut out = s.clone();
    Fft2::new(s.rows(), s.cols()).forward(&mut out);
    out
}

/// Unitary inverse DFT.
pub fn ifft2_unitary(s: &Spectrum2D) -> Spectrum2D {
    let mut out = s.clone();
    Fft2::new(s.rows(), s.cols()).inverse(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::grid::Signal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, seed: u64) -> Grid2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Grid2D::from_fn(rows, cols, |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn constant_maps_to_dc() {
        let (p, q) = (6, 10);
        let c = 0.7;
        let s = fft2_unitary(&Grid2D::filled(p, q, c));
        let dc = c * ((p * q) as f64).sqrt();
        assert!((s.get(0, 0).re - dc).abs() < 1e-12);
        for ((r, col), z) in s.array().indexed_iter() {
            if (r, col) != (0, 0) {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for &(p, q) in &[(8, 8), (5, 12), (16, 7)] {
            let g = random_grid(p, q, 3);
            let s = fft2_unitary(&g);
            assert!((s.norm() - g.norm()).abs() <= 1e-12 * g.norm());
            let back = ifft2_unitary(&s);
            assert!(back.max_imag() < 1e-12);
            assert!(back.re().distance(&g) <= 1e-12 * g.norm());
        }
    }

    #[test]
    fn matches_naive_dft() {
        let g = random_grid(4, 6, 9);
        let s = fft2_unitary(&g);
        let n = 24.0f64;
        for k in 0..4 {
            for l in 0..6 {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..4 {
                    for c in 0..6 {
                        let ph = -2.0
                            * std::f64::consts::PI
                            * (k as f64 * r as f64 / 4.0 + l as f64 * c as f64 / 6.0);
                        acc += Complex64::from_polar(g.get(r, c), ph);
                    }
                }
                assert!((acc / n.sqrt() - s.get(k, l)).norm() < 1e-12);
            }
        }
    }
}
