use num_complex::Complex64;

use super::fft::Fft2;
use super::grid::{check_shape_by, ComplexVec, Grid2D, Spectrum2D};
use super::mask::SamplingMask;
use super::{check_alpha, LinearOp, OpKind};
use crate::error::{Error, Result};

/// Partial Fourier observation `B = M U` of a real image.
///
/// Measurements are the selected cells of the unitary DFT in row-major order.
/// Because the unknown is real, the adjoint is `Re(Uᴴ Mᵀ z)` and
/// `BᴴB = Uᴴ diag(s) U` with `s_k = (M_k + M_{-k}) / 2`. For conjugate-symmetric
/// masks `s` is the 0/1 mask itself and the inverse reduces to
/// `I - α/(1+α) Uᴴ MᵀM U`.
#[derive(Clone, Debug)]
pub struct PartialFourier {
    mask: SamplingMask,
    symmetrized: Vec<f64>,
    fft: Fft2,
}

pub fn make_partial_fourier(mask: SamplingMask) -> Result<PartialFourier> {
    PartialFourier::new(mask)
}

impl PartialFourier {
    pub fn new(mask: SamplingMask) -> Result<Self> {
        if mask.m() == 0 {
            return Err(Error::invalid("partial Fourier mask is empty"));
        }
        let (rows, cols) = mask.dim();
        let mut symmetrized = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let here = mask.is_selected(r, c) as u8 as f64;
                let mirror = mask.is_selected((rows - r) % rows, (cols - c) % cols) as u8 as f64;
                symmetrized.push(0.5 * (here + mirror));
            }
        }
        Ok(Self {
            mask,
            symmetrized,
            fft: Fft2::new(rows, cols),
        })
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn m(&self) -> usize {
        self.mask.m()
    }

    /// `M U` on a complex array.
    pub fn apply_complex(&self, x: &Spectrum2D) -> Result<ComplexVec> {
        if x.dim() != self.mask.dim() {
            return Err(Error::invalid(format!(
                "partial Fourier apply: expected {:?}, got {:?}",
                self.mask.dim(),
                x.dim()
            )));
        }
        let mut s = x.clone();
        self.fft.forward(&mut s);
        Ok(self.gather(&s))
    }

    /// `Uᴴ Mᵀ z` with no real-part projection.
    pub fn adjoint_complex(&self, z: &ComplexVec) -> Result<Spectrum2D> {
        self.check_samples(z)?;
        let (rows, cols) = self.mask.dim();
        let mut s = Spectrum2D::zeros(rows, cols);
        let buf = s.as_slice_mut();
        for (k, &idx) in self.mask.indices().iter().enumerate() {
            buf[idx] = z.get(k);
        }
        self.fft.inverse(&mut s);
        Ok(s)
    }

    /// Largest imaginary magnitude discarded when mapping `z` back to an image.
    pub fn adjoint_imag_residual(&self, z: &ComplexVec) -> Result<f64> {
        Ok(self.adjoint_complex(z)?.max_imag())
    }

    fn gather(&self, s: &Spectrum2D) -> ComplexVec {
        let buf = s.as_slice();
        ComplexVec::from_complex(self.mask.indices().iter().map(|&i| buf[i]))
    }

    fn check_image(&self, x: &Grid2D, what: &str) -> Result<()> {
        let ok = x.dim() == (self.mask.rows(), self.mask.cols());
        check_shape_by(x, ok, || self.domain_zeros(), what)
    }

    fn check_samples(&self, z: &ComplexVec) -> Result<()> {
        check_shape_by(
            z,
            z.len() == self.mask.m(),
            || self.range_zeros(),
            "partial Fourier samples",
        )
    }
}

impl LinearOp for PartialFourier {
    type Domain = Grid2D;
    type Range = ComplexVec;

    fn kind(&self) -> OpKind {
        OpKind::PartialFourier
    }

    fn domain_zeros(&self) -> Grid2D {
        Grid2D::zeros(self.mask.rows(), self.mask.cols())
    }

    fn range_zeros(&self) -> ComplexVec {
        ComplexVec::zeros(self.mask.m())
    }

    fn apply(&self, x: &Grid2D) -> Result<ComplexVec> {
        self.check_image(x, "partial Fourier apply")?;
        Ok(self.gather(&self.fft.forward_real(x)))
    }

    fn adjoint(&self, y: &ComplexVec) -> Result<Grid2D> {
        Ok(self.adjoint_complex(y)?.re())
    }

    fn regularized_inverse(&self, alpha: f64, r: &Grid2D) -> Result<Grid2D> {
        check_alpha(alpha)?;
        self.check_image(r, "partial Fourier regularized inverse")?;
        let mut s = self.fft.forward_real(r);
        for (z, &w) in s.as_slice_mut().iter_mut().zip(&self.symmetrized) {
            *z *= Complex64::new(1.0 / (1.0 + alpha * w), 0.0);
        }
        self.fft.inverse(&mut s);
        Ok(s.re())
    }
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
    fn dc_only_mask() {
        let op =
            make_partial_fourier(SamplingMask::from_fn(4, 6, |p| p == (0, 0)).unwrap()).unwrap();
        let y = op.apply(&Grid2D::filled(4, 6, 2.0)).unwrap();
        assert_eq!(y.len(), 1);
        assert!((y.get(0) - Complex64::new(2.0 * 24f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn full_mask_is_unitary() {
        let op = make_partial_fourier(SamplingMask::full(8, 8)).unwrap();
        let x = random_grid(8, 8, 1);
        assert!(op.adjoint(&op.apply(&x).unwrap()).unwrap().distance(&x) < 1e-12);
        let s = op.regularized_inverse(3.0, &x).unwrap();
        let mut quarter = x.clone();
        quarter.scale(0.25);
        assert!(s.distance(&quarter) < 1e-13);
    }

    #[test]
    fn symmetric_mask_matches_inversion_lemma_form() {
        let mask = SamplingMask::from_fn(8, 8, |(r, c)| r == 0 || c == 0 || r == c).unwrap();
        assert!(mask.is_conjugate_symmetric());
        let op = make_partial_fourier(mask).unwrap();
        let r = random_grid(8, 8, 2);
        let alpha = 2.5;
        let s = op.regularized_inverse(alpha, &r).unwrap();
        // I - α/(1+α) Uᴴ MᵀM U r
        let mut lemma = r.clone();
        lemma.axpy(
            -alpha / (1.0 + alpha),
            &op.adjoint(&op.apply(&r).unwrap()).unwrap(),
        );
        assert!(s.distance(&lemma) < 1e-12 * r.norm());
    }

    #[test]
    fn shape_errors() {
        let op = make_partial_fourier(SamplingMask::full(4, 4)).unwrap();
        assert!(op.apply(&Grid2D::zeros(4, 3)).is_err());
        assert!(op.adjoint(&ComplexVec::zeros(3)).is_err());
    }
}
