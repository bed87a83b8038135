use num_complex::Complex64;

use super::fft::Fft2;
use super::grid::{check_shape_by, Grid2D, Spectrum2D};
use super::{check_alpha, LinearOp, OpKind};
use crate::error::{Error, Result};

/// Periodic convolution `B = Uᴴ D U` on a fixed grid.
#[derive(Clone, Debug)]
pub struct Circulant {
    /// `D`: the transfer function, i.e. `sqrt(n)` times the unitary DFT of the
    /// centered, zero-embedded kernel.
    transfer: Spectrum2D,
    power: Vec<f64>,
    fft: Fft2,
}

/// Builds the convolution with `kernel` on a `rows x cols` periodic grid. The
/// kernel's center cell is `(kr / 2, kc / 2)`.
pub fn make_circulant(kernel: &Grid2D, rows: usize, cols: usize) -> Result<Circulant> {
    let (kr, kc) = kernel.dim();
    Circulant::with_center(kernel, (kr / 2, kc / 2), rows, cols)
}

impl Circulant {
    pub fn with_center(
        kernel: &Grid2D,
        center: (usize, usize),
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        let (kr, kc) = kernel.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("grid must be non-empty"));
        }
        if kr > rows || kc > cols {
            return Err(Error::invalid(format!(
                "kernel {kr}x{kc} does not fit in grid {rows}x{cols}"
            )));
        }
        if center.0 >= kr || center.1 >= kc {
            return Err(Error::invalid(format!(
                "kernel center {center:?} outside kernel {kr}x{kc}"
            )));
        }
        // Embed with the center at (0, 0), wrapping negative offsets.
        let mut embedded = Spectrum2D::zeros(rows, cols);
        for ((i, j), &h) in kernel.view().indexed_iter() {
            let r = (i + rows - center.0) % rows;
            let c = (j + cols - center.1) % cols;
            embedded.array_mut()[[r, c]] += Complex64::new(h, 0.0);
        }
        let fft = Fft2::new(rows, cols);
        fft.forward(&mut embedded);
        let scale = ((rows * cols) as f64).sqrt();
        for z in embedded.as_slice_mut() {
            *z *= scale;
        }
        Ok(Self::from_transfer(embedded, fft))
    }

    pub fn identity(rows: usize, cols: usize) -> Self {
        let transfer = Spectrum2D::from_array_unchecked(ndarray::Array2::from_elem(
            (rows, cols),
            Complex64::new(1.0, 0.0),
        ));
        Self::from_transfer(transfer, Fft2::new(rows, cols))
    }

    fn from_transfer(transfer: Spectrum2D, fft: Fft2) -> Self {
        let power = transfer.as_slice().iter().map(|z| z.norm_sqr()).collect();
        Self {
            transfer,
            power,
            fft,
        }
    }

    pub fn transfer(&self) -> &Spectrum2D {
        &self.transfer
    }

    pub fn dim(&self) -> (usize, usize) {
        self.fft.dim()
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// `|D|²` per cell, row-major.
    pub(crate) fn power(&self) -> &[f64] {
        &self.power
    }

    /// `Re(Uᴴ diag(f) U x)` where `f(i, D_i)` gives the multiplier of cell `i`.
    pub(crate) fn spectral_filter(
        &self,
        x: &Grid2D,
        f: impl Fn(usize, Complex64) -> Complex64,
    ) -> Grid2D {
        let mut s = self.fft.forward_real(x);
        for (i, (z, d)) in s
            .as_slice_mut()
            .iter_mut()
            .zip(self.transfer.as_slice())
            .enumerate()
        {
            *z *= f(i, *d);
        }
        self.fft.inverse(&mut s);
        s.re()
    }

    fn check_image(&self, x: &Grid2D, what: &str) -> Result<()> {
        check_shape_by(x, x.dim() == self.dim(), || self.domain_zeros(), what)
    }
}

impl LinearOp for Circulant {
    type Domain = Grid2D;
    type Range = Grid2D;

    fn kind(&self) -> OpKind {
        OpKind::Circulant
    }

    fn domain_zeros(&self) -> Grid2D {
        let (r, c) = self.dim();
        Grid2D::zeros(r, c)
    }

    fn range_zeros(&self) -> Grid2D {
        self.domain_zeros()
    }

    fn apply(&self, x: &Grid2D) -> Result<Grid2D> {
        self.check_image(x, "circulant apply")?;
        Ok(self.spectral_filter(x, |_, d| d))
    }

    fn adjoint(&self, y: &Grid2D) -> Result<Grid2D> {
        self.check_image(y, "circulant adjoint")?;
        Ok(self.spectral_filter(y, |_, d| d.conj()))
    }

    fn regularized_inverse(&self, alpha: f64, r: &Grid2D) -> Result<Grid2D> {
        check_alpha(alpha)?;
        self.check_image(r, "circulant regularized inverse")?;
        let power = &self.power;
        Ok(self.spectral_filter(r, |i, _| {
            Complex64::new(1.0 / (alpha * power[i] + 1.0), 0.0)
        }))
    }
}
