use num_complex::Complex64;

use super::circulant::Circulant;
use super::frame::{CoeffStack, HaarFrame};
use super::grid::{check_shape_by, Grid2D};
use super::{check_alpha, LinearOp, OpKind};
use crate::error::Result;

/// `B = A W`: a periodic convolution `A` applied to the synthesis `W` of a
/// Parseval Haar frame. The unknown is the coefficient stack.
///
/// With `W Wᴴ = I` the matrix inversion lemma gives
/// `(α WᴴAᴴAW + I)⁻¹ = I - Wᴴ F W`, `F = Uᴴ diag(α|D|² / (α|D|² + 1)) U`.
#[derive(Clone, Debug)]
pub struct FrameComposite {
    blur: Circulant,
    frame: HaarFrame,
}

impl FrameComposite {
    pub fn new(blur: Circulant, levels: usize) -> Result<Self> {
        let frame = HaarFrame::new(levels)?;
        let (rows, cols) = blur.dim();
        frame.check_dims(rows, cols)?;
        Ok(Self { blur, frame })
    }

    pub fn blur(&self) -> &Circulant {
        &self.blur
    }

    pub fn frame(&self) -> &HaarFrame {
        &self.frame
    }

    /// Image represented by the coefficients, `W c`.
    pub fn synthesize(&self, coeffs: &CoeffStack) -> Result<Grid2D> {
        self.frame.synthesis(coeffs)
    }

    pub fn analyze(&self, img: &Grid2D) -> Result<CoeffStack> {
        self.frame.analysis(img)
    }

    fn check_coeffs(&self, c: &CoeffStack, what: &str) -> Result<()> {
        let ok = c.levels() == self.frame.levels() && c.plane_dim() == self.blur.dim();
        check_shape_by(c, ok, || self.domain_zeros(), what)
    }
}

impl LinearOp for FrameComposite {
    type Domain = CoeffStack;
    type Range = Grid2D;

    fn kind(&self) -> OpKind {
        OpKind::FrameComposite
    }

    fn domain_zeros(&self) -> CoeffStack {
        let (r, c) = self.blur.dim();
        CoeffStack::zeros(self.frame.levels(), r, c)
    }

    fn range_zeros(&self) -> Grid2D {
        self.blur.range_zeros()
    }

    fn apply(&self, x: &CoeffStack) -> Result<Grid2D> {
        self.check_coeffs(x, "frame composite apply")?;
        self.blur.apply(&self.frame.synthesis(x)?)
    }

    fn adjoint(&self, y: &Grid2D) -> Result<CoeffStack> {
        self.frame.analysis(&self.blur.adjoint(y)?)
    }

    fn regularized_inverse(&self, alpha: f64, r: &CoeffStack) -> Result<CoeffStack> {
        let mut out = self.domain_zeros();
        self.regularized_inverse_into(alpha, r, &mut out)?;
        Ok(out)
    }

    fn adjoint_into(&self, y: &Grid2D, out: &mut CoeffStack) -> Result<()> {
        self.check_coeffs(out, "frame composite adjoint output")?;
        self.frame.analysis_into(&self.blur.adjoint(y)?, out)
    }

    fn adjoint_axpy_into(
        &self,
        a: f64,
        y: &Grid2D,
        base: &CoeffStack,
        out: &mut CoeffStack,
    ) -> Result<()> {
        self.check_coeffs(base, "frame composite adjoint base")?;
        self.check_coeffs(out, "frame composite adjoint output")?;
        self.frame
            .analysis_with(&self.blur.adjoint(y)?, base, out, |coef, b| a * coef + b)
    }

    fn regularized_inverse_into(
        &self,
        alpha: f64,
        r: &CoeffStack,
        out: &mut CoeffStack,
    ) -> Result<()> {
        check_alpha(alpha)?;
        self.check_coeffs(r, "frame composite regularized inverse")?;
        self.check_coeffs(out, "frame composite regularized inverse output")?;
        let power = self.blur.power();
        let filtered = self
            .blur
            .spectral_filter(&self.frame.synthesis(r)?, |i, _| {
                let a = alpha * power[i];
                Complex64::new(a / (a + 1.0), 0.0)
            });
        self.frame
            .analysis_with(&filtered, r, out, |coef, r| r - coef)
    }
}
