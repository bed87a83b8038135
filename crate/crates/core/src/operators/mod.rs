//! Observation operators `B` and their fast regularized inverses
//! `(α BᴴB + I)⁻¹`, all diagonalized by the unitary 2-D DFT.

mod circulant;
mod composite;
pub mod fft;
pub mod frame;
pub mod grid;
mod mask;
mod partial_fourier;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use circulant::{make_circulant, Circulant};
pub use composite::FrameComposite;
pub use fft::{fft2_unitary, fft2_unitary_complex, ifft2_unitary, Fft2};
pub use frame::{frame_analysis, frame_synthesis, CoeffStack, HaarFrame};
pub use grid::{ComplexVec, Grid2D, Signal, Spectrum2D};
pub use mask::SamplingMask;
pub use partial_fourier::{make_partial_fourier, PartialFourier};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Circulant,
    PartialFourier,
    FrameComposite,
}

/// A linear observation operator `B: Domain -> Range`.
///
/// Implementations are immutable after construction and may be shared across
/// threads. Adjoints are taken with respect to the real inner product on both
/// spaces.
pub trait LinearOp: Send + Sync {
    type Domain: Signal;
    type Range: Signal;

    fn kind(&self) -> OpKind;

    fn domain_zeros(&self) -> Self::Domain;

    fn range_zeros(&self) -> Self::Range;

    fn apply(&self, x: &Self::Domain) -> Result<Self::Range>;

    fn adjoint(&self, y: &Self::Range) -> Result<Self::Domain>;

    /// Solves `(α BᴴB + I) s = r`.
    fn regularized_inverse(&self, alpha: f64, r: &Self::Domain) -> Result<Self::Domain>;

    /// [`LinearOp::adjoint`] into an existing buffer.
    fn adjoint_into(&self, y: &Self::Range, out: &mut Self::Domain) -> Result<()> {
        *out = self.adjoint(y)?;
        Ok(())
    }

    /// `out = a·Bᴴy + base`.
    fn adjoint_axpy_into(
        &self,
        a: f64,
        y: &Self::Range,
        base: &Self::Domain,
        out: &mut Self::Domain,
    ) -> Result<()> {
        self.adjoint_into(y, out)?;
        for (o, &b) in out.values_mut().iter_mut().zip(base.values()) {
            *o = a * *o + b;
        }
        Ok(())
    }

    /// [`LinearOp::regularized_inverse`] into an existing buffer.
    fn regularized_inverse_into(
        &self,
        alpha: f64,
        r: &Self::Domain,
        out: &mut Self::Domain,
    ) -> Result<()> {
        *out = self.regularized_inverse(alpha, r)?;
        Ok(())
    }
}

impl<T: LinearOp + ?Sized> LinearOp for &T {
    type Domain = T::Domain;
    type Range = T::Range;

    fn kind(&self) -> OpKind {
        (**self).kind()
    }

    fn domain_zeros(&self) -> Self::Domain {
        (**self).domain_zeros()
    }

    fn range_zeros(&self) -> Self::Range {
        (**self).range_zeros()
    }

    fn apply(&self, x: &Self::Domain) -> Result<Self::Range> {
        (**self).apply(x)
    }

    fn adjoint(&self, y: &Self::Range) -> Result<Self::Domain> {
        (**self).adjoint(y)
    }

    fn regularized_inverse(&self, alpha: f64, r: &Self::Domain) -> Result<Self::Domain> {
        (**self).regularized_inverse(alpha, r)
    }

    fn adjoint_into(&self, y: &Self::Range, out: &mut Self::Domain) -> Result<()> {
        (**self).adjoint_into(y, out)
    }

    fn adjoint_axpy_into(
        &self,
        a: f64,
        y: &Self::Range,
        base: &Self::Domain,
        out: &mut Self::Domain,
    ) -> Result<()> {
        (**self).adjoint_axpy_into(a, y, base, out)
    }

    fn regularized_inverse_into(
        &self,
        alpha: f64,
        r: &Self::Domain,
        out: &mut Self::Domain,
    ) -> Result<()> {
        (**self).regularized_inverse_into(alpha, r, out)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

/// Wraps an operator and counts every call, for cost accounting.
#[derive(Debug, Default)]
pub struct Counted<Op> {
    inner: Op,
    applies: AtomicUsize,
    adjoints: AtomicUsize,
    inverses: AtomicUsize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CallCounts {
    pub applies: usize,
    pub adjoints: usize,
    pub inverses: usize,
}

impl<Op> Counted<Op> {
    pub fn new(inner: Op) -> Self {
        Self {
            inner,
            applies: AtomicUsize::new(0),
            adjoints: AtomicUsize::new(0),
            inverses: AtomicUsize::new(0),
        }
    }

    pub fn counts(&self) -> CallCounts {
        CallCounts {
            applies: self.applies.load(Ordering::Relaxed),
            adjoints: self.adjoints.load(Ordering::Relaxed),
            inverses: self.inverses.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.applies.store(0, Ordering::Relaxed);
        self.adjoints.store(0, Ordering::Relaxed);
        self.inverses.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &Op {
        &self.inner
    }
}

impl<Op: LinearOp> LinearOp for Counted<Op> {
    type Domain = Op::Domain;
    type Range = Op::Range;

    fn kind(&self) -> OpKind {
        self.inner.kind()
    }

    fn domain_zeros(&self) -> Self::Domain {
        self.inner.domain_zeros()
    }

    fn range_zeros(&self) -> Self::Range {
        self.inner.range_zeros()
    }

    fn apply(&self, x: &Self::Domain) -> Result<Self::Range> {
        self.applies.fetch_add(1, Ordering::Relaxed);
        self.inner.apply(x)
    }

    fn adjoint(&self, y: &Self::Range) -> Result<Self::Domain> {
        self.adjoints.fetch_add(1, Ordering::Relaxed);
        self.inner.adjoint(y)
    }

    fn regularized_inverse(&self, alpha: f64, r: &Self::Domain) -> Result<Self::Domain> {
        self.inverses.fetch_add(1, Ordering::Relaxed);
        self.inner.regularized_inverse(alpha, r)
    }

    fn adjoint_into(&self, y: &Self::Range, out: &mut Self::Domain) -> Result<()> {
        self.adjoints.fetch_add(1, Ordering::Relaxed);
        self.inner.adjoint_into(y, out)
    }

    fn adjoint_axpy_into(
        &self,
        a: f64,
        y: &Self::Range,
        base: &Self::Domain,
        out: &mut Self::Domain,
    ) -> Result<()> {
        self.adjoints.fetch_add(1, Ordering::Relaxed);
        self.inner.adjoint_axpy_into(a, y, base, out)
    }

    fn regularized_inverse_into(
        &self,
        alpha: f64,
        r: &Self::Domain,
        out: &mut Self::Domain,
    ) -> Result<()> {
        self.inverses.fetch_add(1, Ordering::Relaxed);
        self.inner.regularized_inverse_into(alpha, r, out)
    }
}
