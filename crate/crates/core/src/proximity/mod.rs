//! Moreau proximity maps `Ψ_{τφ}(v) = argmin_x ½‖x − v‖² + τφ(x)` for the
//! supported regularizers, and the Euclidean ball projection that serves as the
//! proximity map of the constraint's indicator function.

mod tv;

use serde::{Deserialize, Serialize};

pub use tv::{tv_prox, tv_prox_warm, tv_value, TvDual, TvProxOutput, CHAMBOLLE_STEP};

use crate::error::{Error, Result};
use crate::operators::grid::{check_shape, Signal};

/// Inner iteration defaults for the TV prox.
pub const DEFAULT_TV_INNER_ITERS: usize = 20;
pub const DEFAULT_TV_INNER_TOL: f64 = 1e-4;

/// Relative slack below which a point counts as inside the ball. Makes the
/// projection exactly idempotent despite rounding in the rescaled norm.
const BALL_SLACK: f64 = 1e-13;

/// Scalar soft threshold `sign(y)·max(|y| − τ, 0)`.
#[inline]
pub fn soft(y: f64, tau: f64) -> f64 {
    let m = y.abs() - tau;
    if m > 0.0 {
        m.copysign(y)
    } else {
        0.0
    }
}

/// Component-wise soft threshold: the prox of `τ‖·‖₁`.
pub fn soft_threshold<S: Signal>(v: &S, tau: f64) -> Result<S> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold must be nonnegative, got {tau}"
        )));
    }
    let mut out = v.clone();
    if tau > 0.0 {
        for x in out.values_mut() {
            *x = soft(*x, tau);
        }
    }
    Ok(out)
}

/// Euclidean ball `{s : ‖s − center‖₂ ≤ radius}`; no center means the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct BallConstraint<S> {
    radius: f64,
    center: Option<S>,
}

impl<S: Signal> BallConstraint<S> {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!(
                "ball radius must be nonnegative, got {radius}"
            )));
        }
        Ok(Self {
            radius,
            center: None,
        })
    }

    pub fn with_center(radius: f64, center: S) -> Result<Self> {
        let mut ball = Self::new(radius)?;
        ball.center = Some(center);
        Ok(ball)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Option<&S> {
        self.center.as_ref()
    }

    pub fn contains(&self, v: &S) -> bool {
        self.offset_norm(v) <= self.radius
    }

    fn offset_norm(&self, v: &S) -> f64 {
        match &self.center {
            Some(c) => v.distance(c),
            None => v.norm(),
        }
    }
}

/// Orthogonal projection onto the ball.
pub fn project_ball<S: Signal>(v: &S, ball: &BallConstraint<S>) -> S {
    let dist = ball.offset_norm(v);
    if dist <= ball.radius * (1.0 + BALL_SLACK) {
        return v.clone();
    }
    let scale = ball.radius / dist;
    match &ball.center {
        None => {
            let mut out = v.clone();
            out.scale(scale);
            out
        }
        Some(c) => {
            let mut out = v.minus(c);
            out.scale(scale);
            out.axpy(1.0, c);
            out
        }
    }
}

/// A convex regularizer `φ` with a computable proximity map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regularizer {
    /// `‖x‖₁` over every entry of the unknown.
    L1,
    /// Isotropic total variation of an image.
    TvIso {
        inner_max_iters: usize,
        inner_tol: f64,
    },
}

impl Regularizer {
    pub fn tv() -> Self {
        Regularizer::TvIso {
            inner_max_iters: DEFAULT_TV_INNER_ITERS,
            inner_tol: DEFAULT_TV_INNER_TOL,
        }
    }

    pub fn value<S: Signal>(&self, x: &S) -> Result<f64> {
        match self {
            Regularizer::L1 => Ok(x.values().iter().map(|v| v.abs()).sum()),
            Regularizer::TvIso { .. } => Ok(tv_value(require_grid(x)?)),
        }
    }

    /// `Ψ_{τφ}(v)`; `τ = 0` returns `v` unchanged.
    pub fn prox<S: Signal>(&self, tau: f64, v: &S) -> Result<S> {
        self.prox_warm(tau, v, None)
    }

    /// As [`Regularizer::prox`], reusing `dual` as the starting point of the TV
    /// inner iteration when given. Ignored for `L1`.
    pub fn prox_warm<S: Signal>(&self, tau: f64, v: &S, dual: Option<&mut TvDual>) -> Result<S> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!(
                "prox weight must be nonnegative, got {tau}"
            )));
        }
        match *self {
            Regularizer::L1 => soft_threshold(v, tau),
            Regularizer::TvIso {
                inner_max_iters,
                inner_tol,
            } => {
                let img = require_grid(v)?;
                if tau == 0.0 {
                    return Ok(v.clone());
                }
                let (rows, cols) = img.dim();
                let mut scratch;
                let dual = match dual {
                    Some(d) => d,
                    None => {
                        scratch = TvDual::zeros(rows, cols);
                        &mut scratch
                    }
                };
                let x = tv_prox_warm(img, tau, inner_max_iters, inner_tol, dual)?.image;
                let mut out = v.clone();
                check_shape(&x, img, "TV prox output")?;
                *out.as_grid_mut().expect("checked grid above") = x;
                Ok(out)
            }
        }
    }

    /// [`Regularizer::prox_warm`] written over `out`.
    pub fn prox_warm_into<S: Signal>(
        &self,
        tau: f64,
        v: &S,
        dual: Option<&mut TvDual>,
        out: &mut S,
    ) -> Result<()> {
        match self {
            Regularizer::L1 if out.same_shape(v) && tau >= 0.0 && tau.is_finite() => {
                for (o, &x) in out.values_mut().iter_mut().zip(v.values()) {
                    *o = soft(x, tau);
                }
            }
            _ => *out = self.prox_warm(tau, v, dual)?,
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Regularizer::TvIso {
            inner_max_iters,
            inner_tol,
        } = self
        {
            if *inner_max_iters == 0 || !(*inner_tol > 0.0) {
                return Err(Error::invalid(
                    "TV inner iterations must be >= 1 and tolerance > 0",
                ));
            }
        }
        Ok(())
    }
}

fn require_grid<S: Signal>(x: &S) -> Result<&crate::operators::Grid2D> {
    x.as_grid().ok_or_else(|| {
        Error::invalid(format!(
            "TV regularizer needs an image, got {}",
            x.shape_desc()
        ))
    })
}
