//! Isotropic discrete total variation and its proximity operator by
//! Chambolle's dual fixed-point iteration.
//!
//! Differences are forward with Neumann (replicate-edge) boundary, so the last
//! row/column contributes a zero difference. `div = -∇ᵀ`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::operators::grid::{Grid2D, Signal};

/// Chambolle step; `‖∇‖² ≤ 8` on the 2-D grid makes `1/8` convergent.
pub const CHAMBOLLE_STEP: f64 = 0.125;

/// Σ √(Δ_h² + Δ_v²) over all pixels.
pub fn tv_value(img: &Grid2D) -> f64 {
    let (rows, cols) = img.dim();
    let x = img.values();
    let mut total = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let dv = if r + 1 < rows {
                x[i + cols] - x[i]
            } else {
                0.0
            };
            let dh = if c + 1 < cols { x[i + 1] - x[i] } else { 0.0 };
            total += (dv * dv + dh * dh).sqrt();
        }
    }
    total
}

/// Dual field `p = (p_v, p_h)` of the TV prox. Carried between calls only when
/// the caller wants a warm start.
#[derive(Clone, Debug, PartialEq)]
pub struct TvDual {
    pv: Vec<f64>,
    ph: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl TvDual {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            pv: vec![0.0; rows * cols],
            ph: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    fn divergence(&self, out: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                let mut d = 0.0;
                if r + 1 < rows {
                    d += self.pv[i];
                }
                if r > 0 {
                    d -= self.pv[i - cols];
                }
                if c + 1 < cols {
                    d += self.ph[i];
                }
                if c > 0 {
                    d -= self.ph[i - 1];
                }
                out[i] = d;
            }
        }
    }
}

/// Outcome of one TV prox evaluation.
#[derive(Clone, Debug)]
pub struct TvProxOutput {
    pub image: Grid2D,
    pub iterations: usize,
    /// True when the objective post-check rejected the iterate and `v` was returned.
    pub fell_back: bool,
}

/// Approximate minimizer of `½‖x − v‖² + λ·TV(x)`.
pub fn tv_prox(v: &Grid2D, lambda: f64, max_iters: usize, tol: f64) -> Result<Grid2D> {
    let mut dual = TvDual::zeros(v.rows(), v.cols());
    Ok(tv_prox_warm(v, lambda, max_iters, tol, &mut dual)?.image)
}

/// [`tv_prox`] starting from, and updating, a caller-held dual field.
pub fn tv_prox_warm(
    v: &Grid2D,
    lambda: f64,
    max_iters: usize,
    tol: f64,
    dual: &mut TvDual,
) -> Result<TvProxOutput> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "TV prox weight must be positive, got {lambda}"
        )));
    }
    let (rows, cols) = v.dim();
    if dual.rows != rows || dual.cols != cols {
        *dual = TvDual::zeros(rows, cols);
    }
    let n = rows * cols;
    let vals = v.values();
    let inv_lambda = 1.0 / lambda;
    let tau = CHAMBOLLE_STEP;
    let mut div = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut iterations = 0;

    for _ in 0..max_iters {
        iterations += 1;
        dual.divergence(&mut div);
        for i in 0..n {
            g[i] = div[i] - vals[i] * inv_lambda;
        }
        let mut change: f64 = 0.0;
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                let gv = if r + 1 < rows {
                    g[i + cols] - g[i]
                } else {
                    0.0
                };
                let gh = if c + 1 < cols { g[i + 1] - g[i] } else { 0.0 };
                let denom = 1.0 + tau * (gv * gv + gh * gh).sqrt();
                let pv = (dual.pv[i] + tau * gv) / denom;
                let ph = (dual.ph[i] + tau * gh) / denom;
                change = change
                    .max((pv - dual.pv[i]).abs())
                    .max((ph - dual.ph[i]).abs());
                dual.pv[i] = pv;
                dual.ph[i] = ph;
            }
        }
        if change <= tol {
            break;
        }
    }

    dual.divergence(&mut div);
    let out: Vec<f64> = vals.iter().zip(&div).map(|(x, d)| x - lambda * d).collect();
    let image = Grid2D::from_array_unchecked(
        Array2::from_shape_vec((rows, cols), out).expect("shape preserved"),
    );

    let candidate = 0.5 * image.distance(v).powi(2) + lambda * tv_value(&image);
    let at_input = lambda * tv_value(v);
    if candidate > at_input {
        return Ok(TvProxOutput {
            image: v.clone(),
            iterations,
            fell_back: true,
        });
    }
    Ok(TvProxOutput {
        image,
        iterations,
        fell_back: false,
    })
}
