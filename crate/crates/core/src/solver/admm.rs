//! Three-block ADMM for `min f₁(u) + f₂(G u)` split as `w = u`, `v = G u`.
//!
//! With scaled multipliers `b` (for `v = G u`) and `c` (for `w = u`), one pass is
//!
//! ```text
//! u ← argmin (μ₁/μ₂)‖G u − (v + b)‖² + ‖u − (w + c)‖²
//! v ← argmin f₂(v) + μ₁/2 ‖v − (G u − b)‖²
//! w ← argmin f₁(w) + μ₂/2 ‖w − (u − c)‖²
//! b ← b − (G u − v)
//! c ← c − (u − w)
//! ```
//!
//! `G` may be affine (C-SALSA folds the `−y` translation into it).

use crate::error::{Error, Result};
use crate::operators::grid::Signal;

/// The sub-minimizations of one ADMM pass.
pub trait AdmmBlocks {
    type Domain: Signal;
    type Range: Signal;

    /// `argmin_u (μ₁/μ₂)‖G u − g_target‖² + ‖u − u_target‖²`, written over `u`.
    fn solve_u(
        &mut self,
        g_target: &Self::Range,
        u_target: &Self::Domain,
        u: &mut Self::Domain,
    ) -> Result<()>;

    /// `G u`.
    fn map_g(&mut self, u: &Self::Domain) -> Result<Self::Range>;

    /// `argmin_v f₂(v) + μ₁/2 ‖v − v′‖²`.
    fn solve_v(&mut self, v_prime: &Self::Range) -> Result<Self::Range>;

    /// `argmin_w f₁(w) + μ₂/2 ‖w − w′‖²`, written over `w`.
    fn solve_w(&mut self, w_prime: &Self::Domain, w: &mut Self::Domain) -> Result<()>;
}

/// ADMM iterates: primal blocks `u`, `v`, `w`, scaled multipliers `b`, `c`, and
/// the number of completed passes `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState<D, R> {
    pub u: D,
    pub v: R,
    pub w: D,
    pub b: R,
    pub c: D,
    pub k: usize,
}

impl<D: Signal, R: Signal> SolverState<D, R> {
    pub fn is_consistent(&self) -> bool {
        self.u.same_shape(&self.w) && self.u.same_shape(&self.c) && self.v.same_shape(&self.b)
    }
}

/// What an observer sees after each pass.
pub struct IterationView<'a, D, R> {
    pub state: &'a SolverState<D, R>,
    /// `G u_k`, already computed by the pass.
    pub g_u: &'a R,
    pub w_prev: &'a D,
    pub v_prev: &'a R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Runs up to `max_iters` passes from `init`, calling `observe` after each.
/// Returns the final state; `state.k - init.k` passes were performed.
pub fn admm_generic<B, F>(
    blocks: &mut B,
    init: SolverState<B::Domain, B::Range>,
    max_iters: usize,
    mut observe: F,
) -> Result<SolverState<B::Domain, B::Range>>
where
    B: AdmmBlocks,
    F: FnMut(&IterationView<'_, B::Domain, B::Range>) -> Result<Control>,
{
    if !init.is_consistent() {
        return Err(Error::invalid("initial ADMM state has inconsistent shapes"));
    }
    let mut state = init;
    // Last pass's w_prev, recycled as the next w.
    let mut spare: Option<B::Domain> = None;
    for _ in 0..max_iters {
        let SolverState {
            mut u,
            v: v_prev,
            w: w_prev,
            b,
            c,
            k,
        } = state;
        // One domain buffer holds w + c, then u − c, then the new c.
        let mut t = c;
        t.axpy(1.0, &w_prev);
        blocks.solve_u(&v_prev.plus(&b), &t, &mut u)?;
        let g_u = blocks.map_g(&u)?;
        let v = blocks.solve_v(&g_u.minus(&b))?;
        // t ← u − c = w_prev − (t − u)
        let mut u_ok = true;
        for ((t, &u), &w) in t
            .values_mut()
            .iter_mut()
            .zip(u.values())
            .zip(w_prev.values())
        {
            *t = w - (*t - u);
            u_ok &= u.is_finite();
        }
        let mut w = spare.take().unwrap_or_else(|| w_prev.clone());
        blocks.solve_w(&t, &mut w)?;

        let mut b = b;
        b.axpy(-1.0, &g_u);
        b.axpy(1.0, &v);
        // t ← c − (u − w)
        let (mut w_ok, mut c_ok) = (true, true);
        for (t, &w) in t.values_mut().iter_mut().zip(w.values()) {
            *t = w - *t;
            w_ok &= w.is_finite();
            c_ok &= t.is_finite();
        }
        state = SolverState {
            u,
            v,
            w,
            b,
            c: t,
            k: k + 1,
        };

        let bad = if !u_ok {
            Some("u")
        } else if !state.v.is_finite() {
            Some("v")
        } else if !w_ok {
            Some("w")
        } else if !state.b.is_finite() {
            Some("b")
        } else if !c_ok {
            Some("c")
        } else {
            None
        };
        if let Some(quantity) = bad {
            return Err(Error::NumericalFailure {
                quantity,
                iteration: state.k,
            });
        }
        let view = IterationView {
            state: &state,
            g_u: &g_u,
            w_prev: &w_prev,
            v_prev: &v_prev,
        };
        if observe(&view)? == Control::Stop {
            break;
        }
        spare = Some(w_prev);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Grid2D;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    /// f₁ = 0, f₂ = ½‖·‖², G u = A u − y with a dense tall A.
    struct LeastSquares {
        a: DMatrix<f64>,
        y: DVector<f64>,
        mu1: f64,
        mu2: f64,
    }

    fn to_grid(v: &DVector<f64>) -> Grid2D {
        Grid2D::from_vec(1, v.len(), v.iter().copied().collect()).unwrap()
    }

    fn to_vec(g: &Grid2D) -> DVector<f64> {
        DVector::from_column_slice(g.values())
    }

    impl AdmmBlocks for LeastSquares {
        type Domain = Grid2D;
        type Range = Grid2D;

        fn solve_u(&mut self, g_target: &Grid2D, u_target: &Grid2D, u: &mut Grid2D) -> Result<()> {
            let alpha = self.mu1 / self.mu2;
            let n = self.a.ncols();
            let lhs = self.a.transpose() * &self.a * alpha + DMatrix::identity(n, n);
            let rhs = self.a.transpose() * (to_vec(g_target) + &self.y) * alpha + to_vec(u_target);
            *u = to_grid(&lhs.lu().solve(&rhs).unwrap());
            Ok(())
        }

        fn map_g(&mut self, u: &Grid2D) -> Result<Grid2D> {
            Ok(to_grid(&(&self.a * to_vec(u) - &self.y)))
        }

        fn solve_v(&mut self, v_prime: &Grid2D) -> Result<Grid2D> {
            let mut out = v_prime.clone();
            out.scale(self.mu1 / (1.0 + self.mu1));
            Ok(out)
        }

        fn solve_w(&mut self, w_prime: &Grid2D, w: &mut Grid2D) -> Result<()> {
            *w = w_prime.clone();
            Ok(())
        }
    }

    #[test]
    fn smooth_blocks_reach_least_squares_solution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let a = DMatrix::from_fn(12, 8, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
        let expected = (a.transpose() * &a)
            .lu()
            .solve(&(a.transpose() * &y))
            .unwrap();
        let mut blocks = LeastSquares {
            a,
            y,
            mu1: 1.0,
            mu2: 1.0,
        };
        let init = SolverState {
            u: Grid2D::zeros(1, 8),
            v: Grid2D::zeros(1, 12),
            w: Grid2D::zeros(1, 8),
            b: Grid2D::zeros(1, 12),
            c: Grid2D::zeros(1, 8),
            k: 0,
        };
        let state = admm_generic(&mut blocks, init, 2000, |_| Ok(Control::Continue)).unwrap();
        assert_eq!(state.k, 2000);
        assert!(state.u.distance(&to_grid(&expected)) < 1e-8 * expected.norm());
    }

    #[test]
    fn zero_iterations_return_init() {
        let mut blocks = LeastSquares {
            a: DMatrix::identity(2, 2),
            y: DVector::zeros(2),
            mu1: 1.0,
            mu2: 1.0,
        };
        let init = SolverState {
            u: Grid2D::filled(1, 2, 1.0),
            v: Grid2D::filled(1, 2, 2.0),
            w: Grid2D::filled(1, 2, 3.0),
            b: Grid2D::filled(1, 2, 4.0),
            c: Grid2D::filled(1, 2, 5.0),
            k: 0,
        };
        let out = admm_generic(&mut blocks, init.clone(), 0, |_| Ok(Control::Continue)).unwrap();
        assert_eq!(out, init);
    }
}
