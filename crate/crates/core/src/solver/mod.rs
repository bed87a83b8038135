//! C-SALSA: ADMM on the split `min φ(w) + ι_{‖v‖≤ε}(v)` s.t. `w = u`,
//! `v = B u − y`.
//!
//! Per pass: `u = (αBᴴB + I)⁻¹(αBᴴ(y + v + b) + w + c)` with `α = μ₁/μ₂`,
//! `v = P_ε(Bu − y − b)`, `w = Ψ_{φ/μ₂}(u − c)`, then the multiplier updates of
//! [`admm`]. The returned solution is `w`.

pub mod admm;
mod trace;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use admm::{admm_generic, AdmmBlocks, Control, IterationView, SolverState};
pub use trace::{SolverTrace, TraceRecord, TRACE_CSV_HEADER};

use crate::error::{Error, Result};
use crate::operators::{LinearOp, Signal};
use crate::proximity::{
    project_ball, BallConstraint, Regularizer, TvDual, DEFAULT_TV_INNER_ITERS, DEFAULT_TV_INNER_TOL,
};

pub const DEFAULT_FEAS_RTOL: f64 = 1e-3;
pub const DEFAULT_CHANGE_RTOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub mu1: f64,
    pub mu2: f64,
    /// Radius of the data-fit ball; `0` is basis pursuit.
    pub epsilon: f64,
    pub max_iters: usize,
    #[serde(default = "default_feas_rtol")]
    pub feas_rtol: f64,
    #[serde(default = "default_change_rtol")]
    pub change_rtol: f64,
    #[serde(default = "default_tv_iters")]
    pub tv_inner_iters: usize,
    #[serde(default = "default_tv_tol")]
    pub tv_inner_tol: f64,
    /// Start each TV prox from the previous pass's dual field.
    #[serde(default = "default_true")]
    pub tv_warm_start: bool,
}

fn default_feas_rtol() -> f64 {
    DEFAULT_FEAS_RTOL
}
fn default_change_rtol() -> f64 {
    DEFAULT_CHANGE_RTOL
}
fn default_tv_iters() -> usize {
    DEFAULT_TV_INNER_ITERS
}
fn default_tv_tol() -> f64 {
    DEFAULT_TV_INNER_TOL
}
fn default_true() -> bool {
    true
}

impl SolverConfig {
    pub fn new(mu: f64, epsilon: f64, max_iters: usize) -> Self {
        Self {
            mu1: mu,
            mu2: mu,
            epsilon,
            max_iters,
            feas_rtol: DEFAULT_FEAS_RTOL,
            change_rtol: DEFAULT_CHANGE_RTOL,
            tv_inner_iters: DEFAULT_TV_INNER_ITERS,
            tv_inner_tol: DEFAULT_TV_INNER_TOL,
            tv_warm_start: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {x}")))
            }
        };
        positive("mu1", self.mu1)?;
        positive("mu2", self.mu2)?;
        positive("feas_rtol", self.feas_rtol)?;
        positive("change_rtol", self.change_rtol)?;
        positive("tv_inner_tol", self.tv_inner_tol)?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.tv_inner_iters == 0 {
            return Err(Error::invalid("tv_inner_iters must be at least 1"));
        }
        Ok(())
    }

    /// The TV regularizer carrying this config's inner-iteration settings.
    pub fn tv_regularizer(&self) -> Regularizer {
        Regularizer::TvIso {
            inner_max_iters: self.tv_inner_iters,
            inner_tol: self.tv_inner_tol,
        }
    }

    /// `ε(1 + feas_rtol)`.
    pub fn feasibility_bound(&self) -> f64 {
        self.epsilon * (1.0 + self.feas_rtol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Feasible at tolerance and the iterate change fell below `change_rtol`.
    #[serde(rename = "converged")]
    Converged,
    /// Ran out of iterations with a feasible final iterate.
    #[serde(rename = "max-iters")]
    MaxIters,
    #[serde(rename = "max-iters, infeasible at tolerance")]
    MaxItersInfeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max-iters",
            Status::MaxItersInfeasible => "max-iters, infeasible at tolerance",
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, Status::MaxItersInfeasible)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-pass quality probe, e.g. MSE against a known image.
pub type Probe<'a, D> = &'a (dyn Fn(&D) -> f64 + Sync);

#[derive(Clone, Debug)]
pub struct Solution<D, R> {
    /// `w` of the final state.
    pub x: D,
    pub state: SolverState<D, R>,
    pub trace: SolverTrace,
    pub status: Status,
    /// `‖B x − y‖₂`.
    pub final_residual: f64,
}

impl<D, R> Solution<D, R> {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// `w₀ = Bᴴy`, `u₀ = w₀`, `v₀ = P_ε(B w₀ − y)`, `b₀ = c₀ = 0`.
pub fn default_init<Op: LinearOp>(
    op: &Op,
    y: &Op::Range,
    epsilon: f64,
) -> Result<SolverState<Op::Domain, Op::Range>> {
    let ball = BallConstraint::new(epsilon)?;
    let w = op.adjoint(y)?;
    let v = project_ball(&op.apply(&w)?.minus(y), &ball);
    Ok(SolverState {
        u: w.clone(),
        b: v.zeros_like(),
        c: w.zeros_like(),
        v,
        w,
        k: 0,
    })
}

/// The closed-form C-SALSA sub-solvers for an operator.
pub struct CsalsaBlocks<'a, Op: LinearOp> {
    op: &'a Op,
    y: &'a Op::Range,
    alpha: f64,
    prox_weight: f64,
    ball: BallConstraint<Op::Range>,
    reg: Regularizer,
    tv_dual: Option<TvDual>,
    // Right-hand side of the u step, reused across passes.
    rhs: Option<Op::Domain>,
}

impl<'a, Op: LinearOp> CsalsaBlocks<'a, Op> {
    pub fn new(op: &'a Op, y: &'a Op::Range, reg: Regularizer, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        reg.validate()?;
        let tv_dual = match (reg, cfg.tv_warm_start) {
            (Regularizer::TvIso { .. }, true) => {
                let zeros = op.domain_zeros();
                let grid = zeros.as_grid().ok_or_else(|| {
                    Error::invalid(format!(
                        "TV regularizer needs an image domain, operator has {}",
                        zeros.shape_desc()
                    ))
                })?;
                Some(TvDual::zeros(grid.rows(), grid.cols()))
            }
            _ => None,
        };
        Ok(Self {
            op,
            y,
            alpha: cfg.mu1 / cfg.mu2,
            prox_weight: 1.0 / cfg.mu2,
            ball: BallConstraint::new(cfg.epsilon)?,
            reg,
            tv_dual,
            rhs: None,
        })
    }
}

impl<Op: LinearOp> AdmmBlocks for CsalsaBlocks<'_, Op> {
    type Domain = Op::Domain;
    type Range = Op::Range;

    fn solve_u(
        &mut self,
        g_target: &Op::Range,
        u_target: &Op::Domain,
        u: &mut Op::Domain,
    ) -> Result<()> {
        // u'' = y + v + b, u' = w + c
        let rhs = self.rhs.get_or_insert_with(|| u_target.clone());
        self.op
            .adjoint_axpy_into(self.alpha, &self.y.plus(g_target), u_target, rhs)?;
        self.op.regularized_inverse_into(self.alpha, rhs, u)
    }

    fn map_g(&mut self, u: &Op::Domain) -> Result<Op::Range> {
        let mut g = self.op.apply(u)?;
        g.axpy(-1.0, self.y);
        Ok(g)
    }

    fn solve_v(&mut self, v_prime: &Op::Range) -> Result<Op::Range> {
        Ok(project_ball(v_prime, &self.ball))
    }

    fn solve_w(&mut self, w_prime: &Op::Domain, w: &mut Op::Domain) -> Result<()> {
        self.reg
            .prox_warm_into(self.prox_weight, w_prime, self.tv_dual.as_mut(), w)
    }
}

// Norms of u and w, ‖u − w‖, ‖w − w_prev‖ and ‖w‖₁ from one pass over the
// domain.
struct DomainStats {
    u_norm: f64,
    w_norm: f64,
    gap_uw: f64,
    w_change: f64,
    w_l1: f64,
}

impl DomainStats {
    fn of<S: Signal>(u: &S, w: &S, w_prev: &S) -> Self {
        let mut acc = [0.0f64; 4];
        let mut w_l1 = 0.0;
        for ((&u, &w), &p) in u.values().iter().zip(w.values()).zip(w_prev.values()) {
            acc[0] += u * u;
            acc[1] += w * w;
            acc[2] += (u - w) * (u - w);
            acc[3] += (w - p) * (w - p);
            w_l1 += w.abs();
        }
        let [u_norm, w_norm, gap_uw, w_change] = acc.map(f64::sqrt);
        Self {
            u_norm,
            w_norm,
            gap_uw,
            w_change,
            w_l1,
        }
    }
}

/// Solves `min φ(x)` subject to `‖B x − y‖₂ ≤ ε`.
///
/// Stops once `‖B w_k − y‖ ≤ ε(1 + feas_rtol)` and the iterates have settled:
/// `‖w_k − w_{k−1}‖ ≤ t‖w_k‖`, `‖v_k − v_{k−1}‖ ≤ t‖y‖`,
/// `‖B u_k − y − v_k‖ ≤ t‖y‖` and `‖u_k − w_k‖ ≤ t·max(‖u_k‖, ‖w_k‖)` with
/// `t = change_rtol`; otherwise after `max_iters` passes.
pub fn csalsa_solve<Op: LinearOp>(
    op: &Op,
    y: &Op::Range,
    reg: &Regularizer,
    cfg: &SolverConfig,
    init: Option<SolverState<Op::Domain, Op::Range>>,
    truth: Option<Probe<'_, Op::Domain>>,
) -> Result<Solution<Op::Domain, Op::Range>> {
    cfg.validate()?;
    let want = op.range_zeros();
    if !y.same_shape(&want) {
        return Err(Error::invalid(format!(
            "observation: expected {}, got {}",
            want.shape_desc(),
            y.shape_desc()
        )));
    }
    if want.values().is_empty() {
        return Err(Error::invalid("observation is empty"));
    }
    if !y.is_finite() {
        return Err(Error::invalid("observation has non-finite entries"));
    }
    let init = match init {
        Some(s) => {
            if !s.u.same_shape(&op.domain_zeros()) || !s.v.same_shape(&want) || !s.is_consistent() {
                return Err(Error::invalid(
                    "initial state does not match operator shapes",
                ));
            }
            s
        }
        None => default_init(op, y, cfg.epsilon)?,
    };

    let mut blocks = CsalsaBlocks::new(op, y, *reg, cfg)?;
    let bound = cfg.feasibility_bound();
    let y_norm = y.norm();
    let start = Instant::now();
    let mut trace = SolverTrace::default();
    let mut converged = false;
    let mut last_res_w = None;

    let state = admm_generic(&mut blocks, init, cfg.max_iters, |view| {
        let s = view.state;
        let res_w = op.apply(&s.w)?.minus(y).norm();
        let d = DomainStats::of(&s.u, &s.w, view.w_prev);
        let record = TraceRecord {
            iter: s.k,
            res_w,
            res_u: view.g_u.norm(),
            phi_w: match reg {
                Regularizer::L1 => d.w_l1,
                _ => reg.value(&s.w)?,
            },
            gap_uw: d.gap_uw,
            gap_v: view.g_u.distance(&s.v),
            mse: truth.map(|probe| probe(&s.w)),
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        let (gap_v, gap_uw) = (record.gap_v, record.gap_uw);
        trace.records.push(record);
        last_res_w = Some(res_w);
        // w can repeat for a pass while v or the multipliers still move, so
        // the splitting gaps and the change in v are checked as well.
        let tol = cfg.change_rtol;
        let settled = d.w_change <= tol * d.w_norm
            && s.v.distance(view.v_prev) <= tol * y_norm
            && gap_v <= tol * y_norm
            && gap_uw <= tol * d.w_norm.max(d.u_norm);
        if res_w <= bound && settled {
            converged = true;
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    })?;

    let final_residual = match last_res_w {
        Some(r) => r,
        None => op.apply(&state.w)?.minus(y).norm(),
    };
    let status = if converged {
        Status::Converged
    } else if final_residual <= bound {
        Status::MaxIters
    } else {
        Status::MaxItersInfeasible
    };
    Ok(Solution {
        x: state.w.clone(),
        state,
        trace,
        status,
        final_residual,
    })
}
