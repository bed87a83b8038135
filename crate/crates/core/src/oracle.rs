//! Slow, independent reference implementations and the check suites that
//! compare them against the fast paths.
//!
//! Dense matrices here are assembled from first principles (kernel indices,
//! DFT exponentials, Kronecker products of the Haar filters), never by probing
//! the fast operators, so agreement is meaningful.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{
    frame_analysis, frame_synthesis, make_circulant, make_partial_fourier, CoeffStack,
    FrameComposite, Grid2D, LinearOp, OpKind, SamplingMask, Signal,
};
use crate::proximity::{project_ball, soft, tv_prox, tv_value, BallConstraint, Regularizer};
use crate::solver::{csalsa_solve, SolverConfig};

/// Periodic convolution matrix on a row-major `rows x cols` grid, kernel
/// center at `(kr / 2, kc / 2)`.
pub fn dense_circulant(kernel: &Grid2D, rows: usize, cols: usize) -> DMatrix<f64> {
    let (kr, kc) = kernel.dim();
    let (cr, cc) = (kr / 2, kc / 2);
    let n = rows * cols;
    let mut m = DMatrix::zeros(n, n);
    for r in 0..rows {
        for c in 0..cols {
            for i in 0..kr {
                for j in 0..kc {
                    let sr = (r + cr + rows * kr - i) % rows;
                    let sc = (c + cc + cols * kc - j) % cols;
                    m[(r * cols + c, sr * cols + sc)] += kernel.get(i, j);
                }
            }
        }
    }
    m
}

/// Partial DFT as a real `2m x n` matrix: for each selected frequency in
/// row-major order, one row for the real part then one for the imaginary part.
pub fn dense_partial_fourier(mask: &SamplingMask) -> DMatrix<f64> {
    let (rows, cols) = mask.dim();
    let n = rows * cols;
    let scale = 1.0 / (n as f64).sqrt();
    let selected: Vec<(usize, usize)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .filter(|&(r, c)| mask.is_selected(r, c))
        .collect();
    let mut m = DMatrix::zeros(2 * selected.len(), n);
    for (k, &(fr, fc)) in selected.iter().enumerate() {
        for pr in 0..rows {
            for pc in 0..cols {
                let phase =
                    -2.0 * PI * ((fr * pr) as f64 / rows as f64 + (fc * pc) as f64 / cols as f64);
                let z = Complex64::from_polar(scale, phase);
                m[(2 * k, pr * cols + pc)] = z.re;
                m[(2 * k + 1, pr * cols + pc)] = z.im;
            }
        }
    }
    m
}

// 1-D periodic pair filters `(x[i] ± x[i+s]) / 2`.
fn haar_1d(n: usize, shift: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut lo = DMatrix::zeros(n, n);
    let mut hi = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + shift) % n;
        lo[(i, i)] += 0.5;
        lo[(i, j)] += 0.5;
        hi[(i, i)] += 0.5;
        hi[(i, j)] -= 0.5;
    }
    (lo, hi)
}

/// Frame analysis `Wᴴ` as a dense `(3L+1)n x n` matrix, planes stacked in the
/// same order as [`CoeffStack`].
pub fn dense_haar_analysis(rows: usize, cols: usize, levels: usize) -> DMatrix<f64> {
    let n = rows * cols;
    let mut out = DMatrix::zeros((3 * levels + 1) * n, n);
    let mut approx = DMatrix::<f64>::identity(n, n);
    for level in 0..levels {
        let shift = 1 << level;
        let (lr, hr) = haar_1d(rows, shift);
        let (lc, hc) = haar_1d(cols, shift);
        // Row-major vec(A X Bᵀ) = (A ⊗ B) vec(X).
        let bands = [lr.kronecker(&hc), hr.kronecker(&lc), hr.kronecker(&hc)];
        for (band, op) in bands.iter().enumerate() {
            let plane = 3 * level + band;
            out.rows_mut(plane * n, n).copy_from(&(op * &approx));
        }
        approx = lr.kronecker(&lc) * approx;
    }
    out.rows_mut(3 * levels * n, n).copy_from(&approx);
    out
}

/// `A W` for blur `kernel` and a `levels`-level frame.
pub fn dense_frame_composite(
    kernel: &Grid2D,
    rows: usize,
    cols: usize,
    levels: usize,
) -> DMatrix<f64> {
    dense_circulant(kernel, rows, cols) * dense_haar_analysis(rows, cols, levels).transpose()
}

/// Solves `(α BᵀB + I) s = r` by LU factorization.
pub fn dense_regularized_inverse(b: &DMatrix<f64>, alpha: f64, r: &[f64]) -> Result<Vec<f64>> {
    let n = b.ncols();
    if r.len() != n {
        return Err(Error::invalid(format!(
            "expected {n} entries, got {}",
            r.len()
        )));
    }
    let lhs = b.transpose() * b * alpha + DMatrix::identity(n, n);
    lhs.lu()
        .solve(&DVector::from_column_slice(r))
        .map(|s| s.as_slice().to_vec())
        .ok_or(Error::NumericalFailure {
            quantity: "dense inverse",
            iteration: 0,
        })
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(f64::MIN_POSITIVE)
}

fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

fn randomize<S: Signal>(mut s: S, rng: &mut impl Rng) -> S {
    for v in s.values_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    s
}

/// `|⟨Bx, y⟩ − ⟨x, Bᴴy⟩| / (‖Bx‖‖y‖ + ‖x‖‖Bᴴy‖)`.
pub fn adjoint_mismatch<Op: LinearOp>(op: &Op, x: &Op::Domain, y: &Op::Range) -> Result<f64> {
    let bx = op.apply(x)?;
    let bty = op.adjoint(y)?;
    let scale = bx.norm() * y.norm() + x.norm() * bty.norm();
    Ok((bx.dot(y) - x.dot(&bty)).abs() / scale.max(f64::MIN_POSITIVE))
}

/// Scalar `argmin_x ½(x − y)² + τ|x|` by golden-section search.
pub fn scalar_prox_l1(y: f64, tau: f64) -> f64 {
    let f = |x: f64| 0.5 * (x - y).powi(2) + tau * x.abs();
    let (mut lo, mut hi) = (-y.abs() - 1.0, y.abs() + 1.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    // The minimizer sits at a kink when |y| ≤ τ; snap to it.
    if f(0.0) <= f(mid) {
        0.0
    } else {
        mid
    }
}

/// Solution of `min ‖x‖₁ s.t. ‖x − y‖₂ ≤ ε`: soft thresholding with the
/// threshold found by bisection on `‖soft(y, τ) − y‖ = ε`.
pub fn constrained_denoise_oracle(y: &[f64], eps: f64) -> Vec<f64> {
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= eps {
        return vec![0.0; y.len()];
    }
    let gap = |tau: f64| {
        y.iter()
            .map(|&v| (soft(v, tau) - v).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (mut lo, mut hi) = (0.0, y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    y.iter().map(|&v| soft(v, tau)).collect()
}

/// Negative control: the true adjoint with `delta·‖y‖` added to its first
/// entry. Adjoint checks must reject it.
#[derive(Debug)]
pub struct PerturbedAdjoint<Op> {
    pub inner: Op,
    pub delta: f64,
}

impl<Op: LinearOp> LinearOp for PerturbedAdjoint<Op> {
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
        self.inner.apply(x)
    }

    fn adjoint(&self, y: &Self::Range) -> Result<Self::Domain> {
        let mut out = self.inner.adjoint(y)?;
        let shift = self.delta * y.norm();
        if let Some(first) = out.values_mut().first_mut() {
            *first += shift;
        }
        Ok(out)
    }

    fn regularized_inverse(&self, alpha: f64, r: &Self::Domain) -> Result<Self::Domain> {
        self.inner.regularized_inverse(alpha, r)
    }
}

/// One line of a check suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    /// Worst observed error.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

impl std::fmt::Display for CheckRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

fn random_kernel(rng: &mut impl Rng, size: usize) -> Grid2D {
    let k = Grid2D::from_fn(size, size, |_| rng.random_range(0.0..1.0));
    let s = k.sum();
    k.map(|v| v / s)
}

fn random_mask(rng: &mut impl Rng, rows: usize, cols: usize) -> Result<SamplingMask> {
    let mut sel = ndarray::Array2::from_shape_fn((rows, cols), |_| rng.random_bool(0.3));
    sel[[0, 0]] = true;
    SamplingMask::new(sel)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

struct Worst {
    apply: f64,
    adjoint: f64,
    inverse: f64,
}

fn compare_dense<Op: LinearOp>(
    op: &Op,
    dense: &DMatrix<f64>,
    rng: &mut impl Rng,
    worst: &mut Worst,
) -> Result<()> {
    let x = randomize(op.domain_zeros(), rng);
    let y = randomize(op.range_zeros(), rng);
    let alpha = log_uniform(rng, 1e-3, 1e3);
    worst.apply = worst
        .apply
        .max(rel_err(op.apply(&x)?.values(), &mat_vec(dense, x.values())));
    worst.adjoint = worst.adjoint.max(rel_err(
        op.adjoint(&y)?.values(),
        &mat_vec(&dense.transpose(), y.values()),
    ));
    worst.inverse = worst.inverse.max(rel_err(
        op.regularized_inverse(alpha, &x)?.values(),
        &dense_regularized_inverse(dense, alpha, x.values())?,
    ));
    Ok(())
}

/// Fast paths vs dense matrices on 8x8 grids, `draws` random `(r, α)` each.
pub fn operator_oracle_suite(draws: usize, seed: u64, tol: f64) -> Result<Vec<CheckRow>> {
    const N: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut push = |family: &str, w: Worst| {
        rows.push(CheckRow::new(
            format!("{family} apply vs dense"),
            w.apply,
            tol,
        ));
        rows.push(CheckRow::new(
            format!("{family} adjoint vs dense"),
            w.adjoint,
            tol,
        ));
        rows.push(CheckRow::new(
            format!("{family} inverse vs dense"),
            w.inverse,
            tol,
        ));
    };

    let fresh = || Worst {
        apply: 0.0,
        adjoint: 0.0,
        inverse: 0.0,
    };

    let mut w = fresh();
    for i in 0..draws {
        let kernel = random_kernel(&mut rng, 1 + 2 * (i % 3));
        let op = make_circulant(&kernel, N, N)?;
        compare_dense(&op, &dense_circulant(&kernel, N, N), &mut rng, &mut w)?;
    }
    push("circulant", w);

    let mut w = fresh();
    for _ in 0..draws {
        let mask = random_mask(&mut rng, N, N)?;
        let dense = dense_partial_fourier(&mask);
        compare_dense(&make_partial_fourier(mask)?, &dense, &mut rng, &mut w)?;
    }
    push("partial fourier", w);

    let mut w = fresh();
    for i in 0..draws {
        let kernel = random_kernel(&mut rng, 3);
        let levels = 1 + i % 3;
        let op = FrameComposite::new(make_circulant(&kernel, N, N)?, levels)?;
        let dense = dense_frame_composite(&kernel, N, N, levels);
        compare_dense(&op, &dense, &mut rng, &mut w)?;
    }
    push("frame composite", w);

    Ok(rows)
}

/// Worst adjoint mismatch of `op` over `trials` random pairs.
pub fn adjoint_trials<Op: LinearOp>(op: &Op, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = randomize(op.domain_zeros(), &mut rng);
        let y = randomize(op.range_zeros(), &mut rng);
        worst = worst.max(adjoint_mismatch(op, &x, &y)?);
    }
    Ok(worst)
}

/// Adjoint identity for each operator family at `n x n`, plus frame round
/// trips for levels 1..=4 on 64x64 images.
pub fn adjoint_parseval_suite(n: usize, trials: usize, seed: u64) -> Result<Vec<CheckRow>> {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel = random_kernel(&mut rng, 5.min(n));
    let circ = make_circulant(&kernel, n, n)?;
    let pf = make_partial_fourier(random_mask(&mut rng, n, n)?)?;
    let levels = (n.trailing_zeros() as usize).clamp(1, 3);
    let comp = FrameComposite::new(circ.clone(), levels)?;
    let mut rows = vec![
        CheckRow::new(
            "circulant adjoint",
            adjoint_trials(&circ, trials, seed)?,
            TOL,
        ),
        CheckRow::new(
            "partial fourier adjoint",
            adjoint_trials(&pf, trials, seed + 1)?,
            TOL,
        ),
        CheckRow::new(
            "frame composite adjoint",
            adjoint_trials(&comp, trials, seed + 2)?,
            TOL,
        ),
    ];
    for levels in 1..=4 {
        let mut worst = 0.0f64;
        for _ in 0..trials.div_ceil(10) {
            let img = randomize(Grid2D::zeros(64, 64), &mut rng);
            let back = frame_synthesis(&frame_analysis(&img, levels)?)?;
            worst = worst.max(back.distance(&img) / img.norm());
        }
        rows.push(CheckRow::new(
            format!("frame round trip L={levels}"),
            worst,
            TOL,
        ));
    }
    Ok(rows)
}

/// Reference TV prox: a long, tightly converged run of the same iteration.
pub fn tv_prox_reference(v: &Grid2D, lambda: f64) -> Result<Grid2D> {
    tv_prox(v, lambda, 10_000, 0.0)
}

fn tv_objective(x: &Grid2D, v: &Grid2D, lambda: f64) -> f64 {
    0.5 * x.distance(v).powi(2) + lambda * tv_value(x)
}

/// Soft threshold vs scalar search, TV prox vs its reference, ball projection.
pub fn prox_suite(seed: u64, tv_iters: usize, tv_tol: f64) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut soft_worst = 0.0f64;
    for _ in 0..1000 {
        let y = rng.random_range(-5.0..5.0);
        let tau = rng.random_range(0.0..3.0);
        soft_worst = soft_worst.max((soft(y, tau) - scalar_prox_l1(y, tau)).abs());
    }

    let mut tv_worst = 0.0f64;
    for _ in 0..10 {
        let v = randomize(Grid2D::zeros(8, 8), &mut rng);
        let lambda = log_uniform(&mut rng, 0.01, 1.0);
        let reference = tv_objective(&tv_prox_reference(&v, lambda)?, &v, lambda);
        let fast = tv_objective(&tv_prox(&v, lambda, tv_iters, tv_tol)?, &v, lambda);
        tv_worst = tv_worst.max((fast - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
    }

    let mut idem = 0.0f64;
    let mut overshoot = 0.0f64;
    for _ in 0..200 {
        let v = randomize(Grid2D::zeros(4, 4), &mut rng).map(|x| x * 10.0);
        let eps = rng.random_range(0.0..5.0);
        let ball = BallConstraint::new(eps)?;
        let p = project_ball(&v, &ball);
        let pp = project_ball(&p, &ball);
        idem = idem.max(pp.distance(&p));
        overshoot = overshoot.max(p.norm() - eps * (1.0 + 1e-12));
    }

    Ok(vec![
        CheckRow::new("soft threshold vs scalar search", soft_worst, 1e-6),
        CheckRow::new("tv prox objective vs reference", tv_worst, 1e-4),
        CheckRow::new("projection idempotence", idem, 0.0),
        CheckRow::new("projection norm overshoot", overshoot.max(0.0), 0.0),
    ])
}

/// `B = I`, `φ = ℓ1` on length-`n` signals: solver vs the bisection oracle,
/// worst ℓ∞ error over `seeds` seeds.
pub fn denoising_suite(n: usize, seeds: u64, max_iters: usize) -> Result<Vec<CheckRow>> {
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = randomize(Grid2D::zeros(1, n), &mut rng).map(|v| 3.0 * v);
        let eps = rng.random_range(0.1..0.9) * y.norm();
        let op = crate::operators::Circulant::identity(1, n);
        let cfg = SolverConfig {
            change_rtol: 1e-12,
            ..SolverConfig::new(1.0, eps, max_iters)
        };
        let sol = csalsa_solve(&op, &y, &Regularizer::L1, &cfg, None, None)?;
        let want = constrained_denoise_oracle(y.values(), eps);
        let err = sol
            .x
            .values()
            .iter()
            .zip(&want)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err);
    }
    Ok(vec![CheckRow::new(
        format!("constrained denoising vs oracle (n={n}, {seeds} seeds)"),
        worst,
        1e-5,
    )])
}

/// A coefficient stack of random values, for frame-domain checks.
pub fn random_coeffs(levels: usize, rows: usize, cols: usize, seed: u64) -> CoeffStack {
    randomize(
        CoeffStack::zeros(levels, rows, cols),
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_analysis_is_parseval() {
        let w = dense_haar_analysis(8, 4, 2);
        let wtw = w.transpose() * &w;
        assert!((wtw - DMatrix::identity(32, 32)).amax() < 1e-14);
    }

    #[test]
    fn dense_partial_fourier_full_mask_is_isometry() {
        let f = dense_partial_fourier(&SamplingMask::full(4, 4));
        // Real rows of a full DFT: FᵀF = I on real inputs.
        let ftf = f.transpose() * &f;
        assert!((ftf - DMatrix::identity(16, 16)).amax() < 1e-12);
    }

    #[test]
    fn dense_circulant_of_shift_kernel() {
        // Kernel [0, 0, 1] centered at 1: (Bx)[c] = x[c - 1].
        let k = Grid2D::from_vec(1, 3, vec![0.0, 0.0, 1.0]).unwrap();
        let m = dense_circulant(&k, 1, 5);
        for c in 0..5 {
            assert_eq!(m[(c, (c + 4) % 5)], 1.0);
        }
        assert_eq!(m.sum(), 5.0);
    }

    #[test]
    fn scalar_prox_matches_closed_form() {
        for &(y, t) in &[(2.0, 0.5), (-1.0, 2.0), (0.3, 0.3), (-4.0, 1.5)] {
            assert!((scalar_prox_l1(y, t) - soft(y, t)).abs() < 1e-6);
        }
    }

    #[test]
    fn denoise_oracle_hits_the_boundary() {
        let y = [3.0, -1.0, 0.5, 2.0];
        let x = constrained_denoise_oracle(&y, 1.0);
        let d: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((d - 1.0).abs() < 1e-10);
        assert_eq!(constrained_denoise_oracle(&y, 10.0), vec![0.0; 4]);
    }

    #[test]
    fn perturbed_adjoint_is_caught() {
        let k = Grid2D::from_vec(1, 3, vec![0.25, 0.5, 0.25]).unwrap();
        let op = make_circulant(&k, 4, 4).unwrap();
        assert!(adjoint_trials(&op, 20, 1).unwrap() < 1e-12);
        let bad = PerturbedAdjoint {
            inner: op,
            delta: 1e-3,
        };
        assert!(adjoint_trials(&bad, 20, 1).unwrap() > 1e-6);
    }
}
