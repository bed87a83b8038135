//! Undecimated (à-trous) Haar frame with Parseval normalization.
//!
//! One split of a plane produces four planes of the same size using the 1-D
//! filters `(x[i] + x[i+s]) / 2` and `(x[i] - x[i+s]) / 2` (periodic, dilation
//! `s = 2^level`) along each axis. Each split `T` satisfies `TᵀT = I`, so with
//! analysis `Wᴴ = T_L ∘ … ∘ T_1` and synthesis `W = (Wᴴ)ᵀ` we get `W Wᴴ = I`.

use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use super::grid::{Grid2D, Signal};
use crate::error::{Error, Result};

/// Frame coefficients: `3L` detail planes (three per level, finest first)
/// followed by one approximation plane, all the size of the image.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffStack {
    levels: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CoeffStack {
    pub fn zeros(levels: usize, rows: usize, cols: usize) -> Self {
        Self {
            levels,
            rows,
            cols,
            data: vec![0.0; (3 * levels + 1) * rows * cols],
        }
    }

    pub fn from_planes(levels: usize, planes: Vec<Grid2D>) -> Result<Self> {
        if planes.len() != 3 * levels + 1 {
            return Err(Error::invalid(format!(
                "{levels}-level stack needs {} planes, got {}",
                3 * levels + 1,
                planes.len()
            )));
        }
        let (rows, cols) = planes[0].dim();
        if planes.iter().any(|p| p.dim() != (rows, cols)) {
            return Err(Error::invalid("coefficient planes differ in size"));
        }
        let mut data = Vec::with_capacity(planes.len() * rows * cols);
        for p in &planes {
            data.extend_from_slice(p.values());
        }
        Ok(Self {
            levels,
            rows,
            cols,
            data,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn plane_dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn plane_count(&self) -> usize {
        3 * self.levels + 1
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn plane(&self, i: usize) -> ArrayView2<'_, f64> {
        let n = self.rows * self.cols;
        ArrayView2::from_shape((self.rows, self.cols), &self.data[i * n..(i + 1) * n])
            .expect("plane slice matches its shape")
    }

    pub fn plane_mut(&mut self, i: usize) -> ArrayViewMut2<'_, f64> {
        let n = self.rows * self.cols;
        ArrayViewMut2::from_shape((self.rows, self.cols), &mut self.data[i * n..(i + 1) * n])
            .expect("plane slice matches its shape")
    }

    /// Detail plane `band` (0, 1, 2) of `level` (0 = finest).
    pub fn detail(&self, level: usize, band: usize) -> ArrayView2<'_, f64> {
        assert!(level < self.levels && band < 3);
        self.plane(3 * level + band)
    }

    pub fn approximation(&self) -> ArrayView2<'_, f64> {
        self.plane(3 * self.levels)
    }
}

impl Signal for CoeffStack {
    fn values(&self) -> &[f64] {
        &self.data
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.levels, self.rows, self.cols)
    }

    fn shape_desc(&self) -> String {
        format!(
            "{}-level coefficient stack of {}x{} planes",
            self.levels, self.rows, self.cols
        )
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.levels == other.levels && self.rows == other.rows && self.cols == other.cols
    }
}

/// Redundant Haar frame with `levels` decomposition levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HaarFrame {
    levels: usize,
}

impl HaarFrame {
    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::invalid("frame needs at least one level"));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Image sizes must be multiples of `2^levels`; nothing is padded.
    pub fn check_dims(&self, rows: usize, cols: usize) -> Result<()> {
        if self.levels >= 32 {
            return Err(Error::invalid(format!(
                "{} levels is too deep",
                self.levels
            )));
        }
        let block = 1usize << self.levels;
        if !rows.is_multiple_of(block) || !cols.is_multiple_of(block) {
            return Err(Error::invalid(format!(
                "image {rows}x{cols} is not divisible by 2^{} = {block}",
                self.levels
            )));
        }
        Ok(())
    }

    /// Analysis operator `Wᴴ`.
    pub fn analysis(&self, img: &Grid2D) -> Result<CoeffStack> {
        let (rows, cols) = img.dim();
        self.check_dims(rows, cols)?;
        let mut out = CoeffStack::zeros(self.levels, rows, cols);
        self.analysis_into(img, &mut out)?;
        Ok(out)
    }

    /// `Wᴴ img` written over `out`, which must already have the right shape.
    pub fn analysis_into(&self, img: &Grid2D, out: &mut CoeffStack) -> Result<()> {
        self.combine_into(img, None, out, |coef, _| coef)
    }

    /// `out[i] = f((Wᴴ img)[i], base[i])` in a single pass over the stack.
    pub fn analysis_with(
        &self,
        img: &Grid2D,
        base: &CoeffStack,
        out: &mut CoeffStack,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<()> {
        self.combine_into(img, Some(base), out, f)
    }

    fn combine_into(
        &self,
        img: &Grid2D,
        base: Option<&CoeffStack>,
        out: &mut CoeffStack,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<()> {
        let (rows, cols) = img.dim();
        self.check_dims(rows, cols)?;
        for stack in std::iter::once(&*out).chain(base) {
            if stack.levels != self.levels || stack.plane_dim() != (rows, cols) {
                return Err(Error::invalid(format!(
                    "analysis stack is a {}, expected {} levels of {rows}x{cols}",
                    stack.shape_desc(),
                    self.levels
                )));
            }
        }
        let n = rows * cols;
        let base_of = |range: std::ops::Range<usize>| base.map(|b| &b.data[range]);
        let mut approx = img.values().to_vec();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for level in 0..self.levels {
            let shift = 1 << level;
            split_rows(&approx, &mut lo, &mut hi, cols, shift);
            let start = 3 * level * n;
            let planes = &mut out.data[start..start + 3 * n];
            let (b0, rest) = planes.split_at_mut(n);
            let (b1, b2) = rest.split_at_mut(n);
            let b0_base = base_of(start..start + n);
            split_cols(&lo, &mut approx, b0, cols, shift, &f, None, b0_base);
            let (b1_base, b2_base) = (
                base_of(start + n..start + 2 * n),
                base_of(start + 2 * n..start + 3 * n),
            );
            split_cols(&hi, b1, b2, cols, shift, &f, b1_base, b2_base);
        }
        let start = 3 * self.levels * n;
        let last = &mut out.data[start..];
        match base_of(start..start + n) {
            Some(b) => {
                for ((o, &a), &b) in last.iter_mut().zip(&approx).zip(b) {
                    *o = f(a, b);
                }
            }
            None => last.copy_from_slice(&approx),
        }
        Ok(())
    }

    /// Synthesis operator `W`.
    pub fn synthesis(&self, coeffs: &CoeffStack) -> Result<Grid2D> {
        if coeffs.levels() != self.levels {
            return Err(Error::invalid(format!(
                "expected {}-level coefficients, got {}",
                self.levels,
                coeffs.levels()
            )));
        }
        let (rows, cols) = coeffs.plane_dim();
        self.check_dims(rows, cols)?;
        let n = rows * cols;
        let data = &coeffs.data;
        let mut approx = data[3 * self.levels * n..].to_vec();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for level in (0..self.levels).rev() {
            let shift = 1 << level;
            let band = |b: usize| &data[(3 * level + b) * n..(3 * level + b + 1) * n];
            merge_cols(&approx, band(0), &mut lo, cols, shift);
            merge_cols(band(1), band(2), &mut hi, cols, shift);
            merge_rows(&lo, &hi, &mut approx, cols, shift);
        }
        Ok(Grid2D::from_array_unchecked(
            Array2::from_shape_vec((rows, cols), approx).expect("buffer matches grid"),
        ))
    }
}

/// `Wᴴ img` with a fresh `levels`-level frame.
pub fn frame_analysis(img: &Grid2D, levels: usize) -> Result<CoeffStack> {
    HaarFrame::new(levels)?.analysis(img)
}

/// `W coeffs`.
pub fn frame_synthesis(coeffs: &CoeffStack) -> Result<Grid2D> {
    HaarFrame::new(coeffs.levels())?.synthesis(coeffs)
}

// Row-major planes of width `cols`. The split filters are the periodic pairs
// `(x[i] ± x[i+s]) / 2` along one axis; the merges are their transposes.

fn split_rows(x: &[f64], lo: &mut [f64], hi: &mut [f64], cols: usize, shift: usize) {
    let rows = x.len() / cols;
    for r in 0..rows {
        let rn = (r + shift) % rows;
        let here = &x[r * cols..(r + 1) * cols];
        let next = &x[rn * cols..(rn + 1) * cols];
        let lo = &mut lo[r * cols..(r + 1) * cols];
        let hi = &mut hi[r * cols..(r + 1) * cols];
        for c in 0..cols {
            lo[c] = 0.5 * (here[c] + next[c]);
            hi[c] = 0.5 * (here[c] - next[c]);
        }
    }
}

// With a base, each output row is then replaced by `f(coef, base)` while it
// is still in cache.
#[allow(clippy::too_many_arguments)]
fn split_cols<F: Fn(f64, f64) -> f64>(
    x: &[f64],
    lo: &mut [f64],
    hi: &mut [f64],
    cols: usize,
    shift: usize,
    f: &F,
    base_lo: Option<&[f64]>,
    base_hi: Option<&[f64]>,
) {
    let s = shift % cols;
    for (r, (row, (lo, hi))) in x
        .chunks_exact(cols)
        .zip(lo.chunks_exact_mut(cols).zip(hi.chunks_exact_mut(cols)))
        .enumerate()
    {
        for c in 0..cols {
            let nb = if c + s < cols {
                row[c + s]
            } else {
                row[c + s - cols]
            };
            lo[c] = 0.5 * (row[c] + nb);
            hi[c] = 0.5 * (row[c] - nb);
        }
        let span = r * cols..(r + 1) * cols;
        for (out, base) in [(lo, base_lo), (hi, base_hi)] {
            if let Some(b) = base {
                for (o, &b) in out.iter_mut().zip(&b[span.clone()]) {
                    *o = f(*o, b);
                }
            }
        }
    }
}

fn merge_rows(lo: &[f64], hi: &[f64], out: &mut [f64], cols: usize, shift: usize) {
    let rows = lo.len() / cols;
    for r in 0..rows {
        let rp = (r + rows - shift % rows) % rows;
        let (lo_r, hi_r) = (&lo[r * cols..(r + 1) * cols], &hi[r * cols..(r + 1) * cols]);
        let (lo_p, hi_p) = (
            &lo[rp * cols..(rp + 1) * cols],
            &hi[rp * cols..(rp + 1) * cols],
        );
        let out = &mut out[r * cols..(r + 1) * cols];
        for c in 0..cols {
            out[c] = 0.5 * (lo_r[c] + lo_p[c]) + 0.5 * (hi_r[c] - hi_p[c]);
        }
    }
}

fn merge_cols(lo: &[f64], hi: &[f64], out: &mut [f64], cols: usize, shift: usize) {
    let s = shift % cols;
    for ((lo, hi), out) in lo
        .chunks_exact(cols)
        .zip(hi.chunks_exact(cols))
        .zip(out.chunks_exact_mut(cols))
    {
        for c in 0..cols {
            let p = if c >= s { c - s } else { c + cols - s };
            out[c] = 0.5 * (lo[c] + lo[p]) + 0.5 * (hi[c] - hi[p]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(rows: usize, cols: usize, seed: u64) -> Grid2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Grid2D::from_fn(rows, cols, |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn constant_image_has_no_details() {
        let img = Grid2D::filled(16, 16, 0.3);
        let c = frame_analysis(&img, 3).unwrap();
        assert_eq!(c.plane_count(), 10);
        assert_eq!(c.len(), 10 * 256);
        for i in 0..9 {
            assert!(c.plane(i).iter().all(|&v| v == 0.0));
        }
        assert!(c.approximation().iter().all(|&v| (v - 0.3).abs() < 1e-15));
        let back = frame_synthesis(&c).unwrap();
        assert!(back.distance(&img) < 1e-14);
    }

    #[test]
    fn parseval_round_trip() {
        let img = random_grid(16, 16, 1);
        let c = frame_analysis(&img, 2).unwrap();
        let back = frame_synthesis(&c).unwrap();
        assert!(back.distance(&img) <= 1e-10 * img.norm());
        // Wᴴ preserves the norm because W Wᴴ = I.
        assert!((c.norm() - img.norm()).abs() <= 1e-10 * img.norm());
    }

    #[test]
    fn analysis_after_synthesis_is_contraction() {
        let frame = HaarFrame::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = CoeffStack::zeros(2, 8, 8);
        for v in c.values_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let proj = frame.analysis(&frame.synthesis(&c).unwrap()).unwrap();
        assert!(proj.norm() <= c.norm() * (1.0 + 1e-12));
        assert!(proj.norm() < c.norm());
    }

    #[test]
    fn synthesis_is_adjoint_of_analysis() {
        let frame = HaarFrame::new(3).unwrap();
        let img = random_grid(8, 16, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut c = CoeffStack::zeros(3, 8, 16);
        for v in c.values_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let lhs = frame.analysis(&img).unwrap().dot(&c);
        let rhs = img.dot(&frame.synthesis(&c).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn rejects_indivisible_sizes() {
        assert!(frame_analysis(&Grid2D::zeros(12, 16), 3).is_err());
        assert!(frame_analysis(&Grid2D::zeros(12, 16), 2).is_ok());
        assert!(HaarFrame::new(0).is_err());
        let c = CoeffStack::zeros(2, 8, 8);
        assert!(HaarFrame::new(3).unwrap().synthesis(&c).is_err());
    }

    #[test]
    fn buffered_analysis_matches() {
        let frame = HaarFrame::new(2).unwrap();
        let img = random_grid(8, 16, 4);
        let plain = frame.analysis(&img).unwrap();
        let mut out = CoeffStack::zeros(2, 8, 16);
        out.values_mut().fill(7.0);
        frame.analysis_into(&img, &mut out).unwrap();
        assert_eq!(out, plain);

        let base = frame.analysis(&random_grid(8, 16, 5)).unwrap();
        frame
            .analysis_with(&img, &base, &mut out, |c, b| 2.0 * c - b)
            .unwrap();
        for ((o, p), b) in out.values().iter().zip(plain.values()).zip(base.values()) {
            assert_eq!(*o, 2.0 * p - b);
        }
        let mut wrong = CoeffStack::zeros(3, 8, 16);
        assert!(frame.analysis_into(&img, &mut wrong).is_err());
        assert!(frame
            .analysis_with(&img, &wrong, &mut out, |c, _| c)
            .is_err());
    }
}
