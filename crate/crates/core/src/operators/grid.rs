//! Real and complex 2-D arrays, plus the flat vector-space view the solver
//! works with.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Vector-space operations shared by every iterate the solver touches.
///
/// All arithmetic goes through the flat real view returned by [`Signal::values`].
/// Complex vectors expose their interleaved real/imaginary parts, so the inner
/// product is the real one, `Re⟨x, y⟩`.
pub trait Signal: Clone + Send + Sync + std::fmt::Debug {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];
    fn zeros_like(&self) -> Self;
    /// Human-readable shape, used in error messages.
    fn shape_desc(&self) -> String;
    fn same_shape(&self, other: &Self) -> bool;

    /// Real components per logical entry: 1 for real data, 2 for complex.
    fn components_per_entry(&self) -> usize {
        1
    }

    /// Image view, for regularizers that need spatial structure.
    fn as_grid(&self) -> Option<&Grid2D> {
        None
    }

    fn as_grid_mut(&mut self) -> Option<&mut Grid2D> {
        None
    }

    fn dot(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a * b)
            .sum()
    }

    fn norm_sq(&self) -> f64 {
        self.values().iter().map(|a| a * a).sum()
    }

    fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert!(self.same_shape(x));
        for (s, xi) in self.values_mut().iter_mut().zip(x.values()) {
            *s += a * xi;
        }
    }

    fn scale(&mut self, a: f64) {
        for s in self.values_mut() {
            *s *= a;
        }
    }

    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    fn distance(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

// Same as `check_shape` but only builds the expected signal on failure.
pub(crate) fn check_shape_by<S: Signal>(
    got: &S,
    matches: bool,
    want: impl FnOnce() -> S,
    what: &str,
) -> Result<()> {
    if matches {
        Ok(())
    } else {
        check_shape(got, &want(), what)
    }
}

pub(crate) fn check_shape<S: Signal>(got: &S, want: &S, what: &str) -> Result<()> {
    if got.same_shape(want) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what}: expected shape {}, got {}",
            want.shape_desc(),
            got.shape_desc()
        )))
    }
}

/// A real-valued image (or any real plane) in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    data: Array2<f64>,
}

impl Grid2D {
    /// Wraps an array, rejecting empty shapes and non-finite entries.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "grid must be non-empty, got {rows}x{cols}"
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("grid entry {pos} is not finite")));
        }
        Ok(Self::from_array_unchecked(data))
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        let data = Array2::from_shape_vec((rows, cols), values)
            .map_err(|e| Error::invalid(format!("grid shape {rows}x{cols}: {e}")))?;
        Self::new(data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_array_unchecked(Array2::zeros((rows, cols)))
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self::from_array_unchecked(Array2::from_elem((rows, cols), value))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut((usize, usize)) -> f64) -> Self {
        Self::from_array_unchecked(Array2::from_shape_fn((rows, cols), f))
    }

    pub(crate) fn from_array_unchecked(data: Array2<f64>) -> Self {
        // Standard layout is what makes `values()` a plain slice.
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Self { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn array_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[[row, col]]
    }

    pub fn sum(&self) -> f64 {
        self.data.sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn map(&self, f: impl FnMut(&f64) -> f64) -> Self {
        Self::from_array_unchecked(self.data.map(f))
    }

    pub fn to_spectrum(&self) -> Spectrum2D {
        Spectrum2D::from_array_unchecked(self.data.mapv(|v| Complex64::new(v, 0.0)))
    }
}

impl Signal for Grid2D {
    fn values(&self) -> &[f64] {
        self.data.as_slice().expect("grid kept in standard layout")
    }

    fn values_mut(&mut self) -> &mut [f64] {
        self.data
            .as_slice_mut()
            .expect("grid kept in standard layout")
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.rows(), self.cols())
    }

    fn shape_desc(&self) -> String {
        format!("image {}x{}", self.rows(), self.cols())
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.dim() == other.dim()
    }

    fn as_grid(&self) -> Option<&Grid2D> {
        Some(self)
    }

    fn as_grid_mut(&mut self) -> Option<&mut Grid2D> {
        Some(self)
    }
}

/// A complex-valued 2-D array: DFT spectra and transfer functions.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    data: Array2<Complex64>,
}

impl Spectrum2D {
    pub fn new(data: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "spectrum must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("spectrum has non-finite entries"));
        }
        Ok(Self::from_array_unchecked(data))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_array_unchecked(Array2::zeros((rows, cols)))
    }

    pub(crate) fn from_array_unchecked(data: Array2<Complex64>) -> Self {
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Self { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn array_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[[row, col]]
    }

    pub(crate) fn as_slice(&self) -> &[Complex64] {
        self.data
            .as_slice()
            .expect("spectrum kept in standard layout")
    }

    pub(crate) fn as_slice_mut(&mut self) -> &mut [Complex64] {
        self.data
            .as_slice_mut()
            .expect("spectrum kept in standard layout")
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real part as an image.
    pub fn re(&self) -> Grid2D {
        Grid2D::from_array_unchecked(self.data.mapv(|z| z.re))
    }

    /// Largest imaginary magnitude; what gets discarded by [`Spectrum2D::re`].
    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }
}

/// A vector of complex samples stored as interleaved `(re, im)` pairs, so it can
/// take part in real vector-space arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec {
    interleaved: Vec<f64>,
}

impl ComplexVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            interleaved: vec![0.0; 2 * len],
        }
    }

    pub fn from_complex(values: impl IntoIterator<Item = Complex64>) -> Self {
        let interleaved = values.into_iter().flat_map(|z| [z.re, z.im]).collect();
        Self { interleaved }
    }

    /// Number of complex entries.
    pub fn len(&self) -> usize {
        self.interleaved.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.interleaved.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.interleaved[2 * i], self.interleaved[2 * i + 1])
    }

    pub fn set(&mut self, i: usize, z: Complex64) {
        self.interleaved[2 * i] = z.re;
        self.interleaved[2 * i + 1] = z.im;
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.interleaved
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
    }
}

impl Signal for ComplexVec {
    fn values(&self) -> &[f64] {
        &self.interleaved
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.interleaved
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.len())
    }

    fn shape_desc(&self) -> String {
        format!("complex vector of length {}", self.len())
    }

    fn components_per_entry(&self) -> usize {
        2
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.len() == other.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(Grid2D::from_vec(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(Grid2D::from_vec(0, 2, vec![]).is_err());
        assert!(Grid2D::from_vec(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn complex_vec_uses_real_inner_product() {
        let a = ComplexVec::from_complex([Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.5)]);
        let b = ComplexVec::from_complex([Complex64::new(3.0, -1.0), Complex64::new(2.0, 4.0)]);
        let re_inner: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum();
        assert!((a.dot(&b) - re_inner).abs() < 1e-15);
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn vector_ops() {
        let mut a = Grid2D::filled(2, 3, 1.0);
        let b = Grid2D::filled(2, 3, 2.0);
        a.axpy(0.5, &b);
        assert!(a.values().iter().all(|&v| v == 2.0));
        assert_eq!(a.minus(&b).norm(), 0.0);
        assert!((b.norm() - (6.0f64 * 4.0).sqrt()).abs() < 1e-15);
    }
}
