use ndarray::Array2;

use crate::error::{Error, Result};

/// Binary selection of DFT cells: the rows of the identity kept by `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingMask {
    selected: Array2<bool>,
    // Row-major flat indices of selected cells; this fixes measurement order.
    indices: Vec<usize>,
}

impl SamplingMask {
    pub fn new(selected: Array2<bool>) -> Result<Self> {
        let (rows, cols) = selected.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("mask must be non-empty"));
        }
        let selected = selected.as_standard_layout().into_owned();
        let indices: Vec<usize> = selected
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect();
        if indices.is_empty() {
            return Err(Error::invalid("mask selects no cells"));
        }
        Ok(Self { selected, indices })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        f: impl FnMut((usize, usize)) -> bool,
    ) -> Result<Self> {
        Self::new(Array2::from_shape_fn((rows, cols), f))
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_| true).expect("full mask is non-empty")
    }

    pub fn rows(&self) -> usize {
        self.selected.nrows()
    }

    pub fn cols(&self) -> usize {
        self.selected.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.selected.dim()
    }

    /// Number of selected cells.
    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn is_selected(&self, row: usize, col: usize) -> bool {
        self.selected[[row, col]]
    }

    pub fn selected(&self) -> &Array2<bool> {
        &self.selected
    }

    /// Row-major flat indices of the selected cells, in measurement order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn sampling_ratio(&self) -> f64 {
        self.m() as f64 / self.selected.len() as f64
    }

    /// True when cell `k` is selected iff cell `-k (mod size)` is.
    pub fn is_conjugate_symmetric(&self) -> bool {
        let (rows, cols) = self.dim();
        self.selected
            .indexed_iter()
            .all(|((r, c), &s)| s == self.selected[[(rows - r) % rows, (cols - c) % cols]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_and_order() {
        let m = SamplingMask::from_fn(3, 4, |(r, c)| (r + c) % 2 == 0).unwrap();
        assert_eq!(m.m(), m.selected().iter().filter(|&&s| s).count());
        assert_eq!(m.indices(), &[0, 2, 5, 7, 8, 10]);
        assert!(SamplingMask::from_fn(2, 2, |_| false).is_err());
    }

    #[test]
    fn symmetry() {
        let dc_only = SamplingMask::from_fn(4, 4, |p| p == (0, 0)).unwrap();
        assert!(dc_only.is_conjugate_symmetric());
        let lopsided = SamplingMask::from_fn(4, 4, |p| p == (0, 1)).unwrap();
        assert!(!lopsided.is_conjugate_symmetric());
    }
}
