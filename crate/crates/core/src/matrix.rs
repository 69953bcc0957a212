//! Dense row-major feature matrix used by the distance-based stages.

/// A dense `rows x cols` matrix of finite `f64` values, stored row-major.
///
/// This is the numeric view every distance computation works on; it is
/// produced from an encoded [`crate::tabular::Dataset`] and never mutated
/// afterwards, so it can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major data. Panics on ragged input; callers
    /// construct this from already-validated datasets.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for row in &rows {
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        FeatureMatrix {
            data,
            rows: n,
            cols,
        }
    }

    pub fn from_flat(data: Vec<f64>, rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        FeatureMatrix { data, rows, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copies the given rows into a new matrix, preserving order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            data,
            rows: indices.len(),
            cols: self.cols,
        }
    }

    /// Squared Euclidean distance between two rows.
    #[inline]
    pub fn sq_dist(&self, a: usize, b: usize) -> f64 {
        sq_euclidean(self.row(a), self.row(b))
    }

    /// Euclidean distance between two rows.
    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.sq_dist(a, b).sqrt()
    }
}

/// Squared Euclidean distance between two equal-length slices.
#[inline]
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Euclidean distance between two equal-length slices.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_euclidean(a, b).sqrt()
}
