use ndarray::Array2;

/// Compressed sparse row matrix of non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists; columns must be sorted and unique.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &rows {
            for &(j, v) in row {
                debug_assert!(j < n_cols);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            n_rows: rows.len(),
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(a: &Array2<f64>) -> Self {
        let rows = a
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self::from_rows(a.ncols(), rows)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                out[[i, j]] = v;
            }
        }
        out
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `self · b` for dense `b` (n_cols × k).
    pub fn dot_dense(&self, b: &Array2<f64>) -> Array2<f64> {
        let k = b.ncols();
        let mut out = Array2::zeros((self.n_rows, k));
        for i in 0..self.n_rows {
            let mut row = out.row_mut(i);
            for (j, v) in self.row(i) {
                row.scaled_add(v, &b.row(j));
            }
        }
        out
    }

    /// `selfᵀ · b` for dense `b` (n_rows × k).
    pub fn t_dot_dense(&self, b: &Array2<f64>) -> Array2<f64> {
        let k = b.ncols();
        let mut out = Array2::zeros((self.n_cols, k));
        for i in 0..self.n_rows {
            let brow = b.row(i);
            for (j, v) in self.row(i) {
                out.row_mut(j).scaled_add(v, &brow);
            }
        }
        out
    }

    /// `self · bᵀ` for dense `b` (k × n_cols).
    pub fn dot_dense_t(&self, b: &Array2<f64>) -> Array2<f64> {
        let k = b.nrows();
        let mut out = Array2::zeros((self.n_rows, k));
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                for t in 0..k {
                    out[[i, t]] += v * b[[t, j]];
                }
            }
        }
        out
    }
}
