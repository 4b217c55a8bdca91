//! Compressed sparse row matrix with exactly the operations the scorers
//! need: row access, matrix–vector and matrix–dense-block products.

use nalgebra::DMatrix;

/// Immutable CSR matrix over `f64`.
///
/// Column indices within each row are strictly ascending; explicit zeros are
/// permitted (they arise naturally when a score matrix contains a genuine
/// zero score).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists, each sorted by column
    /// with no duplicates.
    ///
    /// # Panics
    /// If a row is unsorted, holds duplicates, or indexes past `ncols`.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(u32, f64)>>) -> CsrMatrix {
        let nrows = rows.len();
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut data = Vec::with_capacity(nnz);
        indptr.push(0);
        for row in &rows {
            let mut prev: Option<u32> = None;
            for &(j, v) in row {
                assert!((j as usize) < ncols, "column {j} out of bounds ({ncols})");
                assert!(prev.is_none_or(|p| p < j), "row not strictly sorted");
                prev = Some(j);
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    /// Build from unordered triplets; duplicate positions are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> CsrMatrix {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in sorted {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of bounds");
            match rows[i].last_mut() {
                Some(last) if last.0 == j as u32 => last.1 += v,
                _ => rows[i].push((j as u32, v)),
            }
        }
        CsrMatrix::from_rows(ncols, rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.data[span])
    }

    /// Entry (i, j), zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, vals) = self.row(i);
        match idx.binary_search(&(j as u32)) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let (idx, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in idx.iter().zip(vals) {
                acc += v * x[j as usize];
            }
            y[i] = acc;
        }
        y
    }

    /// `y = Aᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let (idx, vals) = self.row(i);
            let xi = x[i];
            for (&j, &v) in idx.iter().zip(vals) {
                y[j as usize] += v * xi;
            }
        }
        y
    }

    /// `A B` for a dense block `B` (ncols × k).
    pub fn mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.ncols);
        let k = b.ncols();
        let mut out = DMatrix::zeros(self.nrows, k);
        for i in 0..self.nrows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                for c in 0..k {
                    out[(i, c)] += v * b[(j as usize, c)];
                }
            }
        }
        out
    }

    /// `Aᵀ B` for a dense block `B` (nrows × k).
    pub fn tr_mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.nrows);
        let k = b.ncols();
        let mut out = DMatrix::zeros(self.ncols, k);
        for i in 0..self.nrows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                for c in 0..k {
                    out[(j as usize, c)] += v * b[(i, c)];
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense copy, for oracles and small tests only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                out[(i, j as usize)] = v;
            }
        }
        out
    }
}
