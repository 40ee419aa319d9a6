use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed in
    /// input order, so the result only depends on the triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Sub-matrix with the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (new_r, &old_r) in rows.iter().enumerate() {
            let (c, v) = self.row(old_r);
            for (&cc, &vv) in c.iter().zip(v) {
                if col_map[cc] != usize::MAX {
                    t.push((new_r, col_map[cc], vv));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), t)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            t.extend(c.iter().zip(v).map(|(&cc, &vv)| (cc, i, vv)));
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry of `|self - other|`.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut m: f64 = 0.0;
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&cc, &vv) in c.iter().zip(v) {
                m = m.max((vv - other.get(i, cc)).abs());
            }
            let (c, v) = other.row(i);
            for (&cc, &vv) in c.iter().zip(v) {
                m = m.max((vv - self.get(i, cc)).abs());
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&cc, &vv) in c.iter().zip(v) {
                a[(i, cc)] = vv;
            }
        }
        a
    }

    fn is_structurally_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| {
                let (c, _) = self.row(i);
                c.iter().all(|&j| self.row(j).0.binary_search(&i).is_ok())
            })
    }
}

/// Square, structurally symmetric sparse matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym(CsrMatrix);

impl SparseSym {
    pub fn new(a: CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                a.nrows, a.ncols
            )));
        }
        if !a.values.iter().all(|v| v.is_finite()) {
            return Err(Error::SolverFailure("non-finite matrix entry".into()));
        }
        if !a.is_structurally_symmetric() {
            return Err(Error::DimensionMismatch("matrix pattern is not symmetric".into()));
        }
        Ok(Self(a))
    }

    pub fn from_triplets(n: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        Self::new(CsrMatrix::from_triplets(n, n, triplets))
    }

    pub fn identity(n: usize) -> Self {
        Self(CsrMatrix::identity(n))
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        Self::new(CsrMatrix::from_dense(a))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.0
    }

    /// `x^T A y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        (0..self.dim())
            .map(|i| {
                let (c, v) = self.0.row(i);
                x[i] * c.iter().zip(v).map(|(&cc, &vv)| vv * y[cc]).sum::<f64>()
            })
            .sum()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Principal sub-matrix on `idx`.
    pub fn principal(&self, idx: &[usize]) -> SparseSym {
        SparseSym(self.0.submatrix(idx, idx))
    }
}

impl Deref for SparseSym {
    type Target = CsrMatrix;

    fn deref(&self) -> &CsrMatrix {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
