//! Design matrix storage with column-wise access.
//!
//! Every solver in this crate touches the data one feature (column) at a
//! time, so the matrix is stored either dense column-major or compressed
//! sparse column. Euclidean column norms are precomputed once at
//! construction and kept alongside.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::float::sqrt;

/// Column-major dense values or compressed sparse columns.
#[derive(Clone, Debug)]
pub enum MatrixStorage {
    /// `values[j * n + i]` is entry (i, j).
    Dense(Vec<f64>),
    /// Classic CSC: column j owns `row_idx[col_ptr[j]..col_ptr[j + 1]]`
    /// (strictly increasing, < n) and the matching `values` (no explicit
    /// zeros).
    Sparse {
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatrixError {
    /// Buffer lengths do not match the announced shape.
    ShapeMismatch(String),
    /// Sparse structure broken: non-monotone pointers, row index out of
    /// range or not strictly increasing within a column.
    InvalidStructure(String),
}

impl core::fmt::Display for MatrixError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MatrixError::ShapeMismatch(m) => write!(f, "shape mismatch: {m}"),
            MatrixError::InvalidStructure(m) => write!(f, "invalid sparse structure: {m}"),
        }
    }
}

impl core::error::Error for MatrixError {}

/// An n x p design matrix with cached column norms.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    storage: MatrixStorage,
    column_norms: Vec<f64>,
}

/// Borrowed view of one column.
#[derive(Clone, Copy)]
pub enum Col<'a> {
    Dense(&'a [f64]),
    Sparse { rows: &'a [usize], values: &'a [f64] },
}

impl DesignMatrix {
    /// Dense matrix from column-major values (`values.len() == n * p`).
    pub fn from_dense(n: usize, p: usize, values: Vec<f64>) -> Result<Self, MatrixError> {
        if values.len() != n * p {
            return Err(MatrixError::ShapeMismatch(alloc::format!(
                "expected {} values for {}x{}, got {}",
                n * p,
                n,
                p,
                values.len()
            )));
        }
        let mut m = DesignMatrix {
            n,
            p,
            storage: MatrixStorage::Dense(values),
            column_norms: vec![0.0; p],
        };
        m.recompute_norms();
        Ok(m)
    }

    /// CSC matrix. Explicit zeros are dropped; row indices must be strictly
    /// increasing within each column and smaller than `n`.
    pub fn from_sparse(
        n: usize,
        p: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, MatrixError> {
        if col_ptr.len() != p + 1 || *col_ptr.last().unwrap_or(&usize::MAX) != row_idx.len() {
            return Err(MatrixError::ShapeMismatch(alloc::format!(
                "col_ptr must have length p + 1 = {} and end at nnz = {}",
                p + 1,
                row_idx.len()
            )));
        }
        if row_idx.len() != values.len() {
            return Err(MatrixError::ShapeMismatch(String::from(
                "row_idx and values lengths differ",
            )));
        }
        let mut ptr = vec![0usize; p + 1];
        let mut rows = Vec::with_capacity(row_idx.len());
        let mut vals = Vec::with_capacity(values.len());
        for j in 0..p {
            let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
            if lo > hi {
                return Err(MatrixError::InvalidStructure(alloc::format!(
                    "col_ptr decreases at column {j}"
                )));
            }
            let mut prev: Option<usize> = None;
            for k in lo..hi {
                let i = row_idx[k];
                if i >= n {
                    return Err(MatrixError::InvalidStructure(alloc::format!(
                        "row index {i} out of range in column {j}"
                    )));
                }
                if prev.is_some_and(|pr| pr >= i) {
                    return Err(MatrixError::InvalidStructure(alloc::format!(
                        "row indices not strictly increasing in column {j}"
                    )));
                }
                prev = Some(i);
                if values[k] != 0.0 {
                    rows.push(i);
                    vals.push(values[k]);
                }
            }
            ptr[j + 1] = rows.len();
        }
        let mut m = DesignMatrix {
            n,
            p,
            storage: MatrixStorage::Sparse {
                col_ptr: ptr,
                row_idx: rows,
                values: vals,
            },
            column_norms: vec![0.0; p],
        };
        m.recompute_norms();
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, MatrixStorage::Sparse { .. })
    }

    pub fn storage(&self) -> &MatrixStorage {
        &self.storage
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    pub fn col(&self, j: usize) -> Col<'_> {
        match &self.storage {
            MatrixStorage::Dense(v) => Col::Dense(&v[j * self.n..(j + 1) * self.n]),
            MatrixStorage::Sparse {
                col_ptr,
                row_idx,
                values,
            } => Col::Sparse {
                rows: &row_idx[col_ptr[j]..col_ptr[j + 1]],
                values: &values[col_ptr[j]..col_ptr[j + 1]],
            },
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            MatrixStorage::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            MatrixStorage::Sparse { values, .. } => values.len(),
        }
    }

    fn recompute_norms(&mut self) {
        for j in 0..self.p {
            self.column_norms[j] = self.col(j).norm();
        }
    }

    /// New matrix keeping only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> DesignMatrix {
        match &self.storage {
            MatrixStorage::Dense(v) => {
                let mut out = Vec::with_capacity(self.n * keep.len());
                for &j in keep {
                    out.extend_from_slice(&v[j * self.n..(j + 1) * self.n]);
                }
                DesignMatrix {
                    n: self.n,
                    p: keep.len(),
                    column_norms: keep.iter().map(|&j| self.column_norms[j]).collect(),
                    storage: MatrixStorage::Dense(out),
                }
            }
            MatrixStorage::Sparse {
                col_ptr,
                row_idx,
                values,
            } => {
                let mut ptr = Vec::with_capacity(keep.len() + 1);
                let mut rows = Vec::new();
                let mut vals = Vec::new();
                ptr.push(0);
                for &j in keep {
                    rows.extend_from_slice(&row_idx[col_ptr[j]..col_ptr[j + 1]]);
                    vals.extend_from_slice(&values[col_ptr[j]..col_ptr[j + 1]]);
                    ptr.push(rows.len());
                }
                DesignMatrix {
                    n: self.n,
                    p: keep.len(),
                    column_norms: keep.iter().map(|&j| self.column_norms[j]).collect(),
                    storage: MatrixStorage::Sparse {
                        col_ptr: ptr,
                        row_idx: rows,
                        values: vals,
                    },
                }
            }
        }
    }

    /// Scales column j in place and refreshes its cached norm.
    pub(crate) fn scale_column(&mut self, j: usize, factor: f64) {
        match &mut self.storage {
            MatrixStorage::Dense(v) => {
                for x in &mut v[j * self.n..(j + 1) * self.n] {
                    *x *= factor;
                }
            }
            MatrixStorage::Sparse {
                col_ptr, values, ..
            } => {
                for x in &mut values[col_ptr[j]..col_ptr[j + 1]] {
                    *x *= factor;
                }
            }
        }
        self.column_norms[j] = self.col(j).norm();
    }

    /// X * beta for a length-p vector (skips zero coefficients).
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(beta.len(), self.p);
        let mut out = vec![0.0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                self.col(j).axpy(b, &mut out);
            }
        }
        out
    }

    /// X * B for a row-major p x q coefficient matrix; result is row-major
    /// n x q.
    pub fn mul_flat(&self, beta: &[f64], tasks: usize) -> Vec<f64> {
        debug_assert_eq!(beta.len(), self.p * tasks);
        let mut out = vec![0.0; self.n * tasks];
        for j in 0..self.p {
            let row = &beta[j * tasks..(j + 1) * tasks];
            if row.iter().any(|&x| x != 0.0) {
                self.col(j).block_axpy(row, &mut out, tasks);
            }
        }
        out
    }

    /// max_j |x_j^T v|, the dual infinity norm used for feasibility.
    pub fn max_abs_xt(&self, v: &[f64]) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.p {
            m = m.max(self.col(j).dot(v).abs());
        }
        m
    }

    /// max_j ||x_j^T M||_2 for a row-major n x q matrix, the multitask
    /// analogue of [`Self::max_abs_xt`].
    pub fn max_rownorm_xt(&self, m: &[f64], tasks: usize) -> f64 {
        let mut best = 0.0f64;
        let mut buf = vec![0.0; tasks];
        for j in 0..self.p {
            self.col(j).block_dot(m, tasks, &mut buf);
            let sq: f64 = buf.iter().map(|x| x * x).sum();
            best = best.max(sq);
        }
        sqrt(best)
    }
}

impl<'a> Col<'a> {
    pub fn nnz(&self) -> usize {
        match self {
            Col::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            Col::Sparse { values, .. } => values.len(),
        }
    }

    pub fn norm(&self) -> f64 {
        let sq: f64 = match self {
            Col::Dense(v) => v.iter().map(|x| x * x).sum(),
            Col::Sparse { values, .. } => values.iter().map(|x| x * x).sum(),
        };
        sqrt(sq)
    }

    /// x_j^T v.
    pub fn dot(&self, v: &[f64]) -> f64 {
        match self {
            Col::Dense(c) => c.iter().zip(v).map(|(x, y)| x * y).sum(),
            Col::Sparse { rows, values } => {
                rows.iter().zip(*values).map(|(&i, x)| x * v[i]).sum()
            }
        }
    }

    /// sum_i x_ij * f(i), for gradients evaluated entry-wise on the fly.
    pub fn dot_with(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        match self {
            Col::Dense(c) => c
                .iter()
                .enumerate()
                .map(|(i, x)| if *x != 0.0 { x * f(i) } else { 0.0 })
                .sum(),
            Col::Sparse { rows, values } => {
                rows.iter().zip(*values).map(|(&i, x)| x * f(i)).sum()
            }
        }
    }

    /// sum_i w_i * x_ij * v_i, the D-weighted inner product against v.
    pub fn weighted_dot(&self, w: &[f64], v: &[f64]) -> f64 {
        match self {
            Col::Dense(c) => c.iter().zip(w).zip(v).map(|((x, wi), vi)| x * wi * vi).sum(),
            Col::Sparse { rows, values } => rows
                .iter()
                .zip(*values)
                .map(|(&i, x)| x * w[i] * v[i])
                .sum(),
        }
    }

    /// sum_i w_i * x_ij^2, i.e. <x_j, x_j>_D.
    pub fn weighted_sq(&self, w: &[f64]) -> f64 {
        match self {
            Col::Dense(c) => c.iter().zip(w).map(|(x, wi)| x * x * wi).sum(),
            Col::Sparse { rows, values } => {
                rows.iter().zip(*values).map(|(&i, x)| x * x * w[i]).sum()
            }
        }
    }

    /// out += alpha * x_j.
    pub fn axpy(&self, alpha: f64, out: &mut [f64]) {
        match self {
            Col::Dense(c) => {
                for (o, x) in out.iter_mut().zip(*c) {
                    *o += alpha * x;
                }
            }
            Col::Sparse { rows, values } => {
                for (&i, x) in rows.iter().zip(*values) {
                    out[i] += alpha * x;
                }
            }
        }
    }

    /// buf[t] = sum_i x_ij * m[i * q + t] (x_j^T M for row-major M).
    pub fn block_dot(&self, m: &[f64], tasks: usize, buf: &mut [f64]) {
        buf.fill(0.0);
        match self {
            Col::Dense(c) => {
                for (i, x) in c.iter().enumerate() {
                    if *x != 0.0 {
                        let row = &m[i * tasks..(i + 1) * tasks];
                        for (b, r) in buf.iter_mut().zip(row) {
                            *b += x * r;
                        }
                    }
                }
            }
            Col::Sparse { rows, values } => {
                for (&i, x) in rows.iter().zip(*values) {
                    let row = &m[i * tasks..(i + 1) * tasks];
                    for (b, r) in buf.iter_mut().zip(row) {
                        *b += x * r;
                    }
                }
            }
        }
    }

    /// buf[t] = sum_i x_ij * (y[i * q + t] - m[i * q + t]), the block residual
    /// correlation used by multitask coordinate updates.
    pub fn block_dot_residual(&self, y: &[f64], m: &[f64], tasks: usize, buf: &mut [f64]) {
        buf.fill(0.0);
        match self {
            Col::Dense(c) => {
                for (i, x) in c.iter().enumerate() {
                    if *x != 0.0 {
                        let base = i * tasks;
                        for t in 0..tasks {
                            buf[t] += x * (y[base + t] - m[base + t]);
                        }
                    }
                }
            }
            Col::Sparse { rows, values } => {
                for (&i, x) in rows.iter().zip(*values) {
                    let base = i * tasks;
                    for t in 0..tasks {
                        buf[t] += x * (y[base + t] - m[base + t]);
                    }
                }
            }
        }
    }

    /// out[i * q + t] += x_ij * delta[t] (rank-one row update of M = X B).
    pub fn block_axpy(&self, delta: &[f64], out: &mut [f64], tasks: usize) {
        match self {
            Col::Dense(c) => {
                for (i, x) in c.iter().enumerate() {
                    if *x != 0.0 {
                        let row = &mut out[i * tasks..(i + 1) * tasks];
                        for (o, d) in row.iter_mut().zip(delta) {
                            *o += x * d;
                        }
                    }
                }
            }
            Col::Sparse { rows, values } => {
                for (&i, x) in rows.iter().zip(*values) {
                    let row = &mut out[i * tasks..(i + 1) * tasks];
                    for (o, d) in row.iter_mut().zip(delta) {
                        *o += x * d;
                    }
                }
            }
        }
    }
}
