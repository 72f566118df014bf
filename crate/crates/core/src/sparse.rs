//! Compressed sparse row storage for network weights and stiffness matrices.
//!
//! Constructed networks have layers several thousand neurons wide whose
//! weight matrices carry a handful of nonzeros per row, so weights are kept
//! in CSR form. Column indices are `u32` to halve index memory on large
//! networks.
//!
//! Zero handling: constructors that *compute* entries (`from_triplets`,
//! `matmul`, `linear_combination`) drop results that are exactly zero, so
//! structural zeros never occupy storage. `from_row_major` keeps every entry
//! whose bit pattern is not `+0.0` (so a stored `-0.0` survives a JSON round
//! trip). [`SparseMatrix::nnz`] counts entries that compare unequal to zero,
//! which is the weight count used by complexity accounting.

use crate::error::{mismatch, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        if s == 0.0 {
            return Self::zeros(n, n);
        }
        Self { rows: n, cols: n, indptr: (0..=n).collect(), indices: (0..n as u32).collect(), values: vec![s; n] }
    }

    /// Stacks `copies` identity blocks of size `n` vertically: the fan-out
    /// matrix `(Id; ...; Id)` that duplicates an input into several lanes.
    pub fn stacked_identity(n: usize, copies: usize) -> Self {
        let rows = n * copies;
        Self {
            rows,
            cols: n,
            indptr: (0..=rows).collect(),
            indices: (0..rows).map(|r| (r % n) as u32).collect(),
            values: vec![1.0; rows],
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(mismatch(format!("triplet ({r}, {c}) outside a {rows}x{cols} matrix")));
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut iter = triplets.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                indices.push(c as u32);
                values.push(v);
                indptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    /// Builds from a dense row-major slice, keeping every entry that is not
    /// bit-identical to `+0.0`.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(mismatch(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..rows {
            for (c, &v) in data[r * cols..(r + 1) * cols].iter().enumerate() {
                if v.to_bits() != 0 {
                    indices.push(c as u32);
                    values.push(v);
                }
            }
            indptr.push(values.len());
        }
        Ok(Self { rows, cols, indptr, indices, values })
    }

    pub fn from_dense(m: &nalgebra::DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..rows {
            for c in 0..cols {
                let v = m[(r, c)];
                if v != 0.0 {
                    indices.push(c as u32);
                    values.push(v);
                }
            }
            indptr.push(values.len());
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of entries that are not exactly zero.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, vals) = self.row(r);
        match idx.binary_search(&(c as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Largest number of stored entries in any row (1 for a selection matrix).
    pub fn max_row_nnz(&self) -> usize {
        (0..self.rows).map(|r| self.indptr[r + 1] - self.indptr[r]).max().unwrap_or(0)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `out = self * x + bias`, summing each row in ascending column order.
    pub fn affine_into(&self, x: &[f64], bias: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(bias.len(), self.rows);
        out.clear();
        out.reserve(self.rows);
        for (r, b) in bias.iter().enumerate() {
            let span = self.indptr[r]..self.indptr[r + 1];
            let mut acc = 0.0;
            for (c, v) in self.indices[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[*c as usize];
            }
            out.push(acc + b);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let zero = vec![0.0; self.rows];
        let mut out = Vec::new();
        self.affine_into(x, &zero, &mut out);
        out
    }

    /// Sparse product `self * rhs` (Gustavson's row-by-row algorithm).
    /// Entries that cancel to exactly zero are not stored.
    pub fn matmul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != rhs.rows {
            return Err(mismatch(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let mut acc = vec![0.0f64; rhs.cols];
        let mut mark = vec![usize::MAX; rhs.cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut indptr = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.rows {
            touched.clear();
            let (a_idx, a_val) = self.row(r);
            for (&k, &a) in a_idx.iter().zip(a_val) {
                let (b_idx, b_val) = rhs.row(k as usize);
                for (&c, &b) in b_idx.iter().zip(b_val) {
                    let c = c as usize;
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c as u32);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c as usize];
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(values.len());
        }
        Ok(SparseMatrix { rows: self.rows, cols: rhs.cols, indptr, indices, values })
    }

    /// `Σ cᵢ Mᵢ` over matrices of identical shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<SparseMatrix> {
        let Some((_, first)) = terms.first() else {
            return Err(mismatch("empty linear combination"));
        };
        let (rows, cols) = (first.rows, first.cols);
        if terms.iter().any(|(_, m)| m.rows != rows || m.cols != cols) {
            return Err(mismatch("linear combination of differently shaped matrices"));
        }
        let mut triplets = Vec::new();
        for &(c, m) in terms {
            for r in 0..rows {
                let (idx, vals) = m.row(r);
                triplets.extend(idx.iter().zip(vals).map(|(&j, &v)| (r, j as usize, c * v)));
            }
        }
        SparseMatrix::from_triplets(rows, cols, triplets)
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// Block-diagonal stacking.
    pub fn block_diag(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let total: usize = blocks.iter().map(|b| b.values.len()).sum();
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        indptr.push(0);
        let mut col_off = 0u32;
        for b in blocks {
            for r in 0..b.rows {
                let (idx, vals) = b.row(r);
                indices.extend(idx.iter().map(|c| c + col_off));
                values.extend_from_slice(vals);
                indptr.push(values.len());
            }
            col_off += b.cols as u32;
        }
        SparseMatrix { rows, cols, indptr, indices, values }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.values.len()];
        let mut values = vec![0.0; self.values.len()];
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                let slot = next[c as usize];
                indices[slot] = r as u32;
                values[slot] = v;
                next[c as usize] += 1;
            }
        }
        SparseMatrix { rows: self.cols, cols: self.rows, indptr, indices, values }
    }

    /// Dense row-major copy.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                out[r * self.cols + c as usize] = v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.to_row_major())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| {
                let (idx, vals) = self.row(r);
                idx.iter().zip(vals).all(|(&c, &v)| (v - self.get(c as usize, r)).abs() <= tol)
            })
    }
}
