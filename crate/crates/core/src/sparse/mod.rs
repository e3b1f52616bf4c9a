//! Compressed sparse row storage and the handful of kernels the solver needs.
//!
//! The pattern (`row_offsets`, `col_indices`) and the values are kept apart so
//! that a matrix whose pattern is fixed by the mesh can have its values
//! rewritten in place every time step.

mod market;
mod norms;
mod solve;

pub use market::{parse_matrix_market, read_matrix_market, to_matrix_market_string, write_matrix_market};
pub use norms::{k_norm, m_norm, max_norm, weighted_norm};
pub use solve::{bicgstab, cg, solve_general, solve_spd, ProfileLu, SolveStats, SolverOptions};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::PatternMismatch(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != col_indices.len() {
            return Err(Error::PatternMismatch("row_offsets do not span col_indices".into()));
        }
        if values.len() != col_indices.len() {
            return Err(Error::PatternMismatch(format!(
                "{} values for {} stored entries",
                values.len(),
                col_indices.len()
            )));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::PatternMismatch(format!("row_offsets decrease at row {i}")));
            }
            let row = &col_indices[lo..hi];
            if row.iter().any(|&c| c >= ncols) {
                return Err(Error::PatternMismatch(format!("column out of range in row {i}")));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::PatternMismatch(format!(
                    "columns of row {i} are not strictly increasing"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(Error::IndexOutOfRange {
                    what: "triplet",
                    index: i.max(j),
                    limit: nrows.max(ncols),
                });
            }
            rows[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            // stable sort keeps duplicate accumulation in input order
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_indices.len() > *row_offsets.last().unwrap() && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::new(nrows, ncols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets).expect("dense rows have equal length")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Storage slot of `(i, j)`, if it is part of the pattern.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_offsets[i];
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }

    /// Copy of the pattern with every value set to zero.
    pub fn zeroed(&self) -> Self {
        Self {
            values: vec![0.0; self.nnz()],
            ..self.clone()
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let k = next[j];
                col_indices[k] = i;
                values[k] = v;
                next[j] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Remove stored entries with `|value| <= tol`.
    pub fn drop_small(&self, tol: f64) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if v.abs() > tol {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(self.nrows, self.ncols, &triplets).expect("pattern already valid")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`. Each row is summed left to right, so results do not depend
    /// on how rows are distributed over threads.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmv of {}x{} matrix with x of length {} into y of length {}",
                self.nrows,
                self.ncols,
                x.len(),
                y.len()
            )));
        }
        let row_dot = |i: usize| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).fold(0.0, |acc, (&j, &v)| acc + v * x[j])
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if self.nnz() >= PAR_THRESHOLD {
                y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
                return Ok(());
            }
        }
        y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
        Ok(())
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let ay = self.spmv(y)?;
        if x.len() != ay.len() {
            return Err(Error::DimensionMismatch("bilinear form".into()));
        }
        Ok(dot(x, &ay))
    }

    /// `alpha A + beta B` on the union pattern.
    pub fn add_scaled(a: &CsrMatrix, b: &CsrMatrix, alpha: f64, beta: f64) -> Result<CsrMatrix> {
        let plan = SumPlan::new(a, b)?;
        let mut out = plan.pattern.clone();
        plan.combine(alpha, a, beta, b, &mut out)?;
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> Result<f64> {
        let d = CsrMatrix::add_scaled(self, other, 1.0, -1.0)?;
        Ok(d.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(feature = "parallel")]
pub(crate) const PAR_THRESHOLD: usize = 1 << 14;

/// Precomputed union pattern of two matrices, so that `alpha A + beta B` can be
/// re-evaluated without touching the pattern.
#[derive(Debug, Clone)]
pub struct SumPlan {
    pattern: CsrMatrix,
    a_pattern: (Vec<usize>, Vec<usize>),
    b_pattern: (Vec<usize>, Vec<usize>),
    a_slots: Vec<usize>,
    b_slots: Vec<usize>,
}

impl SumPlan {
    pub fn new(a: &CsrMatrix, b: &CsrMatrix) -> Result<Self> {
        if a.nrows != b.nrows || a.ncols != b.ncols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                a.nrows, a.ncols, b.nrows, b.ncols
            )));
        }
        let mut row_offsets = Vec::with_capacity(a.nrows + 1);
        let mut col_indices = Vec::with_capacity(a.nnz().max(b.nnz()));
        let mut a_slots = Vec::with_capacity(a.nnz());
        let mut b_slots = Vec::with_capacity(b.nnz());
        row_offsets.push(0);
        for i in 0..a.nrows {
            let (ca, _) = a.row(i);
            let (cb, _) = b.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let next = match (ca.get(p), cb.get(q)) {
                    (Some(&x), Some(&y)) => x.min(y),
                    (Some(&x), None) => x,
                    (None, Some(&y)) => y,
                    (None, None) => unreachable!(),
                };
                let slot = col_indices.len();
                col_indices.push(next);
                if ca.get(p) == Some(&next) {
                    a_slots.push(slot);
                    p += 1;
                }
                if cb.get(q) == Some(&next) {
                    b_slots.push(slot);
                    q += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        let nnz = col_indices.len();
        let pattern = CsrMatrix {
            nrows: a.nrows,
            ncols: a.ncols,
            row_offsets,
            col_indices,
            values: vec![0.0; nnz],
        };
        Ok(Self {
            pattern,
            a_pattern: (a.row_offsets.clone(), a.col_indices.clone()),
            b_pattern: (b.row_offsets.clone(), b.col_indices.clone()),
            a_slots,
            b_slots,
        })
    }

    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    /// Overwrite `out` (which must carry the union pattern) with `alpha A + beta B`.
    pub fn combine(
        &self,
        alpha: f64,
        a: &CsrMatrix,
        beta: f64,
        b: &CsrMatrix,
        out: &mut CsrMatrix,
    ) -> Result<()> {
        if a.row_offsets != self.a_pattern.0
            || a.col_indices != self.a_pattern.1
            || b.row_offsets != self.b_pattern.0
            || b.col_indices != self.b_pattern.1
        {
            return Err(Error::PatternMismatch("operand pattern changed since plan was built".into()));
        }
        if !out.same_pattern(&self.pattern) {
            return Err(Error::PatternMismatch("output does not carry the union pattern".into()));
        }
        out.values.iter_mut().for_each(|v| *v = 0.0);
        for (&s, &v) in self.a_slots.iter().zip(&a.values) {
            out.values[s] += alpha * v;
        }
        for (&s, &v) in self.b_slots.iter().zip(&b.values) {
            out.values[s] += beta * v;
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
