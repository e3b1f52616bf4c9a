//! Structural checks on assembled matrices.

use serde::{Deserialize, Serialize};

use crate::sparse::{max_norm, CsrMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Worst violation found (0 when nothing was violated).
    pub max_violation: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, passed: bool, max_violation: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            max_violation,
            detail: detail.into(),
        }
    }

    /// Same report with the verdict flipped, for checks that are meant to fail.
    pub fn expect_failure(self, name: impl Into<String>) -> Self {
        let detail = format!("negative control: {} ({})", if self.passed { "unexpectedly passed" } else { "failed as expected" }, self.detail);
        Self {
            name: name.into(),
            passed: !self.passed,
            max_violation: self.max_violation,
            detail,
        }
    }
}

/// `max |A + Aᵀ| ≤ tol`.
pub fn check_skew(a: &CsrMatrix, tol: f64) -> CheckReport {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            worst = worst.max((v + a.get(j, i)).abs());
        }
    }
    CheckReport::new("skew", worst <= tol, worst, format!("max |A + A^T| = {worst:e}, tol {tol:e}"))
}

/// Stored entries of the periodic convection pattern in row `r` of an
/// `(n−1)² ` system: x-neighbours, y-neighbours and the two diagonal ones.
fn expected_columns(r: usize, m: usize) -> Vec<usize> {
    let (p, q) = (r % m, r / m);
    let at = |p: usize, q: usize| (q % m) * m + p % m;
    let mut cols = vec![
        at(p + m - 1, q),
        at(p + 1, q),
        at(p, q + 1),
        at(p + 1, q + 1),
        at(p, q + m - 1),
        at(p + m - 1, q + m - 1),
    ];
    cols.sort_unstable();
    cols.dedup();
    cols
}

/// Block tridiagonal with corner blocks: within block row `q` only block
/// columns `q−1, q, q+1` (mod `n−1`) are populated, each with `2(n−1)`
/// entries; the diagonal block is periodic tridiagonal without diagonal, the
/// upper block holds `(p, p)` and `(p, p+1)`, the lower one `(p, p)` and `(p, p−1)`.
pub fn check_pattern(a: &CsrMatrix, n: usize) -> CheckReport {
    let name = "pattern";
    if n < 2 {
        return CheckReport::new(name, false, f64::NAN, "mesh too small");
    }
    let m = n - 1;
    let dof = m * m;
    if a.nrows() != dof || a.ncols() != dof {
        return CheckReport::new(name, false, f64::NAN, format!("{}x{} matrix for n = {n}", a.nrows(), a.ncols()));
    }
    let mut wrong_rows = 0usize;
    let mut blocks = vec![0usize; m * m];
    for r in 0..dof {
        let (cols, _) = a.row(r);
        if cols != expected_columns(r, m).as_slice() {
            wrong_rows += 1;
        }
        for &c in cols {
            blocks[(r / m) * m + c / m] += 1;
        }
    }
    let mut bad_blocks = 0usize;
    for (b, &count) in blocks.iter().enumerate() {
        let (bq, bc) = (b / m, b % m);
        let near = bc == bq || bc == (bq + 1) % m || (bc + 1) % m == bq;
        let ok = if near { count == 2 * m } else { count == 0 };
        // for m ≤ 2 neighbouring blocks coincide
        if !ok && m >= 3 {
            bad_blocks += 1;
        }
    }
    let expected_nnz = if m >= 3 { 6 * dof } else { a.nnz() };
    let passed = wrong_rows == 0 && bad_blocks == 0 && a.nnz() == expected_nnz;
    CheckReport::new(
        name,
        passed,
        (wrong_rows + bad_blocks) as f64,
        format!("{} stored, {wrong_rows} rows off-pattern, {bad_blocks} blocks with wrong counts", a.nnz()),
    )
}

/// `|S(U)_ij| ≤ ‖U‖∞ / 3`.
pub fn check_bounds(s: &CsrMatrix, u: &[f64]) -> CheckReport {
    let bound = max_norm(u) / 3.0;
    let excess = s.values().iter().map(|v| v.abs() - bound).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    CheckReport::new(
        "entry_bound",
        excess <= 1e-14 * bound.max(f64::MIN_POSITIVE),
        excess,
        format!("max |S_ij| − ‖U‖∞/3 = {excess:e}"),
    )
}

/// Constant-k̂ `R`: row and column sums vanish and `|R_ij| ≤ (h/3)|k̂|`.
pub fn check_r_constant(r: &CsrMatrix, h: f64, k_hat: f64) -> CheckReport {
    let scale = h * k_hat.abs();
    let mut rows = vec![0.0; r.nrows()];
    let mut cols = vec![0.0; r.ncols()];
    let mut excess = 0.0f64;
    for i in 0..r.nrows() {
        let (cs, vs) = r.row(i);
        for (&j, &v) in cs.iter().zip(vs) {
            rows[i] += v;
            cols[j] += v;
            excess = excess.max(v.abs() - scale / 3.0);
        }
    }
    let sums = max_norm(&rows).max(max_norm(&cols));
    let passed = sums <= 1e-14 * scale.max(f64::MIN_POSITIVE) && excess <= 1e-14 * scale;
    CheckReport::new(
        "r_sums_and_bound",
        passed,
        sums.max(excess),
        format!("max row/column sum {sums:e}, max |R_ij| − h|k|/3 = {excess:e}"),
    )
}
