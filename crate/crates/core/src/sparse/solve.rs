use serde::{Deserialize, Serialize};

use super::{dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative residual target `‖Ax − b‖₂ ≤ tol ‖b‖₂`.
    pub tol: f64,
    /// Iteration cap; `None` means ten times the system size.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, max_iter: None }
    }

    fn cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual, recomputed from the returned solution.
    pub residual: f64,
}

fn check_square(a: &CsrMatrix, b: &[f64]) -> Result<()> {
    if a.nrows() != a.ncols() || b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "system matrix {}x{} with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side".into()));
    }
    Ok(())
}

fn jacobi(a: &CsrMatrix) -> Vec<f64> {
    a.diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect()
}

pub(crate) fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = a.spmv(x)?;
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let bn = norm2(b);
    Ok(if bn > 0.0 { r / bn } else { r })
}

/// Jacobi-preconditioned conjugate gradients.
pub fn cg(a: &CsrMatrix, b: &[f64], opts: &SolverOptions, x0: Option<&[f64]>) -> Result<(Vec<f64>, SolveStats)> {
    check_square(a, b)?;
    let n = b.len();
    let bn = norm2(b);
    if bn == 0.0 {
        return Ok((vec![0.0; n], SolveStats::default()));
    }
    let dinv = jacobi(a);
    let mut x = match x0 {
        Some(v) if v.len() == n => v.to_vec(),
        Some(_) => return Err(Error::DimensionMismatch("initial guess".into())),
        None => vec![0.0; n],
    };
    let ax = a.spmv(&x)?;
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(p, d)| p * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let target = opts.tol * bn;
    let cap = opts.cap(n);
    let mut it = 0;
    while norm2(&r) > target {
        if it >= cap {
            return Err(Error::NoConvergence {
                solver: "cg",
                iterations: it,
                residual: norm2(&r) / bn,
            });
        }
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::NoConvergence {
                solver: "cg",
                iterations: it,
                residual: norm2(&r) / bn,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
    }
    let residual = relative_residual(a, &x, b)?;
    Ok((x, SolveStats { iterations: it, residual }))
}

const MAX_RESTARTS: usize = 8;

/// Jacobi-preconditioned BiCGSTAB for nonsymmetric systems, restarted on breakdown.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    opts: &SolverOptions,
    x0: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    check_square(a, b)?;
    let n = b.len();
    let bn = norm2(b);
    if bn == 0.0 {
        return Ok((vec![0.0; n], SolveStats::default()));
    }
    let dinv = jacobi(a);
    let mut x = match x0 {
        Some(v) if v.len() == n => v.to_vec(),
        Some(_) => return Err(Error::DimensionMismatch("initial guess".into())),
        None => vec![0.0; n],
    };
    let ax = a.spmv(&x)?;
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let target = opts.tol * bn;
    let cap = opts.cap(n);
    let fail = |it: usize, r: &[f64]| Error::NoConvergence {
        solver: "bicgstab",
        iterations: it,
        residual: norm2(r) / bn,
    };
    let mut it = 0;
    let mut restarts = 0;
    while norm2(&r) > target {
        if it >= cap {
            return Err(fail(it, &r));
        }
        let mut rho_new = dot(&r_hat, &r);
        if !rho_new.is_finite() {
            return Err(fail(it, &r));
        }
        if rho_new.abs() <= f64::EPSILON * norm2(&r_hat) * norm2(&r) || omega == 0.0 {
            // breakdown: restart with the current residual as shadow vector
            if restarts == MAX_RESTARTS {
                return Err(fail(it, &r));
            }
            restarts += 1;
            r_hat.copy_from_slice(&r);
            rho_new = dot(&r, &r);
            (rho, alpha, omega) = (1.0, 1.0, 1.0);
            p.fill(0.0);
            v.fill(0.0);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            ph[i] = p[i] * dinv[i];
        }
        a.spmv_into(&ph, &mut v)?;
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return Err(fail(it, &r));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        it += 1;
        if norm2(&s) <= target {
            for i in 0..n {
                x[i] += alpha * ph[i];
            }
            r.copy_from_slice(&s);
            break;
        }
        for i in 0..n {
            sh[i] = s[i] * dinv[i];
        }
        a.spmv_into(&sh, &mut t)?;
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(fail(it, &s));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    let residual = relative_residual(a, &x, b)?;
    if residual > opts.tol * 10.0 {
        // recurrence drifted from the true residual
        return Err(Error::NoConvergence {
            solver: "bicgstab",
            iterations: it,
            residual,
        });
    }
    Ok((x, SolveStats { iterations: it, residual }))
}

/// LU factorization without pivoting in variable-band (skyline) storage.
///
/// Rows of `L` and columns of `U` are stored as contiguous slices covering the
/// envelope of the input pattern, which no-pivot elimination never leaves.
/// Intended for matrices whose symmetric part is positive definite.
#[derive(Debug, Clone)]
pub struct ProfileLu {
    n: usize,
    first_in_row: Vec<usize>,
    first_in_col: Vec<usize>,
    l_start: Vec<usize>,
    u_start: Vec<usize>,
    l: Vec<f64>,
    u: Vec<f64>,
    diag: Vec<f64>,
}

impl ProfileLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch("LU needs a square matrix".into()));
        }
        let mut first_in_row: Vec<usize> = (0..n).collect();
        let mut first_in_col: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let (cols, _) = a.row(i);
            for &j in cols {
                if j < i {
                    first_in_row[i] = first_in_row[i].min(j);
                } else if j > i {
                    first_in_col[j] = first_in_col[j].min(i);
                }
            }
        }
        let mut l_start = Vec::with_capacity(n + 1);
        let mut u_start = Vec::with_capacity(n + 1);
        l_start.push(0);
        u_start.push(0);
        for k in 0..n {
            l_start.push(l_start[k] + (k - first_in_row[k]));
            u_start.push(u_start[k] + (k - first_in_col[k]));
        }
        let mut l = vec![0.0; l_start[n]];
        let mut u = vec![0.0; u_start[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < i {
                    l[l_start[i] + j - first_in_row[i]] = v;
                } else if j > i {
                    u[u_start[j] + i - first_in_col[j]] = v;
                } else {
                    diag[i] = v;
                }
            }
        }
        let scale = a.max_abs();
        if !scale.is_finite() {
            return Err(Error::NonFinite("matrix to factor".into()));
        }

        for k in 0..n {
            let fr = first_in_row[k];
            let fc = first_in_col[k];
            // row k of L
            for j in fr..k {
                let lo = fr.max(first_in_col[j]);
                let lk = l_start[k];
                let uj = u_start[j];
                let s = dot(
                    &l[lk + lo - fr..lk + j - fr],
                    &u[uj + lo - first_in_col[j]..uj + j - first_in_col[j]],
                );
                let idx = lk + j - fr;
                l[idx] = (l[idx] - s) / diag[j];
            }
            // column k of U
            for j in fc..k {
                let fj = first_in_row[j];
                let lo = fj.max(fc);
                let lj = l_start[j];
                let uk = u_start[k];
                let s = dot(&l[lj + lo - fj..lj + j - fj], &u[uk + lo - fc..uk + j - fc]);
                u[uk + j - fc] -= s;
            }
            let lo = fr.max(fc);
            let s = dot(
                &l[l_start[k] + lo - fr..l_start[k] + k - fr],
                &u[u_start[k] + lo - fc..u_start[k] + k - fc],
            );
            diag[k] -= s;
            if diag[k].abs() <= f64::EPSILON * scale || !diag[k].is_finite() {
                return Err(Error::ZeroPivot(k));
            }
        }
        Ok(Self {
            n,
            first_in_row,
            first_in_col,
            l_start,
            u_start,
            l,
            u,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of both factors, diagonal included.
    pub fn stored(&self) -> usize {
        self.l.len() + self.u.len() + self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "LU of size {} applied to vector of length {}",
                self.n,
                x.len()
            )));
        }
        for k in 0..self.n {
            let fr = self.first_in_row[k];
            let row = &self.l[self.l_start[k]..self.l_start[k + 1]];
            let s = dot(row, &x[fr..k]);
            x[k] -= s;
        }
        for k in (0..self.n).rev() {
            x[k] /= self.diag[k];
            let xk = x[k];
            let fc = self.first_in_col[k];
            let col = &self.u[self.u_start[k]..self.u_start[k + 1]];
            for (xj, &ujk) in x[fc..k].iter_mut().zip(col) {
                *xj -= ujk * xk;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("LU solution".into()));
        }
        Ok(())
    }

    /// Solve with residual-driven iterative refinement against `a`.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
        check_square(a, b)?;
        let mut x = self.solve(b)?;
        let mut residual = relative_residual(a, &x, b)?;
        let mut it = 1;
        while residual > opts.tol && it < 4 {
            let ax = a.spmv(&x)?;
            let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            self.solve_in_place(&mut r)?;
            x.iter_mut().zip(&r).for_each(|(xi, di)| *xi += di);
            residual = relative_residual(a, &x, b)?;
            it += 1;
        }
        if residual > opts.tol {
            return Err(Error::NoConvergence {
                solver: "lu",
                iterations: it,
                residual,
            });
        }
        Ok((x, SolveStats { iterations: it, residual }))
    }
}

/// SPD solve by preconditioned conjugate gradients.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    cg(a, b, opts, None)
}

/// Nonsymmetric solve by a profile LU factorization with refinement.
pub fn solve_general(a: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveStats)> {
    check_square(a, b)?;
    ProfileLu::factor(a)?.solve_refined(a, b, opts)
}
