//! Dense-arithmetic time steps built on the oracle matrices.

use nalgebra::{DMatrix, DVector};

use super::oracle::{oracle_assemble, OracleKind};
use crate::mesh::Mesh;
use crate::stepper::State;

pub struct DenseReference {
    mesh: Mesh,
    tau: f64,
    pub m: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    a.clone().lu().solve(b).expect("dense reference matrix is singular")
}

fn rel_change(new: &DVector<f64>, old: &DVector<f64>) -> f64 {
    let d = (new - old).norm();
    let s = new.norm();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

impl DenseReference {
    pub fn new(mesh: &Mesh, grad: &dyn Fn(f64, f64) -> (f64, f64), tau: f64) -> Self {
        let m = oracle_assemble(mesh, OracleKind::Mass);
        let k = &m + oracle_assemble(mesh, OracleKind::Stiffness);
        let r = oracle_assemble(mesh, OracleKind::Gradient(grad));
        Self {
            mesh: mesh.clone(),
            tau,
            m,
            k,
            r,
        }
    }

    pub fn s(&self, u: &[f64]) -> DMatrix<f64> {
        oracle_assemble(&self.mesh, OracleKind::Convection(u))
    }

    /// `W = M⁻¹ K U`.
    pub fn init(&self, u: &[f64]) -> State {
        let u = DVector::from_column_slice(u);
        let w = solve(&self.m, &(&self.k * &u));
        State {
            t: 0.0,
            u: u.as_slice().to_vec(),
            w: w.as_slice().to_vec(),
        }
    }

    pub fn semilinear_step(&self, st: &State) -> State {
        self.semilinear_step_with(st, &self.s(&st.u))
    }

    /// Semilinear step with a caller-supplied convection matrix.
    pub fn semilinear_step_with(&self, st: &State, s: &DMatrix<f64>) -> State {
        let u = DVector::from_column_slice(&st.u);
        let w = DVector::from_column_slice(&st.w);
        let lhs = &self.m + s * self.tau;
        let rhs = &self.m * &w + (&self.r * &u) * self.tau;
        let w1 = solve(&lhs, &rhs);
        let u1 = solve(&self.k, &(&self.m * &w1));
        State {
            t: st.t + self.tau,
            u: u1.as_slice().to_vec(),
            w: w1.as_slice().to_vec(),
        }
    }

    /// Fixed-point iteration on the dense operator `M − τ R K⁻¹ M`.
    /// Returns the new state and the per-iteration errors.
    pub fn fixedpoint_step(&self, st: &State, tol: f64, maxit: usize) -> (State, Vec<f64>) {
        let kinv_m = self.k.clone().lu().solve(&self.m).expect("K is singular");
        let b = &self.m - &self.r * &kinv_m * self.tau;
        let b_lu = b.lu();
        let z = &self.m * DVector::from_column_slice(&st.w);
        let mut y = DVector::from_column_slice(&st.w);
        let mut u = DVector::from_column_slice(&st.u);
        let mut errors = Vec::new();
        loop {
            let s = self.s(u.as_slice());
            let rhs = &z - (&s * &y) * self.tau;
            let y1 = b_lu.solve(&rhs).expect("fixed-point operator is singular");
            let u1 = &kinv_m * &y1;
            let err = rel_change(&y1, &y).max(rel_change(&u1, &u));
            errors.push(err);
            y = y1;
            u = u1;
            if err <= tol || errors.len() >= maxit {
                break;
            }
        }
        let u = solve(&self.k, &(&self.m * &y));
        (
            State {
                t: st.t + self.tau,
                u: u.as_slice().to_vec(),
                w: y.as_slice().to_vec(),
            },
            errors,
        )
    }

    /// `(‖U‖_M, ‖U‖_K, ‖W‖_M)`
    pub fn norms(&self, st: &State) -> (f64, f64, f64) {
        let u = DVector::from_column_slice(&st.u);
        let w = DVector::from_column_slice(&st.w);
        let q = |a: &DMatrix<f64>, v: &DVector<f64>| v.dot(&(a * v)).max(0.0).sqrt();
        (q(&self.m, &u), q(&self.k, &u), q(&self.m, &w))
    }

    /// `‖KU − MW‖₂ / ‖MW‖₂`
    pub fn elliptic_residual(&self, st: &State) -> f64 {
        let u = DVector::from_column_slice(&st.u);
        let w = DVector::from_column_slice(&st.w);
        let mw = &self.m * &w;
        (&self.k * &u - &mw).norm() / mw.norm().max(f64::MIN_POSITIVE)
    }
}
