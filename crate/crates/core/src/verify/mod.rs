//! Independent oracles, structural checks and run monitors.
//!
//! Nothing here calls into the production assembler's local formulas: the
//! oracle integrates by quadrature on dense matrices and folds periodic nodes
//! by searching coordinates.

mod checks;
mod monitor;
mod oracle;
mod reference;

pub use checks::{check_bounds, check_pattern, check_r_constant, check_skew, CheckReport};
pub use monitor::{monitor, monitor_records, MonitorReport, ELLIPTIC_TOL, MONITOR_SLACK};
pub use oracle::{fold_by_search, oracle_assemble, OracleKind};
pub use reference::DenseReference;

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{Assembler, PFieldSpec};
use crate::error::Result;
use crate::harness::RunConfig;
use crate::mesh::Mesh;
use crate::problems::{preset, DensityProfile, Expr, InitialCondition};
use crate::sparse::{max_norm, CsrMatrix, SolverOptions};
use crate::stepper::{run, SchemeConfig, Scheme, State, StepRecord, Stepper};

/// `p = c₀x + c₁y + c₂x² + c₃xy + c₄y²`; linear gradients keep both the
/// production midpoint rule and the oracle's 7-point rule exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticP(pub [f64; 5]);

impl QuadraticP {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self(std::array::from_fn(|_| rng.gen_range(-5.0..5.0)))
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let c = self.0;
        (c[0] + 2.0 * c[2] * x + c[3] * y, c[1] + c[3] * x + 2.0 * c[4] * y)
    }
}

/// One randomized instance for the oracle comparison.
#[derive(Debug, Clone)]
pub struct OracleCase {
    pub mesh: Mesh,
    pub u: Vec<f64>,
    pub p: QuadraticP,
}

impl OracleCase {
    pub fn random(rng: &mut impl Rng, max_n: usize) -> Result<Self> {
        let n = rng.gen_range(3..=max_n.max(3));
        let mesh = Mesh::new(
            n,
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.5..5.0),
        )?;
        let u = (0..mesh.reduced_dof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Ok(Self {
            mesh,
            u,
            p: QuadraticP::random(rng),
        })
    }
}

/// Relative differences `max|P − O| / max|O|` for M, A, S(U), R, and the
/// number of oracle nonzeros missing from the production patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub mass: f64,
    pub stiffness: f64,
    pub convection: f64,
    pub gradient: f64,
    pub missing_entries: usize,
}

impl OracleComparison {
    pub fn worst(&self) -> f64 {
        self.mass.max(self.stiffness).max(self.convection).max(self.gradient)
    }
}

fn relative_diff(prod: &CsrMatrix, oracle: &DMatrix<f64>) -> (f64, usize) {
    let scale = oracle.amax();
    let mut diff = 0.0f64;
    let mut missing = 0;
    for i in 0..oracle.nrows() {
        for j in 0..oracle.ncols() {
            let o = oracle[(i, j)];
            diff = diff.max((prod.get(i, j) - o).abs());
            if o.abs() > 1e-12 * scale && prod.slot(i, j).is_none() {
                missing += 1;
            }
        }
    }
    (if scale > 0.0 { diff / scale } else { diff }, missing)
}

pub fn compare_with_oracle(case: &OracleCase) -> Result<OracleComparison> {
    let mesh = &case.mesh;
    let asm = Assembler::new(mesh)?;
    let p = case.p;
    let grad = move |x: f64, y: f64| p.gradient(x, y);
    let pairs = [
        (asm.mass(), oracle_assemble(mesh, OracleKind::Mass)),
        (asm.stiffness(), oracle_assemble(mesh, OracleKind::Stiffness)),
        (asm.s(&case.u)?, oracle_assemble(mesh, OracleKind::Convection(&case.u))),
        (asm.r(&PFieldSpec::Analytic(&grad)), oracle_assemble(mesh, OracleKind::Gradient(&grad))),
    ];
    let mut rel = [0.0; 4];
    let mut missing = 0;
    for (slot, (prod, orc)) in rel.iter_mut().zip(&pairs) {
        let (d, m) = relative_diff(prod, orc);
        *slot = d;
        missing += m;
    }
    Ok(OracleComparison {
        mass: rel[0],
        stiffness: rel[1],
        convection: rel[2],
        gradient: rel[3],
        missing_entries: missing,
    })
}

/// Semilinear trajectory at `k̂ = 0` whose convection matrix has the wrong
/// sign below the diagonal (so it is symmetric rather than skew). The energy
/// monitors must reject it.
pub fn wrong_sign_fixture(n: usize, steps: usize) -> Vec<StepRecord> {
    let mesh = Mesh::new(n, 0.0, 0.0, 1.0).expect("fixture mesh");
    let tau = 0.1;
    let refr = DenseReference::new(&mesh, &|_, _| (0.0, 0.0), tau);
    let tp = 2.0 * std::f64::consts::PI;
    let u0 = mesh.interpolate(|x, y| (tp * x).sin() * (tp * y).cos() + 0.5 * (tp * (x + y)).cos());
    let mut st = refr.init(&u0);
    let mut records = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        let (um, uk, wm) = refr.norms(&st);
        records.push(StepRecord {
            step,
            t: st.t,
            u_max: max_norm(&st.u),
            w_m_norm: wm,
            u_m_norm: um,
            u_k_norm: uk,
            fp_iterations: 0,
            fp_errors: Vec::new(),
            hyperbolic_iterations: 0,
            elliptic_residual: refr.elliptic_residual(&st),
            contraction_bound: 0.0,
            wall_seconds: 0.0,
        });
        if step == steps {
            break;
        }
        let mut s = refr.s(&st.u);
        for i in 0..s.nrows() {
            for j in 0..i {
                s[(i, j)] = -s[(i, j)];
            }
        }
        st = refr.semilinear_step_with(&st, &s);
    }
    records
}

/// Maximum of `max|a − b| / max|b|` over U and W.
pub fn state_difference(a: &State, b: &State) -> f64 {
    let rel = |x: &[f64], y: &[f64]| {
        let d = x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        d / max_norm(y).max(f64::MIN_POSITIVE)
    };
    rel(&a.u, &b.u).max(rel(&a.w, &b.w))
}

/// One production step of `scheme` from a random small `U₀` on `n = 5`,
/// compared with the dense reference. Returns `(initial, step)` differences.
pub fn dense_step_difference(scheme: Scheme, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let mesh = Mesh::new(5, 0.0, 0.0, 1.0)?;
    let k_hat = 12.0;
    let cfg = SchemeConfig {
        scheme,
        tau: 0.1,
        fp_tol: 1e-12,
        ..SchemeConfig::default()
    };
    let solver = SolverOptions::with_tol(1e-14);
    let mut stepper = Stepper::new(mesh.clone(), DensityProfile::Exponential { a: k_hat, b: 0.0 }, cfg, solver)?;
    let refr = DenseReference::new(&mesh, &|_, _| (k_hat, 0.0), cfg.tau);
    let u0: Vec<f64> = (0..mesh.reduced_dof()).map(|_| rng.gen_range(-1e-2..1e-2)).collect();
    let st = stepper.init_from_u(u0.clone())?;
    let dense0 = refr.init(&u0);
    let (next, _) = stepper.step(&st)?;
    let dense1 = match scheme {
        Scheme::Semilinear => refr.semilinear_step(&dense0),
        Scheme::FixedPoint => refr.fixedpoint_step(&dense0, cfg.fp_tol, cfg.fp_maxit).0,
    };
    Ok((state_difference(&st, &dense0), state_difference(&next, &dense1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Randomized oracle instances.
    pub cases: usize,
    /// Largest `n` used by the oracle comparison.
    pub max_n: usize,
    /// Random `U` per mesh size in the structural checks.
    pub samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            cases: 100,
            max_n: 9,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: SuiteOptions,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn worst(reports: &[CheckReport], name: &str) -> CheckReport {
    let failed = reports.iter().filter(|c| !c.passed).count();
    let max = reports.iter().map(|c| c.max_violation).fold(0.0, f64::max);
    let detail = match reports.iter().find(|c| !c.passed) {
        Some(c) => format!("{failed}/{} failed; first: {}", reports.len(), c.detail),
        None => format!("{} instances", reports.len()),
    };
    CheckReport::new(name, failed == 0, max, detail)
}

fn monitored(cfg: &RunConfig, prefix: &str, out: &mut Vec<CheckReport>) -> Result<()> {
    let stats = run(cfg)?.stats;
    for c in monitor(&stats).checks {
        out.push(CheckReport::new(format!("{prefix}.{}", c.name), c.passed, c.max_violation, c.detail));
    }
    Ok(())
}

/// Oracle equivalence, structural checks, negative controls, dense single
/// steps and monitors on two short runs.
pub fn run_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();

    let mut cmp = Vec::with_capacity(opts.cases);
    for _ in 0..opts.cases {
        let case = OracleCase::random(&mut rng, opts.max_n)?;
        let c = compare_with_oracle(&case)?;
        let w = c.worst();
        cmp.push(CheckReport::new(
            "oracle",
            w <= 1e-12 && c.missing_entries == 0,
            w,
            format!("n = {}: {c:?}", case.mesh.n()),
        ));
    }
    checks.push(worst(&cmp, "oracle_equivalence"));

    let (mut skew, mut pattern, mut bounds, mut rchecks) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for n in 4..=12 {
        let mesh = Mesh::new(n, 0.0, 0.0, rng.gen_range(0.5..5.0))?;
        let asm = Assembler::new(&mesh)?;
        for _ in 0..opts.samples {
            let amp = 10f64.powf(rng.gen_range(-6.0..2.0));
            let u: Vec<f64> = (0..asm.dof()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
            let s = asm.s(&u)?;
            skew.push(check_skew(&s, 1e-14 * max_norm(&u)));
            pattern.push(check_pattern(&s, n));
            bounds.push(check_bounds(&s, &u));
        }
        let k = rng.gen_range(-20.0..20.0);
        let r = asm.r(&PFieldSpec::Constant { k_hat: k });
        rchecks.push(check_skew(&r, 1e-14 * mesh.h() * k.abs()));
        rchecks.push(check_r_constant(&r, mesh.h(), k));
        pattern.push(check_pattern(&r, n));
    }
    checks.push(worst(&skew, "s_skew"));
    checks.push(worst(&pattern, "s_r_pattern"));
    checks.push(worst(&bounds, "s_entry_bound"));
    checks.push(worst(&rchecks, "r_constant"));

    let mesh = Mesh::new(5, 0.0, 0.0, 1.0)?;
    let m = Assembler::new(&mesh)?.mass();
    checks.push(check_skew(&m, 1e-14).expect_failure("mass_not_skew"));
    let fixture = wrong_sign_fixture(9, 20);
    let rep = monitor_records(&fixture, 0.1, 0.0);
    let growth = rep.check("a_priori_growth").cloned().expect("growth check");
    checks.push(growth.expect_failure("wrong_sign_rejected"));

    for scheme in [Scheme::Semilinear, Scheme::FixedPoint] {
        let mut diffs = Vec::new();
        for _ in 0..5 {
            let (d0, d1) = dense_step_difference(scheme, &mut rng)?;
            diffs.push(CheckReport::new("dense", d0.max(d1) <= 1e-10, d0.max(d1), format!("init {d0:e}, step {d1:e}")));
        }
        checks.push(worst(&diffs, &format!("dense_step_{scheme}")));
    }

    let mut k0 = preset("case2")?;
    k0.mesh.n = 17;
    k0.mesh.length = 2.0 * std::f64::consts::PI;
    k0.problem.initial = InitialCondition::Expression(Expr::parse("0.1*sin(x)*cos(2*y) + 0.05*cos(x+y)")?);
    k0.problem.density = DensityProfile::Exponential { a: 0.0, b: 0.0 };
    k0.run.t_end = 5.0;
    k0.run.u_max = 1e9;
    monitored(&k0, "monitor_k0", &mut checks)?;

    let mut short = preset("case2")?;
    short.mesh.n = 17;
    short.run.t_end = 2.0;
    monitored(&short, "monitor_case2_short", &mut checks)?;

    Ok(VerifyReport {
        options: *opts,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let case = OracleCase::random(&mut rng, 7).unwrap();
            let c = compare_with_oracle(&case).unwrap();
            assert!(c.worst() <= 1e-12, "{c:?}");
            assert_eq!(c.missing_entries, 0);
        }
    }

    #[test]
    fn wrong_sign_trajectory_grows() {
        let recs = wrong_sign_fixture(9, 20);
        let rep = monitor_records(&recs, 0.1, 0.0);
        assert!(!rep.check("a_priori_growth").unwrap().passed, "{rep:?}");
    }

    #[test]
    fn dense_reference_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for scheme in [Scheme::Semilinear, Scheme::FixedPoint] {
            let (d0, d1) = dense_step_difference(scheme, &mut rng).unwrap();
            assert!(d0 < 1e-10 && d1 < 1e-10, "{scheme}: {d0:e} {d1:e}");
        }
    }

    #[test]
    fn small_suite_passes() {
        let rep = run_suite(&SuiteOptions {
            cases: 5,
            samples: 2,
            ..SuiteOptions::default()
        })
        .unwrap();
        let failed: Vec<_> = rep.failures().collect();
        assert!(rep.passed, "{failed:#?}");
        let json = rep.to_json().unwrap();
        let back: VerifyReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.checks.len(), rep.checks.len());
    }
}
