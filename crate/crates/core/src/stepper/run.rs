use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{coercivity_bound, State, StepInfo, Stepper, StabilityMode};
use crate::error::{Error, Result};
use crate::harness::RunConfig;
use crate::mesh::Mesh;
use crate::sparse::{k_norm, m_norm, max_norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TimeLimit,
    UMaxReached,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub u_max: f64,
    pub w_m_norm: f64,
    pub u_m_norm: f64,
    pub u_k_norm: f64,
    pub fp_iterations: usize,
    /// Relative-change errors of the fixed-point iterates (empty for the semilinear scheme).
    pub fp_errors: Vec<f64>,
    pub hyperbolic_iterations: usize,
    pub elliptic_residual: f64,
    /// Contraction threshold for the step leaving this state.
    pub contraction_bound: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub tau: f64,
    pub k_hat_sup: f64,
    pub coercivity_bound: f64,
    pub within_coercivity_bound: bool,
    pub contraction_safety: f64,
    pub initial_contraction_bound: f64,
    pub min_contraction_bound: f64,
    pub within_contraction_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub records: Vec<StepRecord>,
    pub steps: usize,
    pub final_t: f64,
    pub stop_reason: StopReason,
    pub error: Option<String>,
    pub setup_seconds: f64,
    pub stepping_seconds: f64,
    pub mean_step_seconds: f64,
    pub stability: StabilityReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub state: State,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub mesh: Mesh,
    pub snapshots: Vec<Snapshot>,
    pub stats: RunStats,
}

/// Run and keep every emitted snapshot in memory.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let mut snapshots = Vec::new();
    let (mesh, stats) = run_with(cfg, &mut |step, state| {
        snapshots.push(Snapshot {
            step,
            state: state.clone(),
        });
        Ok(())
    })?;
    Ok(RunOutput { mesh, snapshots, stats })
}

fn record(stepper: &Stepper, step: usize, state: &State, info: &StepInfo, wall: f64) -> Result<StepRecord> {
    let w_m_norm = m_norm(stepper.mass(), &state.w)?;
    Ok(StepRecord {
        step,
        t: state.t,
        u_max: max_norm(&state.u),
        w_m_norm,
        u_m_norm: m_norm(stepper.mass(), &state.u)?,
        u_k_norm: k_norm(stepper.h1(), &state.u)?,
        fp_iterations: info.fp_iterations(),
        fp_errors: info.fp_errors.clone(),
        hyperbolic_iterations: info.hyperbolic_iterations,
        elliptic_residual: stepper.elliptic_residual(state)?,
        contraction_bound: stepper.contraction_bound(w_m_norm),
        wall_seconds: wall,
    })
}

/// Step until `t ≥ T` or `‖u‖∞ ≥ u_max`. Snapshots are handed to `sink` at
/// step 0, every `snapshot_every` steps and at the last accepted step. A
/// failing step ends the run with [`StopReason::Error`]; setup failures are
/// returned as errors.
pub fn run_with(
    cfg: &RunConfig,
    sink: &mut dyn FnMut(usize, &State) -> Result<()>,
) -> Result<(Mesh, RunStats)> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    let tau = cfg.scheme.tau;
    let k_hat_sup = cfg.problem.density.k_hat_sup(&mesh);
    let coercive = coercivity_bound(k_hat_sup);
    let mut warnings = Vec::new();
    if tau > coercive {
        let msg = format!(
            "tau = {tau} exceeds the coercivity bound 1/(2 sup|grad p|) = {coercive:.6}"
        );
        if cfg.scheme.stability_mode == StabilityMode::Enforce {
            return Err(Error::config("scheme.tau", msg));
        }
        warnings.push(msg);
    }

    let mut stepper = Stepper::new(mesh.clone(), cfg.problem.density.clone(), cfg.scheme, cfg.solver)?;
    let initial = &cfg.problem.initial;
    let mut state = stepper.init_state(|x, y| initial.eval(x, y))?;
    let first = record(&stepper, 0, &state, &StepInfo::default(), 0.0)?;
    let initial_bound = first.contraction_bound;
    let mut records = vec![first];
    sink(0, &state)?;

    let n_steps = if cfg.run.t_end > 0.0 {
        (cfg.run.t_end / tau - 1e-9).ceil() as usize
    } else {
        0
    };
    let mut stop_reason = StopReason::TimeLimit;
    let mut error = None;
    let mut last_emitted = 0;
    let mut step = 0;
    let clock = Instant::now();
    if max_norm(&state.u) >= cfg.run.u_max {
        stop_reason = StopReason::UMaxReached;
    } else {
        while step < n_steps {
            let t0 = Instant::now();
            let (mut next, info) = match stepper.step(&state) {
                Ok(v) => v,
                Err(e) => {
                    stop_reason = StopReason::Error;
                    error = Some(e.to_string());
                    break;
                }
            };
            let wall = t0.elapsed().as_secs_f64();
            step += 1;
            next.t = step as f64 * tau;
            records.push(record(&stepper, step, &next, &info, wall)?);
            state = next;
            let reached = max_norm(&state.u) >= cfg.run.u_max;
            let every = cfg.run.snapshot_every;
            if (every > 0 && step % every == 0) || reached || step == n_steps {
                sink(step, &state)?;
                last_emitted = step;
            }
            if reached {
                stop_reason = StopReason::UMaxReached;
                break;
            }
        }
    }
    if last_emitted != step {
        sink(step, &state)?;
    }
    let stepping_seconds = clock.elapsed().as_secs_f64();
    let min_bound = records
        .iter()
        .map(|r| r.contraction_bound)
        .fold(f64::INFINITY, f64::min);
    let stability = StabilityReport {
        tau,
        k_hat_sup,
        coercivity_bound: coercive,
        within_coercivity_bound: tau <= coercive,
        contraction_safety: cfg.scheme.contraction_safety,
        initial_contraction_bound: initial_bound,
        min_contraction_bound: min_bound,
        within_contraction_bound: tau <= min_bound,
    };
    let steps = step;
    let stats = RunStats {
        final_t: state.t,
        steps,
        stop_reason,
        error,
        setup_seconds: stepper.setup_seconds(),
        stepping_seconds,
        mean_step_seconds: if steps > 0 {
            records[1..].iter().map(|r| r.wall_seconds).sum::<f64>() / steps as f64
        } else {
            0.0
        },
        stability,
        warnings,
        records,
    };
    Ok((mesh, stats))
}
