//! Per-run verdicts on the discrete energy inequalities.

use serde::{Deserialize, Serialize};

use super::checks::CheckReport;
use crate::stepper::{RunStats, StepRecord};

/// Relative slack attributed to solver tolerance.
pub const MONITOR_SLACK: f64 = 1e-9;
/// Allowed `‖KU − MW‖ / ‖MW‖`.
pub const ELLIPTIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl MonitorReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn monitor(stats: &RunStats) -> MonitorReport {
    monitor_records(&stats.records, stats.stability.tau, stats.stability.k_hat_sup)
}

/// Growth per step against `1 + τ‖k̂‖∞`, `‖U‖_M ≤ ‖U‖_K ≤ ‖W‖_M`,
/// non-increasing `‖W‖_M` when `k̂ = 0`, and the elliptic residual.
pub fn monitor_records(records: &[StepRecord], tau: f64, k_hat_sup: f64) -> MonitorReport {
    let factor = 1.0 + tau * k_hat_sup;
    let mut growth = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut increase = 0.0f64;
    for pair in records.windows(2) {
        let (a, b) = (pair[0].w_m_norm, pair[1].w_m_norm);
        if a > 0.0 {
            let ratio = b / a;
            worst_ratio = worst_ratio.max(ratio);
            growth = growth.max(ratio / factor - 1.0);
            increase = increase.max(ratio - 1.0);
        } else if b > 0.0 {
            growth = f64::INFINITY;
            increase = f64::INFINITY;
        }
    }
    let mut checks = vec![CheckReport::new(
        "a_priori_growth",
        growth <= MONITOR_SLACK,
        growth.max(0.0),
        format!("worst ‖W‖_M ratio {worst_ratio:.12} against 1 + τk = {factor}"),
    )];

    let ordering = records
        .iter()
        .map(|r| {
            let s = r.w_m_norm.max(f64::MIN_POSITIVE);
            ((r.u_m_norm - r.u_k_norm) / s).max((r.u_k_norm - r.w_m_norm) / s)
        })
        .fold(0.0f64, f64::max);
    checks.push(CheckReport::new(
        "norm_ordering",
        ordering <= 1e-8,
        ordering,
        "‖U‖_M ≤ ‖U‖_K ≤ ‖W‖_M, violation relative to ‖W‖_M",
    ));

    if k_hat_sup == 0.0 {
        checks.push(CheckReport::new(
            "k0_monotone",
            increase <= MONITOR_SLACK,
            increase.max(0.0),
            format!("largest relative step increase of ‖W‖_M: {increase:e}"),
        ));
    } else {
        checks.push(CheckReport::new("k0_monotone", true, 0.0, "not applicable: k ≠ 0"));
    }

    let resid = records.iter().map(|r| r.elliptic_residual).fold(0.0f64, f64::max);
    checks.push(CheckReport::new(
        "elliptic_consistency",
        resid <= ELLIPTIC_TOL,
        resid,
        format!("max ‖KU − MW‖/‖MW‖ = {resid:e}"),
    ));
    MonitorReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(step: usize, w: f64) -> StepRecord {
        StepRecord {
            step,
            t: step as f64 * 0.1,
            u_max: 0.0,
            w_m_norm: w,
            u_m_norm: 0.5 * w,
            u_k_norm: 0.8 * w,
            fp_iterations: 0,
            fp_errors: Vec::new(),
            hyperbolic_iterations: 0,
            elliptic_residual: 1e-12,
            contraction_bound: 0.0,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn growth_within_factor_passes() {
        let recs: Vec<_> = (0..5).map(|i| rec(i, 2.19f64.powi(i as i32))).collect();
        let rep = monitor_records(&recs, 0.1, 12.0);
        assert!(rep.passed, "{rep:?}");
        let recs: Vec<_> = (0..5).map(|i| rec(i, 2.3f64.powi(i as i32))).collect();
        let rep = monitor_records(&recs, 0.1, 12.0);
        assert!(!rep.check("a_priori_growth").unwrap().passed);
    }

    #[test]
    fn k0_requires_decay() {
        let recs: Vec<_> = [1.0, 0.9, 0.9, 0.95].iter().enumerate().map(|(i, &w)| rec(i, w)).collect();
        let rep = monitor_records(&recs, 0.1, 0.0);
        assert!(!rep.check("k0_monotone").unwrap().passed);
        assert!(!rep.check("a_priori_growth").unwrap().passed);
        let rep = monitor_records(&recs[..3], 0.1, 0.0);
        assert!(rep.passed);
    }

    #[test]
    fn ordering_and_residual() {
        let mut r = rec(0, 1.0);
        r.u_k_norm = 1.1;
        r.elliptic_residual = 1e-3;
        let rep = monitor_records(&[r], 0.1, 1.0);
        assert!(!rep.check("norm_ordering").unwrap().passed);
        assert!(!rep.check("elliptic_consistency").unwrap().passed);
    }
}
