//! Trial plumbing shared by the rounding pipelines.

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::error::{invalid, Result};
use crate::instance::{welfare_unchecked, Allocation, Instance};
use crate::report::{Algorithm, Diagnostics, GuaranteeBasis, SolveReport, RATIO_TOLERANCE};
use crate::seed::{rng_for, SolverRng};
use crate::stats::RunningStats;

/// Runs `cfg.trials` independent trials, trial `t` seeded from
/// `(cfg.seed, cfg.instance_id, t)`. Output order is the trial order.
pub(crate) fn run_trials<T, F>(cfg: &SolverConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SolverRng) -> T + Sync + Send,
{
    if cfg.trials == 0 {
        return Err(invalid("at least one rounding trial is required"));
    }
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(cfg.seed, cfg.instance_id, t as u64);
            f(&mut rng)
        })
        .collect())
}

pub(crate) struct RoundedSummary {
    pub stats: RunningStats,
    pub best: Allocation,
    pub best_welfare: f64,
}

/// Welfare statistics over rounded assignments; the first best one is kept.
pub(crate) fn summarize<'a>(
    inst: &Instance,
    assignments: impl IntoIterator<Item = &'a [usize]>,
) -> RoundedSummary {
    let mut stats = RunningStats::new();
    let mut best: Option<(&[usize], f64)> = None;
    for a in assignments {
        let v = welfare_unchecked(inst, a);
        stats.push(v);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((a, v));
        }
    }
    let (a, v) = best.expect("at least one trial");
    RoundedSummary {
        stats,
        best: Allocation::from_vec_unchecked(a.to_vec()),
        best_welfare: v,
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_report(
    inst: &Instance,
    cfg: &SolverConfig,
    algorithm: Algorithm,
    summary: RoundedSummary,
    relaxation_value: Option<f64>,
    guarantee_bound: f64,
    guarantee_basis: GuaranteeBasis,
    diagnostics: Diagnostics,
    started: std::time::Instant,
) -> SolveReport {
    let mut report = SolveReport {
        instance_id: cfg.instance_id,
        algorithm,
        regime: inst.regime(),
        n: inst.n(),
        m: inst.m(),
        relaxation_value,
        rounded_welfare_mean: summary.stats.mean(),
        rounded_welfare_stderr: summary.stats.stderr(),
        trials: summary.stats.count(),
        best_allocation: summary.best,
        best_welfare: summary.best_welfare,
        oracle_opt: None,
        empirical_ratio: None,
        guarantee_bound,
        guarantee_basis,
        bound_ok: None,
        diagnostics,
        wall_time_ms: 0.0,
    };
    report.evaluate_bound(RATIO_TOLERANCE);
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    report
}
