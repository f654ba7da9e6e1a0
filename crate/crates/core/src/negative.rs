//! Negative linear externalities: multilinear extension, measured continuous
//! greedy over `{x >= 0, row sums <= 1}`, and independent rounding.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::config::SolverConfig;
use crate::error::{invalid, Error, Result};
use crate::instance::{argmax_lowest, partial_welfare, Allocation, Instance, SignRegime};
use crate::pipeline::{build_report, run_trials, summarize};
use crate::report::{Algorithm, Diagnostics, GuaranteeBasis, SolveReport};
use crate::seed::SolverRng;
use crate::stats::{Estimate, RunningStats};

fn require_linear(inst: &Instance, operation: &'static str) -> Result<()> {
    if inst.is_all_linear() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime {
            operation,
            expected: "negative-linear",
            found: inst.regime(),
        })
    }
}

fn check_column(inst: &Instance, item: usize, x: &[f64]) -> Result<()> {
    if item >= inst.m() {
        return Err(invalid(format!(
            "item {item} out of range for m = {}",
            inst.m()
        )));
    }
    if x.len() != inst.n() {
        return Err(invalid(format!(
            "column has {} entries, expected {}",
            x.len(),
            inst.n()
        )));
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid("column entries must lie in [0, 1]"));
    }
    Ok(())
}

fn column_value(inst: &Instance, item: usize, x: &[f64]) -> f64 {
    let w = inst.weights(item);
    let mut total = 0.0;
    for j in 0..x.len() {
        let row = w.row(j);
        total += row[j] * x[j];
        for k in (0..x.len()).filter(|&k| k != j) {
            total += row[k] * x[j] * x[k];
        }
    }
    total
}

fn column_gradient(inst: &Instance, item: usize, x: &[f64], out: &mut [f64]) {
    let w = inst.weights(item);
    for j in 0..x.len() {
        let mut g = w[[j, j]];
        for k in (0..x.len()).filter(|&k| k != j) {
            g += (w[[j, k]] + w[[k, j]]) * x[k];
        }
        out[j] = g;
    }
}

/// Closed-form multilinear extension of `S -> chi_S' A_i chi_S`:
/// `sum_j a_jj x_j + sum_{j != k} a_jk x_j x_k`.
pub fn multilinear_exact(inst: &Instance, item: usize, x: &[f64]) -> Result<f64> {
    require_linear(inst, "multilinear extension")?;
    check_column(inst, item, x)?;
    Ok(column_value(inst, item, x))
}

/// `a_jj + sum_{k != j} (a_jk + a_kj) x_k` for every `j`.
pub fn multilinear_gradient(inst: &Instance, item: usize, x: &[f64]) -> Result<Vec<f64>> {
    require_linear(inst, "multilinear gradient")?;
    check_column(inst, item, x)?;
    let mut g = vec![0.0; x.len()];
    column_gradient(inst, item, x, &mut g);
    Ok(g)
}

/// Multilinear extension summed over items, for an `n x m` matrix in `[0,1]`.
pub fn multilinear_value(inst: &Instance, x: ArrayView2<'_, f64>) -> Result<f64> {
    require_linear(inst, "multilinear extension")?;
    inst.check_shape(x)?;
    Ok((0..inst.m())
        .map(|i| column_value(inst, i, &x.column(i).to_vec()))
        .sum())
}

/// Monte Carlo multilinear extension: every entry is included independently
/// with its probability and the set objective is averaged.
pub fn multilinear_sampled(
    inst: &Instance,
    x: ArrayView2<'_, f64>,
    samples: usize,
    rng: &mut SolverRng,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    inst.check_shape(x)?;
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid("entries must lie in [0, 1]"));
    }
    let mut stats = RunningStats::new();
    let mut in_set = vec![false; inst.n()];
    for _ in 0..samples {
        let mut v = 0.0;
        for i in 0..inst.m() {
            for (j, s) in in_set.iter_mut().enumerate() {
                *s = rng.random::<f64>() < x[[j, i]];
            }
            v += inst.set_value(i, &in_set);
        }
        stats.push(v);
    }
    Ok(stats.estimate())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrajectory {
    /// Rows sum to at most one.
    pub x_final: Array2<f64>,
    pub steps: usize,
    /// Vertex chosen at every step (at most one 1 per row).
    pub directions: Vec<Array2<f64>>,
    /// `(t, F(x_t), stderr)` for `t = 0..=steps`; exact, so stderr is zero.
    pub f_estimates: Vec<(usize, f64, f64)>,
}

impl GreedyTrajectory {
    pub fn value(&self) -> f64 {
        self.f_estimates.last().map_or(0.0, |e| e.1)
    }
}

/// Measured continuous greedy with `T = cfg.greedy_steps` steps of size
/// `1/T`. Each step weighs every entry by its exact marginal
/// `(1 - x_ji) dF/dx_ji`, picks per row the best item with positive weight (or
/// none) and moves `x += (1/T) (1 - x) * direction`.
pub fn continuous_greedy(inst: &Instance, cfg: &SolverConfig) -> Result<GreedyTrajectory> {
    if inst.regime() != SignRegime::NegativeLinear {
        return Err(Error::UnsupportedRegime {
            operation: "continuous greedy",
            expected: "negative-linear",
            found: inst.regime(),
        });
    }
    if cfg.greedy_steps == 0 {
        return Err(invalid("continuous greedy needs at least one step"));
    }
    let (n, m) = (inst.n(), inst.m());
    let steps = cfg.greedy_steps;
    let delta = 1.0 / steps as f64;
    let mut x = Array2::<f64>::zeros((n, m));
    let mut grad = Array2::<f64>::zeros((n, m));
    let mut buf = vec![0.0; n];
    let mut directions = Vec::with_capacity(steps);
    let mut f_estimates = vec![(0, 0.0, 0.0)];
    for t in 1..=steps {
        for i in 0..m {
            column_gradient(inst, i, &x.column(i).to_vec(), &mut buf);
            grad.column_mut(i)
                .iter_mut()
                .zip(&buf)
                .for_each(|(d, s)| *d = *s);
        }
        let mut dir = Array2::<f64>::zeros((n, m));
        for j in 0..n {
            let weights: Vec<f64> = (0..m).map(|i| (1.0 - x[[j, i]]) * grad[[j, i]]).collect();
            let best = argmax_lowest(weights.iter().copied());
            if weights[best] > 0.0 {
                dir[[j, best]] = 1.0;
            }
        }
        x.zip_mut_with(&dir, |xv, d| *xv += delta * (1.0 - *xv) * d);
        directions.push(dir);
        f_estimates.push((t, multilinear_value(inst, x.view())?, 0.0));
    }
    Ok(GreedyTrajectory {
        x_final: x,
        steps,
        directions,
        f_estimates,
    })
}

/// Per row, picks item `i` with probability `x_ji` and nothing with the
/// remaining mass.
pub fn independent_round_partial(
    x: ArrayView2<'_, f64>,
    rng: &mut SolverRng,
) -> Vec<Option<usize>> {
    x.rows()
        .into_iter()
        .map(|row| {
            let u: f64 = rng.random::<f64>();
            let mut acc = 0.0;
            for (i, &v) in row.iter().enumerate() {
                acc += v;
                if u < acc {
                    return Some(i);
                }
            }
            None
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchedRounding {
    pub partial: Vec<Option<usize>>,
    pub allocation: Allocation,
    /// Unassigned agents whose best item did not raise welfare.
    pub forced: usize,
}

/// Gives every unassigned agent (in index order) the item with the largest
/// welfare gain given the current assignment, ties to the lowest item.
pub fn patch_unassigned(inst: &Instance, partial: &[Option<usize>]) -> PatchedRounding {
    let mut assign = partial.to_vec();
    let mut forced = 0;
    for j in 0..inst.n() {
        if assign[j].is_some() {
            continue;
        }
        let gains: Vec<f64> = (0..inst.m())
            .map(|i| {
                let w = inst.weights(i);
                let mut g = w[[j, j]];
                for (k, a) in assign.iter().enumerate() {
                    if *a == Some(i) {
                        g += w[[j, k]] + w[[k, j]];
                    }
                }
                g
            })
            .collect();
        let best = argmax_lowest(gains.iter().copied());
        if gains[best] <= 0.0 {
            forced += 1;
        }
        assign[j] = Some(best);
    }
    PatchedRounding {
        partial: partial.to_vec(),
        allocation: Allocation::from_vec_unchecked(
            assign.into_iter().map(|a| a.expect("patched")).collect(),
        ),
        forced,
    }
}

/// Continuous greedy, independent rounding of its point, and the feasibility
/// patch for agents left without an item.
pub fn solve_negative(inst: &Instance, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    let traj = continuous_greedy(inst, cfg)?;
    let f_final = traj.value();
    let rounds = run_trials(cfg, |rng| {
        let partial = independent_round_partial(traj.x_final.view(), rng);
        let pre = partial_welfare(inst, &partial);
        (patch_unassigned(inst, &partial), pre)
    })?;
    let partial: RunningStats = rounds.iter().map(|r| r.1).collect();
    let summary = summarize(inst, rounds.iter().map(|r| r.0.allocation.assign()));
    let bound = if inst.is_diagonally_dominant() {
        1.0 - (-1.0f64).exp()
    } else {
        (-1.0f64).exp()
    };
    let diagnostics = Diagnostics {
        fractional_objective: Some(f_final),
        partial_welfare_mean: Some(partial.mean()),
        forced_assignments: rounds.iter().map(|r| r.0.forced).sum(),
        relaxation_iterations: Some(traj.steps),
        ..Diagnostics::default()
    };
    Ok(build_report(
        inst,
        cfg,
        Algorithm::NegativeCg,
        summary,
        Some(f_final),
        bound,
        GuaranteeBasis::Opt,
        diagnostics,
        started,
    ))
}
