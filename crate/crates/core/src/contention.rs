//! Two-stage rounding for convex externalities: independent per-column
//! thresholds, then fair contention resolution within each agent's row.

use std::time::Instant;

use ndarray::Array2;
use rand::Rng;

use crate::config::SolverConfig;
use crate::error::{invalid, Error, Result};
use crate::instance::{gamma_curvature, Allocation, FractionalAllocation, Instance};
use crate::lovasz::solve_relaxation;
use crate::pipeline::{build_report, run_trials, summarize};
use crate::report::{Algorithm, Diagnostics, GuaranteeBasis, SolveReport};
use crate::seed::{threshold, SolverRng};

/// Column-thresholded copy of a fractional allocation. Rows may hold any
/// number of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOneMatrix {
    pub xb: Array2<bool>,
    pub thetas: Vec<f64>,
}

impl StageOneMatrix {
    /// Items requested by agent `j`, increasing.
    pub fn requests(&self, j: usize) -> Vec<usize> {
        self.xb
            .row(j)
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.xb.mapv(|b| if b { 1.0 } else { 0.0 })
    }
}

/// One uniform threshold per column, drawn in column order.
pub fn stage_one_round(x: &FractionalAllocation, rng: &mut SolverRng) -> StageOneMatrix {
    let thetas: Vec<f64> = (0..x.m()).map(|_| threshold(rng)).collect();
    let xb = Array2::from_shape_fn((x.n(), x.m()), |(j, i)| x.get(j, i) >= thetas[i]);
    StageOneMatrix { xb, thetas }
}

const PROB_SUM_TOL: f64 = 1e-9;

/// Selection probabilities `r_iA` for each member of `a`, in the order of `a`.
///
/// `r_iA = (sum_{k in A\i} p_k / (|A|-1) + sum_{k not in A} p_k / |A|) / sum p`
pub fn fair_resolve_probabilities(p: &[f64], a: &[usize]) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(invalid("contention set must be nonempty"));
    }
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(invalid("probabilities must be finite and nonnegative"));
    }
    let total: f64 = p.iter().sum();
    if total > 1.0 + PROB_SUM_TOL {
        return Err(invalid(format!("probabilities sum to {total} > 1")));
    }
    let mut in_a = vec![false; p.len()];
    for &i in a {
        if i >= p.len() {
            return Err(invalid(format!(
                "contender {i} out of range for {} entries",
                p.len()
            )));
        }
        if in_a[i] {
            return Err(invalid(format!("contender {i} listed twice")));
        }
        in_a[i] = true;
    }
    let size = a.len();
    if size == 1 {
        return Ok(vec![1.0]);
    }
    if total == 0.0 {
        return Ok(vec![1.0 / size as f64; size]);
    }
    let inside: f64 = a.iter().map(|&i| p[i]).sum();
    let outside = total - inside;
    let k = size as f64;
    Ok(a.iter()
        .map(|&i| ((inside - p[i]) / (k - 1.0) + outside / k) / total)
        .collect())
}

/// Samples one member of `a` with probability `r_iA`. A singleton is returned
/// without consuming randomness.
pub fn fair_resolve(p: &[f64], a: &[usize], rng: &mut SolverRng) -> Result<usize> {
    let r = fair_resolve_probabilities(p, a)?;
    if a.len() == 1 {
        return Ok(a[0]);
    }
    Ok(a[sample_index(&r, rng)])
}

fn sample_index(weights: &[f64], rng: &mut SolverRng) -> usize {
    let u: f64 = rng.random::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (idx, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return idx;
        }
    }
    // rounding left `u` at the top of the range
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(weights.len() - 1)
}

/// Probability that a contender keeps the resource when each index `k`
/// competes independently with probability `p_k`:
/// `(1 - prod_k (1 - p_k)) / sum_k p_k`.
pub fn retention_probability(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    if total == 0.0 {
        return 1.0;
    }
    (1.0 - p.iter().map(|v| 1.0 - v).product::<f64>()) / total
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcrRounding {
    pub stage_one: StageOneMatrix,
    pub allocation: Allocation,
    /// Rows with no request after stage one, filled with their row argmax.
    pub empty_rows: usize,
}

/// Stage-one thresholds, then per-row fair resolution (rows in order).
pub fn fcr_round_detailed(x: &FractionalAllocation, rng: &mut SolverRng) -> FcrRounding {
    let stage_one = stage_one_round(x, rng);
    let mut empty_rows = 0;
    let assign = (0..x.n())
        .map(|j| {
            let a = stage_one.requests(j);
            match a.len() {
                0 => {
                    empty_rows += 1;
                    x.row_argmax(j)
                }
                1 => a[0],
                _ => {
                    let p = x.row(j).to_vec();
                    fair_resolve(&p, &a, rng).expect("rows of a feasible allocation are valid")
                }
            }
        })
        .collect();
    FcrRounding {
        stage_one,
        allocation: Allocation::from_vec_unchecked(assign),
        empty_rows,
    }
}

pub fn fcr_round(x: &FractionalAllocation, rng: &mut SolverRng) -> Allocation {
    fcr_round_detailed(x, rng).allocation
}

/// Smallest `Gamma_{1/4}` over the instance's externalities.
pub fn quarter_curvature(inst: &Instance) -> Result<f64> {
    let mut specs: Vec<_> = Vec::new();
    for s in inst.externalities() {
        if !specs.contains(&s) {
            specs.push(s);
        }
    }
    specs
        .into_iter()
        .map(|s| gamma_curvature(s, 0.25))
        .try_fold(1.0f64, |acc, g| g.map(|g| acc.min(g)))
}

/// Lovász relaxation followed by two-stage rounding. The guarantee is
/// `Gamma_{1/4}` times the relaxation value at the rounded point.
pub fn solve_convex_curvature(inst: &Instance, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    if !inst.regime().is_positive() || inst.max_degree().is_none() {
        return Err(Error::UnsupportedRegime {
            operation: "convex-fcr",
            expected: "positive-linear or positive-convex",
            found: inst.regime(),
        });
    }
    let gamma = quarter_curvature(inst)?;
    let relax = solve_relaxation(inst, cfg)?;
    let rounds = run_trials(cfg, |rng| fcr_round(&relax.x, rng))?;
    let summary = summarize(inst, rounds.iter().map(|a| a.assign()));
    let diagnostics = Diagnostics {
        gamma_quarter: Some(gamma),
        fractional_objective: Some(relax.value),
        not_converged: relax.not_converged,
        relaxation_iterations: Some(relax.iterations),
        ..Diagnostics::default()
    };
    Ok(build_report(
        inst,
        cfg,
        Algorithm::ConvexFcr,
        summary,
        Some(relax.value),
        gamma,
        GuaranteeBasis::FractionalObjective,
        diagnostics,
        started,
    ))
}
