//! Concave externalities: a dual subgradient method over the agent
//! constraints with independent row rounding, and a min-composed concave
//! relaxation with column thresholding.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ascent::projected_supergradient_ascent;
use crate::config::SolverConfig;
use crate::contention::fcr_round_detailed;
use crate::error::{invalid, Error, Result};
use crate::instance::{
    beta_curvature, eta, Allocation, FractionalAllocation, Instance, SignRegime,
};
use crate::lovasz::MinComposite;
use crate::pipeline::{build_report, run_trials, summarize};
use crate::report::{Algorithm, Diagnostics, GuaranteeBasis, SolveReport};
use crate::seed::SolverRng;
use crate::stats::RunningStats;

pub use crate::simplex::project_row_stochastic;

fn require_concave(inst: &Instance, operation: &'static str) -> Result<()> {
    if inst.regime() == SignRegime::PositiveConcave {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime {
            operation,
            expected: "positive-concave",
            found: inst.regime(),
        })
    }
}

/// Multipliers of the constraints `sum_i x_ji = 1`, one per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVector {
    pub p: Vec<f64>,
}

impl DualVector {
    pub fn zeros(n: usize) -> Self {
        DualVector { p: vec![0.0; n] }
    }
}

/// `sum_{i,j} x_ji f_ij(a^i_j . x_i)`
pub fn fractional_welfare(inst: &Instance, x: ArrayView2<'_, f64>) -> Result<f64> {
    inst.check_shape(x)?;
    Ok((0..inst.m())
        .map(|i| {
            let col = x.column(i).to_vec();
            column_objective(inst, i, &col, None)
        })
        .sum())
}

/// `sum_j x_j (f_ij(a_j . x) - p_j)` for one item's column.
fn column_objective(inst: &Instance, item: usize, x: &[f64], p: Option<&[f64]>) -> f64 {
    let w = inst.weights(item);
    let mut total = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let y: f64 = w.row(j).iter().zip(x).map(|(a, xk)| a * xk).sum();
        let price = p.map_or(0.0, |p| p[j]);
        total += xj * (inst.externality(item, j).value(y) - price);
    }
    total
}

fn column_gradient(inst: &Instance, item: usize, x: &[f64], p: &[f64], grad: &mut [f64]) {
    let w = inst.weights(item);
    let n = x.len();
    for l in 0..n {
        grad[l] = -p[l];
    }
    for j in 0..n {
        let row = w.row(j);
        let y: f64 = row.iter().zip(x).map(|(a, xk)| a * xk).sum();
        let spec = inst.externality(item, j);
        grad[j] += spec.value(y);
        if x[j] != 0.0 {
            let d = x[j] * spec.derivative(y);
            for l in 0..n {
                grad[l] += d * row[l];
            }
        }
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

/// Projected gradient ascent with backtracking on the box `[0,1]^n`.
fn box_ascent(
    inst: &Instance,
    item: usize,
    p: &[f64],
    start: &[f64],
    iters: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut x: Vec<f64> = start.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut v = column_objective(inst, item, &x, Some(p));
    let mut g = vec![0.0; n];
    let mut cand = vec![0.0; n];
    let mut step = 1.0;
    for _ in 0..iters {
        column_gradient(inst, item, &x, p, &mut g);
        let mut s = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let mut slope = 0.0;
            let mut moved = 0.0;
            for l in 0..n {
                cand[l] = (x[l] + s * g[l]).clamp(0.0, 1.0);
                let d = cand[l] - x[l];
                slope += g[l] * d;
                moved += d * d;
            }
            if moved == 0.0 {
                break;
            }
            let vc = column_objective(inst, item, &cand, Some(p));
            if vc >= v + ARMIJO * slope {
                accepted = Some(vc);
                break;
            }
            s *= 0.5;
        }
        let Some(vc) = accepted else { break };
        let gain = vc - v;
        x.copy_from_slice(&cand);
        v = vc;
        step = (2.0 * s).min(1.0);
        if gain < tol {
            break;
        }
    }
    (x, v)
}

/// Result of one per-item inner maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub x: Vec<f64>,
    /// `sum_j x_j (f_ij(a_j . x) - p_j)` at `x`.
    pub value: f64,
    /// Bi-concave objective `(g(x) - p) . y` after every half-step of the
    /// alternation.
    pub alternation_trace: Vec<f64>,
}

/// Alternating maximization of `(g(x) - p) . y` with `g_j(x) = f_ij(a_j . x)`.
/// Returns the binary `y` it settles on and the half-step objective trace.
fn alternate(
    inst: &Instance,
    item: usize,
    p: &[f64],
    start: &[f64],
    cfg: &SolverConfig,
) -> (Vec<f64>, Vec<f64>) {
    let n = start.len();
    let w = inst.weights(item);
    let g_of = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let y: f64 = w.row(j).iter().zip(x).map(|(a, xk)| a * xk).sum();
                inst.externality(item, j).value(y) - p[j]
            })
            .collect()
    };
    let mut x: Vec<f64> = start.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut y = vec![0.0; n];
    let mut trace = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for _ in 0..cfg.inner_iters.max(1) {
        // y-step: linear in y, closed form
        let g = g_of(&x);
        for j in 0..n {
            y[j] = if g[j] > 0.0 { 1.0 } else { 0.0 };
        }
        trace.push(g.iter().zip(&y).map(|(a, b)| a * b).sum());
        // x-step: sum_j y_j f_ij(a_j . x) is nondecreasing in x, so the
        // all-ones vector is a maximizer whenever some y_j is set
        if y.iter().any(|&v| v > 0.0) {
            x.iter_mut().for_each(|v| *v = 1.0);
        }
        let g = g_of(&x);
        let value: f64 = g.iter().zip(&y).map(|(a, b)| a * b).sum();
        trace.push(value);
        if value - last < cfg.inner_tol {
            break;
        }
        last = value;
    }
    (y, trace)
}

/// Approximately maximizes `sum_j x_j (f_ij(a_j . x) - p_j)` over `[0,1]^n`.
///
/// Candidates: the bi-concave alternation's fixed point, gradient ascent from
/// the warm start, from the half vector and from the alternation point, and,
/// for small `n`, every binary vertex followed by gradient ascent from the
/// best one. The best candidate wins (earliest on ties). The result is a
/// local solution in general.
pub fn inner_argmax(
    inst: &Instance,
    item: usize,
    p: &DualVector,
    warm: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<InnerSolution> {
    require_concave(inst, "inner maximization")?;
    let n = inst.n();
    if item >= inst.m() {
        return Err(invalid(format!(
            "item {item} out of range for m = {}",
            inst.m()
        )));
    }
    if p.p.len() != n {
        return Err(invalid(format!(
            "dual vector has {} entries, expected {n}",
            p.p.len()
        )));
    }
    if warm.is_some_and(|w| w.len() != n) {
        return Err(invalid("warm start has the wrong length"));
    }
    Ok(inner_argmax_unchecked(inst, item, &p.p, warm, cfg))
}

fn inner_argmax_unchecked(
    inst: &Instance,
    item: usize,
    p: &[f64],
    warm: Option<&[f64]>,
    cfg: &SolverConfig,
) -> InnerSolution {
    let n = inst.n();
    let half = vec![0.5; n];
    let start = warm.unwrap_or(&half);
    let (alt, trace) = alternate(inst, item, p, start, cfg);

    let mut best_x = alt.clone();
    let mut best_v = column_objective(inst, item, &alt, Some(p));
    let mut consider = |x: Vec<f64>, v: f64| {
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    };
    let ascend = |s: &[f64]| box_ascent(inst, item, p, s, cfg.inner_iters, cfg.inner_tol);
    if let Some(w) = warm {
        let (x, v) = ascend(w);
        consider(x, v);
    }
    let (x, v) = ascend(&half);
    consider(x, v);
    let (x, v) = ascend(&alt);
    consider(x, v);

    if n <= cfg.vertex_scan_max_n {
        let mut vx = vec![0.0; n];
        let mut top: Option<(u64, f64)> = None;
        for mask in 0u64..(1u64 << n) {
            for (j, v) in vx.iter_mut().enumerate() {
                *v = ((mask >> j) & 1) as f64;
            }
            let v = column_objective(inst, item, &vx, Some(p));
            if top.is_none_or(|(_, b)| v > b) {
                top = Some((mask, v));
            }
        }
        let (mask, v) = top.expect("at least the empty vertex");
        let vertex: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        consider(vertex.clone(), v);
        let (x, v) = ascend(&vertex);
        consider(x, v);
    }
    InnerSolution {
        x: best_x,
        value: best_v,
        alternation_trace: trace,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualIterate {
    pub k: usize,
    pub p: Vec<f64>,
    /// `sum_i z_i(p) + p . 1` with each `z_i` from [`inner_argmax`].
    pub dual_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualTrace {
    pub iterates: Vec<DualIterate>,
    pub best_k: usize,
    pub best_dual: f64,
    /// Row-stochastic projection of the inner maximizers at `best_k`.
    pub x_star: FractionalAllocation,
    /// `fractional_welfare` at `x_star`.
    pub primal_value: f64,
    /// `best_dual - primal_value`.
    pub gap_estimate: f64,
    /// `||sum_i x_i(best_k) - 1||` before projection.
    pub infeasibility: f64,
    /// Dual values use local inner solutions and may undershoot the true dual.
    pub dual_is_estimate: bool,
}

/// Dual subgradient method: `p(k+1) = p(k) - alpha_k (1 - sum_i x_i(k))` with
/// `alpha_k = step_scale / (m sqrt(n max(k, 1)))`, starting from `p(0) = 0`.
pub fn primal_dual_solve(inst: &Instance, cfg: &SolverConfig) -> Result<PrimalDualTrace> {
    require_concave(inst, "primal-dual solver")?;
    let (n, m) = (inst.n(), inst.m());
    let iters = cfg.primal_dual_iters(n, m);
    let mut p = vec![0.0; n];
    let mut cols: Vec<Option<Vec<f64>>> = vec![None; m];
    let mut iterates = Vec::with_capacity(iters + 1);
    let mut best: Option<(usize, f64, Vec<Vec<f64>>)> = None;

    for k in 0..=iters {
        let mut z = 0.0;
        for (i, col) in cols.iter_mut().enumerate() {
            let sol = inner_argmax_unchecked(inst, i, &p, col.as_deref(), cfg);
            z += sol.value;
            *col = Some(sol.x);
        }
        let dual = z + p.iter().sum::<f64>();
        iterates.push(DualIterate {
            k,
            p: p.clone(),
            dual_value: dual,
        });
        if best.as_ref().is_none_or(|(_, b, _)| dual < *b) {
            best = Some((
                k,
                dual,
                cols.iter().map(|c| c.clone().expect("filled")).collect(),
            ));
        }
        if k == iters {
            break;
        }
        let alpha = cfg.step_scale / (m as f64 * ((n * k.max(1)) as f64).sqrt());
        for (j, pj) in p.iter_mut().enumerate() {
            let load: f64 = cols.iter().map(|c| c.as_ref().expect("filled")[j]).sum();
            *pj -= alpha * (1.0 - load);
        }
    }

    let (best_k, best_dual, best_cols) = best.expect("at least one iterate");
    let raw = Array2::from_shape_fn((n, m), |(j, i)| best_cols[i][j]);
    let infeasibility = raw
        .rows()
        .into_iter()
        .map(|r| (r.sum() - 1.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let x_star = project_row_stochastic(raw.view());
    let primal_value = fractional_welfare(inst, x_star.view())?;
    Ok(PrimalDualTrace {
        iterates,
        best_k,
        best_dual,
        x_star,
        primal_value,
        gap_estimate: best_dual - primal_value,
        infeasibility,
        dual_is_estimate: true,
    })
}

/// Samples one item per agent from that agent's row, rows independently.
pub fn independent_round(x: &FractionalAllocation, rng: &mut SolverRng) -> Allocation {
    let assign = (0..x.n())
        .map(|j| {
            let row = x.row(j);
            let u: f64 = rng.random::<f64>() * row.sum();
            let mut acc = 0.0;
            for (i, &v) in row.iter().enumerate() {
                acc += v;
                if u < acc {
                    return i;
                }
            }
            row.iter().rposition(|&v| v > 0.0).unwrap_or(0)
        })
        .collect();
    Allocation::from_vec_unchecked(assign)
}

/// `(1 - 1/sqrt 2)(1 - exp(-eta^2 / 2))`
pub fn independent_rounding_factor(eta: f64) -> f64 {
    (1.0 - std::f64::consts::FRAC_1_SQRT_2) * (1.0 - (-eta * eta / 2.0).exp())
}

/// Dual subgradient solve, then independent rounding of the projected primal.
pub fn solve_concave_pd(inst: &Instance, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    let trace = primal_dual_solve(inst, cfg)?;
    let eta_x = eta(inst, &trace.x_star)?;
    let factor = independent_rounding_factor(eta_x);
    let rounds = run_trials(cfg, |rng| independent_round(&trace.x_star, rng))?;
    let summary = summarize(inst, rounds.iter().map(|a| a.assign()));
    let diagnostics = Diagnostics {
        eta: Some(eta_x),
        duality_gap: Some(trace.gap_estimate),
        dual_is_estimate: trace.dual_is_estimate,
        primal_infeasibility: Some(trace.infeasibility),
        fractional_objective: Some(trace.primal_value),
        relaxation_iterations: Some(trace.iterates.len()),
        ..Diagnostics::default()
    };
    Ok(build_report(
        inst,
        cfg,
        Algorithm::ConcavePd,
        summary,
        Some(trace.best_dual),
        factor,
        GuaranteeBasis::FractionalObjective,
        diagnostics,
        started,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveRelaxation {
    pub x: FractionalAllocation,
    pub value: f64,
    pub iterations: usize,
    pub solver_log: Vec<(usize, f64)>,
    pub not_converged: bool,
}

/// Maximizes `sum_{i,j} f_ij(sum_k a^i_jk min(x_ji, x_ki))` over row-stochastic
/// matrices by projected supergradient ascent from the uniform matrix.
pub fn solve_min_relaxation(inst: &Instance, cfg: &SolverConfig) -> Result<ConcaveRelaxation> {
    if !inst.regime().is_positive() || inst.externalities().iter().any(|s| !s.is_concave()) {
        return Err(Error::UnsupportedRegime {
            operation: "min-composed relaxation",
            expected: "positive-concave",
            found: inst.regime(),
        });
    }
    let x0 = FractionalAllocation::uniform(inst.n(), inst.m()).into_inner();
    let out = projected_supergradient_ascent(&MinComposite { inst }, x0, cfg);
    Ok(ConcaveRelaxation {
        x: FractionalAllocation::from_array_unchecked(out.x),
        value: out.value,
        iterations: out.iterations,
        solver_log: out.log,
        not_converged: !out.converged,
    })
}

/// `sum_{i,j} f_ij(sum_k a^i_jk xb_ji xb_ki)` for a binary matrix whose rows
/// may hold several ones.
pub fn product_form_value(inst: &Instance, xb: ArrayView2<'_, f64>) -> Result<f64> {
    inst.check_shape(xb)?;
    let mut total = 0.0;
    for i in 0..inst.m() {
        let col = xb.column(i);
        let w = inst.weights(i);
        for j in 0..inst.n() {
            if col[j] == 0.0 {
                total += inst.externality(i, j).value(0.0);
                continue;
            }
            let y: f64 = w
                .row(j)
                .iter()
                .zip(col.iter())
                .map(|(a, c)| a * col[j] * c)
                .sum();
            total += inst.externality(i, j).value(y);
        }
    }
    Ok(total)
}

/// Min-composed relaxation, column thresholds, then fair resolution of rows
/// that requested several items. The guarantee `1/beta` is checked on the
/// thresholded matrix before resolution.
pub fn solve_concave_beta(inst: &Instance, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    require_concave(inst, "concave-beta")?;
    let mut beta: f64 = 1.0;
    let mut unbounded = false;
    for spec in inst.externalities() {
        let b = beta_curvature(spec)?;
        beta = beta.max(b.value);
        unbounded |= b.unbounded;
    }
    let relax = solve_min_relaxation(inst, cfg)?;
    let rounds = run_trials(cfg, |rng| {
        let r = fcr_round_detailed(&relax.x, rng);
        let stage = product_form_value(inst, r.stage_one.to_f64().view()).expect("shape checked");
        (r.allocation, stage)
    })?;
    let stage_one: RunningStats = rounds.iter().map(|r| r.1).collect();
    let summary = summarize(inst, rounds.iter().map(|r| r.0.assign()));
    let diagnostics = Diagnostics {
        eta: Some(eta(inst, &relax.x)?),
        beta: Some(beta),
        beta_unbounded: unbounded,
        fractional_objective: Some(relax.value),
        stage_one_mean: Some(stage_one.mean()),
        not_converged: relax.not_converged,
        relaxation_iterations: Some(relax.iterations),
        ..Diagnostics::default()
    };
    Ok(build_report(
        inst,
        cfg,
        Algorithm::ConcaveBeta,
        summary,
        Some(relax.value),
        1.0 / beta,
        GuaranteeBasis::StageOneRelaxation,
        diagnostics,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ExternalitySpec;
    use crate::lovasz::solve_relaxation;
    use crate::oracle::brute_force;
    use crate::seed::rng;
    use ndarray::array;

    fn normalized_instance(seed: u64, n: usize, m: usize, spec: ExternalitySpec) -> Instance {
        let mut r = rng(seed);
        let weights = (0..m)
            .map(|_| {
                let mut w = Array2::from_shape_fn((n, n), |_| r.random::<f64>());
                for mut row in w.rows_mut() {
                    let s = row.sum();
                    row.mapv_inplace(|v| v / s);
                }
                w
            })
            .collect();
        Instance::new(SignRegime::PositiveConcave, weights, spec).unwrap()
    }

    fn sqrt() -> ExternalitySpec {
        ExternalitySpec::PowerConcave(0.5)
    }

    #[test]
    fn inner_extremes() {
        let inst = normalized_instance(1, 4, 2, sqrt());
        let cfg = SolverConfig::default();
        let high = DualVector { p: vec![2.0; 4] };
        let sol = inner_argmax(&inst, 0, &high, None, &cfg).unwrap();
        assert!(sol.x.iter().all(|&v| v == 0.0));
        assert_eq!(sol.value, 0.0);

        let sol = inner_argmax(&inst, 1, &DualVector::zeros(4), None, &cfg).unwrap();
        assert!(sol.x.iter().all(|&v| v == 1.0));
        assert!((sol.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn alternation_trace_is_monotone() {
        for s in 0..20 {
            let inst = normalized_instance(s, 5, 2, ExternalitySpec::LogConcave);
            let mut r = rng(100 + s);
            let p = DualVector {
                p: (0..5).map(|_| r.random::<f64>() * 0.8).collect(),
            };
            let start: Vec<f64> = (0..5).map(|_| r.random::<f64>()).collect();
            let sol = inner_argmax(&inst, 0, &p, Some(&start), &SolverConfig::default()).unwrap();
            for w in sol.alternation_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn inner_matches_grid_on_two_agents() {
        // the (0.2, 1.0) price pair has its optimum in the interior
        let inst = Instance::new(
            SignRegime::PositiveConcave,
            vec![array![[0.3, 0.7], [0.6, 0.4]]],
            sqrt(),
        )
        .unwrap();
        let no_scan = SolverConfig {
            vertex_scan_max_n: 0,
            ..SolverConfig::default()
        };
        for (p, cfg) in [
            (vec![0.2, 1.0], SolverConfig::default()),
            (vec![0.5, 0.5], SolverConfig::default()),
            (vec![0.2, 1.0], no_scan.clone()),
            (vec![0.9, 0.1], no_scan),
        ] {
            let sol = inner_argmax(&inst, 0, &DualVector { p: p.clone() }, None, &cfg).unwrap();
            let mut grid = f64::NEG_INFINITY;
            for a in 0..=200 {
                for b in 0..=200 {
                    let x = [a as f64 / 200.0, b as f64 / 200.0];
                    grid = grid.max(column_objective(&inst, 0, &x, Some(&p)));
                }
            }
            assert!(sol.value >= grid - 1e-3, "{p:?}: {} < {grid}", sol.value);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let inst = normalized_instance(3, 4, 1, ExternalitySpec::LogConcave);
        let p = [0.1, 0.4, 0.2, 0.3];
        let x = [0.3, 0.6, 0.8, 0.1];
        let mut g = [0.0; 4];
        column_gradient(&inst, 0, &x, &p, &mut g);
        for l in 0..4 {
            let h = 1e-6;
            let mut up = x;
            let mut dn = x;
            up[l] += h;
            dn[l] -= h;
            let fd = (column_objective(&inst, 0, &up, Some(&p))
                - column_objective(&inst, 0, &dn, Some(&p)))
                / (2.0 * h);
            assert!((fd - g[l]).abs() < 1e-6);
        }
    }

    #[test]
    fn single_item_primal_dual() {
        let inst = normalized_instance(2, 3, 1, sqrt());
        let cfg = SolverConfig {
            pd_iters: Some(200),
            ..SolverConfig::default()
        };
        let t = primal_dual_solve(&inst, &cfg).unwrap();
        assert!(t.x_star.view().iter().all(|&v| v == 1.0));
        assert!(t.dual_is_estimate);
        assert_eq!(t.iterates.len(), 201);
        assert_eq!(t.best_dual, t.iterates[t.best_k].dual_value);
        assert!(t.iterates.iter().all(|it| it.dual_value >= t.best_dual));
    }

    #[test]
    fn weak_duality_against_oracle() {
        for s in 0..5 {
            let inst = normalized_instance(s, 4, 2, sqrt());
            let opt = brute_force(&inst).unwrap().opt_value;
            let cfg = SolverConfig {
                pd_iters: Some(300),
                ..SolverConfig::default()
            };
            let t = primal_dual_solve(&inst, &cfg).unwrap();
            for it in &t.iterates {
                assert!(it.dual_value + 1e-6 >= opt);
            }
        }
    }

    #[test]
    fn independent_round_marginals() {
        let x = FractionalAllocation::new(array![[0.2, 0.5, 0.3], [1.0, 0.0, 0.0]]).unwrap();
        let mut r = rng(4);
        let mut counts = [0usize; 3];
        let trials = 100_000;
        for _ in 0..trials {
            let a = independent_round(&x, &mut r);
            counts[a.item_of(0)] += 1;
            assert_eq!(a.item_of(1), 0);
        }
        for (c, e) in counts.iter().zip([0.2, 0.5, 0.3]) {
            assert!((*c as f64 / trials as f64 - e).abs() < 0.01);
        }
    }

    #[test]
    fn beta_path_matches_lovasz_for_linear() {
        for s in 0..5 {
            let inst = normalized_instance(s, 5, 2, ExternalitySpec::Linear);
            let cfg = SolverConfig::default();
            let a = solve_min_relaxation(&inst, &cfg).unwrap();
            let b = solve_relaxation(&inst, &cfg).unwrap();
            assert!((a.value - b.value).abs() < 1e-6);
            let rep = solve_concave_beta(&inst, &cfg.clone().with_trials(50)).unwrap();
            assert_eq!(rep.guarantee_bound, 1.0);
        }
    }

    #[test]
    fn product_form_matches_welfare_on_allocations() {
        let inst = normalized_instance(6, 4, 3, sqrt());
        let a = Allocation::new(vec![0, 2, 2, 1], 3).unwrap();
        let x = a.to_binary(3);
        let lhs = product_form_value(&inst, x.view()).unwrap();
        assert!((lhs - crate::instance::welfare(&inst, &a).unwrap()).abs() < 1e-12);
        assert!((fractional_welfare(&inst, x.view()).unwrap() - lhs).abs() < 1e-12);
    }

    #[test]
    fn rejects_other_regimes() {
        let inst = Instance::new(
            SignRegime::PositiveLinear,
            vec![array![[1.0, 0.0], [0.0, 1.0]]],
            ExternalitySpec::Linear,
        )
        .unwrap();
        assert!(matches!(
            primal_dual_solve(&inst, &SolverConfig::default()),
            Err(Error::UnsupportedRegime { .. })
        ));
    }
}
