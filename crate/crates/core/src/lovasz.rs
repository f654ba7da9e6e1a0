//! Lovász-extension relaxation for positive convex externalities and the
//! iterative threshold rounding that turns its solution into an allocation.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ascent::{projected_supergradient_ascent, ConcaveObjective};
use crate::config::SolverConfig;
use crate::error::{invalid, Error, Result};
use crate::instance::{Allocation, FractionalAllocation, Instance};
use crate::pipeline::{build_report, run_trials, summarize};
use crate::report::{Algorithm, Diagnostics, GuaranteeBasis, SolveReport};
use crate::seed::{threshold, SolverRng};
use crate::stats::{Estimate, RunningStats};

/// Highest externality degree the monomial expansion accepts.
pub const MAX_EXPANSION_DEGREE: usize = 3;
/// Rounding gives up after `KT_ROUND_FACTOR * n * m` draws.
pub const KT_ROUND_FACTOR: usize = 50;

fn require_linear(inst: &Instance, operation: &'static str) -> Result<()> {
    if inst.regime().is_positive() && inst.is_all_linear() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime {
            operation,
            expected: "positive-linear",
            found: inst.regime(),
        })
    }
}

fn require_convex(inst: &Instance, operation: &'static str) -> Result<usize> {
    match inst.max_degree() {
        Some(d) if inst.regime().is_positive() => Ok(d),
        _ => Err(Error::UnsupportedRegime {
            operation,
            expected: "positive-linear or positive-convex",
            found: inst.regime(),
        }),
    }
}

/// `sum_i sum_j f_ij(sum_k a^i_jk min(x_ji, x_ki))`. With linear `f` this is
/// the closed-form Lovász extension.
pub(crate) struct MinComposite<'a> {
    pub inst: &'a Instance,
}

impl ConcaveObjective for MinComposite<'_> {
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        let inst = self.inst;
        let mut total = 0.0;
        for i in 0..inst.m() {
            let w = inst.weights(i);
            let col = x.column(i);
            for j in 0..inst.n() {
                let xj = col[j];
                let y: f64 = w
                    .row(j)
                    .iter()
                    .zip(col.iter())
                    .map(|(a, xk)| a * xj.min(*xk))
                    .sum();
                total += inst.externality(i, j).value(y);
            }
        }
        total
    }

    fn supergradient(&self, x: ArrayView2<'_, f64>, g: &mut Array2<f64>) {
        let inst = self.inst;
        g.fill(0.0);
        for i in 0..inst.m() {
            let w = inst.weights(i);
            let col = x.column(i);
            for j in 0..inst.n() {
                let xj = col[j];
                let row = w.row(j);
                let y: f64 = row
                    .iter()
                    .zip(col.iter())
                    .map(|(a, xk)| a * xj.min(*xk))
                    .sum();
                let scale = inst.externality(i, j).derivative(y);
                if scale == 0.0 {
                    continue;
                }
                for (k, &a) in row.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let mass = scale * a;
                    let xk = col[k];
                    if k == j || xj < xk {
                        g[[j, i]] += mass;
                    } else if xk < xj {
                        g[[k, i]] += mass;
                    } else {
                        g[[j, i]] += 0.5 * mass;
                        g[[k, i]] += 0.5 * mass;
                    }
                }
            }
        }
    }
}

/// `sum_i sum_{j,k} a^i_jk min(x_ji, x_ki)`.
pub fn lovasz_linear_closed_form(inst: &Instance, x: &FractionalAllocation) -> Result<f64> {
    require_linear(inst, "closed-form Lovász extension")?;
    inst.check_shape(x.view())?;
    Ok(MinComposite { inst }.value(x.view()))
}

/// Monte Carlo Lovász extension: each sample thresholds every column at its
/// own uniform level and evaluates the set objective.
pub fn lovasz_sampled(
    inst: &Instance,
    x: &FractionalAllocation,
    samples: usize,
    rng: &mut SolverRng,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    inst.check_shape(x.view())?;
    let mut stats = RunningStats::new();
    let mut in_set = vec![false; inst.n()];
    for _ in 0..samples {
        let mut v = 0.0;
        for i in 0..inst.m() {
            let theta = threshold(rng);
            let col = x.column(i);
            in_set
                .iter_mut()
                .zip(col.iter())
                .for_each(|(s, &xj)| *s = xj >= theta);
            v += inst.set_value(i, &in_set);
        }
        stats.push(v);
    }
    Ok(stats.estimate())
}

/// Sorted-threshold evaluation of one column's extension. Fills `grad` (when
/// given) with the greedy marginals `f(S_k) - f(S_{k-1})`.
fn greedy_column(inst: &Instance, item: usize, col: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
    let n = inst.n();
    let w = inst.weights(item);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[b].total_cmp(&col[a]).then(a.cmp(&b)));
    let mut y = vec![0.0; n];
    let mut members: Vec<usize> = Vec::with_capacity(n);
    let mut prev = 0.0;
    let mut total = 0.0;
    for &l in &order {
        for &j in &members {
            y[j] += w[[j, l]];
        }
        members.push(l);
        y[l] = members.iter().map(|&k| w[[l, k]]).sum();
        let f_s: f64 = members
            .iter()
            .map(|&j| inst.externality(item, j).value(y[j]))
            .sum();
        let marginal = f_s - prev;
        prev = f_s;
        total += col[l] * marginal;
        if let Some(g) = grad.as_deref_mut() {
            g[l] = marginal;
        }
    }
    total
}

/// Exact Lovász extension of the set objective via the sorted greedy formula.
pub fn lovasz_greedy(inst: &Instance, x: &FractionalAllocation) -> Result<f64> {
    inst.check_shape(x.view())?;
    Ok(GreedyLovasz { inst }.value(x.view()))
}

struct GreedyLovasz<'a> {
    inst: &'a Instance,
}

impl ConcaveObjective for GreedyLovasz<'_> {
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        (0..self.inst.m())
            .map(|i| greedy_column(self.inst, i, &x.column(i).to_vec(), None))
            .sum()
    }

    fn supergradient(&self, x: ArrayView2<'_, f64>, g: &mut Array2<f64>) {
        let mut buf = vec![0.0; self.inst.n()];
        for i in 0..self.inst.m() {
            greedy_column(self.inst, i, &x.column(i).to_vec(), Some(&mut buf));
            g.column_mut(i)
                .iter_mut()
                .zip(&buf)
                .for_each(|(d, s)| *d = *s);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LovaszTerm {
    pub item: usize,
    /// Distinct agents, increasing.
    pub agents: Vec<usize>,
    pub coefficient: f64,
}

/// The objective as a nonnegative combination of monomials over distinct
/// binary variables; its Lovász extension replaces each monomial by a min.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedLovasz {
    pub n: usize,
    pub m: usize,
    pub terms: Vec<LovaszTerm>,
    /// Largest monomial arity, one more than the externality degree.
    pub degree_bound: usize,
}

/// Expands `sum_j f_ij(sum_k a^i_jk x_ji x_ki)` for polynomial `f_ij` using
/// `x^t = x` on binary variables. Terms are keyed by agent sets, so `x_j x_k`
/// collects both `a_jk` and `a_kj`.
pub fn expand_polynomial(inst: &Instance) -> Result<ExpandedLovasz> {
    let degree = require_convex(inst, "polynomial expansion")?;
    if degree > MAX_EXPANSION_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree,
            max: MAX_EXPANSION_DEGREE,
        });
    }
    let n = inst.n();
    let mut acc: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
    for i in 0..inst.m() {
        let w = inst.weights(i);
        for j in 0..n {
            let coeffs = inst
                .externality(i, j)
                .coefficients()
                .expect("convex family");
            let support: Vec<usize> = (0..n).filter(|&k| w[[j, k]] != 0.0).collect();
            for (t_minus_1, &c) in coeffs.iter().enumerate() {
                if c == 0.0 || support.is_empty() {
                    continue;
                }
                let t = t_minus_1 + 1;
                // odometer over t-tuples drawn from the support
                let mut idx = vec![0usize; t];
                loop {
                    let mut set: Vec<usize> = idx.iter().map(|&p| support[p]).collect();
                    let coef = c * set.iter().map(|&k| w[[j, k]]).product::<f64>();
                    set.push(j);
                    set.sort_unstable();
                    set.dedup();
                    *acc.entry((i, set)).or_insert(0.0) += coef;

                    let mut pos = 0;
                    while pos < t {
                        idx[pos] += 1;
                        if idx[pos] < support.len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                    if pos == t {
                        break;
                    }
                }
            }
        }
    }
    let terms: Vec<LovaszTerm> = acc
        .into_iter()
        .filter(|(_, b)| *b != 0.0)
        .map(|((item, agents), coefficient)| LovaszTerm {
            item,
            agents,
            coefficient,
        })
        .collect();
    Ok(ExpandedLovasz {
        n,
        m: inst.m(),
        terms,
        degree_bound: degree + 1,
    })
}

impl ExpandedLovasz {
    fn check(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.dim() != (self.n, self.m) {
            return Err(invalid(format!(
                "matrix has shape {:?}, expansion needs ({}, {})",
                x.dim(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }

    pub fn total_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }
}

impl ConcaveObjective for ExpandedLovasz {
    fn value(&self, x: ArrayView2<'_, f64>) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let lo = t
                    .agents
                    .iter()
                    .map(|&j| x[[j, t.item]])
                    .fold(f64::INFINITY, f64::min);
                t.coefficient * lo
            })
            .sum()
    }

    fn supergradient(&self, x: ArrayView2<'_, f64>, g: &mut Array2<f64>) {
        g.fill(0.0);
        for t in &self.terms {
            let lo = t
                .agents
                .iter()
                .map(|&j| x[[j, t.item]])
                .fold(f64::INFINITY, f64::min);
            let ties = t.agents.iter().filter(|&&j| x[[j, t.item]] == lo).count();
            let share = t.coefficient / ties as f64;
            for &j in t.agents.iter().filter(|&&j| x[[j, t.item]] == lo) {
                g[[j, t.item]] += share;
            }
        }
    }
}

/// `sum_terms b * min_{j in term} x_{j, item}`.
pub fn eval_expanded_lovasz(exp: &ExpandedLovasz, x: &FractionalAllocation) -> Result<f64> {
    exp.check(x.view())?;
    Ok(exp.value(x.view()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxationMethod {
    /// Pairwise-min closed form (linear externalities).
    ClosedForm,
    /// Monomial expansion (degree up to [`MAX_EXPANSION_DEGREE`]).
    Expanded,
    /// Sorted greedy formula (any degree; experimental).
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSolution {
    pub x: FractionalAllocation,
    pub value: f64,
    pub iterations: usize,
    pub solver_log: Vec<(usize, f64)>,
    pub not_converged: bool,
    pub method: RelaxationMethod,
}

/// Maximizes the Lovász extension over row-stochastic matrices by projected
/// supergradient ascent from the uniform matrix.
pub fn solve_relaxation(inst: &Instance, cfg: &SolverConfig) -> Result<RelaxationSolution> {
    let degree = require_convex(inst, "Lovász relaxation")?;
    let x0 = FractionalAllocation::uniform(inst.n(), inst.m()).into_inner();
    let (out, method) = if inst.is_all_linear() {
        let obj = MinComposite { inst };
        (
            projected_supergradient_ascent(&obj, x0, cfg),
            RelaxationMethod::ClosedForm,
        )
    } else if degree <= MAX_EXPANSION_DEGREE {
        let obj = expand_polynomial(inst)?;
        (
            projected_supergradient_ascent(&obj, x0, cfg),
            RelaxationMethod::Expanded,
        )
    } else {
        let obj = GreedyLovasz { inst };
        (
            projected_supergradient_ascent(&obj, x0, cfg),
            RelaxationMethod::Greedy,
        )
    };
    Ok(RelaxationSolution {
        x: FractionalAllocation::from_array_unchecked(out.x),
        value: out.value,
        iterations: out.iterations,
        solver_log: out.log,
        not_converged: !out.converged,
        method,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KtRounding {
    pub allocation: Allocation,
    pub rounds: usize,
    /// Agents placed by the row-argmax fallback after the round cap.
    pub fallback_agents: usize,
}

/// Iterative rounding: draw an item, then a threshold, and give that item to
/// every unassigned agent whose entry reaches the threshold. Stops after
/// `KT_ROUND_FACTOR * n * m` draws and places leftovers on their row argmax.
pub fn kt_round(x: &FractionalAllocation, rng: &mut SolverRng) -> KtRounding {
    let (n, m) = (x.n(), x.m());
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut left = n;
    let cap = KT_ROUND_FACTOR * n * m;
    let mut rounds = 0;
    while left > 0 && rounds < cap {
        rounds += 1;
        let i = rng.random_range(0..m);
        let theta = threshold(rng);
        for (j, slot) in assign.iter_mut().enumerate() {
            if slot.is_none() && x.get(j, i) >= theta {
                *slot = Some(i);
                left -= 1;
            }
        }
    }
    let assign: Vec<usize> = assign
        .into_iter()
        .enumerate()
        .map(|(j, a)| a.unwrap_or_else(|| x.row_argmax(j)))
        .collect();
    KtRounding {
        allocation: Allocation::from_vec_unchecked(assign),
        rounds,
        fallback_agents: left,
    }
}

/// Relaxation plus iterative rounding. `LovaszKt` needs linear externalities;
/// `PolyLovaszKt` accepts any convex polynomial family.
pub fn solve_lovasz_kt(
    inst: &Instance,
    cfg: &SolverConfig,
    algorithm: Algorithm,
) -> Result<SolveReport> {
    let started = Instant::now();
    let bound = match algorithm {
        Algorithm::LovaszKt => {
            require_linear(inst, "lovasz-kt")?;
            0.5
        }
        Algorithm::PolyLovaszKt => {
            let d = require_convex(inst, "poly-lovasz-kt")?;
            1.0 / (d + 1).max(1) as f64
        }
        other => {
            return Err(invalid(format!(
                "{} is not a Lovász rounding pipeline",
                other.name()
            )))
        }
    };
    let relax = solve_relaxation(inst, cfg)?;
    let rounds = run_trials(cfg, |rng| kt_round(&relax.x, rng))?;
    let summary = summarize(inst, rounds.iter().map(|r| r.allocation.assign()));
    let diagnostics = Diagnostics {
        fractional_objective: Some(relax.value),
        fallback_runs: rounds.iter().filter(|r| r.fallback_agents > 0).count(),
        not_converged: relax.not_converged,
        relaxation_iterations: Some(relax.iterations),
        ..Diagnostics::default()
    };
    Ok(build_report(
        inst,
        cfg,
        algorithm,
        summary,
        Some(relax.value),
        bound,
        GuaranteeBasis::Opt,
        diagnostics,
        started,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{welfare_binary, ExternalitySpec, SignRegime};
    use crate::seed::rng;
    use ndarray::array;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn two_by_two() -> Instance {
        Instance::new(
            SignRegime::PositiveLinear,
            vec![
                array![[1.0, 2.0], [0.0, 1.0]],
                array![[2.0, 0.0], [1.0, 3.0]],
            ],
            ExternalitySpec::Linear,
        )
        .unwrap()
    }

    fn random_instance(seed: u64, n: usize, m: usize, spec: ExternalitySpec) -> Instance {
        let mut r = rng(seed);
        let regime = if spec == ExternalitySpec::Linear {
            SignRegime::PositiveLinear
        } else {
            SignRegime::PositiveConvex
        };
        let weights = (0..m)
            .map(|_| Array2::from_shape_fn((n, n), |_| r.random::<f64>()))
            .collect();
        Instance::new(regime, weights, spec).unwrap()
    }

    fn random_x(seed: u64, n: usize, m: usize) -> FractionalAllocation {
        let mut r = rng(seed);
        let mut x = Array2::from_shape_fn((n, m), |_| r.random::<f64>());
        for mut row in x.rows_mut() {
            let s = row.sum();
            row.mapv_inplace(|v| v / s);
        }
        FractionalAllocation::from_array_unchecked(x)
    }

    fn random_binary(seed: u64, n: usize, m: usize) -> FractionalAllocation {
        let mut r = rng(seed);
        let assign = (0..n).map(|_| r.random_range(0..m)).collect();
        FractionalAllocation::from_allocation(&Allocation::new(assign, m).unwrap(), m)
    }

    #[test]
    fn closed_form_half_column() {
        let inst = Instance::new(
            SignRegime::PositiveLinear,
            vec![array![[1.0, 2.0], [0.0, 1.0]], Array2::zeros((2, 2))],
            ExternalitySpec::Linear,
        )
        .unwrap();
        let x = FractionalAllocation::new(array![[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert_eq!(lovasz_linear_closed_form(&inst, &x).unwrap(), 2.0);
        let est = lovasz_sampled(&inst, &x, 4000, &mut rng(3)).unwrap();
        assert!((est.mean - 2.0).abs() <= 3.0 * est.stderr);
    }

    #[test]
    fn closed_form_rejects_other_regimes() {
        let inst = random_instance(1, 3, 2, ExternalitySpec::Polynomial(vec![0.0, 1.0]));
        let x = FractionalAllocation::uniform(3, 2);
        assert!(matches!(
            lovasz_linear_closed_form(&inst, &x),
            Err(Error::UnsupportedRegime { .. })
        ));
    }

    #[test]
    fn grand_coalition_column() {
        let inst = Instance::new(
            SignRegime::PositiveLinear,
            vec![array![[1.0, 2.0], [0.0, 1.0]]],
            ExternalitySpec::Linear,
        )
        .unwrap();
        let x = FractionalAllocation::uniform(2, 1);
        assert_eq!(lovasz_linear_closed_form(&inst, &x).unwrap(), 4.0);
    }

    #[test]
    fn binary_points_agree_everywhere() {
        for s in 0..20 {
            let lin = random_instance(s, 5, 3, ExternalitySpec::Linear);
            let sq = random_instance(s, 5, 3, ExternalitySpec::Polynomial(vec![0.5, 1.0, 0.25]));
            let x = random_binary(100 + s, 5, 3);
            let w_lin = welfare_binary(&lin, x.view()).unwrap();
            let w_sq = welfare_binary(&sq, x.view()).unwrap();
            assert!((lovasz_linear_closed_form(&lin, &x).unwrap() - w_lin).abs() < 1e-9);
            assert!((lovasz_greedy(&lin, &x).unwrap() - w_lin).abs() < 1e-9);
            let exp = expand_polynomial(&sq).unwrap();
            assert!((eval_expanded_lovasz(&exp, &x).unwrap() - w_sq).abs() < 1e-9);
            assert!((lovasz_greedy(&sq, &x).unwrap() - w_sq).abs() < 1e-9);
            let est = lovasz_sampled(&sq, &x, 10, &mut rng(s)).unwrap();
            assert!((est.mean - w_sq).abs() < 1e-9);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn square_expansion_example() {
        let inst = Instance::new(
            SignRegime::PositiveConvex,
            vec![array![[1.0, 1.0], [0.0, 0.0]]],
            ExternalitySpec::Polynomial(vec![0.0, 1.0]),
        )
        .unwrap();
        let exp = expand_polynomial(&inst).unwrap();
        assert_eq!(exp.degree_bound, 3);
        let got: Vec<(Vec<usize>, f64)> = exp
            .terms
            .iter()
            .map(|t| (t.agents.clone(), t.coefficient))
            .collect();
        assert_eq!(got, vec![(vec![0], 1.0), (vec![0, 1], 3.0)]);
        // both sides on the four binary points of a single column
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            let direct = (a * (a + b)) * (a * (a + b));
            assert_eq!(exp.value(array![[a], [b]].view()), direct);
        }
    }

    #[test]
    fn linear_expansion_is_the_weights() {
        let inst = two_by_two();
        let exp = expand_polynomial(&inst).unwrap();
        assert_eq!(exp.degree_bound, 2);
        let find = |item: usize, agents: &[usize]| {
            exp.terms
                .iter()
                .find(|t| t.item == item && t.agents == agents)
                .map(|t| t.coefficient)
        };
        assert_eq!(find(0, &[0]), Some(1.0));
        assert_eq!(find(0, &[0, 1]), Some(2.0));
        assert_eq!(find(1, &[0, 1]), Some(1.0));
        assert_eq!(find(1, &[1]), Some(3.0));
        let x = FractionalAllocation::uniform(2, 2);
        assert!(
            (eval_expanded_lovasz(&exp, &x).unwrap() - exp.total_coefficient() / 2.0).abs() < 1e-12
        );
    }

    #[test]
    fn expansion_rejects_high_degree() {
        let inst = random_instance(
            2,
            3,
            2,
            ExternalitySpec::Polynomial(vec![0.0, 0.0, 0.0, 1.0]),
        );
        assert!(matches!(
            expand_polynomial(&inst),
            Err(Error::UnsupportedDegree { degree: 4, max: 3 })
        ));
        let x = FractionalAllocation::uniform(3, 2);
        let exp = expand_polynomial(&random_instance(2, 3, 2, ExternalitySpec::Linear)).unwrap();
        let wrong = FractionalAllocation::uniform(4, 2);
        assert!(eval_expanded_lovasz(&exp, &wrong).is_err());
        assert!(eval_expanded_lovasz(&exp, &x).is_ok());
    }

    #[test]
    fn fractional_evaluations_agree() {
        for s in 0..10 {
            let lin = random_instance(s, 5, 2, ExternalitySpec::Linear);
            let sq = random_instance(s, 5, 2, ExternalitySpec::Polynomial(vec![0.0, 1.0]));
            let x = random_x(50 + s, 5, 2);
            let cf = lovasz_linear_closed_form(&lin, &x).unwrap();
            assert!((lovasz_greedy(&lin, &x).unwrap() - cf).abs() < 1e-9);
            let est = lovasz_sampled(&lin, &x, 3000, &mut rng(s)).unwrap();
            assert!((est.mean - cf).abs() <= 3.0 * est.stderr + 1e-12);

            let ev = eval_expanded_lovasz(&expand_polynomial(&sq).unwrap(), &x).unwrap();
            assert!((lovasz_greedy(&sq, &x).unwrap() - ev).abs() < 1e-9);
        }
    }

    #[test]
    fn relaxation_single_item() {
        let inst = Instance::new(
            SignRegime::PositiveLinear,
            vec![array![[1.0, 2.0], [0.0, 1.0]]],
            ExternalitySpec::Linear,
        )
        .unwrap();
        let sol = solve_relaxation(&inst, &SolverConfig::default()).unwrap();
        assert!(sol.x.view().iter().all(|&v| v == 1.0));
        assert_eq!(sol.value, 4.0);
    }

    #[test]
    fn relaxation_two_by_two_against_grid() {
        let inst = two_by_two();
        let sol = solve_relaxation(&inst, &SolverConfig::default()).unwrap();
        // grid over row-stochastic 2x2 matrices, 101 points per row
        let obj = MinComposite { inst: &inst };
        let mut grid_max = f64::NEG_INFINITY;
        for a in 0..=100 {
            for b in 0..=100 {
                let (p, q) = (a as f64 / 100.0, b as f64 / 100.0);
                let x = array![[p, 1.0 - p], [q, 1.0 - q]];
                grid_max = grid_max.max(obj.value(x.view()));
            }
        }
        assert!(sol.value >= 6.0);
        assert!(sol.value >= grid_max - 1e-6);
        assert!(sol.value <= 12.0);
        for row in sol.x.view().rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kt_recovers_binary() {
        for s in 0..20 {
            let x = random_binary(s, 6, 3);
            let expected = Allocation::from_binary(x.view()).unwrap();
            let r = kt_round(&x, &mut rng(s));
            assert_eq!(r.allocation, expected);
            assert_eq!(r.fallback_agents, 0);
        }
    }

    #[test]
    fn kt_pipeline_on_two_by_two() {
        let inst = two_by_two();
        let mut rep =
            solve_lovasz_kt(&inst, &SolverConfig::default(), Algorithm::LovaszKt).unwrap();
        rep.attach_oracle(6.0, crate::report::RATIO_TOLERANCE);
        assert!(rep.relaxation_value.unwrap() >= 6.0);
        assert!(rep.empirical_ratio.unwrap() >= 0.5);
        assert_eq!(rep.bound_ok, Some(true));
        assert_eq!(rep.guarantee_bound, 0.5);
    }

    #[test]
    fn kt_pipeline_rejects_convex_for_linear_path() {
        let inst = random_instance(4, 3, 2, ExternalitySpec::Polynomial(vec![0.0, 1.0]));
        assert!(solve_lovasz_kt(&inst, &SolverConfig::default(), Algorithm::LovaszKt).is_err());
        let rep =
            solve_lovasz_kt(&inst, &SolverConfig::default(), Algorithm::PolyLovaszKt).unwrap();
        assert!((rep.guarantee_bound - 1.0 / 3.0).abs() < 1e-15);
    }

    fn ascent_direction_does_not_decrease(
        obj: &impl ConcaveObjective,
        x: &FractionalAllocation,
    ) -> bool {
        let mut g = Array2::zeros(x.view().dim());
        obj.supergradient(x.view(), &mut g);
        let base = obj.value(x.view());
        let mut y = x.view().to_owned() + &(&g * 1e-4);
        crate::simplex::project_rows_in_place(&mut y);
        obj.value(y.view()) >= base - 1e-9
    }

    #[test]
    fn supergradient_steps_ascend() {
        for s in 0..20 {
            let lin = random_instance(s, 5, 3, ExternalitySpec::Linear);
            let sq = random_instance(s, 5, 3, ExternalitySpec::Polynomial(vec![1.0, 1.0]));
            let x = random_x(200 + s, 5, 3);
            assert!(ascent_direction_does_not_decrease(
                &MinComposite { inst: &lin },
                &x
            ));
            assert!(ascent_direction_does_not_decrease(
                &expand_polynomial(&sq).unwrap(),
                &x
            ));
            assert!(ascent_direction_does_not_decrease(
                &GreedyLovasz { inst: &sq },
                &x
            ));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kt_round_is_always_valid(seed in any::<u64>(), n in 1usize..9, m in 1usize..4) {
            let x = random_x(seed, n, m);
            let r = kt_round(&x, &mut rng(seed ^ 1));
            prop_assert_eq!(r.allocation.n(), n);
            prop_assert!(r.allocation.assign().iter().all(|&i| i < m));
        }
    }
}
