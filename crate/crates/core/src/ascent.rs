//! Projected supergradient ascent over row-stochastic matrices.

use ndarray::{Array2, ArrayView2, Axis};

use crate::config::SolverConfig;
use crate::simplex::project_rows_in_place;

/// A concave objective on `n x m` matrices with a supergradient oracle.
pub(crate) trait ConcaveObjective {
    fn value(&self, x: ArrayView2<'_, f64>) -> f64;
    /// Writes a supergradient at `x` into `g` (same shape, overwritten).
    fn supergradient(&self, x: ArrayView2<'_, f64>, g: &mut Array2<f64>);
}

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub x: Array2<f64>,
    pub value: f64,
    pub iterations: usize,
    pub log: Vec<(usize, f64)>,
    pub converged: bool,
}

const LOG_EVERY: usize = 10;
const CANDIDATE_EVERY: usize = 50;

fn max_column_norm(g: &Array2<f64>) -> f64 {
    g.axis_iter(Axis(1))
        .map(|c| c.dot(&c).sqrt())
        .fold(0.0, f64::max)
}

fn consider(cand: &Array2<f64>, v: f64, best_x: &mut Array2<f64>, best_v: &mut f64) {
    if v > *best_v {
        *best_v = v;
        best_x.assign(cand);
    }
}

pub(crate) fn row_argmax_vertex(x: &Array2<f64>) -> Array2<f64> {
    let mut v = Array2::zeros(x.dim());
    for (j, row) in x.rows().into_iter().enumerate() {
        let i = crate::instance::argmax_lowest(row.iter().copied());
        v[[j, i]] = 1.0;
    }
    v
}

/// Maximizes `obj` from `x0` with steps `c / sqrt(t)` along a supergradient,
/// `c = step_constant / (largest column norm of the supergradient at x0)`,
/// followed by row-wise simplex projection. The best iterate is returned;
/// the row-argmax vertex of the iterate is also tried every few steps since
/// every vertex is feasible.
pub(crate) fn projected_supergradient_ascent(
    obj: &impl ConcaveObjective,
    x0: Array2<f64>,
    cfg: &SolverConfig,
) -> AscentOutcome {
    let mut x = x0;
    project_rows_in_place(&mut x);
    let mut g = Array2::zeros(x.dim());
    obj.supergradient(x.view(), &mut g);
    let g0 = max_column_norm(&g);

    let mut best_x = x.clone();
    let mut best_v = obj.value(x.view());
    let mut log = vec![(0, best_v)];

    if g0 == 0.0 || cfg.max_iters == 0 {
        return AscentOutcome {
            x: best_x,
            value: best_v,
            iterations: 0,
            log,
            converged: g0 == 0.0,
        };
    }
    let c = cfg.step_constant / g0;

    let mut converged = false;
    let mut iterations = 0;
    for t in 1..=cfg.max_iters {
        iterations = t;
        obj.supergradient(x.view(), &mut g);
        let step = c / (t as f64).sqrt();
        let mut next = &x + &(&g * step);
        project_rows_in_place(&mut next);
        let moved = (&next - &x).mapv(|v| v * v).sum().sqrt();
        x = next;
        let v = obj.value(x.view());
        consider(&x, v, &mut best_x, &mut best_v);
        if t % LOG_EVERY == 0 {
            log.push((t, v));
        }
        if t % CANDIDATE_EVERY == 0 {
            let vert = row_argmax_vertex(&x);
            let vv = obj.value(vert.view());
            consider(&vert, vv, &mut best_x, &mut best_v);
        }
        if moved < cfg.tolerance {
            converged = true;
            break;
        }
    }
    for cand in [row_argmax_vertex(&x), row_argmax_vertex(&best_x)] {
        let v = obj.value(cand.view());
        consider(&cand, v, &mut best_x, &mut best_v);
    }
    if log.last().map(|l| l.0) != Some(iterations) {
        log.push((iterations, obj.value(x.view())));
    }
    AscentOutcome {
        x: best_x,
        value: best_v,
        iterations,
        log,
        converged,
    }
}
