//! Curvature diagnostics for externality functions.

use serde::{Deserialize, Serialize};

use super::{ExternalitySpec, FractionalAllocation, Instance};
use crate::error::{invalid, Error, Result};

const GAMMA_GRID_POINTS: usize = 512;
const GAMMA_Z_MAX: f64 = 1e4;

const BETA_GRID_POINTS: usize = 400;
const BETA_GRID_MIN: f64 = 0.01;
/// Probe factor below the grid floor used to detect a supremum that keeps
/// growing at the boundary.
const BETA_PROBE_SHRINK: f64 = 1e-3;
const BETA_GROWTH_TOL: f64 = 0.05;

/// `inf_{z >= 1} f(alpha z) / f(z)` for a convex externality.
///
/// Evaluated on a log-spaced grid over `[1, 1e4]` together with the `z -> inf`
/// limit `alpha^deg`. The zero polynomial has no well-defined ratio and is
/// reported as 1.
pub fn gamma_curvature(spec: &ExternalitySpec, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let Some(degree) = spec.degree() else {
        return Err(Error::UnsupportedFamily {
            family: spec.family_name(),
            operation: "gamma_curvature",
        });
    };
    if degree == 0 {
        return Ok(1.0);
    }
    let mut inf = alpha.powi(degree as i32);
    let step = GAMMA_Z_MAX.ln() / (GAMMA_GRID_POINTS - 1) as f64;
    for t in 0..GAMMA_GRID_POINTS {
        let z = (t as f64 * step).exp();
        let ratio = spec.value(alpha * z) / spec.value(z);
        inf = inf.min(ratio);
    }
    Ok(inf.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaCurvature {
    pub value: f64,
    /// The supremum keeps growing below the grid floor; `value` is clipped.
    pub unbounded: bool,
}

/// `sup_X f(E X) / E f(X)` over `[0,1]`-valued `X`, searched over two-point
/// laws on `{0, y}` with mass `q` on `y`, where the ratio is
/// `f(q y) / (q f(y))`.
pub fn beta_curvature(spec: &ExternalitySpec) -> Result<BetaCurvature> {
    if !spec.is_concave() {
        return Err(Error::UnsupportedFamily {
            family: spec.family_name(),
            operation: "beta_curvature",
        });
    }
    if spec.degree().is_some() {
        // linear on [0, 1]: Jensen holds with equality
        return Ok(BetaCurvature {
            value: 1.0,
            unbounded: false,
        });
    }
    let ratio = |q: f64, y: f64| spec.value(q * y) / (q * spec.value(y));
    let h = (1.0 - BETA_GRID_MIN) / (BETA_GRID_POINTS - 1) as f64;
    let mut sup = 1.0f64;
    let mut arg_y = 1.0;
    for a in 0..BETA_GRID_POINTS {
        let q = BETA_GRID_MIN + a as f64 * h;
        for b in 0..BETA_GRID_POINTS {
            let y = BETA_GRID_MIN + b as f64 * h;
            let r = ratio(q, y);
            if r > sup {
                sup = r;
                arg_y = y;
            }
        }
    }
    let probe = ratio(BETA_GRID_MIN * BETA_PROBE_SHRINK, arg_y);
    Ok(BetaCurvature {
        value: sup,
        unbounded: probe > sup * (1.0 + BETA_GROWTH_TOL),
    })
}

/// `min_{i,j} (a^i_j . x_i) / ||a^i_j||_2`, skipping all-zero weight rows.
/// Returns `+inf` when every row is zero.
pub fn eta(inst: &Instance, x: &FractionalAllocation) -> Result<f64> {
    inst.check_shape(x.view())?;
    let mut best = f64::INFINITY;
    for i in 0..inst.m() {
        let w = inst.weights(i);
        let col = x.column(i);
        for row in w.rows() {
            let norm = row.dot(&row).sqrt();
            if norm == 0.0 {
                continue;
            }
            best = best.min(row.dot(&col) / norm);
        }
    }
    Ok(best)
}

/// Curvature summary for an instance, and optionally a fractional point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// `min_{i,j} Gamma_{1/4}` when every externality is convex.
    pub gamma_quarter: Option<f64>,
    /// `max_{i,j} beta` when every externality is concave.
    pub beta: Option<f64>,
    pub beta_unbounded: bool,
    pub eta: Option<f64>,
}

impl CurvatureReport {
    pub fn compute(inst: &Instance, x: Option<&FractionalAllocation>) -> Result<Self> {
        let specs = inst.externalities();
        let gamma_quarter = if specs.iter().all(ExternalitySpec::is_convex) {
            let mut g = 1.0f64;
            for s in dedup(specs) {
                g = g.min(gamma_curvature(s, 0.25)?);
            }
            Some(g)
        } else {
            None
        };
        let (beta, beta_unbounded) = if specs.iter().all(ExternalitySpec::is_concave) {
            let mut b = 1.0f64;
            let mut unbounded = false;
            for s in dedup(specs) {
                let c = beta_curvature(s)?;
                b = b.max(c.value);
                unbounded |= c.unbounded;
            }
            (Some(b), unbounded)
        } else {
            (None, false)
        };
        let eta = x.map(|x| eta(inst, x)).transpose()?;
        Ok(CurvatureReport {
            gamma_quarter,
            beta,
            beta_unbounded,
            eta,
        })
    }
}

fn dedup(specs: &[ExternalitySpec]) -> Vec<&ExternalitySpec> {
    let mut out: Vec<&ExternalitySpec> = Vec::new();
    for s in specs {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}
