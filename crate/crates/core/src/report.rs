//! Solver reports shared by every pipeline.

use serde::{Deserialize, Serialize};

use crate::instance::{Allocation, SignRegime};

/// Default slack on `measured / reference` when checking a guarantee.
pub const RATIO_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    LovaszKt,
    PolyLovaszKt,
    ConvexFcr,
    ConcavePd,
    ConcaveBeta,
    NegativeCg,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::LovaszKt,
        Algorithm::PolyLovaszKt,
        Algorithm::ConvexFcr,
        Algorithm::ConcavePd,
        Algorithm::ConcaveBeta,
        Algorithm::NegativeCg,
        Algorithm::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LovaszKt => "lovasz-kt",
            Algorithm::PolyLovaszKt => "poly-lovasz-kt",
            Algorithm::ConvexFcr => "convex-fcr",
            Algorithm::ConcavePd => "concave-pd",
            Algorithm::ConcaveBeta => "concave-beta",
            Algorithm::NegativeCg => "negative-cg",
            Algorithm::Oracle => "oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// What the guarantee multiplies, and which measured mean it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuaranteeBasis {
    /// Mean rounded welfare against the exhaustive optimum.
    Opt,
    /// Mean rounded welfare against the fractional objective at the rounded point.
    FractionalObjective,
    /// Mean objective of the threshold-rounded (pre-resolution) matrix against
    /// the relaxation value.
    StageOneRelaxation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub beta_unbounded: bool,
    pub gamma_quarter: Option<f64>,
    /// Best dual value minus the fractional objective at the projected primal.
    pub duality_gap: Option<f64>,
    /// The dual values come from local inner maximizations.
    pub dual_is_estimate: bool,
    /// `||sum_i x_i(k*) - 1||` before projection.
    pub primal_infeasibility: Option<f64>,
    /// Fractional objective at the point handed to rounding.
    pub fractional_objective: Option<f64>,
    /// Mean objective of the stage-one threshold matrix.
    pub stage_one_mean: Option<f64>,
    /// Mean welfare before unassigned agents are patched.
    pub partial_welfare_mean: Option<f64>,
    /// Rounding runs that hit the round cap and used the argmax fallback.
    pub fallback_runs: usize,
    /// Agents given an item whose marginal welfare was not positive.
    pub forced_assignments: usize,
    pub not_converged: bool,
    pub relaxation_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance_id: u64,
    pub algorithm: Algorithm,
    pub regime: SignRegime,
    pub n: usize,
    pub m: usize,
    pub relaxation_value: Option<f64>,
    pub rounded_welfare_mean: f64,
    pub rounded_welfare_stderr: f64,
    pub trials: usize,
    pub best_allocation: Allocation,
    pub best_welfare: f64,
    pub oracle_opt: Option<f64>,
    pub empirical_ratio: Option<f64>,
    pub guarantee_bound: f64,
    pub guarantee_basis: GuaranteeBasis,
    pub bound_ok: Option<bool>,
    pub diagnostics: Diagnostics,
    pub wall_time_ms: f64,
}

impl SolveReport {
    /// Records the exhaustive optimum and refreshes the ratio and bound check.
    pub fn attach_oracle(&mut self, opt: f64, tolerance: f64) {
        self.oracle_opt = Some(opt);
        self.empirical_ratio = Some(ratio(self.rounded_welfare_mean, opt));
        self.evaluate_bound(tolerance);
    }

    /// `(measured, reference)` for the guarantee, when both are known.
    pub fn guarantee_terms(&self) -> Option<(f64, f64)> {
        match self.guarantee_basis {
            GuaranteeBasis::Opt => self.oracle_opt.map(|o| (self.rounded_welfare_mean, o)),
            GuaranteeBasis::FractionalObjective => self
                .diagnostics
                .fractional_objective
                .map(|f| (self.rounded_welfare_mean, f)),
            GuaranteeBasis::StageOneRelaxation => {
                if self.diagnostics.beta_unbounded {
                    return None;
                }
                self.diagnostics.stage_one_mean.zip(self.relaxation_value)
            }
        }
    }

    pub fn evaluate_bound(&mut self, tolerance: f64) {
        self.bound_ok = self.guarantee_terms().map(|(measured, reference)| {
            ratio(measured, reference) >= self.guarantee_bound - tolerance
        });
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num >= 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        num / den
    }
}
