//! One entry point over every pipeline.

use std::time::Instant;

use crate::concave::{solve_concave_beta, solve_concave_pd};
use crate::config::SolverConfig;
use crate::contention::solve_convex_curvature;
use crate::error::Result;
use crate::instance::Instance;
use crate::lovasz::solve_lovasz_kt;
use crate::negative::solve_negative;
use crate::oracle::brute_force;
use crate::pipeline::{build_report, summarize};
use crate::report::{Algorithm, Diagnostics, GuaranteeBasis, SolveReport, RATIO_TOLERANCE};
use crate::SignRegime;

/// Runs `algorithm` on `inst`. A regime the algorithm does not cover yields
/// [`crate::Error::UnsupportedRegime`] naming the expected regime.
pub fn solve(inst: &Instance, algorithm: Algorithm, cfg: &SolverConfig) -> Result<SolveReport> {
    match algorithm {
        Algorithm::LovaszKt | Algorithm::PolyLovaszKt => solve_lovasz_kt(inst, cfg, algorithm),
        Algorithm::ConvexFcr => solve_convex_curvature(inst, cfg),
        Algorithm::ConcavePd => solve_concave_pd(inst, cfg),
        Algorithm::ConcaveBeta => solve_concave_beta(inst, cfg),
        Algorithm::NegativeCg => solve_negative(inst, cfg),
        Algorithm::Oracle => {
            let started = Instant::now();
            let opt = brute_force(inst)?;
            let summary = summarize(inst, [opt.opt_alloc.assign()]);
            let mut report = build_report(
                inst,
                cfg,
                Algorithm::Oracle,
                summary,
                None,
                1.0,
                GuaranteeBasis::Opt,
                Diagnostics::default(),
                started,
            );
            report.attach_oracle(opt.opt_value, RATIO_TOLERANCE);
            Ok(report)
        }
    }
}

/// Like [`solve`], then attaches the exhaustive optimum.
pub fn solve_with_oracle(
    inst: &Instance,
    algorithm: Algorithm,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let mut report = solve(inst, algorithm, cfg)?;
    if report.oracle_opt.is_none() {
        report.attach_oracle(brute_force(inst)?.opt_value, RATIO_TOLERANCE);
    }
    Ok(report)
}

/// The pipeline used for a regime when none is requested.
pub fn default_algorithm(regime: SignRegime) -> Algorithm {
    match regime {
        SignRegime::PositiveLinear => Algorithm::LovaszKt,
        SignRegime::PositiveConvex => Algorithm::PolyLovaszKt,
        SignRegime::PositiveConcave => Algorithm::ConcaveBeta,
        SignRegime::NegativeLinear => Algorithm::NegativeCg,
    }
}
