//! Concave externalities: the dual subgradient method with its duality gap,
//! and the min-composite relaxation with contention resolution.

use externet::concave::primal_dual_solve;
use externet::generate::{generate_instance, GeneratorConfig};
use externet::oracle::brute_force;
use externet::{solve, Algorithm, ExternalitySpec, SignRegime, SolverConfig};

pub struct Summary {
    pub opt: f64,
    pub best_dual: f64,
    pub primal_value: f64,
    pub pd_rounded: f64,
    pub beta_rounded: f64,
}

pub fn run_example() -> externet::Result<Summary> {
    let gen = GeneratorConfig::new(SignRegime::PositiveConcave, 5, 2)
        .with_externality(ExternalitySpec::LogConcave);
    let inst = generate_instance(&gen, 21, 0)?;
    let opt = brute_force(&inst)?.opt_value;
    let cfg = SolverConfig {
        pd_iters: Some(1000),
        ..SolverConfig::default()
    };
    let trace = primal_dual_solve(&inst, &cfg)?;
    println!(
        "optimum {opt:.4}; best dual {:.4} at step {}, primal {:.4}, gap {:.4}",
        trace.best_dual, trace.best_k, trace.primal_value, trace.gap_estimate
    );
    let pd = solve(&inst, Algorithm::ConcavePd, &cfg)?;
    println!(
        "concave-pd: eta {:.3}, rounded mean {:.4}",
        pd.diagnostics.eta.unwrap_or(f64::NAN),
        pd.rounded_welfare_mean
    );
    let beta = solve(&inst, Algorithm::ConcaveBeta, &cfg)?;
    println!(
        "concave-beta: beta {:.4}{}, rounded mean {:.4}",
        beta.diagnostics.beta.unwrap_or(f64::NAN),
        if beta.diagnostics.beta_unbounded {
            " (clipped)"
        } else {
            ""
        },
        beta.rounded_welfare_mean
    );
    Ok(Summary {
        opt,
        best_dual: trace.best_dual,
        primal_value: trace.primal_value,
        pd_rounded: pd.rounded_welfare_mean,
        beta_rounded: beta.rounded_welfare_mean,
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
