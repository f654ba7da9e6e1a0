//! Lovász extension evaluators, the concave relaxation, and iterative
//! threshold rounding on a random linear instance.

use externet::generate::{generate_instance, GeneratorConfig};
use externet::lovasz::{
    kt_round, lovasz_greedy, lovasz_linear_closed_form, lovasz_sampled, solve_relaxation,
};
use externet::oracle::brute_force;
use externet::seed::rng;
use externet::{welfare, FractionalAllocation, SignRegime, SolverConfig};

pub struct Summary {
    pub closed_form: f64,
    pub greedy: f64,
    pub sampled_mean: f64,
    pub sampled_stderr: f64,
    pub relaxation: f64,
    pub opt: f64,
    pub rounded_mean: f64,
}

pub fn run_example() -> externet::Result<Summary> {
    let inst = generate_instance(
        &GeneratorConfig::new(SignRegime::PositiveLinear, 6, 3),
        7,
        0,
    )?;
    let uniform = FractionalAllocation::uniform(6, 3);
    let closed_form = lovasz_linear_closed_form(&inst, &uniform)?;
    let greedy = lovasz_greedy(&inst, &uniform)?;
    let sampled = lovasz_sampled(&inst, &uniform, 5000, &mut rng(1))?;
    println!("at the uniform point: closed form {closed_form:.6}, greedy {greedy:.6}, sampled {:.4} +- {:.4}", sampled.mean, sampled.stderr);

    let relax = solve_relaxation(&inst, &SolverConfig::default())?;
    let opt = brute_force(&inst)?.opt_value;
    println!(
        "relaxation {:.6} after {} iterations, optimum {opt:.6}",
        relax.value, relax.iterations
    );

    let mut r = rng(2);
    let trials = 500;
    let mut total = 0.0;
    for _ in 0..trials {
        total += welfare(&inst, &kt_round(&relax.x, &mut r).allocation)?;
    }
    let rounded_mean = total / trials as f64;
    println!(
        "mean rounded welfare {rounded_mean:.6} ({:.3} of the optimum)",
        rounded_mean / opt
    );
    Ok(Summary {
        closed_form,
        greedy,
        sampled_mean: sampled.mean,
        sampled_stderr: sampled.stderr,
        relaxation: relax.value,
        opt,
        rounded_mean,
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
