//! Fair contention resolution on its own, then the two-stage rounding
//! pipeline for convex externalities.

use externet::contention::{fair_resolve, fair_resolve_probabilities, retention_probability};
use externet::generate::{generate_instance, GeneratorConfig};
use externet::seed::rng;
use externet::{solve_with_oracle, Algorithm, ExternalitySpec, SignRegime, SolverConfig};
use rand::Rng;

pub struct Summary {
    pub exact_retention: f64,
    pub measured_retention: f64,
    pub gamma_quarter: f64,
    pub ratio: f64,
}

pub fn run_example() -> externet::Result<Summary> {
    let p = [0.5, 0.3, 0.2];
    println!(
        "winner distribution for requests {{0, 1, 2}}: {:?}",
        fair_resolve_probabilities(&p, &[0, 1, 2])?
    );

    let mut r = rng(5);
    let (mut requested, mut kept) = (0usize, 0usize);
    for _ in 0..50_000 {
        let a: Vec<usize> = (0..3).filter(|&i| r.random::<f64>() < p[i]).collect();
        if !a.is_empty() {
            requested += a.len();
            kept += 1;
            fair_resolve(&p, &a, &mut r)?;
        }
    }
    let exact_retention = retention_probability(&p);
    let measured_retention = kept as f64 / requested as f64;
    println!(
        "retention given a request: exact {exact_retention:.4}, measured {measured_retention:.4}"
    );

    let gen = GeneratorConfig::new(SignRegime::PositiveConvex, 6, 2)
        .with_externality(ExternalitySpec::Polynomial(vec![1.0, 1.0]));
    let inst = generate_instance(&gen, 3, 0)?;
    let report = solve_with_oracle(&inst, Algorithm::ConvexFcr, &SolverConfig::default())?;
    let gamma_quarter = report.diagnostics.gamma_quarter.unwrap_or(f64::NAN);
    let ratio = report.empirical_ratio.unwrap_or(f64::NAN);
    println!("convex-fcr: curvature {gamma_quarter:.4}, ratio to optimum {ratio:.4}");
    Ok(Summary {
        exact_retention,
        measured_retention,
        gamma_quarter,
        ratio,
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
