//! Quadratic externalities: the expanded Lovász objective and the
//! degree-dependent rounding guarantee.

use externet::generate::{generate_instance, GeneratorConfig};
use externet::lovasz::expand_polynomial;
use externet::{solve_with_oracle, Algorithm, ExternalitySpec, SignRegime, SolverConfig};

pub struct Summary {
    pub terms: usize,
    pub degree_bound: usize,
    pub guarantee: f64,
    pub ratio: f64,
}

pub fn run_example() -> externet::Result<Summary> {
    let gen = GeneratorConfig::new(SignRegime::PositiveConvex, 5, 2)
        .with_externality(ExternalitySpec::Polynomial(vec![0.5, 1.0]));
    let inst = generate_instance(&gen, 11, 0)?;
    let expanded = expand_polynomial(&inst)?;
    println!(
        "{} monomial terms, largest coalition size {}",
        expanded.terms.len(),
        expanded.degree_bound
    );
    for t in expanded.terms.iter().take(5) {
        println!(
            "  item {} agents {:?} coefficient {:.4}",
            t.item, t.agents, t.coefficient
        );
    }
    let report = solve_with_oracle(&inst, Algorithm::PolyLovaszKt, &SolverConfig::default())?;
    let ratio = report.empirical_ratio.unwrap_or(f64::NAN);
    println!(
        "poly-lovasz-kt ratio {ratio:.4}, guaranteed {:.4}",
        report.guarantee_bound
    );
    Ok(Summary {
        terms: expanded.terms.len(),
        degree_bound: expanded.degree_bound,
        guarantee: report.guarantee_bound,
        ratio,
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
