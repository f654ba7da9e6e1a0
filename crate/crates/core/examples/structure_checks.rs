//! Exhaustive set-function checks and curvature diagnostics per regime.

use externet::instance::{beta_curvature, gamma_curvature};
use externet::oracle::{check_monotone, check_submodular, check_supermodular};
use externet::{ExternalitySpec, Instance, SignRegime};
use ndarray::array;

pub struct Summary {
    pub convex_supermodular: bool,
    pub concave_supermodular: bool,
    pub negative_submodular: bool,
    pub negative_monotone: bool,
    pub gamma_square: f64,
}

pub fn run_example() -> externet::Result<Summary> {
    let w = array![[1.0, 0.5, 0.0], [0.2, 1.0, 0.8], [0.0, 0.3, 1.0]];
    let convex = Instance::new(
        SignRegime::PositiveConvex,
        vec![w],
        ExternalitySpec::Polynomial(vec![0.0, 1.0]),
    )?;
    let convex_supermodular = check_supermodular(&convex, 0)?.holds;

    let concave = Instance::new(
        SignRegime::PositiveConcave,
        vec![array![[0.0, 0.5, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]],
        ExternalitySpec::PowerConcave(0.5),
    )?;
    let check = check_supermodular(&concave, 0)?;
    if let Some(w) = &check.witness {
        println!(
            "square-root externalities break supermodularity: adding {:?} to {:?} gains {:.4}, to {:?} only {:.4}",
            w.element, w.smaller, w.lhs, w.larger, w.rhs
        );
    }

    let negative = Instance::new(
        SignRegime::NegativeLinear,
        vec![array![[1.0, -1.0], [-1.0, 1.0]]],
        ExternalitySpec::Linear,
    )?
    .with_diagonal_dominance()?;
    let negative_submodular = check_submodular(&negative, 0)?.holds;
    let negative_monotone = check_monotone(&negative, 0)?.holds;
    println!("zero row sums: submodular {negative_submodular}, monotone {negative_monotone}");

    let gamma_square = gamma_curvature(&ExternalitySpec::Polynomial(vec![0.0, 1.0]), 0.25)?;
    let beta = beta_curvature(&ExternalitySpec::LogConcave)?;
    println!(
        "quarter curvature of y^2: {gamma_square}, beta of ln(1+y): {:.4}",
        beta.value
    );
    Ok(Summary {
        convex_supermodular,
        concave_supermodular: check.holds,
        negative_submodular,
        negative_monotone,
        gamma_square,
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
