//! Build a two-agent, two-item instance, evaluate welfare, and compare the
//! linear pipeline against the exhaustive optimum.

use externet::oracle::brute_force;
use externet::{
    solve_with_oracle, welfare, Algorithm, Allocation, ExternalitySpec, Instance, SignRegime,
    SolverConfig,
};
use ndarray::array;

pub struct Summary {
    pub both_on_second: f64,
    pub opt: f64,
    pub ratio: f64,
}

pub fn run_example() -> externet::Result<Summary> {
    let inst = Instance::new(
        SignRegime::PositiveLinear,
        vec![
            array![[1.0, 2.0], [0.0, 1.0]],
            array![[2.0, 0.0], [1.0, 3.0]],
        ],
        ExternalitySpec::Linear,
    )?;
    let both_on_second = welfare(&inst, &Allocation::new(vec![1, 1], 2)?)?;
    let opt = brute_force(&inst)?;
    let report = solve_with_oracle(&inst, Algorithm::LovaszKt, &SolverConfig::default())?;
    println!("welfare with both agents on item 1: {both_on_second}");
    println!("optimum {} at {:?}", opt.opt_value, opt.opt_alloc.assign());
    println!(
        "lovasz-kt: relaxation {:.4}, rounded mean {:.4}, ratio {:.4} (bound {})",
        report.relaxation_value.unwrap_or(f64::NAN),
        report.rounded_welfare_mean,
        report.empirical_ratio.unwrap_or(f64::NAN),
        report.guarantee_bound
    );
    Ok(Summary {
        both_on_second,
        opt: opt.opt_value,
        ratio: report.empirical_ratio.unwrap_or(f64::NAN),
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
