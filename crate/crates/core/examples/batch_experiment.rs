//! A seeded batch: generate instances, run a pipeline against the oracle,
//! and write the CSV table. Also round-trips one instance through JSON.

use externet::cli::{cmd_batch, ExperimentConfig};
use externet::format::{instance_from_json, instance_to_json, write_reports_csv};
use externet::generate::{generate_instance, GeneratorConfig};
use externet::SignRegime;

pub struct Summary {
    pub rows: usize,
    pub violations: usize,
    pub csv: String,
    pub json_round_trip: bool,
}

pub fn run_example() -> externet::Result<Summary> {
    let config = ExperimentConfig {
        regime: SignRegime::PositiveLinear,
        n: 6,
        m: 2,
        instance_count: 8,
        seed: 42,
        ..ExperimentConfig::default()
    };
    let outcome = cmd_batch(&config)?;
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &outcome.reports)?;
    let csv = String::from_utf8(buf).expect("csv is utf-8");
    print!("{csv}");

    let inst = generate_instance(
        &GeneratorConfig::new(SignRegime::NegativeLinear, 3, 2).dominant(),
        42,
        0,
    )?;
    let json = instance_to_json(&inst)?;
    println!("{json}");
    Ok(Summary {
        rows: outcome.reports.len(),
        violations: outcome.violations.len(),
        json_round_trip: instance_from_json(&json)? == inst,
        csv,
    })
}

fn main() -> externet::Result<()> {
    run_example().map(|_| ())
}
