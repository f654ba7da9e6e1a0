//! File formats: instance JSON documents and the CSV report table.
//!
//! Instance documents look like
//!
//! ```json
//! {
//!   "n": 2, "m": 1, "regime": "positive-linear",
//!   "weights": [[[1.0, 2.0], [0.0, 1.0]]],
//!   "externality": {"all": {"family": "linear"}}
//! }
//! ```
//!
//! `weights[i][j][k]` is the weight agent `j` puts on agent `k` for item `i`.
//! Non-uniform externalities use one `"(i,j)"` key per item and agent
//! instead of `"all"`. Negative instances may carry
//! `"diagonally_dominant": true`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::{weights_from_nested, ExternalitySpec, Instance, SignRegime};
use crate::report::SolveReport;

const ALL_KEY: &str = "all";

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    m: usize,
    regime: SignRegime,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    diagonally_dominant: bool,
    weights: Vec<Vec<Vec<f64>>>,
    externality: BTreeMap<String, ExternalitySpec>,
}

fn pair_key(item: usize, agent: usize) -> String {
    format!("({item},{agent})")
}

fn parse_pair_key(key: &str) -> Option<(usize, usize)> {
    let inner = key.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (i, j) = inner.split_once(',')?;
    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let weights = inst
        .all_weights()
        .iter()
        .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
        .collect();
    let externality = match inst.uniform_externality() {
        Some(spec) => BTreeMap::from([(ALL_KEY.to_string(), spec.clone())]),
        None => (0..inst.m())
            .flat_map(|i| (0..inst.n()).map(move |j| (i, j)))
            .map(|(i, j)| (pair_key(i, j), inst.externality(i, j).clone()))
            .collect(),
    };
    let doc = InstanceDoc {
        n: inst.n(),
        m: inst.m(),
        regime: inst.regime(),
        diagonally_dominant: inst.is_diagonally_dominant(),
        weights,
        externality,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.weights.len() != doc.m {
        return Err(invalid(format!(
            "expected {} weight matrices, got {}",
            doc.m,
            doc.weights.len()
        )));
    }
    let weights = weights_from_nested(&doc.weights)?;
    if weights.iter().any(|w| w.nrows() != doc.n) {
        return Err(invalid(format!("weight matrices must be {0} x {0}", doc.n)));
    }
    let specs = if let Some(spec) = doc.externality.get(ALL_KEY) {
        if doc.externality.len() != 1 {
            return Err(invalid(
                "\"all\" cannot be combined with per-pair externalities",
            ));
        }
        vec![spec.clone(); doc.n * doc.m]
    } else {
        let mut specs: Vec<Option<ExternalitySpec>> = vec![None; doc.n * doc.m];
        for (key, spec) in doc.externality {
            let (i, j) = parse_pair_key(&key).ok_or_else(|| {
                invalid(format!("bad externality key {key:?}, expected \"(i,j)\""))
            })?;
            if i >= doc.m || j >= doc.n {
                return Err(invalid(format!("externality key {key} out of range")));
            }
            specs[i * doc.n + j] = Some(spec);
        }
        specs
            .into_iter()
            .enumerate()
            .map(|(idx, s)| {
                s.ok_or_else(|| {
                    invalid(format!(
                        "missing externality for {}",
                        pair_key(idx / doc.n, idx % doc.n)
                    ))
                })
            })
            .collect::<Result<_>>()?
    };
    let inst = Instance::with_externalities(doc.regime, weights, specs)?;
    if doc.diagonally_dominant {
        inst.with_diagonal_dominance()
    } else {
        Ok(inst)
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

/// Columns of the batch CSV, in order. Wall time is left out so that reruns
/// with the same seed produce identical files.
pub const CSV_HEADER: [&str; 30] = [
    "instance_id",
    "algorithm",
    "regime",
    "n",
    "m",
    "relaxation_value",
    "rounded_welfare_mean",
    "rounded_welfare_stderr",
    "trials",
    "best_welfare",
    "best_allocation",
    "oracle_opt",
    "empirical_ratio",
    "guarantee_bound",
    "guarantee_basis",
    "bound_ok",
    "eta",
    "beta",
    "beta_unbounded",
    "gamma_quarter",
    "duality_gap",
    "dual_is_estimate",
    "primal_infeasibility",
    "fractional_objective",
    "stage_one_mean",
    "partial_welfare_mean",
    "fallback_runs",
    "forced_assignments",
    "not_converged",
    "relaxation_iterations",
];

/// Twelve significant digits, printed in the shortest form that reads back
/// to the rounded value.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_record(r: &SolveReport) -> Vec<String> {
    let d = &r.diagnostics;
    let basis = serde_json::to_value(r.guarantee_basis)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let alloc: Vec<String> = r
        .best_allocation
        .assign()
        .iter()
        .map(|i| i.to_string())
        .collect();
    vec![
        r.instance_id.to_string(),
        r.algorithm.name().into(),
        r.regime.name().into(),
        r.n.to_string(),
        r.m.to_string(),
        opt_float(r.relaxation_value),
        format_float(r.rounded_welfare_mean),
        format_float(r.rounded_welfare_stderr),
        r.trials.to_string(),
        format_float(r.best_welfare),
        alloc.join(" "),
        opt_float(r.oracle_opt),
        opt_float(r.empirical_ratio),
        format_float(r.guarantee_bound),
        basis,
        opt(r.bound_ok),
        opt_float(d.eta),
        opt_float(d.beta),
        d.beta_unbounded.to_string(),
        opt_float(d.gamma_quarter),
        opt_float(d.duality_gap),
        d.dual_is_estimate.to_string(),
        opt_float(d.primal_infeasibility),
        opt_float(d.fractional_objective),
        opt_float(d.stage_one_mean),
        opt_float(d.partial_welfare_mean),
        d.fallback_runs.to_string(),
        d.forced_assignments.to_string(),
        d.not_converged.to_string(),
        opt(d.relaxation_iterations),
    ]
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[SolveReport]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}
