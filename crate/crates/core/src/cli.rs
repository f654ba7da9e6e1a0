//! Command-line front end: `generate`, `solve`, `batch` and `oracle-check`.
//!
//! Every flag has a counterpart in [`ExperimentConfig`], which can also be
//! loaded from a JSON file with `--config`; flags given on the command line
//! win over the file. `EXTERNET_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{invalid, Result};
use crate::format::{read_instance, write_instance, write_reports_csv};
use crate::generate::{generate_instance, GeneratorConfig, WeightModel};
use crate::instance::{ExternalitySpec, Instance, SignRegime};
use crate::oracle::{
    brute_force, check_monotone, check_submodular, check_supermodular, OracleResult,
    StructureCheck, MAX_CHECK_AGENTS, MAX_ENUMERATION,
};
use crate::report::{Algorithm, SolveReport, RATIO_TOLERANCE};
use crate::solve::{default_algorithm, solve, solve_with_oracle};

pub const THREADS_ENV: &str = "EXTERNET_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub regime: SignRegime,
    pub n: usize,
    pub m: usize,
    pub instance_count: usize,
    pub rounding_trials: usize,
    pub seed: u64,
    /// Defaults to the regime's main pipeline.
    pub algorithm: Option<Algorithm>,
    pub externality: Option<ExternalitySpec>,
    pub weight_model: WeightModel,
    pub diagonally_dominant: bool,
    pub max_iters: usize,
    pub step_scale: f64,
    pub greedy_steps: usize,
    pub mc_samples: usize,
    /// Attach the exhaustive optimum to each batch report.
    pub with_oracle: bool,
    /// Directory for `generate`.
    pub out_dir: Option<PathBuf>,
    /// File for `solve`, `batch` and `oracle-check` output (stdout if absent).
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        ExperimentConfig {
            regime: SignRegime::PositiveLinear,
            n: 6,
            m: 2,
            instance_count: 10,
            rounding_trials: solver.trials,
            seed: 0,
            algorithm: None,
            externality: None,
            weight_model: WeightModel::Uniform,
            diagonally_dominant: false,
            max_iters: solver.max_iters,
            step_scale: solver.step_scale,
            greedy_steps: solver.greedy_steps,
            mc_samples: solver.mc_samples,
            with_oracle: true,
            out_dir: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n", self.n),
            ("m", self.m),
            ("instance_count", self.instance_count),
            ("rounding_trials", self.rounding_trials),
            ("max_iters", self.max_iters),
            ("greedy_steps", self.greedy_steps),
            ("mc_samples", self.mc_samples),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(invalid(format!("{name} must be at least 1")));
        }
        if self.step_scale.is_nan() || self.step_scale <= 0.0 {
            return Err(invalid("step_scale must be positive"));
        }
        Ok(())
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
            .unwrap_or_else(|| default_algorithm(self.regime))
    }

    pub fn solver_config(&self, instance_id: u64) -> SolverConfig {
        SolverConfig {
            seed: self.seed,
            instance_id,
            trials: self.rounding_trials,
            max_iters: self.max_iters,
            step_scale: self.step_scale,
            greedy_steps: self.greedy_steps,
            mc_samples: self.mc_samples,
            ..SolverConfig::default()
        }
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            regime: self.regime,
            n: self.n,
            m: self.m,
            externality: self.externality.clone(),
            weight_model: self.weight_model,
            diagonally_dominant: self.diagonally_dominant,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Pool size from `EXTERNET_THREADS`; unset, empty or zero means rayon's default.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                invalid(format!(
                    "{THREADS_ENV} must be a nonnegative integer, got {v:?}"
                ))
            })?;
            Ok((n > 0).then_some(n))
        }
        Err(_) => Ok(None),
    }
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| invalid(e.to_string()))?;
    Ok(pool.install(f))
}

/// Writes `instance_count` instances to `out_dir` as `instance_0000.json`, ...
pub fn cmd_generate(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let dir = config
        .out_dir
        .as_ref()
        .ok_or_else(|| invalid("generate needs an output directory"))?;
    std::fs::create_dir_all(dir)?;
    let gen = config.generator_config();
    (0..config.instance_count as u64)
        .map(|id| {
            let inst = generate_instance(&gen, config.seed, id)?;
            let path = dir.join(format!("instance_{id:04}.json"));
            write_instance(&path, &inst)?;
            Ok(path)
        })
        .collect()
}

pub fn cmd_solve(
    instance: &Instance,
    algorithm: Algorithm,
    config: &ExperimentConfig,
    with_oracle: bool,
) -> Result<SolveReport> {
    config.validate()?;
    let cfg = config.solver_config(0);
    with_pool(|| {
        if with_oracle {
            solve_with_oracle(instance, algorithm, &cfg)
        } else {
            solve(instance, algorithm, &cfg)
        }
    })?
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    /// Ordered by instance id.
    pub reports: Vec<SolveReport>,
    /// Instance ids whose guarantee check failed.
    pub violations: Vec<u64>,
}

/// Generates, solves and (optionally) brute-forces `instance_count`
/// instances in a worker pool.
pub fn cmd_batch(config: &ExperimentConfig) -> Result<BatchOutcome> {
    config.validate()?;
    let gen = config.generator_config();
    let algorithm = config.algorithm();
    let enumerable = (config.m as u128)
        .checked_pow(config.n as u32)
        .is_some_and(|c| c <= MAX_ENUMERATION);
    let reports = with_pool(|| {
        (0..config.instance_count as u64)
            .into_par_iter()
            .map(|id| {
                let inst = generate_instance(&gen, config.seed, id)?;
                let mut report = solve(&inst, algorithm, &config.solver_config(id))?;
                if config.with_oracle && enumerable && report.oracle_opt.is_none() {
                    report.attach_oracle(brute_force(&inst)?.opt_value, RATIO_TOLERANCE);
                }
                Ok(report)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let violations = reports
        .iter()
        .filter(|r| r.bound_ok == Some(false))
        .map(|r| r.instance_id)
        .collect();
    Ok(BatchOutcome {
        reports,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemStructure {
    pub item: usize,
    pub supermodular: StructureCheck,
    pub submodular: StructureCheck,
    pub monotone: StructureCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub optimum: OracleResult,
    /// Empty when `n` is too large for the exhaustive set checks.
    pub structure: Vec<ItemStructure>,
}

pub fn cmd_oracle_check(instance: &Instance) -> Result<OracleCheck> {
    with_pool(|| {
        let optimum = brute_force(instance)?;
        let structure = if instance.n() <= MAX_CHECK_AGENTS {
            (0..instance.m())
                .map(|item| {
                    Ok(ItemStructure {
                        item,
                        supermodular: check_supermodular(instance, item)?,
                        submodular: check_submodular(instance, item)?,
                        monotone: check_monotone(instance, item)?,
                    })
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(OracleCheck { optimum, structure })
    })?
}

#[derive(Debug, Parser)]
#[command(
    name = "externet",
    version,
    about = "Social welfare maximization under network externalities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write random instances as JSON files.
    Generate {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run one pipeline on an instance file and print its report as JSON.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Also brute-force the optimum.
        #[arg(long)]
        oracle: bool,
    },
    /// Generate instances, solve them and write one CSV row per instance.
    Batch {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Skip the exhaustive optimum.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Brute-force an instance and check per-item set-function structure.
    OracleCheck { instance: PathBuf },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON file with an experiment config; other flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_kebab::<SignRegime>)]
    pub regime: Option<SignRegime>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "instances")]
    pub instance_count: Option<usize>,
    #[arg(long = "trials")]
    pub rounding_trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_kebab::<Algorithm>)]
    pub algorithm: Option<Algorithm>,
    /// Externality as JSON, e.g. '{"family":"polynomial","params":[0,1]}'.
    #[arg(long, value_parser = parse_json::<ExternalitySpec>)]
    pub externality: Option<ExternalitySpec>,
    /// Graph weights with this edge probability.
    #[arg(long)]
    pub graph: Option<f64>,
    #[arg(long)]
    pub dominant: bool,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long)]
    pub greedy_steps: Option<usize>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_json<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        set!(
            regime,
            n,
            m,
            instance_count,
            rounding_trials,
            seed,
            max_iters,
            step_scale,
            greedy_steps,
            mc_samples
        );
        if self.algorithm.is_some() {
            c.algorithm = self.algorithm;
        }
        if self.externality.is_some() {
            c.externality = self.externality.clone();
        }
        if let Some(p) = self.graph {
            c.weight_model = WeightModel::Graph {
                edge_probability: p,
            };
        }
        if self.dominant {
            c.diagonally_dominant = true;
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(output, s.as_bytes())
}

/// Exit status: 0 on success, 1 when a guarantee check failed.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Generate { exp, out_dir } => {
            let mut c = exp.resolve()?;
            if out_dir.is_some() {
                c.out_dir = out_dir;
            }
            for p in cmd_generate(&c)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Solve {
            instance,
            exp,
            oracle,
        } => {
            let c = exp.resolve()?;
            let inst = read_instance(&instance)?;
            let algorithm = c
                .algorithm
                .unwrap_or_else(|| default_algorithm(inst.regime()));
            let report = cmd_solve(&inst, algorithm, &c, oracle)?;
            emit_json(c.output.as_deref(), &report)?;
            Ok(i32::from(report.bound_ok == Some(false)))
        }
        Command::Batch { exp, no_oracle } => {
            let mut c = exp.resolve()?;
            if no_oracle {
                c.with_oracle = false;
            }
            let outcome = cmd_batch(&c)?;
            let mut buf = Vec::new();
            write_reports_csv(&mut buf, &outcome.reports)?;
            emit(c.output.as_deref(), &buf)?;
            if !outcome.violations.is_empty() {
                eprintln!("guarantee violated on instances {:?}", outcome.violations);
                return Ok(1);
            }
            Ok(0)
        }
        Command::OracleCheck { instance } => {
            let check = cmd_oracle_check(&read_instance(&instance)?)?;
            emit_json(None, &check)?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first) and runs the command. Errors are
/// printed to stderr and give exit status 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
