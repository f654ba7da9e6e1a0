use serde::{Deserialize, Serialize};

/// Knobs shared by the relaxation solvers and rounding pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Supergradient iterations for the concave relaxations.
    pub max_iters: usize,
    /// Step constant `c` in the `c / sqrt(t)` schedule (scaled by the initial
    /// supergradient norm).
    pub step_constant: f64,
    /// Stop once an iterate moves less than this.
    pub tolerance: f64,
    pub seed: u64,
    /// Used with `seed` to derive per-trial random streams.
    pub instance_id: u64,
    /// Rounding trials per solve.
    pub trials: usize,
    /// Monte Carlo samples for sampled extension estimates.
    pub mc_samples: usize,
    /// Continuous greedy steps `T`.
    pub greedy_steps: usize,
    /// Dual iterations; `None` means `ceil(n m^2 / eps^2)` capped at `PD_ITER_CAP`.
    pub pd_iters: Option<usize>,
    pub pd_epsilon: f64,
    /// Dual step-size scale `c` in `c / (m sqrt(n k))`.
    pub step_scale: f64,
    /// Iteration cap for the per-item inner maximization.
    pub inner_iters: usize,
    pub inner_tol: f64,
    /// Inner maximization also scans every binary vertex up to this many agents.
    pub vertex_scan_max_n: usize,
}

pub const PD_ITER_CAP: usize = 100_000;

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 5000,
            step_constant: 1.0,
            tolerance: 1e-10,
            seed: 0,
            instance_id: 0,
            trials: 200,
            mc_samples: 2000,
            greedy_steps: 100,
            pd_iters: None,
            pd_epsilon: 0.1,
            step_scale: 1.0,
            inner_iters: 100,
            inner_tol: 1e-8,
            vertex_scan_max_n: 10,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn primal_dual_iters(&self, n: usize, m: usize) -> usize {
        self.pd_iters.unwrap_or_else(|| {
            let k = (n * m * m) as f64 / (self.pd_epsilon * self.pd_epsilon);
            (k.ceil() as usize).min(PD_ITER_CAP)
        })
    }
}
