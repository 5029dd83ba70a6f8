//! Retrieval of mirror symmetries from noisy pairs of symmetric graphs.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dsopt::{solve_relaxation, SolverOpts};
use crate::error::{Error, Result};
use crate::groupspace::build_basis;
use crate::permgroup::{exhaustive_qap_capped, PermGroup, Permutation, QAP_MAX_DEGREE};
use crate::projection::{dspp_path, l2_project, DsppOpts};
use crate::trial_rng;

use super::generators::gen_noisy_pair;
use super::groups::bilateral;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Convex relaxation followed by the nearest permutation.
    DsL2,
    /// Convex-to-concave path.
    Dspp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::DsL2 => "ds_l2",
            Method::Dspp => "dspp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ds_l2" => Ok(Method::DsL2),
            "dspp" => Ok(Method::Dspp),
            _ => Err(Error::Parse(format!("unknown method `{s}` (expected ds_l2 or dspp)"))),
        }
    }
}

/// `count` values evenly spaced over `[-3, 0]`.
pub fn default_exponents(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| -3.0 + 3.0 * i as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    /// Even sizes; the group swaps `2i <-> 2i + 1`.
    pub sizes: Vec<usize>,
    /// Noise norms are `10^alpha` for each exponent.
    pub noise_exponents: Vec<f64>,
    pub methods: Vec<Method>,
    /// Exhaustive ground truth for sizes up to this.
    pub ground_truth_max_n: usize,
    /// Also run exhaustive ground truth above `ground_truth_max_n` (up to 10)
    /// on the first `slow_subsample` trials.
    pub slow_ground_truth: bool,
    pub slow_subsample: usize,
    pub solver: SolverOpts,
    pub dspp: DsppOpts,
    /// Record wall times; off makes the output byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            sizes: vec![8],
            noise_exponents: default_exponents(10),
            methods: vec![Method::DsL2, Method::Dspp],
            ground_truth_max_n: QAP_MAX_DEGREE,
            slow_ground_truth: false,
            slow_subsample: 10,
            solver: SolverOpts::default(),
            dspp: DsppOpts::default(),
            timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::PreconditionFailed("trials must be at least 1".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0 || n % 2 == 1) {
            return Err(Error::PreconditionFailed(format!("size {n} is not a positive even number")));
        }
        if self.noise_exponents.iter().any(|a| !a.is_finite()) {
            return Err(Error::PreconditionFailed("noise exponents must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub n: usize,
    pub epsilon: f64,
    pub method: &'static str,
    pub retrieved: Permutation,
    pub retrieved_in_g: bool,
    /// Absent when no exhaustive search was run for this trial.
    pub ground_truth_in_g: Option<bool>,
    /// `||AP - PB||_F` of the retrieved permutation.
    pub energy: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub group: String,
    pub n: usize,
    pub epsilon: f64,
    pub method: String,
    pub trials: usize,
    pub successes: usize,
    pub ratio: f64,
    pub mean_wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct NoiseResults {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<RatioRow>,
}

impl NoiseResults {
    pub fn row(&self, n: usize, epsilon: f64, method: &str) -> Option<&RatioRow> {
        self.rows.iter().find(|r| r.n == n && r.epsilon == epsilon && r.method == method)
    }
}

fn run_method(method: Method, a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>, config: &ExperimentConfig) -> Result<Permutation> {
    Ok(match method {
        Method::DsL2 => l2_project(&solve_relaxation(a, b, &config.solver)?.s),
        Method::Dspp => dspp_path(a, b, &config.dspp)?.final_permutation,
    })
}

struct TrialOutcome {
    records: Vec<TrialRecord>,
    ground_truth: Option<(bool, f64)>,
}

fn run_trial(
    config: &ExperimentConfig,
    g: &PermGroup,
    basis: &crate::groupspace::GroupSpaceBasis,
    stream: u64,
    index: usize,
    epsilon: f64,
) -> Result<TrialOutcome> {
    let n = g.degree();
    let mut rng = trial_rng(config.seed, stream);
    let (a, b) = gen_noisy_pair(basis, epsilon, &mut rng);
    let exhaustive = n <= config.ground_truth_max_n || (config.slow_ground_truth && index < config.slow_subsample);
    let ground_truth = if exhaustive {
        let start = Instant::now();
        let (p, _) = exhaustive_qap_capped(&a, &b, config.ground_truth_max_n.max(10))?;
        Some((g.contains(&p), start.elapsed().as_secs_f64() * 1e3))
    } else {
        None
    };
    let mut records = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let start = Instant::now();
        let p = run_method(method, &a, &b, config)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        records.push(TrialRecord {
            trial_index: index,
            n,
            epsilon,
            method: method.as_str(),
            retrieved_in_g: g.contains(&p),
            ground_truth_in_g: ground_truth.map(|(t, _)| t),
            energy: p.energy(&a, &b),
            retrieved: p,
            wall_ms,
        });
    }
    Ok(TrialOutcome { records, ground_truth })
}

/// Runs every `(n, epsilon, method)` cell. Trial `t` of cell `(size s, noise
/// e)` draws its instance from stream `(s * E + e) * trials + t`, shared by
/// all methods, so results do not depend on scheduling.
pub fn cmd_noise_experiment(config: &ExperimentConfig) -> Result<NoiseResults> {
    config.validate()?;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let cells = config.noise_exponents.len() as u64;
    for (si, &n) in config.sizes.iter().enumerate() {
        let g = bilateral(n / 2).to_group(2)?;
        let basis = build_basis(&g);
        let group = format!("z2_bilateral{n}");
        for (ei, &alpha) in config.noise_exponents.iter().enumerate() {
            let epsilon = 10f64.powf(alpha);
            let base = (si as u64 * cells + ei as u64) * config.trials as u64;
            let outcomes = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, &g, &basis, base + t as u64, t, epsilon))
                .collect::<Result<Vec<_>>>()?;
            let mean = |v: &[f64]| if config.timing && !v.is_empty() { v.iter().sum::<f64>() / v.len() as f64 } else { 0.0 };
            let row = |method: &str, trials: usize, successes: usize, walls: &[f64]| RatioRow {
                group: group.clone(),
                n,
                epsilon,
                method: method.to_string(),
                trials,
                successes,
                ratio: successes as f64 / trials as f64,
                mean_wall_ms: mean(walls),
            };
            for &method in &config.methods {
                let mine: Vec<&TrialRecord> =
                    outcomes.iter().flat_map(|o| &o.records).filter(|r| r.method == method.as_str()).collect();
                let walls: Vec<f64> = mine.iter().map(|r| r.wall_ms).collect();
                let successes = mine.iter().filter(|r| r.retrieved_in_g).count();
                rows.push(row(method.as_str(), mine.len(), successes, &walls));
            }
            let truths: Vec<(bool, f64)> = outcomes.iter().filter_map(|o| o.ground_truth).collect();
            if !truths.is_empty() {
                let walls: Vec<f64> = truths.iter().map(|t| t.1).collect();
                let successes = truths.iter().filter(|t| t.0).count();
                rows.push(row("ground_truth", truths.len(), successes, &walls));
            }
            for o in outcomes {
                records.extend(o.records);
            }
        }
    }
    if !config.timing {
        records.iter_mut().for_each(|r| r.wall_ms = 0.0);
    }
    Ok(NoiseResults { records, rows })
}
