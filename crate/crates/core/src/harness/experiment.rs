//! The two comparison experiments.
//!
//! `fig2`: for every N and instance, a global-minimum reference, random
//! search, two-parent selection and crossover, and the crossover's
//! offspring statistics, each next to its closed-form prediction.
//!
//! `fig3`: two-parent crossover against the `n`-parent mean-field mixture
//! on identical instances.
//!
//! Seeds: instance `k` uses `instance_seed = split(master_seed, k)`. Inside
//! an instance every consumer takes its own child stream of
//! `instance_seed` (see the `STREAM_*` constants), so each
//! (N, instance, algorithm) cell is independent and can run on any worker.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::{self, GaussianSpec, MinForm, TheoryParams};
use crate::par;
use crate::polycost::{sample_cost_function, CostFunction};
use crate::rng::{child_stream, split};
use crate::search::{self, CrossoverConfig, SearchResult};

use super::config::ExperimentConfig;

pub const STREAM_COST: u64 = 0;
pub const STREAM_RANDOM: u64 = 1;
pub const STREAM_CROSSOVER: u64 = 2;
pub const STREAM_DESCENT: u64 = 3;
pub const STREAM_MEAN_FIELD: u64 = 4;

/// Row labels, declared in canonical output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Certified minimum by enumeration.
    GlobalExact,
    /// Best of descent with random restarts; not certified.
    GlobalApprox,
    RandomSearch,
    SelectionCrossover,
    CrossoverOffspring,
    MeanField,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::GlobalExact,
        Algorithm::GlobalApprox,
        Algorithm::RandomSearch,
        Algorithm::SelectionCrossover,
        Algorithm::CrossoverOffspring,
        Algorithm::MeanField,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::GlobalExact => "global_exact",
            Algorithm::GlobalApprox => "global_approx",
            Algorithm::RandomSearch => "random_search",
            Algorithm::SelectionCrossover => "selection_crossover",
            Algorithm::CrossoverOffspring => "crossover_offspring",
            Algorithm::MeanField => "mean_field",
        }
    }

    pub fn is_reference(self) -> bool {
        matches!(self, Algorithm::GlobalExact | Algorithm::GlobalApprox)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.label() == s)
            .ok_or_else(|| Error::Format { kind: "algorithm label", msg: s.to_string() })
    }
}

/// One point of an experiment table. Empirical fields come from a search
/// run, `theory_*` from the closed-form predictors for the row's (N, K)
/// and budgets. Absent values are `None` and print as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n_dims: usize,
    pub max_order: usize,
    pub instance: usize,
    pub instance_seed: u64,
    pub algorithm: Algorithm,
    pub best_value: Option<f64>,
    pub evaluations: Option<u64>,
    pub offspring_mean: Option<f64>,
    pub offspring_variance: Option<f64>,
    pub realized_d: Option<f64>,
    pub theory_mean: Option<f64>,
    pub theory_variance: Option<f64>,
}

impl ExperimentRow {
    pub fn new(n_dims: usize, max_order: usize, instance: usize, instance_seed: u64, algorithm: Algorithm) -> Self {
        ExperimentRow {
            n_dims,
            max_order,
            instance,
            instance_seed,
            algorithm,
            best_value: None,
            evaluations: None,
            offspring_mean: None,
            offspring_variance: None,
            realized_d: None,
            theory_mean: None,
            theory_variance: None,
        }
    }

    fn with_result(mut self, r: &SearchResult) -> Self {
        self.best_value = Some(r.best_value);
        self.evaluations = Some(r.evaluations);
        if let Some(o) = &r.offspring {
            self.offspring_mean = Some(o.mean);
            self.offspring_variance = Some(o.variance);
            self.realized_d = Some(o.mean_d);
        }
        self
    }

    fn with_theory(mut self, g: Option<GaussianSpec>) -> Self {
        self.theory_mean = g.map(|g| g.mean);
        self.theory_variance = g.map(|g| g.variance);
        self
    }

    /// Canonical sort key: N, instance, algorithm.
    pub fn sort_key(&self) -> (usize, usize, Algorithm) {
        (self.n_dims, self.instance, self.algorithm)
    }
}

/// Result of a run; `error` is set when some cell failed, in which case
/// `rows` holds only the cells that completed.
#[derive(Debug)]
pub struct RunOutcome {
    pub rows: Vec<ExperimentRow>,
    pub error: Option<Error>,
}

impl RunOutcome {
    pub fn into_result(self) -> Result<Vec<ExperimentRow>> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.rows),
        }
    }
}

pub fn instance_seed(master_seed: u64, instance: usize) -> u64 {
    split(master_seed, instance as u64)
}

/// Closed-form line for one algorithm at (N, K). `None` where no
/// prediction exists or the asymptotic expressions are invalid for the
/// configured budgets.
pub fn theory_for(config: &ExperimentConfig, n_dims: usize, algorithm: Algorithm) -> Option<GaussianSpec> {
    let b = &config.budgets;
    let params = || {
        let v = crate::polycost::uniform_order_variance(n_dims, config.max_order);
        evt::theory_params(n_dims, &v).ok()
    };
    match algorithm {
        Algorithm::GlobalExact | Algorithm::GlobalApprox => {
            Some(GaussianSpec { mean: evt::global_min_estimate(n_dims), variance: 0.0 })
        }
        Algorithm::RandomSearch => {
            evt::min_distribution(GaussianSpec::standard(), b.random_m, MinForm::Exact).ok()
        }
        Algorithm::SelectionCrossover => {
            params().and_then(|p: TheoryParams| evt::offspring_min_distribution(&p, b.offspring_pool).ok())
        }
        Algorithm::CrossoverOffspring => {
            params().and_then(|p: TheoryParams| evt::offspring_distribution(&p, b.pool).ok())
        }
        Algorithm::MeanField => None,
    }
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Reference,
    Random,
    Crossover,
    MeanField,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    n_dims: usize,
    instance: usize,
    task: Task,
}

fn crossover_config(config: &ExperimentConfig, n_parents: usize) -> CrossoverConfig {
    let b = &config.budgets;
    CrossoverConfig {
        pool: b.pool,
        offspring_pool: b.offspring_pool,
        repeats: b.repeats,
        n_parents,
        refresh_parents: config.refresh_parents,
        match_budget: config.match_budget,
    }
}

fn run_cell(config: &ExperimentConfig, cell: Cell) -> Result<Vec<ExperimentRow>> {
    let (n, k) = (cell.n_dims, config.max_order);
    let seed = instance_seed(config.master_seed, cell.instance);
    let cf: CostFunction = sample_cost_function(n, k, split(seed, STREAM_COST))?;
    let row = |a| ExperimentRow::new(n, k, cell.instance, seed, a);
    let b = &config.budgets;
    let rows = match cell.task {
        Task::Reference => {
            if n <= config.exhaustive_max_dims {
                let (_, value) = cf.exhaustive_min_capped(config.exhaustive_max_dims)?;
                let mut r = row(Algorithm::GlobalExact);
                r.best_value = Some(value);
                r.evaluations = Some(1u64 << n);
                vec![r.with_theory(theory_for(config, n, Algorithm::GlobalExact))]
            } else {
                let mut s = child_stream(seed, STREAM_DESCENT);
                let res = search::gradient_descent_restarts(&cf, b.gd_restarts, &mut s)?;
                vec![row(Algorithm::GlobalApprox)
                    .with_result(&res)
                    .with_theory(theory_for(config, n, Algorithm::GlobalApprox))]
            }
        }
        Task::Random => {
            let mut s = child_stream(seed, STREAM_RANDOM);
            let res = search::random_search(&cf, b.random_m, &mut s)?;
            vec![row(Algorithm::RandomSearch)
                .with_result(&res)
                .with_theory(theory_for(config, n, Algorithm::RandomSearch))]
        }
        Task::Crossover => {
            let mut s = child_stream(seed, STREAM_CROSSOVER);
            let res = search::crossover_search(&cf, &crossover_config(config, 2), &mut s)?;
            let main = row(Algorithm::SelectionCrossover)
                .with_result(&res)
                .with_theory(theory_for(config, n, Algorithm::SelectionCrossover));
            let mut off = row(Algorithm::CrossoverOffspring)
                .with_theory(theory_for(config, n, Algorithm::CrossoverOffspring));
            off.offspring_mean = main.offspring_mean;
            off.offspring_variance = main.offspring_variance;
            off.realized_d = main.realized_d;
            vec![main, off]
        }
        Task::MeanField => {
            let mut s = child_stream(seed, STREAM_MEAN_FIELD);
            let res = search::crossover_search(&cf, &crossover_config(config, b.n_parents), &mut s)?;
            vec![row(Algorithm::MeanField)
                .with_result(&res)
                .with_theory(theory_for(config, n, Algorithm::MeanField))]
        }
    };
    Ok(rows)
}

fn execute(config: &ExperimentConfig, tasks: &[Task]) -> RunOutcome {
    let cells: Vec<Cell> = config
        .n_dims_list
        .iter()
        .flat_map(|&n_dims| {
            (0..config.instances_per_point)
                .flat_map(move |instance| tasks.iter().map(move |&task| Cell { n_dims, instance, task }))
        })
        .collect();
    let results = par::map_indexed(cells.len(), |i| run_cell(config, cells[i]));
    let mut rows = Vec::new();
    let mut error = None;
    for r in results {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(e) => {
                error.get_or_insert(e);
            }
        }
    }
    rows.sort_by_key(ExperimentRow::sort_key);
    RunOutcome { rows, error }
}

/// Runs the global-reference / random / crossover comparison.
pub fn execute_fig2(config: &ExperimentConfig) -> RunOutcome {
    if let Err(e) = config.validate() {
        return RunOutcome { rows: Vec::new(), error: Some(e) };
    }
    execute(config, &[Task::Reference, Task::Random, Task::Crossover])
}

pub fn run_fig2(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    execute_fig2(config).into_result()
}

/// Runs two-parent crossover against the mean-field mixture on the same
/// instances, plus the global reference. Refuses `n_parents < 3`: with two
/// parents the mixture is the crossover itself.
pub fn execute_fig3(config: &ExperimentConfig) -> RunOutcome {
    if let Err(e) = config.validate() {
        return RunOutcome { rows: Vec::new(), error: Some(e) };
    }
    if config.budgets.n_parents < 3 {
        return RunOutcome {
            rows: Vec::new(),
            error: Some(Error::Config(format!(
                "mean-field comparison needs n_parents >= 3, got {}; two parents is selection_crossover",
                config.budgets.n_parents
            ))),
        };
    }
    execute(config, &[Task::Reference, Task::Crossover, Task::MeanField])
}

pub fn run_fig3(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    execute_fig3(config).into_result()
}
