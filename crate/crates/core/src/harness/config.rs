//! Experiment configuration, read from a flat `key = value` text file.
//!
//! ```text
//! # comments start with '#'
//! experiment_id = fig2-k2
//! n_dims = 10, 14, 18, 22, 26, 30
//! max_order = 2
//! instances = 10
//! random_m = 1000000
//! pool = 1000
//! offspring_pool = 1000
//! repeats = 333
//! n_parents = 4
//! gd_restarts = 1000
//! master_seed = 1
//! output_dir = out
//! exhaustive_max_dims = 20
//! refresh_parents = true
//! match_budget = false
//! ```
//!
//! Unknown keys are rejected. Missing keys keep their defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycost::{Limits, DEFAULT_EXHAUSTIVE_MAX_DIMS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub random_m: u64,
    pub pool: u64,
    pub offspring_pool: u64,
    pub repeats: u64,
    pub n_parents: usize,
    pub gd_restarts: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            random_m: 1_000_000,
            pool: 1000,
            offspring_pool: 1000,
            repeats: 333,
            n_parents: 4,
            gd_restarts: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub n_dims_list: Vec<usize>,
    pub max_order: usize,
    pub instances_per_point: usize,
    pub budgets: Budgets,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Largest N whose global minimum is certified by enumeration; above
    /// it descent with restarts supplies an approximate reference.
    pub exhaustive_max_dims: usize,
    pub refresh_parents: bool,
    pub match_budget: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment_id: "fig2".into(),
            n_dims_list: vec![10, 14, 18, 22, 26, 30],
            max_order: 2,
            instances_per_point: 10,
            budgets: Budgets::default(),
            master_seed: 1,
            output_dir: PathBuf::from("out"),
            exhaustive_max_dims: DEFAULT_EXHAUSTIVE_MAX_DIMS,
            refresh_parents: true,
            match_budget: false,
        }
    }
}

impl ExperimentConfig {
    /// Desk-scale defaults for the mean-field comparison: N = 30, K = 2.
    pub fn fig3_default() -> Self {
        ExperimentConfig { experiment_id: "fig3".into(), n_dims_list: vec![30], ..Default::default() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        ExperimentConfig::parse_over(ExperimentConfig::default(), text)
    }

    /// Parses `text` as overrides on top of `base`.
    pub fn parse_over(base: ExperimentConfig, text: &str) -> Result<Self> {
        let mut cfg = base;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::load_over(ExperimentConfig::default(), path)
    }

    pub fn load_over(base: ExperimentConfig, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse_over(base, &text)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.replace('_', "").parse().map_err(|_| format!("{key}: cannot parse {v:?}"))
        }
        fn flag(key: &str, v: &str) -> std::result::Result<bool, String> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(format!("{key}: expected true or false, got {v:?}")),
            }
        }
        match key {
            "experiment_id" => self.experiment_id = value.to_string(),
            "n_dims" | "n_dims_list" => {
                self.n_dims_list = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<std::result::Result<_, _>>()?
            }
            "max_order" => self.max_order = num(key, value)?,
            "instances" | "instances_per_point" => self.instances_per_point = num(key, value)?,
            "random_m" => self.budgets.random_m = num(key, value)?,
            "pool" => self.budgets.pool = num(key, value)?,
            "offspring_pool" => self.budgets.offspring_pool = num(key, value)?,
            "repeats" => self.budgets.repeats = num(key, value)?,
            "n_parents" => self.budgets.n_parents = num(key, value)?,
            "gd_restarts" => self.budgets.gd_restarts = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "exhaustive_max_dims" => self.exhaustive_max_dims = num(key, value)?,
            "refresh_parents" => self.refresh_parents = flag(key, value)?,
            "match_budget" => self.match_budget = flag(key, value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let limits = Limits::default();
        let b = &self.budgets;
        let counts = [
            ("instances", self.instances_per_point as u64),
            ("random_m", b.random_m),
            ("pool", b.pool),
            ("offspring_pool", b.offspring_pool),
            ("repeats", b.repeats),
            ("n_parents", b.n_parents as u64),
            ("gd_restarts", b.gd_restarts),
            ("max_order", self.max_order as u64),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be >= 1")));
        }
        if self.n_dims_list.is_empty() {
            return Err(Error::Config("n_dims list is empty".into()));
        }
        if b.n_parents < 2 {
            return Err(Error::Config("n_parents must be >= 2".into()));
        }
        if self.max_order > limits.max_order {
            return Err(Error::Config(format!(
                "max_order {} exceeds the cap {}",
                self.max_order, limits.max_order
            )));
        }
        for &n in &self.n_dims_list {
            if n == 0 || n > limits.max_dims {
                return Err(Error::Config(format!("n_dims {n} outside 1..={}", limits.max_dims)));
            }
            if n < self.max_order {
                return Err(Error::Config(format!("n_dims {n} below max_order {}", self.max_order)));
            }
        }
        Ok(())
    }

    /// Renders back to the text format; `parse(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        let list: Vec<String> = self.n_dims_list.iter().map(|n| n.to_string()).collect();
        let b = &self.budgets;
        format!(
            "experiment_id = {}\nn_dims = {}\nmax_order = {}\ninstances = {}\nrandom_m = {}\npool = {}\n\
             offspring_pool = {}\nrepeats = {}\nn_parents = {}\ngd_restarts = {}\nmaster_seed = {}\n\
             output_dir = {}\nexhaustive_max_dims = {}\nrefresh_parents = {}\nmatch_budget = {}\n",
            self.experiment_id,
            list.join(", "),
            self.max_order,
            self.instances_per_point,
            b.random_m,
            b.pool,
            b.offspring_pool,
            b.repeats,
            b.n_parents,
            b.gd_restarts,
            self.master_seed,
            self.output_dir.display(),
            self.exhaustive_max_dims,
            self.refresh_parents,
            self.match_budget,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = "# desk run\nexperiment_id = demo\nn_dims = 10, 12\nmax_order = 3\n\
                    instances = 4\nrandom_m = 1_000\npool=50\noffspring_pool = 60\nrepeats = 7 # short\n\
                    n_parents = 4\ngd_restarts = 9\nmaster_seed = 42\noutput_dir = /tmp/x\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.experiment_id, "demo");
        assert_eq!(c.n_dims_list, vec![10, 12]);
        assert_eq!(c.max_order, 3);
        assert_eq!(c.budgets.random_m, 1000);
        assert_eq!(c.budgets.repeats, 7);
        assert_eq!(c.master_seed, 42);
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "bogus = 1",
            "pool = -3",
            "pool = 0",
            "n_dims = 40",
            "max_order = 5",
            "n_dims = 3\nmax_order = 4",
            "n_parents = 1",
            "just text",
            "refresh_parents = maybe",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn defaults_follow_the_reference_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.budgets.pool, 1000);
        assert_eq!(c.budgets.repeats, 333);
        assert_eq!(c.instances_per_point, 10);
        assert!(c.validate().is_ok());
        assert_eq!(ExperimentConfig::fig3_default().n_dims_list, vec![30]);
        let c = ExperimentConfig::parse_over(ExperimentConfig::fig3_default(), "instances = 3").unwrap();
        assert_eq!((c.experiment_id.as_str(), c.instances_per_point), ("fig3", 3));
    }
}
