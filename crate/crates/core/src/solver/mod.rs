//! Path optimizers: greedy construction, 2-opt, Lin-Kernighan and the
//! random-key genetic algorithm that combines them.

mod greedy;
mod local;
mod rkga;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gtsp::{evaluate, DrawingPath, GtspInstance};

pub use greedy::greedy;
pub use local::{lin_kernighan, two_opt, CostTable, LK_BREADTH, LK_DEPTH};
pub use rkga::{improve, mutate, reverse_keys, run_rkga, tournament_select, uniform_crossover, Individual};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid GA config: {0}")]
    Config(String),
    #[error("unknown method '{0}' (expected greedy, greedy2opt, greedy2optlk, rkga2opt or rkga2optlk)")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "greedy2opt")]
    Greedy2Opt,
    #[serde(rename = "greedy2optlk")]
    Greedy2OptLk,
    #[serde(rename = "rkga2opt")]
    Rkga2Opt,
    #[serde(rename = "rkga2optlk")]
    Rkga2OptLk,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Greedy,
        Method::Greedy2Opt,
        Method::Greedy2OptLk,
        Method::Rkga2Opt,
        Method::Rkga2OptLk,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Greedy2Opt => "greedy2opt",
            Method::Greedy2OptLk => "greedy2optlk",
            Method::Rkga2Opt => "rkga2opt",
            Method::Rkga2OptLk => "rkga2optlk",
        }
    }

    /// Only the GA methods consume the seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Rkga2Opt | Method::Rkga2OptLk)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| SolverError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub key_inherit_p: f64,
    pub reverse_p: f64,
    pub shuffle_p: f64,
    pub flip_p: f64,
    pub tournament_k: usize,
    pub thres_base: f64,
    pub thres_step: f64,
    pub thres_cap: f64,
    pub max_generations: usize,
    pub stall_limit: usize,
    /// Set per run (CLI flag or trial index), so it is not part of the
    /// config file.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            elite_count: 3,
            p_crossover: 0.8,
            p_mutation: 0.5,
            key_inherit_p: 0.7,
            reverse_p: 0.5,
            shuffle_p: 0.05,
            flip_p: 0.05,
            tournament_k: 2,
            thres_base: 0.05,
            thres_step: 0.01,
            thres_cap: 0.10,
            max_generations: 300,
            stall_limit: 60,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::Config(msg));
        if self.population_size == 0 {
            return bad("population_size must be at least 1".into());
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite_count ({}) must be below population_size ({})",
                self.elite_count, self.population_size
            ));
        }
        if self.tournament_k == 0 {
            return bad("tournament_k must be at least 1".into());
        }
        let probs = [
            ("p_crossover", self.p_crossover),
            ("p_mutation", self.p_mutation),
            ("key_inherit_p", self.key_inherit_p),
            ("reverse_p", self.reverse_p),
            ("shuffle_p", self.shuffle_p),
            ("flip_p", self.flip_p),
            ("thres_base", self.thres_base),
            ("thres_cap", self.thres_cap),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.thres_step >= 0.0 && self.thres_step.is_finite()) {
            return bad(format!("thres_step must be non-negative, got {}", self.thres_step));
        }
        if self.thres_base > self.thres_cap {
            return bad(format!(
                "thres_base ({}) must not exceed thres_cap ({})",
                self.thres_base, self.thres_cap
            ));
        }
        Ok(())
    }

    /// Percentile used to gate Lin-Kernighan after `stall` generations
    /// without improvement.
    pub fn threshold(&self, stall: usize) -> f64 {
        (self.thres_base + self.thres_step * stall as f64).min(self.thres_cap)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub best_fitness_per_generation: Vec<f64>,
    pub evaluations: usize,
    pub lk_invocations: usize,
    pub wall_time: f64,
}

/// Runs one method end to end. Deterministic methods ignore `cfg.seed`.
pub fn solve(inst: &GtspInstance, method: Method, cfg: &GaConfig) -> Result<(DrawingPath, SolveStats), SolverError> {
    let started = Instant::now();
    let (path, mut stats) = match method {
        Method::Rkga2Opt | Method::Rkga2OptLk => run_rkga(inst, cfg, method == Method::Rkga2OptLk)?,
        _ => {
            let mut p = greedy(inst);
            let mut lk = 0;
            match method {
                Method::Greedy2Opt => p = two_opt(inst, &p),
                Method::Greedy2OptLk => {
                    p = lin_kernighan(inst, &p);
                    lk = 1;
                }
                _ => {}
            }
            let f = evaluate(inst, &p).expect("solver paths are valid").v_fitness;
            let stats = SolveStats {
                best_fitness_per_generation: vec![f],
                evaluations: 1,
                lk_invocations: lk,
                wall_time: 0.0,
            };
            (p, stats)
        }
    };
    stats.wall_time = started.elapsed().as_secs_f64();
    Ok((path, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_labels_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("ga".parse::<Method>(), Err(SolverError::UnknownMethod(_))));
    }

    #[test]
    fn default_config_is_valid() {
        GaConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = GaConfig::default();
        let cases = [
            GaConfig { elite_count: 100, ..base.clone() },
            GaConfig { population_size: 0, elite_count: 0, ..base.clone() },
            GaConfig { p_crossover: 1.5, ..base.clone() },
            GaConfig { flip_p: -0.1, ..base.clone() },
            GaConfig { thres_base: 0.2, ..base.clone() },
            GaConfig { tournament_k: 0, ..base.clone() },
        ];
        for cfg in cases {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn threshold_schedule() {
        let cfg = GaConfig::default();
        assert!((cfg.threshold(0) - 0.05).abs() < 1e-12);
        assert!((cfg.threshold(5) - 0.10).abs() < 1e-12);
        assert!((cfg.threshold(50) - 0.10).abs() < 1e-12);
    }
}
