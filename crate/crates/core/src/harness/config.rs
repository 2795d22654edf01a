//! Experiment configuration.

use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    make_random_order_schedule, make_random_subset_schedule, make_round_robin_schedule, make_synchronous_schedule,
    ActivationSchedule, DynamicsConfig,
};
use crate::harness::io;
use crate::market::{generate_random_market, MarketInstance};
use crate::parallel::Execution;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarketSpec {
    /// A fresh random market per run, seeded from `(seed, run index)`.
    Generate { n: usize, m: usize, seed: u64 },
    /// The same market for every run.
    File { path: PathBuf },
}

impl Default for MarketSpec {
    fn default() -> Self {
        MarketSpec::Generate { n: 10, m: 10, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    RoundRobin,
    RandomSubset,
    RandomOrder,
    Synchronous,
    File,
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "round-robin" => ScheduleKind::RoundRobin,
            "random-subset" => ScheduleKind::RandomSubset,
            "random-order" => ScheduleKind::RandomOrder,
            "synchronous" => ScheduleKind::Synchronous,
            "file" => ScheduleKind::File,
            other => return Err(Error::Config(format!("unknown schedule kind `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    /// Liveness bound for `random-subset` (defaults to `n`).
    #[serde(rename = "T")]
    pub liveness: Option<usize>,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec {
            kind: ScheduleKind::RoundRobin,
            liveness: None,
            seed: 0,
            path: None,
        }
    }
}

impl ScheduleSpec {
    /// Builds a schedule of `steps` steps for `n` buyers.
    pub fn build(&self, n: usize, steps: usize, seed: u64) -> Result<ActivationSchedule> {
        Ok(match self.kind {
            ScheduleKind::RoundRobin => make_round_robin_schedule(n, steps),
            ScheduleKind::Synchronous => make_synchronous_schedule(n),
            ScheduleKind::RandomOrder => make_random_order_schedule(n, steps, seed),
            ScheduleKind::RandomSubset => {
                let t = self.liveness.unwrap_or(n);
                if t == 0 {
                    return Err(Error::Config("schedule T must be at least 1".into()));
                }
                make_random_subset_schedule(n, steps, t, seed)
            }
            ScheduleKind::File => {
                let path = self
                    .path
                    .as_deref()
                    .ok_or_else(|| Error::Config("schedule kind `file` needs a path".into()))?;
                io::load_schedule(path, n)?
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub size: usize,
    pub workers: Option<usize>,
    /// Tolerance passed to the equilibrium oracle for each run's reference.
    pub oracle_tol: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            size: 300,
            workers: None,
            oracle_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Nothing is written when unset.
    pub dir: Option<PathBuf>,
    /// Write one trajectory CSV per run under `dir/runs/`.
    pub per_run: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub market: MarketSpec,
    pub schedule: ScheduleSpec,
    pub dynamics: DynamicsConfig,
    pub ensemble: EnsembleSpec,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: ExperimentConfig = io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let MarketSpec::File { path } = &mut config.market {
            resolve(path);
        }
        if let Some(p) = &mut config.schedule.path {
            resolve(p);
        }
        if let Some(p) = &mut config.output.dir {
            resolve(p);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble.size == 0 {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        if !(self.ensemble.oracle_tol > 0.0) {
            return Err(Error::Config("oracle_tol must be positive".into()));
        }
        if self.ensemble.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.dynamics.validate()?;
        match &self.market {
            MarketSpec::Generate { n, m, .. } if *n == 0 || *m == 0 => {
                return Err(Error::Config("generated markets need n, m >= 1".into()));
            }
            MarketSpec::File { path } if !path.is_file() => {
                return Err(Error::Config(format!("market file {} does not exist", path.display())));
            }
            _ => {}
        }
        if self.schedule.kind == ScheduleKind::File {
            match &self.schedule.path {
                Some(p) if p.is_file() => {}
                Some(p) => return Err(Error::Config(format!("schedule file {} does not exist", p.display()))),
                None => return Err(Error::Config("schedule kind `file` needs a path".into())),
            }
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        Execution::with_workers(self.ensemble.workers)
    }

    /// Market used by run `index`.
    pub fn market_for(&self, index: usize) -> Result<MarketInstance> {
        match &self.market {
            MarketSpec::Generate { n, m, seed } => Ok(generate_random_market(*n, *m, derive_seed(*seed, index))),
            MarketSpec::File { path } => io::load_market(path),
        }
    }

    /// Schedule used by run `index`, sized to the step budget.
    pub fn schedule_for(&self, n: usize, index: usize) -> Result<ActivationSchedule> {
        self.schedule
            .build(n, self.dynamics.max_steps, derive_seed(self.schedule.seed, index))
    }
}

/// Independent per-run seed: the first output of the ChaCha stream `index`
/// keyed by `master`.
pub fn derive_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}
