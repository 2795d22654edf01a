//! Ensembles of independent runs and their step-aligned averages.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{derive_seed, ExperimentConfig, MarketSpec};
use super::io::{self, format_real, TrajectoryRow};
use crate::dynamics::{default_initial_bids, run_dynamics, Trajectory};
use crate::equilibrium::compute_equilibrium;
use crate::parallel::{map_indexed, Execution};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub index: usize,
    pub market_seed: Option<u64>,
    pub schedule_seed: u64,
    pub steps_run: usize,
    pub converged_at: Option<usize>,
    pub settled_at: Option<usize>,
    /// Bid distances are an upper bound on the distance to the equilibrium
    /// set because the market was not certified generic.
    #[serde(default)]
    pub distance_upper_bound: bool,
    /// Set when the oracle could not certify this run's market; such runs
    /// are left out of the averages.
    pub failure: Option<String>,
}

/// One step of the cross-run averages.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub t: usize,
    pub potential_mean: f64,
    pub nsw_mean: f64,
    pub distance_mean: f64,
    /// Share of the averaged runs that had already stopped and contribute
    /// their terminal value.
    pub padded_fraction: f64,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: Vec<RunSummary>,
    pub failures: usize,
    #[serde(skip)]
    pub aggregate: Vec<AggregateRow>,
}

impl EnsembleSummary {
    pub fn convergence_steps(&self) -> Vec<Option<usize>> {
        self.runs.iter().map(|r| r.converged_at).collect()
    }
}

struct RunOutcome {
    summary: RunSummary,
    rows: Option<Vec<TrajectoryRow>>,
}

fn run_one(config: &ExperimentConfig, index: usize) -> Result<(RunOutcome, Option<Trajectory>)> {
    let market = config.market_for(index)?;
    let market_seed = match &config.market {
        MarketSpec::Generate { seed, .. } => Some(derive_seed(*seed, index)),
        MarketSpec::File { .. } => None,
    };
    let schedule_seed = derive_seed(config.schedule.seed, index);
    let mut summary = RunSummary {
        index,
        market_seed,
        schedule_seed,
        steps_run: 0,
        converged_at: None,
        settled_at: None,
        distance_upper_bound: false,
        failure: None,
    };
    let cert = match compute_equilibrium(&market, config.ensemble.oracle_tol, schedule_seed) {
        Ok(cert) => cert,
        Err(Error::Oracle(failure)) => {
            summary.failure = Some(failure.reason);
            return Ok((RunOutcome { summary, rows: None }, None));
        }
        Err(e) => return Err(e),
    };
    let schedule = config.schedule_for(market.n(), index)?;
    let traj = run_dynamics(
        &market,
        &default_initial_bids(&market),
        &schedule,
        &config.dynamics,
        Some(&cert.reference()),
    )?;
    summary.steps_run = traj.steps_run;
    summary.converged_at = traj.converged_at;
    summary.settled_at = traj.settled_at;
    summary.distance_upper_bound = !cert.is_generic();
    let rows = TrajectoryRow::from_trajectory(&traj);
    Ok((
        RunOutcome {
            summary,
            rows: Some(rows),
        },
        Some(traj),
    ))
}

/// Runs the ensemble with the execution mode named in the config.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleSummary> {
    run_ensemble_with(config, config.execution())
}

/// Each run gets its own market and schedule seeded from the run index, so
/// the result does not depend on `execution`. Writes per-run CSVs (when
/// enabled), `aggregate.csv` and `summary.json` under the output directory.
pub fn run_ensemble_with(config: &ExperimentConfig, execution: Execution) -> Result<EnsembleSummary> {
    config.validate()?;
    let runs_dir = config.output.dir.as_ref().map(|d| d.join("runs"));
    if let Some(dir) = &config.output.dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    if let (Some(dir), true) = (&runs_dir, config.output.per_run) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let outcomes = map_indexed(config.ensemble.size, execution, |index| -> Result<RunOutcome> {
        let (outcome, traj) = run_one(config, index)?;
        if let (Some(dir), true, Some(traj)) = (&runs_dir, config.output.per_run, &traj) {
            io::save_trajectory_csv(&dir.join(run_file_name(index)), traj)?;
        }
        Ok(outcome)
    });
    let outcomes: Vec<RunOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let series: Vec<&[TrajectoryRow]> = outcomes.iter().filter_map(|o| o.rows.as_deref()).collect();
    let aggregate = aggregate(&series);
    let runs: Vec<RunSummary> = outcomes.into_iter().map(|o| o.summary).collect();
    let summary = EnsembleSummary {
        failures: runs.iter().filter(|r| r.failure.is_some()).count(),
        runs,
        aggregate,
    };
    if let Some(dir) = &config.output.dir {
        let path = dir.join("aggregate.csv");
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_aggregate_csv(std::io::BufWriter::new(file), &summary.aggregate)?;
        io::write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

pub fn run_file_name(index: usize) -> String {
    format!("run_{index:04}.csv")
}

/// Averages the runs on the union of their recorded steps. Between two
/// recorded points a run contributes its latest earlier point; after its
/// last point it contributes its terminal value and counts as padded.
pub fn aggregate(series: &[&[TrajectoryRow]]) -> Vec<AggregateRow> {
    let mut grid: Vec<usize> = series.iter().flat_map(|s| s.iter().map(|r| r.t)).collect();
    grid.sort_unstable();
    grid.dedup();
    let mut cursor = vec![0usize; series.len()];
    let count = series.len();
    grid.into_iter()
        .map(|t| {
            let (mut potential, mut nsw, mut distance, mut padded) = (0.0, 0.0, 0.0, 0usize);
            for (s, c) in series.iter().zip(cursor.iter_mut()) {
                while *c + 1 < s.len() && s[*c + 1].t <= t {
                    *c += 1;
                }
                let row = &s[*c];
                if t > s[s.len() - 1].t {
                    padded += 1;
                }
                potential += row.potential;
                nsw += row.nsw;
                distance += row.distance.unwrap_or(f64::NAN);
            }
            let k = count as f64;
            AggregateRow {
                t,
                potential_mean: potential / k,
                nsw_mean: nsw / k,
                distance_mean: distance / k,
                padded_fraction: padded as f64 / k,
                runs: count,
            }
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(["t", "potential_mean", "nsw_mean", "distance_mean", "padded_fraction", "runs"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            format_real(r.potential_mean),
            format_real(r.nsw_mean),
            format_real(r.distance_mean),
            format_real(r.padded_fraction),
            r.runs.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

pub fn read_aggregate_csv<R: std::io::Read>(input: R) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_reader(input);
    let bad = |s: &str| Error::Csv(format!("bad aggregate cell `{s}`"));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() != 6 {
            return Err(Error::Csv("aggregate rows have 6 columns".into()));
        }
        let real = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(&rec[k]));
        rows.push(AggregateRow {
            t: rec[0].parse().map_err(|_| bad(&rec[0]))?,
            potential_mean: real(1)?,
            nsw_mean: real(2)?,
            distance_mean: real(3)?,
            padded_fraction: real(4)?,
            runs: rec[5].parse().map_err(|_| bad(&rec[5]))?,
        });
    }
    Ok(rows)
}

pub fn load_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_aggregate_csv(std::io::BufReader::new(file))
}
