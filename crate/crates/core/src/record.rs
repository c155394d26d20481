//! Self-describing run records.  Every statistical invocation can be
//! persisted as a JSON record carrying its full configuration and its
//! tallies; [`replay`] re-executes the configuration and demands the
//! tallies reproduce bit-for-bit.  Wall-clock time and version strings are
//! informational and never compared.

use std::io::{BufRead, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::{
    cycle_length_survey, estimate_frontier_departure, estimate_return_probability,
    estimate_useful_bar_count, sweep_t, EstimateRecord, ExperimentConfig, Histogram,
    SweepEstimator,
};
use crate::renewal::{renewal_density_estimate, DensityEstimate};

/// Record layout version this build reads and writes.
pub const SCHEMA: u32 = 1;

/// What a recorded invocation computed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    UsefulBarCount,
    FrontierDeparture {
        target_episodes: u64,
    },
    ReturnProbability {
        s0: f64,
    },
    CycleLengthSurvey,
    Sweep {
        grid: Vec<f64>,
        estimator: SweepEstimator,
    },
    /// Strong-renewal-point density of the biased walk; carries its own
    /// seed because it needs no simulation config.
    RenewalDensity {
        beta: f64,
        path_len: usize,
        replicas: usize,
        seed: u64,
    },
}

/// The numeric payload a replay must reproduce exactly.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Tallies {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<EstimateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityEstimate>,
}

/// A persisted invocation: configuration, task, and outcome.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub schema: u32,
    pub version: String,
    /// Human-readable reconstruction of the invocation.
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    pub task: Task,
    pub tallies: Tallies,
    /// Wall-clock milliseconds; informational only.
    pub wall_ms: u64,
}

/// Runs a task against its configuration and collects the tallies.
pub fn execute(task: &Task, config: Option<&ExperimentConfig>) -> Result<Tallies, Error> {
    let need = || {
        config.ok_or_else(|| {
            Error::InvalidParameter("this task needs a simulation config".into())
        })
    };
    Ok(match task {
        Task::UsefulBarCount => {
            let out = estimate_useful_bar_count(need()?)?;
            Tallies {
                rows: vec![out.record],
                histogram: Some(out.histogram),
                density: None,
            }
        }
        Task::FrontierDeparture { target_episodes } => Tallies {
            rows: vec![estimate_frontier_departure(need()?, *target_episodes)?.record],
            ..Tallies::default()
        },
        Task::ReturnProbability { s0 } => Tallies {
            rows: vec![estimate_return_probability(need()?, *s0)?.record],
            ..Tallies::default()
        },
        Task::CycleLengthSurvey => {
            let out = cycle_length_survey(need()?)?;
            Tallies {
                rows: vec![out.record],
                histogram: Some(out.histogram),
                density: None,
            }
        }
        Task::Sweep { grid, estimator } => Tallies {
            rows: sweep_t(need()?, grid, estimator)?,
            ..Tallies::default()
        },
        Task::RenewalDensity {
            beta,
            path_len,
            replicas,
            seed,
        } => Tallies {
            density: Some(renewal_density_estimate(*beta, *path_len, *replicas, *seed)?),
            ..Tallies::default()
        },
    })
}

/// Executes a task and wraps the outcome as a persistable record.
pub fn record(
    command: &str,
    config: Option<ExperimentConfig>,
    task: Task,
) -> Result<RunRecord, Error> {
    let started = Instant::now();
    let tallies = execute(&task, config.as_ref())?;
    Ok(RunRecord {
        schema: SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config,
        task,
        tallies,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// Outcome of re-executing a record's configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    /// Whether the reproduced tallies equal the recorded ones exactly.
    pub matched: bool,
    pub reproduced: Tallies,
}

/// Re-runs a record's task and compares tallies bit-for-bit (wall-clock,
/// version, and command text are not part of the comparison).
pub fn replay(rec: &RunRecord) -> Result<ReplayReport, Error> {
    if rec.schema != SCHEMA {
        return Err(Error::InvalidParameter(format!(
            "record schema {} not supported (this build reads schema {SCHEMA})",
            rec.schema
        )));
    }
    let reproduced = execute(&rec.task, rec.config.as_ref())?;
    Ok(ReplayReport {
        matched: reproduced == rec.tallies,
        reproduced,
    })
}

pub fn write_record<W: Write>(rec: &RunRecord, out: W) -> Result<(), Error> {
    serde_json::to_writer_pretty(out, rec)?;
    Ok(())
}

pub fn read_record<R: BufRead>(input: R) -> Result<RunRecord, Error> {
    Ok(serde_json::from_reader(input)?)
}
