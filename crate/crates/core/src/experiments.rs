//! Monte Carlo estimators confronting the model's probabilistic bounds
//! with simulation at desk scale: useful-bar counts over one period,
//! frontier-departure rates after returns, return probabilities to the
//! root, and root-cycle-length surveys.
//!
//! Censoring is always explicit: runs cut off by the depth cap, the event
//! budget, or the clock horizon are tallied separately and never silently
//! folded into successes or failures.  Desk-scale runs can only exhibit
//! escape — they cannot prove transience — so "candidate infinite" always
//! means "censored at an explicit budget".
//!
//! Every estimator is deterministic in (config, master seed): runs execute
//! in parallel but aggregate by run index, so thread scheduling cannot
//! change any tally.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bars::BarStore;
use crate::error::Error;
use crate::meander::{root_cycle_length, run_meander, CycleVerdict, Hit, Horizon, Limits, Verdict};
use crate::rng::run_seed;
use crate::stats;
use crate::tree::{Tree, TreeKind, TreeSpec};
use crate::useful::UsefulIndex;

/// Shared knobs for one batch of simulation runs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub tree: TreeSpec,
    /// Cylinder period.
    pub t: f64,
    pub n_runs: u64,
    /// Event budget per run.
    #[serde(default = "default_max_events")]
    pub max_events: usize,
    /// Clock horizon per run, where the estimator needs one.
    pub horizon: f64,
    pub master_seed: u64,
}

fn default_max_events() -> usize {
    1_000_000
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.n_runs == 0 {
            return Err(Error::InvalidParameter("need at least one run".into()));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "period must be positive and finite, got {}",
                self.t
            )));
        }
        Ok(())
    }

    fn offspring(&self) -> Result<u32, Error> {
        match self.tree.kind {
            TreeKind::RegularOffspring { offspring } => Ok(offspring),
            _ => Err(Error::InvalidParameter(
                "this estimator is defined on the offspring-regular tree family".into(),
            )),
        }
    }
}

/// One estimator's outcome in the shape every CSV row shares.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EstimateRecord {
    pub estimator: String,
    pub t: f64,
    pub estimate: f64,
    pub lo99: f64,
    pub hi99: f64,
    /// Denominator of the estimate.
    pub n_effective: u64,
    /// Numerator of the estimate.
    pub successes: u64,
    pub censored_depth: u64,
    pub censored_budget: u64,
    pub censored_horizon: u64,
    pub seed: u64,
}

impl EstimateRecord {
    pub const CSV_HEADER: &'static str =
        "T,estimator,estimate,lo99,hi99,n,censored_depth,censored_budget,censored_horizon,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.estimator,
            self.estimate,
            self.lo99,
            self.hi99,
            self.n_effective,
            self.censored_depth,
            self.censored_budget,
            self.censored_horizon,
            self.seed
        )
    }

    fn from_tallies(estimator: &str, t: f64, successes: u64, n: u64, seed: u64) -> Self {
        let (estimate, lo99, hi99) = if n == 0 {
            (0.0, 0.0, 1.0)
        } else {
            let (lo, hi) = stats::wilson99(successes, n);
            (successes as f64 / n as f64, lo, hi)
        };
        EstimateRecord {
            estimator: estimator.to_string(),
            t,
            estimate,
            lo99,
            hi99,
            n_effective: n,
            successes,
            censored_depth: 0,
            censored_budget: 0,
            censored_horizon: 0,
            seed,
        }
    }
}

/// Integer-valued histogram with CSV emission.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Histogram(pub BTreeMap<u64, u64>);

impl Histogram {
    pub fn add(&mut self, value: u64) {
        *self.0.entry(value).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&k, &v) in &other.0 {
            *self.0.entry(k).or_insert(0) += v;
        }
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn mean(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return f64::NAN;
        }
        self.0.iter().map(|(&k, &v)| k as f64 * v as f64).sum::<f64>() / total as f64
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("length,count\n");
        for (&k, &v) in &self.0 {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

/// Per-run raw outcome used by the order-preserving folds.
enum RunOutcome<T> {
    Value(T),
    CensoredDepth,
    CensoredBudget,
}

fn env_for_run(cfg: &ExperimentConfig, index: u64) -> Result<(Tree, BarStore), Error> {
    let tree = Tree::new(cfg.tree.clone());
    let store = BarStore::new(cfg.t, run_seed(cfg.master_seed, index))?;
    Ok((tree, store))
}

/// Outcome of [`estimate_useful_bar_count`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct UsefulCountOutcome {
    pub record: EstimateRecord,
    /// Count threshold the success probability refers to.
    pub threshold: u64,
    pub histogram: Histogram,
}

/// Estimates the probability that the useful bars accrued over one period
/// from the root number at least `⌈T·d/18⌉`, on the `d`-offspring tree,
/// together with the full count histogram.
pub fn estimate_useful_bar_count(cfg: &ExperimentConfig) -> Result<UsefulCountOutcome, Error> {
    cfg.validate()?;
    let d = cfg.offspring()?;
    let threshold = (cfg.t * f64::from(d) / 18.0).ceil() as u64;
    let limits = Limits {
        max_events: cfg.max_events,
        horizon: Horizon::Clock(cfg.t),
        detect_cycles: false,
    };
    let outcomes: Result<Vec<RunOutcome<u64>>, Error> = (0..cfg.n_runs)
        .into_par_iter()
        .map(|i| {
            let (tree, store) = env_for_run(cfg, i)?;
            let traj = run_meander(&tree, &store, tree.root(), 0.0, &limits)?;
            Ok(match traj.verdict {
                Verdict::DepthCapHit => RunOutcome::CensoredDepth,
                Verdict::BudgetExhausted => RunOutcome::CensoredBudget,
                _ => {
                    let index = UsefulIndex::new(&tree, &traj);
                    let count = index.report_between(0.0, cfg.t)?.len() as u64;
                    RunOutcome::Value(count)
                }
            })
        })
        .collect();
    let mut histogram = Histogram::default();
    let mut successes = 0u64;
    let mut n = 0u64;
    let mut censored_depth = 0u64;
    let mut censored_budget = 0u64;
    for outcome in outcomes? {
        match outcome {
            RunOutcome::Value(count) => {
                histogram.add(count);
                n += 1;
                successes += u64::from(count >= threshold);
            }
            RunOutcome::CensoredDepth => censored_depth += 1,
            RunOutcome::CensoredBudget => censored_budget += 1,
        }
    }
    let mut record =
        EstimateRecord::from_tallies("useful-bar-count", cfg.t, successes, n, cfg.master_seed);
    record.censored_depth = censored_depth;
    record.censored_budget = censored_budget;
    Ok(UsefulCountOutcome {
        record,
        threshold,
        histogram,
    })
}

/// Outcome of [`estimate_frontier_departure`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FrontierOutcome {
    pub record: EstimateRecord,
    /// Runs simulated before the episode target was reached.
    pub runs_used: u64,
    /// Runs that produced no qualifying episode within their record.
    pub runs_without_episode: u64,
    /// Closed-form lower bound `(d−1)/(d+1)·(1−e^{−(d−1)T/2})` the rate is
    /// measured against.
    pub lower_bound: f64,
}

/// Measures how often the walk's return to a useful bar hanging strictly
/// below the root is followed by a frontier departure: the first arrival
/// off the bar's endpoints lands on a never-visited vertex.
///
/// Each run contributes at most its first qualifying episode, so episodes
/// are independent.  Runs are processed in index-ordered chunks and the
/// hunt stops deterministically once `target_episodes` returns have been
/// observed (or the run budget is exhausted).  Returns whose exit lies
/// beyond the record count in the denominator as non-frontier, which can
/// only bias the rate downward.
pub fn estimate_frontier_departure(
    cfg: &ExperimentConfig,
    target_episodes: u64,
) -> Result<FrontierOutcome, Error> {
    cfg.validate()?;
    let d = cfg.offspring()?;
    if target_episodes == 0 {
        return Err(Error::InvalidParameter("need a positive episode target".into()));
    }
    if cfg.horizon < cfg.t {
        return Err(Error::InvalidParameter(format!(
            "episode hunting needs horizon >= T, got {} < {}",
            cfg.horizon, cfg.t
        )));
    }
    let df = f64::from(d);
    let lower_bound = (df - 1.0) / (df + 1.0) * (-(-(df - 1.0) * cfg.t / 2.0).exp_m1());
    let limits = Limits {
        max_events: cfg.max_events,
        horizon: Horizon::Clock(cfg.horizon),
        detect_cycles: false,
    };

    #[derive(Clone, Copy)]
    enum EpisodeOutcome {
        None,
        Observed { frontier: bool },
    }
    let run_one = |i: u64| -> Result<(EpisodeOutcome, Option<RunOutcome<()>>), Error> {
        let (tree, store) = env_for_run(cfg, i)?;
        let traj = run_meander(&tree, &store, tree.root(), 0.0, &limits)?;
        let censor = match traj.verdict {
            Verdict::DepthCapHit => Some(RunOutcome::CensoredDepth),
            Verdict::BudgetExhausted => Some(RunOutcome::CensoredBudget),
            _ => None,
        };
        let index = UsefulIndex::new(&tree, &traj);
        let episode = match index.first_return_episode() {
            None => EpisodeOutcome::None,
            Some(ep) => EpisodeOutcome::Observed {
                frontier: index
                    .frontier_exit(ep.bar.bar.edge, ep.query_clock)?
                    .unwrap_or(false),
            },
        };
        Ok((episode, censor))
    };

    const CHUNK: u64 = 64;
    let mut returns = 0u64;
    let mut frontier = 0u64;
    let mut no_episode = 0u64;
    let mut censored_depth = 0u64;
    let mut censored_budget = 0u64;
    let mut runs_used = 0u64;
    let mut start = 0u64;
    while start < cfg.n_runs && returns < target_episodes {
        let end = (start + CHUNK).min(cfg.n_runs);
        let chunk: Result<Vec<_>, Error> = (start..end).into_par_iter().map(run_one).collect();
        for (episode, censor) in chunk? {
            runs_used += 1;
            match censor {
                Some(RunOutcome::CensoredDepth) => censored_depth += 1,
                Some(RunOutcome::CensoredBudget) => censored_budget += 1,
                _ => {}
            }
            match episode {
                EpisodeOutcome::None => no_episode += 1,
                EpisodeOutcome::Observed { frontier: f } => {
                    returns += 1;
                    frontier += u64::from(f);
                }
            }
            if returns >= target_episodes {
                break;
            }
        }
        start = end;
    }
    let mut record = EstimateRecord::from_tallies(
        "frontier-departure",
        cfg.t,
        frontier,
        returns,
        cfg.master_seed,
    );
    record.censored_depth = censored_depth;
    record.censored_budget = censored_budget;
    record.censored_horizon = no_episode;
    Ok(FrontierOutcome {
        record,
        runs_used,
        runs_without_episode: no_episode,
        lower_bound,
    })
}

/// Outcome of [`estimate_return_probability`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReturnOutcome {
    pub record: EstimateRecord,
    /// Runs where the walk provably revisits the root after the probe
    /// clock (directly observed, or forced by a periodic orbit).
    pub returned: u64,
    /// Runs where the recorded orbit provably never revisits the root
    /// after the probe clock.
    pub not_returned: u64,
}

/// Estimates the probability that no return to the root strictly after
/// clock `s0` is observed within the horizon.  Periodic and stuck runs
/// settle the question exactly; all other runs count as censored and are
/// reported inside the estimate (they are "no return observed"), keeping
/// the tally split explicit.
pub fn estimate_return_probability(
    cfg: &ExperimentConfig,
    s0: f64,
) -> Result<ReturnOutcome, Error> {
    cfg.validate()?;
    if !(s0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "probe clock must be nonnegative, got {s0}"
        )));
    }
    if cfg.horizon <= s0 {
        return Err(Error::InvalidParameter(format!(
            "horizon {} must exceed the probe clock {s0}",
            cfg.horizon
        )));
    }
    let limits = Limits {
        max_events: cfg.max_events,
        horizon: Horizon::Clock(cfg.horizon),
        detect_cycles: true,
    };
    enum Obs {
        Returned,
        NotReturned,
        Depth,
        Budget,
        Horizon,
    }
    let outcomes: Result<Vec<Obs>, Error> = (0..cfg.n_runs)
        .into_par_iter()
        .map(|i| {
            let (tree, store) = env_for_run(cfg, i)?;
            let traj = run_meander(&tree, &store, tree.root(), 0.0, &limits)?;
            let probe = s0.min(traj.covered());
            Ok(match traj.hitting_clock(&tree, probe, &[tree.root()])? {
                Hit::At(_) => Obs::Returned,
                Hit::Never => Obs::NotReturned,
                Hit::NotByHorizon(_) => match traj.verdict {
                    Verdict::DepthCapHit => Obs::Depth,
                    Verdict::BudgetExhausted => Obs::Budget,
                    _ => Obs::Horizon,
                },
            })
        })
        .collect();
    let (mut returned, mut not_returned) = (0u64, 0u64);
    let (mut c_depth, mut c_budget, mut c_horizon) = (0u64, 0u64, 0u64);
    for obs in outcomes? {
        match obs {
            Obs::Returned => returned += 1,
            Obs::NotReturned => not_returned += 1,
            Obs::Depth => c_depth += 1,
            Obs::Budget => c_budget += 1,
            Obs::Horizon => c_horizon += 1,
        }
    }
    let no_return_observed = not_returned + c_depth + c_budget + c_horizon;
    let mut record = EstimateRecord::from_tallies(
        "return-probability",
        cfg.t,
        no_return_observed,
        cfg.n_runs,
        cfg.master_seed,
    );
    record.censored_depth = c_depth;
    record.censored_budget = c_budget;
    record.censored_horizon = c_horizon;
    Ok(ReturnOutcome {
        record,
        returned,
        not_returned,
    })
}

/// Outcome of [`cycle_length_survey`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SurveyOutcome {
    pub record: EstimateRecord,
    /// Histogram of observed finite root-cycle lengths.
    pub histogram: Histogram,
}

/// Surveys the root's cycle length across random environments.  The
/// estimate is the censored ("candidate infinite") mass: the fraction of
/// runs cut off by the depth cap or event budget before the cycle closed.
pub fn cycle_length_survey(cfg: &ExperimentConfig) -> Result<SurveyOutcome, Error> {
    cfg.validate()?;
    let outcomes: Result<Vec<RunOutcome<u64>>, Error> = (0..cfg.n_runs)
        .into_par_iter()
        .map(|i| {
            let (tree, store) = env_for_run(cfg, i)?;
            Ok(match root_cycle_length(&tree, &store, cfg.max_events)? {
                CycleVerdict::FiniteCycle(len) => RunOutcome::Value(len),
                CycleVerdict::CensoredAtDepth => RunOutcome::CensoredDepth,
                CycleVerdict::CensoredAtBudget => RunOutcome::CensoredBudget,
            })
        })
        .collect();
    let mut histogram = Histogram::default();
    let (mut c_depth, mut c_budget) = (0u64, 0u64);
    for outcome in outcomes? {
        match outcome {
            RunOutcome::Value(len) => histogram.add(len),
            RunOutcome::CensoredDepth => c_depth += 1,
            RunOutcome::CensoredBudget => c_budget += 1,
        }
    }
    let mut record = EstimateRecord::from_tallies(
        "cycle-length-survey",
        cfg.t,
        c_depth + c_budget,
        cfg.n_runs,
        cfg.master_seed,
    );
    record.censored_depth = c_depth;
    record.censored_budget = c_budget;
    Ok(SurveyOutcome { record, histogram })
}

/// Which estimator a sweep drives.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepEstimator {
    UsefulBarCount,
    FrontierDeparture { target_episodes: u64 },
    ReturnProbability { s0: f64 },
    CycleLengthSurvey,
}

/// Runs one estimator across an increasing period grid with a shared
/// master seed, so environments are coupled across grid points (common
/// random numbers: where edges coincide, their bar streams coincide).
pub fn sweep_t(
    cfg: &ExperimentConfig,
    grid: &[f64],
    estimator: &SweepEstimator,
) -> Result<Vec<EstimateRecord>, Error> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let cell = ExperimentConfig {
            t,
            // Keep window-based horizons meaningful across the grid.
            horizon: cfg.horizon.max(t * (cfg.horizon / cfg.t)),
            ..cfg.clone()
        };
        let record = match estimator {
            SweepEstimator::UsefulBarCount => estimate_useful_bar_count(&cell)?.record,
            SweepEstimator::FrontierDeparture { target_episodes } => {
                estimate_frontier_departure(&cell, *target_episodes)?.record
            }
            SweepEstimator::ReturnProbability { s0 } => {
                estimate_return_probability(&cell, *s0)?.record
            }
            SweepEstimator::CycleLengthSurvey => cycle_length_survey(&cell)?.record,
        };
        rows.push(record);
    }
    Ok(rows)
}

/// CSV table for a sweep result.
pub fn sweep_csv(rows: &[EstimateRecord]) -> String {
    let mut out = String::from(EstimateRecord::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: u32, depth_cap: u32, t: f64, n_runs: u64, horizon: f64, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            tree: TreeSpec::regular(d, depth_cap).unwrap(),
            t,
            n_runs,
            max_events: 200_000,
            horizon,
            master_seed: seed,
        }
    }

    #[test]
    fn tiny_period_yields_no_useful_bars() {
        let out = estimate_useful_bar_count(&cfg(2, 64, 0.001, 80, 0.001, 1)).unwrap();
        assert_eq!(out.threshold, 1);
        assert!(out.record.estimate < 0.05, "estimate {}", out.record.estimate);
        assert!(out.histogram.0.get(&0).copied().unwrap_or(0) >= 75);
    }

    #[test]
    fn useful_count_accounting_identity() {
        let out = estimate_useful_bar_count(&cfg(2, 256, 5.0, 60, 5.0, 2)).unwrap();
        let r = &out.record;
        assert_eq!(
            r.n_effective + r.censored_depth + r.censored_budget,
            60,
            "every run lands in exactly one tally"
        );
        assert_eq!(out.histogram.total(), r.n_effective);
        assert!(r.lo99 <= r.estimate && r.estimate <= r.hi99);
    }

    #[test]
    fn estimators_are_deterministic() {
        let c = cfg(2, 256, 5.0, 40, 5.0, 7);
        let a = estimate_useful_bar_count(&c).unwrap();
        let b = estimate_useful_bar_count(&c).unwrap();
        assert_eq!(a, b);
        let c2 = cfg(2, 256, 2.0, 40, 8.0, 7);
        let r1 = estimate_return_probability(&c2, 0.5).unwrap();
        let r2 = estimate_return_probability(&c2, 0.5).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn frontier_hunt_with_no_episodes() {
        let out = estimate_frontier_departure(&cfg(2, 64, 0.05, 40, 0.2, 3), 5).unwrap();
        assert_eq!(out.record.n_effective, 0);
        assert_eq!(out.runs_without_episode, out.runs_used);
        assert_eq!(out.record.estimate, 0.0);
        assert_eq!((out.record.lo99, out.record.hi99), (0.0, 1.0));
    }

    #[test]
    fn frontier_hunt_reaches_its_target() {
        let out = estimate_frontier_departure(&cfg(2, 512, 10.0, 4_000, 30.0, 4), 60).unwrap();
        assert_eq!(out.record.n_effective, 60);
        assert!(out.runs_used <= 4_000);
        assert!(out.record.estimate >= 0.0 && out.record.estimate <= 1.0);
        assert!((out.lower_bound - (1.0 / 3.0) * (1.0 - (-5.0f64).exp())).abs() < 1e-12);
        // The proved bound cannot be beaten by more than noise; with only
        // 60 episodes allow a generous 4-SE slack.
        let se = stats::binomial_se(out.record.successes, out.record.n_effective);
        assert!(
            out.record.estimate >= out.lower_bound - 4.0 * se,
            "rate {} under bound {} (se {se})",
            out.record.estimate,
            out.lower_bound
        );
    }

    #[test]
    fn return_probability_accounting() {
        let c = cfg(2, 128, 2.0, 120, 10.0, 5);
        let out = estimate_return_probability(&c, 0.5).unwrap();
        let r = &out.record;
        let censored = r.censored_depth + r.censored_budget + r.censored_horizon;
        assert_eq!(out.returned + out.not_returned + censored, 120);
        assert_eq!(r.successes, out.not_returned + censored);
        assert!((r.estimate - r.successes as f64 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn return_probability_rejects_bad_probes() {
        let c = cfg(2, 128, 2.0, 10, 10.0, 5);
        assert!(estimate_return_probability(&c, -1.0).is_err());
        assert!(estimate_return_probability(&c, 10.0).is_err());
        let mut zero_t = c;
        zero_t.t = 0.0;
        assert!(estimate_return_probability(&zero_t, 0.5).is_err());
    }

    #[test]
    fn non_return_grows_with_the_period() {
        // Exploratory probe, not a proved bound: compare short and long periods
        // at d = 5 under coupled environments.
        let short = estimate_return_probability(&cfg(5, 400, 2.0, 80, 20.0, 6), 0.5).unwrap();
        let long = estimate_return_probability(&cfg(5, 400, 20.0, 80, 200.0, 6), 0.5).unwrap();
        let se_s = stats::binomial_se(short.record.successes, 80);
        let se_l = stats::binomial_se(long.record.successes, 80);
        let pooled = (se_s * se_s + se_l * se_l).sqrt();
        assert!(
            long.record.estimate >= short.record.estimate - 3.0 * pooled,
            "probe: long {} vs short {}",
            long.record.estimate,
            short.record.estimate
        );
    }

    #[test]
    fn survey_below_the_exclusion_threshold_closes_cycles() {
        // T = 0.3 < ln 2: the root's cluster is finite almost surely, so
        // with a generous depth cap nearly every cycle closes.
        let out = cycle_length_survey(&cfg(2, 256, 0.3, 150, 0.0, 8)).unwrap();
        assert!(out.record.estimate < 0.05, "censored mass {}", out.record.estimate);
        assert_eq!(
            out.histogram.total() + out.record.successes,
            150,
            "finite lengths plus censored runs cover all runs"
        );
        assert!(out.histogram.0.get(&1).copied().unwrap_or(0) > 0);
        let csv = out.histogram.csv();
        assert!(csv.starts_with("length,count\n"));
    }

    #[test]
    fn sweep_matches_direct_calls_and_is_deterministic() {
        let base = cfg(2, 256, 2.0, 30, 2.0, 9);
        let rows = sweep_t(&base, &[2.0], &SweepEstimator::UsefulBarCount).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = estimate_useful_bar_count(&base).unwrap();
        assert_eq!(rows[0], direct.record);

        let grid = [0.5, 1.0, 2.0];
        let a = sweep_t(&base, &grid, &SweepEstimator::CycleLengthSurvey).unwrap();
        let b = sweep_t(&base, &grid, &SweepEstimator::CycleLengthSurvey).unwrap();
        assert_eq!(a, b);
        let csv = sweep_csv(&a);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with(EstimateRecord::CSV_HEADER));

        assert!(sweep_t(&base, &[], &SweepEstimator::UsefulBarCount).is_err());
        assert!(sweep_t(&base, &[2.0, 1.0], &SweepEstimator::UsefulBarCount).is_err());
    }

    #[test]
    fn estimators_demand_the_right_tree_family() {
        let bad = ExperimentConfig {
            tree: TreeSpec::two_level_binary(),
            t: 1.0,
            n_runs: 5,
            max_events: 1_000,
            horizon: 1.0,
            master_seed: 0,
        };
        assert!(estimate_useful_bar_count(&bad).is_err());
        assert!(estimate_frontier_departure(&bad, 5).is_err());
        // The survey runs on any family.
        assert!(cycle_length_survey(&bad).is_ok());
    }
}
