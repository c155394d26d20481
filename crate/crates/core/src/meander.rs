//! The meander: deterministic unit-speed motion through a bar environment.
//!
//! Start the meander at a pole position `(v, h)`.  It climbs the pole of `v`
//! cyclically (height `h + s mod T` after time `s`) until it reaches a joint,
//! crosses that bar to the joint on the other endpoint's pole, and climbs on
//! from there.  The crossing sequence is recorded as a [`Trajectory`]; the
//! vertex projection of the motion is the walk `Y`, and the vertex reached
//! after exactly one period, started from height 0, is the stirring
//! permutation's image of the start vertex.
//!
//! Two bookkeeping choices matter for exactness.  Heights are never
//! accumulated: after a crossing the height *is* the joint height.  Clocks
//! are derived from an exact count of full periods (`wraps`) plus a single
//! height difference, so comparing an event against a whole-period horizon
//! is exact integer arithmetic, not a drifting float sum.
//!
//! The motion is invertible, so an orbit that revisits an arrival state
//! (same bar, same crossing direction) is periodic from the start; detection
//! hashes arrival states.  With probability one a trajectory either escapes
//! down the tree forever or closes into a finite orbit, and a closed orbit
//! through height 0 of the root has continuous period `k T` where `k` is the
//! root's cycle length under the stirring permutation.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::bars::{next_joint, BarSource};
use crate::error::Error;
use crate::tree::{EdgeId, NodeId, Tree};

/// One bar crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingEvent {
    /// Elapsed time at the crossing, derived as `wraps * T + (height - start
    /// height)`.
    pub clock: f64,
    /// Exact number of completed passes of the start height.
    pub wraps: u64,
    pub edge: EdgeId,
    pub height: f64,
    /// True when the crossing arrives at the edge's child endpoint.
    pub to_child: bool,
}

impl CrossingEvent {
    pub fn arrival(&self, tree: &Tree) -> NodeId {
        if self.to_child {
            self.edge.child
        } else {
            tree.parent(self.edge.child).expect("crossed edge has a parent endpoint")
        }
    }

    pub fn departed(&self, tree: &Tree) -> NodeId {
        if self.to_child {
            tree.parent(self.edge.child).expect("crossed edge has a parent endpoint")
        } else {
            self.edge.child
        }
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The orbit revisited the arrival state of event `first_repeat`; the
    /// whole motion is periodic and known for all time.
    Periodic { first_repeat: usize },
    /// The start pole carries no joints; the meander never moves.
    Stuck,
    /// A child block could not be materialized; censored.
    DepthCapHit,
    /// The event budget ran out; censored.
    BudgetExhausted,
    /// The requested horizon was reached; the motion is known on `[0,
    /// horizon]`.
    HorizonReached,
}

/// How far to run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// Stop before the first event with elapsed time beyond this clock.
    Clock(f64),
    /// Stop before the first event beyond `n` exact periods.  Comparisons
    /// against the boundary are exact, which is what permutation extraction
    /// relies on.
    Periods(u64),
    /// Run until another limit intervenes.
    Unbounded,
}

/// Run limits.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_events: usize,
    pub horizon: Horizon,
    /// Disable to record past the first repeat (used by the periodicity
    /// soundness tests); detection is cheap and on by default.
    pub detect_cycles: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_events: 1_000_000,
            horizon: Horizon::Unbounded,
            detect_cycles: true,
        }
    }
}

impl Limits {
    pub fn with_horizon(horizon: Horizon) -> Self {
        Limits {
            horizon,
            ..Limits::default()
        }
    }
}

/// Periodicity data for a [`Verdict::Periodic`] trajectory.
#[derive(Clone, Copy, Debug)]
pub struct CycleInfo {
    /// Index of the first event whose arrival state recurs.
    pub first_repeat: usize,
    /// Index of the event at which the recurrence was noticed (always the
    /// last recorded event).
    pub repeat_event: usize,
    /// Continuous period in exact whole-period units ... the orbit repeats
    /// after precisely this many periods when the repeated heights coincide.
    pub period_wraps: u64,
    /// Continuous period as a clock value.
    pub period_clock: f64,
}

/// A recorded meander run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t_period: f64,
    pub start: NodeId,
    pub start_height: f64,
    pub events: Vec<CrossingEvent>,
    pub verdict: Verdict,
    pub cycle: Option<CycleInfo>,
    covered: f64,
}

/// Result of a hitting-time query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Hit {
    /// First time at or after the query time that the walk sits in the
    /// target set.
    At(f64),
    /// Provably never: the trajectory is periodic or stuck and the target
    /// does not recur.
    Never,
    /// Not hit within the covered horizon (censored data).
    NotByHorizon(f64),
}

pub fn run_meander<S: BarSource + ?Sized>(
    tree: &Tree,
    source: &S,
    start: NodeId,
    start_height: f64,
    limits: &Limits,
) -> Result<Trajectory, Error> {
    let t = source.period();
    if !(0.0..t).contains(&start_height) {
        return Err(Error::InvalidParameter(format!(
            "start height {start_height} outside [0, {t})"
        )));
    }
    let mut v = start;
    let mut h = start_height;
    let mut wraps: u64 = 0;
    let mut events: Vec<CrossingEvent> = Vec::new();
    let mut seen: HashMap<(u32, u64, bool), usize> = HashMap::new();
    let mut cycle = None;

    let verdict = loop {
        let joint = match next_joint(tree, source, v, h) {
            Ok(Some(j)) => j,
            Ok(None) => break Verdict::Stuck,
            Err(Error::DepthCapExceeded { .. }) => break Verdict::DepthCapHit,
            Err(e) => return Err(e),
        };
        let next_wraps = wraps + u64::from(joint.height <= h);
        let clock = next_wraps as f64 * t + (joint.height - start_height);
        let within = match limits.horizon {
            Horizon::Unbounded => true,
            Horizon::Clock(c) => clock <= c,
            Horizon::Periods(m) => {
                next_wraps < m || (next_wraps == m && joint.height <= start_height)
            }
        };
        if !within {
            break Verdict::HorizonReached;
        }
        wraps = next_wraps;
        h = joint.height;
        v = if joint.to_child {
            joint.edge.child
        } else {
            tree.parent(joint.edge.child).expect("joint on a parent edge")
        };
        events.push(CrossingEvent {
            clock,
            wraps,
            edge: joint.edge,
            height: h,
            to_child: joint.to_child,
        });
        if limits.detect_cycles {
            let key = (joint.edge.child.0, h.to_bits(), joint.to_child);
            match seen.get(&key) {
                Some(&first_repeat) => {
                    let repeat_event = events.len() - 1;
                    cycle = Some(CycleInfo {
                        first_repeat,
                        repeat_event,
                        period_wraps: events[repeat_event].wraps - events[first_repeat].wraps,
                        period_clock: events[repeat_event].clock - events[first_repeat].clock,
                    });
                    break Verdict::Periodic { first_repeat };
                }
                None => {
                    seen.insert(key, events.len() - 1);
                }
            }
        }
        if events.len() >= limits.max_events {
            break Verdict::BudgetExhausted;
        }
    };

    let covered = match verdict {
        Verdict::Periodic { .. } | Verdict::Stuck => f64::INFINITY,
        Verdict::HorizonReached => match limits.horizon {
            Horizon::Clock(c) => c,
            Horizon::Periods(m) => m as f64 * t,
            Horizon::Unbounded => unreachable!("unbounded horizon cannot be reached"),
        },
        Verdict::BudgetExhausted | Verdict::DepthCapHit => {
            events.last().map(|e| e.clock).unwrap_or(0.0)
        }
    };

    Ok(Trajectory {
        t_period: t,
        start,
        start_height,
        events,
        verdict,
        cycle,
        covered,
    })
}

impl Trajectory {
    /// Time up to which the walk is fully known.  Infinite for periodic and
    /// stuck runs.
    pub fn covered(&self) -> f64 {
        self.covered
    }

    pub fn is_censored(&self) -> bool {
        matches!(self.verdict, Verdict::DepthCapHit | Verdict::BudgetExhausted)
    }

    /// Index of the last event with clock at most `q`, reducing into the
    /// periodic part when `q` lies beyond the recorded events.
    fn event_index_at(&self, q: f64) -> Option<usize> {
        let q = self.reduce_clock(q);
        let n = self.events.partition_point(|e| e.clock <= q);
        n.checked_sub(1)
    }

    /// Maps a clock beyond the recorded events into the recorded periodic
    /// window; identity for clocks inside the record or for aperiodic runs.
    fn reduce_clock(&self, q: f64) -> f64 {
        let Some(cycle) = &self.cycle else { return q };
        let last = self.events[cycle.repeat_event].clock;
        if q <= last {
            return q;
        }
        let base = self.events[cycle.first_repeat].clock;
        let p = cycle.period_clock;
        let periods = ((q - base) / p).floor();
        let mut reduced = q - periods * p;
        // Guard the float floor against landing just outside [base, base+p).
        while reduced >= base + p {
            reduced -= p;
        }
        while reduced < base {
            reduced += p;
        }
        reduced
    }

    /// The walk's position at clock `q` (right-continuous).
    pub fn vertex_at(&self, tree: &Tree, q: f64) -> Result<NodeId, Error> {
        if q < 0.0 {
            return Err(Error::InvalidParameter(format!("negative clock {q}")));
        }
        if q > self.covered {
            return Err(Error::QueryBeyondHorizon {
                t: q,
                covered: self.covered,
            });
        }
        Ok(match self.event_index_at(q) {
            None => self.start,
            Some(i) => self.events[i].arrival(tree),
        })
    }

    /// The walk's position after exactly `m` periods, compared exactly.
    pub fn vertex_at_periods(&self, tree: &Tree, m: u64) -> Result<NodeId, Error> {
        if m as f64 * self.t_period > self.covered {
            return Err(Error::QueryBeyondHorizon {
                t: m as f64 * self.t_period,
                covered: self.covered,
            });
        }
        let m = match &self.cycle {
            Some(cycle) if cycle.period_wraps > 0 => {
                let base = self.events[cycle.first_repeat].wraps;
                if m > base {
                    base + (m - base) % cycle.period_wraps
                } else {
                    m
                }
            }
            _ => m,
        };
        let included = |e: &CrossingEvent| {
            e.wraps < m || (e.wraps == m && e.height <= self.start_height)
        };
        let n = self.events.partition_point(included);
        Ok(match n.checked_sub(1) {
            None => self.start,
            Some(i) => self.events[i].arrival(tree),
        })
    }

    /// First clock at or after `from` at which the walk sits in `targets`.
    pub fn hitting_clock(
        &self,
        tree: &Tree,
        from: f64,
        targets: &[NodeId],
    ) -> Result<Hit, Error> {
        if from > self.covered {
            return Err(Error::QueryBeyondHorizon {
                t: from,
                covered: self.covered,
            });
        }
        if targets.contains(&self.vertex_at(tree, from)?) {
            return Ok(Hit::At(from));
        }
        // Scan recorded arrivals strictly after `from` (after periodic
        // reduction; in the periodic case a full extra period of scanning is
        // covered by the candidate shifting below).
        let from_reduced = self.reduce_clock(from);
        let start_idx = self.events.partition_point(|e| e.clock <= from_reduced);
        for e in &self.events[start_idx..] {
            if targets.contains(&e.arrival(tree)) {
                let shift = from - from_reduced;
                return Ok(Hit::At(e.clock + shift));
            }
        }
        match (&self.verdict, &self.cycle) {
            (Verdict::Stuck, _) => Ok(Hit::Never),
            (Verdict::Periodic { .. }, Some(cycle)) => {
                // Wrap once around the cycle.
                let p = cycle.period_clock;
                let mut best: Option<f64> = None;
                for e in &self.events[cycle.first_repeat..cycle.repeat_event] {
                    if targets.contains(&e.arrival(tree)) {
                        let mut q = e.clock;
                        let lower = self.reduce_clock(from);
                        while q <= lower {
                            q += p;
                        }
                        let q = q + (from - lower);
                        best = Some(best.map_or(q, |b: f64| b.min(q)));
                    }
                }
                Ok(best.map_or(Hit::Never, Hit::At))
            }
            _ => Ok(Hit::NotByHorizon(self.covered)),
        }
    }

    /// Clocks of all first visits: arrival times of events whose vertex was
    /// never seen before.  The start vertex, visited at time 0, is not
    /// listed.
    pub fn frontier_clocks(&self, tree: &Tree) -> Vec<f64> {
        let mut visited = std::collections::HashSet::new();
        visited.insert(self.start);
        let mut out = Vec::new();
        for e in &self.events {
            if visited.insert(e.arrival(tree)) {
                out.push(e.clock);
            }
        }
        out
    }

    /// Largest deviation between stored heights and heights recomputed from
    /// the clock, a diagnostic for the bookkeeping invariant.
    pub fn height_drift(&self) -> f64 {
        let t = self.t_period;
        self.events
            .iter()
            .map(|e| {
                let expected = (self.start_height + e.clock) % t;
                let d = (e.height - expected).abs();
                d.min((d - t).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Outcome of chasing the root's cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleVerdict {
    /// The root's cycle under the stirring permutation has this length.
    FiniteCycle(u64),
    CensoredAtDepth,
    CensoredAtBudget,
}

/// Determines the root's cycle length by running the meander from `(root,
/// 0)` until it closes or a limit censors it.
///
/// A closed orbit through the root at height 0 has continuous period exactly
/// `k` whole periods, and `k` is the root's cycle length.
pub fn root_cycle_length<S: BarSource + ?Sized>(
    tree: &Tree,
    source: &S,
    max_events: usize,
) -> Result<CycleVerdict, Error> {
    let limits = Limits {
        max_events,
        horizon: Horizon::Unbounded,
        detect_cycles: true,
    };
    let traj = run_meander(tree, source, tree.root(), 0.0, &limits)?;
    Ok(match traj.verdict {
        Verdict::Stuck => CycleVerdict::FiniteCycle(1),
        Verdict::Periodic { .. } => {
            let cycle = traj.cycle.expect("periodic verdict carries cycle info");
            debug_assert_eq!(
                cycle.first_repeat, 0,
                "an invertible flow can only repeat its first state first"
            );
            CycleVerdict::FiniteCycle(cycle.period_wraps)
        }
        Verdict::DepthCapHit => CycleVerdict::CensoredAtDepth,
        Verdict::BudgetExhausted => CycleVerdict::CensoredAtBudget,
        Verdict::HorizonReached => unreachable!("no horizon was set"),
    })
}

/// Writes a trajectory in the flat text format: a `T=... seed=...` header,
/// then one `clock<TAB>edge-path<TAB>direction<TAB>height` line per event.
pub fn write_trajectory<W: Write>(
    tree: &Tree,
    traj: &Trajectory,
    seed: u64,
    mut out: W,
) -> Result<(), Error> {
    writeln!(out, "T={} seed={}", traj.t_period, seed)?;
    for e in &traj.events {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            e.clock,
            tree.edge_string(e.edge),
            if e.to_child { "down" } else { "up" },
            e.height
        )?;
    }
    Ok(())
}

/// One parsed trajectory row.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub clock: f64,
    pub edge_path: String,
    pub to_child: bool,
    pub height: f64,
}

/// Reads the flat trajectory format back; returns `(T, seed, rows)`.
pub fn read_trajectory<R: BufRead>(input: R) -> Result<(f64, u64, Vec<TrajectoryRow>), Error> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "missing header".into(),
    })?;
    let header = header?;
    let parse_header = || -> Option<(f64, u64)> {
        let mut t = None;
        let mut seed = None;
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("T=") {
                t = v.parse().ok();
            } else if let Some(v) = tok.strip_prefix("seed=") {
                seed = v.parse().ok();
            }
        }
        Some((t?, seed?))
    };
    let (t, seed) = parse_header().ok_or(Error::Parse {
        line: 1,
        reason: format!("bad header {header:?}"),
    })?;
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let err = |reason: String| Error::Parse {
            line: lineno + 1,
            reason,
        };
        if parts.len() != 4 {
            return Err(err("expected clock<TAB>edge-path<TAB>direction<TAB>height".into()));
        }
        let clock: f64 = parts[0]
            .parse()
            .map_err(|_| err(format!("bad clock {:?}", parts[0])))?;
        let to_child = match parts[2] {
            "down" => true,
            "up" => false,
            other => return Err(err(format!("bad direction {other:?}"))),
        };
        let height: f64 = parts[3]
            .parse()
            .map_err(|_| err(format!("bad height {:?}", parts[3])))?;
        rows.push(TrajectoryRow {
            clock,
            edge_path: parts[1].to_string(),
            to_child,
            height,
        });
    }
    Ok((t, seed, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bars::{BarStore, FixedBars};
    use crate::testenv::{ladder_example, ping_pong_example, two_bar_example};
    use crate::tree::{Tree, TreeSpec};

    fn run(tree: &Tree, bars: &FixedBars, limits: &Limits) -> Trajectory {
        run_meander(tree, bars, tree.root(), 0.0, limits).unwrap()
    }

    #[test]
    fn two_bar_trace_matches_the_hand_computation() {
        // Worked example: crossings at 0.3T, 1.3T, 1.6T, 2.6T, then the
        // repeat at 3.3T; period 3T; frontier times 0.3T and 1.6T.
        let t = 1.0;
        let (tree, bars) = two_bar_example(t);
        let traj = run(&tree, &bars, &Limits::default());
        assert_eq!(traj.verdict, Verdict::Periodic { first_repeat: 0 });
        let clocks: Vec<f64> = traj.events.iter().map(|e| e.clock).collect();
        assert_eq!(clocks, vec![0.3, 1.3, 1.6, 2.6, 3.3]);
        let arrivals: Vec<String> = traj
            .events
            .iter()
            .map(|e| tree.path_string(e.arrival(&tree)))
            .collect();
        assert_eq!(arrivals, vec!["0", "phi", "1", "phi", "0"]);
        let cycle = traj.cycle.unwrap();
        assert_eq!(cycle.period_wraps, 3);
        assert!((cycle.period_clock - 3.0).abs() < 1e-12);
        assert_eq!(traj.frontier_clocks(&tree), vec![0.3, 1.6]);
        assert!(traj.height_drift() < 1e-12);
    }

    #[test]
    fn walk_positions_along_the_two_bar_trace() {
        let (tree, bars) = two_bar_example(1.0);
        let traj = run(&tree, &bars, &Limits::default());
        let at = |q: f64| tree.path_string(traj.vertex_at(&tree, q).unwrap());
        assert_eq!(at(0.0), "phi");
        assert_eq!(at(0.3), "0"); // right-continuous at the crossing
        assert_eq!(at(0.29999), "phi");
        assert_eq!(at(1.0), "0");
        assert_eq!(at(1.45), "phi");
        assert_eq!(at(2.0), "1");
        assert_eq!(at(3.0), "phi");
        // Periodic extension: position at 10.45 equals position at 1.45.
        assert_eq!(at(10.45), "phi");
        // Exact period queries give the permutation orbit phi -> 0 -> 1 -> phi.
        let orbit: Vec<String> = (0..4)
            .map(|m| tree.path_string(traj.vertex_at_periods(&tree, m).unwrap()))
            .collect();
        assert_eq!(orbit, vec!["phi", "0", "1", "phi"]);
    }

    #[test]
    fn hitting_queries_on_the_two_bar_trace() {
        let (tree, bars) = two_bar_example(1.0);
        let traj = run(&tree, &bars, &Limits::default());
        let v0 = tree.vertex_by_string("0").unwrap();
        let v1 = tree.vertex_by_string("1").unwrap();
        let leaf = tree.vertex_by_string("0.0").unwrap();
        assert_eq!(traj.hitting_clock(&tree, 0.0, &[v0]).unwrap(), Hit::At(0.3));
        assert_eq!(traj.hitting_clock(&tree, 0.0, &[v1]).unwrap(), Hit::At(1.6));
        // Never reached: the orbit is periodic and the leaf is not on it.
        assert_eq!(traj.hitting_clock(&tree, 0.0, &[leaf]).unwrap(), Hit::Never);
        // Sitting on the target counts immediately.
        assert_eq!(traj.hitting_clock(&tree, 0.4, &[v0]).unwrap(), Hit::At(0.4));
        // After departing (back at the root at 1.3), the next pass is 3.3.
        assert_eq!(traj.hitting_clock(&tree, 1.4, &[v0]).unwrap(), Hit::At(3.3));
        // A query beyond the recorded events reduces into the cycle: from
        // 4.4 the walk is mid-orbit at the root and returns to 0 at 6.3.
        assert_eq!(traj.hitting_clock(&tree, 4.4, &[v0]).unwrap(), Hit::At(6.3));
    }

    #[test]
    fn ping_pong_cycle_length_two() {
        let (tree, bars) = ping_pong_example(1.0);
        let traj = run(&tree, &bars, &Limits::default());
        let clocks: Vec<f64> = traj.events.iter().map(|e| e.clock).collect();
        assert_eq!(clocks, vec![0.5, 1.5, 2.5]);
        assert_eq!(traj.cycle.unwrap().period_wraps, 2);
        assert_eq!(
            root_cycle_length(&tree, &bars, 10_000).unwrap(),
            CycleVerdict::FiniteCycle(2)
        );
    }

    #[test]
    fn empty_environment_is_stuck_with_cycle_one() {
        let tree = Tree::new(TreeSpec::two_level_binary());
        let bars = FixedBars::new(1.0, vec![]).unwrap();
        let traj = run(&tree, &bars, &Limits::default());
        assert_eq!(traj.verdict, Verdict::Stuck);
        assert!(traj.events.is_empty());
        assert_eq!(traj.covered(), f64::INFINITY);
        assert_eq!(
            root_cycle_length(&tree, &bars, 10).unwrap(),
            CycleVerdict::FiniteCycle(1)
        );
    }

    #[test]
    fn two_bar_root_cycle_is_three() {
        let (tree, bars) = two_bar_example(2.0);
        assert_eq!(
            root_cycle_length(&tree, &bars, 10_000).unwrap(),
            CycleVerdict::FiniteCycle(3)
        );
    }

    #[test]
    fn horizon_periods_is_exact() {
        let (tree, bars) = two_bar_example(1.0);
        let traj = run(&tree, &bars, &Limits::with_horizon(Horizon::Periods(1)));
        assert_eq!(traj.verdict, Verdict::HorizonReached);
        // Only the single crossing at 0.3 lies within [0, T].
        assert_eq!(traj.events.len(), 1);
        assert_eq!(traj.covered(), 1.0);
        assert_eq!(
            tree.path_string(traj.vertex_at_periods(&tree, 1).unwrap()),
            "0"
        );
        assert!(traj.vertex_at(&tree, 1.5).is_err());
    }

    #[test]
    fn horizon_clock_stops_between_events() {
        let (tree, bars) = two_bar_example(1.0);
        let traj = run(&tree, &bars, &Limits::with_horizon(Horizon::Clock(1.45)));
        assert_eq!(traj.verdict, Verdict::HorizonReached);
        assert_eq!(traj.events.len(), 2);
        assert_eq!(traj.covered(), 1.45);
    }

    #[test]
    fn budget_censors() {
        let (tree, bars) = two_bar_example(1.0);
        let limits = Limits {
            max_events: 2,
            horizon: Horizon::Unbounded,
            detect_cycles: true,
        };
        let traj = run(&tree, &bars, &limits);
        assert_eq!(traj.verdict, Verdict::BudgetExhausted);
        assert!(traj.is_censored());
        assert_eq!(traj.covered(), 1.3);
        match traj.hitting_clock(&tree, 0.4, &[tree.vertex_by_string("1").unwrap()]) {
            Ok(Hit::NotByHorizon(c)) => assert_eq!(c, 1.3),
            other => panic!("expected censored hit, got {other:?}"),
        }
        assert!(traj.hitting_clock(&tree, 2.0, &[tree.root()]).is_err());
    }

    #[test]
    fn depth_cap_censors() {
        let tree = Tree::new(TreeSpec::regular(2, 2).unwrap());
        // A ladder forcing the walk below depth 2.
        let bars =
            FixedBars::from_paths(&tree, 1.0, &[("0", 0.1), ("0.0", 0.2)]).unwrap();
        let traj = run(&tree, &bars, &Limits::default());
        assert_eq!(traj.verdict, Verdict::DepthCapHit);
        assert_eq!(traj.events.len(), 2);
    }

    #[test]
    fn ladder_descends_on_schedule() {
        let (tree, bars) = ladder_example(1.0, 6);
        let traj = run(&tree, &bars, &Limits::with_horizon(Horizon::Clock(0.95)));
        let clocks: Vec<f64> = traj.events.iter().map(|e| e.clock).collect();
        let expected: Vec<f64> = (1..=6).map(|k| 0.1 * k as f64).collect();
        assert_eq!(clocks.len(), 6);
        for (c, e) in clocks.iter().zip(&expected) {
            assert!((c - e).abs() < 1e-12);
        }
        assert!(traj.events.iter().all(|e| e.to_child));
        assert_eq!(traj.frontier_clocks(&tree).len(), 6);
    }

    #[test]
    fn replaying_past_the_repeat_reproduces_the_cycle() {
        // Periodicity soundness: with detection off, the events repeat with
        // the detected period, bar for bar.
        let (tree, bars) = two_bar_example(1.0);
        let detected = run(&tree, &bars, &Limits::default());
        let cycle = detected.cycle.unwrap();
        let span = cycle.repeat_event - cycle.first_repeat;
        let replay = run(
            &tree,
            &bars,
            &Limits {
                max_events: cycle.repeat_event + 2 * span + 1,
                horizon: Horizon::Unbounded,
                detect_cycles: false,
            },
        );
        for i in cycle.first_repeat..cycle.first_repeat + span {
            let a = &replay.events[i];
            let b = &replay.events[i + span];
            assert_eq!(a.edge, b.edge);
            assert_eq!(a.height, b.height);
            assert_eq!(a.to_child, b.to_child);
            assert_eq!(b.wraps - a.wraps, cycle.period_wraps);
        }
    }

    #[test]
    fn random_environment_height_bookkeeping() {
        let tree = Tree::new(TreeSpec::regular(2, 64).unwrap());
        let store = BarStore::new(5.0, 424242).unwrap();
        let limits = Limits {
            max_events: 2_000,
            horizon: Horizon::Unbounded,
            detect_cycles: true,
        };
        let traj = run_meander(&tree, &store, tree.root(), 0.0, &limits).unwrap();
        assert!(!traj.events.is_empty());
        let bound = traj.events.len() as f64 * 5.0 * 2f64.powi(-40);
        assert!(
            traj.height_drift() <= bound.max(1e-9),
            "drift {} over {} events",
            traj.height_drift(),
            traj.events.len()
        );
        // Crossing directions of a single bar alternate.
        let mut last_dir: HashMap<(u32, u64), bool> = HashMap::new();
        for e in &traj.events {
            let key = (e.edge.child.0, e.height.to_bits());
            if let Some(prev) = last_dir.insert(key, e.to_child) {
                assert_ne!(prev, e.to_child, "same bar crossed twice the same way");
            }
        }
    }

    #[test]
    fn trajectory_file_round_trip() {
        let (tree, bars) = two_bar_example(1.0);
        let traj = run(&tree, &bars, &Limits::default());
        let mut buf = Vec::new();
        write_trajectory(&tree, &traj, 17, &mut buf).unwrap();
        let (t, seed, rows) = read_trajectory(buf.as_slice()).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(seed, 17);
        assert_eq!(rows.len(), traj.events.len());
        for (row, e) in rows.iter().zip(&traj.events) {
            assert_eq!(row.clock, e.clock);
            assert_eq!(row.edge_path, tree.edge_string(e.edge));
            assert_eq!(row.to_child, e.to_child);
            assert_eq!(row.height, e.height);
        }
    }

    #[test]
    fn start_height_validation() {
        let (tree, bars) = two_bar_example(1.0);
        assert!(run_meander(&tree, &bars, tree.root(), 1.0, &Limits::default()).is_err());
        assert!(run_meander(&tree, &bars, tree.root(), -0.1, &Limits::default()).is_err());
    }
}
