//! Useful bars: the crossed bars that act as one-way gates on the walk's
//! route back to the root, the relative variant anchored at a later start
//! time, regeneration times, return classification, and the two structural
//! invariants the counting argument rests on.
//!
//! A crossed bar on edge `e` (parent endpoint `e⁺`, child endpoint `e⁻`) is
//! useful at clock `t` when, strictly before `t`, the walk arrived at `e⁺`
//! for the first time, jumped next to `e⁻` (its first visit) within a dwell
//! of at most half a period, then left `e⁻` downward and has not revisited
//! either endpoint: the `e⁺`-visit set in `[0, t]` must be exactly the
//! single interval ending at the crossing, and the `e⁻`-visit set in
//! `[0, t)` a single interval closed strictly before `t`.  A return to `e⁻`
//! at exactly `t` does not yet disqualify; a return to `e⁺` at `t` does.
//!
//! Each such bar has a membership window `(departure, cutoff]` in `t`, fixed
//! once the trajectory is known, which is what [`UsefulIndex`] precomputes:
//! queries at many `t` then cost only a scan of the candidate list.
//!
//! The relative set anchored at `s` imposes the same pattern on first
//! visits at or after `s`, restricted to parents inside the descendent tree
//! of `Y(s)` (the walk's position at `s`, itself included), and additionally
//! requires the anchor visit to set a strict record for the distance from
//! `Y(s)`.  Crossings at exactly clock `s` belong to the walk's past
//! relative to its right-continuous present and are not candidates.

use std::collections::{HashMap, HashSet};

use crate::bars::Bar;
use crate::error::Error;
use crate::meander::{Trajectory, Verdict};
use crate::tree::{EdgeId, NodeId, Tree};

/// One useful bar with its qualifying clocks.
#[derive(Clone, Debug)]
pub struct UsefulBar {
    pub bar: Bar,
    /// Parent endpoint of the supporting edge.
    pub parent: NodeId,
    /// Child endpoint (= `bar.edge.child`).
    pub child: NodeId,
    /// Clock of the walk's arrival at the parent endpoint (0 for the start
    /// vertex).
    pub parent_arrival: f64,
    /// Clock of the crossing, the child endpoint's first arrival.
    pub child_arrival: f64,
    /// Clock at which the walk left the child endpoint.
    pub child_departure: f64,
    /// Index of the crossing event in the trajectory.
    pub crossing_index: usize,
}

impl UsefulBar {
    fn key(&self) -> (u32, u64) {
        (self.bar.edge.child.0, self.bar.height.to_bits())
    }
}

/// The useful bars at a query clock, in crossing order.
#[derive(Clone, Debug)]
pub struct UsefulBarReport {
    pub at_time: f64,
    /// Anchor of a relative query, if any.
    pub since: Option<f64>,
    pub members: Vec<UsefulBar>,
}

impl UsefulBarReport {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains_edge(&self, edge: EdgeId) -> bool {
        self.members.iter().any(|m| m.bar.edge == edge)
    }

    fn key_set(&self) -> HashSet<(u32, u64)> {
        self.members.iter().map(|m| m.key()).collect()
    }

    pub fn is_subset_of(&self, other: &UsefulBarReport) -> bool {
        let keys = other.key_set();
        self.members.iter().all(|m| keys.contains(&m.key()))
    }

    pub fn is_disjoint_from(&self, other: &UsefulBarReport) -> bool {
        let keys = other.key_set();
        self.members.iter().all(|m| !keys.contains(&m.key()))
    }

    /// Structural soundness: no two members share an edge, and the child
    /// vertices form a chain under the descendent order in crossing order.
    /// Both hold for every correctly computed report; a violation is an
    /// implementation bug, so constructors assert this in debug builds.
    pub fn validate(&self, tree: &Tree) -> Result<(), Error> {
        let mut edges = HashSet::new();
        for m in &self.members {
            if !edges.insert(m.bar.edge.child.0) {
                return Err(Error::PreconditionViolated(format!(
                    "two useful bars share edge {}",
                    tree.edge_string(m.bar.edge)
                )));
            }
        }
        for pair in self.members.windows(2) {
            if !tree.is_ancestor_or_equal(pair[0].child, pair[1].child) {
                return Err(Error::PreconditionViolated(format!(
                    "useful-bar children {} and {} do not nest",
                    tree.path_string(pair[0].child),
                    tree.path_string(pair[1].child)
                )));
            }
        }
        Ok(())
    }
}

/// How a return to a useful bar's child vertex played out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReturnClass {
    /// No return observed, or the record ends before the classification
    /// window (the frontier departure and its following full period)
    /// completes.
    NoReturnObserved,
    /// The walk left the edge's endpoints onto a never-visited vertex and
    /// then advanced rapidly: it stayed inside that vertex's descendent
    /// tree for a full period while accruing at least `c1 * T` relative
    /// useful bars.
    GoodReturn,
    /// A return was observed and at least one of the two clauses failed.
    BadReturn,
}

/// Membership window of one candidate bar, valid for queries within the
/// indexed horizon.
#[derive(Clone, Debug)]
struct Window {
    bar: UsefulBar,
    /// First arrival at the parent endpoint after the crossing; membership
    /// requires `t` strictly before it.
    parent_return: Option<f64>,
    /// First arrival back at the child endpoint; membership survives up to
    /// and including it.
    child_return: Option<f64>,
}

impl Window {
    fn member_at(&self, t: f64) -> bool {
        t > self.bar.child_departure
            && self.parent_return.map_or(true, |r| t < r)
            && self.child_return.map_or(true, |r| t <= r)
    }
}

/// A useful bar together with an observed return to its child endpoint.
#[derive(Clone, Debug)]
pub struct Episode {
    pub bar: UsefulBar,
    /// A clock at which the bar is a member of the useful set.
    pub query_clock: f64,
    /// Clock of the walk's return to the child endpoint.
    pub return_clock: f64,
}

/// First arrival off a useful bar's endpoints after a return to its child.
struct ExitEvent {
    #[allow(dead_code)]
    return_clock: f64,
    clock: f64,
    vertex: NodeId,
    index: usize,
    frontier: bool,
}

/// Precomputed per-trajectory structure answering useful-bar queries.
pub struct UsefulIndex<'a> {
    tree: &'a Tree,
    traj: &'a Trajectory,
    horizon: f64,
    /// Event indices by arrival vertex, ascending.
    arrivals: HashMap<NodeId, Vec<usize>>,
    windows: Vec<Window>,
}

impl<'a> UsefulIndex<'a> {
    pub fn new(tree: &'a Tree, traj: &'a Trajectory) -> Self {
        let t_period = traj.t_period;
        let mut arrivals: HashMap<NodeId, Vec<usize>> = HashMap::new();
        let mut first_visit: HashSet<NodeId> = HashSet::new();
        first_visit.insert(traj.start);
        // fresh[i]: event i's arrival was a first visit.
        let mut fresh = Vec::with_capacity(traj.events.len());
        for (i, e) in traj.events.iter().enumerate() {
            let v = e.arrival(tree);
            fresh.push(first_visit.insert(v));
            arrivals.entry(v).or_default().push(i);
        }

        let mut windows = Vec::new();
        for (i, e) in traj.events.iter().enumerate() {
            if !e.to_child || !fresh[i] {
                continue;
            }
            let parent = e.departed(tree);
            let parent_arrival = if i == 0 {
                if parent != traj.start {
                    continue;
                }
                0.0
            } else {
                let prev = &traj.events[i - 1];
                if prev.arrival(tree) != parent || !fresh[i - 1] {
                    continue;
                }
                prev.clock
            };
            if e.clock - parent_arrival > t_period / 2.0 {
                continue;
            }
            let child = e.edge.child;
            let Some(next) = traj.events.get(i + 1) else {
                // The walk never left the child endpoint within the record;
                // the dwell interval never closes before any queryable t.
                continue;
            };
            let after = |v: NodeId, idx: usize| -> Option<f64> {
                let list = arrivals.get(&v)?;
                let pos = list.partition_point(|&j| j <= idx);
                list.get(pos).map(|&j| traj.events[j].clock)
            };
            windows.push(Window {
                bar: UsefulBar {
                    bar: Bar {
                        edge: e.edge,
                        height: e.height,
                    },
                    parent,
                    child,
                    parent_arrival,
                    child_arrival: e.clock,
                    child_departure: next.clock,
                    crossing_index: i,
                },
                parent_return: after(parent, i),
                child_return: after(child, i),
            });
        }

        let horizon = match traj.verdict {
            Verdict::Stuck => f64::INFINITY,
            // Beyond the recorded events a periodic orbit is known, but
            // return clocks are not indexed there; queries stay within the
            // record.
            Verdict::Periodic { .. } => traj.events.last().map(|e| e.clock).unwrap_or(0.0),
            _ => traj.covered(),
        };

        UsefulIndex {
            tree,
            traj,
            horizon,
            arrivals,
            windows,
        }
    }

    /// Largest clock this index can answer queries at.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn trajectory(&self) -> &Trajectory {
        self.traj
    }

    fn check_clock(&self, t: f64) -> Result<(), Error> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative clock {t}")));
        }
        if t > self.horizon {
            return Err(Error::QueryBeyondHorizon {
                t,
                covered: self.horizon,
            });
        }
        Ok(())
    }

    /// First clock at or after `from` with the walk at `v`, within the
    /// indexed record.
    fn visit_at_or_after(&self, from: f64, v: NodeId) -> Option<f64> {
        if self.traj.vertex_at(self.tree, from).ok()? == v {
            return Some(from);
        }
        let list = self.arrivals.get(&v)?;
        let pos = list.partition_point(|&j| self.traj.events[j].clock <= from);
        list.get(pos).map(|&j| self.traj.events[j].clock)
    }

    /// The useful bars at clock `t`, in crossing order.
    pub fn report_at(&self, t: f64) -> Result<UsefulBarReport, Error> {
        self.check_clock(t)?;
        let members: Vec<UsefulBar> = self
            .windows
            .iter()
            .filter(|w| w.member_at(t))
            .map(|w| w.bar.clone())
            .collect();
        let report = UsefulBarReport {
            at_time: t,
            since: None,
            members,
        };
        debug_assert!(report.validate(self.tree).is_ok());
        Ok(report)
    }

    /// The useful bars accrued relative to anchor `s`, at clock `t`.
    pub fn report_between(&self, s: f64, t: f64) -> Result<UsefulBarReport, Error> {
        if !(s >= 0.0 && s < t) {
            return Err(Error::InvalidParameter(format!(
                "relative query needs 0 <= s < t, got s={s} t={t}"
            )));
        }
        self.check_clock(t)?;
        let ys = self.traj.vertex_at(self.tree, s)?;
        let ancestors: HashSet<NodeId> = {
            let mut set = HashSet::new();
            let mut v = ys;
            loop {
                set.insert(v);
                match self.tree.parent(v) {
                    Some(p) => v = p,
                    None => break,
                }
            }
            set
        };

        struct Candidate {
            bar: UsefulBar,
            dead: bool,
            child_return: Option<f64>,
        }
        let mut visited: HashSet<NodeId> = HashSet::new();
        visited.insert(ys);
        let mut dist: i64 = 0;
        let mut running_max: i64 = -1; // max distance over visits strictly before the current one
        let mut cur_record = true; // distance 0 at the anchor: vacuous record
        let mut cur_fresh = true;
        let mut cur_vertex = ys;
        let mut cur_since = s;
        let mut open: Vec<Candidate> = Vec::new();

        let events = &self.traj.events;
        let start_idx = events.partition_point(|e| e.clock <= s);
        for (i, e) in events.iter().enumerate().skip(start_idx) {
            if e.clock > t {
                break;
            }
            let v = e.arrival(self.tree);
            debug_assert_eq!(e.departed(self.tree), cur_vertex);
            // Window effects on open candidates (arrival clock <= t by the
            // loop guard; a parent return at exactly t disqualifies, a
            // child return at exactly t does not).
            for cand in open.iter_mut().filter(|c| !c.dead) {
                if i == cand.bar.crossing_index + 1 {
                    cand.bar.child_departure = e.clock;
                }
                if v == cand.bar.parent {
                    cand.dead = true;
                } else if v == cand.bar.child && cand.child_return.is_none() {
                    cand.child_return = Some(e.clock);
                }
            }
            // Distance bookkeeping relative to Y(s).
            let towards = if e.to_child {
                ancestors.contains(&v)
            } else {
                !ancestors.contains(&e.edge.child)
            };
            let new_dist = if towards { dist - 1 } else { dist + 1 };
            let prev_max = running_max.max(dist);
            let new_fresh = !visited.contains(&v);
            let new_record = new_dist > prev_max;
            // New candidate: a downward crossing, strictly inside (s, t),
            // from a contiguous fresh parent visit inside the descendent
            // tree of Y(s), setting a distance record, onto a fresh child,
            // within half a period of the parent arrival.
            if e.to_child
                && e.clock < t
                && cur_fresh
                && new_fresh
                && cur_record
                && e.clock - cur_since <= self.traj.t_period / 2.0
                && self.tree.is_ancestor_or_equal(ys, cur_vertex)
            {
                open.push(Candidate {
                    bar: UsefulBar {
                        bar: Bar {
                            edge: e.edge,
                            height: e.height,
                        },
                        parent: cur_vertex,
                        child: v,
                        parent_arrival: cur_since,
                        child_arrival: e.clock,
                        child_departure: f64::INFINITY, // set on the next event
                        crossing_index: i,
                    },
                    dead: false,
                    child_return: None,
                });
            }
            visited.insert(v);
            running_max = prev_max;
            dist = new_dist;
            cur_vertex = v;
            cur_since = e.clock;
            cur_fresh = new_fresh;
            cur_record = new_record;
        }

        let members: Vec<UsefulBar> = open
            .into_iter()
            .filter(|c| {
                !c.dead
                    && c.bar.child_departure < t
                    && c.child_return.map_or(true, |r| r >= t)
            })
            .map(|c| c.bar)
            .collect();
        let report = UsefulBarReport {
            at_time: t,
            since: Some(s),
            members,
        };
        debug_assert!(report.validate(self.tree).is_ok());
        Ok(report)
    }

    /// True when the walk's visits to `Y(s)` within `[0, t]` form a single
    /// interval and, should that visit end before `t`, the departing jump
    /// heads away from the root.
    ///
    /// The direction clause is load-bearing: a rootward departure can take
    /// the walk out of `Y(s)`'s subtree without ever revisiting `Y(s)`, and
    /// the split property checked by [`Self::check_regeneration_split`]
    /// genuinely fails on such trajectories.
    pub fn is_regeneration_time(&self, s: f64, t: f64) -> Result<bool, Error> {
        if s > t {
            return Err(Error::InvalidParameter(format!(
                "regeneration query needs s <= t, got s={s} t={t}"
            )));
        }
        self.check_clock(t)?;
        let v = self.traj.vertex_at(self.tree, s)?;
        let mut starts = u64::from(v == self.traj.start);
        if let Some(list) = self.arrivals.get(&v) {
            starts += list
                .iter()
                .take_while(|&&j| self.traj.events[j].clock <= t)
                .count() as u64;
        }
        if starts != 1 {
            return Ok(false);
        }
        // The counted visit is the start segment when v is the start
        // vertex, otherwise it begins at v's single recorded arrival; in
        // both cases the next event is the departing jump.
        let departure = if v == self.traj.start {
            self.traj.events.first()
        } else {
            let j = self.arrivals[&v][0];
            self.traj.events.get(j + 1)
        };
        Ok(match departure {
            Some(e) if e.clock < t => e.to_child,
            _ => true,
        })
    }

    /// Splits the useful bars at `t` around a regeneration time `s`: the
    /// bars at `s` and the relative bars over `(s, t]` must be disjoint and
    /// both contained in the bars at `t`.
    pub fn check_regeneration_split(&self, s: f64, t: f64) -> Result<bool, Error> {
        if !self.is_regeneration_time(s, t)? {
            return Err(Error::PreconditionViolated(format!(
                "s={s} is not a regeneration time for t={t}"
            )));
        }
        if s >= t {
            return Err(Error::InvalidParameter(format!(
                "split check needs s < t, got s={s} t={t}"
            )));
        }
        let at_s = self.report_at(s)?;
        let between = self.report_between(s, t)?;
        let at_t = self.report_at(t)?;
        Ok(at_s.is_disjoint_from(&between)
            && at_s.is_subset_of(&at_t)
            && between.is_subset_of(&at_t))
    }

    /// After the walk, beyond `t`, first revisits the grandparent side of
    /// the last-crossed useful bar, at most two of the bars at `t` may have
    /// dropped out.  Preconditions: the last-crossed member's parent
    /// endpoint is not the tree root, and the record covers that revisit.
    pub fn check_rootward_loss_bound(&self, t: f64) -> Result<bool, Error> {
        let at_t = self.report_at(t)?;
        let Some(last) = at_t.members.last() else {
            return Err(Error::PreconditionViolated(format!(
                "no useful bars at t={t}"
            )));
        };
        let Some(grand) = self.tree.parent(last.parent) else {
            return Err(Error::PreconditionViolated(
                "last-crossed useful bar hangs from the root".into(),
            ));
        };
        let Some(h) = self.visit_at_or_after(t, grand) else {
            return Err(Error::PreconditionViolated(format!(
                "record does not cover the rootward return after t={t}"
            )));
        };
        if h > self.horizon {
            return Err(Error::PreconditionViolated(format!(
                "rootward return at {h} exceeds the indexed horizon"
            )));
        }
        let at_h = self.report_at(h)?;
        let keys = at_h.key_set();
        let lost = at_t
            .members
            .iter()
            .filter(|m| !keys.contains(&m.key()))
            .count();
        Ok(lost <= 2)
    }

    /// First useful bar, in crossing order, whose parent endpoint differs
    /// from the walk's root and whose child endpoint is revisited within
    /// the record while the bar is still useful.  Returns the bar, a clock
    /// at which it is a member, and the return clock.
    pub fn first_return_episode(&self) -> Option<Episode> {
        let root = self.tree.root();
        for w in &self.windows {
            if w.bar.parent == root {
                continue;
            }
            let Some(ret) = w.child_return else {
                continue;
            };
            if w.parent_return.is_some_and(|r| r <= ret) {
                continue;
            }
            // The event following the child departure exists whenever a
            // return was recorded; any clock strictly between them sees
            // the bar as a member.
            let next = self.traj.events.get(w.bar.crossing_index + 2)?;
            let t_q = 0.5 * (w.bar.child_departure + next.clock);
            return Some(Episode {
                bar: w.bar.clone(),
                query_clock: t_q,
                return_clock: ret,
            });
        }
        None
    }

    /// Looks up a member of the report at `t` by its edge.
    fn member_by_edge(&self, edge: EdgeId, t: f64) -> Result<UsefulBar, Error> {
        let report = self.report_at(t)?;
        report
            .members
            .into_iter()
            .find(|m| m.bar.edge == edge)
            .ok_or_else(|| Error::NotAUsefulBar {
                edge: self.tree.edge_string(edge),
                height: f64::NAN,
                t,
            })
    }

    /// After the walk, beyond `t`, returns to `member`'s child endpoint,
    /// finds the first arrival off the edge's two endpoints.  `None` when
    /// the record ends before the return or the exit.
    fn exit_after_return(&self, member: &UsefulBar, t: f64) -> Option<ExitEvent> {
        let ret = self.visit_at_or_after(t, member.child)?;
        let events = &self.traj.events;
        let start_idx = events.partition_point(|e| e.clock < ret);
        for (i, e) in events.iter().enumerate().skip(start_idx) {
            let v = e.arrival(self.tree);
            if v != member.parent && v != member.child {
                let frontier = v != self.traj.start
                    && self
                        .arrivals
                        .get(&v)
                        .map_or(true, |list| list.first() == Some(&i));
                return Some(ExitEvent {
                    return_clock: ret,
                    clock: e.clock,
                    vertex: v,
                    index: i,
                    frontier,
                });
            }
        }
        None
    }

    /// Whether the walk's next return to the useful bar at `edge` (a member
    /// of the report at `t`) ends in a frontier departure: the first
    /// arrival off the edge's endpoints lands on a never-visited vertex.
    /// `Ok(None)` when the return or the exit lies beyond the record.
    pub fn frontier_exit(&self, edge: EdgeId, t: f64) -> Result<Option<bool>, Error> {
        let member = self.member_by_edge(edge, t)?;
        Ok(self.exit_after_return(&member, t).map(|e| e.frontier))
    }

    /// Classifies the walk's next return to a useful bar's child endpoint.
    ///
    /// `member` must belong to the report at `t`.  The return is good when
    /// the subsequent departure from the edge's endpoints is onto a
    /// never-visited vertex (a frontier departure at clock `f`) and the
    /// walk then remains in that vertex's descendent tree through
    /// `[f, f + T]` while the relative useful bars over that window number
    /// at least `c1 * T`.  When the record ends before the return, the
    /// departure, or the full advance window, the return is unclassifiable
    /// and reported as unobserved.
    pub fn classify_return(&self, edge: EdgeId, t: f64, c1: f64) -> Result<ReturnClass, Error> {
        let member = self.member_by_edge(edge, t)?;
        let t_period = self.traj.t_period;
        let Some(exit) = self.exit_after_return(&member, t) else {
            return Ok(ReturnClass::NoReturnObserved);
        };
        if !exit.frontier {
            return Ok(ReturnClass::BadReturn);
        }
        let (f_clock, f_vertex, f_index) = (exit.clock, exit.vertex, exit.index);
        if f_clock + t_period > self.horizon {
            return Ok(ReturnClass::NoReturnObserved);
        }
        // Rapid advance: containment in the frontier vertex's descendent
        // tree throughout the next full period, plus enough relative bars.
        let events = &self.traj.events;
        let contained = events
            .iter()
            .skip(f_index + 1)
            .take_while(|e| e.clock <= f_clock + t_period)
            .all(|e| self.tree.is_ancestor_or_equal(f_vertex, e.arrival(self.tree)));
        if !contained {
            return Ok(ReturnClass::BadReturn);
        }
        let advance = self.report_between(f_clock, f_clock + t_period)?;
        if (advance.len() as f64) >= c1 * t_period {
            Ok(ReturnClass::GoodReturn)
        } else {
            Ok(ReturnClass::BadReturn)
        }
    }
}

/// Convenience wrapper building a throwaway index.
pub fn useful_bars_at(tree: &Tree, traj: &Trajectory, t: f64) -> Result<UsefulBarReport, Error> {
    UsefulIndex::new(tree, traj).report_at(t)
}

/// Convenience wrapper building a throwaway index.
pub fn useful_bars_between(
    tree: &Tree,
    traj: &Trajectory,
    s: f64,
    t: f64,
) -> Result<UsefulBarReport, Error> {
    UsefulIndex::new(tree, traj).report_between(s, t)
}
