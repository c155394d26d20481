//! Simulator and numerical toolkit for the random stirring model and its
//! cyclic-time walk on rooted trees.
//!
//! The model attaches to every edge of a rooted tree a Poisson clock of unit
//! rate; each ring places a transposition ("bar") on that edge at a uniform
//! height of a cylinder of circumference `T`.  Composing the bars in height
//! order yields a random permutation of the vertices, and chasing a single
//! point through the bar environment yields a deterministic unit-speed
//! motion (the meander) whose vertex projection is a cyclic-time walk.  The
//! crates here simulate that walk exactly, extract permutations and cycle
//! structure, count the bar patterns that drive downward progress, compare
//! walk functionals against a biased reflected random walk, and evaluate the
//! closed-form bounds that decide when infinite cycles appear.
//!
//! Modules build on each other roughly in this order: [`tree`] (lazy rooted
//! trees), [`bars`] (bar environments, both pinned and lazily sampled),
//! [`meander`] (the motion and its trajectory queries), [`perm`]
//! (permutation extraction and cycle structure), [`useful`] (the useful-bar
//! counting machinery and its invariants), [`renewal`] (the comparison
//! walk and its strong renewal structure), [`bounds`] (closed-form
//! constants, the drift inequality, and the parameter classifier), and
//! [`experiments`] (Monte Carlo estimators with confidence intervals and
//! censoring accounting).

pub mod bars;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod meander;
pub mod perm;
pub mod record;
pub mod renewal;
pub mod rng;
pub mod stats;
pub mod tree;
pub mod useful;

#[cfg(test)]
pub(crate) mod testenv;

pub use bars::{Bar, BarSource, BarStore, FixedBars, Joint};
pub use error::Error;
pub use experiments::{EstimateRecord, ExperimentConfig, Histogram, SweepEstimator};
pub use meander::{
    root_cycle_length, run_meander, CrossingEvent, CycleInfo, CycleVerdict, Hit, Horizon, Limits,
    Trajectory, Verdict,
};
pub use record::{RunRecord, Tallies, Task};
pub use tree::{EdgeId, FiniteNode, NodeId, Tree, TreeKind, TreeSpec};
