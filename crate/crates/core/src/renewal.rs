//! The biased reflected walk on the nonnegative integers, its strong
//! renewal points, and the empirical density they attain.
//!
//! The walk steps by ±1, is forced upward from 0, and from a positive state
//! steps up with probability `β/(β+1)`.  An index is a renewal point when
//! its value is never taken again at any later index; a strong renewal
//! point is a renewal point immediately followed by another.  Along an
//! upward-biased path these occur with asymptotic density
//! `β(β−1)/(β+1)²`, which [`renewal_density_estimate`] measures.
//!
//! With `β = d` the walk is also the jump chain of the distance-from-root
//! process of the uniform-neighbor walk on the tree in which every vertex
//! has `d` children; [`tree_distance_jump_chain`] realizes that chain
//! directly on a tree for law-equality checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::{run_seed, Stream};
use crate::stats;
use crate::tree::{Tree, TreeSpec};

const WALK_SALT: u64 = 0xB1A5_ED00_0000_0001;
const JUMP_SALT: u64 = 0xB1A5_ED00_0000_0002;

/// A nearest-neighbor path on the nonnegative integers, reflected at 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BiasedWalkPath {
    /// Upward bias the path was sampled with (`f64::INFINITY` for the
    /// deterministic ascent).
    pub beta: f64,
    /// Successive states, starting at 0.
    pub steps: Vec<u32>,
}

impl BiasedWalkPath {
    /// Wraps explicit states, enforcing the path shape: starts at 0, moves
    /// by ±1, and always steps up from 0.
    pub fn from_steps(beta: f64, steps: Vec<u32>) -> Result<Self, Error> {
        if steps.first() != Some(&0) {
            return Err(Error::InvalidParameter(
                "walk path must start at 0".into(),
            ));
        }
        for (i, w) in steps.windows(2).enumerate() {
            let ok = if w[0] == 0 {
                w[1] == 1
            } else {
                w[1] == w[0] + 1 || w[1] + 1 == w[0]
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "illegal step {} -> {} at index {i}",
                    w[0], w[1]
                )));
            }
        }
        Ok(BiasedWalkPath { beta, steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Up-steps taken from positive states, as (up-steps, opportunities).
    pub fn up_step_counts(&self) -> (u64, u64) {
        let mut ups = 0u64;
        let mut tries = 0u64;
        for w in self.steps.windows(2) {
            if w[0] > 0 {
                tries += 1;
                ups += u64::from(w[1] == w[0] + 1);
            }
        }
        (ups, tries)
    }
}

/// Samples the reflected walk: `n` states starting at 0, stepping up from
/// positive states with probability `beta / (beta + 1)`.
pub fn simulate_walk(beta: f64, n: usize, seed: u64) -> Result<BiasedWalkPath, Error> {
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "walk bias must exceed 1, got {beta}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("walk needs at least one state".into()));
    }
    let p_up = if beta.is_infinite() {
        1.0
    } else {
        beta / (beta + 1.0)
    };
    let mut rng = Stream::new(seed, WALK_SALT);
    let mut steps = Vec::with_capacity(n);
    let mut z = 0u32;
    steps.push(z);
    for _ in 1..n {
        if z == 0 || rng.next_unit() < p_up {
            z += 1;
        } else {
            z -= 1;
        }
        steps.push(z);
    }
    Ok(BiasedWalkPath { beta, steps })
}

/// The jump chain of the distance-from-root process of the uniform-neighbor
/// walk on the tree where every vertex has `offspring` children: `n` states
/// starting at the root.
pub fn tree_distance_jump_chain(offspring: u32, n: usize, seed: u64) -> Result<BiasedWalkPath, Error> {
    if offspring < 2 {
        return Err(Error::InvalidParameter(format!(
            "jump chain needs at least 2 offspring, got {offspring}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("walk needs at least one state".into()));
    }
    // The chain takes n - 1 steps, so depth n is unreachable.
    let tree = Tree::new(TreeSpec::regular(offspring, n as u32)?);
    let mut rng = Stream::new(seed, JUMP_SALT);
    let mut v = tree.root();
    let mut steps = Vec::with_capacity(n);
    steps.push(0u32);
    for _ in 1..n {
        let kids = tree.child_ids(v)?;
        v = match tree.parent(v) {
            None => kids[rng.next_below(kids.len() as u64) as usize],
            Some(p) => {
                let pick = rng.next_below(kids.len() as u64 + 1) as usize;
                if pick == 0 {
                    p
                } else {
                    kids[pick - 1]
                }
            }
        };
        steps.push(tree.depth(v));
    }
    Ok(BiasedWalkPath {
        beta: offspring as f64,
        steps,
    })
}

/// Indices whose value never recurs at any later index, ascending.
///
/// Single backward pass over the path with a seen-later table, linear in
/// the path length.
pub fn renewal_points(path: &BiasedWalkPath) -> Vec<usize> {
    let max = path.steps.iter().copied().max().unwrap_or(0) as usize;
    let mut seen_later = vec![false; max + 1];
    let mut points = Vec::new();
    for (i, &z) in path.steps.iter().enumerate().rev() {
        let z = z as usize;
        if !seen_later[z] {
            points.push(i);
        }
        seen_later[z] = true;
    }
    points.reverse();
    points
}

/// Renewal points immediately followed by another renewal point, ascending.
pub fn strong_renewal_points(path: &BiasedWalkPath) -> Vec<usize> {
    let rg = renewal_points(path);
    rg.windows(2)
        .filter(|w| w[1] == w[0] + 1)
        .map(|w| w[0])
        .collect()
}

/// Fraction of indices in `[1, len)` that are strong renewal points.
pub fn renewal_density(path: &BiasedWalkPath) -> f64 {
    let count = strong_renewal_points(path)
        .iter()
        .filter(|&&i| i >= 1)
        .count();
    count as f64 / path.len() as f64
}

/// Gaps between consecutive strong renewal points.
pub fn renewal_gaps(path: &BiasedWalkPath) -> Vec<usize> {
    strong_renewal_points(path)
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect()
}

/// Chi-squared statistic (one degree of freedom) for lag-1 independence of
/// a gap sequence, splitting at the median.  `None` when fewer than two
/// consecutive pairs exist or the split is degenerate.
pub fn lag1_chi2(gaps: &[usize]) -> Option<f64> {
    if gaps.len() < 3 {
        return None;
    }
    let mut sorted = gaps.to_vec();
    sorted.sort_unstable();
    let median = sorted[sorted.len() / 2];
    let small = |g: usize| g <= median;
    let mut counts = [[0f64; 2]; 2];
    for w in gaps.windows(2) {
        counts[usize::from(!small(w[0]))][usize::from(!small(w[1]))] += 1.0;
    }
    let stat = stats::chi2_independence_2x2(
        counts[0][0],
        counts[0][1],
        counts[1][0],
        counts[1][1],
    );
    stat.is_finite().then_some(stat)
}

/// Mean strong-renewal-point density over independent replicas, with a
/// normal-approximation 99% interval.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityEstimate {
    pub beta: f64,
    pub path_len: usize,
    pub replicas: usize,
    pub mean: f64,
    pub lo99: f64,
    pub hi99: f64,
    pub seed: u64,
}

impl DensityEstimate {
    /// The asymptotic density `β(β−1)/(β+1)²` this estimate should hover
    /// around.
    pub fn predicted(beta: f64) -> f64 {
        beta * (beta - 1.0) / ((beta + 1.0) * (beta + 1.0))
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lo99 <= value && value <= self.hi99
    }
}

/// Estimates the strong-renewal-point density of the `beta`-biased walk
/// from `replicas` independent paths of `n` states each.
pub fn renewal_density_estimate(
    beta: f64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<DensityEstimate, Error> {
    if n < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "density estimation needs paths of at least 1000 states, got {n}"
        )));
    }
    if replicas < 2 {
        return Err(Error::InvalidParameter(
            "density estimation needs at least 2 replicas".into(),
        ));
    }
    let densities: Result<Vec<f64>, Error> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| Ok(renewal_density(&simulate_walk(beta, n, run_seed(seed, i))?)))
        .collect();
    let densities = densities?;
    let (mean, lo99, hi99) = stats::mean_ci99(&densities);
    Ok(DensityEstimate {
        beta,
        path_len: n,
        replicas,
        mean,
        lo99,
        hi99,
        seed,
    })
}
