//! The stirring permutation of a finite tree: composition of bar
//! transpositions in height order, extraction from the meander, and cycle
//! structure.
//!
//! A bar environment on a finite tree induces a permutation of the vertex
//! set: sweep the cylinder upward from height 0 and apply each bar as a
//! transposition of its edge's endpoints.  The same permutation falls out of
//! the meander: the image of `v` is the vertex occupied after exactly one
//! period by the motion started at `(v, 0)`.  The two routes agree whenever
//! all bar heights are distinct and positive, which holds almost surely for
//! sampled environments; [`compose_transpositions`] rejects the degenerate
//! inputs (duplicate or zero heights) where the sweep order is ambiguous.

use serde::{Deserialize, Serialize};

use crate::bars::{environment_bars, Bar, BarSource};
use crate::error::Error;
use crate::meander::{run_meander, Horizon, Limits, Verdict};
use crate::tree::{NodeId, Tree};

/// A permutation of the vertices of a fully materialized finite tree,
/// stored as the image table over vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n as u32).collect(),
        }
    }

    /// Builds from an image table, validating bijectivity.
    pub fn from_map(map: Vec<u32>) -> Result<Self, Error> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &img in &map {
            let i = img as usize;
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "image table is not a bijection on 0..{n}"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, v: NodeId) -> NodeId {
        NodeId(self.map[v.index()])
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i as u32 == m)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m as usize] = i as u32;
        }
        Permutation { map: inv }
    }

    /// `self` followed by `then`.
    pub fn compose(&self, then: &Self) -> Self {
        assert_eq!(self.n(), then.n(), "composition requires equal degree");
        Permutation {
            map: self.map.iter().map(|&m| then.map[m as usize]).collect(),
        }
    }

    /// The cycle through `v`, starting at `v`.
    pub fn cycle_of(&self, v: NodeId) -> Vec<NodeId> {
        let mut cycle = vec![v];
        let mut w = self.apply(v);
        while w != v {
            cycle.push(w);
            w = self.apply(w);
        }
        cycle
    }

    pub fn cycle_len_of(&self, v: NodeId) -> usize {
        let mut len = 1;
        let mut w = self.apply(v);
        while w != v {
            len += 1;
            w = self.apply(w);
        }
        len
    }

    /// All cycles, fixed points included, in canonical form: each cycle
    /// starts at its smallest vertex id and cycles are ordered by that
    /// leader.
    pub fn cycle_decomposition(&self) -> Vec<Vec<NodeId>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let cycle = self.cycle_of(NodeId(i as u32));
            for w in &cycle {
                seen[w.index()] = true;
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// Cycle lengths in decreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycle_decomposition().iter().map(|c| c.len()).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Cycles as vertex path strings, in canonical order.
    pub fn cycles_as_paths(&self, tree: &Tree) -> Vec<Vec<String>> {
        self.cycle_decomposition()
            .iter()
            .map(|c| c.iter().map(|&v| tree.path_string(v)).collect())
            .collect()
    }
}

/// Composes the bars of a finite environment as transpositions in
/// increasing height order.
///
/// Errors on trees with unmaterialized or infinite vertex sets, and on
/// environments with a bar at height exactly 0 or two bars at exactly equal
/// heights, where the sweep order is not well defined.
pub fn compose_transpositions(tree: &Tree, bars: &[Bar]) -> Result<Permutation, Error> {
    if !tree.spec().is_finite() {
        return Err(Error::InvalidSpec(
            "transposition composition requires a finite tree".into(),
        ));
    }
    tree.all_vertices()?;
    let n = tree.len();
    let mut sorted: Vec<&Bar> = bars.iter().collect();
    sorted.sort_by(|a, b| {
        a.height
            .partial_cmp(&b.height)
            .expect("bar heights are finite")
            .then_with(|| tree.lex_cmp(a.edge.child, b.edge.child))
    });
    for pair in sorted.windows(2) {
        if pair[0].height == pair[1].height {
            return Err(Error::DuplicateHeight {
                height: pair[0].height,
            });
        }
    }
    if let Some(first) = sorted.first() {
        if first.height == 0.0 {
            return Err(Error::InvalidParameter(
                "bar at height exactly 0 makes the sweep order ambiguous".into(),
            ));
        }
    }
    // occupant[x] = the point currently at vertex x; pos = its inverse.
    let mut occupant: Vec<u32> = (0..n as u32).collect();
    let mut pos: Vec<u32> = (0..n as u32).collect();
    for bar in sorted {
        let a = bar.edge.child.index();
        let b = tree
            .parent(bar.edge.child)
            .expect("bar edge has a parent endpoint")
            .index();
        occupant.swap(a, b);
        pos[occupant[a] as usize] = a as u32;
        pos[occupant[b] as usize] = b as u32;
    }
    Permutation::from_map(pos)
}

/// The stirring permutation of a finite environment, by composition.
pub fn stirring_permutation<S: BarSource + ?Sized>(
    tree: &Tree,
    source: &S,
) -> Result<Permutation, Error> {
    let bars = environment_bars(tree, source)?;
    compose_transpositions(tree, &bars)
}

/// The stirring permutation extracted from the meander: image of `v` is the
/// position after exactly one period of the motion started at `(v, 0)`.
pub fn meander_permutation<S: BarSource + ?Sized>(
    tree: &Tree,
    source: &S,
) -> Result<Permutation, Error> {
    if !tree.spec().is_finite() {
        return Err(Error::InvalidSpec(
            "permutation extraction requires a finite tree".into(),
        ));
    }
    let vertices = tree.all_vertices()?;
    let n_bars: usize = vertices
        .iter()
        .skip(1)
        .map(|&v| source.heights(tree, crate::tree::EdgeId { child: v }).len())
        .sum();
    let limits = Limits {
        // Within one period the climb sweeps each height once, so at most
        // every bar is crossed once.
        max_events: n_bars + 2,
        horizon: Horizon::Periods(1),
        detect_cycles: false,
    };
    let mut map = vec![0u32; vertices.len()];
    for &v in &vertices {
        let traj = run_meander(tree, source, v, 0.0, &limits)?;
        debug_assert!(matches!(
            traj.verdict,
            Verdict::HorizonReached | Verdict::Stuck
        ));
        map[v.index()] = traj.vertex_at_periods(tree, 1)?.0;
    }
    Permutation::from_map(map).map_err(|_| {
        Error::PreconditionViolated("meander images failed to form a bijection".into())
    })
}
