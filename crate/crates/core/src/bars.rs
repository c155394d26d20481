//! The bar environment: rate-1 Poisson transposition times on every edge.
//!
//! A bar on edge `e` at height `h` represents a transposition of the edge's
//! endpoints scheduled at time `h` within the period `[0, T)`.  The picture
//! to keep in mind: every vertex carries a pole of circumference `T`, every
//! bar connects two joints at the same height on the poles of its edge's
//! endpoints, and the meander climbs poles at unit speed, hopping across a
//! bar whenever it reaches one of its joints.
//!
//! Environments come in two flavours: [`BarStore`] realizes bars lazily from
//! a seed (each edge's bars are a pure function of the master seed and the
//! edge's path, so query order never matters), and [`FixedBars`] holds an
//! explicit list, used for worked examples and golden tests.

use std::cell::{Cell, RefCell};
use std::io::{BufRead, Write};
use std::rc::Rc;

use crate::error::Error;
use crate::rng::{self, Stream};
use crate::tree::{EdgeId, NodeId, Tree};

/// One bar: an edge and a height in `[0, T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bar {
    pub edge: EdgeId,
    pub height: f64,
}

/// A realized or explicit environment of bars with period `T`.
pub trait BarSource {
    /// The cyclic period `T`.
    fn period(&self) -> f64;

    /// Sorted heights of the bars on `edge`, ascending, all in `[0, T)`.
    fn heights(&self, tree: &Tree, edge: EdgeId) -> Rc<[f64]>;
}

const BAR_SALT: u64 = 0xBAB5_0000_0000_0001;

/// Lazily realized Poisson environment.
///
/// Each edge carries `Poisson(T)` bars at i.i.d. uniform heights.  They are
/// realized as the points of a unit-rate Poisson process run until `T`, from
/// a random stream keyed by the master seed and the edge's path, which makes
/// realization independent of query order and lets sweeps over `T` share
/// environments: for `T' < T` the bars of the smaller environment are a
/// prefix of the larger one's.
pub struct BarStore {
    t: f64,
    master_seed: u64,
    cache: RefCell<Vec<Option<Rc<[f64]>>>>,
    collisions: Cell<u64>,
}

impl BarStore {
    pub fn new(t: f64, master_seed: u64) -> Result<Self, Error> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "period T must be positive and finite, got {t}"
            )));
        }
        Ok(BarStore {
            t,
            master_seed,
            cache: RefCell::new(Vec::new()),
            collisions: Cell::new(0),
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Number of exact height collisions repaired by redrawing (expected to
    /// stay zero in any realistic run).
    pub fn collision_count(&self) -> u64 {
        self.collisions.get()
    }

    fn realize(&self, path_key: u64) -> Rc<[f64]> {
        let mut stream = Stream::new(path_key ^ rng::mix(self.master_seed), BAR_SALT);
        let mut heights: Vec<f64> = Vec::new();
        let mut h = stream.next_exp();
        while h < self.t {
            if heights.last() == Some(&h) {
                // Exact collision after rounding: redraw the gap.
                self.collisions.set(self.collisions.get() + 1);
            } else {
                heights.push(h);
            }
            h += stream.next_exp();
        }
        heights.into()
    }

    /// Every realized bar so far, sorted by edge path and height.  This is
    /// what a bar-file dump records: only the part of the environment the
    /// simulation actually looked at.
    pub fn realized_bars(&self, tree: &Tree) -> Vec<Bar> {
        let cache = self.cache.borrow();
        let mut with_paths: Vec<(Vec<u32>, NodeId, Rc<[f64]>)> = cache
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| {
                let heights = slot.clone()?;
                let child = NodeId(i as u32);
                Some((tree.path(child), child, heights))
            })
            .collect();
        with_paths.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = Vec::new();
        for (_, child, heights) in with_paths {
            for &height in heights.iter() {
                out.push(Bar {
                    edge: EdgeId { child },
                    height,
                });
            }
        }
        out
    }
}

/// Collects every bar of a finite tree's environment, in edge order.
/// Materializes the whole vertex set; errors on infinite specifications.
pub fn environment_bars<S: BarSource + ?Sized>(
    tree: &Tree,
    source: &S,
) -> Result<Vec<Bar>, Error> {
    if !tree.spec().is_finite() {
        return Err(Error::InvalidSpec(
            "collecting all bars requires a finite tree".into(),
        ));
    }
    let vertices = tree.all_vertices()?;
    let mut out = Vec::new();
    for &child in vertices.iter().skip(1) {
        let edge = EdgeId { child };
        for &height in source.heights(tree, edge).iter() {
            out.push(Bar { edge, height });
        }
    }
    Ok(out)
}

impl BarSource for BarStore {
    fn period(&self) -> f64 {
        self.t
    }

    fn heights(&self, tree: &Tree, edge: EdgeId) -> Rc<[f64]> {
        let idx = edge.child.index();
        {
            let cache = self.cache.borrow();
            if let Some(Some(h)) = cache.get(idx) {
                return h.clone();
            }
        }
        let realized = self.realize(tree.path_key(edge.child));
        let mut cache = self.cache.borrow_mut();
        if cache.len() <= idx {
            cache.resize(idx + 1, None);
        }
        cache[idx] = Some(realized.clone());
        realized
    }
}

/// An explicit environment, as loaded from a bar file.
pub struct FixedBars {
    t: f64,
    by_edge: Vec<Rc<[f64]>>,
    empty: Rc<[f64]>,
}

impl FixedBars {
    /// Builds an environment from `(child vertex, height)` pairs.  Heights
    /// must lie in `[0, T)` and be distinct within each edge.
    pub fn new(t: f64, bars: impl IntoIterator<Item = (NodeId, f64)>) -> Result<Self, Error> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "period T must be positive and finite, got {t}"
            )));
        }
        let mut per_edge: Vec<Vec<f64>> = Vec::new();
        for (child, height) in bars {
            if !(0.0..t).contains(&height) {
                return Err(Error::InvalidParameter(format!(
                    "bar height {height} outside [0, {t})"
                )));
            }
            let idx = child.index();
            if per_edge.len() <= idx {
                per_edge.resize(idx + 1, Vec::new());
            }
            per_edge[idx].push(height);
        }
        let mut by_edge = Vec::with_capacity(per_edge.len());
        for heights in &mut per_edge {
            heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if let Some(w) = heights.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateHeight { height: w[0] });
            }
            by_edge.push(Rc::from(heights.as_slice()));
        }
        Ok(FixedBars {
            t,
            by_edge,
            empty: Rc::from(&[][..]),
        })
    }

    /// Convenience constructor resolving path strings against `tree`.
    pub fn from_paths(
        tree: &Tree,
        t: f64,
        bars: &[(&str, f64)],
    ) -> Result<Self, Error> {
        let resolved: Result<Vec<(NodeId, f64)>, Error> = bars
            .iter()
            .map(|&(path, h)| {
                let v = tree.vertex_by_string(path)?;
                if tree.parent(v).is_none() {
                    return Err(Error::InvalidParameter(
                        "the root names no edge; bars live on child vertices".into(),
                    ));
                }
                Ok((v, h))
            })
            .collect();
        FixedBars::new(t, resolved?)
    }

    pub fn bars(&self) -> Vec<(NodeId, f64)> {
        let mut out = Vec::new();
        for (i, heights) in self.by_edge.iter().enumerate() {
            for &h in heights.iter() {
                out.push((NodeId(i as u32), h));
            }
        }
        out
    }
}

impl BarSource for FixedBars {
    fn period(&self) -> f64 {
        self.t
    }

    fn heights(&self, _tree: &Tree, edge: EdgeId) -> Rc<[f64]> {
        self.by_edge
            .get(edge.child.index())
            .cloned()
            .unwrap_or_else(|| self.empty.clone())
    }
}

/// The joint the meander will reach next from a pole position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Joint {
    pub edge: EdgeId,
    pub height: f64,
    /// Strictly positive time until the joint is reached; a joint exactly at
    /// the current height is a full period away.
    pub gap: f64,
    /// Whether crossing the bar arrives at the edge's child endpoint.
    pub to_child: bool,
}

/// Finds the first joint strictly above height `h` (cyclically) on the pole
/// of `v`.  Returns `None` when no incident edge carries a bar.
///
/// Materializes the children of `v`, so it can fail with
/// [`Error::DepthCapExceeded`].
pub fn next_joint<S: BarSource + ?Sized>(
    tree: &Tree,
    source: &S,
    v: NodeId,
    h: f64,
) -> Result<Option<Joint>, Error> {
    let t = source.period();
    let mut best: Option<Joint> = None;
    let mut consider = |edge: EdgeId, to_child: bool, tree: &Tree| {
        let heights = source.heights(tree, edge);
        if heights.is_empty() {
            return;
        }
        // Successor of h strictly above, wrapping around the pole.
        let idx = heights.partition_point(|&x| x <= h);
        let (height, gap) = if idx < heights.len() {
            (heights[idx], heights[idx] - h)
        } else {
            (heights[0], t - (h - heights[0]))
        };
        let candidate = Joint {
            edge,
            height,
            gap,
            to_child,
        };
        best = match best {
            None => Some(candidate),
            Some(cur) => {
                if gap < cur.gap
                    || (gap == cur.gap
                        && tree.lex_cmp(edge.child, cur.edge.child) == std::cmp::Ordering::Less)
                {
                    Some(candidate)
                } else {
                    Some(cur)
                }
            }
        };
    };
    if tree.parent(v).is_some() {
        consider(EdgeId { child: v }, false, tree);
    }
    for child in tree.children(v)? {
        consider(
            EdgeId {
                child: NodeId(child),
            },
            true,
            tree,
        );
    }
    Ok(best)
}

/// Writes bars as flat text: one `edge-path<TAB>height` line per bar, full
/// round-trip precision.
pub fn write_bar_file<W: Write>(
    tree: &Tree,
    bars: &[Bar],
    mut out: W,
) -> Result<(), Error> {
    for bar in bars {
        writeln!(out, "{}\t{}", tree.edge_string(bar.edge), bar.height)?;
    }
    Ok(())
}

/// Reads a bar file back as `(edge path, height)` rows.  Blank lines and
/// lines starting with `#` are skipped.
pub fn read_bar_file<R: BufRead>(input: R) -> Result<Vec<(String, f64)>, Error> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split('\t');
        let (Some(path), Some(height), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: lineno + 1,
                reason: "expected `edge-path<TAB>height`".into(),
            });
        };
        let height: f64 = height.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            reason: format!("bad height {height:?}"),
        })?;
        out.push((path.to_string(), height));
    }
    Ok(out)
}

/// Resolves bar-file rows against a tree, producing a [`FixedBars`]
/// environment.
pub fn fixed_bars_from_rows(
    tree: &Tree,
    t: f64,
    rows: &[(String, f64)],
) -> Result<FixedBars, Error> {
    let as_refs: Vec<(&str, f64)> = rows.iter().map(|(p, h)| (p.as_str(), *h)).collect();
    FixedBars::from_paths(tree, t, &as_refs)
}
