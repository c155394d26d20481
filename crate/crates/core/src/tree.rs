//! Rooted trees, grown lazily.
//!
//! Vertices are addressed by their child-index path from the root, so an
//! infinite tree needs no up-front storage: a [`Tree`] is an arena that only
//! ever holds the vertices a walk has looked at.  Each vertex carries a
//! `path_key`, a hash of its path that is independent of discovery order;
//! the bar process keys its per-edge random streams off it.
//!
//! The edge between a non-root vertex and its parent is identified by the
//! child vertex ([`EdgeId`]).  Following the orientation conventions used
//! throughout the crate, for an edge `e` the endpoint nearer the root is the
//! parent endpoint `e+` and the farther one is the child endpoint `e-`.

use std::cell::{Cell, RefCell};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng;

/// Handle to a vertex in a [`Tree`] arena.  Only meaningful for the tree that
/// produced it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

/// An edge, named by its child endpoint.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct EdgeId {
    pub child: NodeId,
}

/// Explicit finite tree shape: a vertex and the shapes of its subtrees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteNode {
    #[serde(default)]
    pub children: Vec<FiniteNode>,
}

impl FiniteNode {
    pub fn leaf() -> Self {
        FiniteNode { children: vec![] }
    }

    /// Full tree in which every vertex down to `depth` has `offspring`
    /// children.
    pub fn full(offspring: u32, depth: u32) -> Self {
        if depth == 0 {
            return FiniteNode::leaf();
        }
        FiniteNode {
            children: (0..offspring)
                .map(|_| FiniteNode::full(offspring, depth - 1))
                .collect(),
        }
    }

    fn count(&self) -> u64 {
        1 + self.children.iter().map(FiniteNode::count).sum::<u64>()
    }

    fn lookup(&self, path: &[u32]) -> Option<&FiniteNode> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children.get(i as usize)?.lookup(rest),
        }
    }
}

/// The tree family being simulated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeKind {
    /// Every vertex, the root included, has exactly `offspring` children.
    RegularOffspring { offspring: u32 },
    /// Every non-root vertex has `degree` neighbours, i.e. `degree - 1`
    /// children.  With `reduced_root` false the root has `degree` children
    /// (so its degree equals everyone else's); with it true the root has
    /// `degree - 1` children.
    DegreeRegular { degree: u32, reduced_root: bool },
    /// An explicitly given finite tree.
    ExplicitFinite(FiniteNode),
}

/// A tree family plus an optional materialization depth cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub kind: TreeKind,
    /// Maximum depth at which vertices can be materialized.  Children of a
    /// vertex at this depth cannot be realized; walks reaching it report
    /// censoring rather than silently truncating.  Mandatory for the two
    /// infinite kinds.
    pub depth_cap: Option<u32>,
}

impl TreeSpec {
    pub fn new(kind: TreeKind, depth_cap: Option<u32>) -> Result<Self, Error> {
        if let Some(cap) = depth_cap {
            if cap == 0 {
                return Err(Error::InvalidSpec("depth cap must be positive".into()));
            }
        }
        match &kind {
            TreeKind::RegularOffspring { offspring } => {
                if *offspring == 0 {
                    return Err(Error::InvalidSpec(
                        "offspring-regular tree needs offspring >= 1".into(),
                    ));
                }
                if depth_cap.is_none() {
                    return Err(Error::InvalidSpec(
                        "infinite tree kinds require a depth cap".into(),
                    ));
                }
            }
            TreeKind::DegreeRegular { degree, .. } => {
                if *degree < 2 {
                    return Err(Error::InvalidSpec(
                        "degree-regular tree needs degree >= 2".into(),
                    ));
                }
                if depth_cap.is_none() {
                    return Err(Error::InvalidSpec(
                        "infinite tree kinds require a depth cap".into(),
                    ));
                }
            }
            TreeKind::ExplicitFinite(_) => {}
        }
        Ok(TreeSpec { kind, depth_cap })
    }

    /// Offspring-regular tree with `offspring` children per vertex.
    pub fn regular(offspring: u32, depth_cap: u32) -> Result<Self, Error> {
        TreeSpec::new(TreeKind::RegularOffspring { offspring }, Some(depth_cap))
    }

    /// Degree-regular tree in which non-root vertices have `degree`
    /// neighbours.
    pub fn degree_regular(degree: u32, reduced_root: bool, depth_cap: u32) -> Result<Self, Error> {
        TreeSpec::new(
            TreeKind::DegreeRegular {
                degree,
                reduced_root,
            },
            Some(depth_cap),
        )
    }

    /// Finite truncation of the offspring-regular tree: full `offspring`-ary
    /// down to `depth`.
    pub fn full_truncation(offspring: u32, depth: u32) -> Self {
        TreeSpec {
            kind: TreeKind::ExplicitFinite(FiniteNode::full(offspring, depth)),
            depth_cap: None,
        }
    }

    /// Seven-vertex tree used in the worked examples: a root with two
    /// children, each of which has two children.
    pub fn two_level_binary() -> Self {
        TreeSpec::full_truncation(2, 2)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, TreeKind::ExplicitFinite(_))
    }

    /// Number of vertices of a finite tree.
    pub fn finite_vertex_count(&self) -> Option<u64> {
        match &self.kind {
            TreeKind::ExplicitFinite(root) => Some(root.count()),
            _ => None,
        }
    }

    fn root_offspring(&self) -> u32 {
        match &self.kind {
            TreeKind::RegularOffspring { offspring } => *offspring,
            TreeKind::DegreeRegular {
                degree,
                reduced_root,
            } => {
                if *reduced_root {
                    *degree - 1
                } else {
                    *degree
                }
            }
            TreeKind::ExplicitFinite(root) => root.children.len() as u32,
        }
    }

    fn offspring_below(&self, path: &[u32]) -> u32 {
        match &self.kind {
            TreeKind::RegularOffspring { offspring } => *offspring,
            TreeKind::DegreeRegular { degree, .. } => *degree - 1,
            TreeKind::ExplicitFinite(root) => root
                .lookup(path)
                .map(|n| n.children.len() as u32)
                .unwrap_or(0),
        }
    }
}

const NO_PARENT: u32 = u32::MAX;
const UNMATERIALIZED: u32 = u32::MAX;
/// Fixed root key; the bar process mixes in its own seed.
const ROOT_KEY: u64 = 0xA11C_E000_0000_0001;

struct Node {
    parent: u32,
    child_index: u32,
    depth: u32,
    n_offspring: u32,
    path_key: u64,
    first_child: Cell<u32>,
}

/// Lazily materialized arena over a [`TreeSpec`].
pub struct Tree {
    spec: TreeSpec,
    nodes: RefCell<Vec<Node>>,
}

impl Tree {
    pub fn new(spec: TreeSpec) -> Self {
        let root = Node {
            parent: NO_PARENT,
            child_index: 0,
            depth: 0,
            n_offspring: spec.root_offspring(),
            path_key: rng::mix(ROOT_KEY),
            first_child: Cell::new(UNMATERIALIZED),
        };
        Tree {
            spec,
            nodes: RefCell::new(vec![root]),
        }
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    /// Number of vertices materialized so far.
    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let nodes = self.nodes.borrow();
        let p = nodes[v.index()].parent;
        (p != NO_PARENT).then_some(NodeId(p))
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.nodes.borrow()[v.index()].depth
    }

    /// Index of `v` among its parent's children; 0 for the root.
    pub fn child_index(&self, v: NodeId) -> u32 {
        self.nodes.borrow()[v.index()].child_index
    }

    /// Number of children `v` has (whether or not they are materialized).
    pub fn offspring_count(&self, v: NodeId) -> u32 {
        self.nodes.borrow()[v.index()].n_offspring
    }

    /// Graph degree of `v`: children plus the parent edge if any.
    pub fn degree(&self, v: NodeId) -> u32 {
        let nodes = self.nodes.borrow();
        let n = &nodes[v.index()];
        n.n_offspring + u32::from(n.parent != NO_PARENT)
    }

    /// Order-independent hash of the path of `v`.
    pub fn path_key(&self, v: NodeId) -> u64 {
        self.nodes.borrow()[v.index()].path_key
    }

    /// Child-index path of `v` from the root.
    pub fn path(&self, v: NodeId) -> Vec<u32> {
        let nodes = self.nodes.borrow();
        let mut rev = Vec::with_capacity(nodes[v.index()].depth as usize);
        let mut cur = v.index();
        while nodes[cur].parent != NO_PARENT {
            rev.push(nodes[cur].child_index);
            cur = nodes[cur].parent as usize;
        }
        rev.reverse();
        rev
    }

    /// Materializes and returns the children of `v`.
    ///
    /// Children occupy a contiguous id block, so the result is returned as a
    /// range.  Fails with [`Error::DepthCapExceeded`] when `v` sits at the
    /// depth cap.
    pub fn children(&self, v: NodeId) -> Result<std::ops::Range<u32>, Error> {
        {
            let nodes = self.nodes.borrow();
            let n = &nodes[v.index()];
            if let Some(cap) = self.spec.depth_cap {
                if n.depth >= cap {
                    return Err(Error::DepthCapExceeded {
                        depth_cap: cap,
                        at_depth: n.depth,
                    });
                }
            }
            let first = n.first_child.get();
            if first != UNMATERIALIZED {
                return Ok(first..first + n.n_offspring);
            }
            if n.n_offspring == 0 {
                return Ok(0..0);
            }
        }
        let mut nodes = self.nodes.borrow_mut();
        let first = nodes.len() as u32;
        let (count, depth, parent_key) = {
            let n = &nodes[v.index()];
            (n.n_offspring, n.depth, n.path_key)
        };
        // Only explicit finite trees key offspring counts off the path; for
        // the homogeneous kinds skip the O(depth) climb entirely.
        let mut child_path = match &self.spec.kind {
            TreeKind::ExplicitFinite(_) => {
                let mut rev = Vec::new();
                let mut cur = v.index();
                while nodes[cur].parent != NO_PARENT {
                    rev.push(nodes[cur].child_index);
                    cur = nodes[cur].parent as usize;
                }
                rev.reverse();
                rev
            }
            _ => Vec::new(),
        };
        child_path.push(0);
        for i in 0..count {
            *child_path.last_mut().unwrap() = i;
            let n_offspring = self.spec.offspring_below(&child_path);
            nodes.push(Node {
                parent: v.0,
                child_index: i,
                depth: depth + 1,
                n_offspring,
                path_key: rng::derive_key(parent_key, i as u64),
                first_child: Cell::new(UNMATERIALIZED),
            });
        }
        nodes[v.index()].first_child.set(first);
        Ok(first..first + count)
    }

    /// Child ids of `v` as a vector.
    pub fn child_ids(&self, v: NodeId) -> Result<Vec<NodeId>, Error> {
        Ok(self.children(v)?.map(NodeId).collect())
    }

    /// Resolves (materializing as needed) the vertex with the given path.
    pub fn vertex_by_path(&self, path: &[u32]) -> Result<NodeId, Error> {
        let mut cur = self.root();
        for (i, &idx) in path.iter().enumerate() {
            let range = self.children(cur).map_err(|e| match e {
                Error::DepthCapExceeded { depth_cap, .. } => Error::InvalidPath {
                    path: path_to_string(path),
                    reason: format!("prefix of length {} reaches the depth cap {}", i, depth_cap),
                },
                other => other,
            })?;
            if idx >= range.len() as u32 {
                return Err(Error::InvalidPath {
                    path: path_to_string(path),
                    reason: format!(
                        "component {} is {} but the vertex has {} children",
                        i,
                        idx,
                        range.len()
                    ),
                });
            }
            cur = NodeId(range.start + idx);
        }
        Ok(cur)
    }

    /// True when `a` lies on the root path of `b` (including `a == b`).
    pub fn is_ancestor_or_equal(&self, a: NodeId, b: NodeId) -> bool {
        let nodes = self.nodes.borrow();
        let da = nodes[a.index()].depth;
        let mut cur = b.index();
        while nodes[cur].depth > da {
            cur = nodes[cur].parent as usize;
        }
        cur == a.index()
    }

    /// True when `b` is a strict descendent of `a`.
    pub fn is_strict_descendent(&self, b: NodeId, a: NodeId) -> bool {
        a != b && self.is_ancestor_or_equal(a, b)
    }

    /// Deepest common ancestor of `a` and `b`.
    pub fn meet(&self, a: NodeId, b: NodeId) -> NodeId {
        let nodes = self.nodes.borrow();
        let (mut x, mut y) = (a.index(), b.index());
        while nodes[x].depth > nodes[y].depth {
            x = nodes[x].parent as usize;
        }
        while nodes[y].depth > nodes[x].depth {
            y = nodes[y].parent as usize;
        }
        while x != y {
            x = nodes[x].parent as usize;
            y = nodes[y].parent as usize;
        }
        NodeId(x as u32)
    }

    /// Graph distance between `a` and `b`.
    pub fn graph_distance(&self, a: NodeId, b: NodeId) -> u32 {
        let m = self.meet(a, b);
        let nodes = self.nodes.borrow();
        nodes[a.index()].depth + nodes[b.index()].depth - 2 * nodes[m.index()].depth
    }

    /// Materializes every vertex of a finite tree and returns their ids in
    /// breadth-first order.
    pub fn all_vertices(&self) -> Result<Vec<NodeId>, Error> {
        if !self.spec.is_finite() {
            return Err(Error::InvalidSpec(
                "full materialization requires a finite tree".into(),
            ));
        }
        let mut out = vec![self.root()];
        let mut cursor = 0;
        while cursor < out.len() {
            let v = out[cursor];
            cursor += 1;
            out.extend(self.children(v)?.map(NodeId));
        }
        Ok(out)
    }

    /// Lexicographic comparison of two vertices by child-index path.
    pub fn lex_cmp(&self, a: NodeId, b: NodeId) -> std::cmp::Ordering {
        self.path(a).cmp(&self.path(b))
    }

    /// Human- and file-format path string: "phi" for the root, dotted child
    /// indices otherwise ("0", "0.1", ...).
    pub fn path_string(&self, v: NodeId) -> String {
        path_to_string(&self.path(v))
    }

    /// Edge label for bar files: the path string of the child endpoint.
    pub fn edge_string(&self, e: EdgeId) -> String {
        self.path_string(e.child)
    }

    /// Parses a path string produced by [`Tree::path_string`].
    pub fn vertex_by_string(&self, s: &str) -> Result<NodeId, Error> {
        let path = parse_path(s)?;
        self.vertex_by_path(&path)
    }
}

/// Formats a child-index path; the empty path is the root, written "phi".
pub fn path_to_string(path: &[u32]) -> String {
    if path.is_empty() {
        return "phi".to_string();
    }
    let mut s = String::new();
    for (i, idx) in path.iter().enumerate() {
        if i > 0 {
            s.push('.');
        }
        s.push_str(&idx.to_string());
    }
    s
}

/// Parses a path string: "phi" or dotted child indices.
pub fn parse_path(s: &str) -> Result<Vec<u32>, Error> {
    let s = s.trim();
    if s == "phi" {
        return Ok(vec![]);
    }
    if s.is_empty() {
        return Err(Error::InvalidPath {
            path: s.to_string(),
            reason: "empty path string".into(),
        });
    }
    s.split('.')
        .map(|part| {
            part.parse::<u32>().map_err(|_| Error::InvalidPath {
                path: s.to_string(),
                reason: format!("component {:?} is not a child index", part),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(depth_cap: u32) -> Tree {
        Tree::new(TreeSpec::regular(2, depth_cap).unwrap())
    }

    #[test]
    fn root_properties() {
        let t = binary(8);
        let r = t.root();
        assert_eq!(t.parent(r), None);
        assert_eq!(t.depth(r), 0);
        assert_eq!(t.offspring_count(r), 2);
        assert_eq!(t.degree(r), 2);
        assert_eq!(t.path_string(r), "phi");
    }

    #[test]
    fn children_are_contiguous_and_lazy() {
        let t = binary(8);
        assert_eq!(t.len(), 1);
        let kids = t.child_ids(t.root()).unwrap();
        assert_eq!(kids.len(), 2);
        assert_eq!(t.len(), 3);
        let again = t.child_ids(t.root()).unwrap();
        assert_eq!(kids, again);
        assert_eq!(t.len(), 3);
        assert_eq!(t.degree(kids[0]), 3);
    }

    #[test]
    fn depth_cap_reported() {
        let t = binary(2);
        let v = t.vertex_by_path(&[0, 1]).unwrap();
        assert_eq!(t.depth(v), 2);
        match t.children(v) {
            Err(Error::DepthCapExceeded { depth_cap: 2, .. }) => {}
            other => panic!("expected depth cap error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn degree_regular_conventions() {
        let full = Tree::new(TreeSpec::degree_regular(5, false, 4).unwrap());
        assert_eq!(full.offspring_count(full.root()), 5);
        let c = full.child_ids(full.root()).unwrap()[0];
        assert_eq!(full.offspring_count(c), 4);
        assert_eq!(full.degree(c), 5);

        let reduced = Tree::new(TreeSpec::degree_regular(5, true, 4).unwrap());
        assert_eq!(reduced.offspring_count(reduced.root()), 4);
    }

    #[test]
    fn explicit_finite_shape() {
        let t = Tree::new(TreeSpec::two_level_binary());
        let all = t.all_vertices().unwrap();
        assert_eq!(all.len(), 7);
        let v = t.vertex_by_string("0").unwrap();
        assert_eq!(t.offspring_count(v), 2);
        let leaf = t.vertex_by_string("1.1").unwrap();
        assert_eq!(t.offspring_count(leaf), 0);
        assert_eq!(t.degree(leaf), 1);
    }

    #[test]
    fn spec_validation() {
        assert!(TreeSpec::new(TreeKind::RegularOffspring { offspring: 2 }, None).is_err());
        assert!(TreeSpec::regular(0, 5).is_err());
        assert!(TreeSpec::degree_regular(1, false, 5).is_err());
        assert!(TreeSpec::new(
            TreeKind::ExplicitFinite(FiniteNode::full(2, 2)),
            None
        )
        .is_ok());
    }

    #[test]
    fn path_round_trip() {
        let t = binary(6);
        for path in [vec![], vec![0], vec![1, 0, 1], vec![0, 0, 0, 1]] {
            let v = t.vertex_by_path(&path).unwrap();
            assert_eq!(t.path(v), path);
            let s = t.path_string(v);
            assert_eq!(t.vertex_by_string(&s).unwrap(), v);
        }
        assert!(t.vertex_by_string("2").is_err());
        assert!(t.vertex_by_string("x.y").is_err());
        assert!(parse_path("").is_err());
    }

    #[test]
    fn metric_identity_on_enumerated_pairs() {
        let t = binary(4);
        let mut ids = vec![t.root()];
        let mut cursor = 0;
        while cursor < ids.len() {
            let v = ids[cursor];
            cursor += 1;
            if t.depth(v) < 4 {
                ids.extend(t.child_ids(v).unwrap());
            }
        }
        for &a in &ids {
            for &b in &ids {
                let m = t.meet(a, b);
                let lhs = t.graph_distance(a, b);
                let rhs = t.depth(a) + t.depth(b) - 2 * t.depth(m);
                assert_eq!(lhs, rhs);
                assert_eq!(t.graph_distance(a, b), t.graph_distance(b, a));
                assert_eq!(t.graph_distance(a, a), 0);
            }
        }
    }

    #[test]
    fn ancestor_tests() {
        let t = binary(6);
        let a = t.vertex_by_path(&[0]).unwrap();
        let b = t.vertex_by_path(&[0, 1, 1]).unwrap();
        let c = t.vertex_by_path(&[1]).unwrap();
        assert!(t.is_ancestor_or_equal(a, b));
        assert!(t.is_ancestor_or_equal(a, a));
        assert!(!t.is_ancestor_or_equal(b, a));
        assert!(!t.is_ancestor_or_equal(c, b));
        assert!(t.is_strict_descendent(b, a));
        assert!(!t.is_strict_descendent(a, a));
        assert_eq!(t.meet(b, c), t.root());
    }

    #[test]
    fn path_keys_are_path_pure() {
        // Two trees discovering vertices in different orders assign the same
        // keys to the same paths.
        let t1 = binary(6);
        let t2 = binary(6);
        let p = [1u32, 0, 1];
        let a = t1.vertex_by_path(&p).unwrap();
        // Touch other parts of t2 first.
        t2.vertex_by_path(&[0, 0, 0]).unwrap();
        t2.vertex_by_path(&[1, 1]).unwrap();
        let b = t2.vertex_by_path(&p).unwrap();
        assert_eq!(t1.path_key(a), t2.path_key(b));
        assert_ne!(a.0, b.0, "ids may differ; keys must not");
    }

    #[test]
    fn lex_order_matches_paths() {
        let t = binary(4);
        let a = t.vertex_by_path(&[0, 1]).unwrap();
        let b = t.vertex_by_path(&[1]).unwrap();
        let c = t.vertex_by_path(&[0]).unwrap();
        assert_eq!(t.lex_cmp(c, a), std::cmp::Ordering::Less);
        assert_eq!(t.lex_cmp(a, b), std::cmp::Ordering::Less);
        assert_eq!(t.lex_cmp(t.root(), c), std::cmp::Ordering::Less);
    }
}
