//! Fixed environments shared by unit tests across modules.

use crate::bars::FixedBars;
use crate::tree::{Tree, TreeSpec};

/// The two-bar worked example on the seven-vertex tree: bars on the root's
/// two child edges at heights 0.3 T and 0.6 T.  Its meander from the root is
/// periodic with root cycle (phi 0 1) of length 3.
pub fn two_bar_example(t: f64) -> (Tree, FixedBars) {
    let tree = Tree::new(TreeSpec::two_level_binary());
    let bars = FixedBars::from_paths(&tree, t, &[("0", 0.3 * t), ("1", 0.6 * t)]).unwrap();
    (tree, bars)
}

/// Single bar on the root's first child edge at height 0.5 T: the meander
/// ping-pongs across it; the root cycle is the transposition (phi 0).
pub fn ping_pong_example(t: f64) -> (Tree, FixedBars) {
    let tree = Tree::new(TreeSpec::two_level_binary());
    let bars = FixedBars::from_paths(&tree, t, &[("0", 0.5 * t)]).unwrap();
    (tree, bars)
}

/// A straight descending ladder: bars at heights `0.1 T, 0.2 T, ..." on the
/// successive edges of the leftmost ray, so the meander walks straight down
/// crossing one bar every `0.1 T`.
pub fn ladder_example(t: f64, rungs: usize) -> (Tree, FixedBars) {
    assert!(rungs <= 8, "ladder heights must stay below T");
    let tree = Tree::new(TreeSpec::regular(2, rungs as u32 + 2).unwrap());
    let bars: Vec<(String, f64)> = (0..rungs)
        .map(|k| {
            let path = vec!["0"; k + 1].join(".");
            (path, 0.1 * t * (k + 1) as f64)
        })
        .collect();
    let refs: Vec<(&str, f64)> = bars.iter().map(|(p, h)| (p.as_str(), *h)).collect();
    let env = FixedBars::from_paths(&tree, t, &refs).unwrap();
    (tree, env)
}
