//! Colour refinement (1-dimensional Weisfeiler-Leman) on rooted balls.
//!
//! Colours are ranks of sorted signatures, so they do not depend on node
//! labels. Refining several balls jointly keeps their colours comparable.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ball::RootedBall;

/// Compresses arbitrary ordered keys into dense ranks shared by all graphs.
fn rank<K: Ord + Clone>(keys: &[Vec<K>]) -> (Vec<Vec<u32>>, usize) {
    let mut table: BTreeMap<K, u32> = BTreeMap::new();
    for list in keys {
        for k in list {
            table.entry(k.clone()).or_insert(0);
        }
    }
    for (i, v) in table.values_mut().enumerate() {
        *v = i as u32;
    }
    let classes = table.len();
    let colours = keys.iter().map(|list| list.iter().map(|k| table[k]).collect()).collect();
    (colours, classes)
}

/// Initial colours: (distance from root, degree).
pub(crate) fn initial_colours(balls: &[&RootedBall]) -> Vec<Vec<u32>> {
    let keys: Vec<Vec<(u32, usize)>> =
        balls.iter().map(|b| (0..b.len()).map(|i| (b.dist[i], b.degree(i))).collect()).collect();
    rank(&keys).0
}

/// Refines `colours` until the number of classes stops growing.
pub(crate) fn refine(adjacency: &[&[Vec<usize>]], mut colours: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    let mut classes = {
        let mut all: Vec<u32> = colours.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    };
    loop {
        let keys: Vec<Vec<(u32, Vec<u32>)>> = adjacency
            .iter()
            .zip(&colours)
            .map(|(adj, col)| {
                (0..adj.len())
                    .map(|i| {
                        let mut sig: Vec<u32> = adj[i].iter().map(|&j| col[j]).collect();
                        sig.sort_unstable();
                        (col[i], sig)
                    })
                    .collect()
            })
            .collect();
        let (next, count) = rank(&keys);
        colours = next;
        if count == classes {
            return colours;
        }
        classes = count;
    }
}

/// Stable colours of two balls refined jointly.
pub(crate) fn joint_colours(a: &RootedBall, b: &RootedBall) -> (Vec<u32>, Vec<u32>) {
    let init = initial_colours(&[a, b]);
    let mut out = refine(&[&a.adjacency, &b.adjacency], init);
    let second = out.pop().unwrap_or_default();
    let first = out.pop().unwrap_or_default();
    (first, second)
}
