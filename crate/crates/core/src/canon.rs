//! Canonical keys for rooted balls.
//!
//! Two balls get the same key exactly when a root-preserving isomorphism
//! exists between them; coordinates are ignored. Trees use the sorted
//! nested-parenthesis code (the minimal code over all child orderings). Other
//! balls use the lexicographically minimal adjacency code over all orderings
//! reachable by individualisation and refinement of breadth-first colours.

use alloc::vec::Vec;

use crate::ball::RootedBall;
use crate::refine::{initial_colours, refine};

const TREE_TAG: u8 = b'T';
const GRAPH_TAG: u8 = b'G';
const OPEN: u8 = 1;
const CLOSE: u8 = 2;

pub fn canonical_key(b: &RootedBall) -> Vec<u8> {
    if b.edge_count() + 1 == b.len() {
        tree_key(b)
    } else {
        graph_key(b)
    }
}

fn tree_key(b: &RootedBall) -> Vec<u8> {
    let n = b.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| core::cmp::Reverse(b.dist[i]));
    let mut codes: Vec<Vec<u8>> = alloc::vec![Vec::new(); n];
    for &v in &order {
        let mut children: Vec<Vec<u8>> = b.adjacency[v]
            .iter()
            .filter(|&&c| b.dist[c] == b.dist[v] + 1)
            .map(|&c| core::mem::take(&mut codes[c]))
            .collect();
        children.sort();
        let mut code = Vec::with_capacity(2 + children.iter().map(Vec::len).sum::<usize>());
        code.push(OPEN);
        for c in children {
            code.extend_from_slice(&c);
        }
        code.push(CLOSE);
        codes[v] = code;
    }
    let mut key = alloc::vec![TREE_TAG];
    key.extend_from_slice(&b.radius.to_le_bytes());
    key.extend_from_slice(&codes[b.root]);
    key
}

fn graph_key(b: &RootedBall) -> Vec<u8> {
    let colours = refine(&[&b.adjacency], initial_colours(&[b])).pop().unwrap_or_default();
    let mut best: Option<Vec<u32>> = None;
    search(b, colours, &mut best);
    let mut key = alloc::vec![GRAPH_TAG];
    key.extend_from_slice(&b.radius.to_le_bytes());
    key.extend_from_slice(&(b.len() as u32).to_le_bytes());
    for x in best.unwrap_or_default() {
        key.extend_from_slice(&x.to_le_bytes());
    }
    key
}

/// Adjacency code of a discrete colouring: for each position, the sorted
/// positions of its neighbours, terminated by `u32::MAX`.
fn leaf_code(b: &RootedBall, colours: &[u32]) -> Vec<u32> {
    let n = b.len();
    let mut at = alloc::vec![0usize; n];
    for (v, &c) in colours.iter().enumerate() {
        at[c as usize] = v;
    }
    let mut code = Vec::with_capacity(n + 2 * b.edge_count());
    for &v in &at {
        let mut row: Vec<u32> = b.adjacency[v].iter().map(|&w| colours[w]).collect();
        row.sort_unstable();
        code.extend_from_slice(&row);
        code.push(u32::MAX);
    }
    code
}

fn search(b: &RootedBall, colours: Vec<u32>, best: &mut Option<Vec<u32>>) {
    let n = b.len();
    let mut counts = alloc::vec![0usize; n];
    for &c in &colours {
        counts[c as usize] += 1;
    }
    let Some(target) = (0..n).find(|&c| counts[c] > 1) else {
        let code = leaf_code(b, &colours);
        if best.as_ref().is_none_or(|cur| code < *cur) {
            *best = Some(code);
        }
        return;
    };
    let target = target as u32;
    for v in (0..n).filter(|&v| colours[v] == target) {
        // individualise v: it keeps `target`, the rest of its cell moves up one
        let next: Vec<u32> = colours
            .iter()
            .enumerate()
            .map(|(w, &c)| if c > target || (c == target && w != v) { c + 1 } else { c })
            .collect();
        let refined = refine(&[&b.adjacency], alloc::vec![next]).pop().unwrap_or_default();
        search(b, refined, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ball;
    use crate::graphing::{Generator, Graphing, Piece};
    use crate::space::{GroundSpace, Point};
    use alloc::vec;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    const ALPHA: f64 = 0.6180339887;

    fn c_alpha() -> Graphing {
        Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, ALPHA)], 2)
    }

    #[test]
    fn interior_rotation_balls_share_a_key() {
        let g = c_alpha();
        let a = ball(&g, Point::new(0.11), 2).unwrap();
        let b = ball(&g, Point::new(0.83), 2).unwrap();
        assert_eq!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn endpoint_ball_differs_from_interior() {
        let g = c_alpha().with_exceptions(vec![(Point::new(0.0), Point::new(ALPHA))], vec![]);
        let u = ball(&g, Point::new(0.0), 1).unwrap();
        let x = ball(&g, Point::new(0.4), 1).unwrap();
        assert_ne!(canonical_key(&u), canonical_key(&x));
    }

    #[test]
    fn triangle_is_vertex_transitive() {
        let g = Graphing::new(
            GroundSpace::Atoms(3),
            vec![Generator::new(vec![Piece::Permute { part: 0, target_part: 0, map: vec![(0, 1), (1, 2), (2, 0)] }])],
            2,
        );
        let keys: Vec<_> = (0..3).map(|i| canonical_key(&ball(&g, Point::atom(i), 1).unwrap())).collect();
        assert_eq!(keys[0], keys[1]);
        assert_eq!(keys[1], keys[2]);
    }

    #[test]
    fn radius_is_part_of_the_key() {
        let g = Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, 0.5)], 1);
        let a = ball(&g, Point::new(0.1), 1).unwrap();
        let b = ball(&g, Point::new(0.1), 2).unwrap();
        assert_eq!(a.len(), b.len());
        assert_ne!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn key_is_invariant_under_relabelling() {
        // a ball with a cycle: the 4-cycle plus a pendant path
        let nodes = (0..6).map(|i| Point::new(f64::from(i) / 10.0)).collect();
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5)];
        let b = RootedBall::from_edges(nodes, 0, &edges, 2).unwrap();
        let key = canonical_key(&b);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let mut perm: Vec<usize> = (0..6).collect();
            perm.shuffle(&mut rng);
            assert_eq!(canonical_key(&b.relabel(&perm)), key);
        }
    }

    #[test]
    fn non_isomorphic_cyclic_balls_differ() {
        let nodes: Vec<Point> = (0..5).map(|i| Point::new(f64::from(i) / 10.0)).collect();
        // root on a 4-cycle with a pendant on the far vertex vs on a neighbour
        let far = RootedBall::from_edges(nodes.clone(), 0, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 4)], 3).unwrap();
        let near = RootedBall::from_edges(nodes, 0, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 4)], 3).unwrap();
        assert_ne!(canonical_key(&far), canonical_key(&near));
    }
}
