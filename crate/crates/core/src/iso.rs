//! Root-preserving isomorphisms between rooted balls.
//!
//! All searches assign source nodes in a fixed order (breadth-first layer,
//! then degree, then coordinate) and draw candidates for a node from the
//! neighbourhood of an already-mapped neighbour, filtered by jointly refined
//! colours. The minimum-displacement search is a branch and bound on the
//! running maximum displacement.

use alloc::vec::Vec;

use crate::ball::RootedBall;
use crate::error::{Error, Result};
use crate::refine::joint_colours;
use crate::space::GroundSpace;

/// Default cap on the number of isomorphisms enumerated.
pub const DEFAULT_ISO_LIMIT: usize = 10_000;

/// A root-preserving isomorphism `source -> target`.
///
/// `mapping[i]` is the target index of source node `i`; `displacement` is the
/// largest base distance between a node and its image.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodIso {
    pub mapping: Vec<usize>,
    pub displacement: f64,
}

impl NeighborhoodIso {
    /// Recomputes the displacement from the mapping.
    pub fn measure(space: &GroundSpace, source: &RootedBall, target: &RootedBall, mapping: &[usize]) -> f64 {
        mapping.iter().enumerate().map(|(i, &j)| space.d0(&source.nodes[i], &target.nodes[j])).fold(0.0, f64::max)
    }

    /// Checks that the mapping is a root-preserving graph isomorphism.
    pub fn is_valid_for(&self, source: &RootedBall, target: &RootedBall) -> bool {
        let n = source.len();
        if target.len() != n || self.mapping.len() != n || self.mapping[source.root] != target.root {
            return false;
        }
        let mut seen = alloc::vec![false; n];
        for &j in &self.mapping {
            if j >= n || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        source.edge_count() == target.edge_count()
            && source.edges().all(|(a, b)| target.is_adjacent(self.mapping[a], self.mapping[b]))
    }

    /// The inverse isomorphism `target -> source`.
    pub fn inverse(&self) -> NeighborhoodIso {
        let mut mapping = alloc::vec![0; self.mapping.len()];
        for (i, &j) in self.mapping.iter().enumerate() {
            mapping[j] = i;
        }
        NeighborhoodIso { mapping, displacement: self.displacement }
    }
}

struct Search<'a> {
    space: &'a GroundSpace,
    source: &'a RootedBall,
    target: &'a RootedBall,
    colour_s: Vec<u32>,
    colour_t: Vec<u32>,
    order: Vec<usize>,
    /// For each position in `order`, an earlier-assigned neighbour if any.
    anchor: Vec<Option<usize>>,
    mapping: Vec<usize>,
    used: Vec<bool>,
}

const UNMAPPED: usize = usize::MAX;

impl<'a> Search<'a> {
    /// Prepares a search, or returns `None` when cheap invariants differ.
    fn new(space: &'a GroundSpace, source: &'a RootedBall, target: &'a RootedBall) -> Result<Option<Self>> {
        if source.radius != target.radius {
            return Err(Error::RadiusMismatch { left: source.radius, right: target.radius });
        }
        let n = source.len();
        if n != target.len() || source.edge_count() != target.edge_count() {
            return Ok(None);
        }
        let (colour_s, colour_t) = joint_colours(source, target);
        let mut cs = colour_s.clone();
        let mut ct = colour_t.clone();
        cs.sort_unstable();
        ct.sort_unstable();
        if cs != ct || colour_s[source.root] != colour_t[target.root] {
            return Ok(None);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            source.dist[a]
                .cmp(&source.dist[b])
                .then(source.degree(b).cmp(&source.degree(a)))
                .then(source.nodes[a].total_cmp(&source.nodes[b]))
                .then(a.cmp(&b))
        });
        let mut position = alloc::vec![0; n];
        for (k, &u) in order.iter().enumerate() {
            position[u] = k;
        }
        let anchor = order
            .iter()
            .enumerate()
            .map(|(k, &u)| source.adjacency[u].iter().copied().find(|&w| position[w] < k))
            .collect();
        Ok(Some(Search {
            space,
            source,
            target,
            colour_s,
            colour_t,
            order,
            anchor,
            mapping: alloc::vec![UNMAPPED; n],
            used: alloc::vec![false; n],
        }))
    }

    /// Candidate images for the node at position `k`, sorted by displacement.
    fn candidates(&self, k: usize) -> Vec<(f64, usize)> {
        let u = self.order[k];
        let pool: Vec<usize> = if k == 0 {
            alloc::vec![self.target.root]
        } else if let Some(w) = self.anchor[k] {
            self.target.adjacency[self.mapping[w]].clone()
        } else {
            (0..self.target.len()).collect()
        };
        let mut out: Vec<(f64, usize)> = pool
            .into_iter()
            .filter(|&v| !self.used[v] && self.colour_t[v] == self.colour_s[u] && self.consistent(u, v))
            .map(|v| (self.space.d0(&self.source.nodes[u], &self.target.nodes[v]), v))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Edges between `u` and mapped nodes correspond exactly to edges between
    /// `v` and their images.
    fn consistent(&self, u: usize, v: usize) -> bool {
        let mut mapped_neighbours = 0;
        for &w in &self.source.adjacency[u] {
            let image = self.mapping[w];
            if image != UNMAPPED {
                if !self.target.is_adjacent(v, image) {
                    return false;
                }
                mapped_neighbours += 1;
            }
        }
        let image_neighbours = self.target.adjacency[v].iter().filter(|&&x| self.used[x]).count();
        mapped_neighbours == image_neighbours
    }

    fn assign(&mut self, u: usize, v: usize) {
        self.mapping[u] = v;
        self.used[v] = true;
    }

    fn unassign(&mut self, u: usize, v: usize) {
        self.mapping[u] = UNMAPPED;
        self.used[v] = false;
    }

    fn first(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        let u = self.order[k];
        for (_, v) in self.candidates(k) {
            self.assign(u, v);
            if self.first(k + 1) {
                return true;
            }
            self.unassign(u, v);
        }
        false
    }

    fn best(&mut self, k: usize, running: f64, best: &mut Option<(f64, Vec<usize>)>) {
        if k == self.order.len() {
            if best.as_ref().is_none_or(|(b, _)| running < *b) {
                *best = Some((running, self.mapping.clone()));
            }
            return;
        }
        let u = self.order[k];
        for (d, v) in self.candidates(k) {
            let next = running.max(d);
            if let Some((b, _)) = best {
                // candidates are sorted, so no later one can do better either
                if next >= *b {
                    break;
                }
            }
            self.assign(u, v);
            self.best(k + 1, next, best);
            self.unassign(u, v);
        }
    }

    fn all(&mut self, k: usize, limit: usize, out: &mut Vec<Vec<usize>>) -> bool {
        if k == self.order.len() {
            if out.len() == limit {
                return false;
            }
            out.push(self.mapping.clone());
            return true;
        }
        let u = self.order[k];
        let mut cands = self.candidates(k);
        cands.sort_by_key(|&(_, v)| v);
        for (_, v) in cands {
            self.assign(u, v);
            let more = self.all(k + 1, limit, out);
            self.unassign(u, v);
            if !more {
                return false;
            }
        }
        true
    }
}

/// True iff a root-preserving isomorphism `b1 -> b2` exists.
pub fn iso_exists(b1: &RootedBall, b2: &RootedBall) -> Result<bool> {
    // coordinates play no role in existence
    let space = GroundSpace::Circle;
    Ok(match Search::new(&space, b1, b2)? {
        Some(mut s) => s.first(0),
        None => false,
    })
}

/// An isomorphism of minimum displacement, or `None` if the balls are not
/// isomorphic.
pub fn min_displacement_iso(space: &GroundSpace, b1: &RootedBall, b2: &RootedBall) -> Result<Option<NeighborhoodIso>> {
    let Some(mut search) = Search::new(space, b1, b2)? else {
        return Ok(None);
    };
    let mut best = None;
    search.best(0, 0.0, &mut best);
    Ok(best.map(|(displacement, mapping)| NeighborhoodIso { mapping, displacement }))
}

/// Up to `limit` isomorphisms in a deterministic order, plus a flag that is
/// set when more exist.
pub fn enumerate_isos(
    space: &GroundSpace,
    b1: &RootedBall,
    b2: &RootedBall,
    limit: usize,
) -> Result<(Vec<NeighborhoodIso>, bool)> {
    if limit == 0 {
        return Err(Error::domain("enumeration limit must be at least 1"));
    }
    let Some(mut search) = Search::new(space, b1, b2)? else {
        return Ok((Vec::new(), false));
    };
    let mut maps = Vec::new();
    let complete = search.all(0, limit, &mut maps);
    let isos = maps
        .into_iter()
        .map(|mapping| {
            let displacement = NeighborhoodIso::measure(space, b1, b2, &mapping);
            NeighborhoodIso { mapping, displacement }
        })
        .collect();
    Ok((isos, !complete))
}
