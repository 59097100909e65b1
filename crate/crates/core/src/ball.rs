//! Breadth-first exploration of a graphing: rooted balls and graph distance.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graphing::Graphing;
use crate::space::{GroundSpace, PartKind, Point, TAU};

/// Default cap on the number of nodes a single exploration may collect.
pub const DEFAULT_NODE_CAP: usize = 100_000;

/// The induced subgraph on nodes within graph distance `radius` of the root.
///
/// Nodes are stored in breadth-first order, so the ball of any smaller radius
/// is a prefix of `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedBall {
    pub nodes: Vec<Point>,
    pub root: usize,
    /// Sorted adjacency lists on node indices.
    pub adjacency: Vec<Vec<usize>>,
    pub radius: u32,
    pub dist: Vec<u32>,
}

impl RootedBall {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, n)| n.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Builds a ball from explicit parts, computing distances from `root`.
    ///
    /// Fails unless every node lies within `radius` of the root.
    pub fn from_edges(nodes: Vec<Point>, root: usize, edges: &[(usize, usize)], radius: u32) -> Result<Self> {
        let n = nodes.len();
        if root >= n {
            return Err(Error::domain("root index out of range"));
        }
        let mut adjacency = alloc::vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::domain("invalid edge in ball"));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let dist = bfs_distances(&adjacency, root);
        if dist.iter().any(|&d| d > radius) {
            return Err(Error::domain("ball is disconnected or exceeds its radius"));
        }
        Ok(RootedBall { nodes, root, adjacency, radius, dist })
    }

    /// Restriction to the nodes within `radius` of the root.
    pub fn restrict(&self, radius: u32) -> RootedBall {
        if radius >= self.radius {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.dist[i] <= radius).collect();
        self.induced(&keep, self.root, radius)
    }

    /// The ball of `radius` around node `center`, computed inside this ball.
    ///
    /// Exact whenever `dist[center] + radius <= self.radius`.
    pub fn reroot(&self, center: usize, radius: u32) -> RootedBall {
        let dist = bfs_distances(&self.adjacency, center);
        let keep: Vec<usize> = {
            let mut k: Vec<usize> = (0..self.len()).filter(|&i| dist[i] <= radius).collect();
            k.sort_by_key(|&i| (dist[i], i));
            k
        };
        self.induced(&keep, center, radius)
    }

    fn induced(&self, keep: &[usize], root: usize, radius: u32) -> RootedBall {
        let mut remap = alloc::vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let nodes = keep.iter().map(|&i| self.nodes[i]).collect();
        let adjacency: Vec<Vec<usize>> = keep
            .iter()
            .map(|&i| {
                let mut l: Vec<usize> =
                    self.adjacency[i].iter().filter_map(|&j| (remap[j] != usize::MAX).then_some(remap[j])).collect();
                l.sort_unstable();
                l
            })
            .collect();
        let new_root = remap[root];
        let dist = bfs_distances(&adjacency, new_root);
        RootedBall { nodes, root: new_root, adjacency, radius, dist }
    }

    /// Applies a node permutation: node `i` moves to index `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> RootedBall {
        let n = self.len();
        let mut nodes = alloc::vec![self.nodes[0]; n];
        let mut dist = alloc::vec![0; n];
        let mut adjacency = alloc::vec![Vec::new(); n];
        for i in 0..n {
            nodes[perm[i]] = self.nodes[i];
            dist[perm[i]] = self.dist[i];
            let mut l: Vec<usize> = self.adjacency[i].iter().map(|&j| perm[j]).collect();
            l.sort_unstable();
            adjacency[perm[i]] = l;
        }
        RootedBall { nodes, root: perm[self.root], adjacency, radius: self.radius, dist }
    }
}

pub(crate) fn bfs_distances(adjacency: &[Vec<usize>], root: usize) -> Vec<u32> {
    let mut dist = alloc::vec![u32::MAX; adjacency.len()];
    let mut queue = alloc::collections::VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Lookup of points at tolerance [`TAU`] through bucketed coordinates.
struct PointIndex<'s> {
    space: &'s GroundSpace,
    buckets: BTreeMap<(u32, i64), Vec<usize>>,
}

const BUCKETS: i64 = 1_000_000_000;

impl<'s> PointIndex<'s> {
    fn new(space: &'s GroundSpace) -> Self {
        PointIndex { space, buckets: BTreeMap::new() }
    }

    fn bucket(p: &Point) -> i64 {
        libm::floor(p.coord / TAU) as i64
    }

    fn find(&self, p: &Point, nodes: &[Point]) -> Option<usize> {
        let b = Self::bucket(p);
        let circle = matches!(self.space.part(p.part), Some((PartKind::Circle, _)));
        for delta in [-1i64, 0, 1] {
            let mut key = b + delta;
            if circle {
                key = key.rem_euclid(BUCKETS);
            }
            if let Some(list) = self.buckets.get(&(p.part, key)) {
                if let Some(&i) = list.iter().find(|&&i| self.space.same_point(&nodes[i], p)) {
                    return Some(i);
                }
            }
        }
        None
    }

    fn insert(&mut self, p: &Point, index: usize) {
        self.buckets.entry((p.part, Self::bucket(p))).or_default().push(index);
    }
}

/// Incremental breadth-first exploration from a fixed root.
///
/// Layers are expanded on demand; [`BallExplorer::ball`] returns the induced
/// ball for any radius already reached or reachable.
pub struct BallExplorer<'g> {
    graphing: &'g Graphing,
    nodes: Vec<Point>,
    dist: Vec<u32>,
    neighbors: Vec<Vec<usize>>,
    index: PointIndex<'g>,
    /// Nodes `0..expanded` have their neighbour lists computed.
    expanded: usize,
    cap: usize,
}

impl<'g> BallExplorer<'g> {
    pub fn new(graphing: &'g Graphing, root: Point) -> Self {
        Self::with_cap(graphing, root, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(graphing: &'g Graphing, root: Point, cap: usize) -> Self {
        let mut index = PointIndex::new(graphing.space());
        index.insert(&root, 0);
        BallExplorer {
            graphing,
            nodes: alloc::vec![root],
            dist: alloc::vec![0],
            neighbors: alloc::vec![Vec::new()],
            index,
            expanded: 0,
            cap,
        }
    }

    pub fn root(&self) -> Point {
        self.nodes[0]
    }

    /// Expands every node within distance `radius`, discovering the next layer.
    fn expand_through(&mut self, radius: u32) -> Result<()> {
        while self.expanded < self.nodes.len() && self.dist[self.expanded] <= radius {
            let u = self.expanded;
            let point = self.nodes[u];
            let mut list = Vec::new();
            for q in self.graphing.neighbors(&point) {
                let j = match self.index.find(&q, &self.nodes) {
                    Some(j) => j,
                    None => {
                        let j = self.nodes.len();
                        if j >= self.cap {
                            return Err(Error::NodeCap { cap: self.cap });
                        }
                        self.nodes.push(q);
                        self.dist.push(self.dist[u] + 1);
                        self.neighbors.push(Vec::new());
                        self.index.insert(&q, j);
                        j
                    }
                };
                if j != u {
                    list.push(j);
                }
            }
            if self.neighbors.len() <= u {
                self.neighbors.resize(u + 1, Vec::new());
            }
            self.neighbors[u] = list;
            self.expanded += 1;
        }
        Ok(())
    }

    /// Number of nodes within distance `radius` of the root.
    pub fn count_within(&mut self, radius: u32) -> Result<usize> {
        if radius > 0 {
            self.expand_through(radius - 1)?;
        }
        Ok(self.dist.iter().take_while(|&&d| d <= radius).count())
    }

    /// Points within distance `radius`, in breadth-first order, with distances.
    pub fn points_within(&mut self, radius: u32) -> Result<(&[Point], &[u32])> {
        let n = self.count_within(radius)?;
        Ok((&self.nodes[..n], &self.dist[..n]))
    }

    /// The induced ball `B(root, radius)`.
    pub fn ball(&mut self, radius: u32) -> Result<RootedBall> {
        self.expand_through(radius)?;
        let n = self.dist.iter().take_while(|&&d| d <= radius).count();
        let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for u in 0..n {
            for &v in &self.neighbors[u] {
                if v < n {
                    adjacency[u].push(v);
                    adjacency[v].push(u);
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(RootedBall { nodes: self.nodes[..n].to_vec(), root: 0, adjacency, radius, dist: self.dist[..n].to_vec() })
    }

    /// Graph distance to `target`, or `None` when it exceeds `cutoff`.
    pub fn distance_to(&mut self, target: &Point, cutoff: u32) -> Result<Option<u32>> {
        let space = self.graphing.space();
        let mut checked = 0;
        for r in 0..=cutoff {
            let n = self.count_within(r)?;
            if let Some(i) = (checked..n).find(|&i| space.same_point(&self.nodes[i], target)) {
                return Ok(Some(self.dist[i]));
            }
            if n == checked && r > 0 {
                // component exhausted
                return Ok(None);
            }
            checked = n;
        }
        Ok(None)
    }
}

/// Convenience wrapper for `B(x, r)` with the default node cap.
pub fn ball(g: &Graphing, x: Point, radius: u32) -> Result<RootedBall> {
    BallExplorer::new(g, x).ball(radius)
}

/// Graph distance between `x` and `y` if it is at most `cutoff`.
pub fn graph_distance(g: &Graphing, x: Point, y: Point, cutoff: u32) -> Result<Option<u32>> {
    BallExplorer::new(g, x).distance_to(&y, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphing::{Generator, Piece};
    use crate::space::wrap_unit;
    use alloc::vec;

    const ALPHA: f64 = 0.6180339887;

    fn c_alpha() -> Graphing {
        Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, ALPHA)], 2)
    }

    fn c_alpha_cut() -> Graphing {
        c_alpha().with_exceptions(vec![(Point::new(0.0), Point::new(ALPHA))], vec![])
    }

    fn k3() -> Graphing {
        Graphing::new(
            GroundSpace::Atoms(3),
            vec![Generator::new(vec![Piece::Permute { part: 0, target_part: 0, map: vec![(0, 1), (1, 2), (2, 0)] }])],
            2,
        )
    }

    fn degrees(b: &RootedBall) -> Vec<usize> {
        (0..b.len()).map(|i| b.degree(i)).collect()
    }

    #[test]
    fn rotation_ball_is_a_centred_path() {
        let x = 0.3;
        let b = ball(&c_alpha(), Point::new(x), 2).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.edge_count(), 4);
        assert_eq!(b.degree(b.root), 2);
        let mut d = degrees(&b);
        d.sort_unstable();
        assert_eq!(d, vec![1, 1, 2, 2, 2]);
        // oracle: orbit points x + k alpha for |k| <= 2
        for k in -2i32..=2 {
            let p = Point::new(wrap_unit(x + f64::from(k) * ALPHA));
            let i = b.nodes.iter().position(|q| GroundSpace::Circle.same_point(q, &p)).unwrap();
            assert_eq!(b.dist[i], k.unsigned_abs());
        }
    }

    #[test]
    fn cut_endpoint_ball_is_one_sided() {
        let b = ball(&c_alpha_cut(), Point::new(0.0), 3).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.degree(b.root), 1);
        assert_eq!(b.edge_count(), 3);
    }

    #[test]
    fn triangle_ball() {
        let b = ball(&k3(), Point::atom(0), 1).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.edge_count(), 3);
    }

    #[test]
    fn rational_rotation_closes_up() {
        let g = Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, 1.0 / 3.0)], 2);
        let b = ball(&g, Point::new(0.1), 2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.edge_count(), 3);
    }

    #[test]
    fn graph_distances() {
        let g = c_alpha();
        let y = Point::new(wrap_unit(0.1 + 3.0 * ALPHA));
        assert_eq!(graph_distance(&g, Point::new(0.1), y, 5).unwrap(), Some(3));
        assert_eq!(graph_distance(&g, Point::new(0.1), Point::new(0.1), 0).unwrap(), Some(0));
        let cut = c_alpha_cut();
        assert_eq!(graph_distance(&cut, Point::new(0.0), Point::new(ALPHA), 10).unwrap(), None);
        assert_eq!(graph_distance(&k3(), Point::atom(0), Point::atom(2), 3).unwrap(), Some(1));
    }

    #[test]
    fn node_cap_is_enforced() {
        let g = c_alpha();
        let err = BallExplorer::with_cap(&g, Point::new(0.2), 10).ball(20).unwrap_err();
        assert_eq!(err, Error::NodeCap { cap: 10 });
    }

    #[test]
    fn balls_are_nested_and_distances_exact() {
        let g = c_alpha_cut();
        for &x in &[0.0, 0.37, 1.0 - 3.0 * ALPHA + 2.0] {
            let x = Point::new(wrap_unit(x));
            let mut e = BallExplorer::new(&g, x);
            let small = e.ball(4).unwrap();
            let big = e.ball(5).unwrap();
            assert_eq!(&big.nodes[..small.len()], &small.nodes[..]);
            for (i, p) in big.nodes.iter().enumerate() {
                assert_eq!(graph_distance(&g, x, *p, 5).unwrap(), Some(big.dist[i]));
            }
        }
    }

    #[test]
    fn restrict_and_reroot_agree_with_direct_balls() {
        let g = c_alpha();
        let b = ball(&g, Point::new(0.4), 6).unwrap();
        assert_eq!(b.restrict(3), ball(&g, Point::new(0.4), 3).unwrap());
        let child = b.adjacency[b.root][0];
        let rerooted = b.reroot(child, 5);
        let direct = ball(&g, b.nodes[child], 5).unwrap();
        assert_eq!(rerooted.len(), direct.len());
        assert_eq!(rerooted.edge_count(), direct.edge_count());
    }
}
