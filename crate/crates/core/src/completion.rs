//! Points of the metric completion as finite-depth limit towers.
//!
//! A tower is built from a sequence of points whose balls of radius `depth`
//! eventually share one isomorphism class. Along that stable tail a chain is
//! selected greedily: each accepted point is reachable from the previous one
//! by an isomorphism of displacement below `c / 2^j` at step `j`. A point that
//! fits no chain element starts a new chain; the longest chain wins. Composing
//! these isomorphisms tracks every node of the first ball through the chain;
//! the coordinates of the last accepted ball are the tower's limit
//! coordinates, within `residual = c / 2^j` of the true limit.

use alloc::format;
use alloc::vec::Vec;

use crate::ball::{ball, BallExplorer, RootedBall};
use crate::canon::canonical_key;
use crate::error::{Error, Result};
use crate::graphing::Graphing;
use crate::iso::min_displacement_iso;
use crate::metric::{evaluate, metric_ball_measure, BallMeasure, MetricResult, Probe};
use crate::sampling::Executor;
use crate::space::{GroundSpace, Point};

/// Chain length past which further steps are below coordinate precision.
const MAX_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TowerConfig {
    /// Maximum number of candidate points read from the sequence.
    pub scan_budget: usize,
    /// Scale `c` of the coherence schedule `c / 2^j`.
    pub tolerance: f64,
}

impl Default for TowerConfig {
    fn default() -> Self {
        TowerConfig { scan_budget: 100_000, tolerance: 0.5 }
    }
}

/// A completion point: the ball of radius `depth` with limit coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitTower {
    pub ball: RootedBall,
    pub depth: u32,
    /// Bound on the distance between stored and limit coordinates.
    pub residual: f64,
    /// Accepted chain steps.
    pub steps: u32,
    /// Candidates read from the sequence.
    pub scanned: usize,
}

impl LimitTower {
    /// The tower of an ordinary point: its own balls, no residual.
    pub fn from_point(g: &Graphing, x: Point, depth: u32) -> Result<Self> {
        g.space().check_point(&x)?;
        Ok(LimitTower { ball: ball(g, x, depth)?, depth, residual: 0.0, steps: 0, scanned: 1 })
    }

    pub fn root_point(&self) -> Point {
        self.ball.nodes[self.ball.root]
    }

    /// Level `r`: the tower ball restricted to radius `r`.
    pub fn level(&self, r: u32) -> Option<RootedBall> {
        (r <= self.depth).then(|| self.ball.restrict(r))
    }

    pub fn levels(&self) -> Vec<(u32, RootedBall)> {
        (0..=self.depth).map(|r| (r, self.ball.restrict(r))).collect()
    }
}

/// Builds a tower from a sequence of points.
///
/// The class of the radius-`depth` ball must be constant on a tail covering at
/// least half of the scanned candidates (and at least two of them), and the
/// chain must accept at least one step; otherwise the sequence does not
/// determine a completion point at this depth.
pub fn build_tower<I>(g: &Graphing, points: I, depth: u32, config: TowerConfig) -> Result<LimitTower>
where
    I: IntoIterator<Item = Point>,
{
    if depth == 0 {
        return Err(Error::domain("tower depth must be at least 1"));
    }
    let space = g.space();
    let mut scanned = 0;
    let mut changes = 0;
    let mut tail = 0;
    let mut key: Option<Vec<u8>> = None;
    // chain[j] = (ball, first-index -> index in this ball); chain[0] maps to itself
    let mut chain: Vec<(RootedBall, Vec<usize>)> = Vec::new();
    let mut best: Vec<(RootedBall, Vec<usize>)> = Vec::new();
    let bound = |j: usize| config.tolerance / libm::exp2((j + 1) as f64);
    for p in points.into_iter().take(config.scan_budget) {
        space.check_point(&p)?;
        scanned += 1;
        let b = ball(g, p, depth)?;
        let k = canonical_key(&b);
        if key.as_ref() != Some(&k) {
            if key.is_some() {
                changes += 1;
            }
            key = Some(k);
            tail = 1;
            best.clear();
            let identity = (0..b.len()).collect();
            chain = alloc::vec![(b, identity)];
            continue;
        }
        tail += 1;
        if chain.len() > MAX_STEPS {
            continue;
        }
        // extend from the deepest chain element that accepts b
        let mut attached = false;
        for m in (0..chain.len()).rev() {
            let Some(iso) = min_displacement_iso(space, &chain[m].0, &b)? else {
                continue;
            };
            if iso.displacement < bound(m) {
                if m + 1 < chain.len() && chain.len() > best.len() {
                    best = chain.clone();
                }
                chain.truncate(m + 1);
                let map = chain[m].1.iter().map(|&i| iso.mapping[i]).collect();
                chain.push((b.clone(), map));
                attached = true;
                break;
            }
        }
        if !attached {
            if chain.len() > best.len() {
                best = core::mem::take(&mut chain);
            }
            let identity = (0..b.len()).collect();
            chain = alloc::vec![(b, identity)];
        }
    }
    if chain.is_empty() {
        return Err(Error::Tower("empty sequence".into()));
    }
    if tail < 2 || 2 * tail < scanned {
        return Err(Error::Tower(format!(
            "ball class did not stabilize: {scanned} scanned, {changes} class changes, stable tail {tail}"
        )));
    }
    let chain = if best.len() > chain.len() { best } else { chain };
    let steps = (chain.len() - 1) as u32;
    if steps == 0 {
        return Err(Error::Tower(format!(
            "no coherent step in a stable tail of {tail} candidates (scanned {scanned})"
        )));
    }
    let (last, map) = &chain[chain.len() - 1];
    let mut limit = chain[0].0.clone();
    for (i, &j) in map.iter().enumerate() {
        limit.nodes[i] = last.nodes[j];
    }
    Ok(LimitTower { ball: limit, depth, residual: config.tolerance / libm::exp2(f64::from(steps)), steps, scanned })
}

/// The compactification distance between two completion points.
pub fn tower_distance(space: &GroundSpace, t1: &LimitTower, t2: &LimitTower) -> Result<MetricResult> {
    let depth = t1.depth.min(t2.depth);
    evaluate(space, depth, t1.residual + t2.residual, |r| Ok(t1.level(r).zip(t2.level(r))))
}

/// Towers rooted at the neighbours of the root, one radius shallower.
pub fn closure_neighbors(t: &LimitTower) -> Result<Vec<LimitTower>> {
    if t.depth < 2 {
        return Err(Error::domain("closure neighbours need depth >= 2"));
    }
    Ok(t.ball.adjacency[t.ball.root]
        .iter()
        .map(|&c| LimitTower {
            ball: t.ball.reroot(c, t.depth - 1),
            depth: t.depth - 1,
            residual: t.residual,
            steps: t.steps,
            scanned: t.scanned,
        })
        .collect())
}

impl Probe for LimitTower {
    fn distance_to(&self, g: &Graphing, y: Point, r_max: u32) -> Result<MetricResult> {
        let mut ey = BallExplorer::new(g, y);
        evaluate(g.space(), self.depth.min(r_max), self.residual, |r| match self.level(r) {
            Some(level) => Ok(Some((level, ey.ball(r)?))),
            None => Ok(None),
        })
    }

    fn anchor(&self) -> (Point, f64) {
        (self.root_point(), self.residual)
    }
}

/// Outcome of [`support_classify`].
#[derive(Debug, Clone, PartialEq)]
pub enum SupportClass {
    /// Every tested ball has certified positive sampled measure; the
    /// estimate is for radius `rho`.
    InSupport { estimate: f64, stderr: f64 },
    /// Some tested ball had no hit and no undecided sample; its measure is
    /// bracketed by `[0, upper]` with `upper = 3 / n`.
    OffSupport { radius: f64, upper: f64 },
    /// Samples neither certify a hit nor rule the ball out.
    Undetermined { lower: f64, upper: f64 },
}

impl SupportClass {
    pub fn is_in_support(&self) -> bool {
        matches!(self, SupportClass::InSupport { .. })
    }

    pub fn is_off_support(&self) -> bool {
        matches!(self, SupportClass::OffSupport { .. })
    }
}

/// Classifies a point or tower against the support of the measure by
/// sampling the metric balls of radius `rho / 2` and `rho`.
pub fn support_classify<P: Probe + ?Sized, E: Executor>(
    g: &Graphing,
    probe: &P,
    rho: f64,
    n: usize,
    seed: u64,
    r_max: u32,
    exec: &E,
) -> Result<SupportClass> {
    let radii = [0.5 * rho, rho];
    let measures: Vec<BallMeasure> =
        radii.iter().map(|&r| metric_ball_measure(g, probe, r, n, seed, r_max, exec)).collect::<Result<_>>()?;
    if let Some((i, _)) = measures.iter().enumerate().find(|(_, m)| m.hits + m.undecided == 0) {
        return Ok(SupportClass::OffSupport { radius: radii[i], upper: 3.0 / n as f64 });
    }
    if measures.iter().all(|m| m.hits > 0) {
        let m = &measures[1];
        return Ok(SupportClass::InSupport { estimate: m.estimate, stderr: m.stderr });
    }
    Ok(SupportClass::Undetermined { lower: measures[0].lower, upper: measures[0].upper })
}

/// Walks the orbit of `start` under generator `generator` (forwards or
/// backwards) for `steps` steps and keeps the points that approach `target`
/// more closely than every earlier one.
pub fn approach_sequence(
    g: &Graphing,
    start: Point,
    generator: usize,
    forward: bool,
    target: Point,
    steps: usize,
) -> Result<Vec<Point>> {
    let space = g.space();
    space.check_point(&start)?;
    space.check_point(&target)?;
    let gen = g.generators().get(generator).ok_or_else(|| Error::domain(format!("no generator {generator}")))?;
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    let mut x = start;
    for _ in 0..=steps {
        let d = space.d0(&x, &target);
        if d < best {
            best = d;
            out.push(x);
        }
        let next = if forward { gen.apply(space, &x) } else { gen.apply_inverse(space, &x) };
        match next {
            Some(y) => x = y,
            None => break,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphing::Generator;
    use crate::sampling::Sequential;
    use crate::space::wrap_unit;
    use alloc::vec;

    const ALPHA: f64 = 0.6180339887;

    fn c_alpha() -> Graphing {
        Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, ALPHA)], 2)
    }

    fn c_alpha_cut() -> Graphing {
        c_alpha().with_exceptions(vec![(Point::new(0.0), Point::new(ALPHA))], vec![])
    }

    /// Record approaches of the one-way path `frac(-k alpha)` to `target`,
    /// computed directly from orbit arithmetic, skipping `k <= min_k`.
    fn spiral(target: f64, min_k: u64, max_k: u64) -> Vec<Point> {
        let mut best = f64::INFINITY;
        let mut out = Vec::new();
        for k in min_k..=max_k {
            let p = wrap_unit(-(k as f64) * ALPHA);
            let d = (p - target).abs().min(1.0 - (p - target).abs());
            if d < best {
                best = d;
                out.push(Point::new(p));
            }
        }
        out
    }

    #[test]
    fn spiral_tower_fills_in_the_circle_point() {
        let g = c_alpha_cut();
        let t = build_tower(&g, spiral(0.25, 11, 200_000), 10, TowerConfig::default()).unwrap();
        assert!(t.steps >= 10, "{t:?}");
        assert!(GroundSpace::Circle.d0(&t.root_point(), &Point::new(0.25)) < 1e-4);
        let circle = ball(&c_alpha(), Point::new(0.25), 10).unwrap();
        let iso = min_displacement_iso(g.space(), &t.ball, &circle).unwrap().unwrap();
        assert!(iso.displacement < 1e-4);
    }

    #[test]
    fn constant_sequence_reproduces_the_ball() {
        let g = c_alpha_cut();
        let x = Point::new(0.3);
        let t = build_tower(&g, core::iter::repeat_n(x, 8), 6, TowerConfig::default()).unwrap();
        assert_eq!(t.ball, ball(&g, x, 6).unwrap());
    }

    #[test]
    fn alternating_classes_fail() {
        let g = c_alpha_cut();
        let seq = (0..40).map(|i| if i % 2 == 0 { Point::new(0.0) } else { Point::new(0.3) });
        assert!(matches!(build_tower(&g, seq, 3, TowerConfig::default()), Err(Error::Tower(_))));
    }

    #[test]
    fn tower_distances() {
        let g = c_alpha_cut();
        let spiral_tower = build_tower(&g, spiral(0.25, 11, 200_000), 10, TowerConfig::default()).unwrap();
        let point = LimitTower::from_point(&g, Point::new(0.25), 10).unwrap();
        let d = tower_distance(g.space(), &spiral_tower, &point).unwrap();
        assert!(d.value_upper <= 0.1, "{d:?}");
        let same = tower_distance(g.space(), &point, &point).unwrap();
        assert_eq!(same.value_lower, 0.0);
        assert!((same.value_upper - 1.0 / 11.0).abs() < 1e-15);
        let endpoint = LimitTower::from_point(&g, Point::new(0.0), 10).unwrap();
        let far = tower_distance(g.space(), &spiral_tower, &endpoint).unwrap();
        assert!(far.resolved);
        assert_eq!(far.value_upper, 1.0);
    }

    #[test]
    fn closure_neighbour_counts() {
        let g = c_alpha_cut();
        let t = build_tower(&g, spiral(0.25, 11, 100_000), 10, TowerConfig::default()).unwrap();
        let nbrs = closure_neighbors(&t).unwrap();
        assert_eq!(nbrs.len(), 2);
        for n in &nbrs {
            let offset = GroundSpace::Circle.d0(&n.root_point(), &t.root_point());
            assert!((offset - (1.0 - ALPHA)).abs() < 1e-6);
            assert_eq!(n.depth, 9);
        }
        let endpoint = LimitTower::from_point(&g, Point::new(0.0), 4).unwrap();
        assert_eq!(closure_neighbors(&endpoint).unwrap().len(), 1);
        let shallow = LimitTower::from_point(&g, Point::new(0.0), 1).unwrap();
        assert!(closure_neighbors(&shallow).is_err());
    }

    #[test]
    fn tower_at_the_cut_restores_the_deleted_edge() {
        let g = c_alpha_cut();
        let t = build_tower(&g, spiral(0.0, 11, 200_000), 10, TowerConfig::default()).unwrap();
        let nbrs = closure_neighbors(&t).unwrap();
        assert_eq!(nbrs.len(), 2);
        assert!(nbrs.iter().any(|n| GroundSpace::Circle.d0(&n.root_point(), &Point::new(ALPHA)) < 1e-4));
        // the endpoint u itself only has one neighbour and sits at distance 1
        let u = LimitTower::from_point(&g, Point::new(0.0), 10).unwrap();
        assert_eq!(tower_distance(g.space(), &t, &u).unwrap().value_upper, 1.0);
    }

    #[test]
    fn support_classification() {
        let g = c_alpha_cut();
        let interior = support_classify(&g, &Point::new(0.4), 0.05, 4000, 1, 64, &Sequential).unwrap();
        assert!(interior.is_in_support(), "{interior:?}");
        let u3 = Point::new(wrap_unit(-3.0 * ALPHA));
        let off = support_classify(&g, &u3, 0.125, 4000, 1, 64, &Sequential).unwrap();
        assert!(off.is_off_support(), "{off:?}");
        let t = build_tower(&g, spiral(0.7, 11, 100_000), 10, TowerConfig::default()).unwrap();
        let tower = support_classify(&g, &t, 0.25, 2000, 1, 64, &Sequential).unwrap();
        assert!(tower.is_in_support(), "{tower:?}");
    }

    #[test]
    fn approach_sequence_walks_the_path() {
        let g = c_alpha_cut();
        let seq = approach_sequence(&g, Point::new(0.0), 0, false, Point::new(0.25), 1000).unwrap();
        let direct = spiral(0.25, 0, 1000);
        assert_eq!(seq.len(), direct.len());
        for (a, b) in seq.iter().zip(&direct) {
            assert!((a.coord - b.coord).abs() < 1e-9);
        }
    }
}
