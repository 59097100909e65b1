//! Estimators for the integral identities and local statistics of graphings.
//!
//! Every estimator integrates a function of a `lambda`-random point. On
//! spaces made only of atoms the integral is an exact finite sum and the
//! reported standard error is zero; otherwise samples are drawn in seeded
//! chunks and merged in chunk order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ball::{ball, BallExplorer, RootedBall};
use crate::canon::canonical_key;
use crate::error::{Error, Result};
use crate::graphing::Graphing;
use crate::metric::{compact_distance, MetricResult};
use crate::sampling::{chunk_count, chunk_len, chunk_rng, merge_all, Executor, Moments};
use crate::space::{IntervalSet, Point};

/// Width of the statistical acceptance band, in standard errors.
pub const SIGMA_BAND: f64 = 4.0;

/// Absolute slack for exact sums.
const EXACT_SLACK: f64 = 1e-12;

/// An estimate of `lhs - rhs` for an identity `lhs = rhs`, or of a single
/// integral (then `rhs` is the mirrored integral used as a symmetry check).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub estimate: f64,
    pub stderr: f64,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// Zero for exact sums over atoms.
    pub samples: usize,
    pub exact: bool,
    /// `|lhs - rhs| <= 4 stderr` of the paired difference (or within rounding
    /// for exact sums).
    pub passed: bool,
}

/// Sampled distribution of radius-`r` ball classes.
#[derive(Debug, Clone, PartialEq)]
pub struct BallStats {
    pub radius: u32,
    pub samples: usize,
    pub seed: u64,
    pub exact: bool,
    /// Canonical key to frequency; frequencies sum to 1.
    pub histogram: BTreeMap<Vec<u8>, f64>,
}

struct Integral<const K: usize> {
    mean: [f64; K],
    stderr: [f64; K],
    samples: usize,
    exact: bool,
}

/// Integrates `f` against `lambda`, exactly on atomic spaces.
fn integrate<const K: usize, E, F>(g: &Graphing, n: usize, seed: u64, exec: &E, f: F) -> Result<Integral<K>>
where
    E: Executor,
    F: Fn(&Point) -> Result<[f64; K]> + Sync,
{
    let space = g.space();
    if space.is_atomic() {
        let mut mean = [0.0; K];
        for (p, w) in space.atoms_with_mass() {
            let v = f(&p)?;
            for k in 0..K {
                mean[k] += w * v[k];
            }
        }
        return Ok(Integral { mean, stderr: [0.0; K], samples: 0, exact: true });
    }
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let chunks: Vec<Result<[Moments; K]>> = exec.run(chunk_count(n), |c| {
        let mut rng = chunk_rng(seed, c);
        let mut m = [Moments::default(); K];
        for _ in 0..chunk_len(n, c) {
            let x = space.sample_point(&mut rng);
            let v = f(&x)?;
            for k in 0..K {
                m[k].push(v[k]);
            }
        }
        Ok(m)
    });
    let chunks: Vec<[Moments; K]> = chunks.into_iter().collect::<Result<_>>()?;
    let mut mean = [0.0; K];
    let mut stderr = [0.0; K];
    for k in 0..K {
        let total = merge_all(chunks.iter().map(|c| &c[k]));
        mean[k] = total.mean;
        stderr[k] = total.stderr();
    }
    Ok(Integral { mean, stderr, samples: n, exact: false })
}

/// Reads `[lhs, rhs, lhs - rhs]` integrals as a report.
fn identity_report(i: Integral<3>) -> EstimateReport {
    let gap = i.mean[2];
    let passed = if i.exact { libm::fabs(gap) <= EXACT_SLACK } else { libm::fabs(gap) <= SIGMA_BAND * i.stderr[2] };
    EstimateReport {
        estimate: gap,
        stderr: i.stderr[2],
        lhs: i.mean[0],
        lhs_stderr: i.stderr[0],
        rhs: i.mean[1],
        rhs_stderr: i.stderr[1],
        samples: i.samples,
        exact: i.exact,
        passed,
    }
}

fn degree_into(g: &Graphing, x: &Point, set: &IntervalSet) -> f64 {
    g.neighbors(x).iter().filter(|y| set.contains(y)).count() as f64
}

fn check_sets(g: &Graphing, sets: &[&IntervalSet]) -> Result<()> {
    sets.iter().try_for_each(|s| s.validate(g.space()))
}

/// Estimates `int_A deg_B - int_B deg_A`, which vanishes for a graphing.
pub fn unimodularity_gap<E: Executor>(
    g: &Graphing,
    a: &IntervalSet,
    b: &IntervalSet,
    n: usize,
    seed: u64,
    exec: &E,
) -> Result<EstimateReport> {
    check_sets(g, &[a, b])?;
    let i = integrate(g, n, seed, exec, |x| {
        let l = if a.contains(x) { degree_into(g, x, b) } else { 0.0 };
        let r = if b.contains(x) { degree_into(g, x, a) } else { 0.0 };
        Ok([l, r, l - r])
    })?;
    Ok(identity_report(i))
}

/// Estimates the edge measure `eta(A x B) = int_A deg_B`. The report's
/// verdict compares it with `eta(B x A)`.
pub fn edge_measure<E: Executor>(
    g: &Graphing,
    a: &IntervalSet,
    b: &IntervalSet,
    n: usize,
    seed: u64,
    exec: &E,
) -> Result<EstimateReport> {
    let gap = unimodularity_gap(g, a, b, n, seed, exec)?;
    Ok(EstimateReport { estimate: gap.lhs, stderr: gap.lhs_stderr, ..gap })
}

/// Estimates both sides of `int_U |W n B(x, r)| = int_W |U n B(y, r)|`.
pub fn power_ball_identity<E: Executor>(
    g: &Graphing,
    u: &IntervalSet,
    w: &IntervalSet,
    r: u32,
    n: usize,
    seed: u64,
    exec: &E,
) -> Result<EstimateReport> {
    if r == 0 {
        return Err(Error::domain("power_ball_identity needs r >= 1"));
    }
    check_sets(g, &[u, w])?;
    let i = integrate(g, n, seed, exec, |x| {
        let (in_u, in_w) = (u.contains(x), w.contains(x));
        if !in_u && !in_w {
            return Ok([0.0; 3]);
        }
        let mut ex = BallExplorer::new(g, *x);
        let (points, _) = ex.points_within(r)?;
        let count = |s: &IntervalSet| points.iter().filter(|p| s.contains(p)).count() as f64;
        let l = if in_u { count(w) } else { 0.0 };
        let rr = if in_w { count(u) } else { 0.0 };
        Ok([l, rr, l - rr])
    })?;
    Ok(identity_report(i))
}

/// Histogram of canonical classes of `B(x, r)` for `lambda`-random `x`.
pub fn bs_histogram<E: Executor>(g: &Graphing, r: u32, n: usize, seed: u64, exec: &E) -> Result<BallStats> {
    let space = g.space();
    let mut histogram: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    if space.is_atomic() {
        for (p, w) in space.atoms_with_mass() {
            *histogram.entry(canonical_key(&ball(g, p, r)?)).or_default() += w;
        }
        return Ok(BallStats { radius: r, samples: 0, seed, exact: true, histogram });
    }
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let chunks: Vec<Result<BTreeMap<Vec<u8>, u64>>> = exec.run(chunk_count(n), |c| {
        let mut rng = chunk_rng(seed, c);
        let mut counts = BTreeMap::new();
        for _ in 0..chunk_len(n, c) {
            let x = space.sample_point(&mut rng);
            *counts.entry(canonical_key(&ball(g, x, r)?)).or_insert(0u64) += 1;
        }
        Ok(counts)
    });
    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    for chunk in chunks {
        for (k, v) in chunk? {
            *counts.entry(k).or_default() += v;
        }
    }
    for (k, v) in counts {
        histogram.insert(k, v as f64 / n as f64);
    }
    Ok(BallStats { radius: r, samples: n, seed, exact: false, histogram })
}

/// Total-variation distance between two ball-class histograms.
pub fn local_equivalence_tv(s1: &BallStats, s2: &BallStats) -> Result<f64> {
    if s1.radius != s2.radius {
        return Err(Error::RadiusMismatch { left: s1.radius, right: s2.radius });
    }
    let mut total = 0.0;
    for (k, p) in &s1.histogram {
        total += libm::fabs(p - s2.histogram.get(k).copied().unwrap_or(0.0));
    }
    for (k, q) in &s2.histogram {
        if !s1.histogram.contains_key(k) {
            total += q;
        }
    }
    Ok(0.5 * total)
}

/// `|B(x, r) n A|` for `r = 1..=radius`, counted exactly by breadth-first
/// search.
pub fn recurrence_profile(g: &Graphing, a: &IntervalSet, x: Point, radius: u32) -> Result<Vec<(u32, usize)>> {
    g.space().check_point(&x)?;
    a.validate(g.space())?;
    if !a.contains(&x) {
        return Err(Error::domain("recurrence_profile needs x in A"));
    }
    if radius == 0 {
        return Err(Error::domain("recurrence_profile needs R >= 1"));
    }
    let mut ex = BallExplorer::new(g, x);
    let (points, dist) = ex.points_within(radius)?;
    let mut per_layer = alloc::vec![0usize; radius as usize + 1];
    for (p, &d) in points.iter().zip(dist) {
        if a.contains(p) {
            per_layer[d as usize] += 1;
        }
    }
    let mut running = per_layer[0];
    Ok((1..=radius)
        .map(|r| {
            running += per_layer[r as usize];
            (r, running)
        })
        .collect())
}

/// A point of the component of `x` that is close to `x` in the
/// compactification metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfDenseWitness {
    pub point: Point,
    pub graph_distance: u32,
    pub distance: MetricResult,
}

/// Searches `B(x, explore)` in breadth-first order for `z != x` with a
/// resolved `d(x, z) < eps`.
pub fn self_dense_probe(
    g: &Graphing,
    x: Point,
    eps: f64,
    explore: u32,
    r_max: u32,
) -> Result<Option<SelfDenseWitness>> {
    if !(eps > 0.0) {
        return Err(Error::domain("self_dense_probe needs eps > 0"));
    }
    g.space().check_point(&x)?;
    let mut ex = BallExplorer::new(g, x);
    let (points, dist) = ex.points_within(explore)?;
    for (z, &k) in points.iter().zip(dist).skip(1) {
        if g.space().d0(&x, z) >= eps {
            continue;
        }
        let d = compact_distance(g, x, *z, r_max)?;
        if d.resolved && d.value_upper < eps {
            return Ok(Some(SelfDenseWitness { point: *z, graph_distance: k, distance: d }));
        }
    }
    Ok(None)
}

/// Proper colouring of a ball, greedy in breadth-first order (distance from
/// the root, then node index). Uses at most `max degree + 1` colours.
pub fn greedy_ball_coloring(b: &RootedBall) -> Vec<u32> {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by_key(|&i| (b.dist[i], i));
    let mut colour = alloc::vec![u32::MAX; b.len()];
    for v in order {
        let mut used: Vec<u32> = b.adjacency[v].iter().map(|&w| colour[w]).filter(|&c| c != u32::MAX).collect();
        used.sort_unstable();
        used.dedup();
        colour[v] = (0..).find(|c| used.binary_search(c).is_err()).unwrap_or(0);
    }
    colour
}

pub fn is_proper_coloring(b: &RootedBall, colours: &[u32]) -> bool {
    colours.len() == b.len() && b.edges().all(|(u, v)| colours[u] != colours[v])
}
