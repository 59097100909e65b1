//! The compactification metric and its quantitative checks.
//!
//! For each radius `r` let `m_r` be the smallest displacement of a
//! root-preserving isomorphism `B(x, r) -> B(y, r)`. Then
//!
//! ```text
//! d(x, y) = min over r of max(1 / (r + 1), m_r)
//! ```
//!
//! Restricting an isomorphism to a smaller ball keeps it an isomorphism, so
//! `m_r` is nondecreasing in `r`. Once `1 / (r + 1) <= m_r` no larger radius
//! can produce a smaller candidate and the value is exact. If no isomorphism
//! exists at radius `r`, none exists beyond it either. When neither happens
//! before `r_max`, the result is a certified bracket.

use alloc::vec::Vec;

use rand::Rng;

use crate::ball::{BallExplorer, RootedBall};
use crate::error::{Error, Result};
use crate::graphing::Graphing;
use crate::iso::{enumerate_isos, min_displacement_iso, NeighborhoodIso, DEFAULT_ISO_LIMIT};
use crate::sampling::{chunk_count, chunk_len, chunk_rng, Executor};
use crate::space::{PartKind, Point};

pub const DEFAULT_R_MAX: u32 = 64;

/// Slack in the stopping comparison `1 / (r + 1) <= m_r`, absorbing rounding
/// in displacements that equal a reciprocal analytically.
pub const STOP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub value_upper: f64,
    pub value_lower: f64,
    pub resolved: bool,
    /// Smallest radius whose candidate attains `value_upper`.
    pub witness_radius: u32,
    pub witness_iso: Option<NeighborhoodIso>,
    /// Largest radius examined.
    pub radius_reached: u32,
}

impl MetricResult {
    /// The exact value when resolved.
    pub fn value(&self) -> Option<f64> {
        self.resolved.then_some(self.value_upper)
    }
}

/// Evaluates the metric from a source of ball pairs, one radius at a time.
///
/// `residual` bounds how far the coordinates of either side may be from the
/// true ones; it widens every candidate into an interval.
pub(crate) fn evaluate<F>(
    space: &crate::space::GroundSpace,
    r_max: u32,
    residual: f64,
    mut balls: F,
) -> Result<MetricResult>
where
    F: FnMut(u32) -> Result<Option<(RootedBall, RootedBall)>>,
{
    let mut upper = f64::INFINITY;
    let mut lower = f64::INFINITY;
    let mut witness_radius = 0;
    let mut witness_iso = None;
    let mut stopped = false;
    let mut last_m = 0.0;
    let mut reached = 0;
    for r in 0..=r_max {
        let Some((b1, b2)) = balls(r)? else {
            // the source ran out of levels
            break;
        };
        reached = r;
        let Some(iso) = min_displacement_iso(space, &b1, &b2)? else {
            stopped = true;
            break;
        };
        let m = iso.displacement;
        let scale = 1.0 / f64::from(r + 1);
        let cand_upper = scale.max(m + residual).min(1.0);
        let cand_lower = scale.max(m - residual).min(1.0);
        if cand_upper < upper - STOP_TOLERANCE {
            upper = cand_upper;
            witness_radius = r;
            witness_iso = Some(iso);
        }
        lower = lower.min(cand_lower);
        last_m = m;
        if scale <= m - residual + STOP_TOLERANCE {
            stopped = true;
            break;
        }
    }
    if !stopped {
        lower = lower.min((last_m - residual).max(0.0));
    }
    let resolved = stopped && (residual == 0.0 || lower >= upper);
    if resolved {
        lower = upper;
    }
    Ok(MetricResult {
        value_upper: upper,
        value_lower: lower.min(upper),
        resolved,
        witness_radius,
        witness_iso,
        radius_reached: reached,
    })
}

/// The compactification distance between two points of a graphing.
pub fn compact_distance(g: &Graphing, x: Point, y: Point, r_max: u32) -> Result<MetricResult> {
    g.space().check_point(&x)?;
    g.space().check_point(&y)?;
    let mut ex = BallExplorer::new(g, x);
    let mut ey = BallExplorer::new(g, y);
    evaluate(g.space(), r_max, 0.0, |r| Ok(Some((ex.ball(r)?, ey.ball(r)?))))
}

/// How displacement is measured inside [`c3_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisplacementMode {
    /// Base metric `d0`.
    #[default]
    Base,
    /// The compactification metric itself (certified upper bounds).
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C3Options {
    pub r_max: u32,
    pub mode: DisplacementMode,
    /// Draws per pair before giving up on finding a close pair.
    pub attempts: usize,
}

impl Default for C3Options {
    fn default() -> Self {
        C3Options { r_max: DEFAULT_R_MAX, mode: DisplacementMode::Base, attempts: 64 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct C3Failure {
    pub x: Point,
    pub y: Point,
    pub distance_upper: f64,
    /// Best displacement found, or `None` when no isomorphism exists.
    pub displacement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct C3Report {
    pub eps: f64,
    pub radius: u32,
    pub delta: f64,
    pub pairs: usize,
    pub passed: usize,
    pub failures: Vec<C3Failure>,
    /// Pairs for which no close partner was found.
    pub starved: usize,
}

impl C3Report {
    pub fn all_passed(&self) -> bool {
        self.starved == 0 && self.passed == self.pairs
    }
}

/// The closeness threshold that guarantees an `r`-neighbourhood isomorphism of
/// displacement at most `eps`.
pub fn c3_delta(eps: f64, r: u32) -> f64 {
    eps / (1.0 + f64::from(r) * eps)
}

/// Samples `n` pairs with `d(x, y) <= delta` and checks each has an
/// `r`-neighbourhood isomorphism of displacement at most `eps`.
pub fn c3_check<E: Executor>(
    g: &Graphing,
    eps: f64,
    r: u32,
    n: usize,
    seed: u64,
    options: C3Options,
    exec: &E,
) -> Result<C3Report> {
    if !(eps > 0.0) || n == 0 {
        return Err(Error::domain("c3_check needs eps > 0 and n >= 1"));
    }
    let delta = c3_delta(eps, r);
    let space = g.space();
    type Chunk = Result<(usize, Vec<C3Failure>, usize)>;
    let chunks: Vec<Chunk> = exec.run(chunk_count(n), |c| {
        let mut rng = chunk_rng(seed, c);
        let mut passed = 0;
        let mut failures = Vec::new();
        let mut starved = 0;
        for _ in 0..chunk_len(n, c) {
            let mut pair = None;
            for _ in 0..options.attempts {
                let x = space.sample_point(&mut rng);
                let s = delta * (1.0 - rng.gen::<f64>());
                let s = if rng.gen::<bool>() { s } else { -s };
                let coord = match space.part(x.part).map(|(k, _)| k) {
                    Some(PartKind::Circle) => crate::space::wrap_unit(x.coord + s),
                    Some(PartKind::Interval) if (0.0..1.0).contains(&(x.coord + s)) => x.coord + s,
                    _ => continue,
                };
                let y = Point::on(x.part, coord);
                let d = compact_distance(g, x, y, options.r_max)?;
                if d.value_upper <= delta {
                    pair = Some((x, y, d.value_upper));
                    break;
                }
            }
            let Some((x, y, du)) = pair else {
                starved += 1;
                continue;
            };
            let bx = crate::ball::ball(g, x, r)?;
            let by = crate::ball::ball(g, y, r)?;
            let outcome = match options.mode {
                DisplacementMode::Base => min_displacement_iso(space, &bx, &by)?.map(|i| i.displacement),
                DisplacementMode::Strict => strict_displacement(g, &bx, &by, eps, options.r_max)?,
            };
            match outcome {
                Some(disp) if disp <= eps => passed += 1,
                other => failures.push(C3Failure { x, y, distance_upper: du, displacement: other }),
            }
        }
        Ok((passed, failures, starved))
    });
    let mut report = C3Report { eps, radius: r, delta, pairs: n, passed: 0, failures: Vec::new(), starved: 0 };
    for chunk in chunks {
        let (p, f, s) = chunk?;
        report.passed += p;
        report.failures.extend(f);
        report.starved += s;
    }
    Ok(report)
}

/// Smallest displacement measured in the compactification metric among the
/// isomorphisms tried: the base-optimal one first, then all others.
fn strict_displacement(g: &Graphing, bx: &RootedBall, by: &RootedBall, eps: f64, r_max: u32) -> Result<Option<f64>> {
    let measure = |iso: &NeighborhoodIso| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, &j) in iso.mapping.iter().enumerate() {
            let d = compact_distance(g, bx.nodes[i], by.nodes[j], r_max)?;
            worst = worst.max(d.value_upper);
        }
        Ok(worst)
    };
    let Some(first) = min_displacement_iso(g.space(), bx, by)? else {
        return Ok(None);
    };
    let mut best = measure(&first)?;
    if best <= eps {
        return Ok(Some(best));
    }
    let (all, _) = enumerate_isos(g.space(), bx, by, DEFAULT_ISO_LIMIT)?;
    for iso in &all {
        best = best.min(measure(iso)?);
        if best <= eps {
            break;
        }
    }
    Ok(Some(best))
}

/// For `t' = 1..=t`, the smallest lower bound on `d(x, y)` over sampled `x`
/// and nodes `y != x` of `B(x, t')`. `None` when no such node was seen.
pub fn separation_profile<E: Executor>(
    g: &Graphing,
    t: u32,
    n: usize,
    seed: u64,
    r_max: u32,
    exec: &E,
) -> Result<Vec<(u32, Option<f64>)>> {
    if t == 0 || n == 0 {
        return Err(Error::domain("separation_profile needs t >= 1 and n >= 1"));
    }
    let chunks: Vec<Result<Vec<f64>>> = exec.run(chunk_count(n), |c| {
        let mut rng = chunk_rng(seed, c);
        let mut mins = alloc::vec![f64::INFINITY; t as usize + 1];
        for _ in 0..chunk_len(n, c) {
            let x = g.space().sample_point(&mut rng);
            let mut ex = BallExplorer::new(g, x);
            let (points, dist) = ex.points_within(t)?;
            let targets: Vec<(Point, u32)> = points.iter().copied().zip(dist.iter().copied()).skip(1).collect();
            for (y, d) in targets {
                let value = compact_distance(g, x, y, r_max)?.value_lower;
                let slot = &mut mins[d as usize];
                *slot = slot.min(value);
            }
        }
        Ok(mins)
    });
    let mut mins = alloc::vec![f64::INFINITY; t as usize + 1];
    for chunk in chunks {
        for (m, v) in mins.iter_mut().zip(chunk?) {
            *m = m.min(v);
        }
    }
    let mut running = f64::INFINITY;
    Ok((1..=t)
        .map(|tp| {
            running = running.min(mins[tp as usize]);
            (tp, running.is_finite().then_some(running))
        })
        .collect())
}

/// Something whose compactification distance to points of a graphing can be
/// evaluated: a point of the graphing or a point of its completion.
pub trait Probe: Sync {
    fn distance_to(&self, g: &Graphing, y: Point, r_max: u32) -> Result<MetricResult>;
    /// Root coordinate and its uncertainty, used to skip points with
    /// `d0(root, y) - slack >= rho`, which already forces `d >= rho`.
    fn anchor(&self) -> (Point, f64);
}

impl Probe for Point {
    fn distance_to(&self, g: &Graphing, y: Point, r_max: u32) -> Result<MetricResult> {
        compact_distance(g, *self, y, r_max)
    }

    fn anchor(&self) -> (Point, f64) {
        (*self, 0.0)
    }
}

/// Monte Carlo estimate of the measure of an open ball of the
/// compactification metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMeasure {
    pub estimate: f64,
    pub stderr: f64,
    /// Certified-hit fraction and hit-or-undecided fraction.
    pub lower: f64,
    pub upper: f64,
    pub hits: usize,
    pub undecided: usize,
    pub samples: usize,
}

pub fn metric_ball_measure<P: Probe + ?Sized, E: Executor>(
    g: &Graphing,
    probe: &P,
    rho: f64,
    n: usize,
    seed: u64,
    r_max: u32,
    exec: &E,
) -> Result<BallMeasure> {
    if !(rho > 0.0) || n == 0 {
        return Err(Error::domain("metric_ball_measure needs rho > 0 and n >= 1"));
    }
    let (anchor, slack) = probe.anchor();
    let chunks: Vec<Result<(usize, usize)>> = exec.run(chunk_count(n), |c| {
        let mut rng = chunk_rng(seed, c);
        let (mut hits, mut undecided) = (0, 0);
        for _ in 0..chunk_len(n, c) {
            let y = g.space().sample_point(&mut rng);
            if g.space().d0(&anchor, &y) - slack >= rho {
                continue;
            }
            let d = probe.distance_to(g, y, r_max)?;
            if d.value_upper < rho {
                hits += 1;
            } else if d.value_lower < rho {
                undecided += 1;
            }
        }
        Ok((hits, undecided))
    });
    let (mut hits, mut undecided) = (0, 0);
    for chunk in chunks {
        let (h, u) = chunk?;
        hits += h;
        undecided += u;
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    Ok(BallMeasure {
        estimate: p,
        stderr: libm::sqrt(p * (1.0 - p) / nf),
        lower: p,
        upper: (hits + undecided) as f64 / nf,
        hits,
        undecided,
        samples: n,
    })
}
