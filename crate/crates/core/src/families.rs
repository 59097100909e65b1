//! Built-in graphings and the spec-file description that names them.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graphing::{Generator, Graphing, Piece, Violation, ViolationKind};
use crate::space::{GroundSpace, Point};

/// Rotation of the circle by `alpha`: every `x` is joined to `x +- alpha`.
///
/// The degree bound is the degree the rotation actually attains, so `alpha =
/// 1/2` gives a perfect matching with bound 1.
pub fn make_cycle_rotation(alpha: f64) -> Result<Graphing> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("rotation angle {alpha} is not in (0, 1)")));
    }
    let g = Graphing::new(GroundSpace::Circle, alloc::vec![Generator::rotation(0, alpha)], 2);
    let d = g.max_generated_degree() as u32;
    g.with_degree_bound(d).validated()
}

/// Removes the edge `xy`, which must currently be present.
pub fn delete_edge(g: &Graphing, x: Point, y: Point) -> Result<Graphing> {
    if !g.is_edge(&x, &y) {
        return Err(Error::domain(format!("({}, {}) - ({}, {}) is not an edge", x.part, x.coord, y.part, y.coord)));
    }
    let mut out = g.clone();
    let s = out.space().clone();
    let before = out.added_edges().len();
    out.added_mut().retain(|(p, q)| {
        !((s.same_point(p, &x) && s.same_point(q, &y)) || (s.same_point(p, &y) && s.same_point(q, &x)))
    });
    if out.added_edges().len() == before {
        out.removed_mut().push((x, y));
    }
    Ok(out)
}

/// Adds the edge `xy`, which must currently be absent.
pub fn add_edge(g: &Graphing, x: Point, y: Point) -> Result<Graphing> {
    let s = g.space();
    s.check_point(&x)?;
    s.check_point(&y)?;
    if s.same_point(&x, &y) {
        return Err(Error::domain("an edge needs two distinct endpoints"));
    }
    if g.is_edge(&x, &y) {
        return Err(Error::domain("edge is already present"));
    }
    let mut out = g.clone();
    let before = out.removed_edges().len();
    out.removed_mut().retain(|(p, q)| {
        !((s.same_point(p, &x) && s.same_point(q, &y)) || (s.same_point(p, &y) && s.same_point(q, &x)))
    });
    if out.removed_edges().len() == before {
        out.added_mut().push((x, y));
    }
    Ok(out)
}

/// A simple graph on `n` atoms of equal mass.
///
/// Edges are split into matchings by greedy proper edge colouring (at most
/// `2D - 1` colours); each matching becomes one involution.
pub fn make_finite_graph(n: u32, edges: &[(u32, u32)]) -> Result<Graphing> {
    if n == 0 {
        return Err(Error::domain("a finite graph needs at least one node"));
    }
    let mut seen: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::domain(format!("edge ({a}, {b}) leaves 0..{n}")));
        }
        if a == b {
            return Err(Error::domain(format!("loop at {a}")));
        }
        let e = (a.min(b), a.max(b));
        if seen.contains(&e) {
            return Err(Error::domain(format!("repeated edge ({a}, {b})")));
        }
        seen.push(e);
    }
    let mut colours_at: Vec<Vec<usize>> = alloc::vec![Vec::new(); n as usize];
    let mut matchings: Vec<Vec<(u32, u32)>> = Vec::new();
    for &(a, b) in &seen {
        let c = (0..).find(|c| !colours_at[a as usize].contains(c) && !colours_at[b as usize].contains(c)).unwrap_or(0);
        if c == matchings.len() {
            matchings.push(Vec::new());
        }
        matchings[c].extend([(a, b), (b, a)]);
        colours_at[a as usize].push(c);
        colours_at[b as usize].push(c);
    }
    let degree = colours_at.iter().map(Vec::len).max().unwrap_or(0) as u32;
    let generators = matchings
        .into_iter()
        .map(|mut map| {
            map.sort_unstable();
            Generator::new(alloc::vec![Piece::Permute { part: 0, target_part: 0, map }])
        })
        .collect();
    Graphing::new(GroundSpace::Atoms(n), generators, degree).validated()
}

/// One piece of an interval exchange: `[start, end)` moves to `[target,
/// target + end - start)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExchangePiece {
    pub start: f64,
    pub end: f64,
    pub target: f64,
}

const PARTITION_TOLERANCE: f64 = 1e-12;

fn partition_violation(what: &str, ranges: &mut [(f64, f64)]) -> Option<Violation> {
    ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut at = 0.0;
    for &(s, e) in ranges.iter() {
        if !(e > s) || libm::fabs(s - at) > PARTITION_TOLERANCE {
            return Some(Violation {
                kind: ViolationKind::InvalidPiece,
                detail: format!("{what} do not partition [0, 1) near {at}"),
            });
        }
        at = e;
    }
    (libm::fabs(at - 1.0) > PARTITION_TOLERANCE)
        .then(|| Violation { kind: ViolationKind::InvalidPiece, detail: format!("{what} stop at {at} instead of 1") })
}

/// An interval exchange on `[0, 1)`: one generator, degree at most 2.
pub fn make_interval_exchange(pieces: &[ExchangePiece]) -> Result<Graphing> {
    let mut sources: Vec<(f64, f64)> = pieces.iter().map(|p| (p.start, p.end)).collect();
    let mut images: Vec<(f64, f64)> = pieces.iter().map(|p| (p.target, p.target + p.end - p.start)).collect();
    let violations: Vec<Violation> =
        [partition_violation("pieces", &mut sources), partition_violation("images", &mut images)]
            .into_iter()
            .flatten()
            .collect();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let generator = Generator::new(
        pieces
            .iter()
            .map(|p| Piece::Translate {
                part: 0,
                start: p.start,
                end: p.end,
                target_part: 0,
                offset: p.target - p.start,
            })
            .collect(),
    );
    let g = Graphing::new(GroundSpace::Interval, alloc::vec![generator], 2);
    let d = g.max_generated_degree() as u32;
    g.with_degree_bound(d).validated()
}

/// Weighted disjoint union; component `i` lives on part `i`.
pub fn make_union(components: Vec<(Graphing, f64)>) -> Result<Graphing> {
    let mut spaces = Vec::with_capacity(components.len());
    let mut generators = Vec::new();
    let mut removed = Vec::new();
    let mut added = Vec::new();
    let mut degree = 0;
    for (i, (g, w)) in components.into_iter().enumerate() {
        if matches!(g.space(), GroundSpace::Union(_)) {
            return Err(Error::domain("union components must not be unions"));
        }
        let part = i as u32;
        let shift = |p: &Point| Point::on(part, p.coord);
        for gen in g.generators() {
            generators.push(Generator::new(
                gen.pieces
                    .iter()
                    .map(|piece| match piece {
                        Piece::Translate { start, end, offset, .. } => {
                            Piece::Translate { part, start: *start, end: *end, target_part: part, offset: *offset }
                        }
                        Piece::Permute { map, .. } => Piece::Permute { part, target_part: part, map: map.clone() },
                    })
                    .collect(),
            ));
        }
        removed.extend(g.removed_edges().iter().map(|(p, q)| (shift(p), shift(q))));
        added.extend(g.added_edges().iter().map(|(p, q)| (shift(p), shift(q))));
        degree = degree.max(g.degree_bound());
        spaces.push((g.space().clone(), w));
    }
    Graphing::new(GroundSpace::union(spaces)?, generators, degree).with_exceptions(removed, added).validated()
}

/// A point as written in a spec file: a bare coordinate on part 0, or a
/// part and coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum SpecPoint {
    Coord(f64),
    On { part: u32, coord: f64 },
}

impl From<SpecPoint> for Point {
    fn from(p: SpecPoint) -> Point {
        match p {
            SpecPoint::Coord(c) => Point::new(c),
            SpecPoint::On { part, coord } => Point::on(part, coord),
        }
    }
}

/// A built-in family with its parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", content = "params", rename_all = "snake_case"))]
pub enum Family {
    CycleRotation { alpha: f64 },
    IntervalExchange { pieces: Vec<ExchangePiece> },
    FiniteGraph { nodes: u32, edges: Vec<(u32, u32)> },
    Union { components: Vec<UnionComponent> },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnionComponent {
    pub weight: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub family: Family,
}

impl Family {
    pub fn build(&self) -> Result<Graphing> {
        match self {
            Family::CycleRotation { alpha } => make_cycle_rotation(*alpha),
            Family::IntervalExchange { pieces } => make_interval_exchange(pieces),
            Family::FiniteGraph { nodes, edges } => make_finite_graph(*nodes, edges),
            Family::Union { components } => {
                make_union(components.iter().map(|c| Ok((c.family.build()?, c.weight))).collect::<Result<_>>()?)
            }
        }
    }
}

/// A family plus exception lists and an optional explicit degree bound.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilySpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub family: Family,
    #[cfg_attr(feature = "serde", serde(default))]
    pub deleted_edges: Vec<(SpecPoint, SpecPoint)>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub added_edges: Vec<(SpecPoint, SpecPoint)>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub degree_bound: Option<u32>,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        FamilySpec { family, deleted_edges: Vec::new(), added_edges: Vec::new(), degree_bound: None }
    }

    /// Builds the family, applies deletions then additions, and validates.
    pub fn build(&self) -> Result<Graphing> {
        let mut g = self.family.build()?;
        for &(x, y) in &self.deleted_edges {
            g = delete_edge(&g, x.into(), y.into())?;
        }
        for &(x, y) in &self.added_edges {
            g = add_edge(&g, x.into(), y.into())?;
        }
        if let Some(d) = self.degree_bound {
            g = g.with_degree_bound(d);
        }
        g.validated()
    }
}
