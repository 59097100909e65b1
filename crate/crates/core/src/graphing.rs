//! Graphings generated by measure-preserving piecewise translations.
//!
//! A [`Graphing`] joins every point `x` to `g(x)` and `g⁻¹(x)` for each
//! generator `g`. A finite list of removed and added edges records null-set
//! modifications on top of the generated edge set.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::space::{wrap_unit, GroundSpace, PartKind, Point, TAU};

const PIECE_TOLERANCE: f64 = 1e-12;

/// One measure-preserving piece of a generator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Piece {
    /// Maps `[start, end)` on `part` to `[start + offset, end + offset)` on
    /// `target_part`, reduced mod 1 when the target is a circle.
    Translate { part: u32, start: f64, end: f64, target_part: u32, offset: f64 },
    /// Maps atom `s` of `part` to atom `t` of `target_part` for each `(s, t)`.
    Permute { part: u32, target_part: u32, map: Vec<(u32, u32)> },
}

/// A partial measure-preserving bijection assembled from pieces.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Generator {
    pub pieces: Vec<Piece>,
}

impl Generator {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Generator { pieces }
    }

    /// Rotation of a circle part by `offset`.
    pub fn rotation(part: u32, offset: f64) -> Self {
        Generator::new(alloc::vec![Piece::Translate {
            part,
            start: 0.0,
            end: 1.0,
            target_part: part,
            offset: wrap_unit(offset),
        }])
    }

    pub fn apply(&self, space: &GroundSpace, p: &Point) -> Option<Point> {
        self.pieces.iter().find_map(|piece| match piece {
            Piece::Translate { part, start, end, target_part, offset } => {
                (p.part == *part && *start <= p.coord && p.coord < *end)
                    .then(|| Point::on(*target_part, space.normalize(*target_part, p.coord + offset)))
            }
            Piece::Permute { part, target_part, map } => {
                if p.part != *part {
                    return None;
                }
                map.iter().find(|(s, _)| f64::from(*s) == p.coord).map(|(_, t)| Point::on(*target_part, f64::from(*t)))
            }
        })
    }

    pub fn apply_inverse(&self, space: &GroundSpace, p: &Point) -> Option<Point> {
        self.pieces.iter().find_map(|piece| match piece {
            Piece::Translate { part, start, end, target_part, offset } => {
                if p.part != *target_part {
                    return None;
                }
                let pre = match space.part(*target_part).map(|(k, _)| k) {
                    Some(PartKind::Circle) => start + wrap_unit(p.coord - offset - start),
                    _ => p.coord - offset,
                };
                (*start <= pre && pre < *end).then(|| Point::on(*part, space.normalize(*part, pre)))
            }
            Piece::Permute { part, target_part, map } => {
                if p.part != *target_part {
                    return None;
                }
                map.iter().find(|(_, t)| f64::from(*t) == p.coord).map(|(s, _)| Point::on(*part, f64::from(*s)))
            }
        })
    }
}

/// Kind of problem found by [`Graphing::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    InvalidPiece,
    Bijectivity,
    MeasurePreservation,
    FixedPoints,
    InvalidPoint,
    NotAnEdge,
    DuplicateEdge,
    DegreeBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Largest degree produced by the generators alone.
    pub max_generated_degree: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

/// A bounded-degree graphing on a ground space.
#[derive(Debug, Clone, PartialEq)]
pub struct Graphing {
    space: GroundSpace,
    generators: Vec<Generator>,
    removed: Vec<(Point, Point)>,
    added: Vec<(Point, Point)>,
    degree_bound: u32,
}

impl Graphing {
    /// Assembles a graphing without validating it.
    pub fn new(space: GroundSpace, generators: Vec<Generator>, degree_bound: u32) -> Self {
        Graphing { space, generators, removed: Vec::new(), added: Vec::new(), degree_bound }
    }

    pub fn with_exceptions(mut self, removed: Vec<(Point, Point)>, added: Vec<(Point, Point)>) -> Self {
        self.removed = removed;
        self.added = added;
        self
    }

    pub fn with_degree_bound(mut self, degree_bound: u32) -> Self {
        self.degree_bound = degree_bound;
        self
    }

    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn removed_edges(&self) -> &[(Point, Point)] {
        &self.removed
    }

    pub fn added_edges(&self) -> &[(Point, Point)] {
        &self.added
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub(crate) fn removed_mut(&mut self) -> &mut Vec<(Point, Point)> {
        &mut self.removed
    }

    pub(crate) fn added_mut(&mut self) -> &mut Vec<(Point, Point)> {
        &mut self.added
    }

    fn push_unique(&self, out: &mut Vec<Point>, x: &Point, y: Point) {
        if !self.space.same_point(x, &y) && !out.iter().any(|q| self.space.same_point(q, &y)) {
            out.push(y);
        }
    }

    /// Neighbours produced by the generators, ignoring the exception lists.
    pub fn generated_neighbors(&self, x: &Point) -> Vec<Point> {
        let mut out = Vec::with_capacity(2 * self.generators.len());
        for g in &self.generators {
            if let Some(y) = g.apply(&self.space, x) {
                self.push_unique(&mut out, x, y);
            }
            if let Some(y) = g.apply_inverse(&self.space, x) {
                self.push_unique(&mut out, x, y);
            }
        }
        out
    }

    /// All neighbours of `x`: generator images and preimages, deduplicated at
    /// tolerance, minus removed edges, plus added edges.
    pub fn neighbors(&self, x: &Point) -> Vec<Point> {
        let mut out = self.generated_neighbors(x);
        let s = &self.space;
        for (p, q) in &self.removed {
            if s.same_point(x, p) {
                out.retain(|y| !s.same_point(y, q));
            }
            if s.same_point(x, q) {
                out.retain(|y| !s.same_point(y, p));
            }
        }
        for (p, q) in &self.added {
            if s.same_point(x, p) {
                self.push_unique(&mut out, x, *q);
            } else if s.same_point(x, q) {
                self.push_unique(&mut out, x, *p);
            }
        }
        out
    }

    pub fn is_edge(&self, x: &Point, y: &Point) -> bool {
        self.neighbors(x).iter().any(|q| self.space.same_point(q, y))
    }

    /// One representative point per cell on which the generated degree is
    /// constant: cell midpoints between all piece and image breakpoints, and
    /// every atom.
    fn degree_probes(&self) -> Vec<Point> {
        let mut probes = Vec::new();
        for part in 0..self.space.part_count() as u32 {
            match self.space.part(part) {
                Some((PartKind::Atoms(n), _)) => {
                    probes.extend((0..n).map(|i| Point::on(part, f64::from(i))));
                }
                Some((kind, _)) => {
                    let mut cuts = alloc::vec![0.0, 1.0];
                    for g in &self.generators {
                        for piece in &g.pieces {
                            if let Piece::Translate { part: p, start, end, target_part, offset } = piece {
                                if *p == part {
                                    cuts.push(*start);
                                    cuts.push(*end);
                                }
                                if *target_part == part {
                                    for c in [start + offset, end + offset] {
                                        cuts.push(if kind == PartKind::Circle {
                                            wrap_unit(c)
                                        } else {
                                            c.clamp(0.0, 1.0)
                                        });
                                    }
                                }
                            }
                        }
                    }
                    cuts.sort_by(f64::total_cmp);
                    cuts.dedup();
                    for w in cuts.windows(2) {
                        if w[1] - w[0] > 4.0 * TAU {
                            probes.push(Point::on(part, 0.5 * (w[0] + w[1])));
                        }
                    }
                }
                None => {}
            }
        }
        probes
    }

    /// Maximum degree attained by the generators alone.
    pub fn max_generated_degree(&self) -> usize {
        self.degree_probes().iter().map(|p| self.generated_neighbors(p).len()).max().unwrap_or(0)
    }

    /// Checks generator pieces, exception lists, and the degree bound.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (gi, g) in self.generators.iter().enumerate() {
            self.validate_generator(gi, g, &mut report);
        }
        if report.has(ViolationKind::InvalidPiece) {
            return report;
        }
        let s = &self.space;
        for (p, q) in &self.removed {
            if s.check_point(p).is_err() || s.check_point(q).is_err() {
                report.push(ViolationKind::InvalidPoint, format!("removed edge ({p:?}, {q:?})"));
                continue;
            }
            if !self.generated_neighbors(p).iter().any(|y| s.same_point(y, q)) {
                report.push(
                    ViolationKind::NotAnEdge,
                    format!("removed edge ({}, {}) is not a generator edge", p.coord, q.coord),
                );
            }
        }
        for (i, (p, q)) in self.removed.iter().enumerate() {
            let dup = self.removed[..i]
                .iter()
                .any(|(a, b)| (s.same_point(a, p) && s.same_point(b, q)) || (s.same_point(a, q) && s.same_point(b, p)));
            if dup {
                report.push(ViolationKind::DuplicateEdge, format!("removed edge {i} repeated"));
            }
        }
        for (i, (p, q)) in self.added.iter().enumerate() {
            if s.check_point(p).is_err() || s.check_point(q).is_err() {
                report.push(ViolationKind::InvalidPoint, format!("added edge ({p:?}, {q:?})"));
                continue;
            }
            if s.same_point(p, q) {
                report.push(ViolationKind::FixedPoints, format!("added loop at {}", p.coord));
            }
            if self.generated_neighbors(p).iter().any(|y| s.same_point(y, q))
                && !self.removed.iter().any(|(a, b)| {
                    (s.same_point(a, p) && s.same_point(b, q)) || (s.same_point(a, q) && s.same_point(b, p))
                })
            {
                report.push(
                    ViolationKind::DuplicateEdge,
                    format!("added edge ({}, {}) already exists", p.coord, q.coord),
                );
            }
            let dup = self.added[..i]
                .iter()
                .any(|(a, b)| (s.same_point(a, p) && s.same_point(b, q)) || (s.same_point(a, q) && s.same_point(b, p)));
            if dup {
                report.push(ViolationKind::DuplicateEdge, format!("added edge {i} repeated"));
            }
        }
        let degree = self.max_generated_degree();
        report.max_generated_degree = degree;
        if degree > self.degree_bound as usize {
            report.push(
                ViolationKind::DegreeBound,
                format!("generators reach degree {degree} > D = {}", self.degree_bound),
            );
        }
        for (p, q) in &self.added {
            for x in [p, q] {
                if s.check_point(x).is_ok() {
                    let deg = self.neighbors(x).len();
                    if deg > self.degree_bound as usize {
                        report.push(
                            ViolationKind::DegreeBound,
                            format!("degree {deg} at {} exceeds D = {}", x.coord, self.degree_bound),
                        );
                    }
                }
            }
        }
        report
    }

    fn validate_generator(&self, gi: usize, g: &Generator, report: &mut ValidationReport) {
        let s = &self.space;
        // (part, start, end) of sources and images, for disjointness checks
        let mut sources: Vec<(u32, f64, f64)> = Vec::new();
        let mut images: Vec<(u32, f64, f64)> = Vec::new();
        let mut atom_sources: Vec<(u32, u32)> = Vec::new();
        let mut atom_images: Vec<(u32, u32)> = Vec::new();
        for piece in &g.pieces {
            match piece {
                Piece::Translate { part, start, end, target_part, offset } => {
                    let (src, tgt) = match (s.part(*part), s.part(*target_part)) {
                        (Some(a), Some(b)) => (a, b),
                        _ => {
                            report
                                .push(ViolationKind::InvalidPiece, format!("generator {gi}: part index out of range"));
                            continue;
                        }
                    };
                    if matches!(src.0, PartKind::Atoms(_)) || matches!(tgt.0, PartKind::Atoms(_)) {
                        report
                            .push(ViolationKind::InvalidPiece, format!("generator {gi}: translation on an atom part"));
                        continue;
                    }
                    if !(0.0 <= *start && start < end && *end <= 1.0) || !offset.is_finite() {
                        report.push(
                            ViolationKind::InvalidPiece,
                            format!("generator {gi}: bad source interval [{start}, {end})"),
                        );
                        continue;
                    }
                    if (src.1 - tgt.1).abs() > PIECE_TOLERANCE {
                        report.push(
                            ViolationKind::MeasurePreservation,
                            format!("generator {gi}: parts {part} and {target_part} have different weights"),
                        );
                    }
                    let (a, b) = (start + offset, end + offset);
                    if tgt.0 == PartKind::Interval {
                        if a < -PIECE_TOLERANCE || b > 1.0 + PIECE_TOLERANCE {
                            report.push(
                                ViolationKind::MeasurePreservation,
                                format!("generator {gi}: image [{a}, {b}) leaves [0,1)"),
                            );
                        }
                        images.push((*target_part, a, b));
                    } else {
                        let wa = wrap_unit(a);
                        let wb = wa + (end - start);
                        if wb > 1.0 + PIECE_TOLERANCE {
                            images.push((*target_part, wa, 1.0));
                            images.push((*target_part, 0.0, wb - 1.0));
                        } else {
                            images.push((*target_part, wa, wb));
                        }
                    }
                    let shift = if tgt.0 == PartKind::Circle {
                        let w = wrap_unit(*offset);
                        w.min(1.0 - w)
                    } else {
                        offset.abs()
                    };
                    if part == target_part && shift <= TAU {
                        report.push(
                            ViolationKind::FixedPoints,
                            format!("generator {gi}: piece [{start}, {end}) is fixed pointwise"),
                        );
                    }
                    sources.push((*part, *start, *end));
                }
                Piece::Permute { part, target_part, map } => {
                    let (n_src, w_src, n_tgt, w_tgt) = match (s.part(*part), s.part(*target_part)) {
                        (Some((PartKind::Atoms(a), wa)), Some((PartKind::Atoms(b), wb))) => (a, wa, b, wb),
                        _ => {
                            report.push(
                                ViolationKind::InvalidPiece,
                                format!("generator {gi}: permutation on a non-atomic part"),
                            );
                            continue;
                        }
                    };
                    if (w_src / f64::from(n_src) - w_tgt / f64::from(n_tgt)).abs() > PIECE_TOLERANCE {
                        report.push(
                            ViolationKind::MeasurePreservation,
                            format!("generator {gi}: atom masses differ between parts {part} and {target_part}"),
                        );
                    }
                    for &(a, b) in map {
                        if a >= n_src || b >= n_tgt {
                            report.push(
                                ViolationKind::InvalidPiece,
                                format!("generator {gi}: atom pair ({a}, {b}) out of range"),
                            );
                            continue;
                        }
                        if part == target_part && a == b {
                            report.push(ViolationKind::FixedPoints, format!("generator {gi}: atom {a} is fixed"));
                        }
                        atom_sources.push((*part, a));
                        atom_images.push((*target_part, b));
                    }
                }
            }
        }
        let overlapping = |list: &mut Vec<(u32, f64, f64)>| {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            list.windows(2).any(|w| w[0].0 == w[1].0 && w[1].1 < w[0].2 - PIECE_TOLERANCE)
        };
        if overlapping(&mut sources) {
            report.push(ViolationKind::Bijectivity, format!("generator {gi}: source pieces overlap"));
        }
        if overlapping(&mut images) {
            report.push(ViolationKind::Bijectivity, format!("generator {gi}: image pieces overlap"));
        }
        for list in [&mut atom_sources, &mut atom_images] {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                report.push(ViolationKind::Bijectivity, format!("generator {gi}: atom map is not injective"));
                break;
            }
        }
    }

    /// Fails with the collected violations unless the graphing is valid.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::Validation(report.violations))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const ALPHA: f64 = 0.6180339887;

    fn rotation() -> Graphing {
        Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, ALPHA)], 2)
    }

    fn close(a: &[Point], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p.coord - q).abs() < 1e-9)
    }

    #[test]
    fn rotation_neighbors() {
        let g = rotation();
        let n = g.neighbors(&Point::new(0.25));
        assert!(close(&n, &[0.8680339887, 0.6319660113]), "{n:?}");
    }

    #[test]
    fn removed_edge_is_filtered() {
        let g = rotation().with_exceptions(vec![(Point::new(0.0), Point::new(ALPHA))], vec![]);
        assert!(g.validate().is_valid());
        assert!(close(&g.neighbors(&Point::new(0.0)), &[1.0 - ALPHA]));
        assert!(close(&g.neighbors(&Point::new(ALPHA)), &[2.0 * ALPHA - 1.0]));
    }

    #[test]
    fn cyclic_atom_permutation() {
        let g = Graphing::new(
            GroundSpace::Atoms(3),
            vec![Generator::new(vec![Piece::Permute { part: 0, target_part: 0, map: vec![(0, 1), (1, 2), (2, 0)] }])],
            2,
        );
        assert!(g.validate().is_valid());
        let n = g.neighbors(&Point::atom(0));
        assert!(close(&n, &[1.0, 2.0]));
    }

    #[test]
    fn overlapping_sources_break_bijectivity() {
        let g = Graphing::new(
            GroundSpace::Circle,
            vec![Generator::new(vec![
                Piece::Translate { part: 0, start: 0.0, end: 0.6, target_part: 0, offset: 0.3 },
                Piece::Translate { part: 0, start: 0.5, end: 1.0, target_part: 0, offset: 0.3 },
            ])],
            2,
        );
        assert!(g.validate().has(ViolationKind::Bijectivity));
    }

    #[test]
    fn removed_non_edge_is_reported() {
        let g = rotation().with_exceptions(vec![(Point::new(0.0), Point::new(0.5))], vec![]);
        assert!(g.validate().has(ViolationKind::NotAnEdge));
    }

    #[test]
    fn identity_piece_has_fixed_points() {
        let g = Graphing::new(GroundSpace::Interval, vec![Generator::rotation(0, 0.0)], 2);
        assert!(g.validate().has(ViolationKind::FixedPoints));
    }

    #[test]
    fn half_rotation_is_an_involution() {
        let g = Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, 0.5)], 1);
        let report = g.validate();
        assert!(report.is_valid(), "{report:?}");
        assert_eq!(report.max_generated_degree, 1);
        assert_eq!(g.neighbors(&Point::new(0.2)).len(), 1);
    }

    #[test]
    fn degree_bound_is_enforced() {
        let g = Graphing::new(GroundSpace::Circle, vec![Generator::rotation(0, ALPHA)], 1);
        assert!(g.validate().has(ViolationKind::DegreeBound));
        let added = rotation().with_exceptions(vec![], vec![(Point::new(0.1), Point::new(0.2))]);
        assert!(added.validate().has(ViolationKind::DegreeBound));
    }

    #[test]
    fn interval_image_must_stay_inside() {
        let g = Graphing::new(
            GroundSpace::Interval,
            vec![Generator::new(vec![Piece::Translate { part: 0, start: 0.0, end: 0.5, target_part: 0, offset: 0.7 }])],
            2,
        );
        assert!(g.validate().has(ViolationKind::MeasurePreservation));
    }

    #[test]
    fn adjacency_is_symmetric_on_samples() {
        use rand::SeedableRng;
        let g = rotation().with_exceptions(vec![(Point::new(0.0), Point::new(ALPHA))], vec![]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let x = g.space().sample_point(&mut rng);
            let n = g.neighbors(&x);
            assert!(n.len() <= 2);
            for y in &n {
                assert!(g.neighbors(y).iter().any(|z| g.space().same_point(z, &x)));
            }
        }
    }
}
