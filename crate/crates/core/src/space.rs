//! Ground probability spaces: the unit circle, the unit interval, finite atom
//! sets, and weighted disjoint unions of these.
//!
//! Every space carries its base metric `d0` and its probability measure.
//! Circle and interval parts use the uniform (Lebesgue) measure, atom parts the
//! uniform counting measure; a union scales each part by its weight.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance under which two coordinates denote the same point.
pub const TAU: f64 = 1e-9;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// The shape of one part of a ground space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PartKind {
    /// `[0,1)` with wraparound; arc-length metric, diameter 1/2.
    Circle,
    /// `[0,1)` with the euclidean metric.
    Interval,
    /// `n` atoms with the discrete metric.
    Atoms(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundSpace {
    Circle,
    Interval,
    Atoms(u32),
    /// Weighted disjoint union. Components are never unions themselves.
    Union(Vec<(GroundSpace, f64)>),
}

/// A point of a ground space: a part index (0 outside unions) and a coordinate.
///
/// Atom points store the atom index as an integral coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub part: u32,
    pub coord: f64,
}

impl Point {
    pub const fn new(coord: f64) -> Self {
        Point { part: 0, coord }
    }

    pub const fn on(part: u32, coord: f64) -> Self {
        Point { part, coord }
    }

    pub fn atom(index: u32) -> Self {
        Point { part: 0, coord: f64::from(index) }
    }

    /// Orders points by part, then coordinate.
    pub fn total_cmp(&self, other: &Point) -> core::cmp::Ordering {
        self.part.cmp(&other.part).then(self.coord.total_cmp(&other.coord))
    }
}

/// Reduces a circle coordinate into `[0,1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let y = x - libm::floor(x);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

impl GroundSpace {
    /// Builds a weighted union, rejecting nested unions and weights that do
    /// not sum to one.
    pub fn union(components: Vec<(GroundSpace, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("union needs at least one component"));
        }
        let mut total = 0.0;
        for (space, weight) in &components {
            if matches!(space, GroundSpace::Union(_)) {
                return Err(Error::domain("nested unions are not supported"));
            }
            if let GroundSpace::Atoms(0) = space {
                return Err(Error::domain("atom part must have at least one atom"));
            }
            if !(*weight >= 0.0) || !weight.is_finite() {
                return Err(Error::domain(format!("invalid union weight {weight}")));
            }
            total += weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::domain(format!("union weights sum to {total}, not 1")));
        }
        Ok(GroundSpace::Union(components))
    }

    pub fn part_count(&self) -> usize {
        match self {
            GroundSpace::Union(c) => c.len(),
            _ => 1,
        }
    }

    /// Kind and weight of part `i`.
    pub fn part(&self, i: u32) -> Option<(PartKind, f64)> {
        let kind = |s: &GroundSpace| match s {
            GroundSpace::Circle => PartKind::Circle,
            GroundSpace::Interval => PartKind::Interval,
            GroundSpace::Atoms(n) => PartKind::Atoms(*n),
            GroundSpace::Union(_) => unreachable!("nested unions are rejected"),
        };
        match self {
            GroundSpace::Union(c) => c.get(i as usize).map(|(s, w)| (kind(s), *w)),
            other if i == 0 => Some((kind(other), 1.0)),
            _ => None,
        }
    }

    /// True when every part is a finite atom set, so integrals are finite sums.
    pub fn is_atomic(&self) -> bool {
        (0..self.part_count() as u32).all(|i| matches!(self.part(i), Some((PartKind::Atoms(_), _))))
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        let (kind, _) = self.part(p.part).ok_or_else(|| Error::domain(format!("part {} out of range", p.part)))?;
        let ok = match kind {
            PartKind::Circle | PartKind::Interval => (0.0..1.0).contains(&p.coord),
            PartKind::Atoms(n) => p.coord >= 0.0 && p.coord < f64::from(n) && libm::trunc(p.coord) == p.coord,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("coordinate {} invalid for part {} ({kind:?})", p.coord, p.part)))
        }
    }

    /// Base distance `d0` between two valid points.
    pub fn d0(&self, x: &Point, y: &Point) -> f64 {
        if x.part != y.part {
            return 1.0;
        }
        match self.part(x.part).map(|(k, _)| k) {
            Some(PartKind::Circle) => {
                let diff = (x.coord - y.coord).abs();
                diff.min(1.0 - diff)
            }
            Some(PartKind::Interval) => (x.coord - y.coord).abs(),
            Some(PartKind::Atoms(_)) if x.coord == y.coord => 0.0,
            _ => 1.0,
        }
    }

    /// Base distance with validation of both arguments.
    pub fn base_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.d0(x, y))
    }

    /// Point identity at tolerance [`TAU`].
    pub fn same_point(&self, x: &Point, y: &Point) -> bool {
        x.part == y.part && self.d0(x, y) <= TAU
    }

    /// Draws a point from the space's probability measure.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let part = match self {
            GroundSpace::Union(c) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = c.len() - 1;
                for (i, (_, w)) in c.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                // skip zero-weight tail parts picked only through rounding
                while c[chosen].1 == 0.0 && chosen > 0 {
                    chosen -= 1;
                }
                chosen as u32
            }
            _ => 0,
        };
        let coord = match self.part(part).map(|(k, _)| k) {
            Some(PartKind::Atoms(n)) => f64::from(rng.gen_range(0..n)),
            _ => rng.gen::<f64>(),
        };
        Point { part, coord }
    }

    /// Normalizes a coordinate produced by arithmetic on part `part`.
    pub(crate) fn normalize(&self, part: u32, coord: f64) -> f64 {
        match self.part(part).map(|(k, _)| k) {
            Some(PartKind::Circle) => wrap_unit(coord),
            _ => coord,
        }
    }

    /// Every atom of an atomic space with its probability mass.
    pub fn atoms_with_mass(&self) -> Vec<(Point, f64)> {
        let mut out = Vec::new();
        for part in 0..self.part_count() as u32 {
            if let Some((PartKind::Atoms(n), w)) = self.part(part) {
                for i in 0..n {
                    out.push((Point::on(part, f64::from(i)), w / f64::from(n)));
                }
            }
        }
        out
    }

    /// Measure `lambda(A)`.
    pub fn measure(&self, set: &IntervalSet) -> Result<f64> {
        set.validate(self)?;
        Ok(set
            .pieces
            .iter()
            .map(|piece| match piece {
                SetPiece::Interval { part, start, end } => self.part(*part).map_or(0.0, |(_, w)| w * (end - start)),
                SetPiece::Atoms { part, atoms } => match self.part(*part) {
                    Some((PartKind::Atoms(n), w)) => w * atoms.len() as f64 / f64::from(n),
                    _ => 0.0,
                },
            })
            .sum())
    }
}

/// One piece of a measurable set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum SetPiece {
    /// Half-open interval `[start, end)` of a circle or interval part.
    Interval { part: u32, start: f64, end: f64 },
    /// A set of atoms of an atom part.
    Atoms { part: u32, atoms: Vec<u32> },
}

/// Finite union of intervals and atom sets.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct IntervalSet {
    pub pieces: Vec<SetPiece>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { pieces: Vec::new() }
    }

    /// Single interval on part 0.
    pub fn interval(start: f64, end: f64) -> Self {
        IntervalSet { pieces: alloc::vec![SetPiece::Interval { part: 0, start, end }] }
    }

    /// Atom set on part 0.
    pub fn atoms(atoms: &[u32]) -> Self {
        IntervalSet { pieces: alloc::vec![SetPiece::Atoms { part: 0, atoms: atoms.to_vec() }] }
    }

    /// The whole space.
    pub fn full(space: &GroundSpace) -> Self {
        let pieces = (0..space.part_count() as u32)
            .map(|part| match space.part(part) {
                Some((PartKind::Atoms(n), _)) => SetPiece::Atoms { part, atoms: (0..n).collect() },
                _ => SetPiece::Interval { part, start: 0.0, end: 1.0 },
            })
            .collect();
        IntervalSet { pieces }
    }

    pub fn with(mut self, piece: SetPiece) -> Self {
        self.pieces.push(piece);
        self
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.pieces.iter().any(|piece| match piece {
            SetPiece::Interval { part, start, end } => *part == p.part && *start <= p.coord && p.coord < *end,
            SetPiece::Atoms { part, atoms } => *part == p.part && atoms.iter().any(|&a| f64::from(a) == p.coord),
        })
    }

    /// Checks ranges, part kinds, and pairwise disjointness within each part.
    pub fn validate(&self, space: &GroundSpace) -> Result<()> {
        let mut intervals: Vec<(u32, f64, f64)> = Vec::new();
        let mut atoms: Vec<(u32, u32)> = Vec::new();
        for piece in &self.pieces {
            match piece {
                SetPiece::Interval { part, start, end } => {
                    match space.part(*part) {
                        Some((PartKind::Circle | PartKind::Interval, _)) => {}
                        _ => return Err(Error::domain(format!("interval on part {part}, which is not a continuum"))),
                    }
                    if !(0.0 <= *start && start <= end && *end <= 1.0) {
                        return Err(Error::domain(format!("interval [{start}, {end}) is not inside [0,1)")));
                    }
                    if start < end {
                        intervals.push((*part, *start, *end));
                    }
                }
                SetPiece::Atoms { part, atoms: list } => {
                    let n = match space.part(*part) {
                        Some((PartKind::Atoms(n), _)) => n,
                        _ => return Err(Error::domain(format!("atom set on part {part}, which is not atomic"))),
                    };
                    for &a in list {
                        if a >= n {
                            return Err(Error::domain(format!("atom {a} out of range")));
                        }
                        atoms.push((*part, a));
                    }
                }
            }
        }
        intervals.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in intervals.windows(2) {
            if w[0].0 == w[1].0 && w[1].1 < w[0].2 {
                return Err(Error::domain(format!(
                    "overlapping intervals [{}, {}) and [{}, {})",
                    w[0].1, w[0].2, w[1].1, w[1].2
                )));
            }
        }
        atoms.sort_unstable();
        if atoms.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("repeated atom in set"));
        }
        Ok(())
    }
}
