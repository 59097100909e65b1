//! Bounded-degree graphings on concrete ground spaces.
//!
//! The crate models a graphing as a ground probability space together with
//! finitely many measure-preserving piecewise translations (plus finitely many
//! exceptional edges), and computes the compactification metric
//!
//! ```text
//! d(x, y) = inf over r >= 0 and root-preserving isomorphisms
//!           phi: B(x, r) -> B(y, r) of max(1 / (r + 1), d0(phi))
//! ```
//!
//! where `d0(phi)` is the largest base-space displacement of `phi`. Points of
//! the metric completion are represented by finite-depth [`LimitTower`]s.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form of a positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ball;
pub mod canon;
pub mod completion;
pub mod error;
pub mod families;
pub mod graphing;
pub mod iso;
pub mod metric;
mod refine;
pub mod sampling;
pub mod space;
pub mod stats;

pub use ball::{ball, graph_distance, BallExplorer, RootedBall, DEFAULT_NODE_CAP};
pub use canon::canonical_key;
pub use completion::{LimitTower, SupportClass, TowerConfig};
pub use error::{Error, Result};
pub use graphing::{Generator, Graphing, Piece, ValidationReport, Violation, ViolationKind};
pub use iso::{enumerate_isos, iso_exists, min_displacement_iso, NeighborhoodIso};
pub use metric::{compact_distance, MetricResult, DEFAULT_R_MAX};
pub use sampling::{Executor, Sequential};
pub use space::{GroundSpace, IntervalSet, PartKind, Point, SetPiece, TAU};
pub use stats::{BallStats, EstimateReport};
