//! Spec files and the text forms of points and sets.
//!
//! A spec file is JSON:
//!
//! ```json
//! { "family": "cycle_rotation", "params": { "alpha": 0.6180339887 },
//!   "deleted_edges": [[0.0, 0.6180339887]], "added_edges": [], "degree_bound": 2 }
//! ```
//!
//! Points are written `coord` (part 0) or `part:coord`. Sets are `;`-separated
//! pieces, each `[part:]lo..hi` for a half-open interval or `[part:]#i,j,k`
//! for atoms.

use std::path::{Path, PathBuf};

use graphing_core::families::FamilySpec;
use graphing_core::{Graphing, IntervalSet, Point, SetPiece};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// A parsed and validated spec with the digest of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub path: PathBuf,
    pub spec: FamilySpec,
    pub graphing: Graphing,
    pub sha256: String,
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let bytes = std::fs::read(path).map_err(|source| LabError::Read { path: path.to_owned(), source })?;
    let spec: FamilySpec =
        serde_json::from_slice(&bytes).map_err(|source| LabError::SpecJson { path: path.to_owned(), source })?;
    let graphing = spec.build()?;
    Ok(LoadedSpec { path: path.to_owned(), spec, graphing, sha256: sha256_hex(&bytes) })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| LabError::Usage(format!("cannot read {what} from {s:?}")))
}

fn part_prefix(s: &str) -> Result<(u32, &str)> {
    match s.split_once(':') {
        Some((part, rest)) => {
            let part = part.trim().parse::<u32>().map_err(|_| LabError::Usage(format!("bad part index in {s:?}")))?;
            Ok((part, rest))
        }
        None => Ok((0, s)),
    }
}

pub fn parse_point(s: &str) -> Result<Point> {
    let (part, coord) = part_prefix(s)?;
    Ok(Point::on(part, number(coord, "a coordinate")?))
}

pub fn parse_set(s: &str) -> Result<IntervalSet> {
    let mut set = IntervalSet::empty();
    for piece in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (part, body) = part_prefix(piece)?;
        let body = body.trim();
        if let Some(atoms) = body.strip_prefix('#') {
            let atoms = atoms
                .split(',')
                .map(|a| a.trim().parse::<u32>().map_err(|_| LabError::Usage(format!("bad atom in {piece:?}"))))
                .collect::<Result<Vec<u32>>>()?;
            set = set.with(SetPiece::Atoms { part, atoms });
        } else if let Some((lo, hi)) = body.split_once("..") {
            set = set.with(SetPiece::Interval { part, start: number(lo, "a bound")?, end: number(hi, "a bound")? });
        } else {
            return Err(LabError::Usage(format!("cannot read a set piece from {piece:?}")));
        }
    }
    Ok(set)
}

/// Points listed one per line; blank lines and `#` comments are skipped.
pub fn read_points(path: &Path) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Read { path: path.to_owned(), source })?;
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).map(parse_point).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_sets() {
        assert_eq!(parse_point("0.25").unwrap(), Point::new(0.25));
        assert_eq!(parse_point("1:0.5").unwrap(), Point::on(1, 0.5));
        assert!(parse_point("x").is_err());
        let s = parse_set("0..0.5; 1:#0,2").unwrap();
        assert_eq!(
            s.pieces,
            vec![SetPiece::Interval { part: 0, start: 0.0, end: 0.5 }, SetPiece::Atoms { part: 1, atoms: vec![0, 2] },]
        );
        assert!(parse_set("0.5").is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"family": "cycle_rotation", "params": {"alpha": 0.6180339887},
                       "deleted_edges": [[0.0, 0.6180339887]]}"#;
        let spec: FamilySpec = serde_json::from_str(text).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.neighbors(&Point::new(0.0)).len(), 1);
        let union = r#"{"family": "union", "params": {"components": [
            {"weight": 0.5, "family": "cycle_rotation", "params": {"alpha": 0.3}},
            {"weight": 0.5, "family": "finite_graph", "params": {"nodes": 3, "edges": [[0,1],[1,2],[0,2]]}}]},
            "added_edges": [[{"part": 0, "coord": 0.1}, {"part": 1, "coord": 0.0}]], "degree_bound": 3}"#;
        let spec: FamilySpec = serde_json::from_str(union).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.neighbors(&Point::on(1, 0.0)).len(), 3);
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
