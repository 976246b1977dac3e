//! Finite projective planes of order `q`, built from cyclic difference sets.
//!
//! Points and lines are dense indices in `[0, q²+q+1)`. The built-in
//! constructions use the perfect difference sets `{1,2,4} mod 7` (q = 2) and
//! `{0,1,3,9} mod 13` (q = 3); line `i` is the `i`-th cyclic translate of the
//! difference set. Other orders are accepted when a valid difference set is
//! supplied.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point of the plane; one per group generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointId(pub usize);

/// A line of the plane; one per inverse generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineId(pub usize);

impl std::fmt::Display for PointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for LineId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlaneError {
    #[error("no built-in difference set for order {0} and none supplied")]
    UnsupportedOrder(usize),
    #[error("invalid difference set: {0}")]
    InvalidDifferenceSet(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(usize),
    #[error("meet of equal lines is not a single point")]
    EqualLines,
    #[error("join of equal points is not a single line")]
    EqualPoints,
    #[error("not a projective plane: {0}")]
    AxiomViolation(String),
}

/// Incidence structure of a projective plane of order `q`.
///
/// Immutable after construction; all queries are table lookups.
#[derive(Debug, Clone)]
pub struct Plane {
    q: usize,
    line_points: Vec<Vec<PointId>>,
    point_lines: Vec<Vec<LineId>>,
    incidence: Vec<bool>,
    meet_table: Vec<usize>,
    join_table: Vec<usize>,
}

const DIFFERENCE_SET_Q2: &[usize] = &[1, 2, 4];
const DIFFERENCE_SET_Q3: &[usize] = &[0, 1, 3, 9];

impl Plane {
    /// Builds the plane of order `q` from its cyclic difference set.
    ///
    /// `q = 2` and `q = 3` are built in; any other order requires an explicit
    /// difference set of size `q+1` modulo `q²+q+1`.
    pub fn build(q: usize, difference_set: Option<&[usize]>) -> Result<Plane, PlaneError> {
        let ds: Vec<usize> = match (q, difference_set) {
            (_, Some(ds)) => ds.to_vec(),
            (2, None) => DIFFERENCE_SET_Q2.to_vec(),
            (3, None) => DIFFERENCE_SET_Q3.to_vec(),
            (other, None) => return Err(PlaneError::UnsupportedOrder(other)),
        };
        let n = q * q + q + 1;
        if ds.len() != q + 1 {
            return Err(PlaneError::InvalidDifferenceSet(format!(
                "size {} but order {} needs {}",
                ds.len(),
                q,
                q + 1
            )));
        }
        // Every nonzero residue mod n must arise exactly once as a difference.
        let mut seen = vec![false; n];
        for (i, &a) in ds.iter().enumerate() {
            if a >= n {
                return Err(PlaneError::InvalidDifferenceSet(format!(
                    "element {a} out of range mod {n}"
                )));
            }
            for (j, &b) in ds.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = (a + n - b) % n;
                if d == 0 || seen[d] {
                    return Err(PlaneError::InvalidDifferenceSet(format!(
                        "difference {d} repeated or zero"
                    )));
                }
                seen[d] = true;
            }
        }
        if seen.iter().skip(1).any(|&s| !s) {
            return Err(PlaneError::InvalidDifferenceSet(
                "differences do not cover all nonzero residues".into(),
            ));
        }
        let lines: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut pts: Vec<usize> = ds.iter().map(|&d| (d + i) % n).collect();
                pts.sort_unstable();
                pts
            })
            .collect();
        Plane::from_lines(q, &lines)
    }

    /// Builds a plane from an explicit list of lines (each a set of point
    /// indices). Validates all plane axioms.
    pub fn from_lines(q: usize, lines: &[Vec<usize>]) -> Result<Plane, PlaneError> {
        let n = q * q + q + 1;
        if lines.len() != n {
            return Err(PlaneError::AxiomViolation(format!(
                "expected {n} lines, got {}",
                lines.len()
            )));
        }
        let mut line_points: Vec<Vec<PointId>> = Vec::with_capacity(n);
        let mut incidence = vec![false; n * n];
        for (li, pts) in lines.iter().enumerate() {
            let mut sorted: Vec<usize> = pts.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != q + 1 {
                return Err(PlaneError::AxiomViolation(format!(
                    "line {li} has {} distinct points, expected {}",
                    sorted.len(),
                    q + 1
                )));
            }
            for &p in &sorted {
                if p >= n {
                    return Err(PlaneError::IndexOutOfRange(p));
                }
                incidence[p * n + li] = true;
            }
            line_points.push(sorted.into_iter().map(PointId).collect());
        }
        let mut point_lines: Vec<Vec<LineId>> = vec![Vec::new(); n];
        for (li, pts) in line_points.iter().enumerate() {
            for p in pts {
                point_lines[p.0].push(LineId(li));
            }
        }
        for (p, ls) in point_lines.iter().enumerate() {
            if ls.len() != q + 1 {
                return Err(PlaneError::AxiomViolation(format!(
                    "point {p} lies on {} lines, expected {}",
                    ls.len(),
                    q + 1
                )));
            }
        }
        // Two distinct points on exactly one common line, two distinct lines
        // through exactly one common point; fill the meet/join tables as we go.
        let mut meet_table = vec![usize::MAX; n * n];
        let mut join_table = vec![usize::MAX; n * n];
        for l1 in 0..n {
            for l2 in 0..n {
                if l1 == l2 {
                    continue;
                }
                let common: Vec<usize> = line_points[l1]
                    .iter()
                    .filter(|p| incidence[p.0 * n + l2])
                    .map(|p| p.0)
                    .collect();
                if common.len() != 1 {
                    return Err(PlaneError::AxiomViolation(format!(
                        "lines {l1} and {l2} meet in {} points",
                        common.len()
                    )));
                }
                meet_table[l1 * n + l2] = common[0];
            }
        }
        for p1 in 0..n {
            for p2 in 0..n {
                if p1 == p2 {
                    continue;
                }
                let common: Vec<usize> = point_lines[p1]
                    .iter()
                    .filter(|l| incidence[p2 * n + l.0])
                    .map(|l| l.0)
                    .collect();
                if common.len() != 1 {
                    return Err(PlaneError::AxiomViolation(format!(
                        "points {p1} and {p2} lie on {} common lines",
                        common.len()
                    )));
                }
                join_table[p1 * n + p2] = common[0];
            }
        }
        Ok(Plane {
            q,
            line_points,
            point_lines,
            incidence,
            meet_table,
            join_table,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of points (= number of lines) = q²+q+1.
    pub fn size(&self) -> usize {
        self.line_points.len()
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.size()).map(PointId)
    }

    pub fn lines(&self) -> impl Iterator<Item = LineId> {
        (0..self.size()).map(LineId)
    }

    pub fn line_points(&self, l: LineId) -> &[PointId] {
        &self.line_points[l.0]
    }

    pub fn point_lines(&self, p: PointId) -> &[LineId] {
        &self.point_lines[p.0]
    }

    pub fn incident(&self, p: PointId, l: LineId) -> Result<bool, PlaneError> {
        let n = self.size();
        if p.0 >= n {
            return Err(PlaneError::IndexOutOfRange(p.0));
        }
        if l.0 >= n {
            return Err(PlaneError::IndexOutOfRange(l.0));
        }
        Ok(self.incidence[p.0 * n + l.0])
    }

    /// Unchecked incidence lookup for indices known to be valid.
    #[inline]
    pub fn on(&self, p: PointId, l: LineId) -> bool {
        self.incidence[p.0 * self.size() + l.0]
    }

    /// The unique point on both lines.
    pub fn meet(&self, l1: LineId, l2: LineId) -> Result<PointId, PlaneError> {
        if l1 == l2 {
            return Err(PlaneError::EqualLines);
        }
        let n = self.size();
        if l1.0 >= n {
            return Err(PlaneError::IndexOutOfRange(l1.0));
        }
        if l2.0 >= n {
            return Err(PlaneError::IndexOutOfRange(l2.0));
        }
        Ok(PointId(self.meet_table[l1.0 * n + l2.0]))
    }

    /// The unique line through both points.
    pub fn join(&self, p1: PointId, p2: PointId) -> Result<LineId, PlaneError> {
        if p1 == p2 {
            return Err(PlaneError::EqualPoints);
        }
        let n = self.size();
        if p1.0 >= n {
            return Err(PlaneError::IndexOutOfRange(p1.0));
        }
        if p2.0 >= n {
            return Err(PlaneError::IndexOutOfRange(p2.0));
        }
        Ok(LineId(self.join_table[p1.0 * n + p2.0]))
    }

    /// The line with exactly this point set, if any.
    pub fn line_with_points(&self, pts: &[PointId]) -> Option<LineId> {
        let mut sorted: Vec<PointId> = pts.to_vec();
        sorted.sort_unstable();
        self.line_points
            .iter()
            .position(|lp| *lp == sorted)
            .map(LineId)
    }

    pub fn to_json(&self) -> String {
        let doc = PlaneJson {
            q: self.q,
            lines: self
                .line_points
                .iter()
                .map(|pts| pts.iter().map(|p| p.0).collect())
                .collect(),
        };
        serde_json::to_string(&doc).expect("plane serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Plane, PlaneError> {
        let doc: PlaneJson = serde_json::from_str(text)
            .map_err(|e| PlaneError::AxiomViolation(format!("bad JSON: {e}")))?;
        Plane::from_lines(doc.q, &doc.lines)
    }
}

/// On-disk form: lines indexed by position, each line's points sorted.
#[derive(Serialize, Deserialize)]
struct PlaneJson {
    q: usize,
    lines: Vec<Vec<usize>>,
}
