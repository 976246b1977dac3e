//! Triangle presentations: rotation-closed triple sets compatible with a
//! point–line correspondence λ.
//!
//! A triple set `T` is compatible with λ when (i) a pair `(x,y)` has a third
//! element exactly if `y ∈ λ(x)`, (ii) `T` is closed under cyclic rotation,
//! and (iii) the third element is unique. The group defined by the relations
//! `a_x a_y a_z = 1`, `(x,y,z) ∈ T`, acts simply transitively on the vertices
//! of a triangle building; everything downstream of this module works with
//! the `third` lookup built here.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::plane::{LineId, Plane, PlaneError, PointId};

/// An ordered triple of points. Cyclic rotations are distinct values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple(pub PointId, pub PointId, pub PointId);

impl Triple {
    pub fn rotated(self) -> Triple {
        Triple(self.1, self.2, self.0)
    }

    /// Lexicographically least among the three rotations.
    pub fn canonical_rotation(self) -> Triple {
        let r1 = self.rotated();
        let r2 = r1.rotated();
        self.min(r1).min(r2)
    }
}

/// A bijective point–line correspondence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lambda {
    map: Vec<LineId>,
    inv: Vec<PointId>,
}

impl Lambda {
    pub fn new(map: Vec<LineId>) -> Result<Lambda, PlaneError> {
        let n = map.len();
        let mut inv = vec![usize::MAX; n];
        for (p, l) in map.iter().enumerate() {
            if l.0 >= n {
                return Err(PlaneError::IndexOutOfRange(l.0));
            }
            if inv[l.0] != usize::MAX {
                return Err(PlaneError::AxiomViolation(format!(
                    "lambda not injective at line {}",
                    l.0
                )));
            }
            inv[l.0] = p;
        }
        Ok(Lambda {
            map,
            inv: inv.into_iter().map(PointId).collect(),
        })
    }

    pub fn identity(n: usize) -> Lambda {
        Lambda {
            map: (0..n).map(LineId).collect(),
            inv: (0..n).map(PointId).collect(),
        }
    }

    #[inline]
    pub fn line(&self, p: PointId) -> LineId {
        self.map[p.0]
    }

    #[inline]
    pub fn point(&self, l: LineId) -> PointId {
        self.inv[l.0]
    }

    pub fn as_slice(&self) -> &[LineId] {
        &self.map
    }
}

/// One axiom violation found by [`Presentation::verify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// (i), forward: a triple sits on a pair that is not incident.
    TripleOnNonIncidentPair(Triple),
    /// (i), backward: an incident pair has no triple.
    IncidentPairWithoutThird(PointId, PointId),
    /// (ii): a triple whose rotation is missing.
    NotRotationClosed(Triple),
    /// (iii): a pair with two distinct thirds.
    AmbiguousThird(PointId, PointId, PointId, PointId),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::TripleOnNonIncidentPair(t) => {
                write!(f, "(i): triple ({},{},{}) but {} not in lambda({})", t.0, t.1, t.2, t.1, t.0)
            }
            Violation::IncidentPairWithoutThird(x, y) => {
                write!(f, "(i): incident pair ({x},{y}) has no triple")
            }
            Violation::NotRotationClosed(t) => {
                write!(f, "(ii): ({},{},{}) present but rotation missing", t.0, t.1, t.2)
            }
            Violation::AmbiguousThird(x, y, z1, z2) => {
                write!(f, "(iii): pair ({x},{y}) has thirds {z1} and {z2}")
            }
        }
    }
}

/// Outcome of checking the three presentation axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A plane, a correspondence λ and a triple set, plus derived lookups.
///
/// The triple set is stored exactly as given (rotation closure is an axiom to
/// check, not a structural guarantee); `third` is O(1) via a pair table.
#[derive(Debug, Clone)]
pub struct Presentation {
    plane: Plane,
    lambda: Lambda,
    triples: BTreeSet<Triple>,
    // pair (x,y) -> thirds seen (usually 0 or 1)
    by_pair: Vec<Vec<PointId>>,
}

impl Presentation {
    pub fn new(plane: Plane, lambda: Lambda, triples: Vec<Triple>) -> Presentation {
        let n = plane.size();
        let triples: BTreeSet<Triple> = triples.into_iter().collect();
        let mut by_pair = vec![Vec::new(); n * n];
        for t in &triples {
            by_pair[t.0 .0 * n + t.1 .0].push(t.2);
        }
        Presentation {
            plane,
            lambda,
            triples,
            by_pair,
        }
    }

    /// The canonical q = 2 presentation: all rotations of `(i, i+1, i+3)`
    /// mod 7 over the Fano plane, with λ(i) = {i+1, i+2, i+4}.
    pub fn canonical_q2() -> Presentation {
        Presentation::canonical_cyclic(2).expect("q=2 canonical presentation is built in")
    }

    /// Cyclic presentations over the built-in difference-set planes.
    ///
    /// For q = 2 the triples are the rotations of `(i, i+1, i+3)` mod 7; for
    /// q = 3 the rotations of `(i, i+1, i+4)` mod 13 together with the fixed
    /// triples `(i, i, i)`. In both cases λ is the identity correspondence
    /// onto the difference-set lines, and `verify()` passes.
    pub fn canonical_cyclic(q: usize) -> Result<Presentation, PlaneError> {
        let plane = Plane::build(q, None)?;
        let n = plane.size();
        let lambda = Lambda::identity(n);
        let mut triples = Vec::new();
        match q {
            2 => {
                for i in 0..n {
                    let t = Triple(PointId(i), PointId((i + 1) % n), PointId((i + 3) % n));
                    triples.push(t);
                    triples.push(t.rotated());
                    triples.push(t.rotated().rotated());
                }
            }
            3 => {
                for i in 0..n {
                    let t = Triple(PointId(i), PointId((i + 1) % n), PointId((i + 4) % n));
                    triples.push(t);
                    triples.push(t.rotated());
                    triples.push(t.rotated().rotated());
                    triples.push(Triple(PointId(i), PointId(i), PointId(i)));
                }
            }
            other => return Err(PlaneError::UnsupportedOrder(other)),
        }
        let pres = Presentation::new(plane, lambda, triples);
        debug_assert!(pres.verify().ok());
        Ok(pres)
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn q(&self) -> usize {
        self.plane.q()
    }

    /// Number of points = number of generators.
    pub fn size(&self) -> usize {
        self.plane.size()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    /// `y ∈ λ(x)`: whether the pair can start a triple / the pair of
    /// neighbours `x⁻¹`, `y` spans a chamber.
    #[inline]
    pub fn incident(&self, x: PointId, y: PointId) -> bool {
        self.plane.on(y, self.lambda.line(x))
    }

    /// The unique `z` with `(x,y,z) ∈ T`, when the pair is incident and the
    /// presentation is valid.
    #[inline]
    pub fn third(&self, x: PointId, y: PointId) -> Option<PointId> {
        let thirds = &self.by_pair[x.0 * self.size() + y.0];
        if thirds.len() == 1 {
            Some(thirds[0])
        } else {
            None
        }
    }

    /// Checks axioms (i)–(iii); violations are data, not errors.
    pub fn verify(&self) -> VerifyReport {
        let n = self.size();
        let mut violations = Vec::new();
        for t in &self.triples {
            if !self.incident(t.0, t.1) {
                violations.push(Violation::TripleOnNonIncidentPair(*t));
            }
            if !self.triples.contains(&t.rotated()) {
                violations.push(Violation::NotRotationClosed(*t));
            }
        }
        for x in 0..n {
            for y in 0..n {
                let thirds = &self.by_pair[x * n + y];
                if thirds.len() > 1 {
                    violations.push(Violation::AmbiguousThird(
                        PointId(x),
                        PointId(y),
                        thirds[0],
                        thirds[1],
                    ));
                }
                if self.incident(PointId(x), PointId(y)) && thirds.is_empty() {
                    violations.push(Violation::IncidentPairWithoutThird(PointId(x), PointId(y)));
                }
            }
        }
        VerifyReport { violations }
    }

    /// One canonical rotation per orbit, sorted.
    pub fn canonical_triples(&self) -> Vec<Triple> {
        let set: BTreeSet<Triple> = self.triples.iter().map(|t| t.canonical_rotation()).collect();
        set.into_iter().collect()
    }

    pub fn to_json(&self) -> String {
        let doc = PresentationJson {
            q: self.q(),
            lambda: self.lambda.as_slice().iter().map(|l| l.0).collect(),
            triples: self
                .canonical_triples()
                .into_iter()
                .map(|t| [t.0 .0, t.1 .0, t.2 .0])
                .collect(),
        };
        serde_json::to_string(&doc).expect("presentation serialization cannot fail")
    }

    /// Loads a presentation over the built-in plane of the stored order,
    /// re-closing the stored canonical rotations under rotation.
    pub fn from_json(text: &str) -> Result<Presentation, PlaneError> {
        let doc: PresentationJson = serde_json::from_str(text)
            .map_err(|e| PlaneError::AxiomViolation(format!("bad JSON: {e}")))?;
        let plane = Plane::build(doc.q, None)?;
        let lambda = Lambda::new(doc.lambda.into_iter().map(LineId).collect())?;
        let mut triples = Vec::new();
        for [x, y, z] in doc.triples {
            let t = Triple(PointId(x), PointId(y), PointId(z));
            triples.push(t);
            triples.push(t.rotated());
            triples.push(t.rotated().rotated());
        }
        Ok(Presentation::new(plane, lambda, triples))
    }
}

#[derive(Serialize, Deserialize)]
struct PresentationJson {
    q: usize,
    lambda: Vec<usize>,
    triples: Vec<[usize; 3]>,
}

/// Result of [`enumerate`]: the presentations found, and whether the search
/// stopped early because it hit `limit`.
#[derive(Debug)]
pub struct Enumeration {
    pub presentations: Vec<Presentation>,
    pub truncated: bool,
}

/// Backtracking search for all triple sets compatible with `lambda`.
///
/// Incident pairs are processed in lexicographic order and candidate thirds
/// in increasing order, so the output order is deterministic. Each choice of
/// `z` for a pair `(x,y)` commits the rotations `(y,z) -> x` and `(z,x) -> y`
/// as well, which prunes on axioms (ii) and (iii) as the search descends.
pub fn enumerate(plane: &Plane, lambda: &Lambda, limit: Option<usize>) -> Enumeration {
    let n = plane.size();
    let incident = |x: usize, y: usize| plane.on(PointId(y), lambda.line(PointId(x)));
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if incident(x, y) {
                pairs.push((x, y));
            }
        }
    }
    let mut assignment: Vec<Option<usize>> = vec![None; n * n];
    let mut found = Vec::new();
    // Search for one result beyond the cap: `truncated` is then exact.
    let overshoot = limit.map(|cap| cap + 1);

    // Assigning pair -> z also assigns the two rotated pairs; returns the
    // pairs actually written so the caller can undo them.
    fn assign(
        assignment: &mut [Option<usize>],
        n: usize,
        entries: &[(usize, usize, usize)],
    ) -> Option<Vec<usize>> {
        let mut written = Vec::new();
        for &(a, b, c) in entries {
            let idx = a * n + b;
            match assignment[idx] {
                None => {
                    assignment[idx] = Some(c);
                    written.push(idx);
                }
                Some(existing) if existing == c => {}
                Some(_) => {
                    for idx in written {
                        assignment[idx] = None;
                    }
                    return None;
                }
            }
        }
        Some(written)
    }

    fn search(
        pairs: &[(usize, usize)],
        next: usize,
        n: usize,
        incident: &dyn Fn(usize, usize) -> bool,
        assignment: &mut Vec<Option<usize>>,
        found: &mut Vec<Vec<(usize, usize, usize)>>,
        limit: Option<usize>,
    ) {
        if let Some(cap) = limit {
            if found.len() >= cap {
                return;
            }
        }
        let Some(&(x, y)) = pairs.get(next) else {
            let triples: Vec<(usize, usize, usize)> = pairs
                .iter()
                .map(|&(a, b)| (a, b, assignment[a * n + b].expect("all pairs assigned")))
                .collect();
            found.push(triples);
            return;
        };
        if assignment[x * n + y].is_some() {
            search(pairs, next + 1, n, incident, assignment, found, limit);
            return;
        }
        for z in 0..n {
            // (x,y,z) needs (y,z) and (z,x) incident so that the rotations
            // are legal triples under axiom (i).
            if !incident(y, z) || !incident(z, x) {
                continue;
            }
            let entries = [(x, y, z), (y, z, x), (z, x, y)];
            if let Some(written) = assign(assignment, n, &entries) {
                search(pairs, next + 1, n, incident, assignment, found, limit);
                for idx in written {
                    assignment[idx] = None;
                }
                if let Some(cap) = limit {
                    if found.len() >= cap {
                        return;
                    }
                }
            }
        }
    }

    let mut raw = Vec::new();
    search(&pairs, 0, n, &incident, &mut assignment, &mut raw, overshoot);
    let truncated = match limit {
        Some(cap) if raw.len() > cap => {
            raw.truncate(cap);
            true
        }
        _ => false,
    };
    for triple_list in raw {
        let triples = triple_list
            .into_iter()
            .map(|(x, y, z)| Triple(PointId(x), PointId(y), PointId(z)))
            .collect();
        found.push(Presentation::new(plane.clone(), lambda.clone(), triples));
    }
    Enumeration {
        presentations: found,
        truncated,
    }
}
