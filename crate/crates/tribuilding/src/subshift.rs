//! The boundary subshift: alphabet of base chambers, transition sets A⁺/A⁻,
//! symbolic partial isometries and the identities connecting them.
//!
//! A letter `(a, b)` with `b ∈ λ(a)` stands for the base chamber
//! `{e, a⁻¹, b}` of a sector. The right-wall transitions are
//! `A⁺_{(a,b)} = {(c,d) : d ∉ λ(b), λ(c) = join(third(a,b), d)}` and the
//! left-wall transitions `A⁻_{(a,b)} = {(c,d) : a ∉ λ(c),
//! d = meet(λ(third(a,b)), λ(c))}`; both have q² members, giving two 0/1
//! transition matrices over the `(q+1)(q²+q+1)` letters. The A⁻ d-rule is
//! derived from the chamber geometry, so the independent extension oracles
//! and shift checks below are the authority for both rows.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::building::is_chamber;
use crate::par;
use crate::plane::PointId;
use crate::presentation::Presentation;
use crate::sector::{ChamberLabel, SectorDiagram, SectorError};
use crate::words::{multiply, reduce, Letter, NormalForm, Shape, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubshiftError {
    #[error("{1} is not an A{0} transition of {2}")]
    NotATransition(char, ChamberLabel, ChamberLabel),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("overlapping supports while merging a formal sum")]
    OverlappingSupports,
    #[error(transparent)]
    Sector(#[from] SectorError),
}

/// All labels `(a, b)` with `b ∈ λ(a)`, lexicographically ordered.
pub fn alphabet(pres: &Presentation) -> Vec<ChamberLabel> {
    let n = pres.size();
    let mut out = Vec::with_capacity((pres.q() + 1) * n);
    for a in 0..n {
        for b in 0..n {
            let (a, b) = (PointId(a), PointId(b));
            if pres.incident(a, b) {
                out.push(ChamberLabel { a, b });
            }
        }
    }
    out
}

/// The q² labels that can follow `l` along the right wall of a sector.
pub fn a_plus(pres: &Presentation, l: ChamberLabel) -> BTreeSet<ChamberLabel> {
    let x = pres.third(l.a, l.b).expect("valid label");
    let mut out = BTreeSet::new();
    for d in pres.plane().points() {
        // d off lambda(b); x lies on lambda(b), so d != x and join is total.
        if pres.plane().on(d, pres.lambda().line(l.b)) {
            continue;
        }
        let line = pres.plane().join(x, d).expect("distinct points");
        let c = pres.lambda().point(line);
        debug_assert!(pres.plane().on(d, pres.lambda().line(c)));
        out.insert(ChamberLabel { a: c, b: d });
    }
    out
}

/// The q² labels that can follow `l` along the left wall of a sector.
pub fn a_minus(pres: &Presentation, l: ChamberLabel) -> BTreeSet<ChamberLabel> {
    let x = pres.third(l.a, l.b).expect("valid label");
    let lx = pres.lambda().line(x);
    let mut out = BTreeSet::new();
    for c in pres.plane().points() {
        // a off lambda(c); a lies on lambda(x), so c != x and meet is total.
        if pres.plane().on(l.a, pres.lambda().line(c)) {
            continue;
        }
        let d = pres
            .plane()
            .meet(lx, pres.lambda().line(c))
            .expect("distinct lines");
        out.insert(ChamberLabel { a: c, b: d });
    }
    out
}

/// Independent geometric oracle for the A⁺ rows: a label `(c,d)` is a valid
/// one-step right-wall extension of `(a,b)` when the three new depth-2
/// vertices have geodesic shapes and the seam down-triangle is a chamber.
/// Uses only the rewriting engine and the chamber test.
pub fn right_extension_labels(pres: &Presentation, l: ChamberLabel) -> BTreeSet<ChamberLabel> {
    let b = NormalForm::single(Letter::positive(l.b));
    let a_inv = NormalForm::single(Letter::negative(l.a));
    alphabet(pres)
        .into_iter()
        .filter(|cand| {
            let v20 = multiply(pres, &b, &NormalForm::single(Letter::positive(cand.b)));
            let v11 = multiply(pres, &b, &NormalForm::single(Letter::negative(cand.a)));
            v20.shape() == Shape { n: 0, m: 2 }
                && v11.shape() == Shape { n: 1, m: 1 }
                && is_chamber(pres, [a_inv.clone(), b.clone(), v11])
        })
        .collect()
}

/// Independent geometric oracle for the A⁻ rows, mirror of
/// [`right_extension_labels`].
pub fn left_extension_labels(pres: &Presentation, l: ChamberLabel) -> BTreeSet<ChamberLabel> {
    let b = NormalForm::single(Letter::positive(l.b));
    let a_inv = NormalForm::single(Letter::negative(l.a));
    alphabet(pres)
        .into_iter()
        .filter(|cand| {
            let v02 = multiply(pres, &a_inv, &NormalForm::single(Letter::negative(cand.a)));
            let v11 = multiply(pres, &a_inv, &NormalForm::single(Letter::positive(cand.b)));
            v02.shape() == Shape { n: 2, m: 0 }
                && v11.shape() == Shape { n: 1, m: 1 }
                && is_chamber(pres, [a_inv.clone(), b.clone(), v11])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

/// A 0/1 transition matrix over the chamber-label alphabet.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub direction: Direction,
    pub labels: Vec<ChamberLabel>,
    entries: Vec<bool>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.dim() + j]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        (0..self.dim()).filter(|&j| self.entry(i, j)).count()
    }

    pub fn column_sum(&self, j: usize) -> usize {
        (0..self.dim()).filter(|&i| self.entry(i, j)).count()
    }

    /// Strong connectivity of the transition digraph: BFS forward and
    /// backward from vertex 0 must reach everything.
    pub fn strongly_connected(&self) -> bool {
        let dim = self.dim();
        if dim == 0 {
            return true;
        }
        let reach = |reverse: bool| {
            let mut seen = vec![false; dim];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(i) = queue.pop_front() {
                for j in 0..dim {
                    let connected = if reverse {
                        self.entry(j, i)
                    } else {
                        self.entry(i, j)
                    };
                    if connected && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(false) && reach(true)
    }

    /// CSV with a header row/column of labels formatted `a^-1:b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(&l.csv_name());
        }
        out.push('\n');
        for i in 0..self.dim() {
            out.push_str(&self.labels[i].csv_name());
            for j in 0..self.dim() {
                out.push(',');
                out.push(if self.entry(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Builds both transition matrices from the A± rows.
pub fn matrices(pres: &Presentation) -> (TransitionMatrix, TransitionMatrix) {
    let labels = alphabet(pres);
    let index: BTreeMap<ChamberLabel, usize> =
        labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let dim = labels.len();
    let rows_plus = par::map_collect(&labels, |&l| a_plus(pres, l));
    let rows_minus = par::map_collect(&labels, |&l| a_minus(pres, l));
    let build = |direction, rows: Vec<BTreeSet<ChamberLabel>>| {
        let mut entries = vec![false; dim * dim];
        for (i, row) in rows.iter().enumerate() {
            for l in row {
                entries[i * dim + index[l]] = true;
            }
        }
        TransitionMatrix {
            direction,
            labels: labels.clone(),
            entries,
        }
    };
    (
        build(Direction::Plus, rows_plus),
        build(Direction::Minus, rows_minus),
    )
}

/// Checks that left multiplication by `b` maps sectors with base `lp` in
/// `A⁺_l` onto sectors with base `l`, via the diagram translation machinery,
/// over `samples` seeded random diagrams of the given depth.
pub fn shift_plus(
    pres: &Presentation,
    l: ChamberLabel,
    lp: ChamberLabel,
    depth: usize,
    samples: u64,
) -> Result<bool, SubshiftError> {
    if !a_plus(pres, l).contains(&lp) {
        return Err(SubshiftError::NotATransition('+', lp, l));
    }
    let b = NormalForm::single(Letter::positive(l.b));
    shift_check(pres, l, lp, &b, depth, samples)
}

/// Minus-direction analogue of [`shift_plus`]: multiplication by `a⁻¹`.
pub fn shift_minus(
    pres: &Presentation,
    l: ChamberLabel,
    lp: ChamberLabel,
    depth: usize,
    samples: u64,
) -> Result<bool, SubshiftError> {
    if !a_minus(pres, l).contains(&lp) {
        return Err(SubshiftError::NotATransition('-', lp, l));
    }
    let a_inv = NormalForm::single(Letter::negative(l.a));
    shift_check(pres, l, lp, &a_inv, depth, samples)
}

fn shift_check(
    pres: &Presentation,
    l: ChamberLabel,
    lp: ChamberLabel,
    g: &NormalForm,
    depth: usize,
    samples: u64,
) -> Result<bool, SubshiftError> {
    use rand::SeedableRng;
    for seed in 0..samples {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = SectorDiagram::random(pres, lp, depth, &mut rng)?;
        let t = crate::sector::translate(pres, g, &d)?;
        if t.cell(0, 0) != l {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A symbol `word · Σ_{ℓ ∈ support} p_ℓ`, or its adjoint when `starred`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IsometrySymbol {
    pub word: NormalForm,
    pub support: BTreeSet<ChamberLabel>,
    pub starred: bool,
}

impl IsometrySymbol {
    pub fn s_plus(pres: &Presentation, l: ChamberLabel) -> IsometrySymbol {
        IsometrySymbol {
            word: NormalForm::single(Letter::positive(l.b)),
            support: a_plus(pres, l),
            starred: false,
        }
    }

    pub fn s_minus(pres: &Presentation, l: ChamberLabel) -> IsometrySymbol {
        IsometrySymbol {
            word: NormalForm::single(Letter::negative(l.a)),
            support: a_minus(pres, l),
            starred: false,
        }
    }

    pub fn projection(l: ChamberLabel) -> IsometrySymbol {
        IsometrySymbol {
            word: NormalForm::identity(),
            support: BTreeSet::from([l]),
            starred: false,
        }
    }

    pub fn starred(mut self) -> IsometrySymbol {
        self.starred = !self.starred;
        self
    }
}

/// A normalized multiset of symbols: unstarred terms with equal words merge
/// by support union, which must be disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalSum {
    terms: Vec<IsometrySymbol>,
}

impl FormalSum {
    pub fn new() -> FormalSum {
        FormalSum::default()
    }

    pub fn add(&mut self, term: IsometrySymbol) -> Result<(), SubshiftError> {
        if term.support.is_empty() {
            return Ok(());
        }
        if !term.starred {
            if let Some(existing) = self
                .terms
                .iter_mut()
                .find(|t| !t.starred && t.word == term.word)
            {
                if !existing.support.is_disjoint(&term.support) {
                    return Err(SubshiftError::OverlappingSupports);
                }
                existing.support.extend(term.support);
                return Ok(());
            }
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn terms(&self) -> &[IsometrySymbol] {
        &self.terms
    }

    /// Canonical term list for equality checks.
    pub fn normalized(&self) -> Vec<IsometrySymbol> {
        let mut t = self.terms.clone();
        t.sort();
        t
    }
}

/// `s⁺_{a⁻¹,b} · s⁻_{c⁻¹,d}`: zero unless `(c,d) ∈ A⁺_{(a,b)}`, otherwise
/// `reduce(b c⁻¹) · Σ_{A⁻_{(c,d)}} p`.
pub fn compose_pm(
    pres: &Presentation,
    l: ChamberLabel,
    lp: ChamberLabel,
) -> Option<IsometrySymbol> {
    if !a_plus(pres, l).contains(&lp) {
        return None;
    }
    let word = reduce(
        pres,
        &Word(vec![Letter::positive(l.b), Letter::negative(lp.a)]),
    );
    Some(IsometrySymbol {
        word,
        support: a_minus(pres, lp),
        starred: false,
    })
}

/// `s⁻_{a⁻¹,b} · s⁺_{g⁻¹,h}`: zero unless `(g,h) ∈ A⁻_{(a,b)}`, otherwise
/// `reduce(a⁻¹ h) · Σ_{A⁺_{(g,h)}} p`.
pub fn compose_mp(
    pres: &Presentation,
    l: ChamberLabel,
    lp: ChamberLabel,
) -> Option<IsometrySymbol> {
    if !a_minus(pres, l).contains(&lp) {
        return None;
    }
    let word = reduce(
        pres,
        &Word(vec![Letter::negative(l.a), Letter::positive(lp.b)]),
    );
    Some(IsometrySymbol {
        word,
        support: a_plus(pres, lp),
        starred: false,
    })
}

/// Both sides of the weak-commutativity identity for a quadruple
/// `(a, b, c, h)` with `b ∈ λ(a)` and `bc⁻¹ = a⁻¹h`.
#[derive(Debug, Clone)]
pub struct WeakCommutativityReport {
    pub lhs: FormalSum,
    pub rhs: FormalSum,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub equal: bool,
}

pub fn weak_commutativity_check(
    pres: &Presentation,
    a: PointId,
    b: PointId,
    c: PointId,
    h: PointId,
) -> Result<WeakCommutativityReport, SubshiftError> {
    if !pres.incident(a, b) {
        return Err(SubshiftError::PreconditionFailed(format!(
            "{b} not on lambda({a})"
        )));
    }
    let bc = reduce(pres, &Word(vec![Letter::positive(b), Letter::negative(c)]));
    let ah = reduce(pres, &Word(vec![Letter::negative(a), Letter::positive(h)]));
    if bc != ah {
        return Err(SubshiftError::PreconditionFailed(format!(
            "b c^-1 = {bc} but a^-1 h = {ah}"
        )));
    }
    let l = ChamberLabel { a, b };
    let mut lhs = FormalSum::new();
    let mut lhs_terms = 0;
    for lp in a_plus(pres, l) {
        if lp.a != c {
            continue;
        }
        let term = compose_pm(pres, l, lp).expect("transition checked");
        lhs.add(term)?;
        lhs_terms += 1;
    }
    let mut rhs = FormalSum::new();
    let mut rhs_terms = 0;
    for lp in a_minus(pres, l) {
        if lp.b != h {
            continue;
        }
        let term = compose_mp(pres, l, lp).expect("transition checked");
        rhs.add(term)?;
        rhs_terms += 1;
    }
    let equal = lhs.normalized() == rhs.normalized();
    Ok(WeakCommutativityReport {
        lhs,
        rhs,
        lhs_terms,
        rhs_terms,
        equal,
    })
}

/// All quadruples `(a, b, c, h)` admissible for weak commutativity: `(a,b)`
/// a label, `c` a first coordinate of `A⁺_{(a,b)}`, and then
/// `h = third(c, third(a,b))` is forced by `bc⁻¹ = a⁻¹h`.
pub fn weak_commutativity_quadruples(
    pres: &Presentation,
) -> Vec<(PointId, PointId, PointId, PointId)> {
    let mut out = Vec::new();
    for l in alphabet(pres) {
        let x = pres.third(l.a, l.b).expect("valid label");
        let cs: BTreeSet<PointId> = a_plus(pres, l).into_iter().map(|lp| lp.a).collect();
        for c in cs {
            let h = pres.third(c, x).expect("x lies on lambda(c) for A+ columns");
            out.push((l.a, l.b, c, h));
        }
    }
    out
}

/// A term of the third family in the generator decomposition:
/// `s⁻_{t⁻¹,f} · s⁺*_{h⁻¹,s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CrossTerm {
    pub t: PointId,
    pub f: PointId,
    pub h: PointId,
    pub s: PointId,
}

/// The three tagged families expressing a generator `b` in terms of the
/// partial isometries, with the partition bookkeeping of the initial and
/// final projections.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub generator: PointId,
    /// `s⁺_{a⁻¹,b}` over the q+1 points `a` with `b ∈ λ(a)`.
    pub family_a: Vec<ChamberLabel>,
    /// `s⁻*_{b⁻¹,k}` over the q+1 points `k ∈ λ(b)`.
    pub family_b: Vec<ChamberLabel>,
    /// `s⁻_{t⁻¹,f} s⁺*_{h⁻¹,s}` over the q²(q+1) admissible quadruples.
    pub family_c: Vec<CrossTerm>,
    pub initial_labels_a: BTreeSet<ChamberLabel>,
    pub initial_labels_b: BTreeSet<ChamberLabel>,
    pub initial_labels_c: BTreeSet<ChamberLabel>,
    pub final_labels_a: BTreeSet<ChamberLabel>,
    pub final_labels_b: BTreeSet<ChamberLabel>,
    pub final_labels_c: BTreeSet<ChamberLabel>,
    pub initial_partition_ok: bool,
    pub final_partition_ok: bool,
}

/// Decomposes the generator `b` into families A, B, C. The initial and
/// final projections of the three families must each partition the
/// alphabet exactly; the flags record whether they do.
pub fn decompose_generator(pres: &Presentation, b: PointId) -> Decomposition {
    let n = pres.size();
    let full: BTreeSet<ChamberLabel> = alphabet(pres).into_iter().collect();

    let mut family_a = Vec::new();
    for a in (0..n).map(PointId) {
        if pres.incident(a, b) {
            family_a.push(ChamberLabel { a, b });
        }
    }
    let mut family_b = Vec::new();
    for k in (0..n).map(PointId) {
        if pres.incident(b, k) {
            family_b.push(ChamberLabel { a: b, b: k });
        }
    }
    let mut family_c = Vec::new();
    for s in (0..n).map(PointId) {
        if !pres.incident(b, s) {
            continue;
        }
        let t = pres.third(b, s).expect("s on lambda(b)");
        for h in (0..n).map(PointId) {
            if h == b || !pres.incident(h, s) {
                continue;
            }
            for f in (0..n).map(PointId) {
                if f == b || !pres.incident(t, f) {
                    continue;
                }
                family_c.push(CrossTerm { t, f, h, s });
            }
        }
    }

    let initial_labels_a: BTreeSet<ChamberLabel> =
        family_a.iter().flat_map(|&l| a_plus(pres, l)).collect();
    let initial_labels_b: BTreeSet<ChamberLabel> = family_b.iter().copied().collect();
    let initial_labels_c: BTreeSet<ChamberLabel> = family_c
        .iter()
        .map(|ct| ChamberLabel { a: ct.h, b: ct.s })
        .collect();
    let final_labels_a: BTreeSet<ChamberLabel> = family_a.iter().copied().collect();
    let final_labels_b: BTreeSet<ChamberLabel> =
        family_b.iter().flat_map(|&l| a_minus(pres, l)).collect();
    let final_labels_c: BTreeSet<ChamberLabel> = family_c
        .iter()
        .map(|ct| ChamberLabel { a: ct.t, b: ct.f })
        .collect();

    let disjoint_and_total =
        |x: &BTreeSet<ChamberLabel>, y: &BTreeSet<ChamberLabel>, z: &BTreeSet<ChamberLabel>| {
            x.is_disjoint(y)
                && x.is_disjoint(z)
                && y.is_disjoint(z)
                && x.len() + y.len() + z.len() == full.len()
                && x.iter().chain(y).chain(z).all(|l| full.contains(l))
        };
    let initial_partition_ok =
        disjoint_and_total(&initial_labels_a, &initial_labels_b, &initial_labels_c);
    let final_partition_ok = disjoint_and_total(&final_labels_a, &final_labels_b, &final_labels_c);

    Decomposition {
        generator: b,
        family_a,
        family_b,
        family_c,
        initial_labels_a,
        initial_labels_b,
        initial_labels_c,
        final_labels_a,
        final_labels_b,
        final_labels_c,
        initial_partition_ok,
        final_partition_ok,
    }
}

impl Decomposition {
    pub fn to_json(&self) -> String {
        let fam = |labels: &[ChamberLabel]| -> Vec<[usize; 2]> {
            labels.iter().map(|l| [l.a.0, l.b.0]).collect()
        };
        let doc = serde_json::json!({
            "generator": self.generator.0,
            "families": {
                "A": fam(&self.family_a),
                "B": fam(&self.family_b),
                "C": self.family_c.iter().map(|c| [c.t.0, c.f.0, c.h.0, c.s.0]).collect::<Vec<_>>(),
            },
            "initial_partition_ok": self.initial_partition_ok,
            "final_partition_ok": self.final_partition_ok,
        });
        serde_json::to_string(&doc).expect("decomposition serialization")
    }
}

/// The 2r×2r transition matrix of the free-group boundary subshift with
/// letter order (a₁, a₁⁻¹, a₂, a₂⁻¹, …): entry 1 unless the column letter
/// is the inverse of the row letter.
pub fn free_group_matrix(rank: usize) -> Vec<Vec<u8>> {
    let dim = 2 * rank;
    (0..dim)
        .map(|i| {
            let inv = i ^ 1;
            (0..dim).map(|j| u8::from(j != inv)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pres() -> Presentation {
        Presentation::canonical_q2()
    }

    fn label(a: usize, b: usize) -> ChamberLabel {
        ChamberLabel {
            a: PointId(a),
            b: PointId(b),
        }
    }

    #[test]
    fn alphabet_sizes() {
        assert_eq!(alphabet(&pres()).len(), 21);
        let p3 = Presentation::canonical_cyclic(3).unwrap();
        assert_eq!(alphabet(&p3).len(), 52);
        assert!(alphabet(&pres()).contains(&label(0, 1)));
    }

    #[test]
    fn a_plus_frozen_example() {
        let p = pres();
        let row = a_plus(&p, label(0, 1));
        let expect: BTreeSet<ChamberLabel> = [label(6, 0), label(6, 1), label(2, 4), label(2, 6)]
            .into_iter()
            .collect();
        assert_eq!(row, expect);
        // Every (c,d) has d off lambda(b).
        for l in row {
            assert!(!p.plane().on(l.b, p.lambda().line(PointId(1))));
        }
    }

    #[test]
    fn a_minus_frozen_example() {
        let p = pres();
        let row = a_minus(&p, label(0, 1));
        let expect: BTreeSet<ChamberLabel> = [label(0, 4), label(1, 5), label(2, 4), label(4, 5)]
            .into_iter()
            .collect();
        assert_eq!(row, expect);
        for l in row {
            assert!(p.incident(l.a, l.b));
        }
    }

    #[test]
    fn row_sums_q2_and_q3() {
        for q in [2usize, 3] {
            let p = Presentation::canonical_cyclic(q).unwrap();
            for l in alphabet(&p) {
                assert_eq!(a_plus(&p, l).len(), q * q, "A+ row {l}");
                assert_eq!(a_minus(&p, l).len(), q * q, "A- row {l}");
            }
        }
    }

    #[test]
    fn rows_match_geometric_extensions() {
        let p = pres();
        for l in alphabet(&p) {
            assert_eq!(a_plus(&p, l), right_extension_labels(&p, l), "A+ {l}");
            assert_eq!(a_minus(&p, l), left_extension_labels(&p, l), "A- {l}");
        }
    }

    #[test]
    fn matrices_row_sums_and_irreducibility() {
        let p = pres();
        let (mp, mm) = matrices(&p);
        assert_eq!(mp.dim(), 21);
        assert_eq!(mm.dim(), 21);
        for i in 0..21 {
            assert_eq!(mp.row_sum(i), 4);
            assert_eq!(mm.row_sum(i), 4);
            // Column regularity is an observation at q=2, asserted as such.
            assert_eq!(mp.column_sum(i), 4);
            assert_eq!(mm.column_sum(i), 4);
        }
        assert!(mp.strongly_connected());
        assert!(mm.strongly_connected());
    }

    #[test]
    fn csv_export_shape() {
        let p = pres();
        let (mp, _) = matrices(&p);
        let csv = mp.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 22);
        assert!(lines[0].starts_with("label,0^-1:1,"));
        assert_eq!(lines[1].split(',').filter(|v| *v == "1").count(), 4);
    }

    #[test]
    fn compose_pm_example() {
        let p = pres();
        let term = compose_pm(&p, label(0, 1), label(6, 0)).unwrap();
        // b c^-1 = a1 a6^-1 = a0^-1 a4.
        let expect = reduce(&p, &Word::parse("0^-1 4").unwrap());
        assert_eq!(term.word, expect);
        assert_eq!(term.support, a_minus(&p, label(6, 0)));
        // Not a transition: zero.
        assert!(compose_pm(&p, label(0, 1), label(0, 4)).is_none());
    }

    #[test]
    fn compose_words_have_shape_1_1() {
        let p = pres();
        for l in alphabet(&p) {
            for lp in a_plus(&p, l) {
                let term = compose_pm(&p, l, lp).unwrap();
                assert_eq!(term.word.shape(), Shape { n: 1, m: 1 });
            }
            for lp in a_minus(&p, l) {
                let term = compose_mp(&p, l, lp).unwrap();
                assert_eq!(term.word.shape(), Shape { n: 1, m: 1 });
            }
        }
    }

    #[test]
    fn weak_commutativity_example() {
        let p = pres();
        let report =
            weak_commutativity_check(&p, PointId(0), PointId(1), PointId(6), PointId(4)).unwrap();
        assert_eq!(report.lhs_terms, 2);
        assert_eq!(report.rhs_terms, 2);
        assert!(report.equal);
        // LHS d's are {0,1}; RHS g's are {0,2}.
        let ds: BTreeSet<PointId> = a_plus(&p, label(0, 1))
            .into_iter()
            .filter(|l| l.a == PointId(6))
            .map(|l| l.b)
            .collect();
        assert_eq!(ds, BTreeSet::from([PointId(0), PointId(1)]));
        let gs: BTreeSet<PointId> = a_minus(&p, label(0, 1))
            .into_iter()
            .filter(|l| l.b == PointId(4))
            .map(|l| l.a)
            .collect();
        assert_eq!(gs, BTreeSet::from([PointId(0), PointId(2)]));
    }

    #[test]
    fn weak_commutativity_bad_h() {
        let p = pres();
        let err = weak_commutativity_check(&p, PointId(0), PointId(1), PointId(6), PointId(5))
            .unwrap_err();
        assert!(matches!(err, SubshiftError::PreconditionFailed(_)));
    }

    #[test]
    fn weak_commutativity_exhaustive() {
        let p = pres();
        let quads = weak_commutativity_quadruples(&p);
        assert_eq!(quads.len(), 21 * 2);
        for (a, b, c, h) in quads {
            let report = weak_commutativity_check(&p, a, b, c, h).unwrap();
            assert_eq!(report.lhs_terms, 2);
            assert_eq!(report.rhs_terms, 2);
            assert!(report.equal, "weak commutativity failed at ({a},{b},{c},{h})");
        }
    }

    #[test]
    fn decomposition_b1() {
        let p = pres();
        let d = decompose_generator(&p, PointId(1));
        let a_pts: BTreeSet<usize> = d.family_a.iter().map(|l| l.a.0).collect();
        assert_eq!(a_pts, BTreeSet::from([0, 4, 6]));
        let b_pts: BTreeSet<usize> = d.family_b.iter().map(|l| l.b.0).collect();
        assert_eq!(b_pts, BTreeSet::from([2, 3, 5]));
        assert_eq!(d.family_c.len(), 12);
        // Frozen sub-example: s = 2 gives t = 4, h in {0,5}, f in {5,6}.
        let s2: Vec<&CrossTerm> = d.family_c.iter().filter(|c| c.s == PointId(2)).collect();
        assert_eq!(s2.len(), 4);
        for ct in &s2 {
            assert_eq!(ct.t, PointId(4));
            assert!([PointId(0), PointId(5)].contains(&ct.h));
            assert!([PointId(5), PointId(6)].contains(&ct.f));
        }
        assert!(d.initial_partition_ok);
        assert!(d.final_partition_ok);
        assert_eq!(d.initial_labels_a.len(), 12);
        assert_eq!(d.initial_labels_b.len(), 3);
        assert_eq!(d.initial_labels_c.len(), 6);
    }

    #[test]
    fn decomposition_all_generators() {
        let p = pres();
        for b in p.plane().points() {
            let d = decompose_generator(&p, b);
            assert_eq!(d.family_a.len(), 3);
            assert_eq!(d.family_b.len(), 3);
            assert_eq!(d.family_c.len(), 12);
            assert!(d.initial_partition_ok, "initial partition at {b}");
            assert!(d.final_partition_ok, "final partition at {b}");
        }
    }

    #[test]
    fn free_group_matrix_rank2() {
        let expect = vec![
            vec![1, 0, 1, 1],
            vec![0, 1, 1, 1],
            vec![1, 1, 1, 0],
            vec![1, 1, 0, 1],
        ];
        assert_eq!(free_group_matrix(2), expect);
        assert_eq!(free_group_matrix(1), vec![vec![1, 0], vec![0, 1]]);
        for row in free_group_matrix(3) {
            assert_eq!(row.iter().map(|&v| v as usize).sum::<usize>(), 5);
        }
    }
}
