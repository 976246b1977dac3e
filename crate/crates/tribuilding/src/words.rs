//! The group Γ = ⟨a_x | a_x a_y a_z = 1⟩: words, reduction to left normal
//! form, multiplication, and Cayley-ball enumeration.
//!
//! Every element has a unique left normal form
//! `x₁⁻¹ x₂⁻¹ … x_n⁻¹ y₁ y₂ … y_m` with no obvious cancellations:
//! `x_i ∉ λ(x_{i+1})`, `y_{j+1} ∉ λ(y_j)`, and `x_n ≠ y₁`. Reduction applies,
//! innermost-leftmost, the rules
//!
//! * R1: `a_x a_x⁻¹ → ε` and `a_x⁻¹ a_x → ε`
//! * R2: `a_x a_y → a_z⁻¹` for `(x,y,z) ∈ T`
//! * R3: `a_x⁻¹ a_y⁻¹ → a_z` for `(y,x,z) ∈ T`
//! * R4: `a_y a_x⁻¹ → a_e⁻¹ a_d` where `c = λ(x) ∧ λ(y)`, `(x,c,d) ∈ T`,
//!   `(y,c,e) ∈ T` (using `a_x⁻¹ = a_c a_d` and `a_y a_c = a_e⁻¹`)
//!
//! R1–R3 shorten the word; R4 keeps the length and moves the single
//! positive-before-negative inversion leftward, so the loop terminates, and
//! it can only stop on a word in left normal form.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::par;
use crate::plane::PointId;
use crate::presentation::Presentation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// A single generator `a_x` or inverse generator `a_x⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub point: PointId,
    pub sign: Sign,
}

impl Letter {
    pub fn positive(point: PointId) -> Letter {
        Letter {
            point,
            sign: Sign::Positive,
        }
    }

    pub fn negative(point: PointId) -> Letter {
        Letter {
            point,
            sign: Sign::Negative,
        }
    }

    pub fn inverse(self) -> Letter {
        Letter {
            point: self.point,
            sign: match self.sign {
                Sign::Positive => Sign::Negative,
                Sign::Negative => Sign::Positive,
            },
        }
    }
}

impl std::fmt::Display for Letter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sign {
            Sign::Positive => write!(f, "{}", self.point.0),
            Sign::Negative => write!(f, "{}^-1", self.point.0),
        }
    }
}

/// An arbitrary word in the generators; no invariants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Word(pub Vec<Letter>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("cannot parse token {0:?}")]
    BadToken(String),
    #[error("point {0} out of range for this presentation")]
    PointOutOfRange(usize),
    #[error("node budget {0} exceeded")]
    BudgetExceeded(usize),
}

impl Word {
    /// Parses the CLI/file syntax: whitespace-separated tokens, `3` for a₃
    /// and `3^-1` for a₃⁻¹. `e` (alone) denotes the empty word.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let trimmed = text.trim();
        if trimmed == "e" || trimmed.is_empty() {
            return Ok(Word(Vec::new()));
        }
        let mut letters = Vec::new();
        for tok in trimmed.split_whitespace() {
            let (core, sign) = match tok.strip_suffix("^-1") {
                Some(core) => (core, Sign::Negative),
                None => (tok, Sign::Positive),
            };
            let point: usize = core
                .parse()
                .map_err(|_| WordError::BadToken(tok.to_string()))?;
            letters.push(Letter {
                point: PointId(point),
                sign,
            });
        }
        Ok(Word(letters))
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, letter) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

/// Shape of an element: `n` steps up the left wall (inverse letters), then
/// `m` steps toward the right wall (positive letters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    pub n: usize,
    pub m: usize,
}

/// A group element in left normal form `x₁⁻¹…x_n⁻¹ y₁…y_m`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalForm {
    xs: Vec<PointId>,
    ys: Vec<PointId>,
}

impl NormalForm {
    pub fn identity() -> NormalForm {
        NormalForm::default()
    }

    /// Builds from parts without reducing; debug-asserts the invariants.
    pub fn from_parts(xs: Vec<PointId>, ys: Vec<PointId>) -> NormalForm {
        NormalForm { xs, ys }
    }

    pub fn is_identity(&self) -> bool {
        self.xs.is_empty() && self.ys.is_empty()
    }

    pub fn xs(&self) -> &[PointId] {
        &self.xs
    }

    pub fn ys(&self) -> &[PointId] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len() + self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn shape(&self) -> Shape {
        Shape {
            n: self.xs.len(),
            m: self.ys.len(),
        }
    }

    /// The element as a plain word (inverse part then positive part).
    pub fn render(&self) -> Word {
        let mut letters = Vec::with_capacity(self.len());
        letters.extend(self.xs.iter().map(|&x| Letter::negative(x)));
        letters.extend(self.ys.iter().map(|&y| Letter::positive(y)));
        Word(letters)
    }

    pub fn single(letter: Letter) -> NormalForm {
        match letter.sign {
            Sign::Positive => NormalForm {
                xs: vec![],
                ys: vec![letter.point],
            },
            Sign::Negative => NormalForm {
                xs: vec![letter.point],
                ys: vec![],
            },
        }
    }

    /// Checks the three normal-form constraints against a presentation.
    pub fn satisfies_constraints(&self, pres: &Presentation) -> bool {
        for w in self.xs.windows(2) {
            if pres.plane().on(w[0], pres.lambda().line(w[1])) {
                return false;
            }
        }
        for w in self.ys.windows(2) {
            if pres.plane().on(w[1], pres.lambda().line(w[0])) {
                return false;
            }
        }
        if let (Some(&xn), Some(&y1)) = (self.xs.last(), self.ys.first()) {
            if xn == y1 {
                return false;
            }
        }
        true
    }
}

impl std::fmt::Display for NormalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Where a rewrite applies and which rule it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    R1,
    R2,
    R3,
    R4,
}

fn applicable_rule(pres: &Presentation, a: Letter, b: Letter) -> Option<Rule> {
    match (a.sign, b.sign) {
        (Sign::Positive, Sign::Negative) => {
            if a.point == b.point {
                Some(Rule::R1)
            } else {
                Some(Rule::R4)
            }
        }
        (Sign::Negative, Sign::Positive) => (a.point == b.point).then_some(Rule::R1),
        (Sign::Positive, Sign::Positive) => pres.third(a.point, b.point).map(|_| Rule::R2),
        (Sign::Negative, Sign::Negative) => pres.third(b.point, a.point).map(|_| Rule::R3),
    }
}

/// Applies `rule` to the pair at `i`, editing the letter vector in place.
fn apply_rule(pres: &Presentation, letters: &mut Vec<Letter>, i: usize, rule: Rule) {
    let a = letters[i];
    let b = letters[i + 1];
    match rule {
        Rule::R1 => {
            letters.drain(i..i + 2);
        }
        Rule::R2 => {
            let z = pres.third(a.point, b.point).expect("R2 precondition");
            letters.splice(i..i + 2, [Letter::negative(z)]);
        }
        Rule::R3 => {
            let z = pres.third(b.point, a.point).expect("R3 precondition");
            letters.splice(i..i + 2, [Letter::positive(z)]);
        }
        Rule::R4 => {
            let (y, x) = (a.point, b.point);
            let c = pres
                .plane()
                .meet(pres.lambda().line(x), pres.lambda().line(y))
                .expect("distinct points have distinct lambda lines");
            let d = pres.third(x, c).expect("c lies on lambda(x)");
            let e = pres.third(y, c).expect("c lies on lambda(y)");
            letters.splice(i..i + 2, [Letter::negative(e), Letter::positive(d)]);
        }
    }
}

/// Reduces a word to the left normal form of the element it represents.
pub fn reduce(pres: &Presentation, word: &Word) -> NormalForm {
    let mut letters = word.0.clone();
    let mut i = 0;
    while i + 1 < letters.len() {
        match applicable_rule(pres, letters[i], letters[i + 1]) {
            Some(rule) => {
                apply_rule(pres, &mut letters, i, rule);
                i = i.saturating_sub(1);
            }
            None => i += 1,
        }
    }
    let split = letters
        .iter()
        .position(|l| l.sign == Sign::Positive)
        .unwrap_or(letters.len());
    let nf = NormalForm {
        xs: letters[..split].iter().map(|l| l.point).collect(),
        ys: letters[split..].iter().map(|l| l.point).collect(),
    };
    debug_assert!(
        letters[split..].iter().all(|l| l.sign == Sign::Positive),
        "positive-before-negative survived reduction"
    );
    debug_assert!(nf.satisfies_constraints(pres));
    nf
}

/// Reduction with a randomised strategy: at each step one applicable redex
/// is chosen at random. Used to exercise confluence of R1–R4.
pub fn reduce_with_random_strategy(
    pres: &Presentation,
    word: &Word,
    rng: &mut impl rand::Rng,
) -> NormalForm {
    let mut letters = word.0.clone();
    loop {
        let redexes: Vec<(usize, Rule)> = (0..letters.len().saturating_sub(1))
            .filter_map(|i| applicable_rule(pres, letters[i], letters[i + 1]).map(|r| (i, r)))
            .collect();
        if redexes.is_empty() {
            break;
        }
        let (i, rule) = redexes[rng.random_range(0..redexes.len())];
        apply_rule(pres, &mut letters, i, rule);
    }
    let split = letters
        .iter()
        .position(|l| l.sign == Sign::Positive)
        .unwrap_or(letters.len());
    NormalForm {
        xs: letters[..split].iter().map(|l| l.point).collect(),
        ys: letters[split..].iter().map(|l| l.point).collect(),
    }
}

/// Normal form of `g·h`.
pub fn multiply(pres: &Presentation, g: &NormalForm, h: &NormalForm) -> NormalForm {
    let mut letters = g.render().0;
    letters.extend(h.render().0);
    reduce(pres, &Word(letters))
}

/// Normal form of `g·ℓ` for a single letter; the ball search hot path.
pub fn multiply_letter(pres: &Presentation, g: &NormalForm, letter: Letter) -> NormalForm {
    let mut letters = g.render().0;
    letters.push(letter);
    reduce(pres, &Word(letters))
}

/// Normal form of `g⁻¹`. The reversed-inverted word of a left normal form
/// is again a left normal form (the two wall constraints swap roles and the
/// junction condition is symmetric), so this is a plain swap.
pub fn inverse(pres: &Presentation, g: &NormalForm) -> NormalForm {
    let xs: Vec<PointId> = g.ys().iter().rev().copied().collect();
    let ys: Vec<PointId> = g.xs().iter().rev().copied().collect();
    let out = NormalForm::from_parts(xs, ys);
    debug_assert!(out.satisfies_constraints(pres));
    out
}

/// All `2(q²+q+1)` letters of the presentation, positives first.
pub fn all_letters(pres: &Presentation) -> Vec<Letter> {
    let n = pres.size();
    let mut out = Vec::with_capacity(2 * n);
    out.extend((0..n).map(|x| Letter::positive(PointId(x))));
    out.extend((0..n).map(|x| Letter::negative(PointId(x))));
    out
}

/// The ball of radius `R` in the Cayley graph, grouped by word length, with
/// a census of elements per shape.
#[derive(Debug)]
pub struct Ball {
    /// `levels[k]` = all elements of length `k`, sorted.
    pub levels: Vec<Vec<NormalForm>>,
    /// Element count per shape `(n, m)`.
    pub census: BTreeMap<(usize, usize), u64>,
}

impl Ball {
    pub fn sphere_size(&self, k: usize) -> usize {
        self.levels.get(k).map_or(0, |l| l.len())
    }

    pub fn elements(&self) -> impl Iterator<Item = &NormalForm> {
        self.levels.iter().flatten()
    }
}

/// BFS over normal forms by right multiplication with every letter.
///
/// `budget` caps the total number of elements; exceeding it is an error.
pub fn ball(pres: &Presentation, radius: usize, budget: Option<usize>) -> Result<Ball, WordError> {
    let letters = all_letters(pres);
    let mut levels: Vec<Vec<NormalForm>> = vec![vec![NormalForm::identity()]];
    let mut seen: HashSet<NormalForm> = HashSet::new();
    seen.insert(NormalForm::identity());
    let mut total = 1usize;
    for k in 0..radius {
        let frontier = &levels[k];
        let mut next: Vec<NormalForm> = par::flat_map_collect(frontier, |g| {
            letters
                .iter()
                .map(|&l| multiply_letter(pres, g, l))
                .filter(|h| h.len() == k + 1)
                .collect()
        });
        next.sort_unstable();
        next.dedup();
        next.retain(|h| !seen.contains(h));
        total += next.len();
        if let Some(cap) = budget {
            if total > cap {
                return Err(WordError::BudgetExceeded(cap));
            }
        }
        seen.extend(next.iter().cloned());
        levels.push(next);
    }
    let mut census = BTreeMap::new();
    for level in &levels {
        for g in level {
            let s = g.shape();
            *census.entry((s.n, s.m)).or_insert(0u64) += 1;
        }
    }
    Ok(Ball { levels, census })
}

/// Closed-form count of normal forms of shape `(n, m)` at order `q`:
/// `(q²+q+1)(q²+q)·q^{2(n+m−2)}` for `n,m ≥ 1`, and
/// `(q²+q+1)·q^{2(k−1)}` for a single nonzero part of length `k`.
pub fn census_closed_form(q: u64, n: usize, m: usize) -> u64 {
    let p = q * q + q + 1;
    match (n, m) {
        (0, 0) => 1,
        (k, 0) | (0, k) => p * q.pow(2 * (k as u32 - 1)),
        (n, m) => p * (p - 1) * q.pow(2 * (n as u32 + m as u32 - 2)),
    }
}
