//! Local structure of the building: chambers, vertex residues, hexagons,
//! galleries and types.
//!
//! The chambers are the sets `{g, g·a_x⁻¹, g·a_y}` with `third(x,y)` defined.
//! The neighbours of a vertex form the incidence graph of a projective plane
//! (points are generator neighbours, lines inverse-generator neighbours), and
//! the type homomorphism τ sends every generator to 1 mod 3.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::plane::PointId;
use crate::presentation::Presentation;
use crate::words::{inverse, multiply, reduce, Letter, NormalForm, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildingError {
    #[error("vertices do not span a chamber")]
    NotAChamber,
    #[error("gallery step {0}: chambers do not share an edge")]
    NotAdjacent(usize),
    #[error("chamber outside the materialised ball")]
    ChamberOutsideBall,
}

/// Type of a vertex: τ(g) = (m − n) mod 3 for shape (n, m).
pub fn vertex_type(g: &NormalForm) -> u8 {
    let s = g.shape();
    (((s.m % 3) + 3 - (s.n % 3)) % 3) as u8
}

/// A chamber `{base, base·a_left⁻¹, base·a_right}`, stored with the type-0
/// vertex as base so that equal vertex sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chamber {
    base: NormalForm,
    left: PointId,
    right: PointId,
}

impl Chamber {
    /// Builds from any base-vertex representation, rotating so the base has
    /// type 0. Requires `third(left, right)` to exist.
    pub fn new(
        pres: &Presentation,
        base: NormalForm,
        left: PointId,
        right: PointId,
    ) -> Result<Chamber, BuildingError> {
        let z = pres.third(left, right).ok_or(BuildingError::NotAChamber)?;
        // Based at g·a_x⁻¹ the chamber reads (z, x); based at g·a_y it reads
        // (y, z). Rotate to the unique type-0 vertex.
        let (base, left, right) = match vertex_type(&base) {
            0 => (base, left, right),
            1 => {
                let new_base = multiply(pres, &base, &NormalForm::single(Letter::negative(left)));
                (new_base, z, left)
            }
            _ => {
                let new_base = multiply(pres, &base, &NormalForm::single(Letter::positive(right)));
                (new_base, right, z)
            }
        };
        debug_assert_eq!(vertex_type(&base), 0);
        Ok(Chamber { base, left, right })
    }

    /// Reconstructs a chamber from its vertex set, if the three vertices
    /// span one.
    pub fn from_vertices(
        pres: &Presentation,
        verts: [NormalForm; 3],
    ) -> Result<Chamber, BuildingError> {
        for i in 0..3 {
            let g = &verts[i];
            let others: Vec<&NormalForm> = (0..3).filter(|&j| j != i).map(|j| &verts[j]).collect();
            let g_inv = inverse(pres, g);
            for (a, b) in [(others[0], others[1]), (others[1], others[0])] {
                let da = multiply(pres, &g_inv, a);
                let db = multiply(pres, &g_inv, b);
                if da.xs().len() == 1 && da.ys().is_empty() && db.ys().len() == 1 && db.xs().is_empty()
                {
                    let x = da.xs()[0];
                    let y = db.ys()[0];
                    if pres.third(x, y).is_some() {
                        return Chamber::new(pres, g.clone(), x, y);
                    }
                }
            }
        }
        Err(BuildingError::NotAChamber)
    }

    pub fn base(&self) -> &NormalForm {
        &self.base
    }

    pub fn left(&self) -> PointId {
        self.left
    }

    pub fn right(&self) -> PointId {
        self.right
    }

    /// The three vertices: base, base·a_left⁻¹, base·a_right.
    pub fn vertices(&self, pres: &Presentation) -> [NormalForm; 3] {
        [
            self.base.clone(),
            multiply(pres, &self.base, &NormalForm::single(Letter::negative(self.left))),
            multiply(pres, &self.base, &NormalForm::single(Letter::positive(self.right))),
        ]
    }

    /// Vertices shared with another chamber.
    pub fn shared_vertices(&self, pres: &Presentation, other: &Chamber) -> Vec<NormalForm> {
        let mine = self.vertices(pres);
        let theirs = other.vertices(pres);
        mine.into_iter().filter(|v| theirs.contains(v)).collect()
    }

    /// All chambers sharing an edge with this one: q per edge.
    pub fn neighbors(&self, pres: &Presentation) -> Vec<Chamber> {
        let verts = self.vertices(pres);
        let mut out = Vec::new();
        for i in 0..3 {
            for j in (i + 1)..3 {
                for v in edge_completions(pres, &verts[i], &verts[j]) {
                    if verts.contains(&v) {
                        continue;
                    }
                    let c = Chamber::from_vertices(pres, [verts[i].clone(), verts[j].clone(), v])
                        .expect("completion spans a chamber");
                    out.push(c);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Whether three vertices span a chamber of the building.
pub fn is_chamber(pres: &Presentation, verts: [NormalForm; 3]) -> bool {
    Chamber::from_vertices(pres, verts).is_ok()
}

/// The `q+1` vertices completing the edge `{u, w}` to a chamber.
///
/// Requires `u` and `w` to be adjacent; completions are found by scanning the
/// letters at `u` and testing the chamber condition directly.
pub fn edge_completions(pres: &Presentation, u: &NormalForm, w: &NormalForm) -> Vec<NormalForm> {
    let mut out = Vec::new();
    for letter in crate::words::all_letters(pres) {
        let v = multiply(pres, u, &NormalForm::single(letter));
        if v == *w {
            continue;
        }
        if is_chamber(pres, [u.clone(), w.clone(), v.clone()]) {
            out.push(v);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// All chambers containing the vertex `g`; count (q+1)(q²+q+1).
///
/// The vertex is tried in all three roles and the results are deduplicated
/// by vertex set, which is a consistency check on the rotation bookkeeping.
pub fn chambers_at(pres: &Presentation, g: &NormalForm) -> Vec<Chamber> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let n = pres.size();
    for x in 0..n {
        for y in 0..n {
            let (x, y) = (PointId(x), PointId(y));
            if pres.third(x, y).is_none() {
                continue;
            }
            // g as base; g as left vertex (base = g·a_x); g as right vertex
            // (base = g·a_y⁻¹).
            let bases = [
                g.clone(),
                multiply(pres, g, &NormalForm::single(Letter::positive(x))),
                multiply(pres, g, &NormalForm::single(Letter::negative(y))),
            ];
            for base in bases {
                let c = Chamber::new(pres, base, x, y).expect("incident pair spans a chamber");
                if seen.insert(c.clone()) {
                    out.push(c);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// The incidence graph of the residue of `g`: vertices `g·a_x` (points) and
/// `g·a_x⁻¹` (lines), edges where the two vertices are adjacent in the
/// Cayley graph.
#[derive(Debug, Clone)]
pub struct ResidueGraph {
    /// Point vertices then line vertices, each in generator order.
    pub vertices: Vec<NormalForm>,
    /// Human-readable vertex labels, same order.
    pub labels: Vec<String>,
    /// Edges as index pairs (point index, line index), sorted.
    pub edges: Vec<(usize, usize)>,
}

pub fn residue_graph(pres: &Presentation, g: &NormalForm) -> ResidueGraph {
    let n = pres.size();
    let mut vertices = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for x in 0..n {
        vertices.push(multiply(pres, g, &NormalForm::single(Letter::positive(PointId(x)))));
        labels.push(format!("{x}"));
    }
    for x in 0..n {
        vertices.push(multiply(pres, g, &NormalForm::single(Letter::negative(PointId(x)))));
        labels.push(format!("{x}^-1"));
    }
    let mut edges = Vec::new();
    // Adjacency is decided geometrically: u⁻¹v must be a single letter.
    for py in 0..n {
        for lx in 0..n {
            let u = &vertices[n + lx];
            let v = &vertices[py];
            let d = multiply(pres, &inverse(pres, u), v);
            if d.len() == 1 {
                edges.push((py, n + lx));
            }
        }
    }
    edges.sort_unstable();
    ResidueGraph {
        vertices,
        labels,
        edges,
    }
}

impl ResidueGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    /// All 6-cycles, each listed once: v₀ minimal, and v₁ < v₅ to fix the
    /// direction.
    pub fn hexagons(&self) -> Vec<[usize; 6]> {
        let adj = self.adjacency();
        let n = self.vertices.len();
        let mut found = Vec::new();

        fn dfs(adj: &[Vec<usize>], start: usize, path: &mut Vec<usize>, found: &mut Vec<[usize; 6]>) {
            let last = *path.last().unwrap();
            if path.len() == 6 {
                if adj[last].contains(&start) && path[1] < path[5] {
                    found.push([path[0], path[1], path[2], path[3], path[4], path[5]]);
                }
                return;
            }
            for &next in &adj[last] {
                if next <= start || path.contains(&next) {
                    continue;
                }
                path.push(next);
                dfs(adj, start, path, found);
                path.pop();
            }
        }

        let mut path = Vec::with_capacity(6);
        for start in 0..n {
            path.clear();
            path.push(start);
            dfs(&adj, start, &mut path, &mut found);
        }
        found
    }

    pub fn hexagon_count(&self) -> usize {
        self.hexagons().len()
    }

    /// DOT rendering with stable vertex order.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph residue {\n");
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("  v{i} [label=\"{label}\"];\n"));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// A sequence of pairwise-adjacent chambers.
#[derive(Debug, Clone)]
pub struct Gallery(pub Vec<Chamber>);

impl Gallery {
    pub fn len(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn validate(&self, pres: &Presentation) -> Result<(), BuildingError> {
        for (k, pair) in self.0.windows(2).enumerate() {
            if pair[0].shared_vertices(pres, &pair[1]).len() != 2 {
                return Err(BuildingError::NotAdjacent(k + 1));
            }
        }
        Ok(())
    }

    /// The type sequence: label `i` at step `k` when the non-shared vertices
    /// of the two chambers both have type `i`.
    pub fn gallery_type(&self, pres: &Presentation) -> Result<Vec<u8>, BuildingError> {
        self.validate(pres)?;
        let mut labels = Vec::new();
        for (k, pair) in self.0.windows(2).enumerate() {
            let shared = pair[0].shared_vertices(pres, &pair[1]);
            let t0 = pair[0]
                .vertices(pres)
                .into_iter()
                .find(|v| !shared.contains(v))
                .map(|v| vertex_type(&v));
            let t1 = pair[1]
                .vertices(pres)
                .into_iter()
                .find(|v| !shared.contains(v))
                .map(|v| vertex_type(&v));
            match (t0, t1) {
                (Some(a), Some(b)) if a == b => labels.push(a),
                _ => return Err(BuildingError::NotAdjacent(k + 1)),
            }
        }
        Ok(labels)
    }

    /// Whether the gallery realises the chamber-graph distance from its
    /// first chamber to its last.
    pub fn is_stretched(&self, pres: &Presentation) -> Result<bool, BuildingError> {
        self.validate(pres)?;
        let (Some(first), Some(last)) = (self.0.first(), self.0.last()) else {
            return Ok(true);
        };
        let dist = chamber_distance(pres, first, last, self.len());
        Ok(dist == Some(self.len()))
    }
}

/// BFS distance between chambers, capped; `None` when further than `cap`.
///
/// Neighbours are generated on demand, so no ball needs materialising; a
/// gallery of length `cap` between the chambers guarantees termination.
pub fn chamber_distance(
    pres: &Presentation,
    from: &Chamber,
    to: &Chamber,
    cap: usize,
) -> Option<usize> {
    if from == to {
        return Some(0);
    }
    let mut dist: HashMap<Chamber, usize> = HashMap::new();
    dist.insert(from.clone(), 0);
    let mut queue = VecDeque::new();
    queue.push_back(from.clone());
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        if d == cap {
            continue;
        }
        for nb in c.neighbors(pres) {
            if dist.contains_key(&nb) {
                continue;
            }
            if nb == *to {
                return Some(d + 1);
            }
            dist.insert(nb.clone(), d + 1);
            queue.push_back(nb);
        }
    }
    None
}

/// A materialised set of chambers whose vertices all lie in a Cayley ball,
/// with shared-edge adjacency.
#[derive(Debug)]
pub struct ChamberBall {
    pub chambers: Vec<Chamber>,
    index: HashMap<Chamber, usize>,
    pub adjacency: Vec<Vec<usize>>,
}

impl ChamberBall {
    /// All chambers with every vertex of length at most `radius`.
    pub fn new(pres: &Presentation, radius: usize) -> Result<ChamberBall, crate::words::WordError> {
        let ball = crate::words::ball(pres, radius, None)?;
        let in_ball: HashSet<&NormalForm> = ball.elements().collect();
        let mut chambers = Vec::new();
        let mut index = HashMap::new();
        for g in ball.elements() {
            if g.len() + 1 > radius {
                continue;
            }
            for c in chambers_at(pres, g) {
                if index.contains_key(&c) {
                    continue;
                }
                if c.vertices(pres).iter().all(|v| in_ball.contains(v)) {
                    index.insert(c.clone(), chambers.len());
                    chambers.push(c);
                }
            }
        }
        let mut adjacency = vec![Vec::new(); chambers.len()];
        for (i, c) in chambers.iter().enumerate() {
            for nb in c.neighbors(pres) {
                if let Some(&j) = index.get(&nb) {
                    adjacency[i].push(j);
                }
            }
        }
        Ok(ChamberBall {
            chambers,
            index,
            adjacency,
        })
    }

    pub fn index_of(&self, c: &Chamber) -> Result<usize, BuildingError> {
        self.index.get(c).copied().ok_or(BuildingError::ChamberOutsideBall)
    }

    /// DOT rendering of the chamber adjacency graph, stable ordering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph chambers {\n");
        for (i, c) in self.chambers.iter().enumerate() {
            out.push_str(&format!(
                "  c{i} [label=\"{} ({},{})\"];\n",
                c.base(),
                c.left(),
                c.right()
            ));
        }
        for (i, nbs) in self.adjacency.iter().enumerate() {
            for &j in nbs {
                if i < j {
                    out.push_str(&format!("  c{i} -- c{j};\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Parses a vertex given as a word in the CLI syntax and reduces it.
pub fn parse_vertex(pres: &Presentation, text: &str) -> Result<NormalForm, crate::words::WordError> {
    let word = Word::parse(text)?;
    for l in &word.0 {
        if l.point.0 >= pres.size() {
            return Err(crate::words::WordError::PointOutOfRange(l.point.0));
        }
    }
    Ok(reduce(pres, &word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pres() -> Presentation {
        Presentation::canonical_q2()
    }

    fn nf(p: &Presentation, s: &str) -> NormalForm {
        parse_vertex(p, s).unwrap()
    }

    #[test]
    fn vertex_types() {
        let p = pres();
        assert_eq!(vertex_type(&NormalForm::identity()), 0);
        for x in 0..7 {
            assert_eq!(vertex_type(&nf(&p, &format!("{x}"))), 1);
            assert_eq!(vertex_type(&nf(&p, &format!("{x}^-1"))), 2);
        }
    }

    #[test]
    fn type_is_a_homomorphism_sampled() {
        let p = pres();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let letters = crate::words::all_letters(&p);
        let rand_elt = |rng: &mut ChaCha8Rng| {
            let len = rng.random_range(0..5);
            let w = Word((0..len).map(|_| letters[rng.random_range(0..letters.len())]).collect());
            reduce(&p, &w)
        };
        for _ in 0..200 {
            let g = rand_elt(&mut rng);
            let h = rand_elt(&mut rng);
            let gh = multiply(&p, &g, &h);
            assert_eq!(
                vertex_type(&gh) as u16 % 3,
                (vertex_type(&g) as u16 + vertex_type(&h) as u16) % 3
            );
        }
    }

    #[test]
    fn chambers_at_identity() {
        let p = pres();
        let chambers = chambers_at(&p, &NormalForm::identity());
        assert_eq!(chambers.len(), 21);
        for c in &chambers {
            assert!(c.vertices(&p).contains(&NormalForm::identity()));
        }
        // {e, a0^-1, a1} is a chamber since 1 in lambda(0).
        let direct = Chamber::new(&p, NormalForm::identity(), PointId(0), PointId(1)).unwrap();
        assert!(chambers.contains(&direct));
    }

    #[test]
    fn chambers_at_counts_elsewhere() {
        let p = pres();
        for g in ["3", "5^-1", "0 3", "6^-1 4"] {
            let g = nf(&p, g);
            assert_eq!(chambers_at(&p, &g).len(), 21);
        }
    }

    #[test]
    fn chamber_rotation_roundtrip() {
        // The same vertex set through any representation gives one chamber.
        let p = pres();
        let c = Chamber::new(&p, nf(&p, "3"), PointId(2), PointId(4)).unwrap();
        let verts = c.vertices(&p);
        for perm in [[0usize, 1, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let rebuilt = Chamber::from_vertices(
                &p,
                [
                    verts[perm[0]].clone(),
                    verts[perm[1]].clone(),
                    verts[perm[2]].clone(),
                ],
            )
            .unwrap();
            assert_eq!(rebuilt, c);
        }
    }

    #[test]
    fn residue_of_identity() {
        let p = pres();
        let res = residue_graph(&p, &NormalForm::identity());
        assert_eq!(res.vertices.len(), 14);
        assert_eq!(res.edges.len(), 21);
        for v in 0..14 {
            assert_eq!(res.degree(v), 3);
        }
        // Edge (a0^-1, a1) present: (0,1,3) in T; edges connect only
        // points (indices < 7) with lines (indices >= 7).
        assert!(res.edges.contains(&(1, 7)));
        for &(a, b) in &res.edges {
            assert!(a < 7 && b >= 7);
        }
        // Edges match third(x, y) exactly.
        for x in 0..7 {
            for y in 0..7 {
                let expect = p.third(PointId(x), PointId(y)).is_some();
                assert_eq!(res.edges.contains(&(y, 7 + x)), expect);
            }
        }
    }

    #[test]
    fn residue_is_vertex_transitive() {
        let p = pres();
        let base = residue_graph(&p, &NormalForm::identity());
        let letters = crate::words::all_letters(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let len = rng.random_range(0..=3);
            let w = Word((0..len).map(|_| letters[rng.random_range(0..letters.len())]).collect());
            let g = reduce(&p, &w);
            let res = residue_graph(&p, &g);
            assert_eq!(res.edges, base.edges, "residue differs at {g}");
        }
    }

    #[test]
    fn hexagon_count_is_28() {
        let p = pres();
        let res = residue_graph(&p, &NormalForm::identity());
        let hexes = res.hexagons();
        assert_eq!(hexes.len(), 28);
        for h in &hexes {
            // Alternates point/line vertices.
            for w in 0..6 {
                let a = h[w] < 7;
                let b = h[(w + 1) % 6] < 7;
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn hexagons_give_chambers_with_identity() {
        let p = pres();
        let res = residue_graph(&p, &NormalForm::identity());
        for h in res.hexagons() {
            for w in 0..6 {
                let u = res.vertices[h[w]].clone();
                let v = res.vertices[h[(w + 1) % 6]].clone();
                assert!(is_chamber(&p, [NormalForm::identity(), u, v]));
            }
        }
    }

    #[test]
    fn every_hexagon_seeds_an_apartment_patch() {
        // Cross-module check: each of the 28 hexagons around the identity
        // expands to a flat patch, so it lies in an apartment.
        let p = pres();
        let res = residue_graph(&p, &NormalForm::identity());
        let hexes = res.hexagons();
        assert_eq!(hexes.len(), 28);
        for h in hexes {
            let spokes: [NormalForm; 3 * 2] = std::array::from_fn(|i| res.vertices[h[i]].clone());
            let patch = crate::sector::expand_hexagon(&p, NormalForm::identity(), spokes, 3, 1)
                .expect("hexagon expands");
            assert!(patch.validate(&p).is_ok());
        }
    }

    #[test]
    fn dot_export_stable() {
        let p = pres();
        let res = residue_graph(&p, &NormalForm::identity());
        let dot = res.to_dot();
        assert!(dot.starts_with("graph residue {"));
        assert_eq!(dot, residue_graph(&p, &NormalForm::identity()).to_dot());
    }

    #[test]
    fn single_chamber_gallery() {
        let p = pres();
        let c = Chamber::new(&p, NormalForm::identity(), PointId(0), PointId(1)).unwrap();
        let gal = Gallery(vec![c]);
        assert_eq!(gal.gallery_type(&p).unwrap(), Vec::<u8>::new());
        assert!(gal.is_stretched(&p).unwrap());
    }

    #[test]
    fn backtracking_gallery_not_stretched() {
        let p = pres();
        let c = Chamber::new(&p, NormalForm::identity(), PointId(0), PointId(1)).unwrap();
        let c2 = c.neighbors(&p).into_iter().next().unwrap();
        let gal = Gallery(vec![c.clone(), c2, c]);
        assert!(!gal.is_stretched(&p).unwrap());
    }

    #[test]
    fn chamber_neighbors_count() {
        let p = pres();
        let c = Chamber::new(&p, NormalForm::identity(), PointId(0), PointId(1)).unwrap();
        // q = 2 neighbours per edge, three edges.
        assert_eq!(c.neighbors(&p).len(), 6);
    }

    #[test]
    fn zigzag_gallery_type_in_sector_patch() {
        // The five-step zigzag gallery around a type-0 vertex has type
        // (2,0,2,1,2) and is stretched; reproduced inside a depth-7 sector
        // diagram around its central vertex v(3,3).
        use crate::sector::{ChamberLabel, SectorDiagram};
        let p = pres();
        let d = SectorDiagram::first(
            &p,
            ChamberLabel {
                a: PointId(0),
                b: PointId(1),
            },
            7,
        )
        .unwrap();
        let v = |m: usize, n: usize| d.vertex(m, n).clone();
        let tri = |a: NormalForm, b: NormalForm, c: NormalForm| {
            Chamber::from_vertices(&p, [a, b, c]).unwrap()
        };
        let gallery = Gallery(vec![
            tri(v(1, 4), v(2, 4), v(1, 5)),
            tri(v(1, 4), v(2, 3), v(2, 4)),
            tri(v(2, 3), v(3, 3), v(2, 4)),
            tri(v(2, 4), v(3, 3), v(3, 4)),
            tri(v(3, 3), v(4, 3), v(3, 4)),
            tri(v(3, 3), v(4, 2), v(4, 3)),
        ]);
        assert_eq!(vertex_type(&v(3, 3)), 0);
        assert_eq!(gallery.gallery_type(&p).unwrap(), vec![2, 0, 2, 1, 2]);
        assert!(gallery.is_stretched(&p).unwrap());
    }

    #[test]
    fn stretched_type_classes_agree() {
        // Galleries of the same type as a stretched gallery are stretched:
        // exhaustive over all galleries of length <= 3 from a fixed chamber.
        let p = pres();
        let c0 = Chamber::new(&p, NormalForm::identity(), PointId(0), PointId(1)).unwrap();
        let mut galleries: Vec<Vec<Chamber>> = vec![vec![c0]];
        for _ in 0..3 {
            let mut next = Vec::new();
            for g in &galleries {
                for nb in g.last().unwrap().neighbors(&p) {
                    let mut g2 = g.clone();
                    g2.push(nb);
                    next.push(g2);
                }
            }
            galleries = next;
        }
        let mut by_type: HashMap<Vec<u8>, Vec<bool>> = HashMap::new();
        for g in galleries {
            let gal = Gallery(g);
            let ty = gal.gallery_type(&p).unwrap();
            let stretched = gal.is_stretched(&p).unwrap();
            by_type.entry(ty).or_default().push(stretched);
        }
        assert!(!by_type.is_empty());
        for (ty, vals) in by_type {
            let any = vals.iter().any(|&v| v);
            let all = vals.iter().all(|&v| v);
            assert_eq!(any, all, "mixed stretchedness in type class {ty:?}");
        }
    }
}
