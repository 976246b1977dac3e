//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Criterion 9 asserts the q⁴ wall-pair counts it was specified with; the
//! measured structure is q³ per layer (the two wall choices are coupled at
//! the seam), so that test reports the observed counts and fails. See the
//! `wall_extensions` check of `verify all` for the identity that does hold.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use tribuilding::building::residue_graph;
use tribuilding::plane::PointId;
use tribuilding::presentation::Presentation;
use tribuilding::sector::{
    amenability_overlap, grow_apartment, minimality_hook, minimality_witness, ChamberLabel, Frac,
    SectorDiagram, SectorError,
};
use tribuilding::subshift::{
    a_minus, a_plus, alphabet, decompose_generator, free_group_matrix, left_extension_labels,
    matrices, right_extension_labels, weak_commutativity_check, weak_commutativity_quadruples,
};
use tribuilding::words::{ball, census_closed_form, reduce, NormalForm, Word};

fn report(criterion: u32, passed: bool, elapsed: Duration, detail: &str) {
    eprintln!(
        "[acceptance] criterion {criterion:02}: {} ({:.2?}) - {detail}",
        if passed { "PASS" } else { "FAIL" },
        elapsed
    );
}

fn pres2() -> Presentation {
    Presentation::canonical_q2()
}

#[test]
fn criterion_01_canonical_presentation_and_relators() {
    let start = Instant::now();
    let pres = pres2();
    let axioms_ok = pres.verify().ok();
    let size_ok = pres.triple_count() == 21;
    let mut relators_ok = true;
    for t in pres.triples() {
        let w = Word::parse(&format!("{} {} {}", t.0, t.1, t.2)).unwrap();
        relators_ok &= reduce(&pres, &w).is_identity();
    }
    let elapsed = start.elapsed();
    let passed = axioms_ok && size_ok && relators_ok && elapsed < Duration::from_secs(1);
    report(
        1,
        passed,
        elapsed,
        &format!("axioms {axioms_ok}, |T| = {}, relators {relators_ok}", pres.triple_count()),
    );
    assert!(passed);
}

#[test]
fn criterion_02_alphabet_sizes() {
    let start = Instant::now();
    let a2 = alphabet(&pres2()).len();
    let pres3 = Presentation::canonical_cyclic(3).expect("built-in q=3 presentation");
    assert!(pres3.verify().ok());
    let a3 = alphabet(&pres3).len();
    let passed = a2 == 21 && a3 == 52;
    report(2, passed, start.elapsed(), &format!("q=2: {a2} labels, q=3: {a3} labels"));
    assert!(passed);
}

#[test]
fn criterion_03_row_sums_and_irreducibility() {
    let start = Instant::now();
    let pres = pres2();
    let (mp, mm) = matrices(&pres);
    let rows_ok = (0..mp.dim()).all(|i| mp.row_sum(i) == 4 && mm.row_sum(i) == 4);
    let connected = mp.strongly_connected() && mm.strongly_connected();
    let elapsed = start.elapsed();
    let passed = rows_ok && connected && elapsed < Duration::from_secs(1);
    report(
        3,
        passed,
        elapsed,
        &format!("row sums 4: {rows_ok}, strongly connected: {connected}"),
    );
    assert!(passed);
}

#[test]
fn criterion_04_geometric_binding() {
    let start = Instant::now();
    let pres = pres2();
    let mut mismatches = 0;
    for l in alphabet(&pres) {
        if a_plus(&pres, l) != right_extension_labels(&pres, l) {
            mismatches += 1;
        }
        if a_minus(&pres, l) != left_extension_labels(&pres, l) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed = mismatches == 0 && elapsed < Duration::from_secs(10);
    report(
        4,
        passed,
        elapsed,
        &format!("{mismatches} discrepancies between A± rows and one-step wall extensions"),
    );
    assert!(passed);
}

#[test]
fn criterion_05_generator_decomposition() {
    let start = Instant::now();
    let pres = pres2();
    let mut ok = true;
    for b in pres.plane().points() {
        let d = decompose_generator(&pres, b);
        ok &= d.family_a.len() == 3 && d.family_b.len() == 3 && d.family_c.len() == 12;
        ok &= d.initial_partition_ok && d.final_partition_ok;
    }
    let elapsed = start.elapsed();
    let passed = ok && elapsed < Duration::from_secs(1);
    report(5, passed, elapsed, "family counts (3,3,12); initial/final projections partition the alphabet");
    assert!(passed);
}

#[test]
fn criterion_06_weak_commutativity() {
    let start = Instant::now();
    let pres = pres2();
    let quads = weak_commutativity_quadruples(&pres);
    let mut failures = 0;
    for (a, b, c, h) in &quads {
        match weak_commutativity_check(&pres, *a, *b, *c, *h) {
            Ok(r) if r.equal && r.lhs_terms == 2 && r.rhs_terms == 2 => {}
            _ => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    let passed = failures == 0 && elapsed < Duration::from_secs(5);
    report(
        6,
        passed,
        elapsed,
        &format!("{} quadruples, {failures} failures, 2 terms per side", quads.len()),
    );
    assert!(passed);
}

#[test]
fn criterion_07_ball_census() {
    let start = Instant::now();
    let pres = pres2();
    let b = ball(&pres, 4, None).expect("ball radius 4");
    let spheres: Vec<usize> = (1..=4).map(|k| b.sphere_size(k)).collect();
    let spheres_ok = spheres == vec![14, 98, 560, 2912];
    let mut census_ok = true;
    for n in 0..=4usize {
        for m in 0..=4usize {
            if n + m > 4 {
                continue;
            }
            let got = b.census.get(&(n, m)).copied().unwrap_or(0);
            census_ok &= got == census_closed_form(2, n, m);
        }
    }
    let elapsed = start.elapsed();
    let passed = spheres_ok && census_ok && elapsed < Duration::from_secs(30);
    report(
        7,
        passed,
        elapsed,
        &format!("spheres {spheres:?}, BFS equals closed forms: {census_ok}"),
    );
    assert!(passed);
}

#[test]
fn criterion_08_hexagon_count() {
    let start = Instant::now();
    let pres = pres2();
    let count = residue_graph(&pres, &NormalForm::identity()).hexagon_count();
    let elapsed = start.elapsed();
    let passed = count == 28 && elapsed < Duration::from_secs(1);
    report(8, passed, elapsed, &format!("{count} hexagons in the residue of e"));
    assert!(passed);
}

/// Asserts the q⁴ wall-pair counts this criterion was written with. The
/// measured structure is q³ = 8 fills out of 16 admissible pairs per base:
/// the two wall choices are coupled through the seam rhombus
/// b·c⁻¹ = a⁻¹·h (the same coupling behind the weak-commutativity q-term
/// sums), verified independently by brute-force enumeration of all depth-2
/// vertex configurations. This test documents the discrepancy by failing
/// with the measured counts.
#[test]
fn criterion_09_wall_determinism_as_stated() {
    let start = Instant::now();
    let pres = pres2();
    let labels = alphabet(&pres);
    let mut depth2_fills = 0usize;
    let mut depth3_fills = 0usize;
    let mut extension_counts: BTreeSet<usize> = BTreeSet::new();
    for &l in &labels {
        let base = SectorDiagram::base_diagram(&pres, l, NormalForm::identity());
        let (exts, _) = base.extension_census(&pres).expect("census");
        extension_counts.insert(exts.len());
        depth2_fills += exts.len();
        for d in &exts {
            let (more, _) = d.extension_census(&pres).expect("census");
            extension_counts.insert(more.len());
            depth3_fills += more.len();
        }
    }
    let elapsed = start.elapsed();
    let stated_depth2 = 21 * 16;
    let stated_depth3 = 21 * 256;
    let passed = depth2_fills == stated_depth2
        && depth3_fills == stated_depth3
        && extension_counts == BTreeSet::from([16])
        && elapsed < Duration::from_secs(60);
    report(
        9,
        passed,
        elapsed,
        &format!(
            "stated {stated_depth2}/{stated_depth3} fills with q^4 per layer; measured {depth2_fills}/{depth3_fills} with per-layer counts {extension_counts:?} (seam-coupled walls)"
        ),
    );
    assert!(
        passed,
        "wall pairs are seam-coupled: {depth2_fills} depth-2 and {depth3_fills} depth-3 fills, {extension_counts:?} extensions per layer (q^3, not q^4)"
    );
}

#[test]
fn criterion_10_minimality_witnesses() {
    let start = Instant::now();
    let pres = pres2();
    let targets: Vec<NormalForm> = ball(&pres, 2, None).unwrap().elements().cloned().collect();
    let labels = alphabet(&pres);
    let mut failures = 0usize;
    let mut checked = 0usize;
    for &l in &labels {
        for v in &targets {
            let k = minimality_witness(&pres, v, l);
            match minimality_hook(&pres, v, l, &k) {
                Ok(true) => {}
                _ => failures += 1,
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed = failures == 0;
    report(
        10,
        passed,
        elapsed,
        &format!("{checked} (label, target) pairs with |v| <= 2, {failures} failures"),
    );
    assert!(passed);
}

#[test]
fn criterion_11_amenability_overlaps() {
    let start = Instant::now();
    let pres = pres2();
    let labels = alphabet(&pres);
    let mut shifts: Vec<NormalForm> = vec![NormalForm::identity()];
    for letter in tribuilding::words::all_letters(&pres) {
        shifts.push(NormalForm::single(letter));
    }
    let mut failures = 0usize;
    let mut checked = 0usize;
    for sample in 0..20u64 {
        let l = labels[(sample as usize) % labels.len()];
        let omega = SectorDiagram::random_seeded(&pres, l, 23, 1000 + sample).unwrap();
        for s in &shifts {
            for &i in &[10usize, 20] {
                let f = amenability_overlap(&pres, &omega, s, i).expect("overlap");
                checked += 1;
                if s.is_identity() {
                    if !f.is_one() {
                        failures += 1;
                    }
                    continue;
                }
                let d = i - 3 * s.len();
                let lower = Frac::new((d * (d + 1) / 2) as u64, (i * (i + 1) / 2) as u64);
                if f < lower || f > Frac::new(1, 1) {
                    failures += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = failures == 0;
    report(
        11,
        passed,
        elapsed,
        &format!("{checked} overlaps across 20 sampled deep cylinders, {failures} outside bounds"),
    );
    assert!(passed);
}

#[test]
fn criterion_12_apartment_growth() {
    let start = Instant::now();
    let pres = pres2();
    let mut failures = 0usize;
    let mut exhausted = 0usize;
    for seed in 1..=20u64 {
        match grow_apartment(&pres, 1, seed) {
            Ok(g) if g.verified => {}
            Ok(_) => failures += 1,
            Err(SectorError::BacktrackExhausted) => exhausted += 1,
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    let passed = failures == 0 && exhausted == 0 && elapsed < Duration::from_secs(60);
    report(
        12,
        passed,
        elapsed,
        &format!("seeds 1..20: {failures} verification failures, {exhausted} backtrack exhaustions"),
    );
    assert!(passed);
}

#[test]
fn criterion_13_free_group_matrix() {
    let start = Instant::now();
    let got = free_group_matrix(2);
    let expect = vec![
        vec![1, 0, 1, 1],
        vec![0, 1, 1, 1],
        vec![1, 1, 1, 0],
        vec![1, 1, 0, 1],
    ];
    let passed = got == expect;
    report(13, passed, start.elapsed(), "rank-2 boundary matrix matches");
    assert!(passed);
}

// Shared sanity: the q=3 presentation used by criterion 2 satisfies every
// row-level identity as well.
#[test]
fn q3_presentation_rows() {
    let pres3 = Presentation::canonical_cyclic(3).unwrap();
    for l in alphabet(&pres3) {
        assert_eq!(a_plus(&pres3, l).len(), 9);
        assert_eq!(a_minus(&pres3, l).len(), 9);
    }
    let _ = PointId(0);
}
