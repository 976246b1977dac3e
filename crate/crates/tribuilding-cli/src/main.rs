//! Command-line surface: construct planes and presentations, reduce words,
//! census balls, inspect residues, compute the boundary transition
//! structure, and run the full identity suite.
//!
//! Exit codes: 0 success/verified, 1 an identity fails, 2 usage or input
//! error. Output is deterministic for a fixed argument list and seed;
//! machine output goes to stdout, diagnostics to stderr.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tribuilding::building::{parse_vertex, residue_graph};
use tribuilding::plane::{Plane, PointId};
use tribuilding::presentation::{enumerate, Presentation};
use tribuilding::sector::{
    amenability_overlap, grow_apartment, minimality_hook, minimality_witness, ChamberLabel,
    SectorDiagram,
};
use tribuilding::subshift::{
    a_minus, a_plus, alphabet, decompose_generator, free_group_matrix, matrices,
    weak_commutativity_check, weak_commutativity_quadruples,
};
use tribuilding::verify;
use tribuilding::words::{ball, reduce, Word};

#[derive(Parser)]
#[command(name = "tribuilding", version, about)]
struct Cli {
    /// Order of the projective plane (2 and 3 are built in).
    #[arg(long, global = true, default_value_t = 2)]
    q: usize,

    /// Load the presentation from a JSON file instead of the built-in one.
    #[arg(long, global = true)]
    presentation: Option<std::path::PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Emit::Text)]
    emit: Emit,

    /// Seed for all randomized procedures.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Node budget for ball searches.
    #[arg(long, global = true)]
    budget: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct the projective plane and print it.
    Plane,
    /// Triangle presentations: verify, canonical, enumerate.
    Presentation {
        #[command(subcommand)]
        action: PresentationCmd,
    },
    /// Word operations.
    Word {
        #[command(subcommand)]
        action: WordCmd,
    },
    /// Cayley-ball census by shape.
    Ball {
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    /// The residue incidence graph of a vertex.
    Residue {
        #[arg(long, default_value = "e")]
        vertex: String,
    },
    /// Hexagons in the residue of the identity.
    Hexagons,
    /// Boundary-subshift operators and matrices.
    Ck {
        #[command(subcommand)]
        action: CkCmd,
    },
    /// Boundary cylinders: witnesses, overlaps, extensions.
    Boundary {
        #[command(subcommand)]
        action: BoundaryCmd,
    },
    /// Apartment growth.
    Apartment {
        #[command(subcommand)]
        action: ApartmentCmd,
    },
    /// Identity suites.
    Verify {
        #[command(subcommand)]
        action: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum PresentationCmd {
    /// Check axioms (i)-(iii) on the selected presentation.
    Verify,
    /// Print the canonical presentation.
    Canonical,
    /// Search for all triangle presentations compatible with the canonical
    /// point-line correspondence.
    Enumerate {
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Subcommand)]
enum WordCmd {
    /// Reduce a word (tokens like `3` and `3^-1`) to left normal form.
    Reduce { word: String },
}

#[derive(Subcommand)]
enum CkCmd {
    /// Both transition matrices.
    Matrices,
    /// The A+ row of a label, e.g. `0:1` or `0^-1:1`.
    Aplus { label: String },
    /// The A- row of a label.
    Aminus { label: String },
    /// Decompose a generator into the three isometry families.
    Decompose { generator: usize },
    /// Weak commutativity: one quadruple `a b c h`, or all of them.
    Weakcomm {
        #[arg(num_args = 4, value_names = ["A", "B", "C", "H"])]
        quad: Option<Vec<usize>>,
        #[arg(long)]
        all: bool,
    },
    /// The free-group boundary matrix of the given rank.
    Freegroup { rank: usize },
}

#[derive(Subcommand)]
enum BoundaryCmd {
    /// Minimality witness for a target vertex over a source label.
    Witness {
        vertex: String,
        source: String,
        /// Also run the translation validation hook.
        #[arg(long)]
        check: bool,
    },
    /// Exact amenability overlap for a shift s and triangle size i.
    Overlap {
        s: String,
        i: usize,
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// All one-layer extensions of a cylinder diagram.
    Extensions {
        source: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum ApartmentCmd {
    /// Grow an apartment patch whose six boundary sectors contain a random
    /// seed cylinder.
    Grow {
        #[arg(long, default_value_t = 1)]
        t_depth: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Run every identity check.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_presentation_raw(cli: &Cli) -> Result<Presentation, String> {
    if let Some(path) = &cli.presentation {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Presentation::from_json(&text).map_err(|e| e.to_string())
    } else {
        Presentation::canonical_cyclic(cli.q).map_err(|e| e.to_string())
    }
}

fn load_presentation(cli: &Cli) -> Result<Presentation, String> {
    let pres = load_presentation_raw(cli)?;
    let report = pres.verify();
    if !report.ok() {
        return Err(format!(
            "presentation fails its axioms: {}",
            report.violations[0]
        ));
    }
    Ok(pres)
}

fn parse_label(pres: &Presentation, text: &str) -> Result<ChamberLabel, String> {
    let cleaned = text.replace("^-1", "");
    let parts: Vec<&str> = cleaned.split(':').collect();
    if parts.len() != 2 {
        return Err(format!("label {text:?} is not of the form a:b"));
    }
    let a: usize = parts[0].trim().parse().map_err(|_| format!("bad label {text:?}"))?;
    let b: usize = parts[1].trim().parse().map_err(|_| format!("bad label {text:?}"))?;
    if a >= pres.size() || b >= pres.size() {
        return Err(format!("label {text:?} out of range"));
    }
    ChamberLabel::new(pres, PointId(a), PointId(b))
        .ok_or_else(|| format!("{b} is not on lambda({a}): not a chamber label"))
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    match &cli.cmd {
        Cmd::Plane => {
            let plane = Plane::build(cli.q, None).map_err(|e| e.to_string())?;
            match cli.emit {
                Emit::Json => println!("{}", plane.to_json()),
                _ => {
                    for l in plane.lines() {
                        let pts: Vec<String> =
                            plane.line_points(l).iter().map(|p| p.to_string()).collect();
                        println!("line {l}: {{{}}}", pts.join(","));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Presentation { action } => {
            match action {
                PresentationCmd::Verify => {
                    let pres = load_presentation_raw(cli)?;
                    let report = pres.verify();
                    if report.ok() {
                        println!(
                            "ok: axioms (i)-(iii) hold, |T| = {}",
                            pres.triple_count()
                        );
                        Ok(ExitCode::SUCCESS)
                    } else {
                        for v in &report.violations {
                            println!("violation: {v}");
                        }
                        Ok(ExitCode::from(1))
                    }
                }
                PresentationCmd::Canonical => {
                    let pres = load_presentation(cli)?;
                    match cli.emit {
                        Emit::Json => println!("{}", pres.to_json()),
                        _ => {
                            for t in pres.canonical_triples() {
                                println!("({},{},{})", t.0, t.1, t.2);
                            }
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                PresentationCmd::Enumerate { limit } => {
                    let pres = load_presentation(cli)?;
                    let result = enumerate(pres.plane(), pres.lambda(), *limit);
                    for (i, p) in result.presentations.iter().enumerate() {
                        match cli.emit {
                            Emit::Json => println!("{}", p.to_json()),
                            _ => println!("presentation {i}: |T| = {}", p.triple_count()),
                        }
                    }
                    eprintln!(
                        "{} presentation(s){}",
                        result.presentations.len(),
                        if result.truncated { " (truncated)" } else { "" }
                    );
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Cmd::Word { action } => {
            let pres = load_presentation(cli)?;
            match action {
                WordCmd::Reduce { word } => {
                    let w = Word::parse(word).map_err(|e| e.to_string())?;
                    for l in &w.0 {
                        if l.point.0 >= pres.size() {
                            return Err(format!("letter {l} out of range"));
                        }
                    }
                    let nf = reduce(&pres, &w);
                    match cli.emit {
                        Emit::Json => {
                            let shape = nf.shape();
                            println!(
                                "{{\"normal_form\":\"{nf}\",\"length\":{},\"shape\":[{},{}]}}",
                                nf.len(),
                                shape.n,
                                shape.m
                            );
                        }
                        _ => println!("{nf}"),
                    }
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Cmd::Ball { radius } => {
            let pres = load_presentation(cli)?;
            let b = ball(&pres, *radius, cli.budget).map_err(|e| e.to_string())?;
            match cli.emit {
                Emit::Csv => {
                    println!("n,m,count");
                    for ((n, m), count) in &b.census {
                        println!("{n},{m},{count}");
                    }
                }
                _ => {
                    for ((n, m), count) in &b.census {
                        println!("shape ({n},{m}): {count}");
                    }
                    for k in 0..=*radius {
                        eprintln!("sphere {k}: {}", b.sphere_size(k));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Residue { vertex } => {
            let pres = load_presentation(cli)?;
            let g = parse_vertex(&pres, vertex).map_err(|e| e.to_string())?;
            let res = residue_graph(&pres, &g);
            match cli.emit {
                Emit::Dot => print!("{}", res.to_dot()),
                _ => {
                    println!(
                        "residue of {g}: {} vertices, {} edges",
                        res.vertices.len(),
                        res.edges.len()
                    );
                    for &(a, b) in &res.edges {
                        println!("{} -- {}", res.labels[a], res.labels[b]);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Hexagons => {
            let pres = load_presentation(cli)?;
            let res = residue_graph(&pres, &tribuilding::words::NormalForm::identity());
            let hexes = res.hexagons();
            for h in &hexes {
                let names: Vec<&str> = h.iter().map(|&v| res.labels[v].as_str()).collect();
                println!("{}", names.join(" "));
            }
            eprintln!("{} hexagons", hexes.len());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Ck { action } => {
            let pres = load_presentation(cli)?;
            run_ck(cli, &pres, action)
        }
        Cmd::Boundary { action } => {
            let pres = load_presentation(cli)?;
            run_boundary(cli, &pres, action)
        }
        Cmd::Apartment { action } => {
            let pres = load_presentation(cli)?;
            match action {
                ApartmentCmd::Grow { t_depth } => {
                    let grown =
                        grow_apartment(&pres, *t_depth, cli.seed).map_err(|e| e.to_string())?;
                    match cli.emit {
                        Emit::Json => println!("{}", grown.patch.to_json()),
                        _ => {
                            println!(
                                "patch radius {} around {}; closure case {:?}",
                                grown.patch.radius, grown.patch.center, grown.case
                            );
                            for (i, b) in grown.boundary.iter().enumerate() {
                                println!(
                                    "boundary {i}: base {} contains seed: {}",
                                    b.cell(0, 0),
                                    b == &grown.seed
                                );
                            }
                        }
                    }
                    if grown.verified {
                        println!("verified: all six boundary sectors contain the seed cylinder");
                        Ok(ExitCode::SUCCESS)
                    } else {
                        println!("verification FAILED");
                        Ok(ExitCode::from(1))
                    }
                }
            }
        }
        Cmd::Verify { action } => {
            let pres = load_presentation(cli)?;
            match action {
                VerifyCmd::All => {
                    let results = verify::run_all(&pres, cli.seed);
                    let mut failed = 0;
                    for r in &results {
                        println!(
                            "{} {}: {}",
                            if r.passed { "PASS" } else { "FAIL" },
                            r.name,
                            r.details
                        );
                        if !r.passed {
                            failed += 1;
                        }
                    }
                    for obs in verify::observations(&pres) {
                        eprintln!("note: {obs}");
                    }
                    if failed == 0 {
                        println!("all {} checks passed", results.len());
                        Ok(ExitCode::SUCCESS)
                    } else {
                        println!("{failed} of {} checks FAILED", results.len());
                        Ok(ExitCode::from(1))
                    }
                }
            }
        }
    }
}

fn run_ck(cli: &Cli, pres: &Presentation, action: &CkCmd) -> Result<ExitCode, String> {
    match action {
        CkCmd::Matrices => {
            let (mp, mm) = matrices(pres);
            match cli.emit {
                Emit::Csv => {
                    print!("{}", mp.to_csv());
                    println!();
                    print!("{}", mm.to_csv());
                }
                _ => {
                    println!(
                        "A+: {}x{} matrix, row sums {}, strongly connected: {}",
                        mp.dim(),
                        mp.dim(),
                        mp.row_sum(0),
                        mp.strongly_connected()
                    );
                    println!(
                        "A-: {}x{} matrix, row sums {}, strongly connected: {}",
                        mm.dim(),
                        mm.dim(),
                        mm.row_sum(0),
                        mm.strongly_connected()
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        CkCmd::Aplus { label } => {
            let l = parse_label(pres, label)?;
            let row: Vec<String> = a_plus(pres, l).iter().map(|x| x.csv_name()).collect();
            println!("{}", row.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        CkCmd::Aminus { label } => {
            let l = parse_label(pres, label)?;
            let row: Vec<String> = a_minus(pres, l).iter().map(|x| x.csv_name()).collect();
            println!("{}", row.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        CkCmd::Decompose { generator } => {
            if *generator >= pres.size() {
                return Err(format!("generator {generator} out of range"));
            }
            let d = decompose_generator(pres, PointId(*generator));
            match cli.emit {
                Emit::Json => println!("{}", d.to_json()),
                _ => {
                    let fam = |ls: &[ChamberLabel]| {
                        ls.iter().map(|l| l.csv_name()).collect::<Vec<_>>().join(" ")
                    };
                    println!("A ({} terms): {}", d.family_a.len(), fam(&d.family_a));
                    println!("B ({} terms): {}", d.family_b.len(), fam(&d.family_b));
                    let mut c = String::new();
                    for ct in &d.family_c {
                        let _ = write!(
                            c,
                            "({}^-1:{})*({}^-1:{}) ",
                            ct.t, ct.f, ct.h, ct.s
                        );
                    }
                    println!("C ({} terms): {}", d.family_c.len(), c.trim_end());
                    println!(
                        "initial partition: {}, final partition: {}",
                        d.initial_partition_ok, d.final_partition_ok
                    );
                }
            }
            if d.initial_partition_ok && d.final_partition_ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        CkCmd::Weakcomm { quad, all } => {
            if *all || quad.is_none() {
                let quads = weak_commutativity_quadruples(pres);
                let mut failed = 0;
                for (a, b, c, h) in &quads {
                    let report = weak_commutativity_check(pres, *a, *b, *c, *h)
                        .map_err(|e| e.to_string())?;
                    if !report.equal {
                        failed += 1;
                        println!("FAIL ({a},{b},{c},{h})");
                    }
                }
                println!(
                    "checked {} quadruples, {} failures",
                    quads.len(),
                    failed
                );
                return Ok(if failed == 0 {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                });
            }
            let q = quad.as_ref().expect("checked");
            let report = weak_commutativity_check(
                pres,
                PointId(q[0]),
                PointId(q[1]),
                PointId(q[2]),
                PointId(q[3]),
            )
            .map_err(|e| e.to_string())?;
            match cli.emit {
                Emit::Json => println!(
                    "{{\"quadruple\":[{},{},{},{}],\"lhs_terms\":{},\"rhs_terms\":{},\"equal\":{}}}",
                    q[0], q[1], q[2], q[3], report.lhs_terms, report.rhs_terms, report.equal
                ),
                _ => println!(
                    "lhs terms {}, rhs terms {}, equal: {}",
                    report.lhs_terms, report.rhs_terms, report.equal
                ),
            }
            Ok(if report.equal {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        CkCmd::Freegroup { rank } => {
            if *rank == 0 {
                return Err("rank must be at least 1".into());
            }
            let m = free_group_matrix(*rank);
            match cli.emit {
                Emit::Csv => {
                    for row in &m {
                        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                        println!("{}", cells.join(","));
                    }
                }
                _ => {
                    for row in &m {
                        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                        println!("[{}]", cells.join(" "));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_boundary(cli: &Cli, pres: &Presentation, action: &BoundaryCmd) -> Result<ExitCode, String> {
    match action {
        BoundaryCmd::Witness {
            vertex,
            source,
            check,
        } => {
            let v = parse_vertex(pres, vertex).map_err(|e| e.to_string())?;
            let l = parse_label(pres, source)?;
            let k = minimality_witness(pres, &v, l);
            println!("{k}");
            if *check {
                let ok = minimality_hook(pres, &v, l, &k).map_err(|e| e.to_string())?;
                println!("hook: {}", if ok { "PASS" } else { "FAIL" });
                if !ok {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        BoundaryCmd::Overlap { s, i, samples } => {
            let shift = parse_vertex(pres, s).map_err(|e| e.to_string())?;
            let labels = alphabet(pres);
            for sample in 0..*samples {
                let l = labels[(sample as usize) % labels.len()];
                let omega = SectorDiagram::random_seeded(
                    pres,
                    l,
                    i + shift.len() + 2,
                    cli.seed.wrapping_add(sample),
                )
                .map_err(|e| e.to_string())?;
                let f =
                    amenability_overlap(pres, &omega, &shift, *i).map_err(|e| e.to_string())?;
                println!("sample {sample} over {l}: {f} = {:.6}", f.as_f64());
            }
            Ok(ExitCode::SUCCESS)
        }
        BoundaryCmd::Extensions { source, depth } => {
            let l = parse_label(pres, source)?;
            let d = SectorDiagram::first(pres, l, *depth).map_err(|e| e.to_string())?;
            let (exts, incompatible) = d.extension_census(pres).map_err(|e| e.to_string())?;
            for e in &exts {
                match cli.emit {
                    Emit::Json => println!("{}", e.to_json()),
                    _ => println!(
                        "right {} left {}",
                        e.cell(e.depth() - 1, 0),
                        e.cell(0, e.depth() - 1)
                    ),
                }
            }
            eprintln!(
                "{} valid extensions; {} admissible wall pairs are seam-incompatible",
                exts.len(),
                incompatible
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
