//! `polynormals` command-line front end.
//!
//! Exit codes: 0 success, 1 expected negative result (target not reached,
//! no coloring, no certificate), 2 invalid input, 3 internal consistency
//! alarm. Errors are reported as one JSON object on stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use polynormals::coloring::{divisibility_certificate, find_coloring, instance_from_polytope, ColoringOutcome, SolveMode, EXHAUSTIVE_LIMIT};
use polynormals::geometry::DEFAULT_TOL;
use polynormals::io::{point_vec, record_json, NormalsReport, PolytopeJson};
use polynormals::nicefaces::{certify_nice, check_propagation, NiceOutcome, NICE_BUDGET};
use polynormals::normals::{morse_tally, normals_from_point, scan_segment, MAX_DEPTH};
use polynormals::search::{canned_polytope, generate_batch, skew_census, verify_batch, BatchSpec};
use polynormals::spherical::{classify_triangle, spherical_link, SphericalTriangle, CLASSIFY_TOL};
use polynormals::{Error, FaceId, Point, Polytope};

#[derive(Parser, Debug)]
#[command(name = "polynormals", version, about = "Normals to convex polytope boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Probe budget for searches (default depends on the command and dimension).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format (default: csv for `scan`, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default)]
struct Source {
    /// Canned polytope: triangle, square, cube<n>, simplex<n>, thin_tetrahedron.
    #[arg(long)]
    canned: Option<String>,
    /// Polytope JSON file (one object or an array).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Random batch, e.g. `n=4,m=8,count=20` or `n=4,m=5..8,count=20`.
    #[arg(long)]
    gen: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate random simple polytopes.
    Gen {
        #[command(flatten)]
        source: Source,
    },
    /// Normals from an interior point.
    Normals {
        #[command(flatten)]
        source: Source,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Count of normals along a segment.
    Scan {
        #[command(flatten)]
        source: Source,
        /// Segment start, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Segment end, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Uniform samples along the segment; count changes are then bisected.
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Spherical link of a face.
    Link {
        #[command(flatten)]
        source: Source,
        /// Face index.
        #[arg(long)]
        face: usize,
    },
    /// Classify the links of codimension-3 faces.
    Classify {
        #[command(flatten)]
        source: Source,
        /// Only this face (default: all codimension-3 faces).
        #[arg(long)]
        face: Option<usize>,
    },
    /// Certify a face as nice, optionally following to its facets.
    Nice {
        #[command(flatten)]
        source: Source,
        /// Face index.
        #[arg(long)]
        face: usize,
        /// Also certify every facet of the face.
        #[arg(long)]
        propagate: bool,
    },
    /// Red/blue coloring of codimension-2 faces.
    Color {
        #[command(flatten)]
        source: Source,
        /// Solver (default: exhaustive for small instances).
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Emit the DIMACS CNF encoding instead of solving.
        #[arg(long)]
        dimacs: bool,
    },
    /// Search for 2n+4 normals.
    Verify {
        #[command(flatten)]
        source: Source,
    },
    /// Nice/skew census of codimension-3 faces.
    Census {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Backtracking,
    Exhaustive,
}

enum Failure {
    Invalid(String, String),
    Alarm(String, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_alarm() {
            Failure::Alarm(e.kind().into(), e.to_string())
        } else {
            Failure::Invalid(e.kind().into(), e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid("InvalidInput".into(), msg.into())
}

/// Report text and exit code.
type Outcome = std::result::Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Failure::Invalid("Usage".into(), e.to_string().trim().to_string())),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build() {
        Ok(p) => p,
        Err(e) => return fail(&invalid(e.to_string())),
    };
    let outcome = pool.install(|| run(&cli));
    match outcome {
        Ok((text, code)) => {
            let written = match &cli.global.out {
                Some(path) => fs::write(path, &text).map_err(|e| e.to_string()),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => ExitCode::from(code),
                Err(e) => fail(&invalid(format!("cannot write output: {e}"))),
            }
        }
        Err(f) => fail(&f),
    }
}

fn fail(f: &Failure) -> ExitCode {
    let (code, class, kind, msg) = match f {
        Failure::Invalid(k, m) => (2, "invalid_input", k, m),
        Failure::Alarm(k, m) => (3, "consistency_alarm", k, m),
    };
    eprintln!("{}", json!({ "error": class, "kind": kind, "message": msg }));
    ExitCode::from(code)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn parse_point(s: &str) -> Result<Point, Failure> {
    let xs = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| invalid(format!("bad point `{s}`")))?;
    Ok(Point::from_vec(xs))
}

fn load(source: &Source, g: &Global) -> Result<Vec<Polytope>, Failure> {
    let given = [source.canned.is_some(), source.input.is_some(), source.gen.is_some()];
    if given.iter().filter(|b| **b).count() != 1 {
        return Err(invalid("give exactly one of --canned, --input, --gen"));
    }
    if let Some(name) = &source.canned {
        return Ok(vec![canned_polytope(name)?]);
    }
    if let Some(path) = &source.input {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("bad JSON: {e}")))?;
        let items: Vec<PolytopeJson> = match value {
            Value::Array(_) => serde_json::from_value(value),
            other => serde_json::from_value(other).map(|p| vec![p]),
        }
        .map_err(|e| invalid(format!("bad polytope JSON: {e}")))?;
        return items.iter().map(|j| j.to_polytope(g.tol).map_err(Failure::from)).collect();
    }
    let spec: BatchSpec = source.gen.as_deref().unwrap().parse().map_err(invalid)?;
    Ok(generate_batch(&spec, g.seed)?.into_iter().map(|(_, p)| p).collect())
}

fn load_one(source: &Source, g: &Global) -> Result<Polytope, Failure> {
    let mut ps = load(source, g)?;
    if ps.len() != 1 {
        return Err(invalid(format!("expected one polytope, got {}", ps.len())));
    }
    Ok(ps.pop().unwrap())
}

fn face_arg(p: &Polytope, face: usize) -> Result<FaceId, Failure> {
    if face >= p.faces().len() {
        return Err(invalid(format!("face {face} out of range (0..{})", p.faces().len())));
    }
    Ok(FaceId(face))
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    let default = match cli.command {
        Command::Scan { .. } => Format::Csv,
        _ => Format::Json,
    };
    let format = g.format.unwrap_or(default);
    match &cli.command {
        Command::Gen { source } => {
            let ps = load(source, g)?;
            let out: Vec<PolytopeJson> = ps.iter().map(PolytopeJson::from_polytope).collect();
            Ok((to_json(&out), 0))
        }
        Command::Normals { source, point } => {
            let p = load_one(source, g)?;
            let y = parse_point(point)?;
            let recs = normals_from_point(&p, &y, g.tol)?;
            let report = NormalsReport::new(&y, &recs);
            if format == Format::Csv {
                let mut s = csv_line(&["face", "dim", "index", "sqdist", "marginal"].map(String::from));
                for r in &report.records {
                    s += &csv_line(&[r.face.to_string(), r.dim.to_string(), r.index.to_string(), format!("{:.12e}", r.sqdist), r.marginal.to_string()]);
                }
                return Ok((s, 0));
            }
            let mut v = serde_json::to_value(&report).unwrap();
            if recs.iter().all(|r| !r.marginal) {
                if let Ok(t) = morse_tally(&recs, p.dim()) {
                    v["tally"] = json!({ "by_index": t.by_index, "alternating_sum": t.alternating_sum });
                }
            }
            Ok((to_json(&v), 0))
        }
        Command::Scan { source, from, to, steps } => {
            let p = load_one(source, g)?;
            let (a, b) = (parse_point(from)?, parse_point(to)?);
            let scan = scan_segment(&p, &a, &b, *steps, MAX_DEPTH)?;
            if format == Format::Json {
                let v = json!({
                    "from": point_vec(&a),
                    "to": point_vec(&b),
                    "samples": scan.samples,
                    "crossings": scan.crossings.iter().map(|c| json!({"t0": c.t0, "t1": c.t1, "from": c.from, "to": c.to})).collect::<Vec<_>>(),
                });
                return Ok((to_json(&v), 0));
            }
            let mut s = csv_line(&["t".into(), "count".into()]);
            for (t, c) in &scan.samples {
                s += &csv_line(&[format!("{t:.6}"), c.to_string()]);
            }
            Ok((s, 0))
        }
        Command::Link { source, face } => {
            let p = load_one(source, g)?;
            let f = face_arg(&p, *face)?;
            let link = spherical_link(&p, f)?;
            let mut v = json!({
                "face": face,
                "codim": link.ambient_dim(),
                "vertices": link.vertices.iter().map(point_vec).collect::<Vec<_>>(),
                "vertex_faces": link.vertex_faces,
            });
            if link.ambient_dim() == 3 {
                let t = SphericalTriangle::from_polytope(&link)?;
                v["signature"] = serde_json::to_value(t.signature()).unwrap();
            }
            Ok((to_json(&v), 0))
        }
        Command::Classify { source, face } => {
            let p = load_one(source, g)?;
            if p.dim() < 3 {
                return Err(invalid("classification needs dimension at least 3"));
            }
            let faces: Vec<FaceId> = match face {
                Some(f) => vec![face_arg(&p, *f)?],
                None => p.faces_of_dim(p.dim() - 3).map(|f| f.id).collect(),
            };
            let mut out = Vec::new();
            for f in faces {
                let t = SphericalTriangle::from_polytope(&spherical_link(&p, f)?)?;
                let c = classify_triangle(&t, CLASSIFY_TOL)?;
                out.push(json!({
                    "face": f,
                    "verdict": c.verdict,
                    "margin": c.margin,
                    "witness": c.witness.as_ref().map(point_vec),
                    "signature": c.signature,
                }));
            }
            if format == Format::Csv {
                let mut s = csv_line(&["face".into(), "verdict".into(), "margin".into()]);
                for o in &out {
                    s += &csv_line(&[o["face"].to_string(), o["verdict"].as_str().unwrap_or("").into(), o["margin"].to_string()]);
                }
                return Ok((s, 0));
            }
            Ok((to_json(&out), 0))
        }
        Command::Nice { source, face, propagate } => {
            let p = load_one(source, g)?;
            let f = face_arg(&p, *face)?;
            let budget = g.budget.unwrap_or(NICE_BUDGET);
            let outcome = certify_nice(&p, f, &[], budget, g.seed, g.tol)?;
            let mut v = nice_json(&outcome);
            let mut code = if outcome.certificate().is_some() { 0 } else { 1 };
            if let (true, Some(cert)) = (*propagate, outcome.certificate()) {
                let rep = check_propagation(&p, cert, budget, g.seed, g.tol)?;
                v["propagation"] = json!({
                    "all_certified": rep.all_certified,
                    "faces": rep.entries.iter().map(|e| {
                        let mut j = nice_json(&e.outcome);
                        j["target"] = json!(e.target);
                        j
                    }).collect::<Vec<_>>(),
                });
                if !rep.all_certified {
                    code = 1;
                }
            }
            Ok((to_json(&v), code))
        }
        Command::Color { source, mode, dimacs } => {
            let p = load_one(source, g)?;
            let inst = instance_from_polytope(&p)?;
            if *dimacs {
                return Ok((inst.to_dimacs(), 0));
            }
            let mode = match mode {
                Some(Mode::Exhaustive) => SolveMode::Exhaustive,
                Some(Mode::Backtracking) => SolveMode::Backtracking,
                None if inst.len() <= EXHAUSTIVE_LIMIT => SolveMode::Exhaustive,
                None => SolveMode::Backtracking,
            };
            let outcome = find_coloring(&inst, mode)?;
            let mut v = json!({
                "items": inst.len(),
                "constraints": inst.constraints.len(),
                "mode": mode,
                "divisibility": divisibility_certificate(&inst),
            });
            let code = match &outcome {
                ColoringOutcome::Colorable { coloring } => {
                    if !coloring.is_valid(&inst) {
                        return Err(Failure::Alarm("InvalidColoring".into(), "solver returned an invalid coloring".into()));
                    }
                    v["result"] = json!("colorable");
                    v["red"] = json!(coloring.red_items(&inst));
                    v["red_count"] = json!(coloring.reds());
                    0
                }
                ColoringOutcome::Unsatisfiable { proof } => {
                    v["result"] = json!("unsatisfiable");
                    v["proof"] = serde_json::to_value(proof).unwrap();
                    1
                }
            };
            Ok((to_json(&v), code))
        }
        Command::Verify { source } => {
            let ps = load(source, g)?;
            let reports = verify_batch(&ps, g.seed, g.budget, g.tol);
            let passed = reports.iter().filter(|r| r.passed).count();
            let code = if passed == reports.len() { 0 } else { 1 };
            if format == Format::Csv {
                let mut s = csv_line(&["index", "n", "facets", "best_count", "target", "baseline_probe", "probes", "passed"].map(String::from));
                for (i, (r, p)) in reports.iter().zip(&ps).enumerate() {
                    s += &csv_line(&[
                        i.to_string(),
                        p.dim().to_string(),
                        p.facets().len().to_string(),
                        r.search.best_count.to_string(),
                        r.search.target.to_string(),
                        r.search.baseline_probe.map_or(String::new(), |b| b.to_string()),
                        r.search.probes_used.to_string(),
                        r.passed.to_string(),
                    ]);
                }
                return Ok((s, code));
            }
            let v = json!({
                "total": reports.len(),
                "passed": passed,
                "reports": reports,
            });
            Ok((to_json(&v), code))
        }
        Command::Census { source } => {
            let ps = load(source, g)?;
            let mut out = Vec::new();
            for p in &ps {
                out.push(skew_census(p)?);
            }
            let alarm = out.iter().any(|c| c.alarm.is_some());
            Ok((to_json(&out), if alarm { 3 } else { 0 }))
        }
    }
}

fn nice_json(o: &NiceOutcome) -> Value {
    match o {
        NiceOutcome::Certified(c) => json!({
            "face": c.face,
            "certified": true,
            "k": c.k,
            "count": c.count,
            "strategy": c.strategy,
            "witness": point_vec(&c.witness),
            "records": c.records.iter().map(record_json).collect::<Vec<_>>(),
        }),
        NiceOutcome::NotFound { face, best_count, best_point, probes } => json!({
            "face": face,
            "certified": false,
            "best_count": best_count,
            "best_point": best_point.as_ref().map(point_vec),
            "probes": probes,
        }),
    }
}
