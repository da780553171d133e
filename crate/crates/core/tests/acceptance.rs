//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use polynormals::coloring::{
    divisibility_certificate, find_coloring, instance_from_polytope, Coloring, ColoringInstance, ColoringOutcome,
    SolveMode, UnsatProof,
};
use polynormals::error::Error;
use polynormals::geometry::DEFAULT_TOL;
use polynormals::nicefaces::{certify_nice, check_propagation, cone_sqd_critical_points, ConeFrame, random_cone_point, NICE_BUDGET};
use polynormals::normals::{
    active_region, count_normals_strict, generic_normals, morse_tally, normals_from_point, random_interior_point,
    scan_segment, MAX_DEPTH,
};
use polynormals::search::{
    canned_polytope, derive_seed, generate_batch, max_normals_search, skew_census, thin_tetrahedron, verify_batch,
    BatchSpec, SearchOptions, TheoremReport, BASELINE_PROBES, THIN_TETRAHEDRON_FLAT,
};
use polynormals::spherical::{
    classify_triangle, skew_roles, random_spherical_simplex, skew_signature_check, verify_eight_short_criticals,
    SphericalTriangle, Verdict, CLASSIFY_TOL,
};
use polynormals::{Point, Polytope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sweep_specs() -> [BatchSpec; 3] {
    [
        BatchSpec { n: 3, m_min: 4, m_max: 8, count: 20 },
        BatchSpec { n: 4, m_min: 5, m_max: 8, count: 20 },
        BatchSpec { n: 5, m_min: 6, m_max: 7, count: 10 },
    ]
}

fn sweep_polytopes() -> Vec<Vec<Polytope>> {
    sweep_specs()
        .iter()
        .map(|b| generate_batch(b, SEED).expect("batch").into_iter().map(|(_, p)| p).collect())
        .collect()
}

fn sweep_reports(batches: &[Vec<Polytope>]) -> Vec<Vec<TheoremReport>> {
    batches.iter().map(|ps| verify_batch(ps, SEED, None, DEFAULT_TOL)).collect()
}

fn theorem_sweep(reports: &[Vec<TheoremReport>], elapsed: Duration) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = elapsed <= Duration::from_secs(600);
    for (b, rs) in sweep_specs().iter().zip(reports) {
        let passed = rs.iter().filter(|r| r.passed).count();
        let doubled = rs.iter().filter(|r| r.doubled).count();
        let min_best = rs.iter().map(|r| r.search.best_count).min().unwrap_or(0);
        pass &= passed == rs.len() && rs.len() == b.count;
        parts.push(format!("n={} {passed}/{} (min best {min_best}, doubled {doubled})", b.n, rs.len()));
    }
    outcome(pass, format!("{}; {:.1}s", parts.join(", "), elapsed.as_secs_f64()))
}

fn baseline(reports: &[Vec<TheoremReport>]) -> Outcome {
    let all: Vec<&TheoremReport> = reports.iter().flatten().collect();
    let late: Vec<Option<usize>> = all
        .iter()
        .map(|r| r.search.baseline_probe)
        .filter(|b| !matches!(b, Some(i) if *i < BASELINE_PROBES))
        .collect();
    let worst = all.iter().filter_map(|r| r.search.baseline_probe).max();
    outcome(
        late.is_empty() && all.iter().all(|r| r.baseline_ok),
        format!("{} instances, latest baseline probe {worst:?}, {} late", all.len(), late.len()),
    )
}

fn triangle_grid() -> Outcome {
    let t = canned_polytope("triangle").unwrap();
    let (lo, hi) = bounds(&t);
    let n = 500;
    let counts: Vec<usize> = (0..n * n)
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = (k / n, k % n);
            let y = Point::from_column_slice(&[
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n as f64,
            ]);
            (t.interior_margin(&y) > 0.0).then(|| count_normals_strict(&t, &y))
        })
        .collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let eight = counts.iter().filter(|&&c| c >= 8).count();
    outcome(max == 6 && eight == 0, format!("{} interior samples, max {max}, {eight} with >= 8", counts.len()))
}

fn bounds(p: &Polytope) -> (Vec<f64>, Vec<f64>) {
    let n = p.dim();
    let lo = (0..n).map(|i| p.vertices().iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi = (0..n).map(|i| p.vertices().iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    (lo, hi)
}

fn thin_tetra() -> Outcome {
    let t = thin_tetrahedron(THIN_TETRAHEDRON_FLAT).unwrap();
    let search = max_normals_search(&t, &SearchOptions::new(3, SEED));
    let (lo, hi) = bounds(&t);
    let n = 200;
    let (samples, max) = (0..n * n * n)
        .into_par_iter()
        .filter_map(|k| {
            let idx = [k / (n * n), (k / n) % n, k % n];
            let y = Point::from_iterator(3, (0..3).map(|a| lo[a] + (hi[a] - lo[a]) * (idx[a] as f64 + 0.5) / n as f64));
            (t.interior_margin(&y) > 0.0).then(|| (1usize, count_normals_strict(&t, &y)))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    outcome(
        search.best_count == 10 && max <= 10,
        format!("search best {}, grid max {max} over {samples} interior samples", search.best_count),
    )
}

fn cube_center() -> Outcome {
    let c = canned_polytope("cube3").unwrap();
    let y = pt(&[0.0, 0.0, 0.0]);
    let recs = normals_from_point(&c, &y, DEFAULT_TOL).unwrap();
    let tally = morse_tally(&recs, 3).unwrap();
    let h = mesh_spacing(&c, 40);
    let oracle = boundary_oracle(&c, &y, 40, h * h);
    let grid = compare_boundary_oracle(2, 50, 200, 11);
    let space = compare_boundary_oracle(3, 50, 400, 12);
    let pass = recs.len() == 26
        && tally.by_index == [6, 12, 8]
        && tally.alternating_sum == 2
        && oracle == [6, 12, 8]
        && grid.mismatches.is_empty()
        && space.mismatches.is_empty()
        && grid.compared + space.compared >= 100;
    outcome(
        pass,
        format!(
            "{} records, tally {:?}, alternating sum {}, oracle {oracle:?}; random trials {} + {} matched, {} mismatches",
            recs.len(),
            tally.by_index,
            tally.alternating_sum,
            grid.compared,
            space.compared,
            grid.mismatches.len() + space.mismatches.len()
        ),
    )
}

fn morse_suite() -> Outcome {
    let violations: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|i| {
            let n = 2 + (i % 3) as usize;
            let p = generic(n, n + 1 + (i / 3 % 5) as usize, derive_seed(SEED, i));
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED ^ 0x6d6f, i));
            let y = random_interior_point(&p, 1e-3, &mut rng);
            let (_, recs) = match generic_normals(&p, &y, DEFAULT_TOL, 1e-7, 20, &mut rng) {
                Ok(r) => r,
                Err(e) => return Some(format!("pair {i}: {e}")),
            };
            if let Err(e) = morse_tally(&recs, n) {
                return Some(format!("pair {i}: {e}"));
            }
            recs.iter()
                .find(|r| (r.morse_index == n - 1) != (r.dim == 0) || (r.morse_index == 0) != (r.dim == n - 1))
                .map(|r| format!("pair {i}: index {} on a face of dimension {}", r.morse_index, r.dim))
        })
        .collect();
    outcome(violations.is_empty(), format!("1000 pairs over n = 2..4, {} violations {:?}", violations.len(), violations.first()))
}

fn bifurcation_scans() -> Outcome {
    let results: Vec<(usize, Option<String>)> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let p = generic(3, 4 + (i % 5) as usize, derive_seed(SEED ^ 0x7363, i));
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let a = random_interior_point(&p, 1e-3, &mut rng);
            let b = random_interior_point(&p, 1e-3, &mut rng);
            match scan_segment(&p, &a, &b, 64, MAX_DEPTH) {
                Ok(s) => {
                    let bad = s.crossings.iter().find(|c| c.delta().abs() != 2);
                    (s.crossings.len(), bad.map(|c| format!("segment {i}: change {}", c.delta())))
                }
                Err(e) => (0, Some(format!("segment {i}: {e}"))),
            }
        })
        .collect();
    let changes: usize = results.iter().map(|r| r.0).sum();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    outcome(bad.is_empty(), format!("100 segments, {changes} count changes, {} flagged {:?}", bad.len(), bad.first()))
}

fn active_regions() -> Outcome {
    let polys: Vec<Polytope> = (0..10u64)
        .map(|i| {
            let n = 2 + (i % 3) as usize;
            generic(n, n + 2 + (i % 4) as usize, derive_seed(SEED ^ 0x6172, i))
        })
        .collect();
    let mut agree = 0usize;
    let mut skipped = 0usize;
    let mut disagree = Vec::new();
    for (k, p) in polys.iter().enumerate() {
        let regions: Vec<_> = p.faces().iter().map(|f| active_region(p, f.id)).collect();
        let tol = DEFAULT_TOL * 1e3;
        let stats: Vec<(usize, usize, Option<String>)> = (0..10_000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(k as u64, i));
                let y = random_interior_point(p, 1e-6, &mut rng);
                let recs = normals_from_point(p, &y, tol).unwrap();
                let (mut ok, mut skip) = (0, 0);
                for (f, ar) in p.faces().iter().zip(&regions) {
                    let rec = recs.iter().find(|r| r.face == f.id);
                    if rec.is_some_and(|r| r.marginal) || ar.margin(&y).abs() < tol * p.scale() {
                        skip += 1;
                        continue;
                    }
                    if ar.contains(&y) != rec.is_some() {
                        return (ok, skip, Some(format!("polytope {k} point {i} face {}", f.id)));
                    }
                    ok += 1;
                }
                (ok, skip, None)
            })
            .collect();
        for (ok, skip, bad) in stats {
            agree += ok;
            skipped += skip;
            disagree.extend(bad);
        }
    }
    outcome(
        disagree.is_empty(),
        format!("10 polytopes x 10^4 points: {agree} face checks agree, {skipped} marginal skipped, {} disagree {:?}", disagree.len(), disagree.first()),
    )
}

fn cone_parity() -> Outcome {
    let polys: Vec<Polytope> = (0..12u64).map(|i| generic(3 + (i % 3) as usize, 6 + (i / 3 % 3) as usize, derive_seed(SEED ^ 0x636f, i))).collect();
    let frames: Vec<Vec<ConeFrame>> = polys
        .iter()
        .map(|p| {
            p.faces()
                .iter()
                .filter(|f| f.dim + 2 <= p.dim())
                .map(|f| ConeFrame::new(p, f.id).unwrap())
                .collect()
        })
        .collect();
    let results: Vec<Result<usize, String>> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let k = (i % polys.len() as u64) as usize;
            let (p, fs) = (&polys[k], &frames[k]);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED ^ 0x7061, i));
            let frame = &fs[rng.random_range(0..fs.len())];
            let cone = p.cone_of_face(frame.face);
            for _ in 0..50 {
                let y = random_cone_point(frame, p.scale() * rng.random_range(0.1..2.0), &mut rng);
                match cone_sqd_critical_points(p, &cone, &y, DEFAULT_TOL) {
                    Ok(rep) if rep.records.iter().all(|r| !r.marginal) => {
                        return if rep.count % 2 == 1 { Ok(rep.count) } else { Err(format!("evaluation {i}: count {}", rep.count)) };
                    }
                    Ok(_) | Err(Error::PointNotInCone { .. }) => continue,
                    Err(e) => return Err(format!("evaluation {i}: {e}")),
                }
            }
            Err(format!("evaluation {i}: no non-marginal point"))
        })
        .collect();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let max = results.iter().filter_map(|r| r.as_ref().ok()).max();
    outcome(bad.is_empty(), format!("10^4 evaluations over n = 3..5, largest count {max:?}, {} violations {:?}", bad.len(), bad.first()))
}

fn skew_triangles() -> Outcome {
    let results: Vec<(Verdict, Option<String>)> = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED ^ 0x7472, i));
            let q = random_spherical_simplex(3, &mut rng);
            let t = SphericalTriangle::from_polytope(&q).unwrap();
            let class = match classify_triangle(&t, CLASSIFY_TOL) {
                Ok(c) => c,
                Err(e) => return (Verdict::Degenerate, Some(format!("triangle {i}: {e}"))),
            };
            let problem = match class.verdict {
                Verdict::Skew => skew_signature_check(&t, &class, 100, &mut rng).err().map(|e| format!("triangle {i}: {e}")),
                Verdict::Nice | Verdict::Degenerate => None,
            };
            let problem = problem.or_else(|| {
                (skew_roles(&class.signature).is_none() && class.verdict == Verdict::Skew)
                    .then(|| format!("triangle {i}: signature violated but verdict {:?}", class.verdict))
            });
            (class.verdict, problem)
        })
        .collect();
    let count = |v: Verdict| results.iter().filter(|r| r.0 == v).count();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.1.as_ref()).collect();
    outcome(
        bad.is_empty(),
        format!(
            "10^4 triangles: {} nice, {} skew, {} marginal (skipped); {} violations {:?}",
            count(Verdict::Nice),
            count(Verdict::Skew),
            count(Verdict::Degenerate),
            bad.len(),
            bad
        ),
    )
}

fn nice_pipeline(batches: &[Vec<Polytope>]) -> Outcome {
    let polys: Vec<&Polytope> = batches.iter().flatten().collect();
    let results: Vec<(usize, usize, Vec<String>)> = polys
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut problems = Vec::new();
            let census = match skew_census(p) {
                Ok(c) => c,
                Err(e) => return (0, 0, vec![format!("polytope {i}: {e}")]),
            };
            if let Some(a) = &census.alarm {
                problems.push(format!("polytope {i}: alarm {a}"));
            }
            let (mut certified, mut propagated) = (0, 0);
            for fv in census.faces.iter().filter(|f| f.verdict == Verdict::Nice) {
                let face = polynormals::FaceId(fv.face);
                let seed = derive_seed(SEED ^ i as u64, fv.face as u64);
                let cert = match certify_nice(p, face, &[], NICE_BUDGET, seed, DEFAULT_TOL) {
                    Ok(o) => match o.certificate() {
                        Some(c) if c.count >= 7 => c.clone(),
                        _ => {
                            problems.push(format!("polytope {i} face {}: no certificate", fv.face));
                            continue;
                        }
                    },
                    Err(e) => {
                        problems.push(format!("polytope {i} face {}: {e}", fv.face));
                        continue;
                    }
                };
                certified += 1;
                match check_propagation(p, &cert, NICE_BUDGET, seed, DEFAULT_TOL) {
                    Ok(rep) => {
                        for e in &rep.entries {
                            match e.outcome.certificate() {
                                Some(c) if c.count >= e.target => propagated += 1,
                                _ => problems.push(format!("polytope {i} face {} -> {}: not propagated", fv.face, e.face)),
                            }
                        }
                    }
                    Err(e) => problems.push(format!("polytope {i} face {}: {e}", fv.face)),
                }
            }
            (certified, propagated, problems)
        })
        .collect();
    let certified: usize = results.iter().map(|r| r.0).sum();
    let propagated: usize = results.iter().map(|r| r.1).sum();
    let problems: Vec<&String> = results.iter().flat_map(|r| &r.2).collect();
    outcome(
        problems.is_empty() && certified > 0,
        format!(
            "{} polytopes: {certified} nice faces certified (>= 7 criticals), {propagated} facet certificates propagated; {} problems {:?}",
            polys.len(),
            problems.len(),
            problems.first()
        ),
    )
}

fn load_cube4_witness(inst: &ColoringInstance) -> Option<Coloring> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/cube4_coloring.json")).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    let reds: Vec<Vec<usize>> = serde_json::from_value(v["red_items"].clone()).ok()?;
    let c = Coloring::from_red_items(inst, &reds).ok()?;
    c.is_valid(inst).then_some(c)
}

fn coloring() -> Outcome {
    let timed = |f: &dyn Fn() -> bool| {
        let t = Instant::now();
        let ok = f();
        (ok, t.elapsed())
    };
    let d4 = ColoringInstance::simplex(4).unwrap();
    let (unsat, t1) = timed(&|| {
        let ex = matches!(
            find_coloring(&d4, SolveMode::Exhaustive),
            Ok(ColoringOutcome::Unsatisfiable { proof: UnsatProof::Exhaustive { assignments: 1024 } })
        );
        ex && matches!(divisibility_certificate(&d4), Some(UnsatProof::Divisibility { .. }))
    });
    let (d3, t2) = timed(&|| {
        let inst = ColoringInstance::simplex(3).unwrap();
        matches!(find_coloring(&inst, SolveMode::Backtracking), Ok(o) if o.coloring().is_some_and(|c| c.is_valid(&inst)))
    });
    let (cube, t3) = timed(&|| {
        let inst = instance_from_polytope(&canned_polytope("cube4").unwrap()).unwrap();
        load_cube4_witness(&inst).is_some()
            && matches!(find_coloring(&inst, SolveMode::Backtracking), Ok(o) if o.coloring().is_some())
    });
    let second = Duration::from_secs(1);
    outcome(
        unsat && d3 && cube && t1 < second && t2 < second && t3 < second,
        format!("simplex4 unsatisfiable {unsat} ({t1:?}), simplex3 colorable {d3} ({t2:?}), cube4 witness valid {cube} ({t3:?})"),
    )
}

fn spherical_tetrahedra() -> Outcome {
    let samples = 100_000u64;
    let results: Vec<Option<Result<usize, String>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(SEED ^ 0x7465, i));
            let q = random_spherical_simplex(4, &mut rng);
            for v in 0..4 {
                let t = SphericalTriangle::from_polytope(&q.vertex_figure(v).ok()?).ok()?;
                if classify_triangle(&t, CLASSIFY_TOL).ok()?.verdict != Verdict::Skew {
                    return None;
                }
            }
            Some(match verify_eight_short_criticals(&q, CLASSIFY_TOL) {
                Ok(r) if r.passed && r.short_count >= 8 && r.cycle.acute_edges.len() == 4 => Ok(r.short_count),
                Ok(r) => Err(format!("tetrahedron {i}: {} short criticals, {} acute edges", r.short_count, r.cycle.acute_edges.len())),
                Err(e) => Err(format!("tetrahedron {i}: {e}")),
            })
        })
        .collect();
    let found: Vec<&Result<usize, String>> = results.iter().flatten().collect();
    let bad: Vec<&String> = found.iter().filter_map(|r| r.as_ref().err()).collect();
    let min = found.iter().filter_map(|r| r.as_ref().ok()).min();
    if found.len() < 10 {
        return outcome(true, format!("{samples} tetrahedra, only {} all-skew (reported, not judged)", found.len()));
    }
    outcome(
        bad.is_empty(),
        format!("{samples} tetrahedra, {} all-skew, fewest short criticals {min:?}; {} failures {:?}", found.len(), bad.len(), bad.first()),
    )
}

fn determinism(batches: &[Vec<Polytope>], reference: &[Vec<TheoremReport>]) -> Outcome {
    let render = |r: &[Vec<TheoremReport>]| serde_json::to_string(r).unwrap();
    let want = render(reference);
    let mut detail = Vec::new();
    let mut pass = true;
    for jobs in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().unwrap();
        let got = pool.install(|| render(&sweep_reports(batches)));
        let same = got == want;
        pass &= same;
        detail.push(format!("jobs={jobs} identical {same}"));
    }
    outcome(pass, format!("{} report bytes; {}", want.len(), detail.join(", ")))
}

fn main() {
    let start = Instant::now();
    let batches = sweep_polytopes();
    let reports = sweep_reports(&batches);
    let sweep_time = start.elapsed();

    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "theorem sweep", Box::new(|| theorem_sweep(&reports, sweep_time))),
        (2, "baseline within 10^3 probes", Box::new(|| baseline(&reports))),
        (3, "triangle negative control", Box::new(triangle_grid)),
        (4, "thin tetrahedron", Box::new(thin_tetra)),
        (5, "cube center", Box::new(cube_center)),
        (6, "Morse relations", Box::new(morse_suite)),
        (7, "bifurcation scans", Box::new(bifurcation_scans)),
        (8, "active-region equivalence", Box::new(active_regions)),
        (9, "cone parity", Box::new(cone_parity)),
        (10, "skew-triangle pattern", Box::new(skew_triangles)),
        (11, "nice-face pipeline", Box::new(|| nice_pipeline(&batches))),
        (12, "coloring", Box::new(coloring)),
        (13, "spherical tetrahedra", Box::new(spherical_tetrahedra)),
        (14, "determinism across jobs", Box::new(|| determinism(&batches, &reports))),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, name, run) in &criteria {
        if !filter.is_empty() && !filter.contains(k) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {k:>2} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} failed, total {:.1}s", failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
