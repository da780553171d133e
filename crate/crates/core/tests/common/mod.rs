#![allow(dead_code)]

use std::collections::HashMap;

use polynormals::geometry::DEFAULT_TOL;
use polynormals::normals::{normals_from_point, random_interior_point, NormalRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use polynormals::search::{random_simple_polytope, GeneratorSpec};
use polynormals::{FaceId, Point, Polytope};

pub fn pt(c: &[f64]) -> Point {
    Point::from_column_slice(c)
}

pub fn generic(n: usize, m: usize, seed: u64) -> Polytope {
    random_simple_polytope(&GeneratorSpec::tangent(n, m, seed)).expect("generator")
}

/// Index tally (minima, saddles, maxima) of a record set.
pub fn tally_of(recs: &[NormalRecord], n: usize) -> [usize; 3] {
    let mut t = [0; 3];
    for r in recs {
        let k = if r.morse_index == 0 {
            0
        } else if r.morse_index == n - 1 {
            2
        } else {
            1
        };
        t[k] += 1;
    }
    t
}

fn incident(p: &Polytope, a: FaceId, b: FaceId) -> bool {
    let (fa, fb) = (&p.face(a).facet_ids, &p.face(b).facet_ids);
    fa.iter().all(|x| fb.contains(x)) || fb.iter().all(|x| fa.contains(x))
}

/// Outcome of comparing the record sets against the boundary oracle.
pub struct OracleComparison {
    pub compared: usize,
    pub skipped: usize,
    pub mismatches: Vec<String>,
}

/// Compares `normals_from_point` with `boundary_oracle` on random
/// polytopes and points in dimension 2 or 3 until `wanted` trials have been
/// compared (or `max_trials` drawn). Trials the grid cannot resolve are
/// skipped: records within a few grid steps of a criticality threshold, two
/// critical directions a few grid steps apart (plane), or incident critical
/// faces of adjacent dimension whose values of `|x - y|^2` differ by less
/// than twice the persistence threshold (space).
pub fn compare_boundary_oracle(n: usize, wanted: usize, max_trials: u64, seed: u64) -> OracleComparison {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleComparison { compared: 0, skipped: 0, mismatches: Vec::new() };
    for t in 0..max_trials {
        let p = generic(n, n + 2 + t as usize % (9 - 2 * n), seed * 100_000 + t);
        let y = random_interior_point(&p, 0.05, &mut rng);
        let (res, persist, recs, unresolved) = if n == 2 {
            let res = 20000;
            let step = std::f64::consts::TAU / res as f64;
            let recs = normals_from_point(&p, &y, 4.0 * step).unwrap();
            let dirs: Vec<_> = recs.iter().map(|r| (&r.base - &y).normalize()).collect();
            let crowded = dirs
                .iter()
                .enumerate()
                .any(|(i, a)| dirs[i + 1..].iter().any(|b| a.dot(b).clamp(-1.0, 1.0).acos() < 8.0 * step));
            (res, 0.0, recs, crowded)
        } else {
            let res = 60;
            let h = mesh_spacing(&p, res);
            let persist = h * h;
            let recs = normals_from_point(&p, &y, 1e-6).unwrap();
            let close = recs.iter().enumerate().any(|(i, a)| {
                recs[i + 1..].iter().any(|b| {
                    a.dim.abs_diff(b.dim) == 1 && incident(&p, a.face, b.face) && (a.sqdist - b.sqdist).abs() < 2.0 * persist
                })
            });
            (res, persist, recs, close)
        };
        if unresolved || recs.iter().any(|r| r.marginal) {
            out.skipped += 1;
            continue;
        }
        out.compared += 1;
        let (got, want) = (boundary_oracle(&p, &y, res, persist), tally_of(&recs, n));
        if got != want {
            out.mismatches.push(format!("n={n} trial {t} y={:?}: oracle {got:?}, records {want:?}", y.as_slice()));
        }
        if out.compared == wanted {
            break;
        }
    }
    out
}

/// Distance from `y` to the boundary along the unit direction `u`, by ray
/// shooting against the facet inequalities.
pub fn radial(p: &Polytope, y: &Point, u: &Point) -> f64 {
    p.facets()
        .iter()
        .filter_map(|h| {
            let a = h.normal.dot(u);
            (a > 0.0).then(|| (h.offset - h.normal.dot(y)) / a)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Brute-force count of the critical points of `f(x) = |x - y|^2` on the
/// boundary, by sampling `f` on a fine grid and testing local extremality.
///
/// In the plane the boundary is seen from `y` through its radial function on
/// `res` equally spaced angles, and a sample counts when it is a strict local
/// extremum among its two neighbours. In space each facet is triangulated
/// (its centroid joined to its edges, each triangle carrying a barycentric
/// grid of resolution `res`), so the kinks of `f` along edges lie on mesh
/// edges; minima and maxima are the sublevel and superlevel components of
/// `f` on the mesh that persist longer than `persist`, and saddles follow
/// from the Euler characteristic of the sphere. Returns the number of
/// minima, saddles and maxima.
pub fn boundary_oracle(p: &Polytope, y: &Point, res: usize, persist: f64) -> [usize; 3] {
    match p.dim() {
        2 => {
            let dir = |k: usize| {
                let t = std::f64::consts::TAU * k as f64 / res as f64;
                pt(&[t.cos(), t.sin()])
            };
            let rho: Vec<f64> = (0..res).map(|k| radial(p, y, &dir(k))).collect();
            let mut counts = [0; 3];
            for k in 0..res {
                let (a, b, c) = (rho[(k + res - 1) % res], rho[k], rho[(k + 1) % res]);
                if b < a && b < c {
                    counts[0] += 1;
                } else if b > a && b > c {
                    counts[2] += 1;
                }
            }
            counts
        }
        3 => {
            let (pts, adj) = boundary_mesh(p, res);
            let f: Vec<f64> = pts.iter().map(|x| (x - y).norm_squared()).collect();
            let minima = persistent_components(&f, &adj, persist);
            let neg: Vec<f64> = f.iter().map(|v| -v).collect();
            let maxima = persistent_components(&neg, &adj, persist);
            [minima, minima + maxima - 2, maxima]
        }
        n => panic!("boundary oracle covers dimensions 2 and 3, got {n}"),
    }
}

/// Longest edge of the boundary mesh of resolution `res`.
pub fn mesh_spacing(p: &Polytope, res: usize) -> f64 {
    let mut longest: f64 = 0.0;
    for f in p.faces_of_dim(2) {
        let c = centroid(p, f.id);
        for e in p.subfaces(f.id, 1) {
            let ids = &p.face(e).vertex_ids;
            let (a, b) = (&p.vertices()[ids[0]], &p.vertices()[ids[1]]);
            longest = longest.max((a - b).norm()).max((a - &c).norm()).max((b - &c).norm());
        }
    }
    longest / res as f64
}

fn centroid(p: &Polytope, face: FaceId) -> Point {
    let f = p.face(face);
    let mut c = Point::zeros(p.dim());
    for &v in &f.vertex_ids {
        c += &p.vertices()[v];
    }
    c / f.vertex_ids.len() as f64
}

/// Triangulated boundary of a 3-polytope: mesh points and adjacency. Grid
/// points on shared edges are computed from the same endpoints in the same
/// order, so they coincide exactly across facets.
fn boundary_mesh(p: &Polytope, res: usize) -> (Vec<Point>, Vec<Vec<usize>>) {
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut pts: Vec<Point> = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut id = |x: Point, pts: &mut Vec<Point>, adj: &mut Vec<Vec<usize>>| -> usize {
        let key: Vec<i64> = x.iter().map(|c| (c * 1e9).round() as i64).collect();
        *index.entry(key).or_insert_with(|| {
            pts.push(x);
            adj.push(Vec::new());
            pts.len() - 1
        })
    };
    for f in p.faces_of_dim(2) {
        let c = centroid(p, f.id);
        for e in p.subfaces(f.id, 1) {
            let mut ids = p.face(e).vertex_ids.clone();
            ids.sort();
            let (a, b) = (&p.vertices()[ids[0]], &p.vertices()[ids[1]]);
            let grid = |i: usize, k: usize| -> Point {
                // barycentric (res - i - k, i, k) / res over (a, b, c)
                let (wa, wb, wc) = ((res - i - k) as f64, i as f64, k as f64);
                (a * wa + b * wb + &c * wc) / res as f64
            };
            for k in 0..=res {
                for i in 0..=res - k {
                    let v = id(grid(i, k), &mut pts, &mut adj);
                    let link = |w: usize, adj: &mut Vec<Vec<usize>>| {
                        adj[v].push(w);
                        adj[w].push(v);
                    };
                    if i + k < res {
                        let w = id(grid(i + 1, k), &mut pts, &mut adj);
                        link(w, &mut adj);
                        let w = id(grid(i, k + 1), &mut pts, &mut adj);
                        link(w, &mut adj);
                    }
                    if i > 0 {
                        let w = id(grid(i - 1, k + 1), &mut pts, &mut adj);
                        link(w, &mut adj);
                    }
                }
            }
        }
    }
    (pts, adj)
}

/// Number of sublevel-set components of a sampled function whose lifetime
/// exceeds `persist`, counting the one that never dies.
fn persistent_components(values: &[f64], adj: &[Vec<usize>], persist: f64) -> usize {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut parent: Vec<usize> = (0..values.len()).collect();
    let mut birth = vec![f64::NAN; values.len()];
    let mut seen = vec![false; values.len()];
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut count = 1;
    for &v in &order {
        seen[v] = true;
        birth[v] = values[v];
        for &u in &adj[v] {
            if !seen[u] {
                continue;
            }
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a == b {
                continue;
            }
            let (old, young) = if birth[a] <= birth[b] { (a, b) } else { (b, a) };
            if values[v] - birth[young] > persist {
                count += 1;
            }
            parent[young] = old;
        }
    }
    count
}

/// Faces carrying a normal, found through the facet normals: `z` is critical
/// on `F` iff `z - y` is a strictly positive combination of the outward
/// normals of the facets through `F` and `z` is in the relative interior.
pub fn multiplier_oracle(p: &Polytope, y: &Point) -> Vec<FaceId> {
    let mut out = Vec::new();
    for f in p.faces() {
        let hs: Vec<_> = f.facet_ids.iter().map(|&j| &p.facets()[j]).collect();
        let k = hs.len();
        let mut g = nalgebra::DMatrix::zeros(k, k);
        let mut rhs = nalgebra::DVector::zeros(k);
        for a in 0..k {
            for b in 0..k {
                g[(a, b)] = hs[a].normal.dot(&hs[b].normal);
            }
            rhs[a] = hs[a].offset - hs[a].normal.dot(y);
        }
        let Some(lambda) = g.lu().solve(&rhs) else { continue };
        if lambda.iter().any(|&l| l <= 0.0) {
            continue;
        }
        let mut z = y.clone();
        for (l, h) in lambda.iter().zip(&hs) {
            z.axpy(*l, &h.normal, 1.0);
        }
        let inside = p
            .facets()
            .iter()
            .enumerate()
            .filter(|(j, _)| !f.facet_ids.contains(j))
            .all(|(_, h)| h.slack(&z) > 0.0);
        if inside {
            out.push(f.id);
        }
    }
    out
}

pub fn tol() -> f64 {
    DEFAULT_TOL
}
