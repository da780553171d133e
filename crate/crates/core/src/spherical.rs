//! Spherical links of faces, nice/skew triangles, and the squared-distance
//! function on spherical simplices.
//!
//! Links of faces of simple polytopes are spherical simplices: `k` unit
//! vectors in `R^k` whose positive span is the cone of the face modulo its
//! lineality space. Every nonempty proper vertex subset spans a face.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{FaceId, HalfSpace, Polytope};
use crate::linalg::{self, Point};

/// Default margin separating Nice, Skew and Degenerate verdicts.
pub const CLASSIFY_TOL: f64 = 1e-8;

const RIGHT: f64 = std::f64::consts::FRAC_PI_2;

fn angle(a: &Point, b: &Point) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

/// Unit tangent at `at` of the geodesic towards `to`.
fn tangent(at: &Point, to: &Point) -> Point {
    (to - at * at.dot(to)).normalize()
}

#[derive(Clone, Debug)]
pub struct SphericalPolytope {
    pub vertices: Vec<Point>,
    /// Nonempty proper vertex subsets, by size then lexicographically.
    pub faces: Vec<Vec<usize>>,
    /// Face of the polytope this is the link of.
    pub origin_face: Option<FaceId>,
    /// For links: the face of the polytope each vertex comes from.
    pub vertex_faces: Vec<FaceId>,
}

fn proper_subsets(k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1..(1usize << k) - 1)
        .map(|m| (0..k).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

impl SphericalPolytope {
    /// Spherical simplex on `k` linearly independent vectors of `R^k`.
    pub fn simplex(vertices: Vec<Point>) -> Result<Self> {
        let k = vertices.len();
        if k < 2 || vertices.iter().any(|v| v.len() != k) {
            return Err(Error::DegenerateInput(format!(
                "a spherical simplex needs k unit vectors in R^k, got {k}"
            )));
        }
        let vertices: Vec<Point> = vertices.into_iter().map(|v| v.normalize()).collect();
        if linalg::rank(&vertices, 1e-10) < k {
            return Err(Error::DegenerateInput("linearly dependent vertices".into()));
        }
        Ok(SphericalPolytope {
            faces: proper_subsets(k),
            vertices,
            origin_face: None,
            vertex_faces: Vec::new(),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.len()
    }

    /// Coefficients of `y` in the vertex basis; all positive iff `y` is interior.
    pub fn barycentric(&self, y: &Point) -> Point {
        let k = self.ambient_dim();
        linalg::solve(linalg::columns(&self.vertices, k), y).unwrap_or_else(|| Point::zeros(k))
    }

    pub fn contains(&self, y: &Point) -> bool {
        self.barycentric(y).iter().all(|&b| b > 0.0)
    }

    /// Largest `min_i <u, V_i>` over unit `u`; positive iff the simplex fits in
    /// an open hemisphere.
    pub fn hemisphere_margin(&self) -> f64 {
        minmax_center(self).map(|m| m.radius.cos()).unwrap_or(f64::NEG_INFINITY)
    }

    /// Link of vertex `i` inside the simplex: unit tangents towards the other
    /// vertices, in an orthonormal basis of the tangent space at `V_i`.
    pub fn vertex_figure(&self, i: usize) -> Result<SphericalPolytope> {
        let k = self.ambient_dim();
        let vi = &self.vertices[i];
        let basis = linalg::orthonormal_complement(std::slice::from_ref(vi), k);
        let verts = (0..k)
            .filter(|&j| j != i)
            .map(|j| {
                let t = tangent(vi, &self.vertices[j]);
                Point::from_iterator(k - 1, basis.iter().map(|b| b.dot(&t)))
            })
            .collect();
        SphericalPolytope::simplex(verts)
    }
}

/// Link of `face`: one vertex per face of dimension `dim F + 1` containing it,
/// in coordinates of an orthonormal basis of the orthogonal complement of F.
pub fn spherical_link(p: &Polytope, face: FaceId) -> Result<SphericalPolytope> {
    let f = p.face(face);
    let k = p.dim() - f.dim;
    if k < 2 {
        return Err(Error::PreconditionFailed(format!(
            "the link of a face of codimension {k} is not a spherical polytope"
        )));
    }
    let cone = p.cone_of_face(face);
    let basis = &f.affine.normals;
    let vertices = cone
        .rays
        .iter()
        .map(|r| Point::from_iterator(k, basis.iter().map(|q| q.dot(r))))
        .collect();
    let mut sp = SphericalPolytope::simplex(vertices)?;
    sp.origin_face = Some(face);
    sp.vertex_faces = cone.ray_faces.clone();
    Ok(sp)
}

#[derive(Clone, Debug)]
pub struct SphericalTriangle {
    pub v: [Point; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Nice,
    Skew,
    Degenerate,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TriangleSignature {
    /// Interior angle at each vertex.
    pub angles: [f64; 3],
    /// Length of the edge opposite each vertex.
    pub edges: [f64; 3],
    pub obtuse: [bool; 3],
    pub long: [bool; 3],
}

/// Vertex roles in the skew-triangle pattern: the edge `v2 v3` is the only
/// short one and `v2` carries the only obtuse angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SkewRoles {
    pub v1: usize,
    pub v2: usize,
    pub v3: usize,
}

#[derive(Clone, Debug)]
pub struct TriangleClassification {
    pub verdict: Verdict,
    /// Unit witness; present iff the verdict is Nice.
    pub witness: Option<Point>,
    /// Best `min_k <X, g_k>` found over unit X (see [`SphericalTriangle::witness_margin`]).
    pub margin: f64,
    pub signature: TriangleSignature,
}

impl SphericalTriangle {
    pub fn new(v1: Point, v2: Point, v3: Point) -> Result<Self> {
        if [&v1, &v2, &v3].iter().any(|v| v.len() != 3) {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: v1.len(),
            });
        }
        let t = SphericalTriangle {
            v: [v1.normalize(), v2.normalize(), v3.normalize()],
        };
        if t.det().abs() < 1e-12 {
            return Err(Error::DegenerateTriangle);
        }
        Ok(t)
    }

    pub fn from_polytope(sp: &SphericalPolytope) -> Result<Self> {
        if sp.vertices.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: sp.vertices.len(),
            });
        }
        Self::new(sp.vertices[0].clone(), sp.vertices[1].clone(), sp.vertices[2].clone())
    }

    fn det(&self) -> f64 {
        self.v[0].dot(&self.v[1].cross(&self.v[2]))
    }

    /// Dual basis: `<D_i, V_j> = delta_ij`.
    fn dual(&self) -> [Point; 3] {
        let d = self.det();
        let c = |a: usize, b: usize| self.v[a].cross(&self.v[b]) / d;
        [c(1, 2), c(2, 0), c(0, 1)]
    }

    pub fn signature(&self) -> TriangleSignature {
        let mut angles = [0.0; 3];
        let mut edges = [0.0; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            angles[i] = angle(&tangent(&self.v[i], &self.v[j]), &tangent(&self.v[i], &self.v[k]));
            edges[i] = angle(&self.v[j], &self.v[k]);
        }
        TriangleSignature {
            obtuse: angles.map(|a| a > RIGHT),
            long: edges.map(|e| e > RIGHT),
            angles,
            edges,
        }
    }

    /// Unit normals of the twelve open halfspaces (through the origin) whose
    /// intersection is the set of witnesses: three for `<X, V_i> > 0`, two per
    /// edge for the foot of the perpendicular landing inside the edge, three
    /// for X inside the triangle.
    pub fn witness_constraints(&self) -> Vec<Point> {
        let mut g: Vec<Point> = self.v.to_vec();
        for (a, b) in [(1, 2), (2, 0), (0, 1)] {
            let c = self.v[a].dot(&self.v[b]);
            g.push(&self.v[a] - &self.v[b] * c);
            g.push(&self.v[b] - &self.v[a] * c);
        }
        g.extend(self.dual());
        g.into_iter().map(|x| x.normalize()).collect()
    }

    /// `min_k <X/|X|, g_k>`; positive iff X is a witness.
    pub fn witness_margin(&self, x: &Point) -> f64 {
        let x = x.normalize();
        self.witness_constraints()
            .iter()
            .map(|g| g.dot(&x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Signature check of the skew-triangle pattern, without item (3).
pub fn skew_roles(sig: &TriangleSignature) -> Option<SkewRoles> {
    let obtuse: Vec<usize> = (0..3).filter(|&i| sig.obtuse[i]).collect();
    let short: Vec<usize> = (0..3).filter(|&i| !sig.long[i]).collect();
    if obtuse.len() != 1 || short.len() != 1 || obtuse[0] == short[0] {
        return None;
    }
    let (v1, v2) = (short[0], obtuse[0]);
    Some(SkewRoles {
        v1,
        v2,
        v3: 3 - v1 - v2,
    })
}

/// Decides whether a witness exists. The witness set is an open convex cone,
/// so in the gnomonic chart around an interior direction it is an open convex
/// polygon: a 64x64 grid over the chart triangle gives a first guess and the
/// Chebyshev center of the polygon (an LP) refines it. A second LP on the cone
/// itself covers triangles whose chart is badly scaled.
pub fn classify_triangle(t: &SphericalTriangle, tol: f64) -> Result<TriangleClassification> {
    let signature = t.signature();
    let g = t.witness_constraints();
    let dual = t.dual();
    let center = (&dual[0] + &dual[1] + &dual[2]).normalize();
    let chart = linalg::orthonormal_complement(std::slice::from_ref(&center), 3);
    let lift = |u: [f64; 2]| -> Point { &center + &chart[0] * u[0] + &chart[1] * u[1] };
    let margin_of = |x: &Point| -> f64 {
        let x = x.normalize();
        g.iter().map(|gk| gk.dot(&x)).fold(f64::INFINITY, f64::min)
    };

    let corners: Vec<[f64; 2]> = t
        .v
        .iter()
        .map(|v| {
            let s = v / v.dot(&center);
            [s.dot(&chart[0]), s.dot(&chart[1])]
        })
        .collect();
    let lo = [0, 1].map(|i| corners.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min));
    let hi = [0, 1].map(|i| corners.iter().map(|c| c[i]).fold(f64::NEG_INFINITY, f64::max));

    const GRID: usize = 64;
    let arr = |v: &Point| [v[0], v[1], v[2]];
    let (c0, e0, e1) = (arr(&center), arr(&chart[0]), arr(&chart[1]));
    let ga: Vec<[f64; 3]> = g.iter().map(arr).collect();
    let mut best_u = [0.0, 0.0];
    let mut best_m = f64::NEG_INFINITY;
    for a in 0..GRID {
        for b in 0..GRID {
            let u = [
                lo[0] + (hi[0] - lo[0]) * (a as f64 + 0.5) / GRID as f64,
                lo[1] + (hi[1] - lo[1]) * (b as f64 + 0.5) / GRID as f64,
            ];
            let x: [f64; 3] = std::array::from_fn(|i| c0[i] + u[0] * e0[i] + u[1] * e1[i]);
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let m = ga
                .iter()
                .map(|gk| (gk[0] * x[0] + gk[1] * x[1] + gk[2] * x[2]) / norm)
                .fold(f64::INFINITY, f64::min);
            if m > best_m {
                best_m = m;
                best_u = u;
            }
        }
    }
    let mut best = (best_m, lift(best_u));

    let mut rows: Vec<HalfSpace> = g
        .iter()
        .map(|gk| {
            HalfSpace::new(
                Point::from_column_slice(&[-gk.dot(&chart[0]), -gk.dot(&chart[1])]),
                gk.dot(&center),
            )
        })
        .collect();
    let pad = [0, 1].map(|i| 0.1 * (hi[i] - lo[i]) + 1e-9);
    for i in 0..2 {
        let mut e = Point::zeros(2);
        e[i] = 1.0;
        rows.push(HalfSpace::new(e.clone(), hi[i] + pad[i]));
        rows.push(HalfSpace::new(-e, -(lo[i] - pad[i])));
    }
    let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    if let Ok(mp) = crate::lp::max_margin(2, &rows, diam) {
        let x = lift([mp.point[0], mp.point[1]]);
        let m = margin_of(&x);
        if m > best.0 {
            best = (m, x);
        }
    }
    // The chart is badly scaled for near-hemisphere triangles, so also solve
    // directly on the cone intersected with the unit cube.
    let mut cone: Vec<HalfSpace> = g.iter().map(|gk| HalfSpace::new(-gk, 0.0)).collect();
    for i in 0..3 {
        let mut e = Point::zeros(3);
        e[i] = 1.0;
        cone.push(HalfSpace::new(e.clone(), 1.0));
        cone.push(HalfSpace::new(-e, 1.0));
    }
    let direct = crate::lp::max_margin(3, &cone, 1.0).ok().map(|mp| mp.point);
    for x in direct.into_iter().chain([center.clone()]) {
        if x.norm() > 0.0 {
            let m = margin_of(&x);
            if m > best.0 {
                best = (m, x);
            }
        }
    }

    let (margin, x) = best;
    let verdict = if margin >= tol {
        Verdict::Nice
    } else if margin <= -tol {
        Verdict::Skew
    } else {
        Verdict::Degenerate
    };
    Ok(TriangleClassification {
        verdict,
        witness: (verdict == Verdict::Nice).then(|| x.normalize()),
        margin,
        signature,
    })
}

/// Checks a Skew verdict against the skew-triangle pattern, including the
/// implication "`|V1 Z|, |V3 Z| < pi/2` forces `|V2 Z| < pi/2`" on `samples`
/// random points Z of the triangle.
pub fn skew_signature_check(
    t: &SphericalTriangle,
    class: &TriangleClassification,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SkewRoles> {
    if class.verdict != Verdict::Skew {
        return Err(Error::PreconditionFailed(format!(
            "signature check needs a skew triangle, got {:?}",
            class.verdict
        )));
    }
    let roles = skew_roles(&class.signature).ok_or_else(|| {
        Error::SignatureMismatch(format!(
            "angles {:?}, edges {:?}",
            class.signature.angles, class.signature.edges
        ))
    })?;
    for _ in 0..samples {
        let z = random_point_in(&t.v, rng);
        let near = |i: usize| t.v[i].dot(&z) > 0.0;
        if near(roles.v1) && near(roles.v3) && !near(roles.v2) {
            return Err(Error::SignatureMismatch(format!(
                "point {:?} is within pi/2 of V1 and V3 but not of V2",
                z.as_slice()
            )));
        }
    }
    Ok(roles)
}

/// Uniformly weighted random point of the spherical simplex spanned by `v`.
pub fn random_point_in(v: &[Point], rng: &mut impl Rng) -> Point {
    let mut z = Point::zeros(v[0].len());
    for vi in v {
        let w: f64 = -(1.0 - rng.random::<f64>()).ln();
        z.axpy(w, vi, 1.0);
    }
    z.normalize()
}

/// Uniformly random unit vector.
pub fn random_unit(k: usize, rng: &mut impl Rng) -> Point {
    loop {
        let v = Point::from_iterator(k, (0..k).map(|_| StandardNormal.sample(rng)));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Spherical simplex on `k` independent uniformly random unit vectors of `R^k`.
pub fn random_spherical_simplex(k: usize, rng: &mut impl Rng) -> SphericalPolytope {
    loop {
        let verts: Vec<Point> = (0..k).map(|_| random_unit(k, rng)).collect();
        if let Ok(sp) = SphericalPolytope::simplex(verts) {
            return sp;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SphericalCritical {
    /// Vertex subset spanning the face.
    pub face: Vec<usize>,
    pub base: Point,
    pub distance: f64,
    /// Index of the Euclidean analogue; only meaningful for short records.
    pub morse_index: usize,
    /// Base at distance at least pi/2 (the far point of the face's subsphere).
    pub long: bool,
    pub slack: f64,
    pub marginal: bool,
}

/// Critical points of the distance from `y` on the boundary of a spherical
/// simplex. On the great subsphere of a face the distance has two critical
/// points, the unit projection `z` of `y` and its antipode; each counts when it
/// lies in the relative interior and the great sphere through the face
/// orthogonal to the geodesic supports the simplex.
pub fn spherical_sqd_critical_points(
    q: &SphericalPolytope,
    y: &Point,
    tol: f64,
) -> Result<Vec<SphericalCritical>> {
    let k = q.ambient_dim();
    if y.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: y.len(),
        });
    }
    let y = y.normalize();
    let bary = q.barycentric(&y);
    let inside = bary.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if inside <= tol {
        return Err(Error::PointNotInterior { margin: inside });
    }
    let mut out = Vec::new();
    for s in &q.faces {
        let vs: Vec<Point> = s.iter().map(|&i| q.vertices[i].clone()).collect();
        let Some(alpha) = linalg::span_coefficients(&vs, &y) else {
            continue;
        };
        let mut p = Point::zeros(k);
        for (a, v) in alpha.iter().zip(&vs) {
            p.axpy(*a, v, 1.0);
        }
        if p.norm() < 1e-14 {
            continue;
        }
        // unit direction of the geodesic at the base, so the slack does not
        // vanish with the distance
        let w = (&y - &p).normalize();
        let slack = (0..k)
            .filter(|j| !s.contains(j))
            .map(|j| w.dot(&q.vertices[j]))
            .fold(f64::INFINITY, f64::min);
        if slack < -tol {
            continue;
        }
        let amin = alpha.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let amax = alpha.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let z = p.normalize();
        let mut push = |base: Point, long: bool, rel: f64| {
            out.push(SphericalCritical {
                face: s.clone(),
                distance: angle(&y, &base),
                base,
                morse_index: k - 1 - s.len(),
                long,
                slack,
                marginal: slack < tol || rel < tol,
            });
        };
        if amin > -tol {
            push(z.clone(), false, amin);
        }
        if amax < tol {
            push(-z, true, -amax);
        }
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.face.cmp(&b.face)));
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MinMaxCenter {
    pub center: Point,
    /// Largest geodesic distance from the center to the boundary.
    pub radius: f64,
    /// Vertices at distance `radius`.
    pub argmax: Vec<usize>,
}

/// Point minimizing the largest distance to the boundary. While every vertex
/// is within pi/2 that distance is attained at vertices, so this is the
/// center of the smallest cap containing the vertices: with `u = Y / cos d`
/// it is the minimum-norm `u` with `<u, V_i> >= 1`, solved exactly by
/// enumerating active sets (k <= 5 here).
pub fn minmax_center(q: &SphericalPolytope) -> Result<MinMaxCenter> {
    let k = q.ambient_dim();
    let mut best: Option<Point> = None;
    for mask in 1..(1usize << k) {
        let active: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let vs: Vec<Point> = active.iter().map(|&i| q.vertices[i].clone()).collect();
        let m = active.len();
        let mut gram = nalgebra::DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                gram[(a, b)] = vs[a].dot(&vs[b]);
            }
        }
        let Some(lambda) = linalg::solve(gram, &Point::from_element(m, 1.0)) else {
            continue;
        };
        if lambda.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let mut u = Point::zeros(k);
        for (l, v) in lambda.iter().zip(&vs) {
            u.axpy(*l, v, 1.0);
        }
        if q.vertices.iter().any(|v| v.dot(&u) < 1.0 - 1e-10) {
            continue;
        }
        if best.as_ref().is_none_or(|b| u.norm() < b.norm()) {
            best = Some(u);
        }
    }
    let u = best.ok_or_else(|| Error::DegenerateInput("vertices fit in no open hemisphere".into()))?;
    let r = 1.0 / u.norm();
    let center = u * r;
    let argmax = (0..k)
        .filter(|&i| q.vertices[i].dot(&center) <= r + 1e-9)
        .collect();
    Ok(MinMaxCenter {
        center,
        radius: r.clamp(-1.0, 1.0).acos(),
        argmax,
    })
}

#[derive(Clone, Debug)]
pub struct AcuteCycle {
    /// The four vertices in cyclic order along the acute edges.
    pub cycle: Vec<usize>,
    pub acute_edges: Vec<(usize, usize)>,
    /// Dihedral angle along each edge, read at either end.
    pub dihedral: Vec<((usize, usize), f64, f64)>,
}

/// For a spherical tetrahedron whose vertex figures are all skew: the edges
/// whose dihedral angle is acute, which must form a closed 4-cycle.
pub fn acute_edge_cycle(q: &SphericalPolytope) -> Result<AcuteCycle> {
    if q.ambient_dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: q.ambient_dim(),
        });
    }
    // angle[i][j]: angle of the figure at i at its vertex towards j
    let mut ang = [[0.0f64; 4]; 4];
    for i in 0..4 {
        let fig = q.vertex_figure(i)?;
        let t = SphericalTriangle::from_polytope(&fig)?;
        let c = classify_triangle(&t, CLASSIFY_TOL)?;
        if c.verdict != Verdict::Skew {
            return Err(Error::PreconditionFailed(format!(
                "vertex figure {i} is {:?}",
                c.verdict
            )));
        }
        let others: Vec<usize> = (0..4).filter(|&j| j != i).collect();
        for (slot, &j) in others.iter().enumerate() {
            ang[i][j] = c.signature.angles[slot];
        }
    }
    let mut acute_edges = Vec::new();
    let mut dihedral = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let (a, b) = (ang[i][j], ang[j][i]);
            if (a < RIGHT) != (b < RIGHT) {
                return Err(Error::InconsistentDihedralRole(i, j));
            }
            dihedral.push(((i, j), a, b));
            if a < RIGHT {
                acute_edges.push((i, j));
            }
        }
    }
    let degree = |v: usize| acute_edges.iter().filter(|e| e.0 == v || e.1 == v).count();
    if acute_edges.len() != 4 || (0..4).any(|v| degree(v) != 2) {
        return Err(Error::SignatureMismatch(format!(
            "acute edges {acute_edges:?} do not form a 4-cycle"
        )));
    }
    let mut cycle = vec![0usize];
    while cycle.len() < 4 {
        let last = *cycle.last().unwrap();
        let next = acute_edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == last {
                    Some(b)
                } else if b == last {
                    Some(a)
                } else {
                    None
                }
            })
            .find(|v| !cycle.contains(v))
            .unwrap();
        cycle.push(next);
    }
    Ok(AcuteCycle {
        cycle,
        acute_edges,
        dihedral,
    })
}

/// Inward offset applied to a min-max center lying on the boundary.
pub const NUDGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum MaxCase {
    FourVertices,
    ThreeVertices,
    /// The center lies on the edge between the two farthest vertices; this
    /// case cannot occur for all-skew tetrahedra.
    TwoVertices,
}

#[derive(Clone, Debug)]
pub struct EightReport {
    pub center: MinMaxCenter,
    /// Point the critical points are computed from: the center itself, or a
    /// point `NUDGE` inside when the center lies on the boundary.
    pub probe: Point,
    pub case: MaxCase,
    pub cycle: AcuteCycle,
    pub records: Vec<SphericalCritical>,
    pub short_count: usize,
    /// Every local minimum of the distance along the cycle is an edge saddle.
    pub minima_are_saddles: bool,
    /// Every local maximum along the cycle is a vertex maximum.
    pub maxima_are_maxima: bool,
    pub passed: bool,
}

/// Runs the min-max center construction on a tetrahedron with all vertex
/// figures skew and counts short critical points.
pub fn verify_eight_short_criticals(q: &SphericalPolytope, tol: f64) -> Result<EightReport> {
    let cycle = acute_edge_cycle(q)?;
    let center = minmax_center(q)?;
    let case = match center.argmax.len() {
        4 => MaxCase::FourVertices,
        3 => MaxCase::ThreeVertices,
        _ => MaxCase::TwoVertices,
    };
    if case == MaxCase::TwoVertices {
        return Ok(EightReport {
            probe: center.center.clone(),
            center,
            case,
            cycle,
            records: Vec::new(),
            short_count: 0,
            minima_are_saddles: false,
            maxima_are_maxima: false,
            passed: false,
        });
    }
    // with three farthest vertices the center lies on the facet they span;
    // evaluate just inside
    let mut y = center.center.clone();
    if q.barycentric(&y).iter().any(|&b| b <= NUDGE) {
        let inward = q.vertices.iter().fold(Point::zeros(4), |acc, v| acc + v).normalize();
        y = (y + inward * NUDGE).normalize();
    }
    let records = spherical_sqd_critical_points(q, &y, tol)?;
    let short: Vec<&SphericalCritical> = records.iter().filter(|r| !r.long && !r.marginal).collect();
    let has = |face: &[usize], index: usize| {
        short.iter().any(|r| r.face == face && r.morse_index == index)
    };

    let c = &cycle.cycle;
    let mut minima_ok = true;
    let mut maxima_ok = true;
    for pos in 0..4 {
        let (prev, v, next) = (c[(pos + 3) % 4], c[pos], c[(pos + 1) % 4]);
        let vv = &q.vertices[v];
        // distance decreases leaving v towards u iff <Y, tangent> > 0
        let down = |u: usize| y.dot(&tangent(vv, &q.vertices[u])) > 0.0;
        let (dp, dn) = (down(prev), down(next));
        if !dp && !dn {
            minima_ok = false;
        }
        if dp && dn && !has(&[v], 2) {
            maxima_ok = false;
        }
        // interior minimum on the arc v-next
        let pair = [v.min(next), v.max(next)];
        let vs = [q.vertices[pair[0]].clone(), q.vertices[pair[1]].clone()];
        if let Some(a) = linalg::span_coefficients(&vs, &y) {
            if a.iter().all(|&x| x > 0.0) && !has(&pair, 1) {
                minima_ok = false;
            }
        }
    }
    let short_count = short.len();
    Ok(EightReport {
        probe: y.clone(),
        center,
        case,
        cycle,
        short_count,
        records,
        minima_are_saddles: minima_ok,
        maxima_are_maxima: maxima_ok,
        passed: short_count >= 8,
    })
}
