//! Normals from an interior point, enumerated face by face.
//!
//! A face `F` carries the base of a normal from `y` iff the orthogonal
//! projection `z` of `y` onto aff F lies in relint F and the whole polytope
//! sits on `y`'s side of the hyperplane through `z` orthogonal to `y - z`.
//! By convexity the second condition only needs checking at the vertices,
//! and vertices of `F` itself contribute exactly zero, so the criticality
//! slack is the minimum over the vertices off `F`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{FaceId, HalfSpace, Polytope};
use crate::linalg::{self, Point};

#[derive(Clone, Debug, PartialEq)]
pub struct NormalRecord {
    pub face: FaceId,
    pub dim: usize,
    pub base: Point,
    pub sqdist: f64,
    pub morse_index: usize,
    /// Smallest `<y - z, v - z>` over vertices `v` off the face.
    pub slack: f64,
    /// Smallest slack of `z` against the inequalities cutting the face.
    pub relint_margin: f64,
    pub marginal: bool,
}

struct FaceEval {
    z: Point,
    sqdist: f64,
    relint_margin: f64,
    slack: f64,
}

fn eval_face(p: &Polytope, face: FaceId, y: &Point) -> FaceEval {
    let f = p.face(face);
    let z = f.affine.project(y);
    let w = y - &z;
    let relint_margin = p.relint_margin(&z, face);
    let mut slack = f64::INFINITY;
    // <w, v - z> = <w, v - z0> for any z0 in aff F since w is orthogonal to aff F
    for (vi, v) in p.vertices().iter().enumerate() {
        if f.vertex_ids.binary_search(&vi).is_ok() {
            continue;
        }
        let s = w.dot(&(v - &z));
        slack = slack.min(s);
    }
    FaceEval {
        sqdist: w.norm_squared(),
        z,
        relint_margin,
        slack,
    }
}

fn check_interior(p: &Polytope, y: &Point, tol: f64) -> Result<()> {
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: y.len(),
        });
    }
    let margin = p.interior_margin(y);
    if margin <= tol * p.scale() {
        return Err(Error::PointNotInterior { margin });
    }
    Ok(())
}

/// All normals from `y`, sorted by squared distance. Records within `tol`
/// (relative) of a criticality threshold are kept but flagged marginal.
pub fn normals_from_point(p: &Polytope, y: &Point, tol: f64) -> Result<Vec<NormalRecord>> {
    check_interior(p, y, tol)?;
    let len_tol = tol * p.scale();
    let sq_tol = tol * p.scale() * p.scale();
    let n = p.dim();
    let mut out = Vec::new();
    for f in p.faces() {
        let e = eval_face(p, f.id, y);
        if e.relint_margin < -len_tol || e.slack < -sq_tol {
            continue;
        }
        out.push(NormalRecord {
            face: f.id,
            dim: f.dim,
            base: e.z,
            sqdist: e.sqdist,
            morse_index: n - 1 - f.dim,
            slack: e.slack,
            relint_margin: e.relint_margin,
            marginal: e.relint_margin < len_tol || e.slack < sq_tol,
        });
    }
    out.sort_by(|a, b| a.sqdist.total_cmp(&b.sqdist).then(a.face.cmp(&b.face)));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalCount {
    /// Non-marginal normals.
    pub count: usize,
    pub marginal: usize,
}

/// Faces carrying a non-marginal normal, plus the number of marginal ones.
pub fn critical_faces(p: &Polytope, y: &Point, tol: f64) -> Result<(Vec<FaceId>, usize)> {
    check_interior(p, y, tol)?;
    let len_tol = tol * p.scale();
    let sq_tol = tol * p.scale() * p.scale();
    let mut faces = Vec::new();
    let mut marginal = 0;
    for f in p.faces() {
        let e = eval_face(p, f.id, y);
        if e.relint_margin < -len_tol || e.slack < -sq_tol {
            continue;
        }
        if e.relint_margin < len_tol || e.slack < sq_tol {
            marginal += 1;
        } else {
            faces.push(f.id);
        }
    }
    Ok((faces, marginal))
}

pub fn count_normals(p: &Polytope, y: &Point, tol: f64) -> Result<NormalCount> {
    let (faces, marginal) = critical_faces(p, y, tol)?;
    Ok(NormalCount {
        count: faces.len(),
        marginal,
    })
}

/// Count with exact sign tests and no tolerance band; used when localizing
/// bifurcations where every sample is allowed to sit close to a wall.
pub fn count_normals_strict(p: &Polytope, y: &Point) -> usize {
    p.faces()
        .iter()
        .filter(|f| {
            let e = eval_face(p, f.id, y);
            e.relint_margin > 0.0 && e.slack > 0.0
        })
        .count()
}

/// Evaluates normals at `y`, nudging the point by a seeded random offset of
/// relative size `jitter` (up to `retries` times) while marginal records remain.
/// Returns the point actually used.
pub fn generic_normals(
    p: &Polytope,
    y: &Point,
    tol: f64,
    jitter: f64,
    retries: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Point, Vec<NormalRecord>)> {
    let mut point = y.clone();
    for attempt in 0..=retries {
        let records = normals_from_point(p, &point, tol)?;
        if records.iter().all(|r| !r.marginal) {
            return Ok((point, records));
        }
        if attempt == retries {
            let count = records.iter().filter(|r| r.marginal).count();
            return Err(Error::MarginalRecordsPresent { count });
        }
        point = y.clone();
        for x in point.iter_mut() {
            *x += jitter * p.scale() * (rng.random::<f64>() - 0.5);
        }
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorseTally {
    /// Number of critical points of each Morse index `0..n`.
    pub by_index: Vec<usize>,
    pub total: usize,
    pub alternating_sum: i64,
}

/// Counts records per Morse index and checks the Morse relations for the
/// boundary sphere: maxima at vertices, minima at facets, index equal to
/// `n - 1 - dim`, even total and Euler characteristic `1 + (-1)^(n-1)`.
pub fn morse_tally(records: &[NormalRecord], n: usize) -> Result<MorseTally> {
    let marginal = records.iter().filter(|r| r.marginal).count();
    if marginal > 0 {
        return Err(Error::MarginalRecordsPresent { count: marginal });
    }
    let mut by_index = vec![0usize; n];
    for r in records {
        if r.morse_index != n - 1 - r.dim {
            return Err(Error::MorseViolation(format!(
                "face {} of dimension {} has index {}",
                r.face, r.dim, r.morse_index
            )));
        }
        by_index[r.morse_index] += 1;
    }
    let total = records.len();
    let alternating_sum: i64 = by_index
        .iter()
        .enumerate()
        .map(|(m, &c)| if m % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum();
    let euler = if n % 2 == 1 { 2 } else { 0 };
    if total % 2 != 0 {
        return Err(Error::MorseViolation(format!("odd number of critical points: {total}")));
    }
    if by_index[0] == 0 || by_index[n - 1] == 0 {
        return Err(Error::MorseViolation("missing global minimum or maximum".into()));
    }
    if alternating_sum != euler {
        return Err(Error::MorseViolation(format!(
            "alternating sum {alternating_sum} != {euler}"
        )));
    }
    Ok(MorseTally {
        by_index,
        total,
        alternating_sum,
    })
}

/// Points `y` for which a face carries a normal: `proj(y)` in relint F
/// (the slab) and `y - proj(y)` in the polar wedge spanned by the vertices.
#[derive(Clone, Debug)]
pub struct ActiveRegion {
    pub face: FaceId,
    pub base_point: Point,
    /// Strict inequalities in y-space expressing `proj(y)` in relint F.
    pub slab: Vec<HalfSpace>,
    /// Rows `v - z0` for vertices `v` off the face; the wedge condition is
    /// `<y - proj(y), row> >= 0`.
    pub wedge: Vec<Point>,
    directions: Vec<Point>,
    multipliers: Vec<HalfSpace>,
}

impl ActiveRegion {
    fn offset(&self, y: &Point) -> Point {
        let d = y - &self.base_point;
        let mut w = d.clone();
        for q in &self.directions {
            w.axpy(-q.dot(&d), q, 1.0);
        }
        w
    }

    /// Signed membership margin; positive iff `y` is in the (open) region.
    pub fn margin(&self, y: &Point) -> f64 {
        let w = self.offset(y);
        let slab = self.slab.iter().map(|h| h.slack(y)).fold(f64::INFINITY, f64::min);
        let wedge = self
            .wedge
            .iter()
            .map(|r| w.dot(r) / r.norm())
            .fold(f64::INFINITY, f64::min);
        slab.min(wedge)
    }

    pub fn contains(&self, y: &Point) -> bool {
        self.margin(y) > 0.0
    }

    /// Compact y-space description: the slab plus one inequality per facet
    /// through the face (non-negativity of the normal-cone multipliers).
    pub fn halfspaces(&self) -> Vec<HalfSpace> {
        let mut out = self.slab.clone();
        out.extend(self.multipliers.iter().cloned());
        out
    }
}

pub fn active_region(p: &Polytope, face: FaceId) -> ActiveRegion {
    let f = p.face(face);
    let z0 = f.affine.point.clone();
    let slab = f
        .cutting_facets
        .iter()
        .map(|&j| {
            let a = &p.facets()[j];
            let g = f.affine.project_direction(&a.normal);
            let h = a.offset - a.normal.dot(&z0) + g.dot(&z0);
            HalfSpace::new(g, h)
        })
        .collect();
    let wedge = p
        .vertices()
        .iter()
        .enumerate()
        .filter(|(vi, _)| f.vertex_ids.binary_search(vi).is_err())
        .map(|(_, v)| v - &z0)
        .collect();
    // lambda = -G^{-1} A (y - z0) >= 0 with G = A A^T over the facets through F
    let rows: Vec<Point> = f.facet_ids.iter().map(|&j| p.facets()[j].normal.clone()).collect();
    let k = rows.len();
    let mut gram = nalgebra::DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = rows[i].dot(&rows[j]);
        }
    }
    let inv = gram.try_inverse().expect("facet normals through a face are independent");
    let multipliers = (0..k)
        .map(|i| {
            let mut m = Point::zeros(p.dim());
            for j in 0..k {
                m.axpy(inv[(i, j)], &rows[j], 1.0);
            }
            let off = m.dot(&z0);
            HalfSpace::new(m, off)
        })
        .collect();
    ActiveRegion {
        face,
        base_point: z0,
        slab,
        wedge,
        directions: f.affine.directions.clone(),
        multipliers,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub t0: f64,
    pub t1: f64,
    pub from: usize,
    pub to: usize,
}

impl Crossing {
    pub fn delta(&self) -> i64 {
        self.to as i64 - self.from as i64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentScan {
    pub a: Point,
    pub b: Point,
    /// `(t, count)` at the uniform samples.
    pub samples: Vec<(f64, usize)>,
    /// Localized count changes in increasing `t`.
    pub crossings: Vec<Crossing>,
}

/// Default bisection depth for localizing count changes.
pub const MAX_DEPTH: usize = 40;

/// Samples the normal count along `[a, b]` and localizes each change by
/// bisection until it is a single +-2 step narrower than `1e-6`, or `max_depth`
/// halvings are exhausted.
pub fn scan_segment(
    p: &Polytope,
    a: &Point,
    b: &Point,
    steps: usize,
    max_depth: usize,
) -> Result<SegmentScan> {
    check_interior(p, a, 0.0)?;
    check_interior(p, b, 0.0)?;
    let steps = steps.max(1);
    let lerp = |wa: f64, wb: f64| -> Point { a * wa + b * wb };
    let samples: Vec<(f64, usize)> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let wa = (steps - i) as f64 / steps as f64;
            let wb = i as f64 / steps as f64;
            (wb, count_normals_strict(p, &lerp(wa, wb)))
        })
        .collect();

    let mut crossings = Vec::new();
    for pair in samples.windows(2) {
        let ((t0, c0), (t1, c1)) = (pair[0], pair[1]);
        refine(p, &lerp, t0, c0, t1, c1, 0, max_depth, &mut crossings);
    }
    if let Some(bad) = crossings.iter().find(|c| c.delta().abs() != 2) {
        return Err(Error::NonGenericSample {
            t: 0.5 * (bad.t0 + bad.t1),
            delta: bad.delta(),
        });
    }
    Ok(SegmentScan {
        a: a.clone(),
        b: b.clone(),
        samples,
        crossings,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine(
    p: &Polytope,
    lerp: &impl Fn(f64, f64) -> Point,
    t0: f64,
    c0: usize,
    t1: f64,
    c1: usize,
    depth: usize,
    max_depth: usize,
    out: &mut Vec<Crossing>,
) {
    if c0 == c1 {
        return;
    }
    let single = (c1 as i64 - c0 as i64).abs() == 2;
    if depth >= max_depth || (single && t1 - t0 <= 1e-6) {
        out.push(Crossing {
            t0,
            t1,
            from: c0,
            to: c1,
        });
        return;
    }
    let tm = 0.5 * (t0 + t1);
    let cm = count_normals_strict(p, &lerp(1.0 - tm, tm));
    refine(p, lerp, t0, c0, tm, cm, depth + 1, max_depth, out);
    refine(p, lerp, tm, cm, t1, c1, depth + 1, max_depth, out);
}

/// Uniformly random interior point by rejection from the bounding box, at
/// least `margin * scale` from the boundary. The margin is capped at half the
/// inradius so the rejection always terminates.
pub fn random_interior_point(p: &Polytope, margin: f64, rng: &mut impl Rng) -> Point {
    let n = p.dim();
    let lo = Point::from_iterator(
        n,
        (0..n).map(|i| p.vertices().iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)),
    );
    let hi = Point::from_iterator(
        n,
        (0..n).map(|i| p.vertices().iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)),
    );
    let mut want = margin * p.scale();
    if let Ok((_, r)) = p.incenter() {
        want = want.min(0.5 * r);
    }
    loop {
        let y = Point::from_iterator(n, (0..n).map(|i| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>()));
        if p.interior_margin(&y) > want {
            return y;
        }
    }
}

/// Centroid of the vertices of `face`.
pub fn face_center(p: &Polytope, face: FaceId) -> Point {
    let f = p.face(face);
    let pts: Vec<Point> = f.vertex_ids.iter().map(|&v| p.vertices()[v].clone()).collect();
    linalg::centroid(&pts)
}
