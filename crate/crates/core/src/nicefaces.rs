//! Squared-distance critical points on face cones and nice-face certificates.
//!
//! The faces of the cone of F are the cones of the faces G of P containing F
//! (the apex stratum being aff F itself). A point `y` of the cone has a
//! critical point on G iff its projection `z` onto aff G satisfies the cone
//! inequalities that cut G, and `<y - z, r> >= 0` for every extreme ray `r`
//! off G. The count only depends on the component of `y - z0` orthogonal to
//! F and is invariant under positive scaling of that component.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Cone, FaceId, HalfSpace, Polytope};
use crate::linalg::{self, Point};
use crate::normals::NormalRecord;
use crate::regions::RegionSystem;
use crate::spherical::{
    classify_triangle, minmax_center, random_point_in, spherical_link, SphericalTriangle,
    CLASSIFY_TOL, NUDGE,
};

#[derive(Clone, Debug)]
pub struct ConeCriticalReport {
    pub face: FaceId,
    pub point: Point,
    pub records: Vec<NormalRecord>,
    /// Non-marginal records.
    pub count: usize,
}

/// Critical points of the squared distance from `y` on the boundary of the cone.
pub fn cone_sqd_critical_points(
    p: &Polytope,
    cone: &Cone,
    y: &Point,
    tol: f64,
) -> Result<ConeCriticalReport> {
    let margin = cone.interior_margin(y);
    if margin <= tol * p.scale() {
        return Err(Error::PointNotInCone {
            face: cone.apex_face.0,
            margin,
        });
    }
    let apex = p.face(cone.apex_face);
    let len_tol = tol * p.scale();
    let n = p.dim();
    let mut records = Vec::new();
    for g in p.faces().iter().filter(|g| g.facet_ids.iter().all(|j| apex.facet_ids.contains(j))) {
        let z = g.affine.project(y);
        let w = y - &z;
        let relint = cone
            .halfspaces
            .iter()
            .filter(|(j, _)| !g.facet_ids.contains(j))
            .map(|(_, h)| h.slack(&z))
            .fold(f64::INFINITY, f64::min);
        // ray i lies on the cone face of g iff its face of P lies in g
        let slack = cone
            .rays
            .iter()
            .zip(&cone.ray_faces)
            .filter(|(_, rf)| !g.facet_ids.iter().all(|j| p.face(**rf).facet_ids.contains(j)))
            .map(|(r, _)| w.dot(r))
            .fold(f64::INFINITY, f64::min);
        if relint < -len_tol || slack < -len_tol {
            continue;
        }
        records.push(NormalRecord {
            face: g.id,
            dim: g.dim,
            sqdist: w.norm_squared(),
            base: z,
            morse_index: n - 1 - g.dim,
            slack,
            relint_margin: relint,
            marginal: relint < len_tol || slack < len_tol,
        });
    }
    records.sort_by(|a, b| a.sqdist.total_cmp(&b.sqdist).then(a.face.cmp(&b.face)));
    let count = records.iter().filter(|r| !r.marginal).count();
    Ok(ConeCriticalReport {
        face: cone.apex_face,
        point: y.clone(),
        records,
        count,
    })
}

/// The cone of a face in normal coordinates `x`, where `y = z0 + sum x_i q_i`
/// for an orthonormal basis `q` of the orthogonal complement of the face.
#[derive(Clone, Debug)]
pub struct ConeFrame {
    pub face: FaceId,
    pub base_point: Point,
    pub basis: Vec<Point>,
    /// Extreme rays in normal coordinates (the link vertices).
    pub rays: Vec<Point>,
    /// Critical strata as regions in normal coordinates, boxed to `|x_i| < 1`.
    pub system: RegionSystem,
}

impl ConeFrame {
    pub fn new(p: &Polytope, face: FaceId) -> Result<Self> {
        let link = spherical_link(p, face)?;
        let f = p.face(face);
        let k = link.ambient_dim();
        let rays = link.vertices.clone();
        let inv = linalg::columns(&rays, k)
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("dependent cone rays".into()))?;
        // x = sum beta_i r_i with beta = inv x; interior iff beta > 0
        let mut domain: Vec<HalfSpace> = (0..k)
            .map(|i| HalfSpace::new(-inv.row(i).transpose(), 0.0))
            .collect();
        for i in 0..k {
            let mut e = Point::zeros(k);
            e[i] = 1.0;
            domain.push(HalfSpace::new(e.clone(), 1.0));
            domain.push(HalfSpace::new(-e, 1.0));
        }

        let mut regions = Vec::new();
        let mut labels = Vec::new();
        let ray_facets: Vec<&Vec<usize>> = link.vertex_faces.iter().map(|g| &p.face(*g).facet_ids).collect();
        for mask in 0..(1usize << k) - 1 {
            let s: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            let facets: Vec<usize> = f
                .facet_ids
                .iter()
                .copied()
                .filter(|j| s.iter().all(|&i| ray_facets[i].contains(j)))
                .collect();
            let label = p
                .face_by_facets(&facets)
                .ok_or_else(|| Error::BadIncidence(format!("no face with facets {facets:?}")))?;
            let rs: Vec<Point> = s.iter().map(|&i| rays[i].clone()).collect();
            let mut rows = Vec::new();
            // projection coefficients onto span(r_S) positive
            let gram_inv = if s.is_empty() {
                None
            } else {
                let mut gm = nalgebra::DMatrix::zeros(s.len(), s.len());
                for a in 0..s.len() {
                    for b in 0..s.len() {
                        gm[(a, b)] = rs[a].dot(&rs[b]);
                    }
                }
                gm.try_inverse()
            };
            let project = |v: &Point| -> Point {
                let mut out = Point::zeros(k);
                if let Some(gi) = &gram_inv {
                    let c: Vec<f64> = rs.iter().map(|r| r.dot(v)).collect();
                    for a in 0..rs.len() {
                        let coef: f64 = (0..rs.len()).map(|b| gi[(a, b)] * c[b]).sum();
                        out.axpy(coef, &rs[a], 1.0);
                    }
                }
                out
            };
            if let Some(gi) = &gram_inv {
                for a in 0..rs.len() {
                    let mut row = Point::zeros(k);
                    for b in 0..rs.len() {
                        row.axpy(gi[(a, b)], &rs[b], 1.0);
                    }
                    rows.push(HalfSpace::new(-row, 0.0));
                }
            }
            // <(I - P_S) x, r_j> > 0 for rays off the stratum
            for j in (0..k).filter(|j| !s.contains(j)) {
                let row = &rays[j] - project(&rays[j]);
                rows.push(HalfSpace::new(-row, 0.0));
            }
            regions.push(rows);
            labels.push(label);
        }
        Ok(ConeFrame {
            face,
            base_point: f.affine.point.clone(),
            basis: f.affine.normals.clone(),
            system: RegionSystem::new(k, &domain, &regions, labels),
            rays,
        })
    }

    pub fn codim(&self) -> usize {
        self.rays.len()
    }

    /// Point of R^n with normal coordinates `x`, scaled by `s`.
    pub fn lift(&self, x: &Point, s: f64) -> Point {
        let mut y = self.base_point.clone();
        for (q, c) in self.basis.iter().zip(x.iter()) {
            y.axpy(s * c, q, 1.0);
        }
        y
    }

    pub fn coordinates(&self, y: &Point) -> Point {
        let d = y - &self.base_point;
        Point::from_iterator(self.basis.len(), self.basis.iter().map(|q| q.dot(&d)))
    }
}

#[derive(Clone, Debug)]
pub struct NiceCertificate {
    pub face: FaceId,
    pub k: usize,
    pub witness: Point,
    pub count: usize,
    pub records: Vec<NormalRecord>,
    pub strategy: &'static str,
}

#[derive(Clone, Debug)]
pub enum NiceOutcome {
    Certified(NiceCertificate),
    NotFound {
        face: FaceId,
        best_count: usize,
        best_point: Option<Point>,
        probes: usize,
    },
}

impl NiceOutcome {
    pub fn certificate(&self) -> Option<&NiceCertificate> {
        match self {
            NiceOutcome::Certified(c) => Some(c),
            NiceOutcome::NotFound { .. } => None,
        }
    }
}

/// Default number of probes per face.
pub const NICE_BUDGET: usize = 20_000;

/// Searches the cone of `face` for a point with at least `2k + 1` critical
/// points. Codimension 3 first tries the lifted link witness, codimension 4
/// the point next to the min-max center of the link; then `seeds` (points of
/// R^n) and lines through random interior directions are profiled exactly.
pub fn certify_nice(
    p: &Polytope,
    face: FaceId,
    seeds: &[Point],
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<NiceOutcome> {
    let frame = ConeFrame::new(p, face)?;
    let k = frame.codim();
    if k < 3 {
        return Err(Error::PreconditionFailed(format!(
            "nice faces have codimension at least 3, got {k}"
        )));
    }
    let target = 2 * k + 1;
    let cone = p.cone_of_face(face);
    let scale = p.scale();
    let mut best: (usize, Option<Point>) = (0, None);
    let mut probes = 0usize;

    let check = |x: &Point, strategy: &'static str, best: &mut (usize, Option<Point>)| -> Result<Option<NiceCertificate>> {
        let norm = x.norm();
        if norm == 0.0 || frame.system.domain_margin(&(x / norm * 0.5)) <= 0.0 {
            return Ok(None);
        }
        let y = frame.lift(&(x / norm), 0.5 * scale);
        let rep = match cone_sqd_critical_points(p, &cone, &y, tol) {
            Ok(r) => r,
            Err(Error::PointNotInCone { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if rep.count > best.0 {
            *best = (rep.count, Some(y.clone()));
        }
        if rep.count >= target && rep.records.iter().all(|r| !r.marginal) {
            return Ok(Some(NiceCertificate {
                face,
                k,
                witness: y,
                count: rep.count,
                records: rep.records,
                strategy,
            }));
        }
        Ok(None)
    };

    let link = spherical_link(p, face)?;
    if k == 3 {
        let t = SphericalTriangle::from_polytope(&link)?;
        let c = classify_triangle(&t, CLASSIFY_TOL)?;
        if let Some(x) = c.witness {
            probes += 1;
            if let Some(cert) = check(&x, "link witness", &mut best)? {
                return Ok(NiceOutcome::Certified(cert));
            }
        }
    }
    if k == 4 {
        let mm = minmax_center(&link)?;
        let inward = link.vertices.iter().fold(Point::zeros(k), |a, v| a + v).normalize();
        let x = (&mm.center + inward * NUDGE).normalize();
        probes += 1;
        if let Some(cert) = check(&x, "min-max center", &mut best)? {
            return Ok(NiceOutcome::Certified(cert));
        }
    }
    for s in seeds {
        probes += 1;
        if let Some(cert) = check(&frame.coordinates(s), "seed", &mut best)? {
            return Ok(NiceOutcome::Certified(cert));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while probes < budget {
        probes += 1;
        let a = random_point_in(&frame.rays, &mut rng) * 0.5;
        let d = crate::spherical::random_unit(k, &mut rng);
        let Some(line) = frame.system.line_profile(&a, &d, 10.0) else {
            continue;
        };
        if line.count < target.min(best.0 + 1) {
            continue;
        }
        let x = &a + &d * line.t;
        if let Some(cert) = check(&x, "line search", &mut best)? {
            return Ok(NiceOutcome::Certified(cert));
        }
    }
    Ok(NiceOutcome::NotFound {
        face,
        best_count: best.0,
        best_point: best.1,
        probes,
    })
}

#[derive(Clone, Debug)]
pub struct PropagationEntry {
    pub face: FaceId,
    pub target: usize,
    pub outcome: NiceOutcome,
}

#[derive(Clone, Debug)]
pub struct PropagationReport {
    pub face: FaceId,
    pub entries: Vec<PropagationEntry>,
    pub all_certified: bool,
}

/// Tries to certify every facet `F'` of a certified face `F`, seeding the
/// search with translates of the witness parallel to F, on both sides of
/// the hyperplane cutting `F'` off the cone of F.
pub fn check_propagation(
    p: &Polytope,
    cert: &NiceCertificate,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<PropagationReport> {
    let f = p.face(cert.face);
    if f.dim == 0 {
        return Ok(PropagationReport {
            face: cert.face,
            entries: Vec::new(),
            all_certified: true,
        });
    }
    let mut entries = Vec::new();
    for (idx, sub) in p.subfaces(cert.face, f.dim - 1).into_iter().enumerate() {
        let g = p.face(sub);
        // the facet of P cutting `sub` out of `f`
        let extra = *g
            .facet_ids
            .iter()
            .find(|j| !f.facet_ids.contains(j))
            .expect("a facet of a face lies on one more facet");
        let h = &p.facets()[extra];
        let towards = f.affine.project_direction(&h.normal);
        let seeds: Vec<Point> = [-4.0, -1.0, -0.25, 0.25, 1.0]
            .iter()
            .map(|s| &cert.witness + &towards * (s * p.scale()))
            .collect();
        let outcome = certify_nice(p, sub, &seeds, budget, seed.wrapping_add(idx as u64 + 1), tol)?;
        entries.push(PropagationEntry {
            face: sub,
            target: 2 * (cert.k + 1) + 1,
            outcome,
        });
    }
    let all_certified = entries.iter().all(|e| e.outcome.certificate().is_some());
    Ok(PropagationReport {
        face: cert.face,
        entries,
        all_certified,
    })
}

/// Random point strictly inside the cone of the face, at distance about
/// `scale` from its apex stratum.
pub fn random_cone_point(frame: &ConeFrame, scale: f64, rng: &mut impl Rng) -> Point {
    let x = random_point_in(&frame.rays, rng);
    let mut y = frame.lift(&x, scale);
    // random offset along the face
    let n = y.len();
    let shift = Point::from_iterator(n, (0..n).map(|_| rng.random::<f64>() - 0.5));
    let mut along = shift.clone();
    for q in &frame.basis {
        along.axpy(-q.dot(&shift), q, 1.0);
    }
    y += along * scale;
    y
}
