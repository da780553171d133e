//! Simple convex polytopes: vertices, facet halfspaces and the face lattice.
//!
//! A polytope is stored in both descriptions. Faces are keyed by the set of
//! facets containing them; for a simple polytope every subset of the facets
//! through a vertex is such a key, so the lattice is obtained by closing the
//! vertex-facet incidences under taking subsets.
//!
//! Tolerances passed to the query methods are relative: they are multiplied by
//! [`Polytope::scale`] (circumradius about the vertex centroid) so that the
//! same numbers work for a unit simplex and for a polytope of radius 100.

mod cone;
mod genericity;
mod hull;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Point};

pub use cone::Cone;
pub use genericity::{GenericityKind, GenericityReport, GenericityScope, GenericityViolation};

/// Default residual tolerance (relative to the polytope scale).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Closed halfspace `<normal, x> <= offset` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: f64,
}

impl HalfSpace {
    /// Builds the halfspace, rescaling so the normal has unit length.
    pub fn new(normal: Point, offset: f64) -> Self {
        let norm = normal.norm();
        if norm == 0.0 {
            return HalfSpace { normal, offset };
        }
        HalfSpace {
            normal: normal / norm,
            offset: offset / norm,
        }
    }

    /// `offset - <normal, x>`; positive strictly inside.
    #[inline]
    pub fn slack(&self, x: &Point) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaceId(pub usize);

impl std::fmt::Display for FaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Affine hull of a face: a base point, an orthonormal basis of its direction
/// space and an orthonormal basis of the orthogonal complement.
#[derive(Clone, Debug)]
pub struct AffineHull {
    pub point: Point,
    pub directions: Vec<Point>,
    pub normals: Vec<Point>,
}

impl AffineHull {
    pub fn project(&self, y: &Point) -> Point {
        let d = y - &self.point;
        let mut z = self.point.clone();
        for q in &self.directions {
            z.axpy(q.dot(&d), q, 1.0);
        }
        z
    }

    /// Distance from `y` to the affine hull.
    pub fn residual(&self, y: &Point) -> f64 {
        let d = y - &self.point;
        self.normals
            .iter()
            .map(|q| q.dot(&d).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Orthogonal projection of `v` onto the direction space.
    pub fn project_direction(&self, v: &Point) -> Point {
        let mut out = Point::zeros(v.len());
        for q in &self.directions {
            out.axpy(q.dot(v), q, 1.0);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: FaceId,
    pub dim: usize,
    pub vertex_ids: Vec<usize>,
    /// Facets containing the face, sorted.
    pub facet_ids: Vec<usize>,
    pub affine: AffineHull,
    /// Facets of the polytope that cut this face in one of its own facets.
    pub cutting_facets: Vec<usize>,
}

impl Face {
    pub fn contains_face(&self, other: &Face) -> bool {
        self.facet_ids.iter().all(|j| other.facet_ids.contains(j))
    }
}

#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Point>,
    facets: Vec<HalfSpace>,
    incidence: Vec<Vec<usize>>,
    faces: Vec<Face>,
    by_facets: HashMap<Vec<usize>, FaceId>,
    centroid: Point,
    scale: f64,
    tol: f64,
}

impl Polytope {
    /// Convex hull of `points`; interior and non-vertex boundary points are dropped.
    pub fn from_points(points: &[Point], tol: f64) -> Result<Self> {
        let (vertices, facets) = hull::hull_from_points(points, tol)?;
        Self::from_parts(vertices, facets, tol)
    }

    /// Intersection of halfspaces; redundant halfspaces are dropped.
    pub fn from_halfspaces(halfspaces: &[HalfSpace], tol: f64) -> Result<Self> {
        let (vertices, facets) = hull::vertices_from_halfspaces(halfspaces, tol)?;
        Self::from_parts(vertices, facets, tol)
    }

    /// Assembles a polytope from matching V- and H-descriptions.
    pub fn from_parts(vertices: Vec<Point>, facets: Vec<HalfSpace>, tol: f64) -> Result<Self> {
        let n = vertices
            .first()
            .ok_or_else(|| Error::DegenerateInput("no vertices".into()))?
            .len();
        if n < 2 {
            return Err(Error::DegenerateInput("dimension must be at least 2".into()));
        }
        for v in &vertices {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for f in &facets {
            if f.normal.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: f.normal.len(),
                });
            }
        }
        let facets: Vec<HalfSpace> = facets
            .into_iter()
            .map(|h| HalfSpace::new(h.normal, h.offset))
            .collect();
        let centroid = linalg::centroid(&vertices);
        let scale = vertices
            .iter()
            .map(|v| (v - &centroid).norm())
            .fold(0.0, f64::max);
        if scale <= 0.0 {
            return Err(Error::DegenerateInput("all vertices coincide".into()));
        }
        let abs_tol = tol * scale;
        let diffs: Vec<Point> = vertices.iter().map(|v| v - &centroid).collect();
        if linalg::rank(&diffs, abs_tol.max(1e-12 * scale)) < n {
            return Err(Error::DegenerateInput("points are not full-dimensional".into()));
        }

        let mut incidence = Vec::with_capacity(vertices.len());
        for (vi, v) in vertices.iter().enumerate() {
            let mut tight = Vec::new();
            for (j, f) in facets.iter().enumerate() {
                let s = f.slack(v);
                if s < -abs_tol {
                    return Err(Error::DegenerateInput(format!(
                        "vertex {vi} violates facet {j} by {:.3e}",
                        -s
                    )));
                }
                if s <= abs_tol {
                    tight.push(j);
                }
            }
            if tight.len() != n {
                return Err(Error::NotSimple {
                    vertex: vi,
                    facets: tight.len(),
                    expected: n,
                });
            }
            incidence.push(tight);
        }

        let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
        for tight in &incidence {
            for mask in 1u32..(1u32 << n) {
                let key: Vec<usize> = (0..n)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| tight[b])
                    .collect();
                keys.insert(key);
            }
        }
        for j in 0..facets.len() {
            if !keys.contains(&vec![j]) {
                return Err(Error::DegenerateInput(format!(
                    "halfspace {j} touches no vertex; it is not a facet"
                )));
            }
        }

        let mut raw: Vec<(usize, Vec<usize>, Vec<usize>)> = keys
            .iter()
            .map(|key| {
                let vids: Vec<usize> = incidence
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| key.iter().all(|j| t.contains(j)))
                    .map(|(v, _)| v)
                    .collect();
                (n - key.len(), vids, key.clone())
            })
            .collect();
        raw.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

        let mut faces = Vec::with_capacity(raw.len());
        let mut by_facets = HashMap::with_capacity(raw.len());
        for (idx, (dim, vertex_ids, facet_ids)) in raw.into_iter().enumerate() {
            let pts: Vec<Point> = vertex_ids.iter().map(|&v| vertices[v].clone()).collect();
            let point = linalg::centroid(&pts);
            let fnormals: Vec<Point> = facet_ids.iter().map(|&j| facets[j].normal.clone()).collect();
            let normals = linalg::orthonormalize(&fnormals, 1e-9);
            if normals.len() != facet_ids.len() {
                return Err(Error::NotSimple {
                    vertex: vertex_ids[0],
                    facets: facet_ids.len(),
                    expected: normals.len(),
                });
            }
            let directions = linalg::orthonormal_complement(&normals, n);
            let cutting_facets = (0..facets.len())
                .filter(|j| !facet_ids.contains(j))
                .filter(|j| {
                    let mut k = facet_ids.clone();
                    k.push(*j);
                    k.sort_unstable();
                    keys.contains(&k)
                })
                .collect();
            by_facets.insert(facet_ids.clone(), FaceId(idx));
            faces.push(Face {
                id: FaceId(idx),
                dim,
                vertex_ids,
                facet_ids,
                affine: AffineHull {
                    point,
                    directions,
                    normals,
                },
                cutting_facets,
            });
        }

        Ok(Polytope {
            dim: n,
            vertices,
            facets,
            incidence,
            faces,
            by_facets,
            centroid,
            scale,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[HalfSpace] {
        &self.facets
    }

    /// Facet ids through each vertex.
    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    /// All proper faces, ordered by dimension then vertex set.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id.0]
    }

    pub fn faces_of_dim(&self, dim: usize) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.dim == dim)
    }

    pub fn face_by_facets(&self, facet_ids: &[usize]) -> Option<FaceId> {
        let mut key = facet_ids.to_vec();
        key.sort_unstable();
        self.by_facets.get(&key).copied()
    }

    pub fn vertex_face(&self, v: usize) -> FaceId {
        self.by_facets[&self.incidence[v]]
    }

    pub fn facet_face(&self, j: usize) -> FaceId {
        self.by_facets[&vec![j]]
    }

    /// Faces of dimension `dim` containing `face`.
    pub fn superfaces(&self, face: FaceId, dim: usize) -> Vec<FaceId> {
        let f = self.face(face);
        self.faces_of_dim(dim)
            .filter(|g| g.contains_face(f))
            .map(|g| g.id)
            .collect()
    }

    /// Faces of dimension `dim` contained in `face`.
    pub fn subfaces(&self, face: FaceId, dim: usize) -> Vec<FaceId> {
        let f = self.face(face);
        self.faces_of_dim(dim)
            .filter(|g| f.contains_face(g))
            .map(|g| g.id)
            .collect()
    }

    /// Number of faces in each dimension `0..n`.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim];
        for f in &self.faces {
            counts[f.dim] += 1;
        }
        counts
    }

    pub fn centroid(&self) -> &Point {
        &self.centroid
    }

    /// Circumradius about the vertex centroid; the unit of relative tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Construction tolerance (relative).
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Smallest facet slack of `y`; positive strictly inside.
    pub fn interior_margin(&self, y: &Point) -> f64 {
        self.facets
            .iter()
            .map(|f| f.slack(y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Center of the largest inscribed ball and its radius.
    pub fn incenter(&self) -> Result<(Point, f64)> {
        let m = crate::lp::max_margin(self.dim, &self.facets, 10.0 * self.scale)?;
        Ok((m.point, m.margin))
    }

    /// Orthogonal projection of `y` onto the affine hull of `face`, and `y - z`.
    pub fn project_to_affine_hull(&self, y: &Point, face: FaceId) -> (Point, Point) {
        let z = self.face(face).affine.project(y);
        let w = y - &z;
        (z, w)
    }

    /// Smallest slack of `z` against the inequalities cutting `face` inside its
    /// affine hull (absolute units). Vertices report `+inf`.
    pub fn relint_margin(&self, z: &Point, face: FaceId) -> f64 {
        self.face(face)
            .cutting_facets
            .iter()
            .map(|&j| self.facets[j].slack(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `z` lies in the relative interior of `face` with at least
    /// `margin` (relative) to spare.
    pub fn in_relative_interior(&self, z: &Point, face: FaceId, margin: f64) -> Result<bool> {
        let f = self.face(face);
        let residual = f.affine.residual(z);
        if residual > self.tol.max(1e-12) * self.scale * 1e3 {
            return Err(Error::NotInAffineHull {
                face: face.0,
                residual,
            });
        }
        let margin = margin * self.scale;
        if f.dim == 0 {
            return Ok((z - &self.vertices[f.vertex_ids[0]]).norm() <= margin);
        }
        Ok(self.relint_margin(z, face) >= margin)
    }

    /// Cone bounded by the extensions of the facets containing `face`.
    pub fn cone_of_face(&self, face: FaceId) -> Cone {
        Cone::new(self, face)
    }

    /// Tests pairs of affine hulls for accidental parallelism or orthogonality.
    pub fn check_genericity(&self, tol: f64) -> GenericityReport {
        genericity::check(self, tol, GenericityScope::Faces)
    }

    pub fn check_genericity_with(&self, tol: f64, scope: GenericityScope) -> GenericityReport {
        genericity::check(self, tol, scope)
    }

    /// Relabeling-invariant summary of the face lattice: sorted list of
    /// (dimension, number of vertices, number of subfaces) triples.
    pub fn combinatorial_signature(&self) -> Vec<(usize, usize, usize)> {
        let mut sig: Vec<(usize, usize, usize)> = self
            .faces
            .iter()
            .map(|f| {
                let below = self
                    .faces
                    .iter()
                    .filter(|g| g.dim < f.dim && f.contains_face(g))
                    .count();
                (f.dim, f.vertex_ids.len(), below)
            })
            .collect();
        sig.sort_unstable();
        sig
    }
}
