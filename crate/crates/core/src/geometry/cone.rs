use super::{FaceId, HalfSpace, Polytope};
use crate::linalg::{self, Point};

/// Cone of a face: the facets through the face, extended.
///
/// Modulo its lineality space (the directions of the apex face) the cone of a
/// face of codimension k in a simple polytope is simplicial with k extreme
/// rays, one per face of dimension `dim + 1` containing the apex face.
#[derive(Clone, Debug)]
pub struct Cone {
    pub apex_face: FaceId,
    /// A point in the relative interior of the apex face.
    pub base_point: Point,
    /// `(facet id, halfspace)` pairs; every halfspace passes through the apex face.
    pub halfspaces: Vec<(usize, HalfSpace)>,
    /// Orthonormal basis of the lineality space.
    pub lineality: Vec<Point>,
    /// Unit extreme rays, orthogonal to the lineality space.
    pub rays: Vec<Point>,
    /// Face of the polytope each ray runs along.
    pub ray_faces: Vec<FaceId>,
}

impl Cone {
    pub(super) fn new(p: &Polytope, face: FaceId) -> Self {
        let f = p.face(face);
        let base_point = f.affine.point.clone();
        let halfspaces = f
            .facet_ids
            .iter()
            .map(|&j| {
                let normal = p.facets()[j].normal.clone();
                let offset = normal.dot(&base_point);
                (j, HalfSpace { normal, offset })
            })
            .collect();
        let ray_faces = p.superfaces(face, f.dim + 1);
        let rays = ray_faces
            .iter()
            .map(|&g| {
                let gf = p.face(g);
                let pts: Vec<Point> = gf.vertex_ids.iter().map(|&v| p.vertices()[v].clone()).collect();
                let d = linalg::centroid(&pts) - &base_point;
                let r = &d - f.affine.project_direction(&d);
                r.normalize()
            })
            .collect();
        Cone {
            apex_face: face,
            base_point,
            halfspaces,
            lineality: f.affine.directions.clone(),
            rays,
            ray_faces,
        }
    }

    pub fn dim(&self) -> usize {
        self.base_point.len()
    }

    /// Number of bounding halfspaces (the codimension of the apex face).
    pub fn codim(&self) -> usize {
        self.halfspaces.len()
    }

    /// Smallest halfspace slack of `y`; positive strictly inside.
    pub fn interior_margin(&self, y: &Point) -> f64 {
        self.halfspaces
            .iter()
            .map(|(_, h)| h.slack(y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Point `base_point + sum c_i rays_i`.
    pub fn point_from_ray_weights(&self, weights: &[f64]) -> Point {
        let mut y = self.base_point.clone();
        for (r, c) in self.rays.iter().zip(weights) {
            y.axpy(*c, r, 1.0);
        }
        y
    }
}
