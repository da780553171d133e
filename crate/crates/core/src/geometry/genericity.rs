//! Accidental parallelism / orthogonality between affine hulls.
//!
//! For two affine hulls with direction spaces U, W the principal angles are
//! read off the singular values of `U^T W`. A number of zero angles is forced
//! by the lattice: both hulls lie in the smallest face J containing them, so
//! at least `dim U + dim W - dim J` directions are shared. Any further zero
//! angle is an accidental parallelism and any right angle an accidental
//! orthogonality.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::Serialize;

use super::Polytope;
use crate::linalg::{self, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenericityKind {
    Parallel,
    Orthogonal,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityViolation {
    /// Vertex ids spanning the two affine hulls.
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub kind: GenericityKind,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityReport {
    pub violations: Vec<GenericityViolation>,
    pub passed: bool,
    pub pairs_checked: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenericityScope {
    /// Pairs of faces of the lattice of dimension at least one.
    Faces,
    /// Pairs of vertex subsets of size `2..=max_size`.
    VertexSubsets { max_size: usize },
}

struct Hull {
    vertices: Vec<usize>,
    directions: Vec<Point>,
}

fn hull_of(p: &Polytope, vertex_ids: &[usize]) -> Hull {
    let base = &p.vertices()[vertex_ids[0]];
    let diffs: Vec<Point> = vertex_ids[1..]
        .iter()
        .map(|&v| &p.vertices()[v] - base)
        .collect();
    Hull {
        vertices: vertex_ids.to_vec(),
        directions: linalg::orthonormalize(&diffs, 1e-9 * p.scale()),
    }
}

/// Dimension of the smallest face containing all of `vertex_ids`.
fn join_dim(p: &Polytope, vertex_ids: &[usize]) -> usize {
    let common: Vec<usize> = p.incidence()[vertex_ids[0]]
        .iter()
        .copied()
        .filter(|j| vertex_ids.iter().all(|&v| p.incidence()[v].contains(j)))
        .collect();
    p.dim() - common.len()
}

fn cosines(a: &[Point], b: &[Point]) -> Vec<f64> {
    let mut m = DMatrix::zeros(a.len(), b.len());
    for (i, u) in a.iter().enumerate() {
        for (j, w) in b.iter().enumerate() {
            m[(i, j)] = u.dot(w);
        }
    }
    let mut s: Vec<f64> = m.singular_values().iter().map(|x| x.min(1.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn test_pair(
    p: &Polytope,
    a: &Hull,
    b: &Hull,
    forced_extra: usize,
    tol: f64,
    out: &mut Vec<GenericityViolation>,
) {
    let (da, db) = (a.directions.len(), b.directions.len());
    let m = da.min(db);
    if m == 0 {
        return;
    }
    let mut union = a.vertices.clone();
    union.extend(b.vertices.iter().copied());
    union.sort_unstable();
    union.dedup();
    let j = join_dim(p, &union);
    let forced = (da + db).saturating_sub(j).max(forced_extra);
    if forced >= m {
        return;
    }
    let s = cosines(&a.directions, &b.directions);
    let extra = &s[forced..m];
    let sine = (1.0 - extra[0] * extra[0]).max(0.0).sqrt();
    if sine < tol {
        out.push(GenericityViolation {
            first: a.vertices.clone(),
            second: b.vertices.clone(),
            kind: GenericityKind::Parallel,
            residual: sine,
        });
    }
    let smallest = extra[extra.len() - 1];
    if smallest < tol {
        out.push(GenericityViolation {
            first: a.vertices.clone(),
            second: b.vertices.clone(),
            kind: GenericityKind::Orthogonal,
            residual: smallest,
        });
    }
}

pub(super) fn check(p: &Polytope, tol: f64, scope: GenericityScope) -> GenericityReport {
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    match scope {
        GenericityScope::Faces => {
            let hulls: Vec<Hull> = p
                .faces()
                .iter()
                .filter(|f| f.dim >= 1)
                .map(|f| Hull {
                    vertices: f.vertex_ids.clone(),
                    directions: f.affine.directions.clone(),
                })
                .collect();
            for (a, b) in hulls.iter().tuple_combinations() {
                pairs_checked += 1;
                test_pair(p, a, b, 0, tol, &mut violations);
            }
        }
        GenericityScope::VertexSubsets { max_size } => {
            let nv = p.vertices().len();
            let hulls: Vec<Hull> = (2..=max_size.min(nv))
                .flat_map(|k| (0..nv).combinations(k))
                .map(|c| hull_of(p, &c))
                .collect();
            for (a, b) in hulls.iter().tuple_combinations() {
                let shared: Vec<usize> = a
                    .vertices
                    .iter()
                    .copied()
                    .filter(|v| b.vertices.contains(v))
                    .collect();
                let shared_dim = if shared.is_empty() {
                    0
                } else {
                    hull_of(p, &shared).directions.len()
                };
                pairs_checked += 1;
                test_pair(p, a, b, shared_dim, tol, &mut violations);
            }
        }
    }
    GenericityReport {
        passed: violations.is_empty(),
        violations,
        pairs_checked,
    }
}
