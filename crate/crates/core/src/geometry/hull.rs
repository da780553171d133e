//! Brute-force conversions between V- and H-descriptions.
//!
//! Sized for the polytopes this crate works with (n <= 5, a few dozen
//! vertices): every n-subset is tried directly.

use itertools::Itertools;
use nalgebra::DMatrix;

use super::HalfSpace;
use crate::error::{Error, Result};
use crate::linalg::{self, Point};

fn scale_of(points: &[Point]) -> (Point, f64) {
    let c = linalg::centroid(points);
    let s = points.iter().map(|p| (p - &c).norm()).fold(0.0, f64::max);
    (c, s)
}

fn push_unique_halfspace(out: &mut Vec<HalfSpace>, h: HalfSpace, tol: f64) {
    let dup = out
        .iter()
        .any(|g| (&g.normal - &h.normal).norm() < 1e-7 && (g.offset - h.offset).abs() < tol);
    if !dup {
        out.push(h);
    }
}

/// Facets and vertices of conv(`points`).
pub(super) fn hull_from_points(points: &[Point], tol: f64) -> Result<(Vec<Point>, Vec<HalfSpace>)> {
    let n = points
        .first()
        .ok_or_else(|| Error::DegenerateInput("no points".into()))?
        .len();
    if points.iter().any(|p| p.len() != n) {
        return Err(Error::DegenerateInput("points of mixed dimension".into()));
    }
    if points.len() < n + 1 {
        return Err(Error::DegenerateInput(format!(
            "need at least {} points in dimension {n}",
            n + 1
        )));
    }
    let (center, scale) = scale_of(points);
    if scale == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let abs = tol * scale;
    let diffs: Vec<Point> = points.iter().map(|p| p - &center).collect();
    if linalg::rank(&diffs, 1e-9 * scale) < n {
        return Err(Error::DegenerateInput("points are not full-dimensional".into()));
    }

    let mut facets: Vec<HalfSpace> = Vec::new();
    for combo in (0..points.len()).combinations(n) {
        let base = &points[combo[0]];
        let rows: Vec<Point> = combo[1..].iter().map(|&i| &points[i] - base).collect();
        let Some(mut normal) = linalg::null_vector(&rows, n, 1e-9 * scale) else {
            continue;
        };
        let mut offset = normal.dot(base);
        if offset - normal.dot(&center) < 0.0 {
            normal = -normal;
            offset = -offset;
        }
        if offset - normal.dot(&center) <= abs {
            continue;
        }
        if points.iter().all(|p| normal.dot(p) <= offset + abs) {
            push_unique_halfspace(&mut facets, HalfSpace { normal, offset }, abs.max(1e-12));
        }
    }

    // vertices: points tight on facets whose normals span R^n
    let mut vertices: Vec<Point> = Vec::new();
    for p in points {
        let tight: Vec<Point> = facets
            .iter()
            .filter(|f| f.slack(p).abs() <= abs)
            .map(|f| f.normal.clone())
            .collect();
        if tight.len() >= n && linalg::rank(&tight, 1e-9) == n
            && !vertices.iter().any(|v| (v - p).norm() <= abs.max(1e-12 * scale))
        {
            vertices.push(p.clone());
        }
    }
    Ok((vertices, facets))
}

/// Vertices of the polyhedron `halfspaces`, which must be bounded. Halfspaces
/// that do not support an (n-1)-dimensional face are removed.
pub(super) fn vertices_from_halfspaces(
    halfspaces: &[HalfSpace],
    tol: f64,
) -> Result<(Vec<Point>, Vec<HalfSpace>)> {
    let n = halfspaces
        .first()
        .ok_or_else(|| Error::DegenerateInput("no halfspaces".into()))?
        .normal
        .len();
    let hs: Vec<HalfSpace> = halfspaces
        .iter()
        .map(|h| HalfSpace::new(h.normal.clone(), h.offset))
        .collect();
    let mut box_scale: f64 = 0.0;
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = Point::zeros(n);
            d[i] = sign;
            match crate::lp::maximize(n, &hs, &d)? {
                Some(x) => box_scale = box_scale.max(x[i].abs()),
                None => return Err(Error::Unbounded),
            }
        }
    }
    let box_scale = box_scale.max(1e-300);
    let feas = tol * box_scale;

    let mut vertices: Vec<Point> = Vec::new();
    for combo in (0..hs.len()).combinations(n) {
        let mut a = DMatrix::zeros(n, n);
        let mut b = Point::zeros(n);
        for (r, &j) in combo.iter().enumerate() {
            a.set_row(r, &hs[j].normal.transpose());
            b[r] = hs[j].offset;
        }
        if a.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(x) = linalg::solve(a, &b) else { continue };
        if hs.iter().all(|h| h.slack(&x) >= -feas)
            && !vertices.iter().any(|v| (v - &x).norm() <= 1e3 * feas)
        {
            vertices.push(x);
        }
    }
    if vertices.len() < n + 1 {
        return Err(Error::DegenerateInput("halfspaces bound no full-dimensional polytope".into()));
    }
    let (_, scale) = scale_of(&vertices);
    let abs = tol * scale;
    let facets: Vec<HalfSpace> = hs
        .into_iter()
        .filter(|h| {
            let on: Vec<&Point> = vertices.iter().filter(|v| h.slack(v).abs() <= abs).collect();
            if on.len() < n {
                return false;
            }
            let diffs: Vec<Point> = on[1..].iter().map(|v| *v - on[0]).collect();
            linalg::rank(&diffs, 1e-9 * scale) == n - 1
        })
        .collect();
    Ok((vertices, facets))
}
