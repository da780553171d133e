//! Small dense linear-algebra helpers on `DVector<f64>`.

use nalgebra::{DMatrix, DVector};

pub type Point = DVector<f64>;

/// Orthonormal basis of the span of `vectors`, pivoting on the largest
/// residual at each step. Vectors whose residual falls below `tol` are dropped.
pub fn orthonormalize(vectors: &[Point], tol: f64) -> Vec<Point> {
    let mut pool: Vec<Point> = vectors.to_vec();
    let mut basis: Vec<Point> = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in pool.iter().enumerate() {
            let norm = v.norm();
            if best.is_none_or(|(_, b)| norm > b) {
                best = Some((i, norm));
            }
        }
        let Some((i, norm)) = best else { break };
        if norm <= tol {
            break;
        }
        let q = pool.swap_remove(i) / norm;
        for v in pool.iter_mut() {
            let c = v.dot(&q);
            v.axpy(-c, &q, 1.0);
        }
        basis.push(q);
    }
    basis
}

/// Completes an orthonormal family to an orthonormal basis of R^n and returns
/// only the added vectors.
pub fn orthonormal_complement(basis: &[Point], n: usize) -> Vec<Point> {
    let mut current: Vec<Point> = basis.to_vec();
    let mut added = Vec::new();
    while current.len() < n {
        let mut best: Option<(Point, f64)> = None;
        for i in 0..n {
            let mut e = Point::zeros(n);
            e[i] = 1.0;
            for q in &current {
                let c = e.dot(q);
                e.axpy(-c, q, 1.0);
            }
            let norm = e.norm();
            if best.as_ref().is_none_or(|(_, b)| norm > *b) {
                best = Some((e, norm));
            }
        }
        let (mut e, norm) = best.expect("n > 0");
        e /= norm;
        // one re-orthogonalization pass
        for q in &current {
            let c = e.dot(q);
            e.axpy(-c, q, 1.0);
        }
        e.normalize_mut();
        current.push(e.clone());
        added.push(e);
    }
    added
}

/// Rank of a family of vectors at tolerance `tol`.
pub fn rank(vectors: &[Point], tol: f64) -> usize {
    orthonormalize(vectors, tol).len()
}

/// Unit normal of the hyperplane spanned by `n - 1` difference vectors in R^n,
/// or `None` when they are linearly dependent.
pub fn null_vector(rows: &[Point], n: usize, tol: f64) -> Option<Point> {
    let basis = orthonormalize(rows, tol);
    if basis.len() != n - 1 {
        return None;
    }
    orthonormal_complement(&basis, n).pop()
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve(a: DMatrix<f64>, b: &Point) -> Option<Point> {
    let lu = a.lu();
    lu.solve(b)
}

/// Matrix whose columns are `vectors`.
pub fn columns(vectors: &[Point], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Coefficients of the orthogonal projection of `y` onto span(`vectors`)
/// expressed in that (not necessarily orthogonal) basis.
pub fn span_coefficients(vectors: &[Point], y: &Point) -> Option<Point> {
    let k = vectors.len();
    let mut gram = DMatrix::zeros(k, k);
    let mut rhs = Point::zeros(k);
    for i in 0..k {
        rhs[i] = vectors[i].dot(y);
        for j in 0..k {
            gram[(i, j)] = vectors[i].dot(&vectors[j]);
        }
    }
    solve(gram, &rhs)
}

pub fn centroid(points: &[Point]) -> Point {
    let n = points[0].len();
    let mut c = Point::zeros(n);
    for p in points {
        c += p;
    }
    c / points.len() as f64
}
