//! Max-margin feasibility over systems of halfspaces.
//!
//! Every polyhedral question in the crate (is an intersection of active
//! regions non-empty, where is the incenter, is an H-description bounded)
//! reduces to maximizing a uniform slack `t` subject to
//! `<a_i, y> + t |a_i| <= b_i`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};
use crate::geometry::HalfSpace;
use crate::linalg::Point;

/// Every variable is boxed to `[-VAR_BOX, VAR_BOX]`; the solver does not
/// terminate reliably on unbounded problems with free variables. A solution
/// touching the box is read as unbounded.
pub const VAR_BOX: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct MarginPoint {
    pub point: Point,
    pub margin: f64,
}

/// Point maximizing the smallest slack over `rows` (each with unit normal),
/// with the margin capped at `cap`. Always feasible since the margin is free
/// below.
pub fn max_margin(dim: usize, rows: &[HalfSpace], cap: f64) -> Result<MarginPoint> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..dim)
        .map(|_| problem.add_var(0.0, (-VAR_BOX, VAR_BOX)))
        .collect();
    let t = problem.add_var(1.0, (-VAR_BOX, cap));
    for row in rows {
        let norm = row.normal.norm();
        if norm == 0.0 {
            continue;
        }
        let mut terms: Vec<_> = vars
            .iter()
            .zip(row.normal.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(v, c)| (*v, *c / norm))
            .collect();
        terms.push((t, 1.0));
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, row.offset / norm);
    }
    let outcome = problem.solve().map_err(|e| Error::Lp(e.to_string()))?;
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::Lp("interrupted".into()))?;
    let point = Point::from_iterator(dim, vars.iter().map(|v| solution.var_value(*v)));
    // report the margin actually achieved, not the solver's objective
    let margin = rows
        .iter()
        .filter(|r| r.normal.norm() > 0.0)
        .map(|r| r.slack(&point) / r.normal.norm())
        .fold(cap, f64::min);
    Ok(MarginPoint { point, margin })
}

/// Maximizes `<direction, y>` over the polyhedron; `None` when the optimum
/// touches the variable box (unbounded objective or unbounded optimal face).
pub fn maximize(dim: usize, rows: &[HalfSpace], direction: &Point) -> Result<Option<Point>> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..dim)
        .map(|i| problem.add_var(direction[i], (-VAR_BOX, VAR_BOX)))
        .collect();
    for row in rows {
        let terms: Vec<_> = vars
            .iter()
            .zip(row.normal.iter())
            .map(|(v, c)| (*v, *c))
            .collect();
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, row.offset);
    }
    match problem.solve() {
        Ok(outcome) => {
            let solution = outcome
                .into_solution()
                .map_err(|_| Error::Lp("interrupted".into()))?;
            let x = Point::from_iterator(dim, vars.iter().map(|v| solution.var_value(*v)));
            if x.iter().any(|c| c.abs() >= 0.999 * VAR_BOX) {
                return Ok(None);
            }
            Ok(Some(x))
        }
        Err(microlp::Error::Unbounded) => Ok(None),
        Err(microlp::Error::Infeasible) => Err(Error::DegenerateInput("empty polyhedron".into())),
        Err(e) => Err(Error::Lp(e.to_string())),
    }
}
