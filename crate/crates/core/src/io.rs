//! JSON forms of polytopes and normal reports.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{HalfSpace, Polytope};
use crate::linalg::Point;
use crate::normals::NormalRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetJson {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<FacetJson>>,
}

impl PolytopeJson {
    pub fn from_polytope(p: &Polytope) -> Self {
        PolytopeJson {
            dim: p.dim(),
            vertices: p.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
            facets: Some(
                p.facets()
                    .iter()
                    .map(|h| FacetJson {
                        normal: h.normal.iter().copied().collect(),
                        offset: h.offset,
                    })
                    .collect(),
            ),
        }
    }

    /// Builds the polytope; with facets the two descriptions are matched
    /// directly, otherwise the hull of the vertices is computed.
    pub fn to_polytope(&self, tol: f64) -> Result<Polytope> {
        let vertices: Vec<Point> = self.vertices.iter().map(|v| Point::from_column_slice(v)).collect();
        for v in &vertices {
            if v.len() != self.dim {
                return Err(crate::Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        match &self.facets {
            Some(fs) => {
                let facets = fs
                    .iter()
                    .map(|f| HalfSpace::new(Point::from_column_slice(&f.normal), f.offset))
                    .collect();
                Polytope::from_parts(vertices, facets, tol)
            }
            None => Polytope::from_points(&vertices, tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub face: usize,
    pub dim: usize,
    pub index: usize,
    pub base: Vec<f64>,
    pub sqdist: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub marginal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalsReport {
    pub point: Vec<f64>,
    /// Non-marginal records.
    pub count: usize,
    pub records: Vec<RecordJson>,
}

impl NormalsReport {
    pub fn new(y: &Point, records: &[NormalRecord]) -> Self {
        NormalsReport {
            point: y.iter().copied().collect(),
            count: records.iter().filter(|r| !r.marginal).count(),
            records: records.iter().map(record_json).collect(),
        }
    }
}

pub fn record_json(r: &NormalRecord) -> RecordJson {
    RecordJson {
        face: r.face.0,
        dim: r.dim,
        index: r.morse_index,
        base: r.base.iter().copied().collect(),
        sqdist: r.sqdist,
        marginal: r.marginal,
    }
}

pub fn point_vec(p: &Point) -> Vec<f64> {
    p.iter().copied().collect()
}
