//! Normals to the boundaries of simple convex polytopes.
//!
//! The bases of the normals from an interior point `y` are the critical points
//! of the squared distance `|x - y|^2` restricted to the boundary. This crate
//! enumerates them face by face, describes the polyhedral regions where a face
//! carries a normal, works with spherical links of faces, certifies nice faces
//! on cones, solves the two-red-one-blue coloring of ridges, and searches
//! generic simple polytopes for points with many normals.

pub mod coloring;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod nicefaces;
pub mod normals;
pub mod regions;
pub mod search;
pub mod spherical;

pub use error::{Error, Result};
pub use geometry::{Face, FaceId, HalfSpace, Polytope};
pub use linalg::Point;
