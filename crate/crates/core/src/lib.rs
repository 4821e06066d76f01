//! Gluing equations, tangent spaces and peripheral holonomy for decorated
//! PGL(3,ℂ) representations of ideally triangulated cusped 3-manifolds.

pub mod analysis;
pub mod census;
pub mod decoration;
pub mod error;
pub mod exact;
pub mod expr;
pub mod gluing;
pub mod lattice;
pub mod linalg;
pub mod peripheral;
pub mod solver;
pub mod triangulation;

pub use decoration::{CoordIndex, CoordKind, Decoration, ReducedPoint};
pub use error::{Error, Result};
pub use triangulation::Triangulation;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
