#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

//! Discrete conformal (Willmore) energy of simplicial surfaces.
//!
//! - [`mesh`]: indexed triangle meshes, file I/O, generators, convex hull,
//!   refinement, edge flips and Moebius maps.
//! - [`energy`]: circumcircle intersection angles and the energy `W`.
//! - [`flow`]: gradient flow of `W` over vertex positions and greedy
//!   edge-flip minimization over triangulations.
//! - [`bending`]: thin-shell bending energy `sum (l / L) theta^2`.

pub mod bending;
pub mod energy;
pub mod error;
pub mod flow;
pub mod geom;
pub mod mesh;

pub use error::{Error, Result};
pub use geom::Point3;
pub use mesh::{EdgeId, EdgeKey, TriMesh};
