use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::EdgeKey;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("face {face} references vertex {index}, but the mesh has {count} vertices")]
    VertexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },

    #[error("face {face} repeats a vertex index")]
    RepeatedVertex { face: usize },

    #[error("vertex {0} is not referenced by any face")]
    UnreferencedVertex(usize),

    #[error("edge {edge} is incident to {count} faces")]
    NonManifoldEdge { edge: EdgeKey, count: usize },

    #[error("edge {0} lies on the boundary")]
    BoundaryEdge(EdgeKey),

    #[error("vertex {0} touches the boundary")]
    BoundaryVertex(usize),

    #[error("operation requires a closed mesh")]
    OpenMesh,

    #[error("face {0} is degenerate")]
    DegenerateFace(usize),

    #[error("degenerate triangle (zero area or coincident points)")]
    DegenerateTriangle,

    #[error("edge {edge} cannot be flipped: {reason}")]
    FlipBlocked { edge: EdgeKey, reason: &'static str },

    #[error("vertex {vertex} lies within {eps:e} of an inversion center")]
    InversionTooClose { vertex: usize, eps: f64 },

    #[error("degenerate point set for convex hull: {0}")]
    DegenerateHull(&'static str),

    #[error("circumcenters of the faces at edge {0} coincide")]
    CoincidentCircumcenters(EdgeKey),

    #[error("rest and deformed meshes have different combinatorics")]
    CombinatoricsMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
