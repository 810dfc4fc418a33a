//! Indexed triangle meshes with edge adjacency.
//!
//! A [`TriMesh`] is immutable once built. Every undirected edge is stored once,
//! keyed by its sorted vertex pair, together with the (at most two) incident
//! faces and the vertex opposite the edge in each of them. That stencil is
//! exactly what the circumcircle angle of an edge needs.

mod generate;
mod hull;
mod io;
mod moebius;
mod ops;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Point3};

pub use generate::{generate, perturb_radial, Generator};
pub use hull::{convex_hull, convex_hull_faces};
pub use io::{load_mesh, load_mesh_with, read_mesh, save_mesh, write_mesh, LoadOptions, MeshFormat};
pub use moebius::{apply_moebius, MoebiusAtom, MoebiusMap, INVERSION_EPS};
pub use ops::Stencil;

/// Undirected edge, stored with the smaller vertex index first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey(usize, usize);

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }

    pub fn lo(&self) -> usize {
        self.0
    }

    pub fn hi(&self) -> usize {
        self.1
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: usize) -> usize {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Index into [`TriMesh::edges`]. Edges are sorted by [`EdgeKey`].
pub type EdgeId = usize;

/// One side of an edge: an incident face and the face's vertex opposite the edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wing {
    pub face: usize,
    pub opposite: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub key: EdgeKey,
    /// Incident face with the lower face index.
    pub first: Wing,
    /// Second incident face, `None` on the boundary.
    pub second: Option<Wing>,
}

impl EdgeRecord {
    pub fn is_interior(&self) -> bool {
        self.second.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<EdgeRecord>,
    edge_lookup: HashMap<EdgeKey, EdgeId>,
    vertex_edges: Vec<Vec<EdgeId>>,
    closed: bool,
    oriented: bool,
}

impl TriMesh {
    /// Builds and validates a mesh: face indices in range and pairwise
    /// distinct, every vertex referenced, no edge with more than two faces.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        let mut referenced = vec![false; n];
        for (fi, f) in faces.iter().enumerate() {
            for &i in f {
                if i >= n {
                    return Err(Error::VertexOutOfRange {
                        face: fi,
                        index: i,
                        count: n,
                    });
                }
                referenced[i] = true;
            }
            if f[0] == f[1] || f[1] == f[2] || f[2] == f[0] {
                return Err(Error::RepeatedVertex { face: fi });
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::UnreferencedVertex(v));
        }

        // directed half-edges grouped by undirected key: (face, tail, opposite)
        let mut incident: HashMap<EdgeKey, Vec<(usize, usize, usize)>> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b, c) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                incident.entry(EdgeKey::new(a, b)).or_default().push((fi, a, c));
            }
        }
        let mut keys: Vec<EdgeKey> = incident.keys().copied().collect();
        keys.sort_unstable();

        let mut edges = Vec::with_capacity(keys.len());
        let mut closed = true;
        let mut oriented = true;
        for key in &keys {
            let sides = &incident[key];
            match sides.as_slice() {
                [(f0, _, o0)] => {
                    closed = false;
                    edges.push(EdgeRecord {
                        key: *key,
                        first: Wing { face: *f0, opposite: *o0 },
                        second: None,
                    });
                }
                [(f0, t0, o0), (f1, t1, o1)] => {
                    if t0 == t1 {
                        oriented = false;
                    }
                    edges.push(EdgeRecord {
                        key: *key,
                        first: Wing { face: *f0, opposite: *o0 },
                        second: Some(Wing { face: *f1, opposite: *o1 }),
                    });
                }
                _ => {
                    return Err(Error::NonManifoldEdge {
                        edge: *key,
                        count: sides.len(),
                    })
                }
            }
        }

        let edge_lookup = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut vertex_edges = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[e.key.lo()].push(ei);
            vertex_edges[e.key.hi()].push(ei);
        }

        Ok(TriMesh {
            vertices,
            faces,
            edges,
            edge_lookup,
            vertex_edges,
            closed,
            oriented,
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point3 {
        &self.vertices[v]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &EdgeRecord {
        &self.edges[id]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<EdgeId> {
        self.edge_lookup.get(&EdgeKey::new(a, b)).copied()
    }

    /// Edges incident to vertex `v`, in ascending edge order.
    pub fn vertex_edges(&self, v: usize) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Every edge has exactly two incident faces.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Every interior edge is traversed once in each direction.
    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    /// Genus of a closed orientable mesh (assumes one connected component).
    pub fn genus(&self) -> Option<i64> {
        if !self.closed || !self.oriented {
            return None;
        }
        Some((2 - self.euler_characteristic()) / 2)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        geom::bbox_diagonal(&self.vertices)
    }

    /// Same combinatorics with new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Result<TriMesh> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} vertex positions, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        Ok(TriMesh {
            vertices,
            ..self.clone()
        })
    }

    /// The mesh with every face orientation reversed.
    pub fn reversed(&self) -> TriMesh {
        let faces = self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect();
        TriMesh::new(self.vertices.clone(), faces).expect("reversal preserves validity")
    }

    /// Unnormalized face normal, oriented by the stored vertex order.
    pub fn face_normal(&self, f: usize) -> Point3 {
        let [a, b, c] = self.faces[f];
        (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]))
    }

    pub fn is_face_degenerate(&self, f: usize) -> bool {
        let [a, b, c] = self.faces[f];
        geom::is_degenerate(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn check_nondegenerate(&self) -> Result<()> {
        match (0..self.faces.len()).find(|&f| self.is_face_degenerate(f)) {
            Some(f) => Err(Error::DegenerateFace(f)),
            None => Ok(()),
        }
    }

    /// Faces rotated so the smallest index comes first (orientation kept),
    /// then sorted. Two meshes with equal output have the same oriented
    /// combinatorics.
    pub fn canonical_faces(&self) -> Vec<[usize; 3]> {
        let mut out: Vec<[usize; 3]> = self
            .faces
            .iter()
            .map(|f| {
                let k = (0..3).min_by_key(|&k| f[k]).unwrap();
                [f[k], f[(k + 1) % 3], f[(k + 2) % 3]]
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether the oriented edge `a -> b` occurs in face `f`.
    pub(crate) fn face_has_directed_edge(&self, f: usize, a: usize, b: usize) -> bool {
        let t = self.faces[f];
        (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b)
    }

    pub fn is_interior_vertex(&self, v: usize) -> bool {
        self.vertex_edges[v].iter().all(|&e| self.edges[e].is_interior())
    }

    /// Vertices adjacent to `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vertex_edges[v].iter().map(move |&e| self.edges[e].key.other(v))
    }
}
