use super::{EdgeId, TriMesh};
use crate::error::{Error, Result};

/// The four vertices around an interior edge `u-w`: the first incident face
/// traverses `u -> w` and has apex `p`, the second face has apex `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stencil {
    pub u: usize,
    pub w: usize,
    pub p: usize,
    pub q: usize,
}

impl TriMesh {
    pub fn stencil(&self, id: EdgeId) -> Result<Stencil> {
        let e = &self.edges[id];
        let second = e.second.ok_or(Error::BoundaryEdge(e.key))?;
        let (lo, hi) = (e.key.lo(), e.key.hi());
        let (u, w) = if self.face_has_directed_edge(e.first.face, lo, hi) {
            (lo, hi)
        } else {
            (hi, lo)
        };
        Ok(Stencil {
            u,
            w,
            p: e.first.opposite,
            q: second.opposite,
        })
    }

    /// Checks that `id` can be flipped: interior edge, distinct apices that
    /// are not already joined, and no interior endpoint of valence 3.
    pub fn check_flip(&self, id: EdgeId) -> Result<()> {
        let e = self.edges[id];
        let blocked = |reason| Error::FlipBlocked { edge: e.key, reason };
        let Stencil { u, w, p, q } = self.stencil(id).map_err(|_| blocked("boundary edge"))?;
        if p == q {
            return Err(blocked("both faces share the opposite vertex"));
        }
        if self.edge_id(p, q).is_some() {
            return Err(blocked("opposite vertices are already joined"));
        }
        let pinched = |v: usize| self.vertex_edges(v).len() <= 3 && self.is_interior_vertex(v);
        if pinched(u) || pinched(w) {
            return Err(blocked("endpoint has valence 3"));
        }
        Ok(())
    }

    /// Replaces the edge `u-w` by the other diagonal `p-q` of its two faces.
    /// Vertex positions are unchanged; the two faces keep their indices.
    pub fn flip_edge(&self, id: EdgeId) -> Result<TriMesh> {
        self.check_flip(id)?;
        let e = self.edges[id];
        let Stencil { u, w, p, q } = self.stencil(id)?;
        let f1 = e.first.face;
        let f2 = e.second.expect("interior").face;
        let mut faces = self.faces.clone();
        // boundary cycle of the quad is u -> q -> w -> p
        faces[f1] = [u, q, p];
        faces[f2] = [q, w, p];
        TriMesh::new(self.vertices.clone(), faces)
    }

    /// 1-to-4 split: a new vertex at every edge midpoint (vertex `n + edge id`),
    /// each face replaced by three corner triangles and the midpoint triangle.
    pub fn refine(&self) -> TriMesh {
        let n = self.num_vertices();
        let mut vertices = self.vertices.clone();
        vertices.extend(
            self.edges
                .iter()
                .map(|e| (self.vertices[e.key.lo()] + self.vertices[e.key.hi()]) * 0.5),
        );
        let mid = |a: usize, b: usize| n + self.edge_id(a, b).expect("face edge exists");
        let mut faces = Vec::with_capacity(4 * self.num_faces());
        for &[a, b, c] in &self.faces {
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            faces.push([a, ab, ca]);
            faces.push([b, bc, ab]);
            faces.push([c, ca, bc]);
            faces.push([ab, bc, ca]);
        }
        TriMesh::new(vertices, faces).expect("refinement of a valid mesh is valid")
    }
}
