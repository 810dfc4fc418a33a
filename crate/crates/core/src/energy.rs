//! Conformal (discrete Willmore) energy.
//!
//! Every interior edge carries the external intersection angle `beta` of the
//! circumcircles of its two faces. The vertex energy is the sum of `beta`
//! over the incident edges minus `2 pi`, and the surface energy is
//! `sum_e beta(e) - pi |V|`, half the sum of the vertex energies. The energy
//! is Moebius invariant, non-negative, and vanishes exactly on convex
//! polyhedra inscribed in a sphere.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{angle_between, circumcircle, is_degenerate, Point3};
use crate::mesh::{EdgeId, EdgeKey, Stencil, TriMesh};

pub const REPORT_VERSION: u32 = 1;

/// Closed quadrilateral `p -> u -> q -> w -> p` around the edge `u-w`:
/// `a = u - p`, `b = q - u`, `c = w - q`, `d = p - w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeQuad {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
    pub d: Point3,
}

impl EdgeQuad {
    pub fn from_points(u: &Point3, w: &Point3, p: &Point3, q: &Point3) -> Self {
        EdgeQuad {
            a: u - p,
            b: q - u,
            c: w - q,
            d: p - w,
        }
    }

    /// Numerator and denominator of `cos(beta)`.
    pub fn cos_parts(&self) -> (f64, f64) {
        let EdgeQuad { a, b, c, d } = self;
        let num = a.dot(c) * b.dot(d) - a.dot(b) * c.dot(d) - b.dot(c) * d.dot(a);
        let den = a.norm() * b.norm() * c.norm() * d.norm();
        (num, den)
    }
}

pub fn edge_quad(mesh: &TriMesh, edge: EdgeId) -> Result<EdgeQuad> {
    let Stencil { u, w, p, q } = mesh.stencil(edge)?;
    let e = mesh.edge(edge);
    for f in [e.first.face, e.second.expect("interior").face] {
        if mesh.is_face_degenerate(f) {
            return Err(Error::DegenerateFace(f));
        }
    }
    Ok(EdgeQuad::from_points(mesh.vertex(u), mesh.vertex(w), mesh.vertex(p), mesh.vertex(q)))
}

/// External intersection angle in `[0, pi]` from the real part and modulus
/// of the quaternionic cross-ratio, written in scalar products:
///
/// `cos(beta) = (<a,c><b,d> - <a,b><c,d> - <b,c><d,a>) / (|a||b||c||d|)`.
pub fn beta_edge(quad: &EdgeQuad) -> Result<f64> {
    let (num, den) = quad.cos_parts();
    if !(den > 0.0) || !den.is_finite() || !num.is_finite() {
        return Err(Error::DegenerateTriangle);
    }
    Ok((num / den).clamp(-1.0, 1.0).acos())
}

/// `beta` for the stencil `u, w, p, q` given by positions; symmetric in
/// swapping `u <-> w` and in swapping `p <-> q`.
pub fn beta_points(u: &Point3, w: &Point3, p: &Point3, q: &Point3) -> Result<f64> {
    if is_degenerate(u, w, p) || is_degenerate(w, u, q) {
        return Err(Error::DegenerateTriangle);
    }
    beta_edge(&EdgeQuad::from_points(u, w, p, q))
}

pub fn beta_of_edge(mesh: &TriMesh, edge: EdgeId) -> Result<f64> {
    beta_edge(&edge_quad(mesh, edge)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleAngleOracleResult {
    pub beta: f64,
    pub circumcenters: [Point3; 2],
    pub circumradii: [f64; 2],
}

/// Independent evaluation of `beta`: builds both circumcircles explicitly and
/// measures the angle between their tangent vectors at the shared vertex `u`,
/// each circle oriented by its face (`u -> w -> p` and `w -> u -> q`).
pub fn beta_oracle_points(u: &Point3, w: &Point3, p: &Point3, q: &Point3) -> Result<CircleAngleOracleResult> {
    let c1 = circumcircle(u, w, p)?;
    let c2 = circumcircle(w, u, q)?;
    let t1 = c1.normal.cross(&(u - c1.center));
    let t2 = c2.normal.cross(&(u - c2.center));
    Ok(CircleAngleOracleResult {
        beta: angle_between(&t1, &t2),
        circumcenters: [c1.center, c2.center],
        circumradii: [c1.radius, c2.radius],
    })
}

pub fn beta_oracle(mesh: &TriMesh, edge: EdgeId) -> Result<CircleAngleOracleResult> {
    let Stencil { u, w, p, q } = mesh.stencil(edge)?;
    beta_oracle_points(mesh.vertex(u), mesh.vertex(w), mesh.vertex(p), mesh.vertex(q))
}

/// `W(v) = sum_{e ni v} beta(e) - 2 pi`, for vertices away from the boundary.
pub fn vertex_energy(mesh: &TriMesh, v: usize) -> Result<f64> {
    if v >= mesh.num_vertices() {
        return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
    }
    if !mesh.is_interior_vertex(v) {
        return Err(Error::BoundaryVertex(v));
    }
    let mut sum = 0.0;
    for &e in mesh.vertex_edges(v) {
        sum += beta_of_edge(mesh, e)?;
    }
    Ok(sum - TAU)
}

/// `beta` for every edge of a closed, non-degenerate mesh, in edge order.
pub fn edge_betas(mesh: &TriMesh) -> Result<Vec<f64>> {
    if !mesh.is_closed() {
        return Err(Error::OpenMesh);
    }
    mesh.check_nondegenerate()?;
    (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| beta_of_edge(mesh, e))
        .collect()
}

/// `W(S) = sum_e beta(e) - pi |V|`, with sums taken in edge order.
pub fn energy_value(mesh: &TriMesh) -> Result<f64> {
    let betas = edge_betas(mesh)?;
    Ok(betas.iter().sum::<f64>() - PI * mesh.num_vertices() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeBeta {
    pub edge: EdgeKey,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `sum_e beta(e) - pi |V|`
    pub total: f64,
    pub vertex_count: usize,
    /// `W(v)` indexed by vertex.
    pub per_vertex: Vec<f64>,
    /// One entry per edge, sorted by edge key.
    pub per_edge: Vec<EdgeBeta>,
}

#[derive(Serialize)]
struct VersionedReport<'a> {
    version: u32,
    #[serde(flatten)]
    report: &'a EnergyReport,
}

impl EnergyReport {
    /// `1/2 sum_v W(v)`; equals `total` up to rounding.
    pub fn total_from_vertices(&self) -> f64 {
        0.5 * self.per_vertex.iter().sum::<f64>()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&VersionedReport {
            version: REPORT_VERSION,
            report: self,
        })
        .map_err(|e| Error::Serialize(e.to_string()))
    }

    /// `u,v,beta` rows, one per edge.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        out.write_record(["u", "v", "beta"]).map_err(ser)?;
        for eb in &self.per_edge {
            out.write_record([
                eb.edge.lo().to_string(),
                eb.edge.hi().to_string(),
                format!("{:.17e}", eb.beta),
            ])
            .map_err(ser)?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

pub fn total_energy(mesh: &TriMesh) -> Result<EnergyReport> {
    let betas = edge_betas(mesh)?;
    let mut per_vertex = vec![-TAU; mesh.num_vertices()];
    for (e, b) in mesh.edges().iter().zip(&betas) {
        per_vertex[e.key.lo()] += b;
        per_vertex[e.key.hi()] += b;
    }
    let total = betas.iter().sum::<f64>() - PI * mesh.num_vertices() as f64;
    let per_edge = mesh
        .edges()
        .iter()
        .zip(&betas)
        .map(|(e, &beta)| EdgeBeta { edge: e.key, beta })
        .collect();
    Ok(EnergyReport {
        total,
        vertex_count: mesh.num_vertices(),
        per_vertex,
        per_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, Generator};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn square_split() -> TriMesh {
        // unit square A(0,0) B(1,0) C(1,1) D(0,1) split along AC
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn square_quad_has_unit_sides_and_zero_beta() {
        let m = square_split();
        let id = m.edge_id(0, 2).unwrap();
        let q = edge_quad(&m, id).unwrap();
        for s in [q.a, q.b, q.c, q.d] {
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(q.a + q.b + q.c + q.d, Point3::zeros(), epsilon = 1e-15);
        assert_abs_diff_eq!(beta_edge(&q).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(beta_oracle(&m, id).unwrap().beta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn boundary_and_degenerate_stencils() {
        let m = square_split();
        let boundary = m.edge_id(0, 1).unwrap();
        assert!(matches!(edge_quad(&m, boundary), Err(Error::BoundaryEdge(_))));
        assert!(matches!(vertex_energy(&m, 0), Err(Error::BoundaryVertex(0))));
        assert!(matches!(total_energy(&m), Err(Error::OpenMesh)));

        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3]]).unwrap();
        let id = m.edge_id(0, 1).unwrap();
        assert!(matches!(edge_quad(&m, id), Err(Error::DegenerateFace(0))));
        assert!(matches!(beta_oracle(&m, id), Err(Error::DegenerateTriangle)));

        let zero = EdgeQuad {
            a: Point3::zeros(),
            b: Point3::x(),
            c: -Point3::x(),
            d: Point3::zeros(),
        };
        assert!(beta_edge(&zero).is_err());
    }

    #[test]
    fn regular_tetrahedron_edges() {
        let m = generate(&Generator::Tetrahedron).unwrap();
        for e in 0..m.num_edges() {
            assert_abs_diff_eq!(beta_of_edge(&m, e).unwrap(), TAU / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(beta_oracle(&m, e).unwrap().beta, TAU / 3.0, epsilon = 1e-12);
        }
        for v in 0..4 {
            assert_abs_diff_eq!(vertex_energy(&m, v).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn regular_octahedron_edges_are_right_angles() {
        let m = generate(&Generator::Octahedron).unwrap();
        for e in 0..m.num_edges() {
            assert_abs_diff_eq!(beta_of_edge(&m, e).unwrap(), FRAC_PI_2, epsilon = 1e-12);
        }
        for v in 0..6 {
            assert_abs_diff_eq!(vertex_energy(&m, v).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn icosahedron_and_steinitz_vertex_energies() {
        let ico = total_energy(&generate(&Generator::Icosahedron).unwrap()).unwrap();
        assert_abs_diff_eq!(ico.total, 0.0, epsilon = 1e-9);
        let st = generate(&Generator::Steinitz11).unwrap();
        for v in 0..st.num_vertices() {
            assert!(vertex_energy(&st, v).unwrap() >= -1e-9);
        }
        let rep = total_energy(&st).unwrap();
        assert!(rep.total > 0.1);
        assert_abs_diff_eq!(rep.total, rep.total_from_vertices(), epsilon = 1e-9);
    }

    #[test]
    fn oracle_reports_circles_through_the_edge() {
        let p = [
            Point3::new(0.1, -0.2, 0.3),
            Point3::new(1.2, 0.1, -0.1),
            Point3::new(0.4, 0.9, 0.2),
            Point3::new(0.7, -0.8, -0.5),
        ];
        let r = beta_oracle_points(&p[0], &p[1], &p[2], &p[3]).unwrap();
        for k in 0..2 {
            for x in [&p[0], &p[1]] {
                assert_abs_diff_eq!((x - r.circumcenters[k]).norm(), r.circumradii[k], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn report_serializations() {
        let m = generate(&Generator::Tetrahedron).unwrap();
        let rep = total_energy(&m).unwrap();
        let json: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(json["version"], 1);
        assert_eq!(json["vertex_count"], 4);
        assert_eq!(json["per_edge"].as_array().unwrap().len(), 6);
        assert_eq!(json["per_edge"][0]["edge"], serde_json::json!([0, 1]));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("u,v,beta\n0,1,"));
    }

    fn point() -> impl Strategy<Value = Point3> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn beta_in_range_and_matches_oracle(u in point(), w in point(), p in point(), q in point()) {
            let fat = |a: &Point3, b: &Point3, c: &Point3| {
                crate::geom::triangle_area(a, b, c) > 1e-2 * crate::geom::longest_edge_sq(a, b, c)
            };
            prop_assume!(fat(&u, &w, &p) && fat(&w, &u, &q));
            let b = beta_points(&u, &w, &p, &q).unwrap();
            prop_assert!((0.0..=PI).contains(&b));
            let o = beta_oracle_points(&u, &w, &p, &q).unwrap().beta;
            prop_assert!((b - o).abs() <= 1e-9, "formula {} oracle {}", b, o);
            // stencil symmetries: swap the edge ends, swap the apices
            prop_assert!((beta_points(&w, &u, &p, &q).unwrap() - b).abs() <= 1e-12);
            prop_assert!((beta_points(&u, &w, &q, &p).unwrap() - b).abs() <= 1e-12);
        }
    }
}
