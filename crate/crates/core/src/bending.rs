//! Hinge bending energy `E = sum (l / L) theta^2` of a rest/deformed mesh
//! pair, and the small-fold behaviour of `beta`.
//!
//! `l` is the rest length of an interior edge, `L` the rest distance between
//! the circumcenters of its two faces, `theta` the change of the signed
//! dihedral angle between rest and deformed configuration.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{beta_edge, EdgeQuad};
use crate::error::{Error, Result};
use crate::geom::{bbox_diagonal, is_degenerate, rotate_about_axis, Point3};
use crate::mesh::{EdgeId, EdgeKey, Stencil, TriMesh};

/// Edges whose `L` is at most this times the rest bounding-box diagonal are
/// excluded.
pub const L_EPS_REL: f64 = 1e-9;

/// Circumcenter and circumradius from barycentric weights
/// `|a|^2 (|b|^2 + |c|^2 - |a|^2)` etc., where `|a|` is the side opposite `a`.
pub fn circumcenter(a: &Point3, b: &Point3, c: &Point3) -> Result<(Point3, f64)> {
    if is_degenerate(a, b, c) {
        return Err(Error::DegenerateTriangle);
    }
    let la = (b - c).norm_squared();
    let lb = (c - a).norm_squared();
    let lc = (a - b).norm_squared();
    let wa = la * (lb + lc - la);
    let wb = lb * (lc + la - lb);
    let wc = lc * (la + lb - lc);
    let center = (a * wa + b * wb + c * wc) / (wa + wb + wc);
    Ok((center, (center - a).norm()))
}

/// Signed dihedral angle at an interior edge in `(-pi, pi]`: the angle
/// between the oriented normals of the two faces, positive when the pair
/// folds towards the side the normals point away from (convex hinge for an
/// outward-oriented surface).
pub fn signed_dihedral(mesh: &TriMesh, edge: EdgeId) -> Result<f64> {
    let Stencil { u, w, p, q } = mesh.stencil(edge)?;
    let x = |i: usize| *mesh.vertex(i);
    let (xu, xw, xp, xq) = (x(u), x(w), x(p), x(q));
    let e = mesh.edge(edge);
    for f in [Some(e.first.face), e.second.map(|s| s.face)].into_iter().flatten() {
        if mesh.is_face_degenerate(f) {
            return Err(Error::DegenerateFace(f));
        }
    }
    // faces (u, w, p) and (w, u, q) in the orientation of the first face
    let n1 = (xw - xu).cross(&(xp - xu)).normalize();
    let n2 = (xu - xw).cross(&(xq - xw)).normalize();
    let axis = (xw - xu).normalize();
    Ok(n1.cross(&n2).dot(&axis).atan2(n1.dot(&n2)))
}

/// Angle between the oriented normals of the two faces at `edge`, in
/// `[0, pi]`. Normals of an inconsistently oriented pair are aligned first.
pub fn dihedral_theta(mesh: &TriMesh, edge: EdgeId) -> Result<f64> {
    Ok(signed_dihedral(mesh, edge)?.abs())
}

/// Distance between the two faces of a hinge used as `L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HingeLength {
    #[default]
    Circumcenter,
    /// Distance between face barycenters; comparison only.
    Barycenter,
}

#[derive(Clone, Debug)]
pub struct BendPair {
    rest: TriMesh,
    deformed: TriMesh,
}

impl BendPair {
    pub fn new(rest: TriMesh, deformed: TriMesh) -> Result<Self> {
        if rest.faces() != deformed.faces() || rest.num_vertices() != deformed.num_vertices() {
            return Err(Error::CombinatoricsMismatch);
        }
        Ok(Self { rest, deformed })
    }

    pub fn rest(&self) -> &TriMesh {
        &self.rest
    }

    pub fn deformed(&self) -> &TriMesh {
        &self.deformed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeTerm {
    pub edge: EdgeKey,
    pub l: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub theta_rest: f64,
    pub theta_deformed: f64,
    /// `|theta_deformed - theta_rest|`, wrapped to `[0, pi]`.
    pub theta: f64,
    pub term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BendReport {
    pub total: f64,
    pub length_model: HingeLength,
    pub terms: Vec<EdgeTerm>,
    /// Interior edges skipped because `L` vanishes.
    pub excluded: Vec<EdgeKey>,
}

impl BendReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["u", "v", "l", "L", "theta", "term"]).map_err(ser)?;
        for t in &self.terms {
            out.write_record([
                t.edge.lo().to_string(),
                t.edge.hi().to_string(),
                format!("{:.17e}", t.l),
                format!("{:.17e}", t.big_l),
                format!("{:.17e}", t.theta),
                format!("{:.17e}", t.term),
            ])
            .map_err(ser)?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn hinge_length(mesh: &TriMesh, s: &Stencil, model: HingeLength) -> Result<f64> {
    let x = |i: usize| *mesh.vertex(i);
    Ok(match model {
        HingeLength::Circumcenter => {
            let (c1, _) = circumcenter(&x(s.u), &x(s.w), &x(s.p))?;
            let (c2, _) = circumcenter(&x(s.w), &x(s.u), &x(s.q))?;
            (c1 - c2).norm()
        }
        HingeLength::Barycenter => ((x(s.p) - x(s.q)) / 3.0).norm(),
    })
}

/// `E = sum (l / L) theta^2` over interior edges, with `l`, `L` measured on
/// the rest mesh and `theta` the change of the signed dihedral angle.
pub fn bending_energy(pair: &BendPair) -> Result<BendReport> {
    bending_energy_with(pair, HingeLength::Circumcenter)
}

pub fn bending_energy_with(pair: &BendPair, model: HingeLength) -> Result<BendReport> {
    let rest = &pair.rest;
    let eps = L_EPS_REL * rest.bbox_diagonal();
    let per_edge: Vec<Option<std::result::Result<EdgeTerm, EdgeKey>>> = (0..rest.num_edges())
        .into_par_iter()
        .map(|id| {
            let rec = rest.edge(id);
            if !rec.is_interior() {
                return Ok(None);
            }
            let s = rest.stencil(id)?;
            let big_l = hinge_length(rest, &s, model)?;
            if big_l <= eps {
                return Ok(Some(Err(rec.key)));
            }
            let l = (rest.vertex(s.u) - rest.vertex(s.w)).norm();
            let theta_rest = signed_dihedral(rest, id)?;
            let theta_deformed = signed_dihedral(&pair.deformed, id)?;
            let theta = wrap_angle(theta_deformed - theta_rest).abs();
            Ok(Some(Ok(EdgeTerm {
                edge: rec.key,
                l,
                big_l,
                theta_rest,
                theta_deformed,
                theta,
                term: l / big_l * theta * theta,
            })))
        })
        .collect::<Result<_>>()?;

    let mut terms = Vec::new();
    let mut excluded = Vec::new();
    for item in per_edge.into_iter().flatten() {
        match item {
            Ok(t) => terms.push(t),
            Err(k) => excluded.push(k),
        }
    }
    if !excluded.is_empty() {
        log::warn!("{} edge(s) with coincident circumcenters excluded", excluded.len());
    }
    Ok(BendReport {
        total: terms.iter().map(|t| t.term).sum(),
        length_model: model,
        terms,
        excluded,
    })
}

/// Two triangles `(u, w, p)` and `(w, u, q)` sharing the edge `u-w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hinge {
    pub u: Point3,
    pub w: Point3,
    pub p: Point3,
    pub q: Point3,
}

impl Hinge {
    pub fn new(u: Point3, w: Point3, p: Point3, q: Point3) -> Result<Self> {
        if is_degenerate(&u, &w, &p) || is_degenerate(&w, &u, &q) {
            return Err(Error::DegenerateTriangle);
        }
        Ok(Self { u, w, p, q })
    }

    pub fn edge_length(&self) -> f64 {
        (self.w - self.u).norm()
    }

    pub fn circumcenter_distance(&self) -> Result<f64> {
        let (c1, _) = circumcenter(&self.u, &self.w, &self.p)?;
        let (c2, _) = circumcenter(&self.w, &self.u, &self.q)?;
        Ok((c1 - c2).norm())
    }

    /// The hinge with `q` rotated by `theta` about the edge.
    pub fn folded(&self, theta: f64) -> Hinge {
        let axis = (self.w - self.u).normalize();
        Hinge {
            q: rotate_about_axis(&self.q, &self.u, &axis, theta),
            ..*self
        }
    }

    pub fn beta(&self) -> Result<f64> {
        beta_edge(&EdgeQuad::from_points(&self.u, &self.w, &self.p, &self.q))
    }
}

/// `(theta, beta(theta))` for the hinge folded by each `theta`.
pub fn beta_theta_profile(hinge: &Hinge, thetas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let pts = [hinge.u, hinge.w, hinge.p, hinge.q];
    if hinge.circumcenter_distance()? <= L_EPS_REL * bbox_diagonal(&pts) {
        return Err(Error::CoincidentCircumcenters(EdgeKey::new(0, 1)));
    }
    thetas.iter().map(|&t| Ok((t, hinge.folded(t).beta()?))).collect()
}

/// Least-squares fit of `beta(theta) - beta0 = k theta^2 + m theta^4`;
/// returns `k`.
pub fn fit_quadratic_coefficient(profile: &[(f64, f64)], beta0: f64) -> Result<f64> {
    let (mut s4, mut s6, mut s8, mut r2, mut r4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, b) in profile {
        let t2 = t * t;
        let d = b - beta0;
        s4 += t2 * t2;
        s6 += t2 * t2 * t2;
        s8 += t2 * t2 * t2 * t2;
        r2 += d * t2;
        r4 += d * t2 * t2;
    }
    let det = s4 * s8 - s6 * s6;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::InvalidParameter("profile needs at least two distinct nonzero angles".into()));
    }
    Ok((r2 * s8 - r4 * s6) / det)
}

/// Fit window used by [`hinge_coefficient`].
pub const FIT_THETAS: (f64, f64, usize) = (1e-3, 1e-2, 19);

/// Fitted coefficient of `theta^2` in `beta(theta) - beta(0)` for the hinge.
pub fn hinge_coefficient(hinge: &Hinge) -> Result<f64> {
    let (lo, hi, n) = FIT_THETAS;
    let thetas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let profile = beta_theta_profile(hinge, &thetas)?;
    fit_quadratic_coefficient(&profile, hinge.beta()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::circumcircle;
    use crate::mesh::{generate, perturb_radial, Generator};
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit, Vector3};

    fn flat_hinge_mesh(theta: f64) -> TriMesh {
        let s = 3f64.sqrt() / 2.0;
        let u = Point3::new(0.0, 0.0, 0.0);
        let w = Point3::new(1.0, 0.0, 0.0);
        let p = Point3::new(0.5, s, 0.0);
        let q = rotate_about_axis(&Point3::new(0.5, -s, 0.0), &u, &Point3::x(), theta);
        TriMesh::new(vec![u, w, p, q], vec![[0, 1, 2], [1, 0, 3]]).unwrap()
    }

    #[test]
    fn circumcenter_examples() {
        let s = 3f64.sqrt() / 2.0;
        let (a, b, c) = (Point3::zeros(), Point3::x(), Point3::new(0.5, s, 0.0));
        let (center, r) = circumcenter(&a, &b, &c).unwrap();
        assert_relative_eq!(center, (a + b + c) / 3.0, epsilon = 1e-15);
        assert_relative_eq!(r, 1.0 / 3f64.sqrt(), epsilon = 1e-15);

        let (center, r) = circumcenter(&Point3::zeros(), &Point3::new(3.0, 0.0, 0.0), &Point3::new(0.0, 4.0, 0.0)).unwrap();
        assert_relative_eq!(center, Point3::new(1.5, 2.0, 0.0), epsilon = 1e-14);
        assert_relative_eq!(r, 2.5, epsilon = 1e-14);

        assert!(circumcenter(&Point3::zeros(), &Point3::x(), &(Point3::x() * 2.0)).is_err());
    }

    #[test]
    fn circumcenter_agrees_with_cross_product_formula() {
        let pts = [
            Point3::new(0.3, -1.2, 0.7),
            Point3::new(2.1, 0.4, -0.5),
            Point3::new(-0.8, 0.9, 1.6),
        ];
        let (c, r) = circumcenter(&pts[0], &pts[1], &pts[2]).unwrap();
        let circle = circumcircle(&pts[0], &pts[1], &pts[2]).unwrap();
        assert_relative_eq!(c, circle.center, epsilon = 1e-13);
        for p in &pts {
            assert_relative_eq!((p - c).norm(), r, epsilon = 1e-13);
        }
    }

    #[test]
    fn dihedral_examples() {
        assert!(dihedral_theta(&flat_hinge_mesh(0.0), 0).unwrap().abs() < 1e-15);
        let id = flat_hinge_mesh(0.0).edge_id(0, 1).unwrap();
        assert_relative_eq!(dihedral_theta(&flat_hinge_mesh(PI / 2.0), id).unwrap(), PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(dihedral_theta(&flat_hinge_mesh(-PI / 2.0), id).unwrap(), PI / 2.0, epsilon = 1e-14);
        // q rotated onto p: the faces lie on top of each other
        assert_relative_eq!(dihedral_theta(&flat_hinge_mesh(PI - 1e-9), id).unwrap(), PI, epsilon = 1e-8);
        assert_relative_eq!(signed_dihedral(&flat_hinge_mesh(0.3), id).unwrap(), -signed_dihedral(&flat_hinge_mesh(-0.3), id).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn inconsistent_orientation_is_aligned() {
        let m = flat_hinge_mesh(0.4);
        let flipped = TriMesh::new(m.vertices().to_vec(), vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        let id = m.edge_id(0, 1).unwrap();
        assert_relative_eq!(dihedral_theta(&flipped, id).unwrap(), dihedral_theta(&m, id).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn single_equilateral_hinge() {
        // Independent construction: each circumcenter is the centroid, which
        // sits 1/(2 sqrt 3) from the shared edge on its own side.
        let s = 3f64.sqrt() / 2.0;
        let c1 = Point3::new(0.5, s / 3.0, 0.0);
        let c2 = Point3::new(0.5, -s / 3.0, 0.0);
        let expected = 1.0 / (c1 - c2).norm() * 0.01;
        assert_relative_eq!(expected, 3f64.sqrt() * 0.01, epsilon = 1e-15);

        let pair = BendPair::new(flat_hinge_mesh(0.0), flat_hinge_mesh(0.1)).unwrap();
        let report = bending_energy(&pair).unwrap();
        assert_eq!(report.terms.len(), 1);
        assert_relative_eq!(report.terms[0].big_l, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(report.total, expected, max_relative = 1e-12);
    }

    #[test]
    fn doubling_the_fold_quadruples_the_term() {
        let rest = flat_hinge_mesh(0.0);
        let e1 = bending_energy(&BendPair::new(rest.clone(), flat_hinge_mesh(0.01)).unwrap()).unwrap();
        let e2 = bending_energy(&BendPair::new(rest, flat_hinge_mesh(0.02)).unwrap()).unwrap();
        assert_relative_eq!(e2.total / e1.total, 4.0, max_relative = 1e-9);
    }

    fn transformed(m: &TriMesh, f: impl Fn(&Point3) -> Point3) -> TriMesh {
        m.with_vertices(m.vertices().iter().map(f).collect()).unwrap()
    }

    #[test]
    fn rigid_motion_and_scaling_invariance() {
        let rest = generate(&Generator::SubdividedSphere { level: 1 }).unwrap();
        let deformed = perturb_radial(&rest, 0.1, 3);
        let e0 = bending_energy(&BendPair::new(rest.clone(), deformed.clone()).unwrap()).unwrap().total;
        assert!(e0 > 0.0);

        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5)), 1.1);
        let moved = transformed(&deformed, |p| rot * p + Point3::new(3.0, -1.0, 2.0));
        let e1 = bending_energy(&BendPair::new(rest.clone(), moved).unwrap()).unwrap().total;
        assert!((e1 - e0).abs() <= 1e-10 * e0);

        let e2 = bending_energy(
            &BendPair::new(transformed(&rest, |p| p * 7.5), transformed(&deformed, |p| p * 7.5)).unwrap(),
        )
        .unwrap()
        .total;
        assert!((e2 - e0).abs() <= 1e-10 * e0);

        let rigid = transformed(&rest, |p| rot * p);
        assert!(bending_energy(&BendPair::new(rest, rigid).unwrap()).unwrap().total < 1e-20);
    }

    #[test]
    fn mismatch_and_exclusion() {
        let a = generate(&Generator::Octahedron).unwrap();
        let b = generate(&Generator::Icosahedron).unwrap();
        assert!(matches!(BendPair::new(a.clone(), b), Err(Error::CombinatoricsMismatch)));
        // every octahedron face has its circumcenter at its centroid, and
        // no two coincide, so nothing is excluded
        let r = bending_energy(&BendPair::new(a.clone(), a).unwrap()).unwrap();
        assert!(r.excluded.is_empty() && r.total == 0.0);

        // a planar square split along a diagonal: both circumcenters are the
        // square's center
        let v = vec![Point3::zeros(), Point3::x(), Point3::new(1.0, 1.0, 0.0), Point3::y()];
        let sq = TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let r = bending_energy(&BendPair::new(sq.clone(), sq).unwrap()).unwrap();
        assert_eq!(r.excluded, vec![EdgeKey::new(0, 2)]);
        assert!(r.terms.is_empty());
    }

    #[test]
    fn barycenter_variant_differs() {
        let pair = BendPair::new(flat_hinge_mesh(0.0), flat_hinge_mesh(0.1)).unwrap();
        let r = bending_energy_with(&pair, HingeLength::Barycenter).unwrap();
        // equilateral: barycenters and circumcenters coincide
        assert_relative_eq!(r.total, bending_energy(&pair).unwrap().total, max_relative = 1e-12);
        let v = vec![Point3::zeros(), Point3::x(), Point3::new(0.2, 0.9, 0.0), Point3::new(0.9, -0.3, 0.0)];
        let rest = TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3]]).unwrap();
        let def = transformed(&rest, |p| if p.y < 0.0 { rotate_about_axis(p, &Point3::zeros(), &Point3::x(), 0.2) } else { *p });
        let pair = BendPair::new(rest, def).unwrap();
        let a = bending_energy(&pair).unwrap().total;
        let b = bending_energy_with(&pair, HingeLength::Barycenter).unwrap().total;
        assert!((a - b).abs() > 1e-4);
    }

    #[test]
    fn profile_starts_at_planar_beta() {
        let h = Hinge::new(Point3::zeros(), Point3::x(), Point3::new(0.3, 0.8, 0.0), Point3::new(0.6, -0.4, 0.0)).unwrap();
        let prof = beta_theta_profile(&h, &[0.0, 0.01]).unwrap();
        assert_eq!(prof[0].1, h.beta().unwrap());
        assert!(prof[1].1 > prof[0].1);
    }

    #[test]
    fn symmetric_hinge_is_rejected() {
        // p and q on the circle with diameter u-w
        let h = Hinge::new(Point3::zeros(), Point3::x(), Point3::new(0.2, 0.4, 0.0), Point3::new(0.9, -0.3, 0.0)).unwrap();
        assert!(matches!(beta_theta_profile(&h, &[0.01]), Err(Error::CoincidentCircumcenters(_))));
    }

    #[test]
    fn small_fold_coefficient_is_quarter_of_l_over_big_l() {
        // Measured law for planar hinges: beta(theta) - beta(0) ~ l / (4 L) theta^2.
        let hinges = [
            (Point3::new(0.3, 0.8, 0.0), Point3::new(0.6, -0.4, 0.0)),
            (Point3::new(-0.2, 0.5, 0.0), Point3::new(1.4, -1.1, 0.0)),
            (Point3::new(0.5, 2.0, 0.0), Point3::new(0.1, -0.2, 0.0)),
        ];
        for (p, q) in hinges {
            let h = Hinge::new(Point3::zeros(), Point3::x(), p, q).unwrap();
            let ratio = h.edge_length() / h.circumcenter_distance().unwrap();
            let k = hinge_coefficient(&h).unwrap();
            assert!((k / (ratio / 4.0) - 1.0).abs() < 1e-2, "k = {k}, l/L = {ratio}");
        }
    }

    #[test]
    fn report_outputs() {
        let pair = BendPair::new(flat_hinge_mesh(0.0), flat_hinge_mesh(0.1)).unwrap();
        let r = bending_energy(&pair).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["terms"][0]["edge"], serde_json::json!([0, 1]));
        assert!(json["terms"][0]["L"].is_f64());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u,v,l,L,theta,term\n0,1,"));
    }
}
