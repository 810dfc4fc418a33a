//! Gradient of `W` with respect to vertex positions.
//!
//! `beta = acos(N / D)` with `N`, `D` the scalar-product numerator and the
//! product of the four side lengths of the edge quadrilateral. The chain rule
//! runs through `a = u - p`, `b = q - u`, `c = w - q`, `d = p - w`.

use rayon::prelude::*;

use crate::energy::EdgeQuad;
use crate::error::{Error, Result};
use crate::geom::{is_degenerate, Point3};
use crate::mesh::{Stencil, TriMesh};

/// Below this `sin(beta)` the factor `-1 / sin(beta)` is clamped.
pub const SIN_GUARD: f64 = 1e-8;

/// `beta` of the stencil and its gradient with respect to `[u, w, p, q]`.
pub fn beta_with_gradient(u: &Point3, w: &Point3, p: &Point3, q: &Point3) -> Result<(f64, [Point3; 4])> {
    let quad = EdgeQuad::from_points(u, w, p, q);
    let EdgeQuad { a, b, c, d } = quad;
    let (num, den) = quad.cos_parts();
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::DegenerateTriangle);
    }
    let cos = (num / den).clamp(-1.0, 1.0);
    let beta = cos.acos();
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let factor = -1.0 / sin.max(SIN_GUARD);

    let (ab, ac, ad) = (a.dot(&b), a.dot(&c), a.dot(&d));
    let (bc, bd, cd) = (b.dot(&c), b.dot(&d), c.dot(&d));
    let dn_da = c * bd - b * cd - d * bc;
    let dn_db = d * ac - a * cd - c * ad;
    let dn_dc = a * bd - d * ab - b * ad;
    let dn_dd = b * ac - c * ab - a * bc;
    let dcos = |dn: Point3, x: &Point3| dn / den - x * (cos / x.norm_squared());
    let ga = dcos(dn_da, &a) * factor;
    let gb = dcos(dn_db, &b) * factor;
    let gc = dcos(dn_dc, &c) * factor;
    let gd = dcos(dn_dd, &d) * factor;
    Ok((beta, [ga - gb, gc - gd, gd - ga, gb - gc]))
}

fn stencil_points(mesh: &TriMesh, s: &Stencil) -> [Point3; 4] {
    [*mesh.vertex(s.u), *mesh.vertex(s.w), *mesh.vertex(s.p), *mesh.vertex(s.q)]
}

/// `W(S)` and its exact gradient, one 3-vector per vertex.
pub fn energy_and_gradient(mesh: &TriMesh) -> Result<(f64, Vec<Point3>)> {
    if !mesh.is_closed() {
        return Err(Error::OpenMesh);
    }
    mesh.check_nondegenerate()?;
    let per_edge: Vec<(Stencil, f64, [Point3; 4])> = (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| {
            let s = mesh.stencil(e)?;
            let [u, w, p, q] = stencil_points(mesh, &s);
            let (beta, g) = beta_with_gradient(&u, &w, &p, &q)?;
            Ok((s, beta, g))
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![Point3::zeros(); mesh.num_vertices()];
    let mut sum = 0.0;
    for (s, beta, g) in &per_edge {
        sum += beta;
        grad[s.u] += g[0];
        grad[s.w] += g[1];
        grad[s.p] += g[2];
        grad[s.q] += g[3];
    }
    Ok((sum - std::f64::consts::PI * mesh.num_vertices() as f64, grad))
}

pub fn grad_analytic(mesh: &TriMesh) -> Result<Vec<Point3>> {
    energy_and_gradient(mesh).map(|(_, g)| g)
}

/// Central-difference gradient of `W`. Moving vertex `v` changes `beta` only
/// on edges whose stencil contains `v` (its incident edges and the edges
/// opposite it), so only those terms are differenced; every other term of
/// `W` cancels identically. `h` defaults to `1e-6` times the bounding-box
/// diagonal and is halved (up to four times) if a probe degenerates a face.
pub fn grad_fd(mesh: &TriMesh, h: Option<f64>) -> Result<Vec<Point3>> {
    if !mesh.is_closed() {
        return Err(Error::OpenMesh);
    }
    mesh.check_nondegenerate()?;
    let h0 = h.unwrap_or(1e-6 * mesh.bbox_diagonal());
    if !(h0 > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h0} must be positive")));
    }

    let stencils: Vec<Stencil> = (0..mesh.num_edges()).map(|e| mesh.stencil(e)).collect::<Result<_>>()?;
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
    for (e, s) in stencils.iter().enumerate() {
        for v in [s.u, s.w, s.p, s.q] {
            touching[v].push(e);
        }
    }

    (0..mesh.num_vertices())
        .into_par_iter()
        .map(|v| {
            let local = |x: Point3| -> Result<f64> {
                let pos = |i: usize| if i == v { x } else { *mesh.vertex(i) };
                let mut sum = 0.0;
                for &e in &touching[v] {
                    let s = &stencils[e];
                    let (u, w, p, q) = (pos(s.u), pos(s.w), pos(s.p), pos(s.q));
                    if is_degenerate(&u, &w, &p) || is_degenerate(&w, &u, &q) {
                        return Err(Error::DegenerateTriangle);
                    }
                    sum += crate::energy::beta_edge(&EdgeQuad::from_points(&u, &w, &p, &q))?;
                }
                Ok(sum)
            };
            let x0 = *mesh.vertex(v);
            let mut g = Point3::zeros();
            for k in 0..3 {
                let mut h = h0;
                let mut attempt = 0;
                g[k] = loop {
                    let mut plus = x0;
                    let mut minus = x0;
                    plus[k] += h;
                    minus[k] -= h;
                    match (local(plus), local(minus)) {
                        (Ok(fp), Ok(fm)) => break (fp - fm) / (2.0 * h),
                        _ if attempt < 4 => {
                            attempt += 1;
                            h *= 0.5;
                        }
                        (Err(e), _) | (_, Err(e)) => return Err(e),
                    }
                };
            }
            Ok(g)
        })
        .collect()
}

/// `max_i |g_i|` over all vertex components.
pub fn sup_norm(g: &[Point3]) -> f64 {
    g.iter().map(|x| x.amax()).fold(0.0, f64::max)
}

/// `|a - b|_inf / |b|_inf`.
pub fn relative_deviation(a: &[Point3], b: &[Point3]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    let scale = sup_norm(b);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_value;
    use crate::mesh::{generate, perturb_radial, Generator};

    #[test]
    fn icosahedron_is_stationary() {
        let m = generate(&Generator::Icosahedron).unwrap();
        assert!(sup_norm(&grad_analytic(&m).unwrap()) <= 1e-9);
        assert!(sup_norm(&grad_fd(&m, None).unwrap()) <= 1e-5);
    }

    #[test]
    fn analytic_matches_central_differences() {
        let m = perturb_radial(&generate(&Generator::SubdividedSphere { level: 1 }).unwrap(), 0.08, 5);
        let ga = grad_analytic(&m).unwrap();
        let gf = grad_fd(&m, None).unwrap();
        assert!(sup_norm(&gf) > 1e-3);
        assert!(relative_deviation(&ga, &gf) <= 1e-6, "{}", relative_deviation(&ga, &gf));
    }

    #[test]
    fn translation_and_scaling_directions_are_flat() {
        let m = perturb_radial(&generate(&Generator::Octahedron).unwrap(), 0.2, 1);
        let g = grad_fd(&m, None).unwrap();
        for k in 0..3 {
            let along: f64 = g.iter().map(|x| x[k]).sum();
            assert!(along.abs() < 1e-7, "translation {k}: {along}");
        }
        let radial: f64 = g.iter().zip(m.vertices()).map(|(x, p)| x.dot(p)).sum();
        assert!(radial.abs() < 1e-7, "scaling: {radial}");
        // and the energy itself does not move
        let w0 = energy_value(&m).unwrap();
        let scaled = m.with_vertices(m.vertices().iter().map(|p| p * 3.0 + Point3::x()).collect()).unwrap();
        assert!((energy_value(&scaled).unwrap() - w0).abs() < 1e-12);
    }

    #[test]
    fn guarded_gradient_is_finite_on_flat_cocircular_edge() {
        // edge u-w with apices p, q, all four on the unit circle in the xy-plane
        let u = Point3::new(0.0, 1.0, 0.0);
        let w = Point3::new(-0.6, -0.8, 0.0);
        let p = Point3::new(-1.0, 0.0, 0.0);
        let q = Point3::new(1.0, 0.0, 0.0);
        let (beta, g) = beta_with_gradient(&u, &w, &p, &q).unwrap();
        assert!(beta < 1e-6);
        assert!(g.iter().all(|x| x.iter().all(|c| c.is_finite())));
    }
}
