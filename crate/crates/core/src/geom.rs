//! Small Euclidean helpers shared by the energy, flow and bending code.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

/// Relative area threshold below which a triangle is treated as degenerate:
/// `area < DEGENERATE_AREA_RATIO * longest_edge^2`.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-14;

pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

pub fn longest_edge_sq(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    (b - a)
        .norm_squared()
        .max((c - b).norm_squared())
        .max((a - c).norm_squared())
}

pub fn is_degenerate(a: &Point3, b: &Point3, c: &Point3) -> bool {
    let l2 = longest_edge_sq(a, b, c);
    if !(l2 > 0.0) || !l2.is_finite() {
        return true;
    }
    triangle_area(a, b, c) < DEGENERATE_AREA_RATIO * l2
}

/// Circumscribed circle of a triangle. `normal` is the unit normal of the
/// triangle oriented by the vertex order `a -> b -> c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point3,
    pub radius: f64,
    pub normal: Point3,
}

pub fn circumcircle(a: &Point3, b: &Point3, c: &Point3) -> Result<Circle> {
    if is_degenerate(a, b, c) {
        return Err(Error::DegenerateTriangle);
    }
    let u = b - a;
    let v = c - a;
    let w = u.cross(&v);
    let w2 = w.norm_squared();
    let center = a + (v.cross(&w) * u.norm_squared() + w.cross(&u) * v.norm_squared()) / (2.0 * w2);
    Ok(Circle {
        center,
        radius: (center - a).norm(),
        normal: w / w2.sqrt(),
    })
}

/// Angle between two vectors in `[0, pi]`, robust near both ends.
pub fn angle_between(x: &Point3, y: &Point3) -> f64 {
    x.cross(y).norm().atan2(x.dot(y))
}

pub fn bbox_diagonal(points: &[Point3]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points[1..] {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

/// Rotation of `p` about the line through `origin` with unit direction `axis`.
pub fn rotate_about_axis(p: &Point3, origin: &Point3, axis: &Point3, angle: f64) -> Point3 {
    let r = p - origin;
    let (s, c) = angle.sin_cos();
    origin + r * c + axis.cross(&r) * s + axis * (axis.dot(&r) * (1.0 - c))
}

/// Least-squares sphere through `points`: center, radius and the largest
/// deviation `| |p - center| - radius |`. `None` for fewer than four points
/// or a coplanar set.
pub fn fit_sphere(points: &[Point3]) -> Option<(Point3, f64, f64)> {
    if points.len() < 4 {
        return None;
    }
    // |p|^2 = 2 c . p + k, linear in (c, k)
    let a = DMatrix::from_fn(points.len(), 4, |i, j| if j < 3 { 2.0 * points[i][j] } else { 1.0 });
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.norm_squared()));
    let sol = a.svd(true, true).solve(&b, 1e-12).ok()?;
    let center = Point3::new(sol[0], sol[1], sol[2]);
    let r2 = sol[3] + center.norm_squared();
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let radius = r2.sqrt();
    let dev = points.iter().map(|p| ((p - center).norm() - radius).abs()).fold(0.0, f64::max);
    // a coplanar set admits no proper fit and leaves a large residual
    if dev > 0.5 * radius {
        return None;
    }
    Some((center, radius, dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circumcircle_of_right_triangle_sits_on_hypotenuse() {
        let c = circumcircle(
            &Point3::new(0.0, 0.0, 0.0),
            &Point3::new(3.0, 0.0, 0.0),
            &Point3::new(0.0, 4.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(c.center, Point3::new(1.5, 2.0, 0.0), epsilon = 1e-14);
        assert_relative_eq!(c.radius, 2.5, epsilon = 1e-14);
        assert_relative_eq!(c.normal, Point3::z(), epsilon = 1e-14);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 1.0, 1.0);
        let c = Point3::new(2.0, 2.0, 2.0);
        assert!(is_degenerate(&a, &b, &c));
        assert!(circumcircle(&a, &b, &c).is_err());
        assert!(is_degenerate(&a, &a, &b));
    }

    #[test]
    fn axis_rotation_quarter_turn() {
        let p = rotate_about_axis(
            &Point3::new(1.0, 0.0, 0.0),
            &Point3::zeros(),
            &Point3::z(),
            std::f64::consts::FRAC_PI_2,
        );
        assert_relative_eq!(p, Point3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn sphere_fit_recovers_center_and_radius() {
        let c = Point3::new(1.0, -2.0, 0.5);
        let pts: Vec<Point3> = [
            Point3::x(),
            -Point3::x(),
            Point3::y(),
            -Point3::y(),
            Point3::z(),
            Point3::new(0.6, 0.0, -0.8),
        ]
        .iter()
        .map(|p| c + p * 3.0)
        .collect();
        let (center, r, dev) = fit_sphere(&pts).unwrap();
        assert_relative_eq!(center, c, epsilon = 1e-12);
        assert_relative_eq!(r, 3.0, epsilon = 1e-12);
        assert!(dev < 1e-12);
        let flat = [Point3::zeros(), Point3::x(), Point3::y(), Point3::new(1.0, 1.0, 0.0), Point3::new(2.0, 0.5, 0.0)];
        assert!(fit_sphere(&flat).is_none() || fit_sphere(&flat).unwrap().2 > 1e-3);
    }
}
