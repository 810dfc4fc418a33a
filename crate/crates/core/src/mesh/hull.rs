//! Incremental 3D convex hull, O(n^2) worst case.
//!
//! Points are inserted in index order after an initial tetrahedron; a point is
//! outside a face when it lies more than `1e-12 * diameter` above its plane.
//! Points on or inside the current hull are skipped.

use std::collections::HashSet;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{bbox_diagonal, Point3};

const HULL_REL_EPS: f64 = 1e-12;

struct HullFace {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
}

impl HullFace {
    fn new(points: &[Point3], v: [usize; 3]) -> Self {
        let n = (points[v[1]] - points[v[0]]).cross(&(points[v[2]] - points[v[0]]));
        let normal = n / n.norm();
        HullFace {
            v,
            normal,
            offset: normal.dot(&points[v[0]]),
        }
    }

    fn height(&self, p: &Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Outward-oriented hull faces, indexing into `points`.
pub fn convex_hull_faces(points: &[Point3]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 4 {
        return Err(Error::DegenerateHull("fewer than 4 points"));
    }
    if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
        return Err(Error::DegenerateHull("non-finite coordinate"));
    }
    let eps = HULL_REL_EPS * bbox_diagonal(points);
    let seed = initial_simplex(points, eps)?;

    let centroid = seed.iter().map(|&i| points[i]).sum::<Point3>() / 4.0;
    let [a, b, c, d] = seed;
    let mut faces: Vec<HullFace> = [[a, b, c], [a, d, b], [a, c, d], [b, d, c]]
        .into_iter()
        .map(|mut v| {
            let f = HullFace::new(points, v);
            if f.height(&centroid) > 0.0 {
                v.swap(1, 2);
                HullFace::new(points, v)
            } else {
                f
            }
        })
        .collect();

    for (i, p) in points.iter().enumerate() {
        if seed.contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.height(p) > eps).collect();
        if !visible.iter().any(|&x| x) {
            continue;
        }
        let lit: HashSet<(usize, usize)> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &vis)| vis)
            .flat_map(|(f, _)| (0..3).map(move |k| (f.v[k], f.v[(k + 1) % 3])))
            .collect();
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for (f, &vis) in faces.iter().zip(&visible) {
            if !vis {
                continue;
            }
            for k in 0..3 {
                let (s, t) = (f.v[k], f.v[(k + 1) % 3]);
                if !lit.contains(&(t, s)) {
                    horizon.push((s, t));
                }
            }
        }
        let mut kept: Vec<HullFace> = faces
            .into_iter()
            .zip(visible)
            .filter(|(_, vis)| !vis)
            .map(|(f, _)| f)
            .collect();
        kept.extend(horizon.into_iter().map(|(s, t)| HullFace::new(points, [s, t, i])));
        faces = kept;
    }
    Ok(faces.into_iter().map(|f| f.v).collect())
}

/// Convex hull as a closed mesh over the hull vertices only, kept in their
/// original relative order.
pub fn convex_hull(points: &[Point3]) -> Result<TriMesh> {
    let faces = convex_hull_faces(points)?;
    let mut remap = vec![usize::MAX; points.len()];
    for f in &faces {
        for &i in f {
            remap[i] = 0;
        }
    }
    let mut used = Vec::new();
    for (i, r) in remap.iter_mut().enumerate() {
        if *r == 0 {
            *r = used.len();
            used.push(points[i]);
        }
    }
    let faces = faces
        .into_iter()
        .map(|f| [remap[f[0]], remap[f[1]], remap[f[2]]])
        .collect();
    TriMesh::new(used, faces)
}

fn initial_simplex(points: &[Point3], eps: f64) -> Result<[usize; 4]> {
    let argmax = |score: &dyn Fn(&Point3) -> f64| -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let s = score(p);
            if s > best_score {
                best = i;
                best_score = s;
            }
        }
        best
    };
    let i0 = argmax(&|p| -p.x);
    let p0 = points[i0];
    let i1 = argmax(&|p| (p - p0).norm_squared());
    let dir = (points[i1] - p0).normalize();
    if (points[i1] - p0).norm() <= eps {
        return Err(Error::DegenerateHull("all points coincide"));
    }
    let off_line = |p: &Point3| (p - p0 - dir * dir.dot(&(p - p0))).norm();
    let i2 = argmax(&|p| off_line(p));
    if off_line(&points[i2]) <= eps {
        return Err(Error::DegenerateHull("points are collinear"));
    }
    let n = (points[i1] - p0).cross(&(points[i2] - p0)).normalize();
    let i3 = argmax(&|p| n.dot(&(p - p0)).abs());
    if n.dot(&(points[i3] - p0)).abs() <= eps {
        return Err(Error::DegenerateHull("points are coplanar"));
    }
    Ok([i0, i1, i2, i3])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_convex(m: &TriMesh, tol: f64) -> bool {
        (0..m.num_faces()).all(|f| {
            let n = m.face_normal(f).normalize();
            let o = n.dot(m.vertex(m.faces()[f][0]));
            m.vertices().iter().all(|p| n.dot(p) - o <= tol)
        })
    }

    #[test]
    fn four_points_give_a_tetrahedron() {
        let p = vec![Point3::zeros(), Point3::x(), Point3::y(), Point3::z()];
        let m = convex_hull(&p).unwrap();
        assert_eq!((m.num_vertices(), m.num_faces()), (4, 4));
        assert!(m.is_closed() && m.is_oriented());
        assert!(is_convex(&m, 1e-12));
    }

    #[test]
    fn octahedron_points() {
        let p = vec![
            Point3::x(),
            -Point3::x(),
            Point3::y(),
            -Point3::y(),
            Point3::z(),
            -Point3::z(),
        ];
        let m = convex_hull(&p).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (6, 12, 8));
        assert!(is_convex(&m, 1e-12));
    }

    #[test]
    fn interior_point_is_dropped() {
        let p = vec![
            Point3::zeros(),
            Point3::x(),
            Point3::new(0.1, 0.1, 0.1),
            Point3::y(),
            Point3::z(),
        ];
        let m = convex_hull(&p).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert!(!m.vertices().contains(&Point3::new(0.1, 0.1, 0.1)));
        let faces = convex_hull_faces(&p).unwrap();
        assert!(faces.iter().all(|f| !f.contains(&2)));
    }

    #[test]
    fn degenerate_inputs() {
        let flat = vec![Point3::zeros(), Point3::x(), Point3::y(), Point3::new(1.0, 1.0, 0.0)];
        assert!(matches!(convex_hull(&flat), Err(Error::DegenerateHull(_))));
        let line: Vec<Point3> = (0..5).map(|i| Point3::x() * i as f64).collect();
        assert!(matches!(convex_hull(&line), Err(Error::DegenerateHull(_))));
        assert!(convex_hull(&flat[..3]).is_err());
    }

    #[test]
    fn cube_with_interior_cloud() {
        let mut p = Vec::new();
        for i in 0..8 {
            p.push(Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        for i in 0..20 {
            let t = i as f64 / 20.0;
            p.push(Point3::new(0.2 + 0.6 * t, 0.5, 0.3 + 0.4 * t * t));
        }
        let m = convex_hull(&p).unwrap();
        assert_eq!(m.num_vertices(), 8);
        assert_eq!(m.num_faces(), 12);
        assert!(m.is_closed() && m.is_oriented());
        assert!(is_convex(&m, 1e-12));
    }
}
