//! Procedural test surfaces.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{convex_hull_faces, TriMesh};
use crate::error::{Error, Result};
use crate::geom::Point3;

/// Radius at which the face vertices of a stellated polyhedron are placed.
pub const STELLATION_RADIUS: f64 = 1.05;

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Tetrahedron,
    Octahedron,
    Icosahedron,
    /// Icosahedron refined `level` times, new vertices projected to the unit sphere.
    SubdividedSphere { level: usize },
    /// Two apices over a regular `ring`-gon, all on the unit sphere.
    Bipyramid { ring: usize },
    /// Stellated triangle bipyramid: 5 "black" vertices (indices 0..5) and one
    /// "white" vertex per bipyramid face (indices 5..11).
    Steinitz11,
    /// Base polyhedron (black vertices first) with one extra vertex per face
    /// joined to that face's corners.
    Stellated { base: Box<Generator> },
    /// Convex hull of `n` uniform points on the unit sphere.
    RandomInscribed { n: usize, seed: u64 },
    /// Genus-one surface, major radius 1, minor radius 0.4.
    Torus { rings: usize, sides: usize },
}

pub fn generate(kind: &Generator) -> Result<TriMesh> {
    match kind {
        Generator::Tetrahedron => {
            let s = 1.0 / 3f64.sqrt();
            let v = vec![
                Point3::new(s, s, s),
                Point3::new(s, -s, -s),
                Point3::new(-s, s, -s),
                Point3::new(-s, -s, s),
            ];
            outward(v, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
        }
        Generator::Octahedron => {
            let v = vec![
                Point3::x(),
                -Point3::x(),
                Point3::y(),
                -Point3::y(),
                Point3::z(),
                -Point3::z(),
            ];
            let f = vec![
                [0, 2, 4],
                [2, 1, 4],
                [1, 3, 4],
                [3, 0, 4],
                [2, 0, 5],
                [1, 2, 5],
                [3, 1, 5],
                [0, 3, 5],
            ];
            outward(v, f)
        }
        Generator::Icosahedron => {
            let t = (1.0 + 5f64.sqrt()) / 2.0;
            let v: Vec<Point3> = [
                (-1.0, t, 0.0),
                (1.0, t, 0.0),
                (-1.0, -t, 0.0),
                (1.0, -t, 0.0),
                (0.0, -1.0, t),
                (0.0, 1.0, t),
                (0.0, -1.0, -t),
                (0.0, 1.0, -t),
                (t, 0.0, -1.0),
                (t, 0.0, 1.0),
                (-t, 0.0, -1.0),
                (-t, 0.0, 1.0),
            ]
            .iter()
            .map(|&(x, y, z)| Point3::new(x, y, z).normalize())
            .collect();
            let f = vec![
                [0, 11, 5],
                [0, 5, 1],
                [0, 1, 7],
                [0, 7, 10],
                [0, 10, 11],
                [1, 5, 9],
                [5, 11, 4],
                [11, 10, 2],
                [10, 7, 6],
                [7, 1, 8],
                [3, 9, 4],
                [3, 4, 2],
                [3, 2, 6],
                [3, 6, 8],
                [3, 8, 9],
                [4, 9, 5],
                [2, 4, 11],
                [6, 2, 10],
                [8, 6, 7],
                [9, 8, 1],
            ];
            outward(v, f)
        }
        Generator::SubdividedSphere { level } => {
            let mut m = generate(&Generator::Icosahedron)?;
            for _ in 0..*level {
                let r = m.refine();
                let v = r.vertices().iter().map(|p| p.normalize()).collect();
                m = r.with_vertices(v)?;
            }
            Ok(m)
        }
        Generator::Bipyramid { ring } => {
            if *ring < 3 {
                return Err(Error::InvalidParameter(format!("bipyramid ring {ring} < 3")));
            }
            let n = *ring;
            let mut v = vec![Point3::z(), -Point3::z()];
            v.extend((0..n).map(|i| {
                let a = TAU * i as f64 / n as f64;
                Point3::new(a.cos(), a.sin(), 0.0)
            }));
            let mut f = Vec::with_capacity(2 * n);
            for i in 0..n {
                let (a, b) = (2 + i, 2 + (i + 1) % n);
                f.push([0, a, b]);
                f.push([1, b, a]);
            }
            outward(v, f)
        }
        Generator::Steinitz11 => generate(&Generator::Stellated {
            base: Box::new(Generator::Bipyramid { ring: 3 }),
        }),
        Generator::Stellated { base } => {
            let base = generate(base)?;
            Ok(stellate(&base))
        }
        Generator::RandomInscribed { n, seed } => {
            if *n < 4 {
                return Err(Error::InvalidParameter(format!("random_inscribed needs n >= 4, got {n}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let points: Vec<Point3> = (0..*n)
                .map(|_| loop {
                    let p = Point3::new(
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    );
                    let r = p.norm();
                    if r > 1e-6 {
                        break p / r;
                    }
                })
                .collect();
            let faces = convex_hull_faces(&points)?;
            TriMesh::new(points, faces)
        }
        Generator::Torus { rings, sides } => {
            if *rings < 3 || *sides < 3 {
                return Err(Error::InvalidParameter(format!(
                    "torus needs rings, sides >= 3, got {rings}x{sides}"
                )));
            }
            let (big, small) = (1.0, 0.4);
            let idx = |i: usize, j: usize| (i % rings) * sides + (j % sides);
            let mut v = Vec::with_capacity(rings * sides);
            for i in 0..*rings {
                let th = TAU * i as f64 / *rings as f64;
                for j in 0..*sides {
                    let ph = TAU * j as f64 / *sides as f64;
                    let r = big + small * ph.cos();
                    v.push(Point3::new(r * th.cos(), r * th.sin(), small * ph.sin()));
                }
            }
            let mut f = Vec::with_capacity(2 * rings * sides);
            for i in 0..*rings {
                for j in 0..*sides {
                    let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                    f.push([a, b, c]);
                    f.push([a, c, d]);
                }
            }
            TriMesh::new(v, f)
        }
    }
}

/// Adds one vertex per face, at the face barycenter pushed out to
/// [`STELLATION_RADIUS`], and cones it over the face.
fn stellate(base: &TriMesh) -> TriMesh {
    let mut v = base.vertices().to_vec();
    let mut f = Vec::with_capacity(3 * base.num_faces());
    for (fi, &[a, b, c]) in base.faces().iter().enumerate() {
        let bary = (v[a] + v[b] + v[c]) / 3.0;
        let w = base.num_vertices() + fi;
        v.push(bary.normalize() * STELLATION_RADIUS);
        f.push([a, b, w]);
        f.push([b, c, w]);
        f.push([c, a, w]);
    }
    TriMesh::new(v, f).expect("stellation of a valid mesh is valid")
}

/// Orients faces of a mesh star-shaped about the origin so normals point away from it.
fn outward(v: Vec<Point3>, mut f: Vec<[usize; 3]>) -> Result<TriMesh> {
    for t in &mut f {
        let n = (v[t[1]] - v[t[0]]).cross(&(v[t[2]] - v[t[0]]));
        if n.dot(&(v[t[0]] + v[t[1]] + v[t[2]])) < 0.0 {
            t.swap(1, 2);
        }
    }
    TriMesh::new(v, f)
}

/// Scales each vertex radially by `1 + amplitude * U(-1, 1)`.
pub fn perturb_radial(mesh: &TriMesh, amplitude: f64, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = mesh
        .vertices()
        .iter()
        .map(|p| p * (1.0 + amplitude * rng.random_range(-1.0..1.0)))
        .collect();
    mesh.with_vertices(v).expect("same vertex count")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faces_point_outward(m: &TriMesh) -> bool {
        (0..m.num_faces()).all(|f| {
            let [a, b, c] = m.faces()[f];
            m.face_normal(f).dot(&(m.vertex(a) + m.vertex(b) + m.vertex(c))) > 0.0
        })
    }

    #[test]
    fn platonic_solids() {
        for (g, counts) in [
            (Generator::Tetrahedron, (4, 6, 4)),
            (Generator::Octahedron, (6, 12, 8)),
            (Generator::Icosahedron, (12, 30, 20)),
            (Generator::Bipyramid { ring: 5 }, (7, 15, 10)),
            (Generator::SubdividedSphere { level: 2 }, (162, 480, 320)),
        ] {
            let m = generate(&g).unwrap();
            assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), counts, "{g:?}");
            assert!(m.is_closed() && m.is_oriented(), "{g:?}");
            assert!(faces_point_outward(&m), "{g:?}");
            for p in m.vertices() {
                assert!((p.norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn steinitz11_coloring() {
        let m = generate(&Generator::Steinitz11).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (11, 27, 18));
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_closed() && m.is_oriented());
        let black = |v: usize| v < 5;
        let bb = m.edges().iter().filter(|e| black(e.key.lo()) && black(e.key.hi())).count();
        let ww = m.edges().iter().filter(|e| !black(e.key.lo()) && !black(e.key.hi())).count();
        assert_eq!(bb, 9);
        assert_eq!(ww, 0);
        for (i, p) in m.vertices().iter().enumerate() {
            let r = if black(i) { 1.0 } else { STELLATION_RADIUS };
            assert!((p.norm() - r).abs() < 1e-14);
        }
    }

    #[test]
    fn random_inscribed_on_sphere() {
        let m = generate(&Generator::RandomInscribed { n: 100, seed: 7 }).unwrap();
        assert_eq!(m.num_vertices(), 100);
        assert!(m.is_closed() && m.is_oriented());
        assert_eq!(m.euler_characteristic(), 2);
        for p in m.vertices() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        let again = generate(&Generator::RandomInscribed { n: 100, seed: 7 }).unwrap();
        assert_eq!(again.vertices(), m.vertices());
    }

    #[test]
    fn torus_has_genus_one() {
        let m = generate(&Generator::Torus { rings: 12, sides: 6 }).unwrap();
        assert!(m.is_closed() && m.is_oriented());
        assert_eq!(m.genus(), Some(1));
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate(&Generator::RandomInscribed { n: 3, seed: 0 }).is_err());
        assert!(generate(&Generator::Bipyramid { ring: 2 }).is_err());
        assert!(generate(&Generator::Torus { rings: 2, sides: 5 }).is_err());
    }
}
