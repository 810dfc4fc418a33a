//! Moebius transformations of R^3 as compositions of similarities and sphere
//! inversions.

use nalgebra::{Quaternion, UnitQuaternion};
use rand::Rng;
use rand_distr::StandardNormal;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::geom::{bbox_diagonal, Point3};

/// Minimum distance between a vertex and an inversion center.
pub const INVERSION_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum MoebiusAtom {
    /// `x -> scale * rotation(x) + translation`
    Similarity {
        rotation: UnitQuaternion<f64>,
        scale: f64,
        translation: Point3,
    },
    /// `x -> center + radius^2 (x - center) / |x - center|^2`
    Inversion { center: Point3, radius: f64 },
}

/// Atoms applied in order, first to last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MoebiusMap {
    pub atoms: Vec<MoebiusAtom>,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn then(mut self, atom: MoebiusAtom) -> Self {
        self.atoms.push(atom);
        self
    }

    fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            match a {
                MoebiusAtom::Inversion { radius, .. } if !(*radius > 0.0) => {
                    return Err(Error::InvalidParameter(format!("inversion radius {radius} must be positive")))
                }
                MoebiusAtom::Similarity { scale, .. } if !(*scale > 0.0) => {
                    return Err(Error::InvalidParameter(format!("similarity scale {scale} must be positive")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Maps every vertex; combinatorics are left untouched.
    pub fn apply(&self, mesh: &TriMesh) -> Result<TriMesh> {
        self.validate()?;
        let mut pts = mesh.vertices().to_vec();
        for atom in &self.atoms {
            match atom {
                MoebiusAtom::Similarity {
                    rotation,
                    scale,
                    translation,
                } => {
                    for p in &mut pts {
                        *p = rotation * *p * *scale + translation;
                    }
                }
                MoebiusAtom::Inversion { center, radius } => {
                    for (i, p) in pts.iter_mut().enumerate() {
                        let d = *p - center;
                        let d2 = d.norm_squared();
                        if d2.sqrt() <= INVERSION_EPS {
                            return Err(Error::InversionTooClose {
                                vertex: i,
                                eps: INVERSION_EPS,
                            });
                        }
                        *p = center + d * (radius * radius / d2);
                    }
                }
            }
        }
        mesh.with_vertices(pts)
    }

    /// A random similarity, inversion, similarity chain whose inversion center
    /// keeps a distance of at least a quarter of the bounding-box diagonal
    /// from every point of `points`.
    pub fn random<R: Rng>(rng: &mut R, points: &[Point3]) -> MoebiusMap {
        let diam = bbox_diagonal(points).max(1e-300);
        let similarity = |rng: &mut R| {
            let q = Quaternion::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            MoebiusAtom::Similarity {
                rotation: UnitQuaternion::from_quaternion(q),
                scale: rng.random_range(0.5..2.0),
                translation: Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ) * diam,
            }
        };
        let first = similarity(rng);
        let moved: Vec<Point3> = match &first {
            MoebiusAtom::Similarity {
                rotation,
                scale,
                translation,
            } => points.iter().map(|p| rotation * *p * *scale + translation).collect(),
            MoebiusAtom::Inversion { .. } => unreachable!(),
        };
        let lo = moved.iter().fold(moved[0], |a, p| a.inf(p));
        let hi = moved.iter().fold(moved[0], |a, p| a.sup(p));
        let span = hi - lo;
        let moved_diam = span.norm();
        let center = loop {
            let c = lo - span * 0.5
                + Point3::new(
                    rng.random_range(0.0..2.0) * span.x,
                    rng.random_range(0.0..2.0) * span.y,
                    rng.random_range(0.0..2.0) * span.z,
                );
            if moved.iter().all(|p| (p - c).norm() >= 0.25 * moved_diam) {
                break c;
            }
        };
        let inversion = MoebiusAtom::Inversion {
            center,
            radius: moved_diam * rng.random_range(0.5..2.0),
        };
        let last = similarity(rng);
        MoebiusMap {
            atoms: vec![first, inversion, last],
        }
    }
}

pub fn apply_moebius(mesh: &TriMesh, map: &MoebiusMap) -> Result<TriMesh> {
    map.apply(mesh)
}
