//! Greedy edge-flip minimization of `W` at fixed vertex positions.

use std::io::Write;

use serde::Serialize;

use crate::energy::{beta_points, energy_value};
use crate::error::{Error, Result};
use crate::mesh::{EdgeId, EdgeKey, Stencil, TriMesh};

/// A flip is taken only if it lowers `W` by more than this.
pub const FLIP_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlipRecord {
    pub step: usize,
    pub removed: EdgeKey,
    pub added: EdgeKey,
    pub delta: f64,
    /// `W` after the flip.
    pub energy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlipTrace {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub records: Vec<FlipRecord>,
}

impl FlipTrace {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "removed_u", "removed_v", "added_u", "added_v", "delta", "energy"])
            .map_err(ser)?;
        for r in &self.records {
            out.write_record([
                r.step.to_string(),
                r.removed.lo().to_string(),
                r.removed.hi().to_string(),
                r.added.lo().to_string(),
                r.added.hi().to_string(),
                format!("{:.17e}", r.delta),
                format!("{:.17e}", r.energy),
            ])
            .map_err(ser)?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Change of `W` caused by flipping `edge`, or `None` when the flip is
/// blocked or would create a degenerate triangle. Only the flipped edge and
/// the four sides of its quadrilateral change their `beta`.
pub fn flip_delta(mesh: &TriMesh, edge: EdgeId) -> Option<f64> {
    mesh.check_flip(edge).ok()?;
    let Stencil { u, w, p, q } = mesh.stencil(edge).ok()?;
    let e = mesh.edge(edge);
    let inner = [e.first.face, e.second?.face];
    let x = |i: usize| mesh.vertex(i);

    let mut before = beta_points(x(u), x(w), x(p), x(q)).ok()?;
    let mut after = beta_points(x(p), x(q), x(u), x(w)).ok()?;
    // side, apex inside the quad before the flip, apex after the flip
    for (a, b, old, new) in [(u, q, w, p), (q, w, u, p), (w, p, u, q), (p, u, w, q)] {
        let side = mesh.edge(mesh.edge_id(a, b)?);
        let outer = [Some(side.first), side.second]
            .into_iter()
            .flatten()
            .find(|wing| !inner.contains(&wing.face))?
            .opposite;
        before += beta_points(x(a), x(b), x(old), x(outer)).ok()?;
        after += beta_points(x(a), x(b), x(new), x(outer)).ok()?;
    }
    Some(after - before)
}

/// Repeatedly flips the edge with the largest decrease of `W` (ties broken
/// by the smaller edge key) until no flip lowers `W` by more than
/// [`FLIP_EPS`]. Vertex positions are untouched.
pub fn optimize_triangulation(mesh: &TriMesh) -> Result<(TriMesh, FlipTrace)> {
    if !mesh.is_closed() {
        return Err(Error::OpenMesh);
    }
    let initial_energy = energy_value(mesh)?;
    let mut current = mesh.clone();
    let mut energy = initial_energy;
    let mut records = Vec::new();
    loop {
        let mut best: Option<(f64, EdgeId)> = None;
        for id in 0..current.num_edges() {
            if let Some(d) = flip_delta(&current, id) {
                if d < -FLIP_EPS && best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, id));
                }
            }
        }
        let Some((delta, id)) = best else { break };
        let s = current.stencil(id)?;
        let removed = current.edge(id).key;
        current = current.flip_edge(id)?;
        energy += delta;
        records.push(FlipRecord {
            step: records.len() + 1,
            removed,
            added: EdgeKey::new(s.p, s.q),
            delta,
            energy,
        });
    }
    let final_energy = energy_value(&current)?;
    Ok((
        current,
        FlipTrace {
            initial_energy,
            final_energy,
            records,
        },
    ))
}
