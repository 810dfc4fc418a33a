//! Discrete Willmore flow: gradient descent on vertex positions with Armijo
//! backtracking.

use std::collections::BTreeSet;
use std::io::Write;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flips::{optimize_triangulation, FlipRecord};
use super::gradient::{energy_and_gradient, sup_norm};
use crate::energy::energy_value;
use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::mesh::TriMesh;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Armijo {
    /// Step multiplier after a rejected trial, in `(0, 1)`.
    pub shrink: f64,
    /// Sufficient-decrease constant, in `(0, 1)`.
    pub decrease: f64,
}

impl Default for Armijo {
    fn default() -> Self {
        Armijo {
            shrink: 0.5,
            decrease: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// After each step: translate the centroid to the origin and scale the
    /// mean vertex norm to 1. `W` is unchanged by both.
    RecenterRescale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub max_iters: usize,
    /// Stop once the sup-norm of the gradient is at most this.
    pub grad_tol: f64,
    /// Initial step, in units of the squared bounding-box diagonal.
    pub step: f64,
    pub armijo: Armijo,
    pub fixed_vertices: BTreeSet<usize>,
    pub normalization: Normalization,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            max_iters: 2000,
            grad_tol: 1e-9,
            step: 1e-2,
            armijo: Armijo::default(),
            fixed_vertices: BTreeSet::new(),
            normalization: Normalization::RecenterRescale,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self, num_vertices: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol {} must be positive", self.grad_tol));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad(format!("step {} must be positive", self.step));
        }
        let Armijo { shrink, decrease } = self.armijo;
        if !(shrink > 0.0 && shrink < 1.0) || !(decrease > 0.0 && decrease < 1.0) {
            return bad(format!("armijo parameters ({shrink}, {decrease}) must lie in (0, 1)"));
        }
        if let Some(&v) = self.fixed_vertices.iter().find(|&&v| v >= num_vertices) {
            return bad(format!("fixed vertex {v} out of range"));
        }
        if !self.fixed_vertices.is_empty() && self.normalization != Normalization::None {
            return bad("normalization would move fixed vertices".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTol,
    MaxIters,
    StepUnderflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Accepted step (0 for the initial record).
    pub step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowTrace {
    pub records: Vec<FlowRecord>,
    pub termination: Termination,
    pub final_energy: f64,
    /// Flips interleaved with the flow by [`alternate_flow`]; empty otherwise.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flips: Vec<FlipRecord>,
    #[serde(skip)]
    pub final_mesh: TriMesh,
}

impl FlowTrace {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// `iter,energy,grad_norm,step` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let ser = |e: csv::Error| Error::Serialize(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "energy", "grad_norm", "step"]).map_err(ser)?;
        for r in &self.records {
            out.write_record([
                r.iter.to_string(),
                format!("{:.17e}", r.energy),
                format!("{:.17e}", r.grad_norm),
                format!("{:.17e}", r.step),
            ])
            .map_err(ser)?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn normalize(points: &mut [Point3]) -> f64 {
    let centroid = points.iter().sum::<Point3>() / points.len() as f64;
    for p in points.iter_mut() {
        *p -= centroid;
    }
    let mean = points.iter().map(|p| p.norm()).sum::<f64>() / points.len() as f64;
    let s = 1.0 / mean;
    for p in points.iter_mut() {
        *p *= s;
    }
    s
}

/// Gradient descent on `W` over vertex positions.
///
/// Each iteration backtracks from the current step until the Armijo condition
/// `W(x - t g) <= W(x) - c t |g|^2` holds; trial positions that degenerate a
/// face are rejected like any other failed trial. After an accepted step the
/// step is doubled for the next iteration. The flow stops when the gradient
/// sup-norm reaches `grad_tol`, after `max_iters` accepted steps, or when the
/// trial displacement falls below `1e-16` of the bounding-box diagonal.
pub fn run_flow(mesh: &TriMesh, cfg: &FlowConfig) -> Result<FlowTrace> {
    if !mesh.is_closed() {
        return Err(Error::OpenMesh);
    }
    cfg.validate(mesh.num_vertices())?;

    let mut current = mesh.clone();
    let mut t = cfg.step * mesh.bbox_diagonal().powi(2);
    if cfg.normalization == Normalization::RecenterRescale {
        let mut v = current.vertices().to_vec();
        let s = normalize(&mut v);
        current = current.with_vertices(v)?;
        t *= s * s;
    }
    let masked = |mut g: Vec<Point3>| {
        for &v in &cfg.fixed_vertices {
            g[v] = Point3::zeros();
        }
        g
    };
    let (mut energy, g) = energy_and_gradient(&current)?;
    let mut grad = masked(g);
    let mut records = vec![FlowRecord {
        iter: 0,
        energy,
        grad_norm: sup_norm(&grad),
        step: 0.0,
    }];

    let termination = 'outer: loop {
        let iter = records.len();
        let gnorm = sup_norm(&grad);
        if gnorm <= cfg.grad_tol {
            break Termination::GradientTol;
        }
        if iter > cfg.max_iters {
            break Termination::MaxIters;
        }
        let g2: f64 = grad.iter().map(|x| x.norm_squared()).sum();
        let diag = current.bbox_diagonal();
        let (next, next_energy) = loop {
            if t * gnorm < 1e-16 * diag {
                break 'outer Termination::StepUnderflow;
            }
            let trial_pts: Vec<Point3> = current
                .vertices()
                .iter()
                .zip(&grad)
                .map(|(x, g)| x - g * t)
                .collect();
            let trial = current.with_vertices(trial_pts)?;
            match energy_value(&trial) {
                Ok(w) if w <= energy - cfg.armijo.decrease * t * g2 => break (trial, w),
                _ => t *= cfg.armijo.shrink,
            }
        };
        let accepted = t;
        current = next;
        if cfg.normalization == Normalization::RecenterRescale {
            let mut v = current.vertices().to_vec();
            let s = normalize(&mut v);
            current = current.with_vertices(v)?;
            t *= s * s;
        }
        let (w, g) = energy_and_gradient(&current)?;
        debug!("flow iter {iter}: W = {w:.12e} (trial {next_energy:.12e}), step {accepted:.3e}");
        energy = w;
        grad = masked(g);
        records.push(FlowRecord {
            iter,
            energy,
            grad_norm: sup_norm(&grad),
            step: accepted,
        });
        t *= 2.0;
    };

    Ok(FlowTrace {
        records,
        termination,
        final_energy: energy,
        flips: Vec::new(),
        final_mesh: current,
    })
}

/// Runs the flow in rounds of `every` iterations, optimizing the
/// triangulation by greedy flips after each round, until the iteration
/// budget is spent or a round ends without flips and without hitting its
/// iteration cap.
pub fn alternate_flow(mesh: &TriMesh, cfg: &FlowConfig, every: usize) -> Result<FlowTrace> {
    if every == 0 {
        return Err(Error::InvalidParameter("alternation period must be positive".into()));
    }
    let mut current = mesh.clone();
    let mut records: Vec<FlowRecord> = Vec::new();
    let mut flips: Vec<FlipRecord> = Vec::new();
    let mut used = 0;
    loop {
        let round_cfg = FlowConfig {
            max_iters: every.min(cfg.max_iters - used),
            ..cfg.clone()
        };
        let trace = run_flow(&current, &round_cfg)?;
        let offset = records.last().map_or(0, |r| r.iter);
        let skip = usize::from(!records.is_empty());
        records.extend(trace.records.iter().skip(skip).map(|r| FlowRecord {
            iter: r.iter + offset,
            ..*r
        }));
        used += trace.records.len() - 1;
        let (flipped, ftrace) = optimize_triangulation(&trace.final_mesh)?;
        let any_flip = !ftrace.records.is_empty();
        flips.extend(ftrace.records);
        current = flipped;
        let done_budget = used >= cfg.max_iters;
        if done_budget || (!any_flip && trace.termination != Termination::MaxIters) {
            let final_energy = energy_value(&current)?;
            let termination = if done_budget && trace.termination == Termination::MaxIters {
                Termination::MaxIters
            } else {
                trace.termination
            };
            return Ok(FlowTrace {
                records,
                termination,
                final_energy,
                flips,
                final_mesh: current,
            });
        }
    }
}

/// Adds independent uniform noise of magnitude `amplitude * diag` to every
/// coordinate.
pub fn jitter(mesh: &TriMesh, amplitude: f64, seed: u64) -> Result<TriMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = amplitude * mesh.bbox_diagonal();
    let v = mesh
        .vertices()
        .iter()
        .map(|p| {
            p + Point3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ) * scale
        })
        .collect();
    mesh.with_vertices(v)
}

/// Runs the flow from `seeds.len()` jittered copies of `mesh` (seed 0 is
/// not special: every start is jittered). Traces are returned in seed order.
pub fn multistart(mesh: &TriMesh, cfg: &FlowConfig, seeds: &[u64], amplitude: f64) -> Result<Vec<FlowTrace>> {
    seeds
        .par_iter()
        .map(|&s| run_flow(&jitter(mesh, amplitude, s)?, cfg))
        .collect()
}
