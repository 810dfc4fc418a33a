//! Minimizing the conformal energy: over vertex positions (gradient flow)
//! and over triangulations of fixed vertices (greedy edge flips).

mod descent;
mod flips;
mod gradient;

pub use descent::{
    alternate_flow, jitter, multistart, run_flow, Armijo, FlowConfig, FlowRecord, FlowTrace, Normalization,
    Termination,
};
pub use flips::{flip_delta, optimize_triangulation, FlipRecord, FlipTrace, FLIP_EPS};
pub use gradient::{
    beta_with_gradient, energy_and_gradient, grad_analytic, grad_fd, relative_deviation, sup_norm, SIN_GUARD,
};
