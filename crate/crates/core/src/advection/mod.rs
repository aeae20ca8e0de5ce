//! Trajectories `theta(t)` of the transport equation: a pseudo-spectral solver,
//! a library of incompressible flows, and the self-similar construction.

pub mod flows;
pub mod rescale;
pub mod solver;

pub use flows::{velocity_library, FlowKind, FlowParams, FlowSpec, VelocityGenerator};
pub use rescale::{
    max_active_mode, rescale_field, self_similar_trajectory, BaseEvolution, FrozenBase, SampledBase,
    SelfSimilarSchedule,
};
pub use solver::{run, run_with_stats, step, step_with, RunStats, Snapshot, Trajectory, CFL_LIMIT};
