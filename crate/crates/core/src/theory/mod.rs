//! Closed-form bound calculators and Monte Carlo validators.
//!
//! The absolute constants `C1` and `C2` default to `1e4`; every report
//! echoes the values it used. Probability-style bounds are returned raw,
//! including values above 1.

mod bounds;
mod inputs;
mod montecarlo;
mod net;

pub use bounds::{
    all_bounds, covering_log_size, depth_lower_bounds, finite_class_failure_prob, generalization_gap_bound,
    improved_failure_prob, improved_required_dim, informal_lower_bound, lip_lower_bound, DepthBounds,
};
pub use inputs::{BoundInputs, BoundReport, DEFAULT_C1, DEFAULT_C2};
pub use montecarlo::{
    clipped_linear_family, rademacher_envelope, rademacher_estimate, subgaussian_avg_check, ClippedLinear, Generator,
    RademacherReport, SubgaussianReport, RADEMACHER_ENVELOPE_CONSTANT,
};
pub use net::{net_construct_and_verify, NetReport, MAX_NET_DIM};
