//! Explicit smooth interpolators: a sum of radial bumps through the data,
//! optionally after a random orthogonal projection to `d_tilde` dimensions.

mod bump;
mod interpolator;

pub use bump::{BumpFunction, BumpKind};
pub use interpolator::{
    build_bump_interpolator, build_projected_interpolator, build_projected_with_dim, min_projected_dim,
    projected_dim_for_budget, random_projection, InterpolatorWire, RadiusPolicy, SmoothInterpolator,
};
