//! States, truncation control and the phase distribution P(φ).

mod distribution;
mod finite_s;
mod state;

pub use distribution::{
    build_distribution, mean_relative_phase, DistributionKind, MomentMethod, PhaseDistribution,
    SeriesValue, NEGATIVE_FLOOR, QUADRATURE_TOL,
};
pub use finite_s::{finite_s_operator_check, FiniteSReport, MAX_FINITE_S};
pub use state::{
    reduce_angle, CoherentSpec, NumberBasisState, PhaseProfile, PhotonNumbers, Truncated,
    TruncationPolicy, INPUT_NORM_TOL,
};
