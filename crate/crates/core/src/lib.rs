//! Phase statistics of coherent and number-basis states in the Pegg-Barnett
//! and Susskind-Glogower pictures.
//!
//! The phase distribution P(φ) of a state is the foundation
//! ([`phase`]); single-beam fluctuation measures ([`fluctuations`]),
//! two-beam relative-phase measures ([`relative`]) and the post-selected
//! eight-port expectations ([`nfm`]) are built on top of it. [`experiment`]
//! handles overlay data and figure tables, [`check`] bundles the invariant
//! suite run by `pbphase check`.

pub mod check;
pub mod error;
pub mod experiment;
pub mod fluctuations;
pub mod nfm;
pub mod phase;
pub mod quadrature;
pub mod relative;
pub mod special;

pub use error::{Error, Result};
pub use experiment::{emit_figure, ExperimentTable, FigureId, FigureParams, FigureTable};
pub use phase::{
    build_distribution, CoherentSpec, MomentMethod, NumberBasisState, PhaseDistribution,
    SeriesValue, TruncationPolicy,
};
pub use relative::TwoBeamSpec;
