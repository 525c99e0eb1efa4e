//! Secrecy-rate bounds for half-duplex two-way Gaussian channels secured
//! by randomized scheduling and randomized power allocation.
//!
//! The library models an eavesdropper who observes only received power
//! levels and must attribute each symbol to one of the two legitimate
//! nodes. Two schemes are covered:
//!
//! * **TDM with randomized feedback**: one node sends data, the other
//!   randomly jams with feedback symbols; Eve must detect which symbols
//!   were jammed.
//! * **Two-way randomized scheduling**: both nodes transmit in random,
//!   independently chosen intervals; Eve must classify each received
//!   symbol by its source.
//!
//! Layers, bottom up:
//!
//! * [`model`] — geometry, path loss, power laws, superposition.
//! * [`classifier`] — Eve's attribution rules and their outcome profiles.
//! * [`profile`] — deterministic (quadrature) evaluation of those
//!   profiles for a given geometry and power law.
//! * [`rates`] — the secrecy-rate lower bounds from the profiles.
//! * [`montecarlo`] — a symbol-level simulator that estimates the same
//!   profiles empirically, used to validate the analytic path.
//! * [`optimizer`] — the max-min game over scheduling, power laws,
//!   adversary position and classifier, plus the distance-ratio sweep.

// Validation uses `!(x > 0.0)`-style negations on purpose: unlike the
// suggested `x <= 0.0`, they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod profile;
pub mod rates;

pub use classifier::{
    ClassOutcome, EveClassifier, EventRow, MisclassProfile, TdmDetectionProfile, TdmWindow,
    ThresholdClassifier, TrueEvent,
};
pub use error::{Error, Result};
pub use model::{
    distance_ratio_from_power_gap, ChannelConfig, GeometryConfig, PowerDistribution, ReceivedLaw,
    SuperpositionMode,
};
pub use montecarlo::{
    compare_tdm, compare_twoway, simulate_tdm, simulate_twoway, ComparisonReport, EmpiricalTdm,
    EmpiricalTwoWay, Scheme, SchemeConfig, SimConfig,
};
pub use optimizer::{
    optimize_tdm, optimize_twoway, sweep_ratio, ClassifierSpec, MaxMinResult, OptimizeEnv,
    Placement, SearchGrid, SweepPoint,
};
pub use profile::{misclass_profile, tdm_detection_profile, ProfileMethod, QuadOpts};
pub use rates::{
    binary_entropy, phi, tdm_bounds, twoway_bounds, FecMode, RateBreakdownTdm, RateBreakdownTwoWay,
};
