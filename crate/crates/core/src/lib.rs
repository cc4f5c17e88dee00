//! Downlink throughput model for FFR-aided OFDMA cellular networks.
//!
//! The crate covers the whole analytical chain, from the 19-cell hexagonal
//! layout and the per-subcarrier link budget through scheduler-conditioned
//! SINR distributions to average cell throughput. On top of it sit the FFR
//! design solvers and a discrete-time Monte Carlo simulator that serves as
//! the validation oracle.
//!
//! Everything here is `no_std` (with `alloc`) and free of IO. Configuration
//! files, reports and the command-line front end live in the `ffr` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod channel;
mod error;
pub mod geometry;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod rate;
pub mod rng;

pub use analysis::{
    cell_throughput, cond_cdf, p_centre, per_ue_tau, rb_throughput, AnalysisOptions, FfrPartition,
    LoadModel, PerUeTau, RegionCdf, SchedulerKind, ThroughputReport,
};
pub use channel::{AvgPowerProfile, RadioParams};
pub use error::{Error, Result};
pub use geometry::{NetworkGeometry, Region, RegionBounds};
pub use optimizer::{
    solve_apd, solve_fxd, solve_qoscd, zeta_set, DesignKind, DesignProblem, DesignSolution,
};
pub use rate::{CraParams, McsMode, McsTable, RateModel};
