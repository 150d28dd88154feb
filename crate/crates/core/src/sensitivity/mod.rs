//! One-way tornado analysis, threshold scans, probabilistic sensitivity
//! analysis, acceptability curves and horizon sweeps.

mod dist;
mod horizon;
mod psa;
mod threshold;
mod tornado;

use thiserror::Error;

use crate::model::ModelError;

pub use dist::{resolve, DistributionSpec, Family, Sampler, DEFAULT_RELATIVE_SD};
pub use horizon::{crossing, default_years, horizon_sweep, provider_cell, HorizonCrossing, HorizonRow};
pub use psa::{
    ceac, run_psa, sample_world, summarize, worker_pool, wtp_grid, CeacPoint, Interval, Outcome, PsaResult,
    PsaSummaryRow,
};
pub use threshold::{find_switches, threshold_scan, wtp_switches, CostEffect, SwitchPoint, BISECTION_TOLERANCE};
pub use tornado::{relative_ranges, tornado, RangeSpec, Tornado, TornadoBar, TornadoFailure, TornadoMetric};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("distribution for {path}: {message}")]
    Distribution { path: String, message: String },
    #[error("draw {draw} is invalid: {message}")]
    Draw { draw: usize, message: String },
    #[error("PSA needs at least one draw")]
    EmptyPsa,
    #[error("{0}")]
    InvalidGrid(String),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}
