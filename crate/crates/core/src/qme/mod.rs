//! Full quantum treatment through the Lindblad master equation.

mod banded;
mod correlation;
mod cutoff;
mod liouvillian;
mod sparse;
mod steady;

pub use banded::{BandedLu, BandedMatrix};
pub use correlation::{g2_tau, uniform_tau_grid, G2Series, G2_TAU_TOL};
pub use cutoff::{solve_at_cutoff, solve_with_adaptive_cutoff, CutoffPolicy};
pub use liouvillian::{build_liouvillian, lindblad_rhs, Liouvillian};
pub use sparse::CsrMatrix;
pub use steady::{
    g2_zero, g2_zero_with_floor, observables, steady_state, Diagnostics, Observables, SteadyStateResult,
    DEGENERATE_PIVOT_RATIO, ILL_CONDITIONED_PIVOT_RATIO, NEGATIVITY_TOL, N_FLOOR,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("steady state is not unique (pinned system singular, pivot ratio {pivot_ratio:e})")]
    DegenerateKernel { pivot_ratio: f64 },
    #[error("steady state has eigenvalue {min_eigenvalue:e} below the positivity tolerance")]
    NotPositive { min_eigenvalue: f64 },
    #[error("correlation undefined: mean photon number {n_s:e} is below the floor")]
    UndefinedCorrelation { n_s: f64 },
    #[error("Fock cutoff cap reached at n_max = {n_max} (top-layer population {top_population:e}, n_s = {n_s:e})")]
    Truncation { n_max: usize, top_population: f64, n_s: f64 },
    #[error("time integration failed at tau = {tau}")]
    Integration { tau: f64 },
    #[error("delay grid must start at 0 and increase strictly")]
    InvalidTauGrid,
    #[error("invalid cutoff policy {0:?}")]
    InvalidPolicy(CutoffPolicy),
}

#[derive(Debug, Clone, PartialEq)]
pub enum QmeWarning {
    IllConditioned { pivot_ratio: f64 },
}
