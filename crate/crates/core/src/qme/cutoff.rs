//! Fock cutoff selection.

use super::liouvillian::Liouvillian;
use super::steady::{steady_state, SteadyStateResult};
use super::QmeError;
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    pub start: usize,
    /// Multiplicative growth between attempts (at least one extra photon).
    pub growth: f64,
    /// Bound on the population of the top two Fock layers.
    pub threshold: f64,
    /// Largest cutoff that may be tried.
    pub cap: usize,
    /// Relative change of `n_s` against the next cutoff.
    pub rel_tol: f64,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy {
            start: 10,
            growth: 2.0,
            threshold: 1e-8,
            cap: 60,
            rel_tol: 1e-8,
        }
    }
}

impl CutoffPolicy {
    /// Cheaper schedule for dense sweeps of weakly driven points.
    pub fn sweep() -> Self {
        CutoffPolicy {
            start: 6,
            growth: 1.5,
            ..Default::default()
        }
    }

    pub fn next(&self, n_max: usize) -> usize {
        ((n_max as f64 * self.growth).ceil() as usize).max(n_max + 1)
    }

    pub fn validate(&self) -> Result<(), QmeError> {
        let ok = self.start >= 2
            && self.start <= self.cap
            && self.growth > 1.0
            && self.growth.is_finite()
            && self.threshold > 0.0
            && self.rel_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(QmeError::InvalidPolicy(*self))
        }
    }
}

/// Steady state at a fixed Fock cutoff.
pub fn solve_at_cutoff(params: &SystemParams, n_max: usize) -> Result<SteadyStateResult, QmeError> {
    steady_state(&Liouvillian::new(params, n_max)?)
}

/// Smallest cutoff in the policy's schedule whose top two Fock layers hold
/// less than `threshold` and whose `n_s` agrees with the next cutoff to
/// `rel_tol`.
pub fn solve_with_adaptive_cutoff(params: &SystemParams, policy: &CutoffPolicy) -> Result<SteadyStateResult, QmeError> {
    params.validate()?;
    policy.validate()?;
    if params.eta == 0.0 {
        return solve_at_cutoff(params, 1);
    }
    let mut n_max = policy.start;
    let mut current = solve_at_cutoff(params, n_max)?;
    loop {
        let next_n = policy.next(n_max);
        if next_n > policy.cap {
            return Err(QmeError::Truncation {
                n_max,
                top_population: current.top_fock_population,
                n_s: current.n_s,
            });
        }
        let next = solve_at_cutoff(params, next_n)?;
        let change = (next.n_s - current.n_s).abs();
        if current.top_fock_population < policy.threshold && change <= policy.rel_tol * current.n_s.abs() {
            return Ok(current);
        }
        n_max = next_n;
        current = next;
    }
}
