//! Kernel of the Liouvillian and steady-state observables.

use num_complex::Complex64 as C64;

use super::banded::BandedMatrix;
use super::liouvillian::Liouvillian;
use super::{QmeError, QmeWarning};
use crate::model::{CMatrix, HilbertSpace, Level, OperatorSet, SystemParams};

/// Below this mean photon number correlation functions are 0/0.
pub const N_FLOOR: f64 = 1e-12;
/// Pivot ratios under this are treated as a singular pinned system.
pub const DEGENERATE_PIVOT_RATIO: f64 = 1e-13;
/// Pivot ratios under this attach an ill-conditioning warning.
pub const ILL_CONDITIONED_PIVOT_RATIO: f64 = 1e-9;
/// Eigenvalues of ρ_s more negative than this are an error.
pub const NEGATIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `|Tr ρ − 1|`.
    pub trace_error: f64,
    /// Max entry of `ρ − ρ†` before Hermitization.
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// `‖L vec(ρ_s)‖₂`.
    pub residual_norm: f64,
    pub min_pivot_ratio: f64,
    pub warnings: Vec<QmeWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateResult {
    pub rho_s: CMatrix,
    pub n_s: f64,
    /// `None` for a vanishing drive.
    pub t_a: Option<f64>,
    /// `None` when `n_s` is below [`N_FLOOR`].
    pub g2_0: Option<f64>,
    pub var_n: f64,
    pub n_max_used: usize,
    /// Total population of the two highest Fock layers.
    pub top_fock_population: f64,
    pub diagnostics: Diagnostics,
}

/// Unknown ordering that keeps L banded: `ρ[(a,n),(b,m)]` goes to
/// `((n·N + m)·3 + a)·3 + b` with `N = n_max + 1`.
struct BandOrder {
    dim: usize,
    fock: usize,
}

impl BandOrder {
    fn new(space: HilbertSpace) -> Self {
        BandOrder {
            dim: space.dim(),
            fock: space.fock_dim(),
        }
    }

    fn map(&self, v: usize) -> usize {
        let (r, c) = (v % self.dim, v / self.dim);
        let (a, n) = (r / self.fock, r % self.fock);
        let (b, m) = (c / self.fock, c % self.fock);
        ((n * self.fock + m) * 3 + a) * 3 + b
    }
}

fn diagonal_slot(dim: usize, k: usize) -> usize {
    k * dim + k
}

/// Solves with the equation for `ρ[pin, pin]` replaced by `ρ[pin, pin] = 1`.
/// The trace row of L is a sum of diagonal equations, so dropping one of
/// them loses nothing when the kernel is one-dimensional.
fn pinned_solve(l: &Liouvillian, pin: usize) -> Result<(Vec<C64>, f64), QmeError> {
    let d = l.hilbert_dim();
    let m = l.dim();
    let order = BandOrder::new(l.space);
    let perm: Vec<usize> = (0..m).map(|v| order.map(v)).collect();
    let pin_row = diagonal_slot(d, pin);
    let (mut kl, mut ku) = (0usize, 0usize);
    for v in 0..m {
        if v == pin_row {
            continue;
        }
        for (c, _) in l.matrix.row(v) {
            let (i, j) = (perm[v], perm[c]);
            kl = kl.max(i.saturating_sub(j));
            ku = ku.max(j.saturating_sub(i));
        }
    }
    let mut band = BandedMatrix::zeros(m, kl, ku);
    for v in 0..m {
        if v == pin_row {
            continue;
        }
        for (c, val) in l.matrix.row(v) {
            band.set(perm[v], perm[c], val);
        }
    }
    band.clear_row(perm[pin_row]);
    band.set(perm[pin_row], perm[pin_row], C64::new(1.0, 0.0));
    let lu = band.factorize();
    let ratio = lu.min_pivot_ratio();
    if ratio < DEGENERATE_PIVOT_RATIO {
        return Err(QmeError::DegenerateKernel { pivot_ratio: ratio });
    }
    let mut rhs = vec![C64::new(0.0, 0.0); m];
    rhs[perm[pin_row]] = C64::new(1.0, 0.0);
    lu.solve_in_place(&mut rhs);
    let x: Vec<C64> = (0..m).map(|v| rhs[perm[v]]).collect();
    Ok((x, ratio))
}

fn fock_weights(space: HilbertSpace, rho: &CMatrix) -> Vec<f64> {
    let mut p = vec![0.0; space.fock_dim()];
    for level in [Level::One, Level::Two, Level::Three] {
        for (n, pn) in p.iter_mut().enumerate() {
            let k = space.index(level, n);
            *pn += rho[(k, k)].re;
        }
    }
    p
}

/// Photon-number moments `(⟨a†a⟩, ⟨(a†a)²⟩, ⟨a†a†aa⟩)` from the diagonal.
fn moments(space: HilbertSpace, rho: &CMatrix) -> (f64, f64, f64) {
    let p = fock_weights(space, rho);
    let mut out = (0.0, 0.0, 0.0);
    for (n, pn) in p.iter().enumerate() {
        let n = n as f64;
        out.0 += n * pn;
        out.1 += n * n * pn;
        out.2 += n * (n - 1.0) * pn;
    }
    out
}

pub(crate) fn mean_photon_number(space: HilbertSpace, rho: &CMatrix) -> f64 {
    moments(space, rho).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub n_s: f64,
    /// `None` for a vanishing drive; `n_s` and `var_n` stay valid.
    pub t_a: Option<f64>,
    pub var_n: f64,
}

/// `n_s = Tr(a†a ρ)`, `T_a = n_s / (η/κ)²`, `var_n = Tr((a†a)² ρ) − n_s²`.
pub fn observables(rho: &CMatrix, ops: &OperatorSet, params: &SystemParams) -> Observables {
    let (n1, n2, _) = moments(ops.space, rho);
    let t_a = (params.eta != 0.0).then(|| n1 * (params.kappa / params.eta).powi(2));
    Observables {
        n_s: n1,
        t_a,
        var_n: n2 - n1 * n1,
    }
}

/// `Tr(a†a†aa ρ) / Tr(a†a ρ)²`.
pub fn g2_zero(rho: &CMatrix, ops: &OperatorSet) -> Result<f64, QmeError> {
    g2_zero_with_floor(rho, ops.space, N_FLOOR)
}

pub fn g2_zero_with_floor(rho: &CMatrix, space: HilbertSpace, n_floor: f64) -> Result<f64, QmeError> {
    let (n1, _, f2) = moments(space, rho);
    if n1 <= n_floor {
        return Err(QmeError::UndefinedCorrelation { n_s: n1 });
    }
    Ok(f2 / (n1 * n1))
}

/// Unique steady state of `l`.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult, QmeError> {
    let d = l.hilbert_dim();
    let space = l.space;
    let mut pin = space.index(Level::One, 0);
    let mut attempt = pinned_solve(l, pin)?;
    let diag_of = |x: &[C64]| -> Vec<f64> { (0..d).map(|k| x[diagonal_slot(d, k)].re).collect() };
    let trace = |x: &[C64]| -> C64 { (0..d).map(|k| x[diagonal_slot(d, k)]).sum() };
    {
        let diag = diag_of(&attempt.0);
        let tr = trace(&attempt.0).re;
        if tr.is_finite() && tr != 0.0 && diag[pin] / tr < 1e-3 {
            let best = (0..d).max_by(|&a, &b| diag[a].total_cmp(&diag[b])).unwrap();
            if best != pin {
                pin = best;
                attempt = pinned_solve(l, pin)?;
            }
        }
    }
    let (x, pivot_ratio) = attempt;
    let tr = trace(&x);
    if !(tr.norm().is_finite()) || tr.norm() == 0.0 || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QmeError::DegenerateKernel { pivot_ratio });
    }
    let raw = l.unvectorize(&x.iter().map(|z| z / tr).collect::<Vec<_>>());
    let hermiticity_error = (&raw - raw.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rho = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);

    let min_eigenvalue = rho.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -NEGATIVITY_TOL {
        return Err(QmeError::NotPositive { min_eigenvalue });
    }
    let residual_norm = l.matrix.mul_vec(rho.as_slice()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let trace_error = (rho.trace() - C64::new(1.0, 0.0)).norm();

    let mut warnings = Vec::new();
    if pivot_ratio < ILL_CONDITIONED_PIVOT_RATIO {
        warnings.push(QmeWarning::IllConditioned { pivot_ratio });
    }
    let params = &l.params;
    let (n1, n2, _) = moments(space, &rho);
    let weights = fock_weights(space, &rho);
    let top_fock_population = weights.iter().rev().take(2).sum::<f64>();
    let g2_0 = g2_zero_with_floor(&rho, space, N_FLOOR).ok();
    Ok(SteadyStateResult {
        n_s: n1,
        t_a: (params.eta != 0.0).then(|| n1 * (params.kappa / params.eta).powi(2)),
        g2_0,
        var_n: n2 - n1 * n1,
        n_max_used: space.n_max,
        top_fock_population,
        diagnostics: Diagnostics {
            trace_error,
            hermiticity_error,
            min_eigenvalue,
            residual_norm,
            min_pivot_ratio: pivot_ratio,
            warnings,
        },
        rho_s: rho,
    })
}
