//! Delayed photon correlations through the quantum regression theorem.

use num_complex::Complex64 as C64;

use super::liouvillian::Liouvillian;
use super::steady::{g2_zero_with_floor, mean_photon_number, N_FLOOR};
use super::QmeError;
use crate::model::{CMatrix, Level, OperatorSet};

/// Maximum change of the series between step sizes `h` and `h/2`,
/// per unit delay.
pub const G2_TAU_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct G2Series {
    pub tau: Vec<f64>,
    pub g2: Vec<f64>,
    /// Step-halving reached [`G2_TAU_TOL`].
    pub converged: bool,
    /// RK4 step bound used for the returned series.
    pub step: f64,
}

impl G2Series {
    pub fn tail(&self) -> f64 {
        *self.g2.last().expect("series is never empty")
    }
}

fn photon_trace(l: &Liouvillian, x: &[C64]) -> f64 {
    let space = l.space;
    let d = space.dim();
    let mut acc = 0.0;
    for level in [Level::One, Level::Two, Level::Three] {
        for n in 1..=space.n_max {
            let k = space.index(level, n);
            acc += n as f64 * x[k * d + k].re;
        }
    }
    acc
}

fn axpy(y: &mut [C64], a: f64, x: &[C64], base: &[C64]) {
    for ((yi, xi), bi) in y.iter_mut().zip(x).zip(base) {
        *yi = bi + xi * a;
    }
}

/// `Tr[a†a X(τ)]` on `taus` with classical RK4 using at most `h` per step.
fn integrate(l: &Liouvillian, x0: &[C64], taus: &[f64], h: f64) -> Result<Vec<f64>, QmeError> {
    let m = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![C64::default(); m], vec![C64::default(); m], vec![C64::default(); m], vec![C64::default(); m], vec![C64::default(); m]);
    let mut out = Vec::with_capacity(taus.len());
    out.push(photon_trace(l, &x));
    for w in taus.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / h).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        for _ in 0..steps {
            l.matrix.mul_vec_into(&x, &mut k1);
            axpy(&mut tmp, dt / 2.0, &k1, &x);
            l.matrix.mul_vec_into(&tmp, &mut k2);
            axpy(&mut tmp, dt / 2.0, &k2, &x);
            l.matrix.mul_vec_into(&tmp, &mut k3);
            axpy(&mut tmp, dt, &k3, &x);
            l.matrix.mul_vec_into(&tmp, &mut k4);
            for i in 0..m {
                x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        let v = photon_trace(l, &x);
        if !v.is_finite() {
            return Err(QmeError::Integration { tau: w[1] });
        }
        out.push(v);
    }
    Ok(out)
}

/// `g²(τ) = Tr[a†a X(τ)] / n_s²` with `dX/dτ = L X`, `X(0) = a ρ_s a†`.
pub fn g2_tau(rho_s: &CMatrix, l: &Liouvillian, ops: &OperatorSet, taus: &[f64]) -> Result<G2Series, QmeError> {
    if taus.first() != Some(&0.0) || taus.windows(2).any(|w| w[1] <= w[0]) || taus.iter().any(|t| !t.is_finite()) {
        return Err(QmeError::InvalidTauGrid);
    }
    g2_zero_with_floor(rho_s, l.space, N_FLOOR)?;
    let n_s = mean_photon_number(l.space, rho_s);
    let x0 = Liouvillian::vectorize(&(&ops.a * rho_s * &ops.a_dag));
    let norm = n_s * n_s;

    let mut h = 1.0 / l.matrix.norm_inf();
    let mut prev = integrate(l, &x0, taus, h)?;
    for _ in 0..MAX_HALVINGS {
        h /= 2.0;
        let next = integrate(l, &x0, taus, h)?;
        let ok = prev
            .iter()
            .zip(&next)
            .zip(taus)
            .all(|((a, b), t)| (a - b).abs() / norm <= G2_TAU_TOL * t.max(1.0));
        prev = next;
        if ok {
            return Ok(G2Series {
                tau: taus.to_vec(),
                g2: prev.iter().map(|v| v / norm).collect(),
                converged: true,
                step: h,
            });
        }
    }
    Ok(G2Series {
        tau: taus.to_vec(),
        g2: prev.iter().map(|v| v / norm).collect(),
        converged: false,
        step: h,
    })
}

/// Uniform grid `0, dt, …, tau_max`.
pub fn uniform_tau_grid(tau_max: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| tau_max * i as f64 / (points - 1) as f64).collect()
}
