//! Semiclassical steady states.
//!
//! Clearing the denominators of the steady-state field equations leaves a
//! quintic in the intracavity photon number,
//!
//! ```text
//! F(n) = n·[α u² − 2β d u + χ d²] − η²·[u² + d² γ13²/4],
//! d = Δc − U0 n,  u = d² − Ω²,
//! α = (Δc+U0)² + κ²/4,  β = g²(Δc+U0),  χ = (Δc+U0)²γ13²/4 + (g² + κγ13/4)².
//! ```
//!
//! `F` is the ground truth of this module. [`quintic_coeffs`] gives its
//! monomial coefficients in closed form, roots come from the companion matrix
//! and are polished by Newton steps on `F`.

mod hysteresis;

pub use hysteresis::{hysteresis_scan, BranchTrace, Direction, Jump};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::model::{ModelError, SystemParams};

/// Growth rates within this band around zero are reported as marginal.
pub const STABILITY_EPS: f64 = 1e-9;
/// Imaginary-part filter for companion eigenvalues, relative to `max(1, |Re|)`.
pub const IMAG_TOL: f64 = 1e-7;
/// Roots closer than `MERGE_TOL * (1 + n)` are one (fold-degenerate) root.
pub const MERGE_TOL: f64 = 1e-8;
/// Scaled residual accepted after polishing.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanFieldError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("transmission is undefined for a vanishing drive (eta = 0)")]
    UndefinedTransmission,
    #[error("eigenvalue solver did not converge ({0})")]
    Eigen(&'static str),
    #[error("no stable steady state at {axis} = {value}")]
    NoStableRoot { axis: &'static str, value: f64 },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}

/// Monomial coefficients `c[k]` of `F(n) = Σ c[k] n^k` with the shorthands
/// α, β, χ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticCoeffs {
    pub c: [f64; 6],
    pub alpha: f64,
    pub beta: f64,
    pub chi: f64,
}

impl QuinticCoeffs {
    pub fn eval(&self, n: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ck| acc * n + ck)
    }

    pub fn eval_derivative(&self, n: f64) -> f64 {
        (1..6).rev().fold(0.0, |acc, k| acc * n + k as f64 * self.c[k])
    }

    /// `max(1, |c_k| n^k)`, the scale used for residual tolerances.
    pub fn scale(&self, n: f64) -> f64 {
        let mut pow = 1.0;
        let mut scale: f64 = 1.0;
        for ck in self.c {
            scale = scale.max((ck * pow).abs());
            pow *= n;
        }
        scale
    }
}

fn shorthands(p: &SystemParams) -> (f64, f64, f64) {
    let delta = p.delta_c + p.u0;
    let alpha = delta * delta + p.kappa * p.kappa / 4.0;
    let beta = p.g * p.g * delta;
    let chi = delta * delta * p.gamma13 * p.gamma13 / 4.0
        + (p.g * p.g + p.kappa * p.gamma13 / 4.0).powi(2);
    (alpha, beta, chi)
}

/// Cleared steady-state residual `F(n)`; its nonnegative roots are the
/// mean-field photon numbers.
pub fn residual_f(n: f64, p: &SystemParams) -> f64 {
    let (alpha, beta, chi) = shorthands(p);
    let d = p.delta_c - p.u0 * n;
    let u = d * d - p.omega * p.omega;
    let g2 = p.gamma13 * p.gamma13 / 4.0;
    n * (alpha * u * u - 2.0 * beta * d * u + chi * d * d) - p.eta * p.eta * (u * u + d * d * g2)
}

pub fn quintic_coeffs(p: &SystemParams) -> QuinticCoeffs {
    let (alpha, beta, chi) = shorthands(p);
    let (dc, u0, om2, eta2) = (p.delta_c, p.u0, p.omega * p.omega, p.eta * p.eta);
    let gam2 = p.gamma13 * p.gamma13;
    let det = dc * dc - om2;
    let c5 = alpha * u0.powi(4);
    let c4 = (2.0 * beta - 4.0 * alpha * dc) * u0.powi(3) - eta2 * u0.powi(4);
    let c3 = (2.0 * alpha * (3.0 * dc * dc - om2) - 6.0 * beta * dc + chi) * u0 * u0
        + 4.0 * eta2 * dc * u0.powi(3);
    let c2 = u0 * det * (2.0 * beta - 4.0 * alpha * dc) + (4.0 * beta * dc - 2.0 * chi) * u0 * dc
        - eta2 * u0 * u0 * (2.0 * (3.0 * dc * dc - om2) + gam2 / 4.0);
    let c1 = alpha * det * det
        + (4.0 * eta2 * dc * u0 - 2.0 * beta * dc) * det
        + eta2 * u0 * gam2 * dc / 2.0
        + chi * dc * dc;
    let c0 = -eta2 * (det * det + dc * dc * gam2 / 4.0);
    QuinticCoeffs {
        c: [c0, c1, c2, c3, c4, c5],
        alpha,
        beta,
        chi,
    }
}

/// The coefficient list exactly as commonly printed, whose `C1` groups the
/// χ term as `(η²U0γ13²/2 + χ)·Δc`. Kept only for comparison against
/// [`quintic_coeffs`]; dimensional analysis and direct expansion both give
/// `χ·Δc²` for that term.
pub fn printed_quintic_coeffs(p: &SystemParams) -> [f64; 6] {
    let mut c = quintic_coeffs(p);
    let gam2 = p.gamma13 * p.gamma13;
    let (dc, u0, om2, eta2) = (p.delta_c, p.u0, p.omega * p.omega, p.eta * p.eta);
    let det = dc * dc - om2;
    c.c[1] = c.alpha * det * det
        + (4.0 * eta2 * dc * u0 - 2.0 * c.beta * dc) * det
        + (eta2 * u0 * gam2 / 2.0 + c.chi) * dc;
    c.c
}

/// Per-coefficient comparison between the expanded and printed lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientComparison {
    pub expanded: [f64; 6],
    pub printed: [f64; 6],
    /// `|expanded − printed| / max(|expanded|, |printed|, 1e-300)`.
    pub rel_diff: [f64; 6],
}

impl CoefficientComparison {
    /// Indices whose relative difference exceeds `tol`.
    pub fn mismatches(&self, tol: f64) -> Vec<usize> {
        (0..6).filter(|&k| self.rel_diff[k] > tol).collect()
    }
}

pub fn compare_printed_coeffs(p: &SystemParams) -> CoefficientComparison {
    let expanded = quintic_coeffs(p).c;
    let printed = printed_quintic_coeffs(p);
    let rel_diff = std::array::from_fn(|k| {
        let denom = expanded[k].abs().max(printed[k].abs()).max(1e-300);
        (expanded[k] - printed[k]).abs() / denom
    });
    CoefficientComparison {
        expanded,
        printed,
        rel_diff,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        self == Stability::Stable
    }
}

/// One mean-field steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub n_s: f64,
    pub a_s: C64,
    pub sigma12: C64,
    pub sigma13: C64,
    pub stability: Stability,
    /// `|F(n_s)|`.
    pub residual: f64,
    /// False when Newton polishing could not bring the scaled residual under
    /// [`RESIDUAL_TOL`] or the back-substituted fields are inconsistent.
    pub polished: bool,
    /// Two companion roots collapsed onto this one (saddle-node degeneracy).
    pub merged: bool,
}

impl FixedPoint {
    /// Fills the field amplitudes for photon number `n` from the pole-free
    /// combined expressions
    /// `a = −η w / (D w − g² d)`, `σ13 = −g a d / w`, `σ12 = Ω g a / w`
    /// with `w = u − i d γ13/2` and `D = Δc + U0 − iκ/2`.
    pub fn from_photon_number(n: f64, p: &SystemParams) -> Self {
        let d = p.delta_c - p.u0 * n;
        let u = d * d - p.omega * p.omega;
        let w = C64::new(u, -d * p.gamma13 / 2.0);
        let cav = C64::new(p.delta_c + p.u0, -p.kappa / 2.0);
        let den = cav * w - p.g * p.g * d;
        let (a_s, sigma12, sigma13) = if p.eta == 0.0 {
            (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
        } else {
            let a_s = -p.eta * w / den;
            (a_s, p.omega * p.g * a_s / w, -p.g * d * a_s / w)
        };
        FixedPoint {
            n_s: n,
            a_s,
            sigma12,
            sigma13,
            stability: Stability::Marginal,
            residual: residual_f(n, p).abs(),
            polished: true,
            merged: false,
        }
    }

    /// Whether `|a_s|² = n_s` within `tol` relative.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let n2 = self.a_s.norm_sqr();
        n2.is_finite() && (n2 - self.n_s).abs() <= tol * self.n_s.max(1e-300)
    }
}

/// Real nonnegative roots of `Σ c[k] x^k` from companion-matrix eigenvalues.
/// Returned values are unpolished.
fn companion_real_roots(coeffs: &[f64; 6]) -> Result<Vec<f64>, MeanFieldError> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let mut roots = Vec::new();
    // exact roots at zero
    while c.len() > 1 && c[0] == 0.0 {
        roots.push(0.0);
        c.remove(0);
    }
    let deg = c.len() - 1;
    match deg {
        0 => return Ok(roots),
        1 => {
            roots.push(-c[0] / c[1]);
        }
        _ => {
            // balance the magnitudes of the end coefficients: x = s·y
            let s = (c[0].abs() / c[deg].abs()).powf(1.0 / deg as f64);
            let s = if s.is_finite() && s > 0.0 { s } else { 1.0 };
            let lead = c[deg] * s.powi(deg as i32);
            let companion = DMatrix::from_fn(deg, deg, |i, j| {
                if j == deg - 1 {
                    -c[i] * s.powi(i as i32) / lead
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            let schur = Schur::try_new(companion, f64::EPSILON, 10_000)
                .ok_or(MeanFieldError::Eigen("companion matrix"))?;
            for z in schur.complex_eigenvalues().iter() {
                let (re, im) = (z.re * s, z.im * s);
                if im.abs() < IMAG_TOL * re.abs().max(1.0) {
                    roots.push(re);
                }
            }
        }
    }
    Ok(roots
        .into_iter()
        .filter(|&r| r >= -1e-12)
        .map(|r| r.max(0.0))
        .collect())
}

/// Newton refinement on `F` with the derivative from the coefficients.
fn polish(mut x: f64, coeffs: &QuinticCoeffs, p: &SystemParams) -> (f64, f64) {
    let mut best = (x, residual_f(x, p).abs());
    for _ in 0..100 {
        let f = residual_f(x, p);
        let df = coeffs.eval_derivative(x);
        if f == 0.0 || df == 0.0 || !df.is_finite() {
            break;
        }
        let step = f / df;
        let mut next = x - step;
        if next < 0.0 {
            next = 0.5 * x;
        }
        let r = residual_f(next, p).abs();
        if r < best.1 {
            best = (next, r);
        }
        let converged = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
        x = next;
        if converged {
            break;
        }
    }
    best
}

/// All mean-field steady states, ascending in `n_s`, each labelled by
/// [`classify_stability`].
pub fn solve_steady_states(p: &SystemParams) -> Result<Vec<FixedPoint>, MeanFieldError> {
    p.validate()?;
    if p.eta == 0.0 {
        let mut fp = FixedPoint::from_photon_number(0.0, p);
        fp.stability = classify_stability(p, &fp);
        return Ok(vec![fp]);
    }
    let coeffs = quintic_coeffs(p);
    let mut candidates: Vec<(f64, f64)> = companion_real_roots(&coeffs.c)?
        .into_iter()
        .map(|r| polish(r, &coeffs, p))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut out: Vec<FixedPoint> = Vec::with_capacity(candidates.len());
    for (n, residual) in candidates {
        if let Some(last) = out.last_mut() {
            if (n - last.n_s).abs() < MERGE_TOL * (1.0 + n) {
                last.merged = true;
                continue;
            }
        }
        let mut fp = FixedPoint::from_photon_number(n, p);
        fp.residual = residual;
        fp.polished = residual <= RESIDUAL_TOL * coeffs.scale(n) && fp.is_consistent(1e-9);
        out.push(fp);
    }
    for fp in &mut out {
        fp.stability = if fp.merged || !fp.polished {
            Stability::Marginal
        } else {
            classify_stability(p, fp)
        };
    }
    Ok(out)
}

/// Jacobian of the weak-excitation equations of motion for `(a, σ12, σ13)`,
/// written in real coordinates `(Re a, Re σ12, Re σ13, Im a, Im σ12, Im σ13)`.
///
/// The equations are
/// ```text
/// i ȧ   = (Δc + U0 − iκ/2) a + g σ13 + η
/// i σ̇12 = (Δc − U0|a|²) σ12 + Ω σ13
/// i σ̇13 = (Δc − iγ13/2 − U0|a|²) σ13 + g a + Ω σ12
/// ```
pub fn jacobian(p: &SystemParams, fp: &FixedPoint) -> DMatrix<f64> {
    let mi = C64::new(0.0, -1.0);
    let a = fp.a_s;
    let n = a.norm_sqr();
    let d = p.delta_c - p.u0 * n;
    // holomorphic (dz) and antiholomorphic (dz̄) parts
    let mut hol = [[C64::new(0.0, 0.0); 3]; 3];
    let mut anti = [[C64::new(0.0, 0.0); 3]; 3];
    hol[0][0] = mi * C64::new(p.delta_c + p.u0, -p.kappa / 2.0);
    hol[0][2] = mi * p.g;
    hol[1][0] = mi * (-p.u0 * a.conj() * fp.sigma12);
    anti[1][0] = mi * (-p.u0 * a * fp.sigma12);
    hol[1][1] = mi * d;
    hol[1][2] = mi * p.omega;
    hol[2][0] = mi * (p.g - p.u0 * a.conj() * fp.sigma13);
    anti[2][0] = mi * (-p.u0 * a * fp.sigma13);
    hol[2][1] = mi * p.omega;
    hol[2][2] = mi * C64::new(d, -p.gamma13 / 2.0);

    // ∂f/∂x = A + B, ∂f/∂y = i(A − B)
    let mut j = DMatrix::zeros(6, 6);
    for r in 0..3 {
        for c in 0..3 {
            let dx = hol[r][c] + anti[r][c];
            let dy = C64::new(0.0, 1.0) * (hol[r][c] - anti[r][c]);
            j[(r, c)] = dx.re;
            j[(r, c + 3)] = dy.re;
            j[(r + 3, c)] = dx.im;
            j[(r + 3, c + 3)] = dy.im;
        }
    }
    j
}

/// Eigenvalues of [`jacobian`].
pub fn jacobian_spectrum(p: &SystemParams, fp: &FixedPoint) -> Option<Vec<C64>> {
    let j = jacobian(p, fp);
    if j.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Schur::try_new(j, f64::EPSILON, 10_000).map(|s| s.complex_eigenvalues().iter().copied().collect())
}

pub fn classify_stability(p: &SystemParams, fp: &FixedPoint) -> Stability {
    let Some(spectrum) = jacobian_spectrum(p, fp) else {
        return Stability::Marginal;
    };
    let max_re = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re < -STABILITY_EPS {
        Stability::Stable
    } else if max_re > STABILITY_EPS {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// `T_a = n_s / n0` with the bare photon number `n0 = (η/κ)²`.
pub fn transmission(n_s: f64, p: &SystemParams) -> Result<f64, MeanFieldError> {
    if p.eta == 0.0 {
        return Err(MeanFieldError::UndefinedTransmission);
    }
    Ok(n_s * p.kappa * p.kappa / (p.eta * p.eta))
}

/// Lowest stable branch, if any.
pub fn lowest_stable(roots: &[FixedPoint]) -> Option<&FixedPoint> {
    roots.iter().find(|fp| fp.stability.is_stable())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn bistable(eta: f64) -> SystemParams {
        SystemParams {
            eta,
            ..SystemParams::default().with_g_ratios(0.35, -0.12, 2.0)
        }
    }

    /// Horner evaluation of the expanded product, built by multiplying
    /// polynomial factors rather than from the closed-form coefficients.
    fn expanded_by_multiplication(p: &SystemParams) -> Vec<f64> {
        fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
            let mut out = vec![0.0; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        }
        fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
            let mut out = vec![0.0; a.len().max(b.len())];
            for (i, x) in a.iter().enumerate() {
                out[i] += x;
            }
            for (i, x) in b.iter().enumerate() {
                out[i] += x;
            }
            out
        }
        fn scale(a: &[f64], s: f64) -> Vec<f64> {
            a.iter().map(|x| x * s).collect()
        }
        let delta = p.delta_c + p.u0;
        let alpha = delta * delta + 0.25 * p.kappa * p.kappa;
        let beta = p.g * p.g * delta;
        let chi = delta * delta * p.gamma13 * p.gamma13 / 4.0 + (p.g * p.g + p.kappa * p.gamma13 / 4.0).powi(2);
        let d = vec![p.delta_c, -p.u0];
        let u = add(&mul(&d, &d), &[-p.omega * p.omega]);
        let bracket = add(
            &add(&scale(&mul(&u, &u), alpha), &scale(&mul(&d, &u), -2.0 * beta)),
            &scale(&mul(&d, &d), chi),
        );
        let first = mul(&[0.0, 1.0], &bracket);
        let second = scale(
            &add(&mul(&u, &u), &scale(&mul(&d, &d), p.gamma13 * p.gamma13 / 4.0)),
            -p.eta * p.eta,
        );
        add(&first, &second)
    }

    #[test]
    fn residual_at_zero_is_nonpositive() {
        for p in [bistable(0.1), SystemParams::default(), bistable(0.0)] {
            let expected = -p.eta * p.eta
                * ((p.delta_c.powi(2) - p.omega.powi(2)).powi(2) + p.delta_c.powi(2) * p.gamma13.powi(2) / 4.0);
            assert_eq!(residual_f(0.0, &p), expected);
            assert!(residual_f(0.0, &p) <= 0.0);
        }
    }

    #[test]
    fn empty_cavity_root() {
        // g = U0 = Δc = 0: F = (κ²/4)Ω⁴ n − η²Ω⁴
        let p = SystemParams {
            g: 0.0,
            u0: 0.0,
            delta_c: 0.0,
            eta: 0.1,
            ..Default::default()
        };
        let roots = solve_steady_states(&p).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].n_s, 0.04, max_relative = 1e-12);
        assert_eq!(roots[0].stability, Stability::Stable);
        assert_relative_eq!(transmission(roots[0].n_s, &p).unwrap(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn decoupled_atom_root_for_any_stark_shift() {
        for (dc, u0) in [(0.0, 3.0), (-1.2, 0.5), (2.0, -4.0), (0.3, 8.0)] {
            let p = SystemParams {
                g: 0.0,
                delta_c: dc,
                u0,
                eta: 0.37,
                ..Default::default()
            };
            let roots = solve_steady_states(&p).unwrap();
            let expected = p.eta * p.eta / ((dc + u0).powi(2) + 0.25);
            assert_eq!(roots.len(), 1, "{dc} {u0}: {roots:?}");
            assert_relative_eq!(roots[0].n_s, expected, max_relative = 1e-9);
            assert_eq!(roots[0].stability, Stability::Stable);
        }
    }

    #[test]
    fn no_drive_returns_trivial_point() {
        let roots = solve_steady_states(&bistable(0.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].n_s, 0.0);
        assert_eq!(roots[0].a_s, C64::new(0.0, 0.0));
    }

    #[test]
    fn no_stark_shift_is_linear() {
        let c = quintic_coeffs(&SystemParams::default());
        assert_eq!(&c.c[2..], &[0.0; 4]);
    }

    #[test]
    fn leading_coefficient() {
        let p = bistable(0.6);
        let c = quintic_coeffs(&p);
        assert_eq!(c.c[5], c.alpha * p.u0.powi(4));
    }

    #[test]
    fn coefficients_reproduce_residual_at_nodes() {
        for p in [bistable(0.1), bistable(0.6), SystemParams::default().with_g_ratios(0.35, 0.92, 3.0)] {
            let c = quintic_coeffs(&p);
            for k in 0..6 {
                let n = 0.1 * k as f64;
                let f = residual_f(n, &p);
                assert!((c.eval(n) - f).abs() <= 1e-10 * c.scale(n), "node {n}");
            }
        }
    }

    #[test]
    fn coefficients_match_polynomial_multiplication() {
        let p = SystemParams {
            gamma13: 0.3,
            ..SystemParams::default().with_g_ratios(0.5, 0.7, -1.3)
        };
        let c = quintic_coeffs(&p);
        let m = expanded_by_multiplication(&p);
        assert_eq!(m.len(), 6);
        for k in 0..6 {
            assert_relative_eq!(c.c[k], m[k], max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn printed_list_differs_only_in_linear_term() {
        let p = bistable(0.1);
        let cmp = compare_printed_coeffs(&p);
        assert_eq!(cmp.mismatches(1e-12), vec![1]);
        // the difference is χΔc(Δc − 1)
        let chi = quintic_coeffs(&p).chi;
        assert_relative_eq!(
            cmp.expanded[1] - cmp.printed[1],
            chi * p.delta_c * (p.delta_c - 1.0),
            max_relative = 1e-10
        );
        // at Δc = 1 the two lists coincide
        let cmp = compare_printed_coeffs(&SystemParams { delta_c: 1.0, ..p });
        assert!(cmp.mismatches(1e-12).is_empty());
    }

    #[test]
    fn s_curve_window_has_three_roots() {
        let roots = solve_steady_states(&bistable(0.15)).unwrap();
        let labels: Vec<_> = roots.iter().map(|r| r.stability).collect();
        assert_eq!(labels, vec![Stability::Stable, Stability::Unstable, Stability::Stable]);
        for r in &roots {
            assert!(r.polished);
            assert!(r.is_consistent(1e-9));
        }
        assert!(solve_steady_states(&bistable(0.05)).unwrap().len() == 1);
        assert!(solve_steady_states(&bistable(0.3)).unwrap().len() == 1);
    }

    /// Counts sign changes of F on a dense grid, the brute-force oracle for
    /// the number of simple roots.
    fn sign_changes(p: &SystemParams, n_hi: f64, steps: usize) -> usize {
        let mut count = 0;
        let mut prev = residual_f(0.0, p);
        for i in 1..=steps {
            let f = residual_f(n_hi * i as f64 / steps as f64, p);
            if f.signum() != prev.signum() && f != 0.0 {
                count += 1;
            }
            if f != 0.0 {
                prev = f;
            }
        }
        count
    }

    #[test]
    fn root_counts_match_sign_change_oracle() {
        for eta in [0.05, 0.1, 0.15, 0.2, 0.25] {
            let p = bistable(eta);
            assert_eq!(solve_steady_states(&p).unwrap().len(), sign_changes(&p, 1.0, 200_000), "eta {eta}");
        }
    }

    #[test]
    fn five_roots_at_multistable_point() {
        let p = SystemParams {
            eta: 0.6,
            ..SystemParams::default().with_g_ratios(0.35, 0.92, 2.0)
        };
        let roots = solve_steady_states(&p).unwrap();
        assert_eq!(roots.len(), 5);
        assert_eq!(sign_changes(&p, 2.0, 400_000), 5);
        let labels: Vec<_> = roots.iter().map(|r| r.stability).collect();
        use Stability::*;
        assert_eq!(labels, vec![Stable, Unstable, Stable, Unstable, Stable]);
    }

    #[test]
    fn transmission_guards() {
        let p = bistable(0.1);
        assert_relative_eq!(transmission(0.04, &p).unwrap(), 4.0, max_relative = 1e-12);
        assert_eq!(transmission(0.0, &p).unwrap(), 0.0);
        assert_eq!(transmission(0.1, &bistable(0.0)), Err(MeanFieldError::UndefinedTransmission));
    }

    #[test]
    fn decoupled_jacobian_contains_cavity_line() {
        let p = SystemParams {
            g: 0.0,
            ..Default::default()
        };
        let fp = solve_steady_states(&p).unwrap()[0];
        let spec = jacobian_spectrum(&p, &fp).unwrap();
        let cavity = spec.iter().filter(|z| (z.re + 0.5).abs() < 1e-10).count();
        assert_eq!(cavity, 2);
    }

    #[test]
    fn fields_satisfy_steady_state_equations() {
        let p = bistable(0.15);
        for fp in solve_steady_states(&p).unwrap() {
            let n = fp.a_s.norm_sqr();
            let d = p.delta_c - p.u0 * n;
            let cav = C64::new(p.delta_c + p.u0, -0.5);
            let ra = fp.a_s * cav + p.g * fp.sigma13 + p.eta;
            let r12 = d * fp.sigma12 + p.omega * fp.sigma13;
            let r13 = C64::new(d, -p.gamma13 / 2.0) * fp.sigma13 + p.g * fp.a_s + p.omega * fp.sigma12;
            for r in [ra, r12, r13] {
                assert_abs_diff_eq!(r.norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn stability_independent_of_order() {
        let p = bistable(0.12);
        let mut roots = solve_steady_states(&p).unwrap();
        let labels: Vec<_> = roots.iter().map(|r| (r.n_s.to_bits(), r.stability)).collect();
        roots.reverse();
        for r in &roots {
            assert!(labels.contains(&(r.n_s.to_bits(), classify_stability(&p, r))));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn expanded_coefficients_match_residual(
            g in 0.0..6.0f64, gamma in 0.0..0.5f64, omega in 0.0..3.0f64,
            eta in 0.0..2.0f64, dc in -5.0..5.0f64, u0 in -10.0..10.0f64,
        ) {
            let p = SystemParams { g, gamma13: gamma, omega, eta, delta_c: dc, u0, ..Default::default() };
            let c = quintic_coeffs(&p);
            for k in 0..6 {
                let n = 0.1 * k as f64;
                prop_assert!((c.eval(n) - residual_f(n, &p)).abs() <= 1e-10 * c.scale(n));
            }
        }

        #[test]
        fn roots_have_small_scaled_residual(
            eta in 0.01..1.5f64, dc in -2.0..2.0f64, u0 in -10.0..10.0f64, omega in 0.2..3.0f64,
        ) {
            let p = SystemParams { eta, omega, delta_c: dc, u0, ..Default::default() };
            let c = quintic_coeffs(&p);
            let roots = solve_steady_states(&p).unwrap();
            for r in &roots {
                prop_assert!(r.residual <= RESIDUAL_TOL * c.scale(r.n_s));
            }
            let degenerate = roots.iter().any(|r| r.merged || !r.polished);
            if u0 != 0.0 && !degenerate {
                prop_assert_eq!(roots.len() % 2, 1);
            }
        }

        #[test]
        fn detuning_parity_without_stark_shift(dc in 0.0..6.0f64, eta in 0.01..1.0f64) {
            let p = SystemParams { eta, delta_c: dc, ..Default::default() };
            let m = SystemParams { delta_c: -dc, ..p };
            let a = solve_steady_states(&p).unwrap();
            let b = solve_steady_states(&m).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.n_s - y.n_s).abs() <= 1e-12 * x.n_s.max(1e-300));
            }
        }

        #[test]
        fn weak_coupling_limit(dc in -3.0..3.0f64, u0 in -6.0..6.0f64, eta in 0.01..1.0f64) {
            let p = SystemParams { g: 0.0, eta, delta_c: dc, u0, ..Default::default() };
            let roots = solve_steady_states(&p).unwrap();
            prop_assert_eq!(roots.len(), 1);
            let expected = eta * eta / ((dc + u0).powi(2) + 0.25);
            prop_assert!((roots[0].n_s - expected).abs() <= 1e-9 * expected);
        }
    }
}
