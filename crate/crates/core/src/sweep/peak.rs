//! Quasi-dark transmission peak of the lowest stable branch.

use super::{QmePoint, SweepError};
use crate::meanfield::{lowest_stable, solve_steady_states, transmission};
use crate::model::SystemParams;
use crate::qme::{solve_with_adaptive_cutoff, CutoffPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    /// Points of the coarse scan over the window.
    pub coarse_points: usize,
    /// Width at which golden-section refinement stops.
    pub tol: f64,
    /// Solve the QME at the located peak with this policy.
    pub qme: Option<CutoffPolicy>,
    /// Also locate the maximum of the QME transmission itself, scanning
    /// this many points before refining to `qme_tol`.
    pub qme_scan_points: usize,
    pub qme_tol: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions {
            coarse_points: 241,
            tol: 1e-6,
            qme: None,
            qme_scan_points: 0,
            qme_tol: 1e-4,
        }
    }
}

/// Maximum of the QME transmission curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmePeak {
    pub delta_c: f64,
    pub t_a: f64,
    pub g2_0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiDarkPeak {
    pub delta_c: f64,
    /// `T_p`, the maximum of the lowest stable branch's transmission.
    pub t_p: f64,
    /// QME `g²(0)` at `delta_c`, when requested.
    pub g2_0: Option<f64>,
    pub qme_at_peak: Option<QmePoint>,
    pub qme_peak: Option<QmePeak>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a maximum of `f` in `[a, b]`.
fn golden_max<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

fn lowest_stable_transmission(base: &SystemParams, delta_c: f64) -> f64 {
    let p = SystemParams { delta_c, ..*base };
    solve_steady_states(&p)
        .ok()
        .and_then(|roots| lowest_stable(&roots).and_then(|r| transmission(r.n_s, &p).ok()))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Interior argmax of `f` on a uniform grid and golden refinement around it.
fn scan_and_refine<F: FnMut(f64) -> f64>(lo: f64, hi: f64, points: usize, tol: f64, mut f: F) -> Result<f64, SweepError> {
    let points = points.max(3);
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = (0..points)
        .max_by(|&i, &j| ys[i].total_cmp(&ys[j]).then(j.cmp(&i)))
        .expect("non-empty grid");
    if best == 0 || best == points - 1 || ys[best] == f64::NEG_INFINITY {
        return Err(SweepError::NoInteriorMaximum { lo, hi });
    }
    Ok(golden_max(xs[best - 1], xs[best + 1], tol, f))
}

/// Locates the maximum of the lowest stable branch's `T_a` over
/// `delta_c ∈ [lo, hi]`; the other parameters come from `base`.
pub fn find_quasi_dark_peak(
    base: &SystemParams,
    lo: f64,
    hi: f64,
    opts: &PeakOptions,
) -> Result<QuasiDarkPeak, SweepError> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(SweepError::InvalidSpec(format!("peak window [{lo}, {hi}] is empty")));
    }
    if base.eta == 0.0 {
        return Err(SweepError::InvalidSpec("the peak needs a nonzero drive".into()));
    }
    let delta_c = scan_and_refine(lo, hi, opts.coarse_points, opts.tol, |x| lowest_stable_transmission(base, x))?;
    let t_p = lowest_stable_transmission(base, delta_c);
    let at = SystemParams { delta_c, ..*base };

    let mut out = QuasiDarkPeak {
        delta_c,
        t_p,
        g2_0: None,
        qme_at_peak: None,
        qme_peak: None,
    };
    if let Some(policy) = opts.qme {
        let r = solve_with_adaptive_cutoff(&at, &policy)?;
        out.g2_0 = r.g2_0;
        out.qme_at_peak = Some(QmePoint::from(&r));
        if opts.qme_scan_points > 0 {
            let qme_t = |x: f64| {
                solve_with_adaptive_cutoff(&SystemParams { delta_c: x, ..*base }, &policy)
                    .ok()
                    .and_then(|r| r.t_a)
                    .unwrap_or(f64::NEG_INFINITY)
            };
            if let Ok(x) = scan_and_refine(lo, hi, opts.qme_scan_points, opts.qme_tol, qme_t) {
                let r = solve_with_adaptive_cutoff(&SystemParams { delta_c: x, ..*base }, &policy)?;
                out.qme_peak = r.t_a.map(|t_a| QmePeak {
                    delta_c: x,
                    t_a,
                    g2_0: r.g2_0,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let x = golden_max(-1.0, 2.0, 1e-9, |x| -(x - 0.3f64).powi(2));
        assert!((x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn dark_resonance_without_stark_shift() {
        let p = find_quasi_dark_peak(&SystemParams::default(), -2.0, 1.5, &PeakOptions::default()).unwrap();
        assert!(p.delta_c.abs() < 1e-4, "{}", p.delta_c);
        // T_a at Δc = 0 from the closed-form root
        let n0 = solve_steady_states(&SystemParams::default()).unwrap()[0].n_s;
        assert!((p.t_p - n0 / 0.01).abs() < 1e-6 * p.t_p);
    }

    #[test]
    fn window_without_interior_maximum_is_an_error() {
        let r = find_quasi_dark_peak(&SystemParams::default(), 0.5, 2.0, &PeakOptions::default());
        assert!(matches!(r, Err(SweepError::NoInteriorMaximum { .. })));
        assert!(find_quasi_dark_peak(&SystemParams::default(), 1.0, 1.0, &PeakOptions::default()).is_err());
    }

    #[test]
    fn peak_drifts_one_way_with_stark_shift() {
        let mut prev = f64::INFINITY;
        for k in 0..=8 {
            let u0_over_g = 0.25 * k as f64;
            let base = SystemParams::default().with_g_ratios(0.35, 0.0, u0_over_g);
            let p = find_quasi_dark_peak(&base, -2.0, 1.5, &PeakOptions::default()).unwrap();
            assert!(p.delta_c <= prev + 1e-6, "U0/g = {u0_over_g}: {} after {prev}", p.delta_c);
            prev = p.delta_c;
        }
        assert!(prev < -0.1);
    }
}
