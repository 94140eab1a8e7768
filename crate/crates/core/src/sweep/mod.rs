//! Parameter scans: spectra, S-curves, phase diagrams and the quasi-dark
//! transmission peak.
//!
//! Points and cells are independent, so scans run on the rayon pool and are
//! collected by index; results do not depend on the number of workers.

mod peak;

pub use peak::{find_quasi_dark_peak, PeakOptions, QmePeak, QuasiDarkPeak};

use rayon::prelude::*;
use thiserror::Error;

use crate::meanfield::{solve_steady_states, transmission, MeanFieldError, Stability};
use crate::model::{Axis, SystemParams};
use crate::qme::{solve_with_adaptive_cutoff, CutoffPolicy, QmeError, SteadyStateResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
    #[error(transparent)]
    Qme(#[from] QmeError),
    #[error("no interior maximum of the lowest stable branch in [{lo}, {hi}]")]
    NoInteriorMaximum { lo: f64, hi: f64 },
}

/// Uniform grid `lo..=hi` with `resolution` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub resolution: usize,
}

impl AxisRange {
    pub fn new(axis: Axis, lo: f64, hi: f64, resolution: usize) -> Self {
        AxisRange { axis, lo, hi, resolution }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(SweepError::InvalidSpec(format!("{} range is not finite", self.axis.name())));
        }
        if self.resolution < 2 {
            return Err(SweepError::InvalidSpec(format!("{} resolution must be at least 2", self.axis.name())));
        }
        if self.hi < self.lo {
            return Err(SweepError::InvalidSpec(format!("{} range is reversed", self.axis.name())));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.resolution - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.resolution {
            self.hi
        } else {
            self.lo + self.step() * i as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.resolution).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Engines {
    pub mfa: bool,
    pub qme: bool,
}

impl Engines {
    pub const MFA: Engines = Engines { mfa: true, qme: false };
    pub const BOTH: Engines = Engines { mfa: true, qme: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemParams,
    /// One axis for [`sweep_1d`], two (x then y) for [`phase_diagram_2d`].
    pub axes: Vec<AxisRange>,
    pub engines: Engines,
    pub policy: CutoffPolicy,
    /// Phase diagrams only: at most this many evenly strided cells get a
    /// QME solve when the QME engine is on.
    pub qme_cell_budget: usize,
}

impl SweepSpec {
    pub fn one_axis(base: SystemParams, axis: AxisRange, engines: Engines) -> Self {
        SweepSpec {
            base,
            axes: vec![axis],
            engines,
            policy: CutoffPolicy::sweep(),
            qme_cell_budget: 0,
        }
    }

    pub fn two_axes(base: SystemParams, x: AxisRange, y: AxisRange) -> Self {
        SweepSpec {
            base,
            axes: vec![x, y],
            engines: Engines::MFA,
            policy: CutoffPolicy::sweep(),
            qme_cell_budget: 0,
        }
    }

    fn validate(&self, n_axes: usize) -> Result<(), SweepError> {
        if self.axes.len() != n_axes {
            return Err(SweepError::InvalidSpec(format!(
                "expected {n_axes} axis ranges, got {}",
                self.axes.len()
            )));
        }
        if !self.engines.mfa && !self.engines.qme {
            return Err(SweepError::InvalidSpec("no engine selected".into()));
        }
        if n_axes == 2 && !self.engines.mfa {
            return Err(SweepError::InvalidSpec("phase diagrams need the mean-field engine".into()));
        }
        if n_axes == 2 && self.axes[0].axis == self.axes[1].axis {
            return Err(SweepError::InvalidSpec("the two axes must differ".into()));
        }
        for a in &self.axes {
            a.validate()?;
        }
        self.base.validate().map_err(MeanFieldError::from)?;
        if self.engines.qme {
            self.policy.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfaBranch {
    pub n_s: f64,
    /// `None` for a vanishing drive.
    pub t_a: Option<f64>,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmePoint {
    pub n_s: f64,
    pub t_a: Option<f64>,
    pub g2_0: Option<f64>,
    pub n_max_used: usize,
}

impl From<&SteadyStateResult> for QmePoint {
    fn from(r: &SteadyStateResult) -> Self {
        QmePoint {
            n_s: r.n_s,
            t_a: r.t_a,
            g2_0: r.g2_0,
            n_max_used: r.n_max_used,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub axis_value: f64,
    /// Ascending in `n_s`; `None` when the engine is off.
    pub mfa: Option<Result<Vec<MfaBranch>, SweepError>>,
    pub qme: Option<Result<QmePoint, SweepError>>,
}

impl SpectrumPoint {
    pub fn branches(&self) -> &[MfaBranch] {
        match &self.mfa {
            Some(Ok(b)) => b,
            _ => &[],
        }
    }

    pub fn lowest_stable(&self) -> Option<&MfaBranch> {
        self.branches().iter().find(|b| b.stability.is_stable())
    }

    pub fn qme_point(&self) -> Option<&QmePoint> {
        match &self.qme {
            Some(Ok(q)) => Some(q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Mfa,
    Qme,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Mfa => "mfa",
            Engine::Qme => "qme",
        }
    }
}

/// Interior local maximum of a transmission curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub engine: Engine,
    pub axis_value: f64,
    pub t_a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub axis: AxisRange,
    pub points: Vec<SpectrumPoint>,
    /// Peaks of the lowest stable MFA branch, then of the QME curve.
    pub peaks: Vec<Peak>,
}

impl SpectrumResult {
    pub fn peaks_of(&self, engine: Engine) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(move |p| p.engine == engine)
    }
}

/// Strict interior maxima (`v[i-1] < v[i] >= v[i+1]`) of a sampled curve.
/// Missing samples break the neighbourhood.
pub fn local_maxima(xs: &[f64], ys: &[Option<f64>]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        if let (Some(a), Some(b), Some(c)) = (ys[i - 1], ys[i], ys[i + 1]) {
            if a < b && b >= c {
                out.push((xs[i], b));
            }
        }
    }
    out
}

fn mfa_point(params: &SystemParams) -> Result<Vec<MfaBranch>, SweepError> {
    Ok(solve_steady_states(params)?
        .iter()
        .map(|fp| MfaBranch {
            n_s: fp.n_s,
            t_a: transmission(fp.n_s, params).ok(),
            stability: fp.stability,
        })
        .collect())
}

fn qme_point(params: &SystemParams, policy: &CutoffPolicy) -> Result<QmePoint, SweepError> {
    Ok(QmePoint::from(&solve_with_adaptive_cutoff(params, policy)?))
}

pub fn sweep_1d(spec: &SweepSpec) -> Result<SpectrumResult, SweepError> {
    spec.validate(1)?;
    let axis = spec.axes[0];
    let points: Vec<SpectrumPoint> = (0..axis.resolution)
        .into_par_iter()
        .map(|i| {
            let v = axis.value(i);
            let p = spec.base.with(axis.axis, v);
            SpectrumPoint {
                axis_value: v,
                mfa: spec.engines.mfa.then(|| mfa_point(&p)),
                qme: spec.engines.qme.then(|| qme_point(&p, &spec.policy)),
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.axis_value).collect();
    let mut peaks = Vec::new();
    if spec.engines.mfa {
        let ys: Vec<Option<f64>> = points.iter().map(|p| p.lowest_stable().and_then(|b| b.t_a)).collect();
        peaks.extend(local_maxima(&xs, &ys).into_iter().map(|(x, y)| Peak {
            engine: Engine::Mfa,
            axis_value: x,
            t_a: y,
        }));
    }
    if spec.engines.qme {
        let ys: Vec<Option<f64>> = points.iter().map(|p| p.qme_point().and_then(|q| q.t_a)).collect();
        peaks.extend(local_maxima(&xs, &ys).into_iter().map(|(x, y)| Peak {
            engine: Engine::Qme,
            axis_value: x,
            t_a: y,
        }));
    }
    Ok(SpectrumResult { axis, points, peaks })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellFlag {
    Ok,
    /// A root sits on a saddle-node fold (merged, marginal or unpolished),
    /// so the count may be even.
    Fold,
    Error(SweepError),
}

impl CellFlag {
    pub fn name(&self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::Fold => "fold",
            CellFlag::Error(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    pub n_solutions: usize,
    pub n_stable: usize,
    pub n_s_lowest: Option<f64>,
    pub flag: CellFlag,
    pub qme: Option<Result<QmePoint, SweepError>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub x: AxisRange,
    pub y: AxisRange,
    /// Row-major with x fastest: cell `(ix, iy)` is at `iy * nx + ix`.
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, ix: usize, iy: usize) -> &PhaseCell {
        &self.cells[iy * self.x.resolution + ix]
    }

    /// Number of cells for each solution count.
    pub fn histogram(&self) -> std::collections::BTreeMap<usize, usize> {
        let mut h = std::collections::BTreeMap::new();
        for c in &self.cells {
            if !matches!(c.flag, CellFlag::Error(_)) {
                *h.entry(c.n_solutions).or_insert(0) += 1;
            }
        }
        h
    }
}

/// Which of `total` cells get a QME solve under `budget`.
fn qme_stride(total: usize, budget: usize) -> Option<usize> {
    (budget > 0).then(|| total.div_ceil(budget).max(1))
}

fn phase_cell(spec: &SweepSpec, x: f64, y: f64, with_qme: bool) -> PhaseCell {
    let p = spec.base.with(spec.axes[0].axis, x).with(spec.axes[1].axis, y);
    let qme = with_qme.then(|| qme_point(&p, &spec.policy));
    match solve_steady_states(&p) {
        Ok(roots) => {
            let fold = roots.iter().any(|r| r.merged || !r.polished || r.stability == Stability::Marginal);
            PhaseCell {
                x,
                y,
                n_solutions: roots.len(),
                n_stable: roots.iter().filter(|r| r.stability.is_stable()).count(),
                n_s_lowest: roots.iter().find(|r| r.stability.is_stable()).map(|r| r.n_s),
                flag: if fold { CellFlag::Fold } else { CellFlag::Ok },
                qme,
            }
        }
        Err(e) => PhaseCell {
            x,
            y,
            n_solutions: 0,
            n_stable: 0,
            n_s_lowest: None,
            flag: CellFlag::Error(e.into()),
            qme,
        },
    }
}

pub fn phase_diagram_2d(spec: &SweepSpec) -> Result<PhaseDiagram, SweepError> {
    spec.validate(2)?;
    let (x, y) = (spec.axes[0], spec.axes[1]);
    let total = x.resolution * y.resolution;
    let stride = if spec.engines.qme { qme_stride(total, spec.qme_cell_budget) } else { None };
    let cells = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx % x.resolution, idx / x.resolution);
            let with_qme = stride.is_some_and(|s| idx % s == 0);
            phase_cell(spec, x.value(ix), y.value(iy), with_qme)
        })
        .collect();
    Ok(PhaseDiagram { x, y, cells })
}
