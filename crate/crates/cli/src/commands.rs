use std::path::Path;

use cavity_eit::meanfield::hysteresis_scan;
use cavity_eit::model::{build_operators, HilbertSpace};
use cavity_eit::qme::{build_liouvillian, g2_tau, solve_with_adaptive_cutoff, uniform_tau_grid};
use cavity_eit::sweep::{phase_diagram_2d, sweep_1d, Engine, SpectrumResult, SweepSpec};
use cavity_eit::validate::{self, Fault};
use cavity_eit::Axis;

use crate::config::RunConfig;
use crate::output::{self, write};
use crate::svg::{self, Heatmap, Plot, Series, Style, PALETTE};
use crate::CliError;

fn solver<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Solver(e.to_string())
}

fn axis_label(axis: Axis) -> String {
    format!("{} / kappa", axis.name())
}

fn run_1d(cfg: &RunConfig) -> Result<SpectrumResult, CliError> {
    let spec = SweepSpec {
        policy: cfg.policy,
        ..SweepSpec::one_axis(cfg.params, cfg.x, cfg.engines)
    };
    sweep_1d(&spec).map_err(solver)
}

fn report_peaks(r: &SpectrumResult) {
    for engine in [Engine::Mfa, Engine::Qme] {
        for p in r.peaks_of(engine) {
            eprintln!("peak {} at {} = {:.6} (T_a {:.6e})", engine.name(), r.axis.axis.name(), p.axis_value, p.t_a);
        }
    }
}

/// Transmission, or photon number when `photons` is set.
fn spectrum_plot(r: &SpectrumResult, cfg: &RunConfig, title: &str, photons: bool) -> Plot {
    let scale = cfg.norm.scale();
    let value = |n: f64, t: Option<f64>| if photons { Some(n) } else { t.map(|t| t * scale) };
    let mut series = Vec::new();
    let max_branches = r.points.iter().map(|p| p.branches().len()).max().unwrap_or(0);
    for k in 0..max_branches {
        for stable in [true, false] {
            let points: Vec<(f64, f64)> = r
                .points
                .iter()
                .filter_map(|p| p.branches().get(k).map(|b| (p.axis_value, b)))
                .filter(|(_, b)| b.stability.is_stable() == stable)
                .filter_map(|(x, b)| value(b.n_s, b.t_a).map(|v| (x, v)))
                .collect();
            if !points.is_empty() {
                series.push(Series {
                    label: format!("MFA branch {} ({})", k + 1, if stable { "stable" } else { "unstable" }),
                    color: if stable { PALETTE[0] } else { PALETTE[3] },
                    style: Style::Dots,
                    points,
                });
            }
        }
    }
    let qme: Vec<(f64, f64)> = r
        .points
        .iter()
        .filter(|p| p.qme.is_some())
        .map(|p| (p.axis_value, p.qme_point().and_then(|q| value(q.n_s, q.t_a)).unwrap_or(f64::NAN)))
        .collect();
    if !qme.is_empty() {
        series.push(Series {
            label: "QME".into(),
            color: PALETTE[1],
            style: Style::Line,
            points: qme,
        });
    }
    Plot {
        title: title.into(),
        x_label: axis_label(r.axis.axis),
        y_label: if photons { "n_s" } else { "T_a" }.into(),
        series,
    }
}

fn g2_plot(r: &SpectrumResult) -> Option<Plot> {
    let points: Vec<(f64, f64)> = r
        .points
        .iter()
        .filter(|p| p.qme.is_some())
        .map(|p| (p.axis_value, p.qme_point().and_then(|q| q.g2_0).unwrap_or(f64::NAN)))
        .collect();
    (!points.is_empty()).then(|| Plot {
        title: "QME g2(0)".into(),
        x_label: axis_label(r.axis.axis),
        y_label: "g2(0)".into(),
        series: vec![Series {
            label: "QME".into(),
            color: PALETTE[1],
            style: Style::Line,
            points,
        }],
    })
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let r = run_1d(cfg)?;
    report_peaks(&r);
    write(out, "spectrum.csv", &output::spectrum_csv(&r, cfg.norm.scale()))?;
    write(out, "spectrum.svg", &svg::line_plot(&spectrum_plot(&r, cfg, "transmission spectrum", false)))?;
    if let Some(p) = g2_plot(&r) {
        write(out, "spectrum_g2.svg", &svg::line_plot(&p))?;
    }
    Ok(())
}

pub fn scurve(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let r = run_1d(cfg)?;
    let values = cfg.x.values();
    let (up, down) = hysteresis_scan(&cfg.params, cfg.x.axis, &values).map_err(solver)?;
    for tr in [&up, &down] {
        for j in tr.jumps() {
            eprintln!("{} jump at {} = {:.6}: n_s {:.6e} -> {:.6e}", tr.direction.name(), cfg.x.axis.name(), j.axis_value, j.from, j.to);
        }
    }
    write(out, "scurve.csv", &output::spectrum_csv(&r, cfg.norm.scale()))?;
    write(out, "hysteresis.csv", &output::hysteresis_csv(&[&up, &down]))?;
    let mut plot = spectrum_plot(&r, cfg, "S-curve", true);
    for (tr, color) in [(&up, PALETTE[2]), (&down, PALETTE[4])] {
        plot.series.push(Series {
            label: format!("scan {}", tr.direction.name()),
            color,
            style: Style::Line,
            points: tr.axis_values.iter().copied().zip(tr.n_s.iter().copied()).collect(),
        });
    }
    write(out, "scurve.svg", &svg::line_plot(&plot))?;
    Ok(())
}

pub fn phase(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let spec = SweepSpec {
        engines: cfg.engines,
        policy: cfg.policy,
        qme_cell_budget: cfg.qme_cell_budget,
        ..SweepSpec::two_axes(cfg.params, cfg.x, cfg.y)
    };
    let d = phase_diagram_2d(&spec).map_err(solver)?;
    let hist = d.histogram();
    eprintln!(
        "solution counts: {}",
        hist.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
    );
    write(out, "phase.csv", &output::phase_csv(&d))?;
    if let Some(q) = output::phase_qme_csv(&d, cfg.norm.scale()) {
        write(out, "phase_qme.csv", &q)?;
    }
    let h = Heatmap {
        title: "number of mean-field solutions".into(),
        x_label: axis_label(d.x.axis),
        y_label: axis_label(d.y.axis),
        nx: d.x.resolution,
        ny: d.y.resolution,
        x: (d.x.lo, d.x.hi),
        y: (d.y.lo, d.y.hi),
        classes: d
            .cells
            .iter()
            .map(|c| (!matches!(c.flag, cavity_eit::sweep::CellFlag::Error(_))).then_some(c.n_solutions))
            .collect(),
        legend: hist.keys().map(|&k| (k, format!("{k} solutions"))).collect(),
    };
    write(out, "phase.svg", &svg::heatmap(&h))?;
    Ok(())
}

pub fn g2tau(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let r = solve_with_adaptive_cutoff(&cfg.params, &cfg.policy).map_err(solver)?;
    if r.g2_0.is_none() {
        return Err(CliError::Solver(format!(
            "mean photon number {:e} is below the floor, g2(tau) is undefined",
            r.n_s
        )));
    }
    let ops = build_operators(HilbertSpace::new(r.n_max_used));
    let l = build_liouvillian(&cfg.params, &ops).map_err(solver)?;
    let series = g2_tau(&r.rho_s, &l, &ops, &uniform_tau_grid(cfg.tau_max, cfg.tau_points)).map_err(solver)?;
    if !series.converged {
        eprintln!("warning: g2(tau) step refinement did not reach tolerance (step {:e})", series.step);
    }
    eprintln!("n_max {}, n_s {:.6e}, g2(0) {:.6}, g2(tau_max) {:.6}", r.n_max_used, r.n_s, series.g2[0], series.tail());
    write(out, "g2.csv", &output::g2_csv(&series.tau, &series.g2))?;
    let plot = Plot {
        title: "g2(tau)".into(),
        x_label: "tau kappa".into(),
        y_label: "g2".into(),
        series: vec![Series {
            label: "QME".into(),
            color: PALETTE[1],
            style: Style::Line,
            points: series.tau.iter().copied().zip(series.g2.iter().copied()).collect(),
        }],
    };
    write(out, "g2.svg", &svg::line_plot(&plot))?;
    Ok(())
}

/// Number of failed checks.
pub fn validate(only: Option<&str>, fault: Option<&str>) -> Result<usize, CliError> {
    let fault = match fault {
        None => None,
        Some(f) => Some(Fault::parse(f).ok_or_else(|| CliError::Config(format!("unknown fault `{f}`")))?),
    };
    let ids: Option<Vec<String>> = only.map(|s| s.split(',').map(|x| x.trim().to_string()).collect());
    let outcomes = validate::run(ids.as_deref(), fault).map_err(CliError::Config)?;
    for o in &outcomes {
        println!("{o}");
    }
    let failures = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failures, outcomes.len());
    Ok(failures)
}
