//! CSV serialization. Numbers carry 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use cavity_eit::meanfield::{BranchTrace, MeanFieldError, Stability};
use cavity_eit::qme::QmeError;
use cavity_eit::sweep::{PhaseDiagram, SpectrumResult, SweepError};

use crate::CliError;

pub const SPECTRUM_HEADER: &str = "engine,axis_value,branch_index,n_s,T_a,stable,g2_0,status";
pub const HYSTERESIS_HEADER: &str = "direction,axis_value,n_s,jump";
pub const PHASE_HEADER: &str = "x,y,n_solutions,n_stable,n_s_lowest,flag";
pub const PHASE_QME_HEADER: &str = "x,y,n_s,T_a,g2_0,n_max_used,status";
pub const G2_HEADER: &str = "tau,g2";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Short status token for a failed point.
pub fn status_of(e: &SweepError) -> &'static str {
    match e {
        SweepError::Qme(QmeError::Truncation { .. }) => "truncation",
        SweepError::Qme(QmeError::DegenerateKernel { .. }) => "degenerate",
        SweepError::Qme(QmeError::NotPositive { .. }) => "not_positive",
        SweepError::MeanField(MeanFieldError::Eigen(_)) => "eigen",
        _ => "error",
    }
}

pub fn spectrum_csv(r: &SpectrumResult, t_scale: f64) -> String {
    let mut s = String::new();
    s.push_str(SPECTRUM_HEADER);
    s.push('\n');
    let t = |t: Option<f64>| opt(t.map(|v| v * t_scale));
    for p in &r.points {
        let x = num(p.axis_value);
        match &p.mfa {
            Some(Ok(branches)) => {
                for (i, b) in branches.iter().enumerate() {
                    let status = if b.stability == Stability::Marginal { "marginal" } else { "ok" };
                    let stable = u8::from(b.stability.is_stable());
                    let _ = writeln!(s, "mfa,{x},{},{},{},{stable},,{status}", i + 1, num(b.n_s), t(b.t_a));
                }
            }
            Some(Err(e)) => {
                let _ = writeln!(s, "mfa,{x},1,,,,,{}", status_of(e));
            }
            None => {}
        }
        match &p.qme {
            Some(Ok(q)) => {
                let _ = writeln!(s, "qme,{x},0,{},{},,{},ok", num(q.n_s), t(q.t_a), opt(q.g2_0));
            }
            Some(Err(e)) => {
                let _ = writeln!(s, "qme,{x},0,,,,,{}", status_of(e));
            }
            None => {}
        }
    }
    s
}

pub fn hysteresis_csv(traces: &[&BranchTrace]) -> String {
    let mut s = String::new();
    s.push_str(HYSTERESIS_HEADER);
    s.push('\n');
    for tr in traces {
        for ((x, n), j) in tr.axis_values.iter().zip(&tr.n_s).zip(&tr.jumped) {
            let _ = writeln!(s, "{},{},{},{}", tr.direction.name(), num(*x), num(*n), u8::from(*j));
        }
    }
    s
}

pub fn phase_csv(d: &PhaseDiagram) -> String {
    let mut s = String::new();
    s.push_str(PHASE_HEADER);
    s.push('\n');
    for c in &d.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(c.x),
            num(c.y),
            c.n_solutions,
            c.n_stable,
            opt(c.n_s_lowest),
            c.flag.name()
        );
    }
    s
}

/// `None` when no cell carries a QME solve.
pub fn phase_qme_csv(d: &PhaseDiagram, t_scale: f64) -> Option<String> {
    let mut s = String::new();
    s.push_str(PHASE_QME_HEADER);
    s.push('\n');
    let mut any = false;
    for c in &d.cells {
        let Some(q) = &c.qme else { continue };
        any = true;
        let (x, y) = (num(c.x), num(c.y));
        let _ = match q {
            Ok(q) => writeln!(
                s,
                "{x},{y},{},{},{},{},ok",
                num(q.n_s),
                opt(q.t_a.map(|v| v * t_scale)),
                opt(q.g2_0),
                q.n_max_used
            ),
            Err(e) => writeln!(s, "{x},{y},,,,,{}", status_of(e)),
        };
    }
    any.then_some(s)
}

pub fn g2_csv(tau: &[f64], g2: &[f64]) -> String {
    let mut s = String::new();
    s.push_str(G2_HEADER);
    s.push('\n');
    for (t, g) in tau.iter().zip(g2) {
        let _ = writeln!(s, "{},{}", num(*t), num(*g));
    }
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-6.0), "-6.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 4.123105625617661, -2.2e-300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt(None), "");
    }
}
