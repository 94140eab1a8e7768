//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use cavity_eit::qme::CutoffPolicy;
use cavity_eit::sweep::{AxisRange, Engines};
use cavity_eit::{Axis, SystemParams};

use crate::CliError;

/// Every key accepted in config files and `--set`.
pub const KEYS: &[&str] = &[
    "g",
    "kappa",
    "gamma13",
    "gamma23",
    "omega",
    "eta",
    "delta_c",
    "u0",
    "axis",
    "lo",
    "hi",
    "resolution",
    "y_axis",
    "y_lo",
    "y_hi",
    "y_resolution",
    "engines",
    "cutoff_start",
    "cutoff_growth",
    "cutoff_threshold",
    "cutoff_cap",
    "cutoff_rel_tol",
    "qme_cell_budget",
    "tau_max",
    "tau_points",
    "transmission_norm",
    "g_units",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Scurve,
    Phase,
    G2tau,
}

/// How `T_a` is normalized in output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionNorm {
    /// `n_s / (η/κ)²`.
    Printed,
    /// `n_s / (2η/κ)²`, unity at the empty-cavity resonance.
    EmptyCavity,
}

impl TransmissionNorm {
    pub fn scale(self) -> f64 {
        match self {
            TransmissionNorm::Printed => 1.0,
            TransmissionNorm::EmptyCavity => 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub x: AxisRange,
    /// Second axis, phase diagrams only.
    pub y: AxisRange,
    pub engines: Engines,
    pub policy: CutoffPolicy,
    pub qme_cell_budget: usize,
    pub tau_max: f64,
    pub tau_points: usize,
    pub norm: TransmissionNorm,
}

/// Raw key/value pairs, later entries overriding earlier ones.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected key = value", lineno + 1)))?;
            self.insert(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn load(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.parse_text(&text, &path.display().to_string())
    }

    /// One `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
        self.insert(k.trim(), v.trim()).map_err(CliError::Config)
    }

    pub fn insert(&mut self, key: &str, value: &str) -> Result<(), String> {
        if !KEYS.contains(&key) {
            return Err(format!("unknown key `{key}`"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn axis(&self, key: &str, default: Axis) -> Result<Axis, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => Axis::parse(v).ok_or_else(|| CliError::Config(format!("unknown axis `{v}` for `{key}`"))),
        }
    }
}

pub fn parse_engines(s: &str) -> Result<Engines, CliError> {
    let mut e = Engines { mfa: false, qme: false };
    for part in s.split(',').map(str::trim) {
        match part {
            "mfa" => e.mfa = true,
            "qme" => e.qme = true,
            _ => return Err(CliError::Config(format!("unknown engine `{part}`"))),
        }
    }
    Ok(e)
}

/// Comma-separated floats, e.g. `--range -6,6`.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Config(format!("invalid {what} `{s}`"))))
        .collect()
}

struct Defaults {
    x: (Axis, f64, f64, usize),
    y: (Axis, f64, f64, usize),
    engines: &'static str,
}

fn defaults(cmd: Command) -> Defaults {
    let none = (Axis::U0, 0.0, 32.0, 200);
    match cmd {
        Command::Spectrum => Defaults { x: (Axis::DeltaC, -6.0, 6.0, 601), y: none, engines: "mfa,qme" },
        Command::Scurve => Defaults { x: (Axis::Eta, 0.0, 0.3, 301), y: none, engines: "mfa,qme" },
        Command::Phase => Defaults { x: (Axis::DeltaC, 0.0, 8.0, 200), y: none, engines: "mfa" },
        Command::G2tau => Defaults { x: (Axis::DeltaC, 0.0, 0.0, 2), y: none, engines: "qme" },
    }
}

impl RawConfig {
    /// Resolves defaults and unit conversion for `cmd`.
    pub fn resolve(&self, cmd: Command) -> Result<RunConfig, CliError> {
        let d = defaults(cmd);
        let g_units = self.get_or("g_units", false)?;
        let base = SystemParams::default();
        let g: f64 = self.get_or("g", base.g)?;
        // quantities that may be quoted relative to g
        let scale = |axis: Axis| if g_units && axis.is_g_relative() { g } else { 1.0 };
        let mut params = SystemParams {
            g,
            kappa: self.get_or("kappa", base.kappa)?,
            gamma13: self.get_or("gamma13", base.gamma13)?,
            gamma23: self.get_or("gamma23", base.gamma23)?,
            omega: self.get_or("omega", base.omega / scale(Axis::Omega))? * scale(Axis::Omega),
            eta: self.get_or("eta", base.eta)?,
            delta_c: self.get_or("delta_c", base.delta_c)? * scale(Axis::DeltaC),
            u0: self.get_or("u0", base.u0)? * scale(Axis::U0),
        };
        if params.kappa != 1.0 {
            params = SystemParams::from_physical(
                params.kappa,
                params.g,
                params.gamma13,
                params.gamma23,
                params.omega,
                params.eta,
                params.delta_c,
                params.u0,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
        }
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let x_axis = match cmd {
            Command::Scurve => Axis::Eta,
            _ => self.axis("axis", d.x.0)?,
        };
        let x_default = if x_axis == d.x.0 { (d.x.1, d.x.2) } else { default_range(x_axis) };
        let x = AxisRange::new(
            x_axis,
            self.get_or("lo", x_default.0 / scale(x_axis))? * scale(x_axis),
            self.get_or("hi", x_default.1 / scale(x_axis))? * scale(x_axis),
            self.get_or("resolution", d.x.3)?,
        );
        let y_axis = self.axis("y_axis", d.y.0)?;
        let y_default = if y_axis == d.y.0 { (d.y.1, d.y.2) } else { default_range(y_axis) };
        let y = AxisRange::new(
            y_axis,
            self.get_or("y_lo", y_default.0 / scale(y_axis))? * scale(y_axis),
            self.get_or("y_hi", y_default.1 / scale(y_axis))? * scale(y_axis),
            self.get_or("y_resolution", self.get_or("resolution", d.y.3)?)?,
        );
        let engines = parse_engines(&self.get_or("engines", d.engines.to_string())?)?;
        let dp = if cmd == Command::G2tau { CutoffPolicy::default() } else { CutoffPolicy::sweep() };
        let policy = CutoffPolicy {
            start: self.get_or("cutoff_start", dp.start)?,
            growth: self.get_or("cutoff_growth", dp.growth)?,
            threshold: self.get_or("cutoff_threshold", dp.threshold)?,
            cap: self.get_or("cutoff_cap", dp.cap)?,
            rel_tol: self.get_or("cutoff_rel_tol", dp.rel_tol)?,
        };
        policy.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let norm = match self.get_or("transmission_norm", "printed".to_string())?.as_str() {
            "printed" => TransmissionNorm::Printed,
            "empty_cavity" => TransmissionNorm::EmptyCavity,
            other => return Err(CliError::Config(format!("unknown transmission_norm `{other}`"))),
        };
        let cfg = RunConfig {
            params,
            x,
            y,
            engines,
            policy,
            qme_cell_budget: self.get_or("qme_cell_budget", 0)?,
            tau_max: self.get_or("tau_max", 50.0)?,
            tau_points: self.get_or("tau_points", 201)?,
            norm,
        };
        cfg.check(cmd)?;
        Ok(cfg)
    }
}

fn default_range(axis: Axis) -> (f64, f64) {
    match axis {
        Axis::DeltaC => (-6.0, 6.0),
        Axis::U0 => (0.0, 32.0),
        Axis::Eta => (0.0, 3.0),
        Axis::Omega => (0.0, 6.0),
    }
}

impl RunConfig {
    fn check(&self, cmd: Command) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        match cmd {
            Command::Spectrum | Command::Scurve => {
                self.x.validate().map_err(|e| CliError::Config(e.to_string()))?;
                if self.x.hi == self.x.lo {
                    return bad(format!("{} range has zero width", self.x.axis.name()));
                }
                if !self.engines.mfa && !self.engines.qme {
                    return bad("no engine selected".into());
                }
            }
            Command::Phase => {
                self.x.validate().map_err(|e| CliError::Config(e.to_string()))?;
                self.y.validate().map_err(|e| CliError::Config(e.to_string()))?;
                if self.x.axis == self.y.axis {
                    return bad("axis and y_axis must differ".into());
                }
                if !self.engines.mfa {
                    return bad("phase diagrams need the mfa engine".into());
                }
            }
            Command::G2tau => {
                if !(self.tau_max > 0.0 && self.tau_max.is_finite()) || self.tau_points < 2 {
                    return bad("tau_max must be positive and tau_points at least 2".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(lines: &str) -> RawConfig {
        let mut r = RawConfig::default();
        r.parse_text(lines, "test").unwrap();
        r
    }

    #[test]
    fn defaults_are_documented_values() {
        let c = RawConfig::default().resolve(Command::Spectrum).unwrap();
        assert_eq!(c.params, SystemParams::default());
        assert_eq!((c.x.lo, c.x.hi, c.x.resolution), (-6.0, 6.0, 601));
        assert_eq!(c.engines, Engines::BOTH);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut r = RawConfig::default();
        assert!(r.parse_text("gamma = 0.1", "t").is_err());
        assert!(r.set("foo=1").is_err());
        assert!(r.set("eta").is_err());
    }

    #[test]
    fn comments_and_overrides() {
        let mut r = raw("# header\neta = 0.2  # drive\n\nu0=3\n");
        r.set("eta=0.4").unwrap();
        let c = r.resolve(Command::Spectrum).unwrap();
        assert_eq!(c.params.eta, 0.4);
        assert_eq!(c.params.u0, 3.0);
    }

    #[test]
    fn g_units_scale_relative_quantities() {
        let c = raw("g_units = true\nomega = 0.35\ndelta_c = -0.12\nu0 = 2\neta = 0.1").resolve(Command::Scurve).unwrap();
        assert!((c.params.omega - 1.4).abs() < 1e-15);
        assert!((c.params.delta_c + 0.48).abs() < 1e-15);
        assert_eq!(c.params.u0, 8.0);
        assert_eq!(c.params.eta, 0.1);
        assert_eq!(c.x.axis, Axis::Eta);
        let p = raw("g_units = true\naxis = u0\ny_axis = delta_c\nlo = 0\nhi = 8\ny_lo = 0\ny_hi = 2")
            .resolve(Command::Phase)
            .unwrap();
        assert_eq!((p.x.hi, p.y.hi), (32.0, 8.0));
    }

    #[test]
    fn physical_units_are_normalized() {
        let c = raw("kappa = 2\ng = 8\neta = 0.2\nomega = 2.8\ngamma13 = 0.094\ngamma23 = 0.094")
            .resolve(Command::Spectrum)
            .unwrap();
        assert_eq!(c.params.kappa, 1.0);
        assert_eq!(c.params.g, 4.0);
        assert_eq!(c.params.eta, 0.1);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in ["eta = -1", "engines = foo", "resolution = 1", "lo = 1\nhi = 1", "transmission_norm = x", "eta = abc"] {
            assert!(matches!(raw(text).resolve(Command::Spectrum), Err(CliError::Config(_))), "{text}");
        }
        assert!(raw("axis = u0\ny_axis = u0").resolve(Command::Phase).is_err());
        assert!(raw("engines = qme").resolve(Command::Phase).is_err());
        // a degenerate phase axis is allowed
        assert!(raw("y_lo = 0\ny_hi = 0").resolve(Command::Phase).is_ok());
    }

    #[test]
    fn lists_and_engines() {
        assert_eq!(parse_list::<f64>("-6, 6", "range").unwrap(), vec![-6.0, 6.0]);
        assert!(parse_list::<f64>("a,1", "range").is_err());
        assert_eq!(parse_engines("qme").unwrap(), Engines { mfa: false, qme: true });
    }
}
