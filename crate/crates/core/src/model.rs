//! System parameters, truncated Hilbert space, operators and the atom-cavity
//! Hamiltonian.
//!
//! All rates and detunings are measured in units of the cavity decay rate κ.
//! The basis is atom-major: the atomic level is the slow index and the Fock
//! index the fast one, so state `|level, n⟩` sits at `level * (n_max + 1) + n`
//! with levels ordered `|1⟩, |2⟩, |3⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParam {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("operator dimension {found} does not match Hilbert space dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Physical parameters in units of κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Atom-cavity coupling on |1⟩ ↔ |3⟩.
    pub g: f64,
    /// Cavity decay rate; 1 after normalization.
    pub kappa: f64,
    pub gamma13: f64,
    pub gamma23: f64,
    /// Control-field Rabi frequency Ω on |2⟩ ↔ |3⟩.
    pub omega: f64,
    /// Cavity drive amplitude η.
    pub eta: f64,
    /// Cavity-light detuning Δc = ωc − ωp.
    pub delta_c: f64,
    /// Optical Stark shift U0.
    pub u0: f64,
}

impl Default for SystemParams {
    /// g = 4, γ13 = γ23 = 0.047, Ω = 0.35 g, η = 0.1, Δc = U0 = 0.
    fn default() -> Self {
        Self {
            g: 4.0,
            kappa: 1.0,
            gamma13: 0.047,
            gamma23: 0.047,
            omega: 1.4,
            eta: 0.1,
            delta_c: 0.0,
            u0: 0.0,
        }
    }
}

impl SystemParams {
    /// Builds parameters from values in an arbitrary frequency unit, dividing
    /// everything by `kappa` so that the stored κ is exactly 1.
    #[allow(clippy::too_many_arguments)]
    pub fn from_physical(
        kappa: f64,
        g: f64,
        gamma13: f64,
        gamma23: f64,
        omega: f64,
        eta: f64,
        delta_c: f64,
        u0: f64,
    ) -> Result<Self, ModelError> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(ModelError::InvalidParam {
                name: "kappa",
                requirement: "positive and finite",
                value: kappa,
            });
        }
        let p = Self {
            g: g / kappa,
            kappa: 1.0,
            gamma13: gamma13 / kappa,
            gamma23: gamma23 / kappa,
            omega: omega / kappa,
            eta: eta / kappa,
            delta_c: delta_c / kappa,
            u0: u0 / kappa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Converts ratios quoted relative to g (Ω/g, Δc/g, U0/g) into κ units.
    /// For example Ω/g = 0.35 with g = 4 gives Ω = 1.4.
    pub fn with_g_ratios(mut self, omega_over_g: f64, delta_c_over_g: f64, u0_over_g: f64) -> Self {
        self.omega = omega_over_g * self.g;
        self.delta_c = delta_c_over_g * self.g;
        self.u0 = u0_over_g * self.g;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let nonneg = [
            ("g", self.g),
            ("gamma13", self.gamma13),
            ("gamma23", self.gamma23),
            ("omega", self.omega),
            ("eta", self.eta),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParam {
                    name,
                    requirement: "non-negative and finite",
                    value,
                });
            }
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(ModelError::InvalidParam {
                name: "kappa",
                requirement: "positive and finite",
                value: self.kappa,
            });
        }
        for (name, value) in [("delta_c", self.delta_c), ("u0", self.u0)] {
            if !value.is_finite() {
                return Err(ModelError::InvalidParam {
                    name,
                    requirement: "finite",
                    value,
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::DeltaC => self.delta_c,
            Axis::U0 => self.u0,
            Axis::Eta => self.eta,
            Axis::Omega => self.omega,
        }
    }

    /// Copy of `self` with one swept parameter replaced.
    pub fn with(&self, axis: Axis, value: f64) -> Self {
        let mut p = *self;
        match axis {
            Axis::DeltaC => p.delta_c = value,
            Axis::U0 => p.u0 = value,
            Axis::Eta => p.eta = value,
            Axis::Omega => p.omega = value,
        }
        p
    }
}

/// Parameters that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    DeltaC,
    U0,
    Eta,
    Omega,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::DeltaC => "delta_c",
            Axis::U0 => "u0",
            Axis::Eta => "eta",
            Axis::Omega => "omega",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "delta_c" => Some(Axis::DeltaC),
            "u0" => Some(Axis::U0),
            "eta" => Some(Axis::Eta),
            "omega" => Some(Axis::Omega),
            _ => None,
        }
    }

    /// Whether values on this axis are quoted relative to g under `--g-units`.
    pub fn is_g_relative(self) -> bool {
        matches!(self, Axis::DeltaC | Axis::U0 | Axis::Omega)
    }
}

/// Atomic level, in basis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    One = 0,
    Two = 1,
    Three = 2,
}

pub const LEVELS: [Level; 3] = [Level::One, Level::Two, Level::Three];

/// Truncated space: three atomic levels ⊗ Fock states `0..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    pub n_max: usize,
}

impl HilbertSpace {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        3 * self.fock_dim()
    }

    pub fn index(&self, level: Level, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        level as usize * self.fock_dim() + n
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn decompose(&self, idx: usize) -> (Level, usize) {
        let level = LEVELS[idx / self.fock_dim()];
        (level, idx % self.fock_dim())
    }
}

pub type CMatrix = DMatrix<C64>;

/// Dense operators on the truncated space.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub space: HilbertSpace,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    /// `sigma[i][j] = |i+1⟩⟨j+1| ⊗ 1`.
    pub sigma: [[CMatrix; 3]; 3],
}

impl OperatorSet {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn sigma(&self, i: Level, j: Level) -> &CMatrix {
        &self.sigma[i as usize][j as usize]
    }

    /// a†a.
    pub fn number(&self) -> CMatrix {
        &self.a_dag * &self.a
    }
}

pub fn build_operators(space: HilbertSpace) -> OperatorSet {
    let dim = space.dim();
    let mut a = CMatrix::zeros(dim, dim);
    for level in LEVELS {
        for n in 1..=space.n_max {
            a[(space.index(level, n - 1), space.index(level, n))] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    let a_dag = a.adjoint();
    let sigma = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = CMatrix::zeros(dim, dim);
            for n in 0..=space.n_max {
                s[(space.index(LEVELS[i], n), space.index(LEVELS[j], n))] = C64::new(1.0, 0.0);
            }
            s
        })
    });
    OperatorSet {
        space,
        a,
        a_dag,
        sigma,
    }
}

/// H = Δc(a†a + σ33 + σ22) + g(a†σ13 + aσ31) + Ω(σ23 + σ32) + U0 a†aσ11 + η(a† + a).
pub fn build_hamiltonian(params: &SystemParams, ops: &OperatorSet) -> Result<CMatrix, ModelError> {
    let dim = ops.space.dim();
    for m in [&ops.a, &ops.a_dag] {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(ModelError::DimensionMismatch {
                expected: dim,
                found: m.nrows(),
            });
        }
    }
    for row in &ops.sigma {
        for m in row {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(ModelError::DimensionMismatch {
                    expected: dim,
                    found: m.nrows(),
                });
            }
        }
    }
    use Level::*;
    let re = |x: f64| C64::new(x, 0.0);
    let num = ops.number();
    let s = |i, j| ops.sigma(i, j);

    let mut h = (&num + s(Three, Three) + s(Two, Two)) * re(params.delta_c);
    h += (&ops.a_dag * s(One, Three) + &ops.a * s(Three, One)) * re(params.g);
    h += (s(Two, Three) + s(Three, Two)) * re(params.omega);
    h += (&num * s(One, One)) * re(params.u0);
    h += (&ops.a_dag + &ops.a) * re(params.eta);
    Ok(h)
}
