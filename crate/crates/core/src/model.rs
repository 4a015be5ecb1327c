//! Dimensionless description of the waveguide and the propagating particle.
//!
//! Units: ħ = m = c = 1, energies in mc², lengths in units of the cylinder
//! radius `a`. The radius itself enters only through the Compton ratio
//! `C = a·mc/ħ`, so every wavenumber is reported as `κa` or `βa`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest accepted well depth `eΔV/mc²`. Deeper wells leave the
/// single-particle regime (pair creation at the step).
pub const KLEIN_GUARD: f64 = 0.1;

/// A strong inequality `a ≪ b` is considered satisfied when `b/a >= 5`.
pub const MUCH_LESS_FACTOR: f64 = 5.0;

/// Geometry and depth of the cylindrical step potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideParams {
    compton_ratio: f64,
    v0: f64,
    dv: f64,
    gamma_z: f64,
}

impl WaveguideParams {
    /// `compton_ratio` is `2πa/λ` with λ the Compton wavelength, `v0` the
    /// well offset `eV₀/mc²`, `dv` the depth `eΔV/mc²`, `gamma_z` the
    /// longitudinal Lorentz factor used by the relativistic groups.
    pub fn new(compton_ratio: f64, v0: f64, dv: f64, gamma_z: f64) -> Result<Self> {
        let finite = [compton_ratio, v0, dv, gamma_z].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("waveguide parameters must be finite".into()));
        }
        if compton_ratio <= 0.0 {
            return Err(Error::Config(format!("compton_ratio must be > 0, got {compton_ratio}")));
        }
        if dv <= 0.0 {
            return Err(Error::Config(format!("dv must be > 0 (no well, no bound state), got {dv}")));
        }
        if dv >= KLEIN_GUARD {
            return Err(Error::Config(format!(
                "dv must be < {KLEIN_GUARD} to stay in the single-particle regime, got {dv}"
            )));
        }
        if dv > v0 {
            return Err(Error::Config(format!("dv must not exceed v0 (dv = {dv}, v0 = {v0})")));
        }
        if gamma_z < 1.0 {
            return Err(Error::Config(format!("gamma_z must be >= 1, got {gamma_z}")));
        }
        Ok(Self { compton_ratio, v0, dv, gamma_z })
    }

    /// Builds parameters for a target well strength `R`, solving
    /// `R² = 2 C² dv` for the Compton ratio.
    pub fn from_r(r: f64, v0: f64, dv: f64, gamma_z: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Config(format!("R must be finite and > 0, got {r}")));
        }
        if !(dv.is_finite() && dv > 0.0) {
            return Err(Error::Config(format!("dv must be > 0 (no well, no bound state), got {dv}")));
        }
        Self::new(r / (2.0 * dv).sqrt(), v0, dv, gamma_z)
    }

    pub fn compton_ratio(&self) -> f64 {
        self.compton_ratio
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn gamma_z(&self) -> f64 {
        self.gamma_z
    }

    /// `R = sqrt(2 C² dv)`, the nonrelativistic well strength.
    pub fn r(&self) -> f64 {
        (2.0 * self.compton_ratio * self.compton_ratio * self.dv).sqrt()
    }

    /// `R_γ = sqrt(2 γ_z C² dv)`.
    pub fn r_gamma(&self) -> f64 {
        (2.0 * self.gamma_z * self.compton_ratio * self.compton_ratio * self.dv).sqrt()
    }

    /// `ε = γ_z dv / 2`, the small parameter of the Dirac boundary condition.
    pub fn epsilon(&self) -> f64 {
        0.5 * self.gamma_z * self.dv
    }
}

/// Longitudinal motion of the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    vz_over_c: f64,
}

impl OperatingPoint {
    pub fn new(vz_over_c: f64) -> Result<Self> {
        if !(vz_over_c > 0.0 && vz_over_c < 1.0) {
            return Err(Error::Config(format!("vz_over_c must lie in (0, 1), got {vz_over_c}")));
        }
        Ok(Self { vz_over_c })
    }

    pub fn vz_over_c(&self) -> f64 {
        self.vz_over_c
    }

    /// Mean propagation constant `β̄a = γ_z C v_z/c`.
    pub fn beta_bar_a(&self, params: &WaveguideParams) -> f64 {
        params.gamma_z() * params.compton_ratio() * self.vz_over_c
    }
}

/// Spin projection `σ = ±1` along the cylinder axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn from_sign(sigma: i32) -> Result<Self> {
        match sigma {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            other => Err(Error::Domain(format!("sigma must be +1 or -1, got {other}"))),
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Relative orientation of spin and orbital angular momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alignment {
    Parallel,
    AntiParallel,
}

impl Alignment {
    /// `σ m_ℓ / |m_ℓ|`.
    pub fn sign(self) -> i32 {
        match self {
            Alignment::Parallel => 1,
            Alignment::AntiParallel => -1,
        }
    }
}

/// Quantum labels of one transverse bound state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeSpec {
    pub m_ell: i32,
    pub spin: Spin,
    pub radial_index: usize,
}

impl ModeSpec {
    pub fn new(m_ell: i32, spin: Spin, radial_index: usize) -> Self {
        Self { m_ell, spin, radial_index }
    }

    pub fn m_abs(&self) -> u32 {
        self.m_ell.unsigned_abs()
    }

    /// `None` when `m_ℓ = 0`.
    pub fn alignment(&self) -> Option<Alignment> {
        match (self.m_ell.signum() * self.spin.sign()).cmp(&0) {
            std::cmp::Ordering::Greater => Some(Alignment::Parallel),
            std::cmp::Ordering::Less => Some(Alignment::AntiParallel),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// `m_j = m_ℓ + σ/2`.
    pub fn m_j(&self) -> f64 {
        self.m_ell as f64 + 0.5 * self.spin.sign() as f64
    }
}

/// A violated strong inequality of the bound, paraxial, single-particle window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// `½ m v_T² ≪ eV₀` fails; `ratio = eV₀ / (½ m v_T²)`.
    TransverseEnergyNotSmall { ratio: f64 },
    /// `eV₀ ≪ |κ/β| mc²` fails; `ratio = |κ/β| mc² / eV₀`.
    PotentialNotSmall { ratio: f64 },
    /// `κ ≪ β` fails; `ratio = β/κ`.
    NotParaxial { ratio: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::TransverseEnergyNotSmall { ratio } => {
                write!(f, "transverse-kinetic<<V0 violated (ratio {ratio:.3})")
            }
            RegimeWarning::PotentialNotSmall { ratio } => {
                write!(f, "V0<<|kappa/beta|mc2 violated (ratio {ratio:.3})")
            }
            RegimeWarning::NotParaxial { ratio } => write!(f, "kappa<<beta violated (ratio {ratio:.3})"),
        }
    }
}

/// Checks a solved transverse wavenumber `u = κa` against the strong
/// inequalities `½mv_T² ≪ eV₀ ≪ |κ/β|mc²` and `κ ≪ β`. Advisory only.
pub fn validate_regime(params: &WaveguideParams, op: &OperatingPoint, u: f64) -> Vec<RegimeWarning> {
    let mut out = Vec::new();
    let c = params.compton_ratio();
    let beta_a = op.beta_bar_a(params);
    let transverse = 0.5 * (u / c).powi(2);
    let ratio = params.v0() / transverse;
    if ratio < MUCH_LESS_FACTOR {
        out.push(RegimeWarning::TransverseEnergyNotSmall { ratio });
    }
    let ratio = (u / beta_a) / params.v0();
    if ratio < MUCH_LESS_FACTOR {
        out.push(RegimeWarning::PotentialNotSmall { ratio });
    }
    let ratio = beta_a / u;
    if ratio < MUCH_LESS_FACTOR {
        out.push(RegimeWarning::NotParaxial { ratio });
    }
    out
}
