//! Schrödinger-level bound modes of the step well and their first-order
//! spin-orbit shifts.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{ModeSpec, OperatingPoint, WaveguideParams};
use crate::roots::{bessel_j_zeros, roots_between_poles};
use crate::specfun::{bessel_j, bessel_j_seq, bessel_k, bessel_k_seq_scaled, jratio, kratio};

/// A solved transverse mode of the scalar problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMode {
    pub m_abs: u32,
    pub radial_index: usize,
    /// Inside wavenumber `κ₀a`.
    pub u: f64,
    /// Outside decay constant `κ̃₀a`.
    pub w: f64,
    /// `N²a²`.
    pub norm_a2: f64,
}

impl ScalarMode {
    pub fn residual(&self) -> Result<f64> {
        characteristic_uw(self.m_abs, self.u, self.w)
    }

    /// Radial amplitude, `J_m(uρ)` inside and the matched `K_m(wρ)` tail
    /// outside. `rho` is in units of `a`.
    pub fn radial_amplitude(&self, rho: f64) -> Result<f64> {
        radial_amplitude(self.m_abs, self.u, self.w, rho)
    }

    /// `|ψ_T|²·a²` at radius `rho`, before any angular factor.
    pub fn density(&self, rho: f64) -> Result<f64> {
        Ok(self.norm_a2 * self.radial_amplitude(rho)?.powi(2))
    }
}

/// `J_m(uρ)` for `ρ ≤ 1`, `J_m(u)·K_m(wρ)/K_m(w)` beyond.
pub fn radial_amplitude(m_abs: u32, u: f64, w: f64, rho: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("radius must be finite and >= 0, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(if m_abs == 0 { 1.0 } else { 0.0 });
    }
    if rho <= 1.0 {
        bessel_j(m_abs, u * rho)
    } else {
        let ks = bessel_k_seq_scaled(m_abs, w * rho)?;
        let k1 = bessel_k_seq_scaled(m_abs, w)?;
        // Scaled values carry e^{wρ} and e^{w}; the ratio needs e^{-w(ρ-1)}.
        let ratio = ks[m_abs as usize] / k1[m_abs as usize] * (-w * (rho - 1.0)).exp();
        Ok(bessel_j(m_abs, u)? * ratio)
    }
}

/// `w = sqrt(R² - u²)`, requiring `0 < u < R`.
pub(crate) fn outside_decay(r: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < r) {
        return Err(Error::Domain(format!("u must lie in (0, {r}), got {u}")));
    }
    Ok(((r - u) * (r + u)).sqrt())
}

fn characteristic_uw(m_abs: u32, u: f64, w: f64) -> Result<f64> {
    Ok(u * jratio(m_abs, u)? - w * kratio(m_abs, w)?)
}

/// `F(u) = u J_{m+1}(u)/J_m(u) - w K_{m+1}(w)/K_m(w)` with `w = sqrt(R² - u²)`.
pub fn characteristic(m_abs: u32, r: f64, u: f64) -> Result<f64> {
    characteristic_uw(m_abs, u, outside_decay(r, u)?)
}

/// Roots of a characteristic function on `(0, r)`, bracketed between the
/// zeros of `J_{m_abs}`.
pub(crate) fn solve_on_open_interval<F>(f: &F, m_abs: u32, r: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let poles = bessel_j_zeros(m_abs, r)?;
    let lo = r * 1e-9;
    let hi = r * (1.0 - 1e-12);
    roots_between_poles(f, lo, hi, &poles)
}

/// All bound modes of angular order `m_abs`, ascending in `u`.
pub fn solve_scalar_modes(params: &WaveguideParams, m_abs: u32) -> Result<Vec<ScalarMode>> {
    solve_scalar_modes_at_r(params.r(), m_abs)
}

/// Same as [`solve_scalar_modes`] for a bare well strength `R`.
pub fn solve_scalar_modes_at_r(r: f64, m_abs: u32) -> Result<Vec<ScalarMode>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("R must be finite and > 0, got {r}")));
    }
    let f = |u: f64| characteristic(m_abs, r, u);
    let roots = solve_on_open_interval(&f, m_abs, r)?;
    roots
        .into_iter()
        .enumerate()
        .map(|(radial_index, u)| {
            let w = outside_decay(r, u)?;
            let norm_a2 = normalization(m_abs, u, w)?;
            Ok(ScalarMode { m_abs, radial_index, u, w, norm_a2 })
        })
        .collect()
}

/// `K_{m-1}K_{m+1}/K_m² - J_{m-1}J_{m+1}/J_m²`, the common bracket of the
/// normalization and the rotation rate.
pub fn soi_braces(m_abs: u32, u: f64, w: f64) -> Result<f64> {
    if !(u > 0.0 && w > 0.0) {
        return Err(Error::Domain(format!("u and w must be > 0, got u = {u}, w = {w}")));
    }
    let m = m_abs as usize;
    let j = bessel_j_seq(m_abs + 1, u)?;
    jratio(m_abs, u)?;
    let k = bessel_k_seq_scaled(m_abs + 1, w)?;
    let (j_lo, k_lo) = if m == 0 { (-j[1], k[1]) } else { (j[m - 1], k[m - 1]) };
    Ok(k_lo * k[m + 1] / (k[m] * k[m]) - j_lo * j[m + 1] / (j[m] * j[m]))
}

/// `N²a² = 1 / (π J_m(u)² · braces)`. The piecewise profile integrates to
/// this in closed form whether or not `u` is a root, so the bracket is
/// positive away from poles and a non-positive value means lost precision.
pub fn normalization(m_abs: u32, u: f64, w: f64) -> Result<f64> {
    let b = soi_braces(m_abs, u, w)?;
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Internal(format!(
            "normalization bracket {b} is not positive at u = {u}, w = {w}; spurious root"
        )));
    }
    let jm = bessel_j(m_abs, u)?;
    Ok(1.0 / (PI * jm * jm * b))
}

/// Recomputes `N²a²` for a solved mode.
pub fn normalize(mode: &ScalarMode) -> Result<f64> {
    normalization(mode.m_abs, mode.u, mode.w)
}

fn check_labels(mode: &ScalarMode, spec: &ModeSpec) -> Result<()> {
    if spec.m_abs() != mode.m_abs {
        return Err(Error::Domain(format!(
            "mode has |m| = {} but labels ask for m_ell = {}",
            mode.m_abs, spec.m_ell
        )));
    }
    Ok(())
}

/// First-order energy shift `δE/mc²` of the state `spec` built on `mode`.
pub fn energy_shift(mode: &ScalarMode, spec: &ModeSpec, params: &WaveguideParams) -> Result<f64> {
    check_labels(mode, spec)?;
    let c = params.compton_ratio();
    let jm = bessel_j(mode.m_abs, mode.u)?;
    let sm = (spec.spin.sign() * spec.m_ell) as f64;
    Ok(sm * 0.5 * PI * params.dv() * mode.norm_a2 * jm * jm / (c * c))
}

/// `δβa = -δE·C/(v_z/c)`, the propagation-constant shift at fixed energy.
pub fn beta_shift(d_e: f64, params: &WaveguideParams, op: &OperatingPoint) -> f64 {
    // Adding zero turns -0 into +0 for unshifted states.
    -d_e * params.compton_ratio() / op.vz_over_c() + 0.0
}

/// `Δβa = -|m| (c/v_z) dv / (2C) / braces`.
pub fn rotation_rate_fw(mode: &ScalarMode, params: &WaveguideParams, op: &OperatingPoint) -> Result<f64> {
    if mode.m_abs == 0 {
        return Err(Error::Domain("rotation rate needs |m_ell| >= 1".into()));
    }
    let b = soi_braces(mode.m_abs, mode.u, mode.w)?;
    Ok(-(mode.m_abs as f64) * params.dv() / (2.0 * params.compton_ratio() * op.vz_over_c() * b))
}

/// Spin-orbit shifts of one labelled state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoiShift {
    pub d_e: f64,
    pub d_beta_a: f64,
    /// `None` for `m_ell = 0`.
    pub d_beta_rot_a: Option<f64>,
}

pub fn soi_shift(
    mode: &ScalarMode,
    spec: &ModeSpec,
    params: &WaveguideParams,
    op: &OperatingPoint,
) -> Result<SoiShift> {
    let d_e = energy_shift(mode, spec, params)?;
    let d_beta_rot_a = if mode.m_abs == 0 { None } else { Some(rotation_rate_fw(mode, params, op)?) };
    Ok(SoiShift { d_e, d_beta_a: beta_shift(d_e, params, op), d_beta_rot_a })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionModel {
    /// `(βa)² = 2C²(E + v0) - u²`.
    NonRelativistic,
    /// `(βa)² = C²[(1 + E + v0)² - 1] - u²`.
    Relativistic,
}

/// One sample of `β(E)`. `E` is the kinetic energy measured from the rest
/// mass, in units of mc². `beta_a` is `None` off the bound branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub energy: f64,
    pub beta_a: Option<f64>,
}

/// `βa` for transverse wavenumber `u` at energy `energy`, or `None` when
/// `(βa)² < 0`.
pub fn propagation_constant(u: f64, params: &WaveguideParams, energy: f64, model: DispersionModel) -> Option<f64> {
    let c = params.compton_ratio();
    let t = energy + params.v0();
    let b2 = match model {
        DispersionModel::NonRelativistic => 2.0 * c * c * t - u * u,
        DispersionModel::Relativistic => c * c * t * (2.0 + t) - u * u,
    };
    (b2 >= 0.0).then(|| b2.sqrt())
}

/// `β(E)` over `energies` for transverse wavenumber `u`. A nonzero
/// `energy_shift` offsets the curve to `β(E - δE)`, the spin-split branch.
pub fn dispersion_curve(
    u: f64,
    params: &WaveguideParams,
    energies: &[f64],
    model: DispersionModel,
    energy_shift: f64,
) -> Vec<DispersionPoint> {
    energies
        .iter()
        .map(|&energy| DispersionPoint {
            energy,
            beta_a: propagation_constant(u, params, energy - energy_shift, model),
        })
        .collect()
}

/// Evenly spaced energies, inclusive of both ends.
pub fn energy_grid(e_min: f64, e_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || e_max.is_nan() || e_min.is_nan() || e_max <= e_min {
        return Err(Error::Config(format!(
            "energy range needs e_max > e_min and at least 2 points (got [{e_min}, {e_max}], {points})"
        )));
    }
    Ok((0..points)
        .map(|i| e_min + (e_max - e_min) * i as f64 / (points - 1) as f64)
        .collect())
}

/// `J_m(u)/K_m(w)` for continuity at `ρ = 1`, and the mismatch of the
/// logarithmic derivatives there.
pub fn boundary_mismatch(mode: &ScalarMode) -> Result<(f64, f64)> {
    let m = mode.m_abs;
    let (u, w) = (mode.u, mode.w);
    let j = bessel_j(m, u)?;
    let k = bessel_k(m, w)?;
    let scale = j / k;
    let inside_d = u * crate::specfun::bessel_j_deriv(m, u)?;
    let outside_d = scale * w * crate::specfun::bessel_k_deriv(m, w)?;
    let value_gap = (j - scale * k).abs() / j.abs();
    let slope_gap = (inside_d - outside_d).abs() / inside_d.abs().max(j.abs());
    Ok((value_gap, slope_gap))
}
