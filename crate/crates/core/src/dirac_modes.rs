//! Exact Dirac boundary-value route and its first-order expansion.
//!
//! Hankel functions of imaginary argument are converted to `K` at the door
//! with `H_n(iw) = (-i)^{n+1} (2/π) K_{|n|}(w)` (for real `w > 0`), so every
//! residual here is real.

use crate::error::{Error, Result};
use crate::model::{Alignment, OperatingPoint, Spin, WaveguideParams};
use crate::scalar_modes::{soi_braces, solve_on_open_interval};
use crate::specfun::{bessel_j_seq, bessel_j_signed, bessel_k_seq_scaled, jratio, kratio};

/// Which characteristic equation to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CharacteristicForm {
    /// The `|m|`-indexed form with the `γ_z eV₀ ≪ mc²` approximation.
    #[default]
    Reduced,
    /// Signed orders and the full denominators `2 + γ_z v0`, `2 + γ_z (v0 - dv)`.
    Full,
}

fn decay(r_gamma: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < r_gamma) {
        return Err(Error::Domain(format!("u must lie in (0, {r_gamma}), got {u}")));
    }
    Ok(((r_gamma - u) * (r_gamma + u)).sqrt())
}

/// `J_0..=J_{n+1}` at `u`, or a pole error when `J_n(u)` vanishes.
fn j_upto(n: u32, u: f64) -> Result<Vec<f64>> {
    jratio(n, u)?;
    bessel_j_seq(n + 1, u)
}

fn reduced_residual_uw(u: f64, w: f64, eps: f64, n: u32, s: i32) -> Result<f64> {
    let j = j_upto(n, u)?;
    let n_us = n as usize;
    let j_shift = match (s, n_us) {
        (1, _) => j[n_us + 1],
        (_, 0) => -j[1],
        _ => j[n_us - 1],
    };
    Ok(u * j[n_us + 1] / j[n_us] - w * kratio(n, w)? - s as f64 * eps * u * j_shift / j[n_us])
}

/// `u J_{n+1}/J_n - w K_{n+1}/K_n - s ε u J_{n+s}/J_n` with `n = |m_ℓ|`,
/// `s = σ m_ℓ/|m_ℓ|` and `w = sqrt(R_γ² - u²)`.
pub fn reduced_residual(u: f64, params: &WaveguideParams, m_abs: u32, alignment: Alignment) -> Result<f64> {
    let w = decay(params.r_gamma(), u)?;
    reduced_residual_uw(u, w, params.epsilon(), m_abs, alignment.sign())
}

/// `J_{m+σ}(u)/J_m(u)` for signed `m`, guarded at zeros of `J_{|m|}`.
fn signed_jratio(m_ell: i32, sigma: i32, u: f64) -> Result<f64> {
    jratio(m_ell.unsigned_abs(), u)?;
    Ok(bessel_j_signed(m_ell + sigma, u)? / bessel_j_signed(m_ell, u)?)
}

/// `K_{|m+σ|}(w)/K_{|m|}(w)`.
fn signed_kratio(m_ell: i32, sigma: i32, w: f64) -> Result<f64> {
    let a = m_ell.unsigned_abs();
    let b = (m_ell + sigma).unsigned_abs();
    let k = bessel_k_seq_scaled(a.max(b), w)?;
    Ok(k[b as usize] / k[a as usize])
}

/// Powers of `i`, enough to track the phases of the Hankel-to-K rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct QuarterTurn(u8);

impl QuarterTurn {
    fn i_pow(k: i32) -> Self {
        QuarterTurn(k.rem_euclid(4) as u8)
    }

    fn neg_i_pow(k: i32) -> Self {
        Self::i_pow(-k)
    }

    fn mul(self, other: Self) -> Self {
        QuarterTurn((self.0 + other.0) % 4)
    }

    fn real(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }
}

/// `v H_{m+σ}(v)/H_m(v)` at `v = i w`, as a real number.
fn hankel_term(m_ell: i32, sigma: i32, w: f64) -> Result<f64> {
    // H_n(iw) ∝ (-i)^{n+1} K_{|n|}(w): the ratio picks up (-i)^σ, and v = i·w.
    let phase = QuarterTurn::i_pow(1).mul(QuarterTurn::neg_i_pow(sigma));
    let sign = phase
        .real()
        .ok_or_else(|| Error::Internal("Hankel ratio phase is not real".into()))?;
    Ok(sign * w * signed_kratio(m_ell, sigma, w)?)
}

/// Residual of the full characteristic equation with signed orders,
/// `u J_{m+σ}/J_m · D_out/D_in - v H_{m+σ}/H_m` with `D_in = 2 + γ_z v0`,
/// `D_out = 2 + γ_z (v0 - dv)` and `v = i sqrt(R_γ² - u²)`.
pub fn dirac_residual_full(u: f64, params: &WaveguideParams, m_ell: i32, spin: Spin) -> Result<f64> {
    let w = decay(params.r_gamma(), u)?;
    let sigma = spin.sign();
    let g = params.gamma_z();
    let d_in = 2.0 + g * params.v0();
    let d_out = 2.0 + g * (params.v0() - params.dv());
    Ok(u * signed_jratio(m_ell, sigma, u)? * d_out / d_in - hankel_term(m_ell, sigma, w)?)
}

/// Transverse wavenumbers of the state `(m_ell, spin)`, ascending.
pub fn solve_dirac_roots(
    params: &WaveguideParams,
    m_ell: i32,
    spin: Spin,
    form: CharacteristicForm,
) -> Result<Vec<f64>> {
    let n = m_ell.unsigned_abs();
    let rg = params.r_gamma();
    match form {
        CharacteristicForm::Reduced => {
            // For m_ell = 0 both signs give the same equation.
            let s = if m_ell == 0 { 1 } else { m_ell.signum() * spin.sign() };
            let eps = params.epsilon();
            let f = |u: f64| reduced_residual_uw(u, decay(rg, u)?, eps, n, s);
            solve_on_open_interval(&f, n, rg)
        }
        CharacteristicForm::Full => {
            let f = |u: f64| dirac_residual_full(u, params, m_ell, spin);
            solve_on_open_interval(&f, n, rg)
        }
    }
}

/// Parallel/anti-parallel pair at one radial index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracModePair {
    pub m_abs: u32,
    pub radial_index: usize,
    pub u_plus: f64,
    pub u_minus: f64,
    pub u_bar: f64,
    pub du: f64,
    pub w_bar: f64,
    pub d_beta_rot_a: f64,
    pub epsilon: f64,
    pub vz_over_c: f64,
}

impl DiracModePair {
    /// `|δu|/ū < 10 ε`.
    pub fn is_first_order_regime(&self) -> bool {
        self.du.abs() / self.u_bar < 10.0 * self.epsilon
    }

    /// Wavenumber of the state with spin `spin` and orbital number `m_ell`.
    pub fn u_for(&self, m_ell: i32, spin: Spin) -> f64 {
        if m_ell.signum() * spin.sign() > 0 {
            self.u_plus
        } else {
            self.u_minus
        }
    }
}

pub fn solve_dirac_pair(
    params: &WaveguideParams,
    op: &OperatingPoint,
    m_ell: i32,
    radial_index: usize,
) -> Result<DiracModePair> {
    solve_dirac_pair_with(params, op, m_ell, radial_index, CharacteristicForm::Reduced)
}

/// Nearest neighbour distance from `roots[i]` to the rest of `roots`.
fn spacing(roots: &[f64], i: usize) -> f64 {
    let mut d = f64::INFINITY;
    if i > 0 {
        d = d.min(roots[i] - roots[i - 1]);
    }
    if i + 1 < roots.len() {
        d = d.min(roots[i + 1] - roots[i]);
    }
    d
}

pub fn solve_dirac_pair_with(
    params: &WaveguideParams,
    op: &OperatingPoint,
    m_ell: i32,
    radial_index: usize,
    form: CharacteristicForm,
) -> Result<DiracModePair> {
    let m_abs = m_ell.unsigned_abs();
    if m_abs == 0 {
        return Err(Error::Domain("a spin-split pair needs |m_ell| >= 1".into()));
    }
    let m = m_abs as i32;
    let plus = solve_dirac_roots(params, m, Spin::Up, form)?;
    let minus = solve_dirac_roots(params, m, Spin::Down, form)?;
    if radial_index >= plus.len() || radial_index >= minus.len() {
        return Err(Error::Cutoff { m_abs, radial_index });
    }
    let (u_plus, u_minus) = (plus[radial_index], minus[radial_index]);
    let gap = (u_plus - u_minus).abs();
    let reach = spacing(&plus, radial_index).min(spacing(&minus, radial_index));
    if gap >= 0.5 * reach {
        return Err(Error::Internal(format!(
            "ambiguous root pairing at n = {radial_index}: |u+ - u-| = {gap} against spacing {reach}"
        )));
    }
    if u_plus <= u_minus {
        return Err(Error::Internal(format!(
            "invalid root pairing: u+ = {u_plus} is not above u- = {u_minus}"
        )));
    }
    let u_bar = 0.5 * (u_plus + u_minus);
    let du = 0.5 * (u_plus - u_minus);
    let w_bar = decay(params.r_gamma(), u_bar)?;
    let c = params.compton_ratio();
    let d_beta_rot_a =
        -(u_plus * u_plus - u_minus * u_minus) / (4.0 * params.gamma_z() * c * op.vz_over_c());
    Ok(DiracModePair {
        m_abs,
        radial_index,
        u_plus,
        u_minus,
        u_bar,
        du,
        w_bar,
        d_beta_rot_a,
        epsilon: params.epsilon(),
        vz_over_c: op.vz_over_c(),
    })
}

/// `½(β⁺ - β⁻)` from the relativistic dispersion relation, evaluated at the
/// energy where the mean propagation constant equals `β̄a = γ_z C v_z`.
pub fn rotation_rate_from_dispersion(pair: &DiracModePair, params: &WaveguideParams, op: &OperatingPoint) -> f64 {
    let b = op.beta_bar_a(params);
    let up2 = pair.u_plus * pair.u_plus;
    let um2 = pair.u_minus * pair.u_minus;
    let total = b * b + 0.5 * (up2 + um2);
    0.5 * ((total - up2).sqrt() - (total - um2).sqrt())
}

/// Result of the first-order expansion about `ū`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderRotation {
    pub u_bar: f64,
    pub w_bar: f64,
    pub du: f64,
    pub d_beta_rot_a: f64,
}

/// Average of the parallel and anti-parallel residuals expanded about `ū`:
/// `ū J_{n+1}/J_n - w̄ K_{n+1}/K_n - (ε/2) ū (J_{n+1} - J_{n-1})/J_n`.
fn mean_residual(u: f64, w: f64, eps: f64, n: u32) -> Result<f64> {
    let j = j_upto(n, u)?;
    let n_us = n as usize;
    let j_lo = if n_us == 0 { -j[1] } else { j[n_us - 1] };
    Ok(u * j[n_us + 1] / j[n_us] - w * kratio(n, w)? - 0.5 * eps * u * (j[n_us + 1] - j_lo) / j[n_us])
}

/// First-order route: `ū` from the averaged equation, `ū δu = ε n / B(ū, w̄)`
/// and `Δβa = -n (c/v_z) dv / (2C) / B(ū, w̄)`.
pub fn first_order_rotation(
    params: &WaveguideParams,
    op: &OperatingPoint,
    m_ell: i32,
    radial_index: usize,
) -> Result<FirstOrderRotation> {
    let n = m_ell.unsigned_abs();
    if n == 0 {
        return Err(Error::Domain("a spin-split pair needs |m_ell| >= 1".into()));
    }
    let rg = params.r_gamma();
    let eps = params.epsilon();
    let f = |u: f64| mean_residual(u, decay(rg, u)?, eps, n);
    let roots = solve_on_open_interval(&f, n, rg)?;
    let u_bar = *roots.get(radial_index).ok_or(Error::Cutoff { m_abs: n, radial_index })?;
    let w_bar = decay(rg, u_bar)?;
    let b = soi_braces(n, u_bar, w_bar)?;
    let du = eps * n as f64 / (b * u_bar);
    let d_beta_rot_a = -(n as f64) * params.dv() / (2.0 * params.compton_ratio() * op.vz_over_c() * b);
    Ok(FirstOrderRotation { u_bar, w_bar, du, d_beta_rot_a })
}

/// The two residuals of one point, with the sign that relates them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    /// Signed-order form `u J_{m+σ}/J_m - v H_{m+σ}/H_m - ε u J_{m+σ}/J_m`.
    pub signed: f64,
    /// `|m|` form `u J_{n+1}/J_n - w K_{n+1}/K_n - s ε u J_{n+s}/J_n`.
    pub reduced: f64,
    /// `signed = sign · reduced`; always `σ`.
    pub sign: f64,
    /// Magnitude of the largest term, for relative comparisons.
    pub scale: f64,
}

impl Equivalence {
    pub fn discrepancy(&self) -> f64 {
        (self.signed - self.sign * self.reduced).abs() / self.scale
    }
}

/// Evaluates both forms of the spin-dependent matching condition at one
/// `(u, w, ε)` point, treating `w` as independent of `u`.
pub fn residual_form_equivalence(u: f64, w: f64, eps: f64, m_ell: i32, spin: Spin) -> Result<Equivalence> {
    if !(u > 0.0 && w > 0.0 && u.is_finite() && w.is_finite()) {
        return Err(Error::Domain(format!("u and w must be finite and > 0, got u = {u}, w = {w}")));
    }
    if m_ell == 0 {
        return Err(Error::Domain("the reduced form needs m_ell != 0".into()));
    }
    let sigma = spin.sign();
    let as_domain = |e: Error| match e {
        Error::Pole { order, x } => Error::Domain(format!("J_{order} vanishes at {x}")),
        other => other,
    };
    let jr = u * signed_jratio(m_ell, sigma, u).map_err(as_domain)?;
    let hk = hankel_term(m_ell, sigma, w)?;
    let signed = jr - hk - eps * jr;
    let s = m_ell.signum() * sigma;
    let reduced = reduced_residual_uw(u, w, eps, m_ell.unsigned_abs(), s).map_err(as_domain)?;
    let scale = jr.abs() + hk.abs() + (eps * jr).abs();
    Ok(Equivalence { signed, reduced, sign: sigma as f64, scale: scale.max(f64::MIN_POSITIVE) })
}
