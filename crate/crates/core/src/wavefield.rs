//! Sampling of probability densities on 2-D grids.
//!
//! Densities are `|ψ|²·a²`, so a polar slice integrates to one over the
//! transverse plane (ρ in units of `a`). Superpositions of `±m_ℓ` keep a
//! single radial profile and carry the spin-orbit splitting only in the
//! phase, which turns the azimuthal lobes as `cos²(|m| φ + σ Δβa z)`. The
//! `(±1)^{|m|}` global phase of the Dirac states drops out of every density.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::dirac_modes::DiracModePair;
use crate::error::{Error, Result};
use crate::model::{ModeSpec, OperatingPoint, Spin, WaveguideParams};
use crate::scalar_modes::{normalization, radial_amplitude, ScalarMode};
use crate::specfun::{bessel_j_seq, bessel_k_seq_scaled};

pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_RHO_MAX: f64 = 2.0;

/// Where the samples live. Lengths are in units of `a`.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Rows run over `ρ ∈ [0, rho_max]`, columns over `φ ∈ [0, 2π)`.
    Polar { rho_max: f64, n_rho: usize, n_phi: usize, z: f64 },
    /// Rows run over `z ∈ [0, z_max]`, columns over `φ ∈ [0, 2π)`.
    Unrolled { rho: f64, n_phi: usize, n_z: usize, z_max: f64 },
    /// Rows run over `y`, columns over `x`, both in `[-half_width, half_width]`.
    Cartesian { half_width: f64, n: usize, z: f64 },
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::Polar { rho_max: DEFAULT_RHO_MAX, n_rho: DEFAULT_GRID, n_phi: DEFAULT_GRID, z: 0.0 }
    }
}

impl Geometry {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Geometry::Polar { rho_max, n_rho, n_phi, z } => {
                rho_max > 0.0 && rho_max.is_finite() && n_rho >= 2 && n_phi >= 1 && z.is_finite()
            }
            Geometry::Unrolled { rho, n_phi, n_z, z_max } => {
                rho >= 0.0 && rho.is_finite() && n_phi >= 1 && n_z >= 2 && z_max.is_finite()
            }
            Geometry::Cartesian { half_width, n, z } => {
                half_width > 0.0 && half_width.is_finite() && n >= 2 && z.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid grid geometry {self:?}")))
        }
    }

    /// Row and column coordinates.
    pub fn axes(&self) -> (Vec<f64>, Vec<f64>) {
        let lin = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        let ring = |n: usize| -> Vec<f64> { (0..n).map(|j| TAU * j as f64 / n as f64).collect() };
        match *self {
            Geometry::Polar { rho_max, n_rho, n_phi, .. } => (lin(0.0, rho_max, n_rho), ring(n_phi)),
            Geometry::Unrolled { n_phi, n_z, z_max, .. } => (lin(0.0, z_max, n_z), ring(n_phi)),
            Geometry::Cartesian { half_width, n, .. } => (lin(-half_width, half_width, n), lin(-half_width, half_width, n)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Polar { .. } => "polar",
            Geometry::Unrolled { .. } => "unrolled",
            Geometry::Cartesian { .. } => "cartesian",
        }
    }

    pub fn axis_names(&self) -> (&'static str, &'static str) {
        match self {
            Geometry::Polar { .. } => ("rho", "phi"),
            Geometry::Unrolled { .. } => ("z", "phi"),
            Geometry::Cartesian { .. } => ("y", "x"),
        }
    }
}

/// How the superposition phase advances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evolution {
    /// Fixed energy: phase `σ Δβa z`, with `z` taken from the geometry.
    Distance,
    /// Fixed propagation constant: phase `-σ·phase`, where `phase` is the
    /// dimensionless `(δE/mc²)(t mc²/ħ)` of the parallel state.
    Time { phase: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMeta {
    pub kind: &'static str,
    pub m_abs: u32,
    pub sigma: Option<i32>,
    pub radial_index: usize,
    pub u: f64,
    pub w: f64,
    pub norm_a2: f64,
    pub d_beta_rot_a: Option<f64>,
    pub time_phase: Option<f64>,
    /// Probability inside `rho_max` (polar slices only).
    pub captured_probability: Option<f64>,
    /// Trapezoid integral of the polar slice.
    pub grid_integral: Option<f64>,
    /// Bound on `|grid_integral - 1|`: twice the difference from a
    /// half-resolution integral plus the probability beyond `rho_max`.
    pub normalization_error_bound: Option<f64>,
    /// Weight of the lower bispinor components in the total density.
    pub lower_component_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub geometry: Geometry,
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    /// Row-major, `rows.len() × cols.len()`.
    pub samples: Vec<f64>,
    pub meta: FieldMeta,
}

impl FieldGrid {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.samples[i * self.cols.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols.len();
        &self.samples[i * n..(i + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

/// Radial profile `N² R(ρ)²` with `R = J_m(uρ)` inside and the matched K
/// tail outside.
#[derive(Debug, Clone, Copy)]
struct Profile {
    m_abs: u32,
    u: f64,
    w: f64,
    norm_a2: f64,
}

impl Profile {
    fn density(&self, rho: f64) -> Result<f64> {
        Ok(self.norm_a2 * radial_amplitude(self.m_abs, self.u, self.w, rho)?.powi(2))
    }

    /// `∫_0^b N² R(ρ)² 2πρ dρ`, in closed form.
    fn captured(&self, b: f64) -> Result<f64> {
        let m = self.m_abs as usize;
        let inside = |x: f64| -> Result<f64> {
            // ∫_0^x J_m(uρ)² ρ dρ = (x²/2)[J_m² - J_{m-1} J_{m+1}](ux)
            let j = bessel_j_seq(self.m_abs + 1, self.u * x)?;
            let below = if m == 0 { -j[1] } else { j[m - 1] };
            Ok(0.5 * x * x * (j[m] * j[m] - below * j[m + 1]))
        };
        let tail = |x: f64| -> Result<f64> {
            // ∫_x^∞ K_m(wρ)² ρ dρ = (x²/2)[K_{m-1} K_{m+1} - K_m²](wx), scaled by K_m(w)⁻²
            let kx = bessel_k_seq_scaled(self.m_abs + 1, self.w * x)?;
            let k1 = bessel_k_seq_scaled(self.m_abs, self.w)?;
            let below = if m == 0 { kx[1] } else { kx[m - 1] };
            let decay = (-2.0 * self.w * (x - 1.0)).exp();
            Ok(0.5 * x * x * (below * kx[m + 1] - kx[m] * kx[m]) * decay / (k1[m] * k1[m]))
        };
        let jm = radial_amplitude(self.m_abs, self.u, self.w, 1.0)?;
        let total = if b <= 1.0 {
            if b == 0.0 {
                0.0
            } else {
                inside(b)?
            }
        } else {
            // Everything minus the tail beyond b.
            1.0 / (2.0 * PI * self.norm_a2) - jm * jm * tail(b)?
        };
        Ok(2.0 * PI * self.norm_a2 * total)
    }
}

/// Angular factor and its phase offset.
#[derive(Debug, Clone, Copy)]
enum Angular {
    Uniform,
    /// `2 cos²(m φ + offset + rate·z)`.
    Lobes { m: f64, offset: f64, rate: f64 },
}

impl Angular {
    fn factor(&self, phi: f64, z: f64) -> f64 {
        match *self {
            Angular::Uniform => 1.0,
            Angular::Lobes { m, offset, rate } => 2.0 * (m * phi + offset + rate * z).cos().powi(2),
        }
    }
}

fn sample(profile: Profile, angular: Angular, geometry: &Geometry, meta: FieldMeta) -> Result<FieldGrid> {
    geometry.validate()?;
    let (rows, cols) = geometry.axes();
    let nc = cols.len();
    let rows_out: Vec<Result<Vec<f64>>> = rows
        .par_iter()
        .map(|&r| -> Result<Vec<f64>> {
            match *geometry {
                Geometry::Polar { z, .. } => {
                    let d = profile.density(r)?;
                    Ok(cols.iter().map(|&phi| d * angular.factor(phi, z)).collect())
                }
                Geometry::Unrolled { rho, .. } => {
                    let d = profile.density(rho)?;
                    Ok(cols.iter().map(|&phi| d * angular.factor(phi, r)).collect())
                }
                Geometry::Cartesian { z, .. } => cols
                    .iter()
                    .map(|&x| {
                        let rho = x.hypot(r);
                        Ok(profile.density(rho)? * angular.factor(r.atan2(x), z))
                    })
                    .collect(),
            }
        })
        .collect();
    let mut samples = Vec::with_capacity(rows.len() * nc);
    for row in rows_out {
        samples.extend(row?);
    }
    let mut grid = FieldGrid { geometry: geometry.clone(), rows, cols, samples, meta };
    if let Geometry::Polar { rho_max, .. } = grid.geometry {
        let fine = integrate_polar(&grid)?;
        let coarse = integrate_polar_stride(&grid, 2)?;
        let captured = profile.captured(rho_max)?;
        grid.meta.captured_probability = Some(captured);
        grid.meta.grid_integral = Some(fine);
        grid.meta.normalization_error_bound = Some(2.0 * (fine - coarse).abs() + (1.0 - captured).abs());
    }
    Ok(grid)
}

/// Trapezoid in `ρ` times the periodic rectangle rule in `φ`.
pub fn integrate_polar(grid: &FieldGrid) -> Result<f64> {
    integrate_polar_stride(grid, 1)
}

fn integrate_polar_stride(grid: &FieldGrid, stride: usize) -> Result<f64> {
    if !matches!(grid.geometry, Geometry::Polar { .. }) {
        return Err(Error::Domain("transverse integral needs a polar grid".into()));
    }
    let idx: Vec<usize> = (0..grid.n_rows()).step_by(stride).collect();
    if idx.len() < 2 {
        return Err(Error::Domain("too few radial samples to integrate".into()));
    }
    let dphi = TAU / grid.n_cols() as f64;
    let ring = |i: usize| grid.rows[i] * grid.row(i).iter().sum::<f64>() * dphi;
    let mut total = 0.0;
    for pair in idx.windows(2) {
        let h = grid.rows[pair[1]] - grid.rows[pair[0]];
        total += 0.5 * h * (ring(pair[0]) + ring(pair[1]));
    }
    Ok(total)
}

fn base_meta(kind: &'static str, mode: &ScalarMode) -> FieldMeta {
    FieldMeta {
        kind,
        m_abs: mode.m_abs,
        sigma: None,
        radial_index: mode.radial_index,
        u: mode.u,
        w: mode.w,
        norm_a2: mode.norm_a2,
        d_beta_rot_a: None,
        time_phase: None,
        captured_probability: None,
        grid_integral: None,
        normalization_error_bound: None,
        lower_component_weight: None,
    }
}

fn check_solved(mode: &ScalarMode) -> Result<()> {
    let scale = 1.0 + mode.u;
    match mode.residual() {
        Ok(r) if r.abs() <= 1e-8 * scale && mode.norm_a2 > 0.0 => Ok(()),
        Ok(r) => Err(Error::Domain(format!("mode is not a solved root (residual {r})"))),
        Err(e) => Err(Error::Domain(format!("mode is not a solved root ({e})"))),
    }
}

/// Single eigenstate: `N² J_m(uρ)²` inside, matched K tail outside,
/// independent of `φ`.
pub fn sample_eigenstate(mode: &ScalarMode, spec: &ModeSpec, geometry: &Geometry) -> Result<FieldGrid> {
    check_solved(mode)?;
    if spec.m_abs() != mode.m_abs {
        return Err(Error::Domain(format!("labels m_ell = {} do not match |m| = {}", spec.m_ell, mode.m_abs)));
    }
    let profile = Profile { m_abs: mode.m_abs, u: mode.u, w: mode.w, norm_a2: mode.norm_a2 };
    let mut meta = base_meta("eigenstate", mode);
    meta.sigma = Some(spec.spin.sign());
    sample(profile, Angular::Uniform, geometry, meta)
}

fn lobes(m_abs: u32, spin: Spin, d_beta_rot_a: f64, evolution: Evolution) -> Angular {
    let s = spin.sign() as f64;
    match evolution {
        Evolution::Distance => Angular::Lobes { m: m_abs as f64, offset: 0.0, rate: s * d_beta_rot_a },
        Evolution::Time { phase } => Angular::Lobes { m: m_abs as f64, offset: -s * phase, rate: 0.0 },
    }
}

/// Equal-weight superposition of `±m` with common spin `spin`.
pub fn sample_rotating_superposition(
    mode: &ScalarMode,
    spin: Spin,
    d_beta_rot_a: f64,
    geometry: &Geometry,
    evolution: Evolution,
) -> Result<FieldGrid> {
    if mode.m_abs == 0 {
        return Err(Error::Domain("a rotating superposition needs |m_ell| >= 1".into()));
    }
    check_solved(mode)?;
    let profile = Profile { m_abs: mode.m_abs, u: mode.u, w: mode.w, norm_a2: mode.norm_a2 };
    let mut meta = base_meta("superposition", mode);
    meta.sigma = Some(spin.sign());
    meta.d_beta_rot_a = Some(d_beta_rot_a);
    if let Evolution::Time { phase } = evolution {
        meta.time_phase = Some(phase);
    }
    sample(profile, lobes(mode.m_abs, spin, d_beta_rot_a, evolution), geometry, meta)
}

/// Pointwise density of the rotating superposition (fixed-energy form).
pub fn superposition_density(
    mode: &ScalarMode,
    spin: Spin,
    d_beta_rot_a: f64,
    rho: f64,
    phi: f64,
    z: f64,
) -> Result<f64> {
    if mode.m_abs == 0 {
        return Err(Error::Domain("a rotating superposition needs |m_ell| >= 1".into()));
    }
    let profile = Profile { m_abs: mode.m_abs, u: mode.u, w: mode.w, norm_a2: mode.norm_a2 };
    Ok(profile.density(rho)? * lobes(mode.m_abs, spin, d_beta_rot_a, Evolution::Distance).factor(phi, z))
}

/// Lower-to-upper component ratio `(β̄a/C)² / (1 + E + v0)²` at the
/// operating point, with `1 + E + v0` fixed by the mean wavenumbers.
pub fn lower_component_ratio(u_bar: f64, params: &WaveguideParams, op: &OperatingPoint) -> f64 {
    let c = params.compton_ratio();
    let b = op.beta_bar_a(params);
    let total_energy = (1.0 + (b * b + u_bar * u_bar) / (c * c)).sqrt();
    (b / c).powi(2) / (1.0 + total_energy).powi(2)
}

/// Four-component density of the rotating Dirac superposition, using the
/// mean transverse profile and the exact splitting. Normalized to one;
/// the lower components add a uniform factor recorded in the metadata.
pub fn sample_bispinor_density(
    pair: &DiracModePair,
    spin: Spin,
    params: &WaveguideParams,
    op: &OperatingPoint,
    geometry: &Geometry,
    evolution: Evolution,
) -> Result<FieldGrid> {
    let norm_a2 = normalization(pair.m_abs, pair.u_bar, pair.w_bar)?;
    let profile = Profile { m_abs: pair.m_abs, u: pair.u_bar, w: pair.w_bar, norm_a2 };
    let ratio = lower_component_ratio(pair.u_bar, params, op);
    let meta = FieldMeta {
        kind: "bispinor",
        m_abs: pair.m_abs,
        sigma: Some(spin.sign()),
        radial_index: pair.radial_index,
        u: pair.u_bar,
        w: pair.w_bar,
        norm_a2,
        d_beta_rot_a: Some(pair.d_beta_rot_a),
        time_phase: match evolution {
            Evolution::Time { phase } => Some(phase),
            Evolution::Distance => None,
        },
        captured_probability: None,
        grid_integral: None,
        normalization_error_bound: None,
        lower_component_weight: Some(ratio / (1.0 + ratio)),
    };
    sample(profile, lobes(pair.m_abs, spin, pair.d_beta_rot_a, evolution), geometry, meta)
}

/// Angle `θ ∈ (-π/2m, π/2m]` of the density maximum on a ring, from the
/// `2m`-th angular Fourier moment of a uniformly sampled row.
pub fn lobe_angle(row: &[f64], m_abs: u32) -> Result<f64> {
    if m_abs == 0 {
        return Err(Error::Domain("lobe angle needs |m| >= 1".into()));
    }
    let n = row.len();
    if n <= 2 * m_abs as usize {
        return Err(Error::Domain(format!("{n} azimuthal samples cannot resolve order {}", 2 * m_abs)));
    }
    let k = 2.0 * m_abs as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (j, &d) in row.iter().enumerate() {
        let phi = TAU * j as f64 / n as f64;
        re += d * (k * phi).cos();
        im -= d * (k * phi).sin();
    }
    let mass: f64 = row.iter().map(|d| d.abs()).sum();
    if re.hypot(im) <= 1e-12 * mass {
        return Err(Error::Domain("row has no lobe structure".into()));
    }
    // cos²(mφ + ψ) has moment ∝ e^{2iψ}; the maximum sits at φ = -ψ/m.
    let psi = 0.5 * im.atan2(re);
    Ok(-psi / m_abs as f64)
}

/// Lobe angle per row of an unrolled grid, unwrapped across the `π/m` period.
pub fn lobe_track(grid: &FieldGrid, m_abs: u32) -> Result<Vec<f64>> {
    if !matches!(grid.geometry, Geometry::Unrolled { .. }) {
        return Err(Error::Domain("lobe tracking needs an unrolled (phi, z) grid".into()));
    }
    let period = PI / m_abs as f64;
    let mut out: Vec<f64> = Vec::with_capacity(grid.n_rows());
    for i in 0..grid.n_rows() {
        let mut theta = lobe_angle(grid.row(i), m_abs)?;
        if let Some(&prev) = out.last() {
            theta += period * ((prev - theta) / period).round();
        }
        out.push(theta);
    }
    Ok(out)
}

/// Least-squares slope `dθ/dz` of the lobe angle over an unrolled grid.
pub fn rotation_slope(grid: &FieldGrid, m_abs: u32) -> Result<f64> {
    let theta = lobe_track(grid, m_abs)?;
    let z = &grid.rows;
    let n = z.len() as f64;
    let zm = z.iter().sum::<f64>() / n;
    let tm = theta.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (zi, ti) in z.iter().zip(&theta) {
        sxy += (zi - zm) * (ti - tm);
        sxx += (zi - zm) * (zi - zm);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("z range is empty".into()));
    }
    Ok(sxy / sxx)
}
