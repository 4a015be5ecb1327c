use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dirac_modes::{
    residual_form_equivalence, first_order_rotation, reduced_residual, solve_dirac_pair, solve_dirac_roots,
    CharacteristicForm, DiracModePair,
};
use crate::error::{Error, Result};
use crate::model::{validate_regime, Alignment, ModeSpec, Spin, WaveguideParams};
use crate::scalar_modes::{
    energy_shift, propagation_constant, radial_amplitude, rotation_rate_fw, soi_shift, solve_scalar_modes,
    DispersionModel, ScalarMode,
};
use crate::wavefield::{
    sample_bispinor_density, sample_eigenstate, sample_rotating_superposition, Evolution, FieldGrid, Geometry,
};

use super::config::{DensityKind, GeometrySpec, RateSource, RunConfig};
use super::output::{fmt_num, fmt_opt, write_grid, write_pgm, write_table, Table};
use super::CliError;

const SPINS: [Spin; 2] = [Spin::Up, Spin::Down];

/// Turns a cutoff into `None`, passing every other error through.
fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Cutoff { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn rel_diff(a: Option<f64>, reference: Option<f64>) -> Option<f64> {
    match (a, reference) {
        (Some(a), Some(b)) if b != 0.0 => Some((a - b).abs() / b.abs()),
        _ => None,
    }
}

fn model_of(cfg: &RunConfig) -> DispersionModel {
    if cfg.relativistic {
        DispersionModel::Relativistic
    } else {
        DispersionModel::NonRelativistic
    }
}

fn common_meta(table: &mut Table, cfg: &RunConfig) {
    let p = &cfg.params;
    table.meta("R", fmt_num(p.r()));
    table.meta("R_gamma", fmt_num(p.r_gamma()));
    table.meta("compton_ratio", fmt_num(p.compton_ratio()));
    table.meta("epsilon", fmt_num(p.epsilon()));
    table.meta("vz_over_c", fmt_num(cfg.op.vz_over_c()));
    table.meta("beta_bar_a", fmt_num(cfg.op.beta_bar_a(p)));
}

struct StateSolutions {
    fw: Vec<ScalarMode>,
    dirac: [Vec<f64>; 2],
}

fn solve_state(cfg: &RunConfig, m_ell: i32) -> Result<StateSolutions> {
    let m_abs = m_ell.unsigned_abs();
    let fw = if cfg.solver.fw() { solve_scalar_modes(&cfg.params, m_abs)? } else { Vec::new() };
    let mut dirac = [Vec::new(), Vec::new()];
    if cfg.solver.dirac() {
        for (slot, spin) in dirac.iter_mut().zip(SPINS) {
            *slot = solve_dirac_roots(&cfg.params, m_ell, spin, CharacteristicForm::Reduced)?;
        }
    }
    Ok(StateSolutions { fw, dirac })
}

pub fn cmd_modes(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = &cfg.params;
    let op = &cfg.op;
    let per_m: Vec<Result<Vec<Vec<String>>>> = cfg
        .m_ell
        .par_iter()
        .map(|&m| -> Result<Vec<Vec<String>>> {
            let m_abs = m.unsigned_abs();
            let sol = solve_state(cfg, m)?;
            let mut rows = Vec::new();
            for (k, spin) in SPINS.into_iter().enumerate() {
                let roots = &sol.dirac[k];
                let alignment = ModeSpec::new(m, spin, 0).alignment().unwrap_or(Alignment::Parallel);
                for n in 0..sol.fw.len().max(roots.len()) {
                    let spec = ModeSpec::new(m, spin, n);
                    let mode = sol.fw.get(n);
                    let shift = mode.map(|md| soi_shift(md, &spec, p, op)).transpose()?;
                    let u_d = roots.get(n).copied();
                    let res_d = u_d.map(|u| reduced_residual(u, p, m_abs, alignment)).transpose()?;
                    let pair = if cfg.solver.dirac() && m_abs >= 1 {
                        optional(solve_dirac_pair(p, op, m, n))?
                    } else {
                        None
                    };
                    let first = if cfg.solver.first_order() && m_abs >= 1 {
                        optional(first_order_rotation(p, op, m, n))?
                    } else {
                        None
                    };
                    let rot_fw = shift.and_then(|s| s.d_beta_rot_a);
                    let rot_d = pair.map(|pr| pr.d_beta_rot_a);
                    let u_ref = mode.map(|md| md.u).or(u_d);
                    let warnings = u_ref
                        .map(|u| validate_regime(p, op, u).iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";"))
                        .unwrap_or_default();
                    rows.push(vec![
                        m.to_string(),
                        spin.sign().to_string(),
                        n.to_string(),
                        fmt_opt(mode.map(|md| md.u)),
                        fmt_opt(mode.map(|md| md.w)),
                        fmt_opt(mode.map(|md| md.norm_a2)),
                        fmt_opt(shift.map(|s| s.d_e)),
                        fmt_opt(shift.map(|s| s.d_beta_a)),
                        fmt_opt(rot_fw),
                        fmt_opt(mode.map(|md| md.residual()).transpose()?),
                        fmt_opt(u_d),
                        fmt_opt(res_d),
                        fmt_opt(rot_d),
                        fmt_opt(first.map(|f| f.d_beta_rot_a)),
                        fmt_opt(rel_diff(rot_fw, rot_d)),
                        warnings,
                    ]);
                }
            }
            Ok(rows)
        })
        .collect();

    let mut table = Table::new(&[
        "m_ell",
        "sigma",
        "n",
        "u_fw",
        "w_fw",
        "norm_a2",
        "dE",
        "dbeta_a",
        "dbeta_rot_fw",
        "residual_fw",
        "u_dirac",
        "residual_dirac",
        "dbeta_rot_dirac",
        "dbeta_rot_firstorder",
        "rel_diff_fw_dirac",
        "warnings",
    ]);
    common_meta(&mut table, cfg);
    for (m, rows) in cfg.m_ell.iter().zip(per_m) {
        let rows = rows?;
        if rows.is_empty() {
            table.meta("below_cutoff", format!("m_ell={m}"));
        }
        table.rows.extend(rows);
    }
    let path = cfg.out_dir.join("modes.csv");
    write_table(&path, "modes", cfg, &table)?;
    Ok(vec![path])
}

pub fn cmd_dispersion(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let p = &cfg.params;
    let model = model_of(cfg);
    let solved: Vec<Result<StateSolutions>> = cfg.m_ell.par_iter().map(|&m| solve_state(cfg, m)).collect();
    let mut files = Vec::new();
    for (&m, sol) in cfg.m_ell.iter().zip(solved) {
        let sol = sol?;
        for (k, spin) in SPINS.into_iter().enumerate() {
            let roots = &sol.dirac[k];
            let count = sol.fw.len().max(roots.len()).max(1);
            for n in 0..count {
                let spec = ModeSpec::new(m, spin, n);
                let mode = sol.fw.get(n);
                let d_e = mode.map(|md| energy_shift(md, &spec, p)).transpose()?;
                let u_d = roots.get(n).copied();
                let mut table =
                    Table::new(&["E", "beta_a_unsplit", "beta_a_fw", "beta_a_fw_display", "beta_a_dirac", "gap"]);
                common_meta(&mut table, cfg);
                table.meta("energy", "kinetic energy above the rest mass in units of mc^2");
                table.meta("model", format!("{model:?}"));
                table.meta("m_ell", m);
                table.meta("sigma", spin.sign());
                table.meta("n", n);
                table.meta("u_fw", fmt_opt(mode.map(|md| md.u)));
                table.meta("dE", fmt_opt(d_e));
                table.meta("u_dirac", fmt_opt(u_d));
                table.meta("exaggeration", fmt_num(cfg.exaggeration));
                let mut omitted = 0usize;
                let mut max_gap: Option<f64> = None;
                for &e in &cfg.energies {
                    let unsplit = mode.and_then(|md| propagation_constant(md.u, p, e, model));
                    let fw = mode.and_then(|md| propagation_constant(md.u, p, e - d_e.unwrap_or(0.0), model));
                    let shown = mode.and_then(|md| {
                        propagation_constant(md.u, p, e - cfg.exaggeration * d_e.unwrap_or(0.0), model)
                    });
                    let dirac = u_d.and_then(|u| propagation_constant(u, p, e, model));
                    let gap = match (fw, dirac) {
                        (Some(a), Some(b)) => Some((a - b).abs()),
                        _ => None,
                    };
                    if let Some(g) = gap {
                        max_gap = Some(max_gap.map_or(g, |mg: f64| mg.max(g)));
                    }
                    if unsplit.is_none() && fw.is_none() && shown.is_none() && dirac.is_none() {
                        omitted += 1;
                        continue;
                    }
                    table.rows.push(vec![
                        fmt_num(e),
                        fmt_opt(unsplit),
                        fmt_opt(fw),
                        fmt_opt(shown),
                        fmt_opt(dirac),
                        fmt_opt(gap),
                    ]);
                }
                table.meta("omitted_points", omitted);
                table.meta("max_gap", fmt_opt(max_gap));
                let path = cfg.out_dir.join(format!("dispersion_m{:+}_s{:+}_n{}.csv", m, spin.sign(), n));
                write_table(&path, "dispersion", cfg, &table)?;
                files.push(path);
            }
        }
    }
    Ok(files)
}

/// One row of the rotation sweep.
#[derive(Debug, Clone, Copy)]
struct RotationRow {
    r: f64,
    params: WaveguideParams,
    fw: Option<f64>,
    dirac: Option<f64>,
    first: Option<f64>,
}

fn rotation_row(cfg: &RunConfig, r: f64, dv: f64) -> Result<RotationRow> {
    let p = WaveguideParams::from_r(r, cfg.params.v0(), dv, cfg.params.gamma_z())?;
    let m = cfg.rotation_m;
    let op = &cfg.op;
    let fw = if cfg.solver.fw() {
        match solve_scalar_modes(&p, m)?.first() {
            Some(mode) => Some(rotation_rate_fw(mode, &p, op)?),
            None => None,
        }
    } else {
        None
    };
    let dirac = if cfg.solver.dirac() {
        optional(solve_dirac_pair(&p, op, m as i32, 0))?.map(|pr| pr.d_beta_rot_a)
    } else {
        None
    };
    let first = if cfg.solver.first_order() {
        optional(first_order_rotation(&p, op, m as i32, 0))?.map(|f| f.d_beta_rot_a)
    } else {
        None
    };
    Ok(RotationRow { r, params: p, fw, dirac, first })
}

pub fn cmd_rotation(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dv = cfg.params.dv();
    let rows: Vec<Result<RotationRow>> = cfg.r_sweep.par_iter().map(|&r| rotation_row(cfg, r, dv)).collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "kind",
        "R",
        "compton_ratio",
        "dv",
        "dbeta_rot_fw",
        "dbeta_rot_dirac",
        "dbeta_rot_firstorder",
        "rel_fw_dirac",
        "rel_firstorder_dirac",
        "agree_5pct",
    ]);
    table.meta("vz_over_c", fmt_num(cfg.op.vz_over_c()));
    table.meta("gamma_z", fmt_num(cfg.params.gamma_z()));
    table.meta("rotation_m", cfg.rotation_m);
    table.meta("sweep", "compton_ratio varies at fixed dv");

    let mut sorted: Vec<&RotationRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.r.total_cmp(&b.r));
    let mags: Vec<Option<f64>> = sorted.iter().map(|row| row.dirac.or(row.fw).map(f64::abs)).collect();
    let decreasing = mags.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a));
    let gaps: Vec<Option<f64>> = sorted.iter().map(|row| rel_diff(row.fw, row.dirac)).collect();
    let gap_nonincreasing = gaps.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a));
    table.meta("abs_rate_strictly_decreasing", decreasing);
    table.meta("fw_dirac_gap_nonincreasing", gap_nonincreasing);

    let mut push = |kind: &str, row: &RotationRow| {
        let rel = rel_diff(row.fw, row.dirac);
        table.rows.push(vec![
            kind.to_string(),
            fmt_num(row.r),
            fmt_num(row.params.compton_ratio()),
            fmt_num(row.params.dv()),
            fmt_opt(row.fw),
            fmt_opt(row.dirac),
            fmt_opt(row.first),
            fmt_opt(rel),
            fmt_opt(rel_diff(row.first, row.dirac)),
            rel.map(|g| (g <= 0.05).to_string()).unwrap_or_default(),
        ]);
    };
    for row in &rows {
        push("sweep", row);
    }
    if cfg.limit_row {
        let row = rotation_row(cfg, cfg.r_sweep[0], cfg.limit_dv)?;
        push("limit", &row);
    }
    let path = cfg.out_dir.join("rotation.csv");
    write_table(&path, "rotation", cfg, &table)?;
    Ok(vec![path])
}

fn resolve_geometry(spec: &GeometrySpec, rate: Option<f64>) -> Result<Geometry, CliError> {
    match *spec {
        GeometrySpec::Fixed(ref g) => Ok(g.clone()),
        GeometrySpec::UnrolledAuto { rho, n_phi, n_z } => {
            let rate = rate
                .filter(|r| *r != 0.0)
                .ok_or_else(|| CliError::Config("z_max = auto needs a rotating density".into()))?;
            // One full turn of the lobe pattern.
            Ok(Geometry::Unrolled { rho, n_phi, n_z, z_max: PI / rate.abs() })
        }
    }
}

pub fn cmd_density(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let d = &cfg.density;
    let p = &cfg.params;
    let op = &cfg.op;
    let m_abs = d.m_ell.unsigned_abs();
    let mode = *solve_scalar_modes(p, m_abs)?
        .get(d.radial_index)
        .ok_or(Error::Cutoff { m_abs, radial_index: d.radial_index })?;
    let evolution = match d.time_phase {
        Some(phase) => Evolution::Time { phase },
        None => Evolution::Distance,
    };
    let grid: FieldGrid = match d.kind {
        DensityKind::Eigenstate => {
            let geometry = resolve_geometry(&d.geometry, None)?;
            sample_eigenstate(&mode, &ModeSpec::new(d.m_ell, d.spin, d.radial_index), &geometry)?
        }
        DensityKind::Superposition => {
            let rate = match d.rate {
                RateSource::Fw => rotation_rate_fw(&mode, p, op)?,
                RateSource::Dirac => solve_dirac_pair(p, op, d.m_ell, d.radial_index)?.d_beta_rot_a,
            };
            let geometry = resolve_geometry(&d.geometry, Some(rate))?;
            sample_rotating_superposition(&mode, d.spin, rate, &geometry, evolution)?
        }
        DensityKind::Bispinor => {
            let pair: DiracModePair = solve_dirac_pair(p, op, d.m_ell, d.radial_index)?;
            let geometry = resolve_geometry(&d.geometry, Some(pair.d_beta_rot_a))?;
            sample_bispinor_density(&pair, d.spin, p, op, &geometry, evolution)?
        }
    };
    let stem = format!(
        "density_{}_{}_m{}_s{:+}_n{}",
        grid.meta.kind,
        grid.geometry.kind(),
        m_abs,
        d.spin.sign(),
        d.radial_index
    );
    let csv = cfg.out_dir.join(format!("{stem}.csv"));
    write_grid(&csv, "density", cfg, &grid)?;
    let mut files = vec![csv];
    if d.pgm {
        let pgm = cfg.out_dir.join(format!("{stem}.pgm"));
        write_pgm(&pgm, &grid)?;
        files.push(pgm);
    }
    Ok(files)
}

/// Outcome of `validate`.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub path: PathBuf,
    pub checks: usize,
    pub failures: usize,
}

struct Checks {
    table: Table,
    scale: f64,
    failures: usize,
}

impl Checks {
    /// Passes when `value < tolerance · tolerance_scale`.
    fn check(&mut self, suite: &str, item: String, value: f64, tolerance: f64) {
        let tol = tolerance * self.scale;
        let pass = value < tol;
        if !pass {
            self.failures += 1;
        }
        self.table.rows.push(vec![
            suite.to_string(),
            item,
            fmt_num(value),
            fmt_num(tol),
            if pass { "pass" } else { "fail" }.to_string(),
        ]);
    }

    fn note(&mut self, suite: &str, item: String, status: &str) {
        self.table.rows.push(vec![suite.to_string(), item, String::new(), String::new(), status.to_string()]);
    }
}

/// Composite Simpson with `panels` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

fn quadrature_norm(mode: &ScalarMode) -> Result<f64> {
    let (m, u, w) = (mode.m_abs, mode.u, mode.w);
    let amp = |r: f64| radial_amplitude(m, u, w, r).unwrap_or(f64::NAN);
    let inside = simpson(|r| 2.0 * PI * r * amp(r).powi(2), 0.0, 1.0, 4000);
    let outside = simpson(|r| 2.0 * PI * r * amp(r).powi(2), 1.0, 1.0 + 40.0 / w, 8000);
    let total = inside + outside;
    if !total.is_finite() {
        return Err(Error::Internal("normalization quadrature produced a non-finite value".into()));
    }
    Ok(1.0 / total)
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    let p = &cfg.params;
    let op = &cfg.op;
    let mut checks = Checks {
        table: Table::new(&["suite", "item", "value", "tolerance", "status"]),
        scale: cfg.tolerance_scale,
        failures: 0,
    };
    common_meta(&mut checks.table, cfg);

    // Equivalence of the signed and |m| forms of the spin-dependent condition.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    let mut taken = 0usize;
    let mut skipped = 0usize;
    while taken < cfg.validate_samples {
        let u = rng.gen_range(0.1..12.0);
        let w = rng.gen_range(0.1..12.0);
        let eps = rng.gen_range(0.0..0.05);
        let mut m = rng.gen_range(-5..=4);
        if m >= 0 {
            m += 1;
        }
        let spin = if rng.gen_bool(0.5) { Spin::Up } else { Spin::Down };
        match residual_form_equivalence(u, w, eps, m, spin) {
            Ok(eq) => {
                worst = worst.max(eq.discrepancy());
                taken += 1;
            }
            Err(Error::Domain(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    checks.check("equivalence", format!("{taken} samples ({skipped} at poles redrawn)"), worst, 1e-10);

    for m_abs in cfg.m_abs_values() {
        let modes = solve_scalar_modes(p, m_abs)?;
        if modes.is_empty() {
            checks.note("modes", format!("m={m_abs} below cutoff"), "info");
        }
        for mode in &modes {
            let tag = format!("m={} n={}", m_abs, mode.radial_index);
            checks.check("characteristic", tag.clone(), mode.residual()?.abs(), 1e-10 * (1.0 + mode.u));
            let q = quadrature_norm(mode)?;
            checks.check("normalization", tag.clone(), (q / mode.norm_a2 - 1.0).abs(), 1e-8);
            let warnings = validate_regime(p, op, mode.u);
            if warnings.is_empty() {
                checks.note("regime", tag.clone(), "pass");
            } else {
                let text = warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";");
                checks.note("regime", format!("{tag} {text}"), "warn");
            }
            if m_abs == 0 {
                continue;
            }
            let m = m_abs as i32;
            let up = soi_shift(mode, &ModeSpec::new(m, Spin::Up, mode.radial_index), p, op)?;
            let down = soi_shift(mode, &ModeSpec::new(-m, Spin::Up, mode.radial_index), p, op)?;
            let rot = up.d_beta_rot_a.unwrap_or(f64::NAN);
            let half = 0.5 * (up.d_beta_a - down.d_beta_a);
            checks.check("rotation_identity", tag.clone(), (rot - half).abs() / rot.abs(), 1e-12);
            checks.check("energy_sign", tag.clone(), -up.d_e, 0.0);
            if let Some(pair) = optional(solve_dirac_pair(p, op, m, mode.radial_index))? {
                checks.check("dirac_order", tag.clone(), pair.u_minus - pair.u_plus, 0.0);
                checks.check("dirac_sign", tag.clone(), pair.d_beta_rot_a, 0.0);
            }
        }
    }

    checks.table.meta("checks", checks.table.rows.len());
    checks.table.meta("failures", checks.failures);
    let path = cfg.out_dir.join("validate.csv");
    write_table(&path, "validate", cfg, &checks.table)?;
    Ok(ValidationReport { path, checks: checks.table.rows.len(), failures: checks.failures })
}
