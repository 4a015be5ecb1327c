//! Flat `key = value` run configuration with command-line overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::model::{OperatingPoint, Spin, WaveguideParams};
use crate::scalar_modes::energy_grid;
use crate::wavefield::Geometry;

use super::CliError;

/// Every accepted key with its default. `r` has no default: when given it
/// replaces `compton_ratio` through `R² = 2 C² dv`.
const DEFAULTS: &[(&str, &str)] = &[
    ("compton_ratio", "30"),
    ("v0", "0.02"),
    ("dv", "0.02"),
    ("gamma_z", "1"),
    ("vz_over_c", "0.5"),
    ("solver", "all"),
    ("m_ell", "-3..3"),
    ("e_min", "-0.02"),
    ("e_max", "0.08"),
    ("e_points", "201"),
    ("relativistic", "false"),
    ("exaggeration", "1"),
    ("r_sweep", "3,4,5,6,8,10"),
    ("limit_row", "true"),
    ("limit_dv", "1e-9"),
    ("rotation_m", "1"),
    ("density_kind", "superposition"),
    ("density_m", "1"),
    ("density_sigma", "1"),
    ("density_radial_index", "0"),
    ("density_rate", "fw"),
    ("geometry", "polar"),
    ("grid_n1", "256"),
    ("grid_n2", "256"),
    ("rho_max", "2"),
    ("z", "0"),
    ("rho_slice", "0.8"),
    ("z_max", "auto"),
    ("time_phase", "none"),
    ("pgm", "false"),
    ("validate_samples", "1000"),
    ("seed", "20240601"),
    ("tolerance_scale", "1"),
    ("out", "."),
];

const OPTIONAL: &[&str] = &["r"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverSelection {
    Fw,
    Dirac,
    DiracFirstOrder,
    All,
}

impl SolverSelection {
    pub fn fw(self) -> bool {
        matches!(self, SolverSelection::Fw | SolverSelection::All)
    }

    pub fn dirac(self) -> bool {
        matches!(self, SolverSelection::Dirac | SolverSelection::All)
    }

    pub fn first_order(self) -> bool {
        matches!(self, SolverSelection::DiracFirstOrder | SolverSelection::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Eigenstate,
    Superposition,
    Bispinor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    Fw,
    Dirac,
}

/// Grid shape before the `z_max = auto` extent is known.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Fixed(Geometry),
    UnrolledAuto { rho: f64, n_phi: usize, n_z: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityConfig {
    pub kind: DensityKind,
    pub m_ell: i32,
    pub spin: Spin,
    pub radial_index: usize,
    pub rate: RateSource,
    pub geometry: GeometrySpec,
    pub time_phase: Option<f64>,
    pub pgm: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: WaveguideParams,
    pub op: OperatingPoint,
    pub solver: SolverSelection,
    pub m_ell: Vec<i32>,
    pub energies: Vec<f64>,
    pub relativistic: bool,
    pub exaggeration: f64,
    pub r_sweep: Vec<f64>,
    pub limit_row: bool,
    pub limit_dv: f64,
    pub rotation_m: u32,
    pub density: DensityConfig,
    pub validate_samples: usize,
    pub seed: u64,
    pub tolerance_scale: f64,
    pub out_dir: PathBuf,
    resolved: BTreeMap<String, String>,
}

impl RunConfig {
    /// Reads `path` (if any), applies `sets` in order, then `out` if given.
    pub fn load(path: Option<&Path>, sets: &[String], out: Option<&Path>) -> Result<Self, CliError> {
        let mut raw = BTreeMap::new();
        if let Some(p) = path {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            raw = parse_text(&text)?;
        }
        for s in sets {
            let (k, v) = split_pair(s)
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{s}'")))?;
            check_key(&k)?;
            raw.insert(k, v);
        }
        if let Some(o) = out {
            raw.insert("out".into(), o.display().to_string());
        }
        Self::from_map(raw)
    }

    pub fn from_map(raw: BTreeMap<String, String>) -> Result<Self, CliError> {
        let explicit: BTreeSet<String> = raw.keys().cloned().collect();
        let mut map: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        map.extend(raw);
        let get = |k: &str| map.get(k).map(String::as_str).unwrap_or("");

        let v0 = num(get("v0"), "v0")?;
        let dv = num(get("dv"), "dv")?;
        let gamma_z = num(get("gamma_z"), "gamma_z")?;
        let params = if explicit.contains("r") {
            if explicit.contains("compton_ratio") {
                return Err(CliError::Config("give either r or compton_ratio, not both".into()));
            }
            WaveguideParams::from_r(num(get("r"), "r")?, v0, dv, gamma_z)?
        } else {
            WaveguideParams::new(num(get("compton_ratio"), "compton_ratio")?, v0, dv, gamma_z)?
        };
        let op = OperatingPoint::new(num(get("vz_over_c"), "vz_over_c")?)?;

        let solver = match get("solver") {
            "fw" => SolverSelection::Fw,
            "dirac" => SolverSelection::Dirac,
            "dirac-firstorder" => SolverSelection::DiracFirstOrder,
            "all" => SolverSelection::All,
            other => return Err(CliError::Config(format!("unknown solver '{other}'"))),
        };
        let m_ell = int_list(get("m_ell"), "m_ell")?;
        let energies = energy_grid(
            num(get("e_min"), "e_min")?,
            num(get("e_max"), "e_max")?,
            count(get("e_points"), "e_points")?,
        )?;
        let exaggeration = num(get("exaggeration"), "exaggeration")?;
        let r_sweep = num_list(get("r_sweep"), "r_sweep")?;
        if r_sweep.iter().any(|&r| r.is_nan() || r <= 0.0) {
            return Err(CliError::Config("r_sweep values must be > 0".into()));
        }
        let limit_dv = num(get("limit_dv"), "limit_dv")?;
        let rotation_m = count(get("rotation_m"), "rotation_m")? as u32;
        if rotation_m == 0 {
            return Err(CliError::Config("rotation_m must be >= 1".into()));
        }

        let density = DensityConfig {
            kind: match get("density_kind") {
                "eigenstate" => DensityKind::Eigenstate,
                "superposition" => DensityKind::Superposition,
                "bispinor" => DensityKind::Bispinor,
                other => return Err(CliError::Config(format!("unknown density_kind '{other}'"))),
            },
            m_ell: int(get("density_m"), "density_m")?,
            spin: Spin::from_sign(int(get("density_sigma"), "density_sigma")?)
                .map_err(|_| CliError::Config("density_sigma must be 1 or -1".into()))?,
            radial_index: count(get("density_radial_index"), "density_radial_index")?,
            rate: match get("density_rate") {
                "fw" => RateSource::Fw,
                "dirac" => RateSource::Dirac,
                other => return Err(CliError::Config(format!("unknown density_rate '{other}'"))),
            },
            geometry: geometry(&map)?,
            time_phase: match get("time_phase") {
                "none" => None,
                v => Some(num(v, "time_phase")?),
            },
            pgm: flag(get("pgm"), "pgm")?,
        };

        let tolerance_scale = num(get("tolerance_scale"), "tolerance_scale")?;
        let seed = get("seed")
            .parse::<u64>()
            .map_err(|_| CliError::Config(format!("seed must be an unsigned integer, got '{}'", get("seed"))))?;

        Ok(RunConfig {
            params,
            op,
            solver,
            m_ell,
            energies,
            relativistic: flag(get("relativistic"), "relativistic")?,
            exaggeration,
            r_sweep,
            limit_row: flag(get("limit_row"), "limit_row")?,
            limit_dv,
            rotation_m,
            density,
            validate_samples: count(get("validate_samples"), "validate_samples")?,
            seed,
            tolerance_scale,
            out_dir: PathBuf::from(get("out")),
            resolved: map,
        })
    }

    /// Resolved settings in key order, for file headers.
    pub fn resolved(&self) -> impl Iterator<Item = (&str, &str)> {
        self.resolved.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Distinct `|m_ell|` values of the sweep, ascending.
    pub fn m_abs_values(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.m_ell.iter().map(|m| m.unsigned_abs()).collect();
        set.into_iter().collect()
    }
}

fn check_key(k: &str) -> Result<(), CliError> {
    if DEFAULTS.iter().any(|(d, _)| *d == k) || OPTIONAL.contains(&k) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown key '{k}'")))
    }
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line)
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        check_key(&k)?;
        if out.insert(k.clone(), v).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

fn num(s: &str, key: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Config(format!("{key} must be a finite number, got '{s}'")))
}

fn int(s: &str, key: &str) -> Result<i32, CliError> {
    s.parse::<i32>()
        .map_err(|_| CliError::Config(format!("{key} must be an integer, got '{s}'")))
}

fn count(s: &str, key: &str) -> Result<usize, CliError> {
    s.parse::<usize>()
        .map_err(|_| CliError::Config(format!("{key} must be a non-negative integer, got '{s}'")))
}

fn flag(s: &str, key: &str) -> Result<bool, CliError> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!("{key} must be true or false, got '{s}'"))),
    }
}

fn num_list(s: &str, key: &str) -> Result<Vec<f64>, CliError> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| num(t, key))
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err(CliError::Config(format!("{key} sweep is empty")));
    }
    Ok(out)
}

/// `a..b` (inclusive) or a comma list. Duplicates are dropped.
pub fn int_list(s: &str, key: &str) -> Result<Vec<i32>, CliError> {
    let mut out: Vec<i32> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (int(a.trim(), key)?, int(b.trim(), key)?);
            out.extend(a..=b);
        } else {
            out.push(int(part, key)?);
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|m| seen.insert(*m));
    if out.is_empty() {
        return Err(CliError::Config(format!("{key} sweep is empty")));
    }
    Ok(out)
}

fn geometry(map: &BTreeMap<String, String>) -> Result<GeometrySpec, CliError> {
    let get = |k: &str| map.get(k).map(String::as_str).unwrap_or("");
    let n1 = count(get("grid_n1"), "grid_n1")?;
    let n2 = count(get("grid_n2"), "grid_n2")?;
    let g = match get("geometry") {
        "polar" => GeometrySpec::Fixed(Geometry::Polar {
            rho_max: num(get("rho_max"), "rho_max")?,
            n_rho: n1,
            n_phi: n2,
            z: num(get("z"), "z")?,
        }),
        "cartesian" => GeometrySpec::Fixed(Geometry::Cartesian {
            half_width: num(get("rho_max"), "rho_max")?,
            n: n1,
            z: num(get("z"), "z")?,
        }),
        "unrolled" => {
            let rho = num(get("rho_slice"), "rho_slice")?;
            match get("z_max") {
                "auto" => GeometrySpec::UnrolledAuto { rho, n_phi: n2, n_z: n1 },
                v => GeometrySpec::Fixed(Geometry::Unrolled { rho, n_phi: n2, n_z: n1, z_max: num(v, "z_max")? }),
            }
        }
        other => return Err(CliError::Config(format!("unknown geometry '{other}'"))),
    };
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(sets: &[&str]) -> Result<RunConfig, CliError> {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        RunConfig::load(None, &sets, None)
    }

    #[test]
    fn defaults_reproduce_r6() {
        let c = load(&[]).unwrap();
        assert!((c.params.r() - 6.0).abs() < 1e-12);
        assert_eq!(c.m_ell, vec![-3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(c.m_abs_values(), vec![0, 1, 2, 3]);
        assert_eq!(c.solver, SolverSelection::All);
        assert_eq!(c.energies.len(), 201);
    }

    #[test]
    fn overrides_and_lists() {
        let c = load(&["r=4", "m_ell=2,-1,2", "solver=fw"]).unwrap();
        assert!((c.params.r() - 4.0).abs() < 1e-12);
        assert_eq!(c.m_ell, vec![2, -1]);
        assert!(c.solver.fw() && !c.solver.dirac());
        assert!(load(&["r=4", "compton_ratio=20"]).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "m_ell=",
            "r_sweep=",
            "dv=0.2",
            "nonsense=1",
            "solver=exact",
            "e_points=1",
            "density_sigma=0",
            "relativistic=maybe",
            "geometry=sphere",
        ] {
            assert!(matches!(load(&[bad]), Err(CliError::Config(_))), "{bad}");
        }
        assert!(matches!(load(&["noequals"]), Err(CliError::Config(_))));
    }

    #[test]
    fn text_parsing() {
        let m = parse_text("# header\n dv = 0.01 # inline\n\nv0=0.03\n").unwrap();
        assert_eq!(m.get("dv").unwrap(), "0.01");
        assert_eq!(m.get("v0").unwrap(), "0.03");
        assert!(parse_text("dv=1\ndv=2").is_err());
        assert!(parse_text("just words").is_err());
    }
}
