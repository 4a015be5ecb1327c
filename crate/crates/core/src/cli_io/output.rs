//! CSV, PGM and sidecar writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::wavefield::FieldGrid;

use super::config::RunConfig;
use super::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty field for values that were not computed.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// One CSV file: `#` metadata lines, a column header, then rows.
pub struct Table {
    pub columns: Vec<String>,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), meta: Vec::new(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Creates the output directory and checks that it accepts files.
pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let probe = dir.join(".cylspin-write-probe");
    File::create(&probe).map_err(|e| io_err(dir, e))?;
    fs::remove_file(&probe).map_err(|e| io_err(&probe, e))
}

fn write_header(w: &mut impl Write, command: &str, config: &RunConfig) -> std::io::Result<()> {
    writeln!(w, "# cylspin {command}")?;
    for (k, v) in config.resolved() {
        writeln!(w, "# config {k} = {v}")?;
    }
    Ok(())
}

pub fn write_table(path: &Path, command: &str, config: &RunConfig, table: &Table) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let result = (|| -> std::io::Result<()> {
        write_header(&mut w, command, config)?;
        for (k, v) in &table.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", table.columns.join(","))?;
        for row in &table.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    })();
    result.map_err(|e| io_err(path, e))
}

/// Grid as CSV: the first column holds the row coordinate, the header line
/// holds the column coordinates.
pub fn write_grid(path: &Path, command: &str, config: &RunConfig, grid: &FieldGrid) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let m = &grid.meta;
    let (row_name, col_name) = grid.geometry.axis_names();
    let result = (|| -> std::io::Result<()> {
        write_header(&mut w, command, config)?;
        writeln!(w, "# geometry: {:?}", grid.geometry)?;
        writeln!(w, "# kind: {}", m.kind)?;
        writeln!(w, "# m_abs: {}", m.m_abs)?;
        writeln!(w, "# sigma: {}", m.sigma.map(|s| s.to_string()).unwrap_or_default())?;
        writeln!(w, "# radial_index: {}", m.radial_index)?;
        writeln!(w, "# u: {}", fmt_num(m.u))?;
        writeln!(w, "# w: {}", fmt_num(m.w))?;
        writeln!(w, "# norm_a2: {}", fmt_num(m.norm_a2))?;
        writeln!(w, "# d_beta_rot_a: {}", fmt_opt(m.d_beta_rot_a))?;
        writeln!(w, "# time_phase: {}", fmt_opt(m.time_phase))?;
        writeln!(w, "# captured_probability: {}", fmt_opt(m.captured_probability))?;
        writeln!(w, "# grid_integral: {}", fmt_opt(m.grid_integral))?;
        writeln!(w, "# normalization_error_bound: {}", fmt_opt(m.normalization_error_bound))?;
        writeln!(w, "# lower_component_weight: {}", fmt_opt(m.lower_component_weight))?;
        write!(w, "{row_name}\\{col_name}")?;
        for c in &grid.cols {
            write!(w, ",{}", fmt_num(*c))?;
        }
        writeln!(w)?;
        for (i, r) in grid.rows.iter().enumerate() {
            write!(w, "{}", fmt_num(*r))?;
            for v in grid.row(i) {
                write!(w, ",{}", fmt_num(*v))?;
            }
            writeln!(w)?;
        }
        w.flush()
    })();
    result.map_err(|e| io_err(path, e))
}

/// Binary 8-bit grayscale, scaled so the grid maximum maps to 255.
pub fn write_pgm(path: &Path, grid: &FieldGrid) -> Result<(), CliError> {
    let max = grid.max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut bytes = format!("P5\n{} {}\n255\n", grid.n_cols(), grid.n_rows()).into_bytes();
    bytes.extend(grid.samples.iter().map(|&v| (v * scale).round().clamp(0.0, 255.0) as u8));
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// `<command>.run` beside the data files: arguments and written files.
pub fn write_sidecar(dir: &Path, command: &str, args: &[String], files: &[PathBuf]) -> Result<(), CliError> {
    let path = dir.join(format!("{command}.run"));
    let mut text = String::new();
    text.push_str(&format!("cylspin {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("command {command}\n"));
    text.push_str(&format!("args {}\n", args.join(" ")));
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        text.push_str(&format!("wrote {name}\n"));
    }
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}
