use std::fs;
use std::path::Path;
use std::process::Command;

fn cylspin(cmd: &str, out: &Path, sets: &[&str]) -> i32 {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cylspin"));
    c.arg(cmd).arg("--out").arg(out);
    for s in sets {
        c.arg("--set").arg(s);
    }
    c.output().expect("binary runs").status.code().expect("exit code")
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn column(lines: &[String], name: &str) -> usize {
    lines[0].split(',').position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn modes_table_lists_both_m0_modes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cylspin("modes", dir.path(), &["m_ell=0..1"]), 0);
    let lines = data_lines(&dir.path().join("modes.csv"));
    let m = column(&lines, "m_ell");
    let s = column(&lines, "sigma");
    let m0_up = lines[1..]
        .iter()
        .filter(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[m] == "0" && f[s] == "1"
        })
        .count();
    assert_eq!(m0_up, 2);
    assert!(dir.path().join("modes.run").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sets = ["m_ell=-2..2", "e_points=21", "grid_n1=16", "grid_n2=16"];
    let commands = ["modes", "dispersion", "rotation", "density", "validate"];
    let snapshot = |dir: &Path| {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    for cmd in commands {
        assert_eq!(cylspin(cmd, dir.path(), &sets), 0, "{cmd}");
    }
    let first = snapshot(dir.path());
    for cmd in commands {
        assert_eq!(cylspin(cmd, dir.path(), &sets), 0, "{cmd}");
    }
    assert_eq!(first, snapshot(dir.path()));
}

#[test]
fn configuration_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cylspin("modes", dir.path(), &["dv=0.2"]), 1);
    assert_eq!(cylspin("modes", dir.path(), &["m_ell="]), 1);
    assert_eq!(cylspin("rotation", dir.path(), &["r_sweep="]), 1);
    assert_eq!(cylspin("modes", dir.path(), &["no_such_key=1"]), 1);
    assert_eq!(cylspin("modes", dir.path(), &["r=6", "compton_ratio=30"]), 1);
}

#[test]
fn solver_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cylspin("density", dir.path(), &["density_radial_index=7", "grid_n1=8", "grid_n2=8"]), 2);
}

#[test]
fn validation_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cylspin("validate", dir.path(), &["validate_samples=50"]), 0);
    assert_eq!(cylspin("validate", dir.path(), &["validate_samples=50", "tolerance_scale=0"]), 3);
    let lines = data_lines(&dir.path().join("validate.csv"));
    let status = column(&lines, "status");
    assert!(lines[1..].iter().any(|l| l.split(',').nth(status) == Some("fail")));
}

#[test]
fn empty_dispersion_branch_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cylspin("dispersion", dir.path(), &["m_ell=1", "e_min=-0.9", "e_max=-0.8", "e_points=11"]), 0);
    let files: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    assert!(!files.is_empty());
    for f in files {
        let text = fs::read_to_string(&f).unwrap();
        assert_eq!(data_lines(&f).len(), 1, "{}", f.display());
        assert!(text.contains("# omitted_points: 11"));
    }
}

#[test]
fn rotation_limit_row_collapses() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cylspin("rotation", dir.path(), &[]), 0);
    let path = dir.path().join("rotation.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("# abs_rate_strictly_decreasing: true"));
    let lines = data_lines(&path);
    let kind = column(&lines, "kind");
    let cols: Vec<usize> = lines[0]
        .split(',')
        .enumerate()
        .filter(|(_, c)| c.starts_with("dbeta_rot"))
        .map(|(i, _)| i)
        .collect();
    assert_eq!(cols.len(), 3);
    let limit: Vec<&str> = lines[1..]
        .iter()
        .find(|l| l.split(',').nth(kind) == Some("limit"))
        .expect("limit row")
        .split(',')
        .collect();
    let v: Vec<f64> = cols.iter().map(|&i| limit[i].parse().unwrap()).collect();
    for a in &v {
        for b in &v {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn density_writes_grid_and_image() {
    let dir = tempfile::tempdir().unwrap();
    let sets = ["geometry=unrolled", "grid_n1=32", "grid_n2=24", "pgm=true", "density_m=2"];
    assert_eq!(cylspin("density", dir.path(), &sets), 0);
    let pgm = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "pgm"))
        .expect("pgm file");
    let bytes = fs::read(pgm).unwrap();
    let header = b"P5\n";
    assert!(bytes.starts_with(header));
    let text = String::from_utf8_lossy(&bytes[..20]).into_owned();
    let dims: Vec<usize> = text.lines().nth(1).unwrap().split(' ').map(|s| s.parse().unwrap()).collect();
    let header_len = text.lines().take(3).map(|l| l.len() + 1).sum::<usize>();
    assert_eq!(bytes.len() - header_len, dims[0] * dims[1]);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# weaker well\nr = 4\nm_ell = 1\n").unwrap();
    let out = dir.path().join("out");
    let code = Command::new(env!("CARGO_BIN_EXE_cylspin"))
        .args(["modes", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--set", "vz_over_c=0.25"])
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(0));
    let text = fs::read_to_string(out.join("modes.csv")).unwrap();
    assert!(text.contains("# config r = 4"));
    assert!(text.contains("# config vz_over_c = 0.25"));
}

#[test]
fn help_and_bad_usage() {
    assert_eq!(cylspin::cli_io::run(["cylspin", "--help"]), 0);
    assert_eq!(cylspin::cli_io::run(["cylspin", "bogus"]), 1);
}
