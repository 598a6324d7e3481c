use std::path::Path;
use std::process::{Command, Output};

use bsq_core::output::Table;

fn bsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).expect("write fixture");
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn run_with_zero_end_time_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("tg.cfg");
    write(
        &cfg,
        &format!("grid_n=32\npreset=taylor-green\nt_end=0\noutput_dir={}\n", out.display()),
    );
    let o = bsq(&["run", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let table = Table::read(&out.join("diagnostics.csv")).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.header[0], "t");
    assert!(table.header.contains(&"lp_omega_16".to_string()));
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("stop_reason=completed"));
    let echo = std::fs::read_to_string(out.join("config.resolved")).unwrap();
    assert!(echo.contains("grid_n=32"));
}

#[test]
fn csv_cells_use_twelve_digit_exponent_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("tg.cfg");
    write(
        &cfg,
        &format!(
            "grid_n=32\npreset=taylor-green\nt_end=0.002\ndt_max=1e-4\ncadence=5\noutput_dir={}\n",
            out.display()
        ),
    );
    assert_eq!(bsq(&["run", path_str(&cfg)]).status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    for cell in row.split(',') {
        let (mantissa, exp) = cell.split_once('e').expect("scientific");
        assert_eq!(mantissa.trim_start_matches('-').len(), 14, "{cell}");
        assert!(exp.starts_with('+') || exp.starts_with('-'), "{cell}");
    }
    let l2 = Table::read(&out.join("diagnostics.csv")).unwrap().column("l2_u").unwrap();
    assert!(l2.len() >= 5);
    assert!(l2.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = bsq(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn operators_suite_passes() {
    let o = bsq(&["verify", "operators"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| !l.starts_with("FAIL")), "{text}");
}

#[test]
fn bad_config_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(&cfg, "grid_n=63\n");
    let o = bsq(&["run", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid_n must be even"));

    write(&cfg, "viscosity=2\n");
    let o = bsq(&["run", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("viscosity"));

    assert_eq!(bsq(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn fit_recovers_synthetic_rates() {
    let dir = tempfile::tempdir().unwrap();
    let exp = dir.path().join("exp.csv");
    let gauss = dir.path().join("gauss.csv");
    let mut a = String::from("t,value\n");
    let mut b = String::from("t,value\n");
    for i in 0..=40 {
        let t = i as f64 * 0.05;
        a.push_str(&format!("{t},{}\n", 2.0 * (3.0 * t).exp()));
        b.push_str(&format!("{t},{}\n", (t * t).exp()));
    }
    write(&exp, &a);
    write(&gauss, &b);

    let o = bsq(&["fit", path_str(&exp), "--column", "value", "--from", "0", "--to", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find(|l| l.starts_with("fit ")).expect("machine line");
    assert!(line.contains("b=3.000000"), "{line}");

    let o = bsq(&["fit", path_str(&gauss), "--column", "value", "--from", "0", "--to", "2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find(|l| l.starts_with("fit ")).expect("machine line");
    assert!(line.contains("q=1.000000"), "{line}");

    let o = bsq(&["fit", path_str(&exp), "--column", "missing"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn fit_rejects_nonpositive_values() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    let mut s = String::from("t,value\n");
    for i in 0..10 {
        s.push_str(&format!("{i},{}\n", if i == 4 { 0.0 } else { 1.0 + i as f64 }));
    }
    write(&csv, &s);
    let o = bsq(&["fit", path_str(&csv), "--column", "value", "--from", "0", "--to", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 5"));
}

#[test]
fn plot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    write(&csv, "t,a,b\n0,1,0\n0.5,2,1\n1,4,3\n");
    let svg1 = dir.path().join("1.svg");
    let svg2 = dir.path().join("2.svg");
    for svg in [&svg1, &svg2] {
        let o = bsq(&["plot", path_str(&csv), "--columns", "a", "--out", path_str(svg)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(&svg1).unwrap();
    assert_eq!(a, std::fs::read(&svg2).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().matches("<polyline").count(), 1);

    let o = bsq(&["plot", path_str(&csv), "--columns", "b", "--out", path_str(&svg1), "--log"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));
}

#[test]
fn sweep_runs_independent_configs() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (i, preset) in ["taylor-green", "zero"].iter().enumerate() {
        let cfg = dir.path().join(format!("{i}.cfg"));
        write(
            &cfg,
            &format!(
                "grid_n=16\npreset={preset}\nt_end=0.001\noutput_dir={}\n",
                dir.path().join(format!("o{i}")).display()
            ),
        );
        paths.push(cfg);
    }
    let args: Vec<&str> = ["sweep", "--jobs", "2"]
        .into_iter()
        .chain(paths.iter().map(|p| path_str(p)))
        .collect();
    let o = bsq(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..2 {
        assert!(dir.path().join(format!("o{i}/diagnostics.csv")).exists());
    }

    let dup = dir.path().join("dup.cfg");
    std::fs::copy(&paths[0], &dup).unwrap();
    let o = bsq(&["sweep", path_str(&paths[0]), path_str(&dup)]);
    assert_eq!(o.status.code(), Some(64));
}
