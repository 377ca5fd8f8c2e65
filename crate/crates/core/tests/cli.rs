use std::path::PathBuf;
use std::process::Command;

use tizx::cli::CsvTable;

fn zx(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zx")).args(args).output().expect("zx runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zx-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn map_prints_the_frame() {
    let out = zx(&["map", "--mrx", "3", "--symbols", "b4,b2,b3,b1", "--pilot", "+1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "-1,-1,-1,-1,-1,1,1,-1,-1,-1,-1,-1\n");

    let out = zx(&["map", "--mrx", "3", "--symbols", "b1,b4,b2", "--pilot", "-1", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let samples: Vec<i64> = v["samples"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
    assert_eq!(samples, [-1, -1, -1, -1, 1, 1, 1, 1, 1, -1]);
}

#[test]
fn bound_writes_csv_with_meta() {
    let path = scratch("bound.csv");
    let out = zx(&["bound", "--mrx", "3", "--gamma", "1:1:3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = CsvTable::read(&path).unwrap();
    assert_eq!(t.header, ["gamma", "ser_ub", "ber_ub", "err_est"]);
    assert_eq!(t.column("gamma").unwrap(), [1.0, 2.0, 3.0]);
    let meta = t.meta.unwrap();
    assert_eq!(meta.seed, Some(7));
    assert_eq!(meta.config_hash.len(), 64);
    for r in &t.rows {
        assert_eq!(r[2], r[1] / 2.0);
    }
}

#[test]
fn mc_is_reproducible() {
    let args = ["mc", "--mrx", "3", "--gamma", "1,2", "--blocks", "2000", "--seed", "3"];
    let a = zx(&args);
    let b = zx(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn plot_renders_svg() {
    let csv = scratch("line.csv");
    std::fs::write(&csv, "gamma,ser\n1,0.3\n2,0.05\n3,0.003\n").unwrap();
    let svg = scratch("plot.svg");
    let line = format!("{}:ser:bound", csv.display());
    let out = zx(&["plot", "--line", &line, "--out", svg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn exit_codes() {
    assert_eq!(zx(&["bound", "--gamma", "0"]).status.code(), Some(2));
    assert_eq!(zx(&["mc", "--blocks", "0"]).status.code(), Some(2));
    assert_eq!(zx(&["bound", "--mrx", "4"]).status.code(), Some(2));
    assert_eq!(zx(&["gamma-table", "--targets", "1e-300"]).status.code(), Some(3));
    assert_eq!(zx(&["bound", "--gamma", "1", "--out", "/nonexistent/dir/x.csv"]).status.code(), Some(4));
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "mrx = 3\n").unwrap();
    assert_eq!(zx(&["--config", cfg.to_str().unwrap(), "bound"]).status.code(), Some(2));
}
