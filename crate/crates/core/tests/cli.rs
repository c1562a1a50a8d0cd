use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nde_shockkit::output::read_csv;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nde-shockkit"));
    c.env_remove("NDE_SHOCKKIT_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn value(out: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

fn run_dir(out: &Output) -> PathBuf {
    PathBuf::from(value(out, "run_dir"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn out_of_range_alpha_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["shoot", "--alpha", "0.7", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: kind=range msg="), "{err}");
    assert!(err.contains("[-1/10, 1/2]"), "{err}");
}

#[test]
fn unknown_subcommand_and_bad_values_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let o = run(&["euler", "--alpha", "abc", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: kind=usage"));
}

#[test]
fn unknown_config_key_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("x.conf");
    std::fs::write(&cfg, "alpha = 0.2\nbogus = 1\n").unwrap();
    let o = run(&["euler", "--config", s(&cfg), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn numerical_failure_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["shoot", "--y-end", "-5", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: kind=fit msg="), "{err}");
}

#[test]
fn shoot_writes_tables_and_a_reusable_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = run(&[
        "shoot",
        "--alpha",
        "0.1",
        "--f0",
        "0.1",
        "--f2",
        "0",
        "--tune",
        "f1",
        "--out",
        s(&a),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = run_dir(&o);
    assert_eq!(dir.file_name().unwrap().to_str().unwrap(), value(&o, "run_id"));

    let (header, rows) = read_csv(&dir.join("shoot.csv")).unwrap();
    assert_eq!(header[4], "tuned_value");
    let tuned: f64 = value(&o, "tuned_value").parse().unwrap();
    assert_eq!(rows[0][4], tuned);
    let (header, rows) = read_csv(&dir.join("profile.csv")).unwrap();
    assert_eq!(header, ["y", "f", "fp", "fpp"]);
    assert_eq!(rows[0][..3], [0.0, 0.1, tuned]);
    assert!(std::fs::read_to_string(dir.join("profile.svg"))
        .unwrap()
        .contains("<polyline"));

    let b = tmp.path().join("b");
    let manifest = dir.join("manifest.conf");
    let o2 = run(&["shoot", "--config", s(&manifest), "--out", s(&b)]);
    assert_eq!(o2.status.code(), Some(0));
    let dir2 = run_dir(&o2);
    assert_eq!(dir.file_name(), dir2.file_name());
    for f in ["shoot.csv", "profile.csv", "profile.svg"] {
        assert_eq!(
            std::fs::read(dir.join(f)).unwrap(),
            std::fs::read(dir2.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn flags_beat_env_beats_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("e.conf");
    let (file_out, env_out, flag_out) = (tmp.path().join("file"), tmp.path().join("env"), tmp.path().join("flag"));
    std::fs::write(
        &cfg,
        format!("# euler\nalpha = 0.4\npoints = 11\nout = {}\n", file_out.display()),
    )
    .unwrap();

    let o = run(&["euler", "--config", s(&cfg)]);
    assert!(run_dir(&o).starts_with(&file_out));
    let o = bin()
        .args(["euler", "--config", s(&cfg)])
        .env("NDE_SHOCKKIT_OUT", &env_out)
        .output()
        .unwrap();
    assert!(run_dir(&o).starts_with(&env_out));
    let o = bin()
        .args(["euler", "--config", s(&cfg), "--points", "21", "--out", s(&flag_out)])
        .env("NDE_SHOCKKIT_OUT", &env_out)
        .output()
        .unwrap();
    let dir = run_dir(&o);
    assert!(dir.starts_with(&flag_out));
    let manifest = std::fs::read_to_string(dir.join("manifest.conf")).unwrap();
    assert!(manifest.contains("alpha = 0.4\n"));
    assert!(manifest.contains("points = 21\n"));
    let (_, rows) = read_csv(&dir.join("euler.csv")).unwrap();
    assert_eq!(rows.len(), 21);
}

#[test]
fn regpde_snapshots_have_y_v_header() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["regpde", "--n", "64", "--taus", "1e-4,2e-4", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(0));
    let dir = run_dir(&o);
    for k in 0..2 {
        let (h, rows) = read_csv(&dir.join(format!("snapshot_{k}.csv"))).unwrap();
        assert_eq!(h, ["y", "v"]);
        assert_eq!(rows.len(), 65);
        assert_eq!(rows[64], [0.0, 0.0]);
    }
    let manifest = std::fs::read_to_string(dir.join("manifest.conf")).unwrap();
    assert!(manifest.contains("# boundary:"));
    assert!(manifest.contains("taus = 0.0001,0.0002\n"));
}

#[test]
fn blowup_plots_one_curve_per_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["blowup", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(run_dir(&o).join("profiles.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
    for a in ["0.5", "0.4", "0.3", "0.2", "0.1", "0.01"] {
        assert!(svg.contains(&format!(">alpha = {a}<")), "{a}");
    }
}
