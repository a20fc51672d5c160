use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn gaugesplit(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugesplit"))
        .args(args)
        .arg("--out-dir")
        .arg(out_dir)
        .output()
        .unwrap()
}

fn run(cfg: &Path, out_dir: &Path) -> Output {
    gaugesplit(&["run", cfg.to_str().unwrap()], out_dir)
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn oscillator_reaches_minus_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config("oscillator.toml"), tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let y = column(&csv, "y_d0_re");
    assert!((y.last().unwrap() + 1.0).abs() < 1e-7);
    assert!((column(&csv, "t").last().unwrap() - std::f64::consts::PI).abs() < 1e-15);
    let summary = fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("status: ok"));
}

#[test]
fn airy_comparison_is_tight() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config("airy.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("comparison.csv")).unwrap();
    let abs = column(&csv, "abs_err");
    let reference = column(&csv, "ref_re");
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = abs.iter().fold(0.0f64, |m, &v| m.max(v));
    assert!(worst / scale <= 1e-6, "{worst:e}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for cfg in ["airy.toml", "power_law3.toml", "wkb_scaling.toml"] {
        let (a, b) = (
            tmp.path().join(format!("{cfg}.a")),
            tmp.path().join(format!("{cfg}.b")),
        );
        assert_eq!(run(&config(cfg), &a).status.code(), Some(0));
        assert_eq!(run(&config(cfg), &b).status.code(), Some(0));
        for file in ["trajectory.csv", "comparison.csv", "summary.txt"] {
            assert_eq!(
                fs::read(a.join(file)).unwrap(),
                fs::read(b.join(file)).unwrap(),
                "{cfg}/{file}"
            );
        }
    }
}

#[test]
fn singular_gauge_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config("singular.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("SingularGauge"), "{stderr}");
    let summary = fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("status: failed"));
}

#[test]
fn equal_gauges_fail_at_the_initial_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
[ode]
order = 2
coeffs = ["1", "0"]
[ivp]
t1 = 0.5
t_end = 2.0
y0 = [[1.0, 0.0], [0.0, 0.0]]
[gauge]
family = "analytic"
rows = [["i", "i"]]
"#,
    );
    let out = run(&cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("SingularGauge at t = 0.5"), "{stderr}");
}

#[test]
fn bad_configs_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.toml");
    assert_eq!(run(&missing, tmp.path()).status.code(), Some(1));

    let cfg = write_config(
        tmp.path(),
        "[ode]\norder = 2\ncoeffs = [\"1\"]\n[ivp]\nt1 = 0.0\nt_end = 1.0\ny0 = [1.0, 0.0]\n",
    );
    let out = run(&cfg, tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));

    let cfg = write_config(
        tmp.path(),
        "[ode]\norder = 2\ncoeffs = [\"1\", \"0\"]\nbogus = 1\n",
    );
    assert_eq!(run(&cfg, tmp.path()).status.code(), Some(1));

    let out = gaugesplit(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_an_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("wkb_scaling.toml");
    let out = gaugesplit(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "params.lambda",
            "--values",
            "2,4,8",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("value,max_rel_error,steps,status\n"));
    let values = column(&csv, "value");
    assert_eq!(values, vec![2.0, 4.0, 8.0]);
    let errs = column(&csv, "max_rel_error");
    for w in errs.windows(2) {
        let r = w[1] / w[0];
        assert!((r - 0.5).abs() < 0.15, "{errs:?}");
    }
    assert!(tmp
        .path()
        .join("run001_params.lambda=4/trajectory.csv")
        .exists());
}

#[test]
fn sweep_without_values_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("wkb_scaling.toml");
    let out = gaugesplit(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "params.lambda",
            "--values",
            "",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let out = gaugesplit(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "params.missing",
            "--values",
            "1",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_with_only_failures_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("singular.toml");
    let out = gaugesplit(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "ivp.t_end",
            "--values",
            "3,4",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(
        csv.lines().skip(1).all(|l| l.contains("SingularGauge")),
        "{csv}"
    );
}
