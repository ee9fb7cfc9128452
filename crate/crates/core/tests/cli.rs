use std::io::Write;
use std::process::{Command, Output};

const COUPLED: [&str; 8] = [
    "--alpha", "3", "--beta", "-2", "--gamma", "-7", "--delta", "5",
];

fn pointint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointint"))
        .args(args)
        .env_remove("POINTINT_THREADS")
        .output()
        .unwrap()
}

fn with_coupled(cmd: &str, extra: &[&str]) -> Vec<String> {
    std::iter::once(cmd)
        .chain(COUPLED)
        .chain(extra.iter().copied())
        .map(String::from)
        .collect()
}

fn run(args: &[String]) -> Output {
    pointint(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".json").tempfile().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

fn path(f: &tempfile::NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

fn row(csv: &str, n: usize) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
        .find(|r| r[0] == n.to_string())
        .unwrap_or_else(|| panic!("no row n={n} in\n{csv}"))
}

fn field(r: &[String], i: usize) -> f64 {
    r[i].parse().unwrap()
}

#[test]
fn spectrum_reports_known_levels() {
    let o = run(&with_coupled("spectrum", &[]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(
        out.lines().next(),
        Some("n,kind,k_exact,k_approx,difference")
    );
    let r10 = row(&out, 10);
    assert!((field(&r10, 2) - 0.894964).abs() < 1e-6);
    assert!((field(&r10, 3) - 0.905264).abs() < 1e-6);
    let r13 = row(&out, 13);
    assert!((field(&r13, 2) - 1.130869).abs() < 1e-6);
    assert!((field(&r13, 3) - 1.142775).abs() < 1e-6);
    // the deep three-delta level has no exact partner
    let r1 = row(&out, 1);
    assert_eq!((r1[1].as_str(), r1[2].as_str()), ("bound", ""));
}

#[test]
fn config_file_drives_gamma_zero_case() {
    let cfg = config_file(r#"{"alpha": 5, "beta": 3, "gamma": 0, "delta": 0.2}"#);
    let o = pointint(&["spectrum", "--config", path(&cfg)]);
    assert!(o.status.success());
    let r7 = row(&stdout(&o), 7);
    assert!((field(&r7, 2) - 0.775671).abs() < 1e-6);
    assert!((field(&r7, 3) - 0.775312).abs() < 1e-6);
}

#[test]
fn flags_override_config() {
    let cfg = config_file(r#"{"alpha": 5, "beta": 3, "gamma": 0, "delta": 0.2}"#);
    let a = pointint(&[
        "spectrum",
        "--config",
        path(&cfg),
        "--beta",
        "0",
        "--alpha",
        "1",
        "--delta",
        "1",
    ]);
    let free = pointint(&[
        "spectrum", "--alpha", "1", "--beta", "0", "--gamma", "0", "--delta", "1",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, free.stdout);
}

#[test]
fn wavefunction_json_reports_nodes() {
    let o = run(&with_coupled(
        "wavefunction",
        &["--n", "13", "--format", "json"],
    ));
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["nodes_exact"], 10);
    assert_eq!(doc["nodes_approx"], 12);
}

#[test]
fn wavefunction_csv_columns() {
    let o = run(&with_coupled("wavefunction", &["--n", "3"]));
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(
        out.lines().next(),
        Some("x,re_exact,im_exact,re_approx,im_approx,left_limit_at_0")
    );
    assert!(out.lines().count() > 100);
}

#[test]
fn converge_prints_slopes() {
    let o = run(&with_coupled("converge", &[]));
    assert!(o.status.success());
    let out = stdout(&o);
    let slope: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("# expansion_slope="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 3.0).abs() < 0.3);
}

#[test]
fn check_passes_then_fails_on_coarse_scan() {
    let o = run(&with_coupled("check", &[]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 10);

    let cfg = config_file(r#"{"alpha": 3, "beta": -2, "gamma": -7, "delta": 5, "grid_steps": 30}"#);
    let o = pointint(&["check", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_with_config_error() {
    let not_sl2 = pointint(&[
        "spectrum", "--alpha", "3", "--beta", "-2", "--gamma", "-7", "--delta", "4",
    ]);
    assert_eq!(not_sl2.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&not_sl2.stderr).contains("SL(2,R)"));

    let cfg = config_file(r#"{"alpha": 1, "delta": 1, "colour": "red"}"#);
    assert_eq!(
        pointint(&["spectrum", "--config", path(&cfg)])
            .status
            .code(),
        Some(2)
    );

    assert_eq!(
        run(&with_coupled("wavefunction", &[])).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&with_coupled("spectrum", &["--x1", "1", "--x2", "-1"]))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = with_coupled("spectrum", &["--format", "json"]);
    let mut outs = Vec::new();
    for threads in ["1", "4", "0"] {
        let o = Command::new(env!("CARGO_BIN_EXE_pointint"))
            .args(&args)
            .env("POINTINT_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        outs.push(o.stdout);
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(outs[0], run(&args).stdout);
}

fn wave_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|c| c.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

#[test]
fn free_ground_state_is_a_half_sine() {
    let o = pointint(&[
        "wavefunction",
        "--alpha",
        "1",
        "--beta",
        "0",
        "--gamma",
        "0",
        "--delta",
        "1",
        "--n",
        "1",
    ]);
    assert!(o.status.success());
    let rows = wave_rows(&stdout(&o));
    let amp = (2.0f64 / 30.0).sqrt();
    for r in &rows {
        let want = amp * (std::f64::consts::PI * (r[0] + 15.0) / 30.0).sin();
        assert!(
            (r[1] - want).abs() < 1e-6 && (r[3] - want).abs() < 1e-6,
            "{r:?}"
        );
    }
}

#[test]
fn gamma_zero_wave_jumps_only_in_exact_columns() {
    let o = pointint(&[
        "wavefunction",
        "--alpha",
        "5",
        "--beta",
        "3",
        "--gamma",
        "0",
        "--delta",
        "0.2",
        "--n",
        "7",
    ]);
    assert!(o.status.success());
    let rows = wave_rows(&stdout(&o));
    let i0 = rows.iter().position(|r| r[0] == 0.0).unwrap();
    let (left, right) = (rows[i0][5], rows[i0][1]);
    assert!(
        (right - 0.2 * left).abs() < 1e-6,
        "phi(+0)={right} phi(-0)={left}"
    );
    assert!((left - right).abs() > 0.1);
    let step = (rows[i0 + 1][3] - rows[i0 - 1][3]).abs();
    assert!(step < 0.05, "approx jumps by {step}");
}
