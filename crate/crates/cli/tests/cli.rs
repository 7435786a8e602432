use std::fs;
use std::process::{Command, Output};

fn nlcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlcs"))
        .args(args)
        .output()
        .expect("failed to launch nlcs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn point_prints_one_row() {
    let o = nlcs(&[
        "point", "--parity", "even", "--i", "1", "--j", "0", "--r", "1", "--eta", "0.4",
        "--lambda", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert_eq!(column(&text, "status"), vec!["ok"]);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(nlcs(&["--help"]).status.code(), Some(0));
    assert_eq!(nlcs(&["--version"]).status.code(), Some(0));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = nlcs(&["point", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn divergent_point_exits_three() {
    let o = nlcs(&[
        "point", "--parity", "even", "--i", "1", "--j", "0", "--r", "1", "--eta", "1e-4",
        "--lambda", "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_cap"));
}

#[test]
fn quick_validate_passes() {
    let o = nlcs(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn injected_fault_is_caught() {
    let o = nlcs(&["validate", "--inject-fault", "a2-sign"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("moments") && l.contains("FAIL")), "{text}");
}

#[test]
fn sweep_rows_and_odd_origin() {
    let o = nlcs(&[
        "sweep", "--parity", "even,odd", "--i", "2", "--j", "1", "--r", "1", "--eta", "0.4",
        "--lambda-min", "0", "--lambda-max", "2", "--lambda-steps", "5", "--outputs", "q,g2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 2 * 5);
    let parity = column(&text, "parity");
    let lambda = column(&text, "lambda_abs");
    let q = column(&text, "q");
    let row = (0..parity.len())
        .find(|&k| parity[k] == "odd" && lambda[k].parse::<f64>().unwrap() == 0.0)
        .unwrap();
    assert_eq!(q[row].parse::<f64>().unwrap(), -1.0);
}

#[test]
fn sweep_is_thread_count_independent() {
    let base = [
        "sweep", "--parity", "even,odd", "--ij", "1:0,2:1", "--r", "0.5,2", "--eta", "0.4",
        "--lambda-min", "0", "--lambda-max", "5", "--lambda-steps", "11",
    ];
    let one = nlcs(&[&base[..], &["--threads", "1"]].concat());
    let four = nlcs(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn wigner_is_thread_count_independent() {
    let base = [
        "wigner", "--parity", "odd", "--i", "2", "--j", "1", "--r", "1", "--eta", "0.4",
        "--lambda", "2", "--re-min", "-2", "--re-max", "2", "--im-min", "-2", "--im-max", "2",
        "--step", "0.25",
    ];
    let one = nlcs(&[&base[..], &["--threads", "1"]].concat());
    let four = nlcs(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert!(stdout(&one).contains("re,im,w"));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "parity = \"odd\"\ni = 2\nj = 1\nr = 1.5\neta = 0.4\nlambda = 3.0\nformat = \"json\"\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = nlcs(&["point", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0));
    let doc: String = stdout(&o);
    assert!(doc.trim_start().starts_with(['[', '{']), "{doc}");
    assert!(doc.contains("\"odd\""));

    let o = nlcs(&["point", "--config", cfg, "--parity", "even", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(column(&text, "parity"), vec!["even"]);
    assert_eq!(column(&text, "r")[0].parse::<f64>().unwrap(), 1.5);
}

#[test]
fn reproduce_writes_figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5");
    let o = nlcs(&["reproduce", "fig5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 6);
}
