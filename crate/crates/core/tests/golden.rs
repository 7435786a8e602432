//! Byte-level regression of a small sweep. Set `NLCS_BLESS=1` to rewrite
//! the stored table after an intended change.

use std::path::PathBuf;

use nlcs_core::cli_io::{emit_table, run_sweep, LambdaGrid, OutputField, Spacing, SweepConfig, TableFormat};
use nlcs_core::NonlinearSpec;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_sweep.csv")
}

fn render() -> Vec<u8> {
    let mut config = SweepConfig::new(vec![
        NonlinearSpec::degenerate(2.0).unwrap(),
        NonlinearSpec::degenerate(0.5).unwrap(),
        NonlinearSpec::new(1, 0, 1.0, 0.8).unwrap(),
        NonlinearSpec::new(2, 1, 1.5, 0.4).unwrap(),
    ]);
    config.lambda_grid = LambdaGrid { min: 0.0, max: 12.0, count: 7, spacing: Spacing::Linear };
    config.outputs = OutputField::ALL.to_vec();
    let rows = run_sweep(&config).unwrap();
    let mut buf = Vec::new();
    emit_table(&rows, &config.outputs, TableFormat::Csv, &mut buf).unwrap();
    buf
}

#[test]
fn sweep_matches_golden_table() {
    let got = render();
    if std::env::var_os("NLCS_BLESS").is_some() {
        std::fs::write(golden_path(), &got).unwrap();
        return;
    }
    let want = std::fs::read(golden_path()).unwrap();
    assert_eq!(String::from_utf8(got).unwrap(), String::from_utf8(want).unwrap());
}
