//! Acceptance criteria 1-16. Each test prints one `criterion NN ... PASS|FAIL` line.

use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;

use watermelon_cli::table::{Table, WALL_CLOCK_KEY};
use watermelon_core::painleve::{PainleveGrid, SolverParams};
use watermelon_core::validation::{criterion_name, run_criterion};

fn grid() -> &'static PainleveGrid {
    static GRID: OnceLock<PainleveGrid> = OnceLock::new();
    GRID.get_or_init(|| PainleveGrid::compute(SolverParams::default()).expect("Hastings-McLeod solve"))
}

/// Writes past the test harness's output capture.
fn report_line(line: &str) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

fn check(id: u8) {
    let report = run_criterion(id, grid());
    report_line(&report.to_string());
    assert!(report.passed, "{report}");
}

macro_rules! criteria {
    ($($name:ident => $id:expr),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                check($id);
            }
        )*
    };
}

criteria! {
    criterion_01_hastings_mcleod => 1,
    criterion_02_f2_fredholm => 2,
    criterion_03_cdf_structure => 3,
    criterion_04_height_oracle => 4,
    criterion_05_height_convergence => 5,
    criterion_06_toda_identity => 6,
    criterion_07_lattice_rescaling => 7,
    criterion_08_norm_asymptotics => 8,
    criterion_09_subcritical_norms => 9,
    criterion_10_critical_kernel => 10,
    criterion_11_free_energy => 11,
    criterion_12_riemann_sum_order => 12,
    criterion_13_kernel_algebra => 13,
    criterion_14_small_a => 14,
    criterion_15_psi_compatibility => 15,
}

fn watermelon(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_watermelon"))
        .args(args)
        .current_dir(dir)
        .env("WATERMELON_CACHE_DIR", dir.join("cache"))
        .output()
        .expect("run watermelon")
}

/// Re-serialises a CSV table and compares bytes.
fn round_trips(text: &str) -> bool {
    Table::from_csv(text).and_then(|t| t.to_csv()).map(|back| back == text).unwrap_or(false)
}

#[test]
fn criterion_16_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = watermelon(dir.path(), &["validate", "--suite", "all"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let exit = out.status.code();
    let table = Table::from_csv(&stdout).expect("validate table parses");
    let drove_all = table.rows.len() == 15;
    let validate_round_trip = round_trips(&stdout);

    let tw = watermelon(dir.path(), &["tw", "--which", "f1", "--xmin", "-6", "--xmax", "4", "--step", "0.1"]);
    let tw_text = String::from_utf8(tw.stdout).unwrap();
    let tw_round_trip = tw.status.success() && round_trips(&tw_text);

    let passed = exit == Some(0) && drove_all && validate_round_trip && tw_round_trip;
    report_line(&format!(
        "criterion 16 {:<28} {} validate exit {:?}, {} criteria reported, round trip validate {} tw {}",
        "cli",
        if passed { "PASS" } else { "FAIL" },
        exit,
        table.rows.len(),
        validate_round_trip,
        tw_round_trip
    ));
    assert!(table.meta.iter().any(|(k, _)| k == WALL_CLOCK_KEY));
    assert!(passed, "criterion 16 failed: exit {exit:?}");
}

#[test]
fn criterion_names_are_distinct() {
    let names: std::collections::BTreeSet<_> = (1..=15).map(criterion_name).collect();
    assert_eq!(names.len(), 15);
}
