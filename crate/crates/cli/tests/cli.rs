//! End-to-end checks of the `ems` binary: outputs, determinism, and the
//! documented exit codes (0 ok, 2 config/usage, 3 data, 4 training).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ems(dir: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ems"));
    cmd.current_dir(dir);
    cmd.env_remove("EMS_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Generates the admissions table and writes a small two-family config.
fn setup_admissions(dir: &Path) {
    let out = run(ems(dir).args(["gen-data", "--schema", "admissions"]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    fs::write(
        dir.join("run.toml"),
        "[dataset]\n\
         path = \"data/admissions.csv\"\n\
         schema = \"admissions\"\n\n\
         [run]\n\
         out_dir = \"out\"\n\
         families = [\"lr\", \"nb\"]\n\
         techniques = [\"baseline\", \"override\"]\n",
    )
    .unwrap();
}

#[test]
fn gen_data_writes_both_tables_with_expected_row_counts() {
    let tmp = TempDir::new().unwrap();
    let out = run(&mut ems(tmp.path()).arg("gen-data"));
    assert!(out.status.success(), "{}", stderr_of(&out));
    for (name, rows) in [("admissions", 770), ("loans", 32_582)] {
        let text = fs::read_to_string(tmp.path().join("data").join(format!("{name}.csv")))
            .expect("table written");
        assert_eq!(text.lines().count(), rows + 1, "{name}: rows plus header");
    }
}

#[test]
fn prepare_writes_label_views_and_snapshot() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args(["prepare", "--config", "run.toml"]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(stdout_of(&out).contains("770 rows"), "{}", stdout_of(&out));
    for name in [
        "admissions_annotated_original.csv",
        "admissions_annotated_moral.csv",
        "admissions_snapshot.txt",
    ] {
        assert!(tmp.path().join("out").join(name).exists(), "missing {name}");
    }
    let snapshot =
        fs::read_to_string(tmp.path().join("out/admissions_snapshot.txt")).unwrap();
    assert!(snapshot.contains("dataset_sha256="), "{snapshot}");
    assert!(snapshot.contains("tau_default = 0.1"), "{snapshot}");
}

#[test]
fn compare_is_deterministic_across_reruns() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args(["compare", "--config", "run.toml"]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let results = tmp.path().join("out/results_admissions.csv");
    let first = fs::read(&results).unwrap();
    // Four cells: two families by two techniques.
    let text = String::from_utf8(first.clone()).unwrap();
    let body = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(body, 5, "header plus four rows:\n{text}");

    let again = run(ems(tmp.path()).args(["compare", "--config", "run.toml"]));
    assert!(again.status.success(), "{}", stderr_of(&again));
    assert_eq!(first, fs::read(&results).unwrap(), "rerun changed bytes");
}

#[test]
fn compare_results_carry_a_reproduction_header() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args(["compare", "--config", "run.toml"]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let csv = fs::read_to_string(tmp.path().join("out/results_admissions.csv")).unwrap();
    for key in ["# dataset_path=", "# dataset_sha256=", "# mapping.seed ="] {
        assert!(csv.contains(key), "missing {key}:\n{csv}");
    }
    let md = fs::read_to_string(tmp.path().join("out/results_admissions.md")).unwrap();
    assert!(md.contains("<!-- dataset_sha256="), "{md}");
}

#[test]
fn family_flag_restricts_the_comparison_table() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args([
        "compare",
        "--config",
        "run.toml",
        "--families",
        "lr",
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text =
        fs::read_to_string(tmp.path().join("out/results_admissions.csv")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("dataset,"))
        .collect();
    assert_eq!(rows.len(), 2, "one row per technique:\n{text}");
    for row in rows {
        assert!(row.contains("logistic_regression"), "{row}");
    }
}

#[test]
fn train_then_evaluate_round_trips_a_model() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args([
        "train",
        "--config",
        "run.toml",
        "--families",
        "lr",
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let model = tmp.path().join("out/admissions_logistic_regression.model");
    assert!(model.exists());

    let eval = run(ems(tmp.path()).args([
        "evaluate",
        "--config",
        "run.toml",
        "--model",
        "out/admissions_logistic_regression.model",
    ]));
    assert!(eval.status.success(), "{}", stderr_of(&eval));
    let text = stdout_of(&eval);
    assert!(text.contains("family=logistic_regression"), "{text}");
    assert!(text.contains("accuracy=0."), "{text}");
    assert!(text.contains("moral_agreement=0."), "{text}");
}

#[test]
fn sweep_emits_plot_ready_csvs() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args([
        "sweep",
        "--config",
        "run.toml",
        "--axis",
        "kappa",
        "--grid",
        "1,5",
    ]));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let table =
        fs::read_to_string(tmp.path().join("out/sweep_admissions_kappa.csv")).unwrap();
    assert_eq!(
        table.lines().filter(|l| !l.starts_with('#')).count(),
        3,
        "header plus one row per grid value:\n{table}"
    );
    let plot =
        fs::read_to_string(tmp.path().join("out/sweep_admissions_kappa_accuracy.csv"))
            .unwrap();
    assert!(plot.starts_with("kappa,accuracy\n"), "{plot}");
}

#[test]
fn bad_weight_sum_exits_2_and_names_the_key() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    fs::write(
        tmp.path().join("bad.toml"),
        "[dataset]\npath = \"data/admissions.csv\"\nschema = \"admissions\"\n\
         [mapping]\nweights = [0.5, 0.4, 0.2]\n",
    )
    .unwrap();
    let out = run(ems(tmp.path()).args(["prepare", "--config", "bad.toml"]));
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("mapping.weights"), "{}", stderr_of(&out));
}

#[test]
fn unknown_config_key_exits_2_and_names_the_key() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    fs::write(
        tmp.path().join("typo.toml"),
        "[dataset]\npath = \"data/admissions.csv\"\nschema = \"admissions\"\n\
         [run]\nmaster_sede = 7\n",
    )
    .unwrap();
    let out = run(ems(tmp.path()).args(["compare", "--config", "typo.toml"]));
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("master_sede"), "{}", stderr_of(&out));
}

#[test]
fn out_of_range_tail_fraction_exits_2() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args([
        "sweep",
        "--config",
        "run.toml",
        "--axis",
        "theta",
        "--grid",
        "2.0",
    ]));
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn missing_dataset_exits_3() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("run.toml"),
        "[dataset]\npath = \"data/nowhere.csv\"\nschema = \"admissions\"\n",
    )
    .unwrap();
    let out = run(ems(tmp.path()).args(["prepare", "--config", "run.toml"]));
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
}

#[test]
fn env_var_supplies_default_output_directory() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    fs::write(
        tmp.path().join("noout.toml"),
        "[dataset]\npath = \"data/admissions.csv\"\nschema = \"admissions\"\n",
    )
    .unwrap();
    let out = run(ems(tmp.path())
        .args(["prepare", "--config", "noout.toml"])
        .env("EMS_OUT_DIR", "elsewhere"));
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(tmp
        .path()
        .join("elsewhere/admissions_snapshot.txt")
        .exists());
}

#[test]
fn dataset_drift_after_prepare_warns_on_compare() {
    let tmp = TempDir::new().unwrap();
    setup_admissions(tmp.path());
    let out = run(ems(tmp.path()).args(["prepare", "--config", "run.toml"]));
    assert!(out.status.success(), "{}", stderr_of(&out));

    // Regenerate the table with a different seed: same schema, new bytes.
    let regen = run(ems(tmp.path()).args([
        "gen-data",
        "--schema",
        "admissions",
        "--seed",
        "7",
    ]));
    assert!(regen.status.success(), "{}", stderr_of(&regen));

    let cmp = run(ems(tmp.path()).args(["compare", "--config", "run.toml"]));
    assert!(cmp.status.success(), "{}", stderr_of(&cmp));
    assert!(
        stderr_of(&cmp).contains("has changed since"),
        "{}",
        stderr_of(&cmp)
    );
}
