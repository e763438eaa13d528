//! End-to-end checks of the command-line surface: exit codes, config
//! validation, output formats, and the validate command's hooks.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_keyrate"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("keyrate-cli-tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn keyrate")
}

#[test]
fn unknown_config_key_exits_with_config_error() {
    let dir = tmp_dir("badcfg");
    let path = dir.join("bad.toml");
    std::fs::write(
        &path,
        "[sweep]\naxis = \"snr_db\"\nvalues = [1.0]\ncurves = [\"training\"]\nbogus = 1\n\n[system]\nt = 10\nsnr_db = 10.0\nrho = 0.5\n",
    )
    .unwrap();
    let out = run(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn sweep_without_config_or_preset_is_a_config_error() {
    let out = run(&["sweep"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_curve_list_rejected_before_compute() {
    let out = run(&["rates", "--curves", "", "--snr-db", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flag_values_are_config_errors() {
    for args in [
        vec!["rates", "--rnc", "psychic"],
        vec!["rates", "--eps1-rule", "Tplus1"],
        vec!["rates", "--method", "dice"],
        vec!["sweep", "--preset", "fig6"],
        vec!["optimize", "--target", "upper"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
    }
}

#[test]
fn validate_mutation_hook_fails_with_exit_2() {
    let out = bin()
        .args([
            "validate",
            "--inject-q1-sign-flip",
            "--samples",
            "50000",
        ])
        .output()
        .expect("spawn keyrate");
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL chain_identities"), "{stdout}");
}

#[test]
fn rates_emits_training_value_and_manifest() {
    let out = run(&[
        "rates", "--t", "10", "--rho", "0.95", "--snr-db", "30", "--curves", "training",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let total = doc["training"]["total"].as_f64().unwrap();
    assert!((total - 0.335_845_397_091_247_6).abs() < 1e-12);
    assert!(doc["manifest"]["config_hash"].as_str().unwrap().len() == 16);
    assert_eq!(doc["manifest"]["seed"].as_u64().unwrap(), 42);
    // rho = 0 carries no key
    let out = run(&["rates", "--rho", "0.0", "--snr-db", "30", "--curves", "training"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["training"]["total"].as_f64().unwrap(), 0.0);
}

#[test]
fn csv_round_trip_reproduces_rows_exactly() {
    let dir = tmp_dir("roundtrip");
    let cfg = dir.join("cfg.toml");
    std::fs::write(
        &cfg,
        "[sweep]\naxis = \"snr_db\"\nvalues = [0.0, 10.0, 20.0]\ncurves = [\"training\", \"lower_pd\"]\n\n[system]\nt = 5\nsnr_db = 10.0\nrho = 0.9\n\n[eval]\nseed = 11\nn_samples = 20000\n",
    )
    .unwrap();
    let out_path = dir.join("rows.csv");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();

    // parse and re-render every numeric cell at the documented 9
    // significant digits: the bytes must reproduce
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("snr_db,training,training_stderr,lower_pd,lower_pd_stderr"));
    for line in lines {
        for cell in line.split(',') {
            if cell == "NA" {
                continue;
            }
            let v: f64 = cell.parse().expect("numeric cell");
            let formatted = {
                // mirror of the emitter's format contract
                if v == 0.0 {
                    "0.0".to_string()
                } else {
                    let exp10 = v.abs().log10().floor() as i32;
                    format!("{:.*}", (8 - exp10).max(0) as usize, v)
                }
            };
            assert_eq!(formatted, cell, "cell {cell} does not round-trip");
        }
    }
}

#[test]
fn fig4_preset_emits_eleven_ordered_rows() {
    let dir = tmp_dir("fig4rows");
    let out_path = dir.join("fig4.csv");
    let out = run(&[
        "sweep",
        "--preset",
        "fig4",
        "--samples",
        "50000",
        "--seed",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    // header: snr_db, training, tr_se, upper, up_se, pd, pd_se, nd, nd_se, ...
    for r in &rows {
        let (upper, pd, pd_se, nd, nd_se) = (r[3], r[5], r[6], r[7], r[8]);
        let slack = 3.0 * (pd_se * pd_se + nd_se * nd_se).sqrt();
        assert!(
            nd <= pd + slack && pd <= upper + slack,
            "ordering violated at snr {}: {nd} / {pd} / {upper}",
            r[0]
        );
    }
}

#[test]
fn validate_default_passes_with_exit_0() {
    let out = run(&["validate", "--samples", "100000", "--seed", "12"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("PASS").count(), 5, "{stdout}");
}

#[test]
fn fig5_preset_training_column_scales_as_one_over_t() {
    let dir = tmp_dir("fig5");
    let out_path = dir.join("fig5.csv");
    let out = run(&[
        "sweep",
        "--preset",
        "fig5",
        "--samples",
        "20000",
        "--method",
        "quadrature",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut rows = Vec::new();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let t: f64 = cells[0].parse().unwrap();
        let training: f64 = cells[1].parse().unwrap();
        rows.push((t, training));
    }
    assert_eq!(rows.len(), 6);
    let c = -(1.0 - 0.99f64 * 0.99).log2();
    for (t, training) in rows {
        assert!(
            (training - c / t).abs() < 1e-7,
            "T={t}: training {training} vs {}",
            c / t
        );
    }
}

#[test]
fn fig5_snr_flag_switches_operating_point() {
    let a = run(&["sweep", "--preset", "fig5", "--format", "json", "--samples", "20000",
        "--method", "quadrature"]);
    let b = run(&["sweep", "--preset", "fig5", "--fig5-snr-35", "--format", "json",
        "--samples", "20000", "--method", "quadrature"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let da: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let db: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_ne!(
        da["manifest"]["config_hash"], db["manifest"]["config_hash"],
        "SNR flag must change the experiment identity"
    );
    let ua = da["rows"][0]["upper"]["rate"].as_f64().unwrap();
    let ub = db["rows"][0]["upper"]["rate"].as_f64().unwrap();
    assert!(ub > ua, "35 dB upper bound should exceed 30 dB: {ub} vs {ua}");
}

#[test]
fn optimize_reports_warm_start_and_trace() {
    let out = run(&[
        "optimize", "--target", "lower_nodisc", "--t", "10", "--rho", "0.95",
        "--snr-db", "30", "--method", "quadrature",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let best = doc["report"]["best_rate"]["total"].as_f64().unwrap();
    let warm = doc["report"]["warm_start_rate"].as_f64().unwrap();
    assert!(best >= warm - 1e-9, "best {best} vs warm {warm}");
    assert!(!doc["report"]["trace"].as_array().unwrap().is_empty());
}

#[test]
fn unwritable_output_path_is_a_numeric_failure() {
    let out = run(&[
        "rates",
        "--snr-db",
        "10",
        "--curves",
        "training",
        "--out",
        "/nonexistent-keyrate-dir/out.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn seed_env_var_is_honored_and_flag_wins() {
    let with_env = bin()
        .args(["rates", "--snr-db", "10", "--curves", "training"])
        .env("KEYRATE_SEED", "777")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(doc["manifest"]["seed"].as_u64().unwrap(), 777);
    let with_flag = bin()
        .args(["rates", "--snr-db", "10", "--curves", "training", "--seed", "5"])
        .env("KEYRATE_SEED", "777")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&with_flag.stdout).unwrap();
    assert_eq!(doc["manifest"]["seed"].as_u64().unwrap(), 5);
}
