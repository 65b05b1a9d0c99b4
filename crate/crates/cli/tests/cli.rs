use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tlsgap(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tlsgap"));
    cmd.args(args).env_remove("TLSGAP_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn lists_every_preset() {
    let out = tlsgap(&["list-presets"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig3", "fig4a", "fig4b", "angular_average", "bulk_validation", "loss_sweep", "custom"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn configuration_errors_exit_2_with_json() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("x");
    let dir = dir.to_str().unwrap();
    for args in [
        vec!["run", "fig4a", "--tolerance", "0.5", "--output-dir", dir],
        vec!["run", "no_such_preset", "--output-dir", dir],
        vec!["run", "--output-dir", dir],
    ] {
        let out = tlsgap(&args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let j = stderr_json(&out);
        assert_eq!(j["error"], "config");
        assert!(j["message"].as_str().unwrap().len() > 5);
    }
    assert!(!tmp.path().join("x").exists());

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "preset = \"fig3\"\nfig3_depths = [1.5]\n").unwrap();
    let out = tlsgap(&["run", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("env_out");
    let out = tlsgap(&["run", "loss_sweep"], &[("TLSGAP_OUTPUT_DIR", dir.to_str().unwrap())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["failures"], 0);
    assert!(dir.join("loss_sweep.csv").exists());
    assert!(dir.join("plot/loss_series.csv").exists());
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn config_file_with_relative_curve_path() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("curve.csv"),
        "theta_radians,depth\n0,0.9\n0.785398,0.6\n1.570796,0.3\n",
    )
    .unwrap();
    let cfg = tmp.path().join("ang.toml");
    fs::write(
        &cfg,
        format!(
            "preset = \"angular_average\"\nangular_curve = \"curve.csv\"\noutput_dir = \"{}\"\n",
            tmp.path().join("ang").display()
        ),
    )
    .unwrap();
    let out = tlsgap(&["run", "--config", cfg.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("ang/angular_average.csv")).unwrap();
    assert!(table.contains(",tabulated,"));
}

#[test]
fn sweep_and_seed_flags() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(
        &cfg,
        "preset = \"fig4b\"\nt1_min_grid = [1e-7]\nseeds = [0, 1]\nhorizon = 5e-6\noutput_points = 51\n\n[ensemble]\nn_tls = 40\n",
    )
    .unwrap();
    let dir = tmp.path().join("sw");
    let out = tlsgap(
        &[
            "sweep", "--config", cfg.to_str().unwrap(), "--axis", "ensemble.n_tls=20,40", "--seed", "7",
            "--jobs", "1", "--output-dir", dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("plot/point_0001/heatmap_matrix.csv").exists());
    let points = fs::read_to_string(dir.join("sweep_points.csv")).unwrap();
    assert!(points.lines().nth(1).unwrap().starts_with("0,20,7 8,"));
}

#[test]
fn seed_failures_exit_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("f.toml");
    fs::write(&cfg, "preset = \"fig4a\"\nt1_min_grid = [1e-7]\nseeds = [0]\ntolerance = 1e-300\n").unwrap();
    let dir = tmp.path().join("f");
    let out = tlsgap(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn show_config_round_trips() {
    let tmp = TempDir::new().unwrap();
    let out = tlsgap(&["show-config", "fig4b"], &[]);
    assert!(out.status.success());
    let cfg = tmp.path().join("shown.toml");
    fs::write(&cfg, &out.stdout).unwrap();
    let again = tlsgap(&["show-config", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn sample_then_propagate() {
    let tmp = TempDir::new().unwrap();
    let ens = tmp.path().join("ens.csv");
    let out = tlsgap(&["sample", "fig4b", "--seed", "3", "--out", ens.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&ens).unwrap();
    assert!(text.contains("# seed=3"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 201);

    let trace = tmp.path().join("trace.csv");
    let out = tlsgap(
        &["propagate", "--ensemble", ens.to_str().unwrap(), "--out", trace.to_str().unwrap(), "--horizon", "5e-6", "--points", "101"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(j["fit"]["t1"].as_f64().unwrap() > 0.0);
    assert!(fs::read_to_string(&trace).unwrap().contains("time_s,p_qubit,p_tls_total,p_emitted"));

    let out = tlsgap(&["propagate", "--ensemble", "/nonexistent.csv", "--out", trace.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "missing_input");
}
