use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use knotqm::cli::{from_meta, run_command, OutputFormat, OutputTable};
use sha2::{Digest, Sha256};

fn knotqm(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_knotqm"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("KNOTQM_")) {
        cmd.env_remove(k);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn table(args: &[&str]) -> OutputTable {
    let out = knotqm(args, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    OutputTable::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = knotqm(args, &[]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    (out.status.code().unwrap(), stderr)
}

#[test]
fn spectrum_defaults_are_echoed() {
    let t = table(&["spectrum", "--levels", "4"]);
    assert_eq!(t.meta["p"], "2");
    assert_eq!(t.meta["q"], "3");
    assert_eq!(t.meta["truncation"], "64");
    assert_eq!(t.columns, ["n", "nu", "E_hill", "E_mathieu", "E_whittaker", "residual"]);
    assert_eq!(t.rows.len(), 4);
    assert!(t.column("residual").unwrap().iter().all(|r| *r < 1e-8));
}

#[test]
fn exit_codes_are_distinct() {
    let (code, msg) = exit_code(&["geometry", "--p", "2", "--q", "4"]);
    assert_eq!(code, 3);
    assert!(msg.contains("p and q must be coprime"));
    assert_eq!(msg.trim().lines().count(), 1);
    assert_eq!(exit_code(&["geometry", "--p", "0"]).0, 3);
    assert_eq!(exit_code(&["geometry", "--R", "1", "--d", "2"]).0, 4);
    assert_eq!(exit_code(&["geometry", "--d", "-1"]).0, 4);
    let (code, msg) = exit_code(&["geometry", "--frobnicate"]);
    assert_eq!(code, 2);
    assert_eq!(msg.trim().lines().count(), 1);
    assert_eq!(exit_code(&["spectrum", "--levels", "abc"]).0, 2);
    assert_eq!(exit_code(&["spectrum", "--format", "xml"]).0, 2);
    assert_eq!(exit_code(&["bogus"]).0, 2);
    // ν = 2·3/6 = 1 is the resonant exponent of the first-order series.
    assert_eq!(exit_code(&["modes", "--method", "mathieu", "--p", "1", "--q", "6", "--n", "3"]).0, 5);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.csv");
    assert_eq!(exit_code(&["geometry", "--out", target.to_str().unwrap()]).0, 6);
    assert_eq!(exit_code(&["--help"]).0, 0);
}

#[test]
fn config_file_and_environment_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "# torus\nd=1.5\nsamples = 16\n").unwrap();
    let run = |extra: &[&str], envs: &[(&str, &Path)]| {
        let mut args = vec!["geometry"];
        args.extend_from_slice(extra);
        let out = knotqm(&args, envs);
        assert!(out.status.success());
        OutputTable::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
    };
    let cfg = path.to_str().unwrap();
    let t = run(&["--config", cfg, "--d", "1.2"], &[]);
    assert_eq!(t.meta["d"], "1.2");
    assert_eq!(t.rows.len(), 16);
    let t = run(&["--config", cfg], &[]);
    assert_eq!(t.meta["d"], "1.5");
    let t = run(&[], &[("KNOTQM_CONFIG", &path), ("KNOTQM_D", Path::new("1.7"))]);
    assert_eq!(t.meta["d"], "1.5");
    let t = run(&[], &[("KNOTQM_D", Path::new("1.7"))]);
    assert_eq!(t.meta["d"], "1.7");
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let digest = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = extra.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        assert!(knotqm(&args, &[]).status.success());
        Sha256::digest(std::fs::read(&path).unwrap())
    };
    for cmd in [
        vec!["spectrum", "--levels", "5"],
        vec!["sweep", "--flux-steps", "9", "--levels", "2"],
        vec!["classical", "--samples", "200"],
        vec!["modes", "--n", "2", "--format", "json"],
    ] {
        assert_eq!(digest("a", &cmd), digest("b", &cmd), "{cmd:?}");
    }
}

#[test]
fn unit_winding_geometry_is_planar() {
    let t = table(&["geometry", "--samples", "8", "--p", "-1", "--q", "1"]);
    let beta = 3f64.sqrt();
    let (y, z) = (t.column("y").unwrap(), t.column("z").unwrap());
    for (y, z) in y.iter().zip(&z) {
        assert!((z * beta - y).abs() < 1e-12);
    }
}

#[test]
fn large_aspect_spectrum_matches_rotor_ladder() {
    let t = table(&["spectrum", "--levels", "3", "--eta0-large"]);
    assert_eq!(t.meta["eta0_large"], "true");
    let hill = t.column("E_hill").unwrap();
    let thin = t.column("E_mathieu").unwrap();
    assert!(hill[0].abs() < 1e-3 * thin[1]);
    for n in 1..3 {
        assert!(((hill[n] - thin[n]) / thin[n]).abs() < 1e-3);
    }
}

#[test]
fn metadata_reproduces_output() {
    for (args, format) in [
        (vec!["spectrum", "--levels", "3", "--phi-s", "0.4"], OutputFormat::Csv),
        (vec!["sweep", "--flux-steps", "5", "--format", "json"], OutputFormat::Json),
        (vec!["classical", "--method", "closed", "--samples", "50"], OutputFormat::Csv),
    ] {
        let out = knotqm(&args, &[]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let t = OutputTable::parse(&text, format).unwrap();
        let cfg = from_meta(&t.meta).unwrap();
        let again = run_command(&cfg).unwrap();
        assert_eq!(again.render(format), text);
    }
}

#[test]
fn out_dir_environment_sets_default_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = knotqm(&["geometry", "--samples", "4", "--format", "json"], &[("KNOTQM_OUT_DIR", dir.path())]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("geometry.json")).unwrap();
    assert_eq!(OutputTable::from_json(&text).unwrap().rows.len(), 4);
    let out = knotqm(&["geometry", "--out", "sub/knot.csv"], &[("KNOTQM_OUT_DIR", dir.path())]);
    assert!(out.status.success());
    assert!(dir.path().join("sub/knot.csv").exists());
}

#[test]
fn classical_both_agrees_with_closed_form() {
    let t = table(&["classical", "--samples", "300"]);
    assert_eq!(t.meta["method"], "both");
    assert!(t.column("phi_diff").unwrap().iter().all(|d| d.abs() < 1e-6));
    assert!(t.column("A_drift").unwrap().iter().all(|d| d.abs() < 1e-9));
    let closed = table(&["classical", "--method", "closed", "--samples", "10"]);
    assert_eq!(closed.columns.len(), 8);
    assert_eq!(closed.rows.len(), 11);
}

#[test]
fn modes_are_normalised_over_one_circuit() {
    let t = table(&["modes", "--n", "2", "--samples", "2048"]);
    let span = 4.0 * std::f64::consts::PI;
    let norm: f64 = t.column("abs2").unwrap().iter().sum::<f64>() * span / 2048.0;
    assert!((norm - 1.0).abs() < 1e-10, "{norm}");
    let fluxed = table(&["modes", "--n", "1", "--phi-t", "0.3"]);
    assert!(fluxed.column("im_psi").unwrap().iter().any(|v| v.abs() > 1e-3));
    assert_eq!(exit_code(&["modes", "--method", "mathieu", "--phi-t", "0.3"]).0, 2);
}

#[test]
fn sweep_layout() {
    let t = table(&["sweep", "--flux-steps", "4", "--levels", "2", "--flux-min", "-1", "--flux-max", "1"]);
    assert_eq!(t.columns, ["Phi", "n", "E"]);
    assert_eq!(t.rows.len(), 4 * 5);
    assert_eq!(t.rows[0][0], -1.0);
    assert_eq!(t.rows.last().unwrap()[0], 1.0);
    // Time reversal: E(n, Φ) = E(−n, −Φ).
    let lookup: BTreeMap<(i64, i64), f64> = t
        .rows
        .iter()
        .map(|r| (((r[0] * 3.0).round() as i64, r[1] as i64), r[2]))
        .collect();
    for (&(phi, n), &e) in &lookup {
        let mirror = lookup[&(-phi, -n)];
        assert!((e - mirror).abs() < 1e-10);
    }
}
