//! End-to-end runs of the `epsd` binary.

use std::path::Path;
use std::process::{Command, Output};

use epsd::io::{read_grid, read_series};
use epsd::{epsd_estimate, transform, TransformSpec};

fn epsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsd"))
        .args(args)
        .env("EPSD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn version_and_help() {
    let o = epsd(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
    let o = epsd(&["--help"]);
    assert!(o.status.success());
    for sub in ["simulate", "transform", "estimate", "residual", "ratios", "constants", "mc", "residual-study"] {
        assert!(stdout(&o).contains(sub), "help lists {sub}");
    }
}

#[test]
fn constants_of_harmonic_wavelet() {
    let o = epsd(&["constants", "--spec", r#"{"transform":"cwt-harmonic","m":1,"n":2}"#]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("epsd_scale")).expect("epsd_scale line");
    let v: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    // ψ̂ = 1/(n-m) on [m, n): C_ψ = ln(n/m)/(n-m)², f0 = (m+n)/2, C_nw² = 1/(n-m).
    let (m, n) = (1.0f64, 2.0f64);
    let oracle = (n / m).ln() / (n - m).powi(2) * 0.5 * (m + n) * (n - m);
    assert!((v - oracle).abs() < 1e-5, "{v} vs {oracle}");
    assert!((v - 1.040).abs() < 5e-4);
}

#[test]
fn gaussian_ratio_sweep_is_half_sigma_squared() {
    let o = epsd(&["ratios", "--spec", "stft-gauss", "--sweep", "sigma=0.5:4:6", "--tuple", "0,0,2,0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma,ratio"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 6);
    assert!((rows[0].0 - 0.5).abs() < 1e-12 && (rows[5].0 - 4.0).abs() < 1e-12);
    for (s, r) in rows {
        assert!((r / (0.5 * s * s) - 1.0).abs() < 1e-8, "sigma {s}: {r}");
    }
}

#[test]
fn usage_errors_exit_2() {
    // Missing required --out.
    assert_eq!(epsd(&["simulate", "--samples", "1"]).status.code(), Some(2));
    // Malformed and invalid specs.
    assert_eq!(epsd(&["constants", "--spec", r#"{"transform":"stft-gauss"}"#]).status.code(), Some(2));
    assert_eq!(epsd(&["constants", "--spec", r#"{"transform":"stft-box","h":-1}"#]).status.code(), Some(2));
    let o = epsd(&["constants", "--spec", r#"{"transform":"cwt-harmonic","m":2,"n":1}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m < n"));
    assert_eq!(epsd(&["ratios", "--spec", "stft-gauss", "--sweep", "sigma", "--tuple", "0,0,2,0"]).status.code(), Some(2));
    assert_eq!(epsd(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = epsd(&["estimate", "--input", "/nonexistent/in.csv", "--spec", "stft-gauss", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_then_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sims = dir.path().join("sims");
    let o = epsd(&["simulate", "--samples", "3", "--seed", "7", "--out", p(&sims)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(sims.join("manifest.json").exists());
    let record = sims.join("record_00000.csv");
    let ts = read_series(&record).unwrap();
    assert_eq!(ts.len(), 1075);
    assert!((ts.dt() - 0.02).abs() < 1e-12);

    // Single-record estimate matches the library on the re-read series.
    let single = dir.path().join("single.csv");
    let o = epsd(&["estimate", "--input", p(&record), "--spec", "stft-gauss", "--out", p(&single)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = read_grid(&single).unwrap();
    let spec = TransformSpec::StftGauss { sigma: 1.0 };
    let lib = epsd_estimate(&transform(&ts, &spec, None).unwrap(), &spec).unwrap();
    assert_eq!(grid.values().dim(), lib.values().dim());
    for (a, b) in grid.values().iter().zip(lib.values()) {
        assert_eq!(a, b, "CSV floats round-trip exactly");
    }

    // Directory estimate with statistics.
    let mean = dir.path().join("mean.csv");
    let o = epsd(&["estimate", "--input", p(&sims), "--spec", "s-transform", "--stats", "--out", p(&mean)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_grid(&mean).unwrap();
    let s = read_grid(&dir.path().join("mean_std.csv")).unwrap();
    assert!(m.same_axes(&s));
    assert!(m.values().iter().all(|v| *v >= 0.0) && s.values().iter().all(|v| *v >= 0.0));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        assert!(epsd(&["simulate", "--samples", "2", "--seed", seed, "--out", p(out)]).status.success());
    }
    let read = |d: &Path| std::fs::read(d.join("record_00001.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn residual_and_transform_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res.csv");
    let o = epsd(&["residual", "--spec", "s-transform", "--order", "2", "--time-step", "1", "--out", p(&res)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_grid(&res).unwrap();
    assert!(g.values().iter().any(|v| *v < 0.0) && g.values().iter().any(|v| *v > 0.0));
    // Unsupported residual order.
    let o = epsd(&["residual", "--spec", "s-transform", "--order", "3", "--out", p(&res)]);
    assert_eq!(o.status.code(), Some(2));

    let sims = dir.path().join("sims");
    assert!(epsd(&["simulate", "--samples", "1", "--out", p(&sims)]).status.success());
    let coef = dir.path().join("coef.csv");
    let o = epsd(&["transform", "--input", p(&sims.join("record_00000.csv")), "--spec", "cwt-morse", "--out", p(&coef)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("coef.csv.json").exists());
    let (grid, sidecar) = epsd::io::read_coefficients(&coef).unwrap();
    assert_eq!(sidecar.transform.as_deref(), Some("cwt-morse"));
    assert_eq!(grid.times().len(), 1075);
}
