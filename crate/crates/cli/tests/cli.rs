use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scenario::bundle::{sha256_hex, Manifest, MANIFEST_NAME};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn swarmbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmbeam"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> &Output {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn error_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&std::fs::read(dir.join(MANIFEST_NAME)).unwrap()).unwrap()
}

/// rows of a sweep CSV as metric -> values in sweep order
fn sweep_series(csv: &str) -> BTreeMap<String, Vec<f64>> {
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if let Ok(v) = cols[3].parse() {
            series.entry(cols[2].to_string()).or_default().push(v);
        }
    }
    series
}

#[test]
fn elsa_run_writes_five_artifacts_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("elsa.toml");
    let out = swarmbeam(&["run", "--grid", "1024", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    ok(&out);
    let m = manifest(tmp.path());
    let printed: Manifest = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, m);
    let files: Vec<&str> = m.artifacts.iter().map(|a| a.file.as_str()).collect();
    assert_eq!(files, ["geometry.csv", "pattern.csv", "pattern.json", "metrics.json", "link.json"]);
    for a in &m.artifacts {
        let bytes = std::fs::read(tmp.path().join(&a.file)).unwrap();
        assert_eq!(bytes.len() as u64, a.bytes);
        assert_eq!(sha256_hex(&bytes), a.sha256);
    }
    assert_eq!(m.command, "run");
    assert!(m.overrides.iter().any(|o| o.contains("grid")));

    let geometry = std::fs::read_to_string(tmp.path().join("geometry.csv")).unwrap();
    assert_eq!(geometry.lines().count(), 501);
    let pattern = std::fs::read_to_string(tmp.path().join("pattern.csv")).unwrap();
    let mut lines = pattern.lines();
    assert_eq!(lines.next(), Some("u,v,af_db"));
    let mut rows: usize = 0;
    for l in lines {
        let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(c[0] * c[0] + c[1] * c[1] <= 1.0 && c[2] <= 1e-9);
        rows += 1;
    }
    let du = 2.0 / 1023.0;
    let visible = (0..1024 * 1024)
        .filter(|k| {
            let (u, v) = (-1.0 + du * (k % 1024) as f64, -1.0 + du * (k / 1024) as f64);
            u * u + v * v <= 1.0
        })
        .count();
    assert!(rows.abs_diff(visible) <= 8, "{rows} rows vs {visible} visible samples");
    let metrics: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["psll_db"].as_f64().unwrap() <= -10.0);
    assert_eq!(metrics["grating_lobes"].as_array().unwrap().len(), 0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.toml",
        "name = \"s\"\n[geometry]\nkind = \"sunflower\"\nn_platforms = 64\n[grid]\nn_u = 96\nn_v = 96\n",
    );
    let digests = |k: usize| {
        let dir = tmp.path().join(format!("run{k}"));
        ok(&swarmbeam(&["run", "--config", &cfg, "--out", dir.to_str().unwrap()]));
        manifest(&dir)
            .artifacts
            .into_iter()
            .map(|a| (a.file, a.sha256))
            .collect::<Vec<_>>()
    };
    assert_eq!(digests(0), digests(1));
}

#[test]
fn perturbation_section_adds_degradation_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "p.toml",
        "name = \"p\"\n[geometry]\nkind = \"sunflower\"\nn_platforms = 64\n[grid]\nn_u = 96\nn_v = 96\n\
         [perturbation]\nsigma_phase_rad = 0.3\ntrials = 20\ngrid_samples = 17\n\
         [failure_sweep]\nfractions = [0.0, 0.2]\ntrials = 5\n[outputs]\ntrials_csv = true\n",
    );
    let dir = tmp.path().join("out");
    ok(&swarmbeam(&["run", "--seed", "11", "--config", &cfg, "--out", dir.to_str().unwrap()]));
    let files: Vec<String> = manifest(&dir).artifacts.into_iter().map(|a| a.file).collect();
    for f in ["trials.csv", "degradation.json", "failure_sweep.json"] {
        assert!(files.iter().any(|x| x == f), "{f} missing from {files:?}");
    }
    let d: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("degradation.json")).unwrap()).unwrap();
    assert_eq!(d["stats"]["trials"], 20);
    assert_eq!(d["spec"]["master_seed"], 11);
    assert!(d["stats"]["peak_loss_db"]["mean"].as_f64().unwrap() < 0.0);
    let trials = std::fs::read_to_string(dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 21);
}

#[test]
fn io_errors_exit_1_and_config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();

    let missing = tmp.path().join("absent.toml");
    let out = swarmbeam(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let e = error_json(&out);
    assert_eq!(e["error"], "io");
    assert_eq!(e["exit_code"], 1);
    assert!(e["path"].as_str().unwrap().ends_with("absent.toml"));

    let typo = write(tmp.path(), "t.toml", "frequnecy = 2e9\n[geometry]\nkind = \"elsa\"\nn_platforms = 10\n");
    let out = swarmbeam(&["run", "--config", &typo]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("frequency_hz"), "{e}");

    let kind = write(tmp.path(), "k.toml", "[geometry]\nkind = \"sunflwer\"\nn_platforms = 10\n");
    let e = error_json(&swarmbeam(&["geometry", "--config", &kind]));
    assert!(e["message"].as_str().unwrap().contains("sunflower"), "{e}");

    let out = swarmbeam(&["explode"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "usage");

    let ok_cfg = write(tmp.path(), "o.toml", "[geometry]\nkind = \"sunflower\"\nn_platforms = 10\n");
    let out = swarmbeam(&["run", "--threads", "0", "--config", &ok_cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweeps_follow_aperture_scaling() {
    let tmp = tempfile::tempdir().unwrap();
    let sunflower = write(
        tmp.path(),
        "sun.toml",
        "[geometry]\nkind = \"sunflower\"\nn_platforms = 64\nradial_scale_m = 0.09\n[grid]\nn_u = 512\nn_v = 512\n",
    );
    let dir = tmp.path().join("n");
    ok(&swarmbeam(&[
        "sweep", "--param", "geometry.n_platforms", "--values", "64,128,256,512",
        "--config", &sunflower, "--out", dir.to_str().unwrap(),
    ]));
    let s = sweep_series(&std::fs::read_to_string(dir.join("sweep.csv")).unwrap());
    let d = &s["directivity_dbi"];
    assert_eq!(d.len(), 4);
    assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");

    let lattice = write(
        tmp.path(),
        "lat.toml",
        "[geometry]\nkind = \"rectangular-lattice\"\nn_platforms = 64\ngrid_dims = [8, 8]\n[grid]\nn_u = 512\nn_v = 512\n",
    );
    let dir = tmp.path().join("d");
    ok(&swarmbeam(&[
        "sweep", "--param", "geometry.spacing_m", "--values", "0.0749481145,0.149896229,0.299792458",
        "--config", &lattice, "--out", dir.to_str().unwrap(),
    ]));
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with(scenario::sweep::SWEEP_HEADER));
    let h = &sweep_series(&csv)["hpbw_u_rad"];
    assert_eq!(h.len(), 3);
    assert!(h.windows(2).all(|w| w[1] < w[0]), "{h:?}");
}

#[test]
fn empty_sweep_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "s.toml", "[geometry]\nkind = \"sunflower\"\nn_platforms = 10\n");
    let dir = tmp.path().join("out");
    let out = swarmbeam(&["sweep", "--param", "geometry.n_platforms", "--values", "", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.join("sweep.csv").exists());
}

#[test]
fn compare_rejects_mismatched_carriers_and_tabulates_identical_designs() {
    let tmp = tempfile::tempdir().unwrap();
    let body = "[geometry]\nkind = \"sunflower\"\nn_platforms = 25\nradial_scale_m = 0.1\n[grid]\nn_u = 65\nn_v = 65\n";
    let a = write(tmp.path(), "a.toml", &format!("name = \"same\"\n{body}"));
    let b = write(tmp.path(), "b.toml", &format!("name = \"same\"\n{body}"));
    let c = write(tmp.path(), "c.toml", &format!("name = \"off\"\nfrequency_hz = 2.2e9\n{body}"));
    let dir = tmp.path().join("cmp");
    ok(&swarmbeam(&["compare", &a, &b, "--out", dir.to_str().unwrap()]));
    let csv = std::fs::read_to_string(dir.join("compare.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);

    let out = swarmbeam(&["compare", &a, &c, "--out", tmp.path().join("bad").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "comparability");
}

#[test]
fn schema_and_defaults_are_printable() {
    let out = swarmbeam(&["--print-schema"]);
    let fields: Vec<serde_json::Value> = serde_json::from_slice(&ok(&out).stdout).unwrap();
    let kind = fields.iter().find(|f| f["path"] == "geometry.kind").unwrap();
    assert_eq!(kind["required"], true);

    let out = swarmbeam(&["--print-defaults"]);
    let doc: toml::Table = String::from_utf8(ok(&out).stdout.clone()).unwrap().parse().unwrap();
    assert!(doc.contains_key("grid"));

    let cfg = configs_dir().join("elsa.toml");
    let out = swarmbeam(&["--print-defaults", "--config", cfg.to_str().unwrap()]);
    let resolved = String::from_utf8(ok(&out).stdout.clone()).unwrap();
    let reparsed = scenario::config::parse_config_str(&resolved).unwrap();
    assert_eq!(reparsed.config.geometry.n_platforms, 500);
    assert!(reparsed.defaults_applied.is_empty());
}
