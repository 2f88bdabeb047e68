use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn strobo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strobo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_owned();
    let rows = lines
        .map(|l| l.split(',').filter_map(|f| f.parse().ok()).collect())
        .collect();
    (header, rows)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#"
[grid]
n_points = 512
length = 80.0

[evolution]
epsilon = 0.5
n_kicks = 8
record = "both"

[initial]
states = ["gaussian", "phi0", "soliton"]

[outputs]
snapshot_every = 4
"#;

#[test]
fn run_writes_trajectories_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "small.cfg", SMALL);
    let out = tmp.path().join("out");
    let o = strobo(&["run", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    for label in ["gaussian", "phi0", "soliton"] {
        let (header, rows) = read_csv(&out.join(format!("trajectory_{label}.csv")));
        assert_eq!(header, "t,fidelity,width,norm");
        assert_eq!(rows.len(), 17);
        assert_eq!(rows[0][0], 0.0);
        assert!((rows[0][1] - 1.0).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.len() == 4 && (r[3] - 1.0).abs() < 1e-10));
        let (h, series) = read_csv(&out.join(format!("fidelity_error_{label}.csv")));
        assert_eq!(h, "t,value,label");
        assert_eq!(series.len(), 9);
        assert!(out.join("snapshots").join(format!("{label}_00002.csv")).exists());
    }
    let raw = fs::read_to_string(out.join("trajectory_phi0.csv")).unwrap();
    assert!(!raw.contains('\r'));
    assert!(raw.lines().nth(1).unwrap().split(',').all(|f| f.contains('e')));

    let m = json(&out.join("manifest.json"));
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["config"]["evolution"]["epsilon"], 0.5);
    assert_eq!(m["config"]["grid"]["n_points"], 512);
    assert_eq!(m["curves"].as_array().unwrap().len(), 3);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(m["version"].is_string());
}

#[test]
fn identical_configs_give_identical_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "small.cfg", SMALL);
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = strobo(&["run", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        outputs.push(fs::read(out.join("trajectory_soliton.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn manifest_reproduces_run() {
    // Re-running from the resolved config in the manifest gives the same CSV.
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "small.cfg", SMALL);
    let first = tmp.path().join("first");
    assert!(strobo(&["run", "--quiet", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()])
        .status
        .success());
    let m = json(&first.join("manifest.json"));
    let mut config = m["config"].clone();
    config["initial"].as_object_mut().unwrap().remove("file");
    let text = toml::to_string(&config).unwrap();
    let replay_cfg = write_config(&tmp, "replay.cfg", &text);
    let second = tmp.path().join("second");
    let o = strobo(&["run", "--quiet", "--config", replay_cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for label in ["gaussian", "phi0", "soliton"] {
        let f = format!("trajectory_{label}.csv");
        assert_eq!(fs::read(first.join(&f)).unwrap(), fs::read(second.join(&f)).unwrap());
    }
}

#[test]
fn zero_epsilon_fails_validation() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "bad.cfg", "[evolution]\nepsilon = 0.0\n");
    let o = strobo(&["run", "--validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("evolution.epsilon"));
    let o = strobo(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_key_names_the_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "bad.cfg", "[evolution]\nepsilon = 0.5\nnkicks = 3\n");
    let o = strobo(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nkicks"));
}

#[test]
fn bundled_configs_validate() {
    for name in [
        "fig2_eps0.1.cfg",
        "fig2_eps0.5.cfg",
        "fig2_eps1.0.cfg",
        "fig3_eps0.5.cfg",
        "moving_v1.cfg",
        "liexperiment.cfg",
    ] {
        let o = strobo(&["validate", "--quiet", "--config", bundled(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn estimate_reports_inputs_and_epsilon() {
    let tmp = TempDir::new().unwrap();
    let o = strobo(&[
        "estimate",
        "--quiet",
        "--config",
        bundled("liexperiment.cfg").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let r = json(&tmp.path().join("estimate.json"));
    let eps = r["epsilon"].as_f64().unwrap();
    assert!((eps - 0.072).abs() <= 0.002, "{eps}");
    assert_eq!(r["lambda"]["approximate"], true);
    assert_eq!(r["lambda"]["unit"], "m^2/s");
    for key in ["mass", "period", "atom_count", "scattering_length", "transverse_length", "kick_duration"] {
        assert!(r["inputs"][key]["input"].is_string(), "{key}");
        assert!(r["inputs"][key]["unit"].is_string(), "{key}");
    }
    assert_eq!(r["inputs"]["mass"]["input"], "7.016 u");
}

#[test]
fn estimate_without_mass_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "nomass.cfg", "[physical]\nperiod = \"5 ms\"\nlambda = \"1.81e-6 m^2/s\"\n");
    let o = strobo(&["estimate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("physical.mass"));
}

const REFINE: &str = r#"
[evolution]
epsilon = 0.1
"#;

#[test]
fn refine_converges_and_closes_the_loop() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "refine.cfg", REFINE);
    let out = tmp.path().join("refined");
    let o = strobo(&["refine", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("refiner_report.json"));
    assert_eq!(r["report"]["converged"], true);
    let alpha = r["report"]["alpha"].as_f64().unwrap();
    assert!((alpha - 0.125).abs() < 0.005);
    let tol = r["config"]["refine"]["tol"].as_f64().unwrap();

    // Evolve the refined state: fidelity error stays at the tol^2 scale.
    let run_cfg = write_config(
        &tmp,
        "reuse.cfg",
        &format!(
            "[evolution]\nepsilon = 0.1\nn_kicks = 20\n[initial]\nstates = [\"file\"]\nfile = \"{}\"\n",
            out.join("refined.csv").display()
        ),
    );
    let run_out = tmp.path().join("reuse");
    let o = strobo(&["run", "--quiet", "--config", run_cfg.to_str().unwrap(), "--out", run_out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&run_out.join("fidelity_error_file.csv"));
    for (n, row) in rows.iter().enumerate() {
        assert!(row[1] <= n as f64 * tol * tol + 1e-13, "kick {n}: {}", row[1]);
    }
}

#[test]
fn unattainable_tolerance_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "refine.cfg", "[evolution]\nepsilon = 0.1\n[refine]\nmax_iters = 30\n");
    let out = tmp.path().join("r");
    let o = strobo(&["refine", "--quiet", "--tol", "1e-30", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let r = json(&out.join("refiner_report.json"));
    assert_eq!(r["report"]["converged"], false);
    assert_eq!(r["report"]["iterations"], 30);
}

#[test]
fn binary_snapshot_round_trip_through_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "refine.cfg",
        "[grid]\nn_points = 512\n[evolution]\nepsilon = 0.2\n[outputs]\nsnapshot_format = \"binary\"\n",
    );
    let out = tmp.path().join("r");
    assert!(strobo(&["refine", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status
        .success());
    let bin = out.join("refined.bin");
    assert_eq!(fs::metadata(&bin).unwrap().len(), 512 * 16);
    let run_cfg = write_config(
        &tmp,
        "reuse.cfg",
        &format!(
            "[grid]\nn_points = 512\n[evolution]\nepsilon = 0.2\nn_kicks = 5\n[initial]\nstates = [\"file\"]\nfile = \"{}\"\nfile_format = \"binary\"\n",
            bin.display()
        ),
    );
    let o = strobo(&["run", "--quiet", "--config", run_cfg.to_str().unwrap(), "--out", tmp.path().join("run").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_snapshot_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "f.cfg",
        "[evolution]\nepsilon = 0.2\nn_kicks = 2\n[initial]\nstates = [\"file\"]\nfile = \"nowhere.csv\"\n",
    );
    let o = strobo(&["run", "--quiet", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_isolates_outputs() {
    let tmp = TempDir::new().unwrap();
    let a = write_config(&tmp, "a.cfg", SMALL);
    let b = write_config(&tmp, "b.cfg", &SMALL.replace("epsilon = 0.5", "epsilon = 0.25"));
    let out = tmp.path().join("sweep");
    let o = strobo(&[
        "sweep",
        "--quiet",
        "--config",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("a/manifest.json"))["epsilon"], 0.5);
    assert_eq!(json(&out.join("b/manifest.json"))["epsilon"], 0.25);
}

#[test]
fn off_lattice_velocity_is_noted() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "v.cfg",
        "[grid]\nn_points = 512\n[evolution]\nepsilon = 0.5\nn_kicks = 2\n[initial]\nvelocity = 1.0\n",
    );
    let out = tmp.path().join("o");
    let o = strobo(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let notes = json(&out.join("manifest.json"))["notes"].to_string();
    assert!(notes.contains("not a multiple"));
}
