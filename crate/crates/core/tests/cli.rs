mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pathqnn::cli::{parse_config, SimulateConfig};
use pathqnn::training::{loss, TrainReport};
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathqnn")).args(args).output().unwrap()
}

fn run_config(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Parses a CSV written by the CLI into its header and rows.
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect::<Vec<_>>();
    let rows = lines.map(|l| l.split(',').map(String::from).collect::<Vec<_>>()).collect::<Vec<_>>();
    for r in &rows {
        assert_eq!(r.len(), header.len());
    }
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = csv(path);
    let i = h.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn double_slit_config(detector_x: f64, media: &str) -> String {
    format!(
        "[geometry]\nwavelength = 0.5\nsource = {{ z = 0.0, x = 0.0 }}\ndetector = {{ z = 10.0, x = {detector_x:e} }}\n\n\
         [[geometry.barriers]]\nz = 5.0\nslits = [-1.0, 1.0]\n\n[media]\n{media}\n"
    )
}

#[test]
fn double_slit_sweep_interferes() {
    let dir = TempDir::new().unwrap();
    let out = run_config("simulate", &configs().join("simulate_double_slit.toml"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = column(&dir.path().join("simulate.csv"), "probability");
    assert_eq!(p.len(), 201);
    let max = p.iter().cloned().fold(0.0, f64::max);
    assert!((max - 4.0).abs() < 1e-12, "max {max}");
    let swings = p.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count();
    assert!(swings >= 3);

    let x = common::half_wave_detector(1.0, 10.0, 0.5);
    let cfg = write(&dir, "dark.toml", &double_slit_config(x, "kind = \"single\"\nindices = [1.0, 1.0]"));
    let dark = dir.path().join("dark");
    assert!(run_config("simulate", &cfg, &dark, &[]).status.success());
    let p = column(&dark.join("simulate.csv"), "probability");
    assert!(p[0] < 1e-6, "p = {:e}", p[0]);
}

#[test]
fn single_path_sweep_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "one.toml",
        "[geometry]\nwavelength = 0.3\nsource = { z = 0.0, x = 0.0 }\ndetector = { z = 3.0, x = 0.5 }\n\
         [[geometry.barriers]]\nz = 1.0\nslits = [0.2]\n[[geometry.barriers]]\nz = 2.0\nslits = [-0.4]\n\
         [media]\nkind = \"index_sweep\"\nindices = [1.0, 1.0, 1.0]\ncomponent = 1\nstart = 1.0\nstop = 2.0\nsteps = 11\n",
    );
    assert!(run_config("simulate", &cfg, dir.path(), &[]).status.success());
    let path = dir.path().join("simulate.csv");
    let (header, _) = csv(&path);
    assert_eq!(header, ["sweep_value", "re", "im", "probability"]);
    for p in column(&path, "probability") {
        assert!((p - 1.0).abs() < 1e-12);
    }
    assert_eq!(column(&path, "sweep_value")[10], 2.0);
}

#[test]
fn missing_wavelength_is_reported() {
    let dir = TempDir::new().unwrap();
    let text = double_slit_config(0.0, "kind = \"single\"\nindices = [1.0, 1.0]").replace("wavelength = 0.5\n", "");
    let cfg = write(&dir, "bad.toml", &text);
    let out = run_config("simulate", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelength"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let text = double_slit_config(0.0, "kind = \"single\"\nindices = [1.0, 1.0]\ncolour = 3");
    let out = run_config("simulate", &write(&dir, "extra.toml", &text), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    let out = run_config("train", &configs().join("equivalence.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parallel_simulation_agrees() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("simulate_double_slit.toml");
    assert!(run_config("simulate", &cfg, &dir.path().join("s"), &[]).status.success());
    assert!(run_config("simulate", &cfg, &dir.path().join("p"), &["--parallel"]).status.success());
    let a = column(&dir.path().join("s/simulate.csv"), "re");
    let b = column(&dir.path().join("p/simulate.csv"), "re");
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

const SELF_CONSISTENT: &str = r#"
[geometry]
wavelength = 0.4
source = { z = 0.0, x = 0.0 }
detector = { z = 3.0, x = 0.1 }

[[geometry.barriers]]
z = 1.0
slits = [-0.3, 0.4]

[[geometry.barriers]]
z = 2.0
slits = [-0.2, 0.0, 0.5]

[dataset]
target = { kind = "self_consistent" }
dim = 2
grid_size = 4
range = [1.0, 1.6]

[training]
calibration = "none"
max_epochs = 50
"#;

#[test]
fn self_consistent_training_converges_immediately() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sc.toml", SELF_CONSISTENT);
    let out = run_config("train", &cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: TrainReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report.converged);
    assert_eq!(report.final_mse, 0.0);
    assert_eq!(report.best_epoch, 0);
    assert_eq!(report.epochs_run, 0);
    assert_eq!(column(&dir.path().join("mse_trace.csv"), "mse"), vec![0.0]);
}

const LINEAR: &str = r#"
[geometry]
wavelength = 0.8
source = { z = 0.0, x = 0.0 }
detector = { z = 3.0, x = 0.0 }

[[geometry.barriers]]
z = 1.0
slits = [-0.6, 0.1, 0.7]

[[geometry.barriers]]
z = 2.0
slits = [-0.5, 0.4]

[dataset]
target = { kind = "linear" }
dim = 1
grid_size = 12
range = [1.0, 1.5]
offset = 1

[training]
learning_rate = 0.01
max_epochs = 200
init = "uniform"
seed = 3
slit_bounds = [{ min = -2.0, max = 2.0 }]
"#;

#[test]
fn trained_geometry_reloads_and_reproduces_mse() {
    let dir = TempDir::new().unwrap();
    let cfg_path = write(&dir, "lin.toml", LINEAR);
    let out = run_config("train", &cfg_path, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: TrainReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report.mse_trace.len(), report.epochs_run + 1);

    let text = std::fs::read_to_string(dir.path().join("final_geometry.toml")).unwrap();
    let reloaded: SimulateConfig = parse_config(&text).unwrap();
    assert_eq!(reloaded.geometry, report.geometry);
    let reparsed: SimulateConfig = parse_config(&toml::to_string(&reloaded).unwrap()).unwrap();
    assert_eq!(reparsed, reloaded);

    let file: pathqnn::cli::TrainFileConfig = parse_config(LINEAR).unwrap();
    let raw = pathqnn::training::Readout {
        output_map: file.training.output_map,
        calibration: None,
    };
    let data = pathqnn::cli::build_dataset(&file.geometry, &file.dataset, &raw).unwrap();
    assert_eq!(loss(&reloaded.geometry, &data, &report.readout()).unwrap(), report.final_mse);

    let sim = dir.path().join("sim");
    assert!(run_config("simulate", &dir.path().join("final_geometry.toml"), &sim, &[]).status.success());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "lin.toml", LINEAR);
    let read = |d: &str, f: &str| std::fs::read(dir.path().join(d).join(f)).unwrap();
    for d in ["a", "b"] {
        assert!(run_config("train", &cfg, &dir.path().join(d), &["--seed", "9"]).status.success());
    }
    assert!(run_config("train", &cfg, &dir.path().join("c"), &["--seed", "10"]).status.success());
    for f in ["mse_trace.csv", "report.json", "final_geometry.toml"] {
        assert_eq!(read("a", f), read("b", f));
    }
    assert_ne!(read("a", "mse_trace.csv"), read("c", "mse_trace.csv"));
}

#[test]
fn equivalence_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("equivalence.toml");
    let out = run_config("equivalence", &cfg, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diffs = column(&dir.path().join("equivalence.csv"), "max_abs_diff");
    assert_eq!(diffs.len(), 1000);
    assert!(diffs.iter().all(|d| *d < 1e-12));
    assert!(dir.path().join("net.json").exists());

    let bad = run_config("equivalence", &cfg, &dir.path().join("bad"), &["--debug-perturb-weight", "1e-3"]);
    assert_eq!(bad.status.code(), Some(2));

    let text = std::fs::read_to_string(&cfg).unwrap().replace("trials = 1000", "trials = 0");
    let zero = run_config("equivalence", &write(&dir, "zero.toml", &text), dir.path(), &[]);
    assert_eq!(zero.status.code(), Some(1));
}

#[test]
fn rock_single_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "rock.toml",
        "[model]\nname = \"rock\"\nmass = [1.0]\ncentral_mass = [1.0]\nr_surface = [1.0]\nr = [4.0]\n",
    );
    assert!(run_config("actions", &cfg, dir.path(), &[]).status.success());
    let path = dir.path().join("actions.csv");
    let (header, rows) = csv(&path);
    assert_eq!(
        header,
        ["model", "mass", "central_mass", "r_surface", "r", "closed_form", "numeric", "input_factor", "weight_factor", "rel_error"]
    );
    assert_eq!(rows.len(), 1);
    assert!((column(&path, "closed_form")[0] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!(column(&path, "rel_error")[0] < 1e-8);
}

#[test]
fn desitter_grid_has_both_forms() {
    let dir = TempDir::new().unwrap();
    assert!(run_config("actions", &configs().join("actions_desitter.toml"), dir.path(), &[]).status.success());
    let (header, rows) = csv(&dir.path().join("actions.csv"));
    let form = header.iter().position(|h| h == "form").unwrap();
    let rel = header.iter().position(|h| h == "rel_error").unwrap();
    let hubble: Vec<_> = rows.iter().filter(|r| r[form] == "hubble").collect();
    assert_eq!(hubble.len(), 4);
    assert_eq!(rows.len(), 8);
    for r in hubble {
        assert!(r[rel].parse::<f64>().unwrap() < 1e-8);
    }
}

#[test]
fn inflation_gap_is_reported() {
    let dir = TempDir::new().unwrap();
    assert!(run_config("actions", &configs().join("actions_inflation.toml"), dir.path(), &[]).status.success());
    let path = dir.path().join("actions.csv");
    let t = column(&path, "t_end");
    let gap = column(&path, "approx_gap");
    let i = t.iter().position(|&t| t == 5.0).unwrap();
    assert!((gap[i] - 3.06e-7).abs() / 3.06e-7 < 0.01, "gap {:e}", gap[i]);
}

#[test]
fn unknown_model_lists_names() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "m.toml", "[model]\nname = \"kepler\"\n");
    let out = run_config("actions", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["rock", "desitter", "inflation", "schwarzschild"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn numerical_failure_exit_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "turn.toml",
        "[model]\nname = \"schwarzschild\"\nmass = [1.0]\ncentral_mass = [1.0]\nenergy = [0.95]\n\
         r_start = [8.0]\nt_span = [200.0]\ndirection = [1]\n",
    );
    let out = run_config("actions", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn json_output_format() {
    let dir = TempDir::new().unwrap();
    let text = std::fs::read_to_string(configs().join("actions_rock.toml")).unwrap() + "\n[output]\nformat = \"json\"\nname = \"rock\"\n";
    assert!(run_config("actions", &write(&dir, "r.toml", &text), dir.path(), &[]).status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rock.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
    assert_eq!(v[0]["model"], "rock");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["simulate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let dir = TempDir::new().unwrap();
    let missing = run_config("simulate", &dir.path().join("nope.toml"), dir.path(), &[]);
    assert_eq!(missing.status.code(), Some(1));
}
