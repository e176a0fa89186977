use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn elastring(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastring"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: [&str; 4] = ["--nx", "281", "--nt", "101"];

#[test]
fn simulate_writes_every_listed_file() {
    let dir = tempfile::tempdir().unwrap();
    for solver in ["galerkin-exact", "fd-coupled"] {
        let out = dir.path().join(solver);
        let mut args = vec!["simulate", "--preset", "paper-2-4-sigma1", "--solver", solver];
        args.extend(SMALL);
        let run = elastring(&args, &out);
        assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
        let manifest = json(&out.join("manifest.json"));
        assert_eq!(manifest["subcommand"], "simulate");
        let listed: BTreeSet<String> = manifest["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["path"].as_str().unwrap().to_string())
            .chain(["manifest.json".to_string()])
            .collect();
        let present: BTreeSet<String> =
            fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        assert_eq!(listed, present);
        assert_eq!(present.contains("interface.csv"), solver == "fd-coupled");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut args = vec!["simulate", "--preset", "paper-2-4-sigma1", "--solver", "fd-coupled"];
    args.extend(SMALL);
    assert!(elastring(&args, &a).status.success());
    assert!(elastring(&args, &b).status.success());
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn numbers_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--preset", "paper-2-4-sigma1"];
    args.extend(SMALL);
    assert!(elastring(&args, dir.path()).status.success());
    let text = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    for cell in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let v: f64 = cell.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), cell);
    }
}

#[test]
fn zero_data_give_a_resting_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--preset", "zero-initial-data", "--solver", "fd-coupled"];
    args.extend(SMALL);
    assert!(elastring(&args, dir.path()).status.success());
    assert_eq!(json(&dir.path().join("energy.json"))["drift"].as_f64(), Some(0.0));
    let text = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!((cells[2], cells[3]), (0.0, 0.0));
    }
}

#[test]
fn free_string_fundamental() {
    let dir = tempfile::tempdir().unwrap();
    assert!(elastring(&["modes", "--preset", "paper-2-4-sigma0"], dir.path()).status.success());
    let f1 = json(&dir.path().join("modes.json"))["galerkin"]["frequencies_hz"][0].as_f64().unwrap();
    assert_eq!((f1 * 1e6).floor(), 481_028.0);
}

#[test]
fn validate_flags_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    assert!(elastring(&["validate", "--preset", "paper-2-4-sigma1"], dir.path()).status.success());
    let report = json(&dir.path().join("validation.json"));
    assert_eq!(report["initial_data"]["piecewise_smooth_only"], true);
}

#[test]
fn crosscheck_passes_on_the_stiff_preset() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["crosscheck", "--preset", "paper-2-4-sigma1"];
    args.extend(SMALL);
    let run = elastring(&args, dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(json(&dir.path().join("crosscheck.json"))["pass"], true);
}

#[test]
fn inversion_recovers_tension() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["invert-tension", "--preset", "paper-2-4-sigma1", "--measured", "0.62979808041190277,1.2573582443267204,1.7937717388444914"];
    assert!(elastring(&args, dir.path()).status.success());
    let t = json(&dir.path().join("inversion.json"))["estimate"]["tension_hat"].as_f64().unwrap();
    assert!((t - 67.344f64.powi(2)).abs() < 1e-6 * t, "{t}");
}

#[test]
fn residuals_run_on_one_support() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["residuals", "--preset", "paper-2-4-sigma1"];
    args.extend(SMALL);
    assert!(elastring(&args, dir.path()).status.success());
    let report = json(&dir.path().join("residuals.json"));
    assert_eq!(report["h_consistency"].as_array().unwrap().len(), 4);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(elastring(&["modes", "--preset", "missing"], dir.path()).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[cable]\nlength_L = 70.0\nwave_speed_a = -1.0\n\n[grid]\nnx = 11\nnt = 5\nhorizon = 1.0\n\n[initial]\nphi = \"zero\"\n").unwrap();
    let run = elastring(&["modes", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));
    let typo = dir.path().join("typo.toml");
    fs::write(&typo, "[cable]\nlength_L = 70.0\nwave_sped_a = 1.0\n").unwrap();
    let run = elastring(&["modes", "--config", typo.to_str().unwrap()], dir.path());
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&run.stderr));
    let run = elastring(&["modes", "--config", "/nonexistent.toml"], dir.path());
    assert_eq!(run.status.code(), Some(2));
    let run = elastring(&["simulate", "--preset", "paper-2-4-sigma1", "--solver", "bogus"], dir.path());
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let run = elastring(&["simulate", "--preset", "paper-2-4-sigma1", "--solver", "galerkin-leapfrog"], dir.path());
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("2/sqrt(lambda_max)"));
    let run = elastring(&["simulate", "--preset", "paper-2-4-sigma1", "--solver", "fd-coupled", "--nx", "5"], dir.path());
    assert_eq!(run.status.code(), Some(3));
}
