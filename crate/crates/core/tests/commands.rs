use std::fs;

use ksfp::cli_io::{
    cmd_converge, cmd_expand, cmd_simulate, cmd_stability, preset, preset_names, RunConfig,
};
use ksfp::pde::io::read_snapshot;
use ksfp::Error;

const SMALL: &str = r#"
[grid]
L = 1.0
N = 64

[kernel]
family = "mexican_hat"
d1 = 0.1
d2 = 3.0

[model]
type = "nonlocal_fp"
mu = 3.0

[init]
kind = "perturbed"
base = 1.0
amplitude = 0.01
seed = 5

[time]
t_end = 0.1
save_every = 20

[output]
formats = ["csv", "bin", "svg"]

[stability]
n_max = 16
n1 = 2

[expand]
degrees = [3, 6]

[converge]
ladder = [1e-1, 1e-2, 1e-3]
"#;

fn small() -> RunConfig {
    RunConfig::from_toml_str(SMALL, "small.toml").unwrap()
}

#[test]
fn simulate_writes_readable_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_simulate(&small(), dir.path()).unwrap();
    assert!(r.max_relative_mass_drift < 1e-12);
    assert_eq!(r.final_time, 0.1);
    let last = dir
        .path()
        .join(format!("snapshots/rho_{:05}.bin", r.snapshots - 1));
    let (field, t) = read_snapshot(fs::File::open(last).unwrap()).unwrap();
    assert_eq!(t, 0.1);
    assert_eq!(field.values().len(), 64);
    assert!((field.max() - r.final_max).abs() == 0.0);

    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), r.snapshots + 1);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metadata.json")).unwrap())
            .unwrap();
    assert_eq!(meta["command"], "simulate");
    assert_eq!(meta["config"]["grid"]["cells"], 64);
    for f in &r.files {
        assert!(dir.path().join(f).exists(), "{}", f.display());
    }
}

#[test]
fn repeated_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_simulate(&small(), a.path()).unwrap();
    cmd_simulate(&small(), b.path()).unwrap();
    for name in ["summary.csv", "metadata.json", "snapshots/rho_00000.bin"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn keller_segel_run_with_comparison() {
    let text = SMALL.replace(
        "type = \"nonlocal_fp\"",
        "type = \"keller_segel\"\neps = 1e-2\ncompare = true",
    );
    let cfg = RunConfig::from_toml_str(&text, "ks.toml").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_simulate(&cfg, dir.path()).unwrap();
    let cmp = r.comparison.expect("comparison requested");
    assert!(cmp.sup_t_l2 > 0.0 && cmp.sup_t_l2 < 1e-2);
    for name in [
        "comparison.json",
        "fp_summary.csv",
        "snapshots/v1_00000.csv",
        "snapshots/v2_00000.csv",
        "plots/final_overlay.svg",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn expand_stability_and_converge_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();

    let rows = cmd_expand(&cfg, dir.path()).unwrap();
    assert_eq!(rows.len(), 2);
    // the Mexican hat is a sum of two Green's functions, far from a short cosh sum
    assert!(rows.iter().all(|r| r.sup_error.is_finite()));
    let table = fs::read_to_string(dir.path().join("ks_n6.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 7);

    let st = cmd_stability(&cfg, dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + st.curve.modes.len());
    assert!(st.critical_mu.is_some());

    let cv = cmd_converge(&cfg, dir.path()).unwrap();
    assert_eq!(cv.rows.len(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("converge.json")).unwrap())
            .unwrap();
    assert!(json["slope"].as_f64().unwrap().is_finite());
}

#[test]
fn invalid_documents_name_the_field() {
    let bad = SMALL.replace("mu = 3.0", "mu = 3.0\neps = -1.0");
    let bad = bad.replace("type = \"nonlocal_fp\"", "type = \"keller_segel\"");
    match RunConfig::from_toml_str(&bad, "bad.toml") {
        Err(Error::Config { field, .. }) => assert_eq!(field, "model.eps"),
        other => panic!("{other:?}"),
    }
    let ladder = SMALL.replace("ladder = [1e-1, 1e-2, 1e-3]", "ladder = [1e-1, 5e-2, 3e-2]");
    let cfg = RunConfig::from_toml_str(&ladder, "ladder.toml");
    let dir = tempfile::tempdir().unwrap();
    let err = cfg.and_then(|c| cmd_converge(&c, dir.path()));
    assert!(matches!(err, Err(Error::InvalidLadder(_))), "{err:?}");
}

#[test]
fn every_preset_builds_its_runs() {
    for name in preset_names() {
        let cfg = preset(name).unwrap();
        cfg.sim_config().unwrap();
        cfg.fp_sim_config().unwrap();
    }
    assert_eq!(preset("fig6").unwrap().expansion_degrees(), vec![4, 8, 12]);
    assert!(matches!(preset("fig7"), Err(Error::Config { .. })));
}
