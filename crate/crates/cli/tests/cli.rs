use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ksfp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksfp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FLAT: &str = r#"
[grid]
half_length = 1.0
cells = 128

[kernel]
family = "mexican_hat"
d1 = 0.1
d2 = 3.0

[model]
type = "nonlocal_fp"
mu = 0.0

[init]
kind = "mode"
base = 2.0
amplitude = 0.5
n = 3

[time]
t_end = 0.2
save_every = 10
"#;

#[test]
fn validate_passes_and_corruption_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let ok = ksfp(&["validate"], dir.path());
    assert!(ok.status.success(), "{}", stdout(&ok));
    let text = stdout(&ok);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
    assert!(text.contains("basis_identity"));

    let bad = ksfp(&["validate", "--corrupt-delta", "--quiet"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let text = stdout(&bad);
    assert!(text.contains("FAIL basis_identity"), "{text}");
    assert!(!text.contains("PASS"));
}

#[test]
fn bad_config_exits_with_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let doc = FLAT.replace(
        "type = \"nonlocal_fp\"",
        "type = \"keller_segel\"\neps = -0.5",
    );
    fs::write(dir.path().join("bad.toml"), doc).unwrap();
    let o = ksfp(&["simulate", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.eps"), "{}", stderr(&o));

    fs::write(dir.path().join("typo.toml"), FLAT.replace("cells", "cels")).unwrap();
    let o = ksfp(&["simulate", "--config", "typo.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo.toml"));

    let o = ksfp(&["simulate", "--preset", "fig9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn uncoupled_run_keeps_its_mass() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("flat.toml"), FLAT).unwrap();
    let o = ksfp(
        &["simulate", "--config", "flat.toml", "--out", "run"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("run/summary.csv")).unwrap();
    let masses: Vec<f64> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(masses.len() > 2);
    for m in &masses {
        assert!((m - masses[0]).abs() <= 1e-12 * masses[0], "{masses:?}");
    }
    assert!((masses[0] - 4.0).abs() < 1e-12);
}

#[test]
fn fig3_preset_forms_several_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let o = ksfp(&["simulate", "--preset", "fig3", "--out", "f3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let peaks: usize = text
        .split_whitespace()
        .collect::<Vec<_>>()
        .windows(2)
        .find(|w| w[1] == "peaks")
        .map(|w| w[0].parse().unwrap())
        .expect("peak count printed");
    assert!(peaks >= 2, "{text}");
    assert!(dir.path().join("f3/plots").is_dir());
    assert!(dir.path().join("f3/metadata.json").is_file());
}

#[test]
fn seed_flag_changes_the_datum() {
    let dir = tempfile::tempdir().unwrap();
    let doc = FLAT
        .replace(
            "kind = \"mode\"\nbase = 2.0\namplitude = 0.5\nn = 3",
            "kind = \"perturbed\"\nbase = 1.0\namplitude = 0.01\nseed = 1",
        )
        .replace("t_end = 0.2", "t_end = 0.01");
    fs::write(dir.path().join("p.toml"), doc).unwrap();
    for (out, seed) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let o = ksfp(
            &[
                "simulate", "--config", "p.toml", "--seed", seed, "--out", out, "--quiet",
            ],
            dir.path(),
        );
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let read = |d: &str| fs::read(dir.path().join(d).join("summary.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn stability_and_expand_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = ksfp(&["stability", "--preset", "fig2", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("argmax n = 6"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("s/dispersion.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,omega_n,lambda_n"));
    // modes 0..=n_max
    assert_eq!(csv.lines().count(), 1 + 65);

    let o = ksfp(&["expand", "--preset", "fig1", "--out", "e"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["alpha_n9.csv", "ks_n9.csv", "overlay.svg", "metadata.json"] {
        assert!(dir.path().join("e").join(name).is_file(), "{name}");
    }
}

#[test]
fn converge_writes_one_row_per_eps() {
    let dir = tempfile::tempdir().unwrap();
    let doc = FLAT.replace("mu = 0.0", "mu = 1.0\na = [1.0, -1.0]\nd = [0.1, 3.0]")
        + "\n[converge]\nladder = [1e-1, 1e-2, 1e-3]\n";
    fs::write(dir.path().join("c.toml"), doc).unwrap();
    let o = ksfp(
        &["converge", "--config", "c.toml", "--out", "c"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("c/converge.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    let json = fs::read_to_string(dir.path().join("c/converge.json")).unwrap();
    assert!(json.contains("\"slope\""));
}
