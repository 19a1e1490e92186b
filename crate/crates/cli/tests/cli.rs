use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn microdisk(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_microdisk"));
    cmd.args(args).env_remove("MICRODISK_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("MICRODISK_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn summary(dir: &Path, name: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{name}_summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

const MODES: &str = "experiment = modes\n";

#[test]
fn list_prints_every_experiment() {
    let out = microdisk(&["list"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "modes",
        "fsr",
        "q-vs-diameter",
        "fdtd-spectrum",
        "rabi-profile",
        "detect-pump",
        "detect-gap",
        "detect-epsilon",
        "tuning",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}");
    }
}

#[test]
fn modes_run_writes_hashed_csv_and_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "modes.kv", MODES);
    let out_dir = tmp.path().join("out");
    let out = microdisk(&["run", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("modes.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("# config-hash: "));
    assert!(csv.contains("# experiment: modes"));
    let s = summary(&out_dir, "modes");
    assert_eq!(s["experiment"], "modes");
    assert_eq!(s["all_pass"], true);
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "t.kv",
        "experiment = tuning\nscan.diameters_um = 15, 30\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(
        microdisk(&["run", &cfg, "--out", a.to_str().unwrap()], None)
            .status
            .success()
    );
    assert!(microdisk(
        &["run", &cfg, "--out", b.to_str().unwrap(), "--threads", "2"],
        None
    )
    .status
    .success());
    assert_eq!(
        fs::read(a.join("tuning.csv")).unwrap(),
        fs::read(b.join("tuning.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("tuning_summary.json")).unwrap(),
        fs::read(b.join("tuning_summary.json")).unwrap()
    );
}

#[test]
fn unknown_key_exits_2_without_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.kv",
        "experiment = modes\nmodes.colour = red\n",
    );
    let out_dir = tmp.path().join("out");
    let out = microdisk(&["run", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modes.colour"));
    assert!(!out_dir.exists());
}

#[test]
fn empty_scan_exits_2_without_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.kv",
        "experiment = detect-gap\ndisk.diameter_um = 15\ndisk.l = 81\nscan.gaps_um =\n",
    );
    let out_dir = tmp.path().join("out");
    let out = microdisk(&["run", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn zero_threads_is_a_configuration_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "m.kv", MODES);
    let out_dir = tmp.path().join("out");
    let out = microdisk(
        &[
            "run",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            "0",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn solver_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.kv",
        "experiment = modes\nmodes.diameter_um = 30\nmodes.l = 3000\nmodes.seed_nm = 780\n",
    );
    let out_dir = tmp.path().join("out");
    let out = microdisk(&["run", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}

#[test]
fn output_directory_precedence() {
    let tmp = TempDir::new().unwrap();
    let env_dir = tmp.path().join("env");
    let cfg = write_config(tmp.path(), "m.kv", MODES);
    assert!(microdisk(&["run", &cfg], Some(&env_dir)).status.success());
    assert!(env_dir.join("modes.csv").exists());

    let cfg_dir = tmp.path().join("cfg");
    let text = format!(
        "{MODES}output.dir = {}\noutput.name = named\n",
        cfg_dir.display()
    );
    let cfg = write_config(tmp.path(), "n.kv", &text);
    assert!(microdisk(&["run", &cfg], Some(&env_dir)).status.success());
    assert!(cfg_dir.join("named.csv").exists());

    let flag_dir = tmp.path().join("flag");
    assert!(microdisk(
        &["run", &cfg, "--out", flag_dir.to_str().unwrap()],
        Some(&env_dir)
    )
    .status
    .success());
    assert!(flag_dir.join("named_summary.json").exists());
}

#[test]
fn gap_scan_flags_the_optimum() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "g.kv",
        "experiment = detect-gap\ndisk.diameter_um = 15\ndisk.l = 81\ndisk.seed_nm = 780.41\n\
         surface.roughness_nm = 1\nsurface.correlation_nm = 5\ndrive.flux = 1e8\n\
         scan.gaps_um.min = 0.45\nscan.gaps_um.max = 0.85\nscan.gaps_um.points = 21\n",
    );
    let out_dir = tmp.path().join("out");
    let out = microdisk(&["run", &cfg, "--out", out_dir.to_str().unwrap()], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(&out_dir, "detect-gap");
    let min = s["targets"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["name"] == "minimum M10")
        .unwrap();
    let m10 = min["value"].as_f64().unwrap();
    assert!((0.1..0.16).contains(&m10), "{m10}");
    assert_eq!(s["all_pass"], true);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = TempDir::new().unwrap();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        // A stray key is rejected only after every real key validated.
        let probe = write_config(tmp.path(), "p.kv", &format!("{text}\nprobe.unused = 1\n"));
        let out = microdisk(
            &[
                "run",
                &probe,
                "--out",
                tmp.path().join("x").to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(out.status.code(), Some(2), "{}", path.display());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("probe.unused"), "{}: {err}", path.display());
    }
}
