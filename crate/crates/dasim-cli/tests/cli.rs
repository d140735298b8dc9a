//! End-to-end checks of the command-line pipeline: every subcommand runs
//! from a config file, produces its outputs plus a manifest, reports the
//! documented exit codes, and reproduces outputs bit-for-bit when re-run.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dasim"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dasim-cli-{}-{name}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

#[test]
fn full_pipeline_fiber_probe_estimate() {
    let dir = workdir("pipeline");
    write(
        &dir.join("fiber.json"),
        r#"{"length_m": 120.0, "segment_length_m": 2.0, "beat_length_m": 2.0,
            "attenuation_db_per_km": 0.2, "polarization_enabled": true, "seed": 9}"#,
    );
    let status = bin()
        .args(["fiber", "--config"])
        .arg(dir.join("fiber.json"))
        .arg("--out")
        .arg(dir.join("fiber"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("fiber/fiber.ffr").exists());
    assert!(dir.join("fiber/fiber_summary.csv").exists());
    assert!(dir.join("fiber/manifest.json").exists());

    write(
        &dir.join("probe.json"),
        &format!(
            r#"{{"fiber_file": {:?}, "scheme": "MIMO", "code_log2_length": 8,
                "symbol_rate_baud": 50e6, "frames": 16, "laser_linewidth_hz": 75.0,
                "rx_noise_sigma_v": 0.0017, "sim_path": "waveform", "seed": 10}}"#,
            dir.join("fiber/fiber.ffr")
        ),
    );
    let status = bin()
        .args(["probe", "--config"])
        .arg(dir.join("probe.json"))
        .arg("--out")
        .arg(dir.join("probe"))
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.join("probe/estimate.fce").exists());

    write(
        &dir.join("estimate.json"),
        &format!(
            r#"{{"estimate_file": {:?}, "segment_length_m": 2.0, "gauge_segments": 1}}"#,
            dir.join("probe/estimate.fce")
        ),
    );
    let status = bin()
        .args(["estimate", "--config"])
        .arg(dir.join("estimate.json"))
        .arg("--out")
        .arg(dir.join("est"))
        .status()
        .unwrap();
    assert!(status.success());
    let profile = std::fs::read_to_string(dir.join("est/stdv_profile.csv")).unwrap();
    assert!(profile.starts_with("segment_index,distance_m,stdv_rad,snr_db,flagged_fraction"));
    assert!(profile.lines().count() > 50);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn subcommands_are_reproducible_from_their_manifests() {
    let dir = workdir("repro");
    write(
        &dir.join("poincare.json"),
        r#"{"ratios": [0.014, 0.34], "segments": 300, "seed": 3}"#,
    );
    for out in ["a", "b"] {
        let status = bin()
            .args(["poincare", "--config"])
            .arg(dir.join("poincare.json"))
            .arg("--out")
            .arg(dir.join(out))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["poincare_r0.014.csv", "poincare_r0.34.csv", "manifest.json"] {
        let a = std::fs::read(dir.join("a").join(name)).unwrap();
        let b = std::fs::read(dir.join("b").join(name)).unwrap();
        assert!(a == b, "{name} not reproducible");
    }
    // Three trajectories requested -> three files plus the manifest.
    let count = std::fs::read_dir(dir.join("a")).unwrap().count();
    assert_eq!(count, 3);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_override_changes_outputs() {
    let dir = workdir("seed");
    write(
        &dir.join("poincare.json"),
        r#"{"ratios": [0.068], "segments": 200, "seed": 3}"#,
    );
    let run = |out: &str, seed: Option<&str>| {
        let mut cmd = bin();
        cmd.args(["poincare", "--config"])
            .arg(dir.join("poincare.json"))
            .arg("--out")
            .arg(dir.join(out));
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
    };
    run("base", None);
    run("other", Some("99"));
    let a = std::fs::read(dir.join("base/poincare_r0.068.csv")).unwrap();
    let b = std::fs::read(dir.join("other/poincare_r0.068.csv")).unwrap();
    assert!(a != b, "seed override had no effect");

    let manifest = std::fs::read_to_string(dir.join("other/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 99"));

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn error_exit_codes() {
    let dir = workdir("errors");

    // Unreadable config file -> I/O error (4).
    let status = bin()
        .args(["fiber", "--config"])
        .arg(dir.join("missing.json"))
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));

    // Invalid configuration -> config error (2).
    write(
        &dir.join("bad.json"),
        r#"{"length_m": 1.0, "segment_length_m": 2.0, "seed": 1}"#,
    );
    let status = bin()
        .args(["fiber", "--config"])
        .arg(dir.join("bad.json"))
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Budget refusal -> resource error (3).
    write(
        &dir.join("huge.json"),
        r#"{"lengths_m": [340.0], "fibres_per_length": 100, "estimators": ["MIMO"],
            "seed": 1, "max_points": 10}"#,
    );
    let status = bin()
        .args(["campaign", "--config"])
        .arg(dir.join("huge.json"))
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn campaign_writes_summary_files() {
    let dir = workdir("campaign");
    write(
        &dir.join("campaign.json"),
        r#"{"lengths_m": [200.0], "fibres_per_length": 8,
            "estimators": ["SIMO", "MIMO"], "seed": 5, "sim_path": "fast",
            "frames": 32, "distance_bin_m": 50.0}"#,
    );
    let status = bin()
        .args(["campaign", "--config"])
        .arg(dir.join("campaign.json"))
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "stats.json",
        "stdv_vs_distance.csv",
        "hist_200_SIMO.csv",
        "hist_200_MIMO.csv",
        "manifest.json",
    ] {
        assert!(dir.join("out").join(name).exists(), "{name} missing");
    }
    let stats = std::fs::read_to_string(dir.join("out/stats.json")).unwrap();
    assert!(stats.contains("\"crossings\""));
    assert!(stats.contains("\"snr_summary\""));

    std::fs::remove_dir_all(&dir).ok();
}
