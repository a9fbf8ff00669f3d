use std::collections::BTreeMap;
use std::path::Path;

use stirred_vacuum::harness::{run_experiment, simulate, sweep, ExperimentConfig, SweepAxis};
use stirred_vacuum::rse::{entropy_approx, mean_h2_closed};

fn small(dir: Option<&Path>) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        n: 16,
        tau: 1.5,
        n_cycles: 120,
        seed: 4,
        output_dir: dir.map(Path::to_path_buf),
        ..Default::default()
    };
    c.analyses.occupations = true;
    c.analyses.profile = true;
    c.analyses.floquet = true;
    c.analyses.links = true;
    c
}

fn read_all(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small(Some(a.path()))).unwrap();
    run_experiment(&small(Some(b.path()))).unwrap();
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert!(fa.len() >= 8, "{:?}", fa.keys());
    assert_eq!(fa, fb);
}

#[test]
fn manifest_replays_the_run() {
    let a = tempfile::tempdir().unwrap();
    let (_, files) = run_experiment(&small(Some(a.path()))).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for f in &files {
        if f.file_name().unwrap() != "manifest.json" {
            let name = f.file_name().unwrap().to_str().unwrap();
            assert!(listed.iter().any(|l| l.ends_with(name)), "{name} missing from manifest");
        }
    }
    assert!(manifest["version"].is_string());
    assert!(manifest["wall_seconds"].as_f64().unwrap() >= 0.0);

    let b = tempfile::tempdir().unwrap();
    let mut replay: ExperimentConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(replay, small(Some(a.path())));
    replay.output_dir = Some(b.path().to_path_buf());
    run_experiment(&replay).unwrap();
    assert_eq!(read_all(a.path()), read_all(b.path()));
}

#[test]
fn single_point_sweep_matches_direct_run() {
    let cfg = small(None);
    let direct = simulate(&cfg).unwrap();
    let rows = sweep(&cfg, &SweepAxis::Tau(vec![cfg.tau])).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].outcome.as_ref().unwrap(), &direct.summary);
}

#[test]
fn sweep_reports_bad_points_without_aborting() {
    let mut cfg = small(None);
    cfg.n_cycles = 40;
    let rows = sweep(&cfg, &SweepAxis::N(vec![16, 15, 20])).unwrap();
    assert!(rows[0].outcome.is_ok());
    assert!(rows[1].outcome.is_err());
    assert!(rows[2].outcome.is_ok());
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![4, 5, 6]);
}

fn slow_config(burn_in: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        n: 64,
        tau: 10.0,
        n_cycles: 2000,
        burn_in_fraction: burn_in,
        ..Default::default()
    };
    c.analyses.profile = true;
    c
}

#[test]
fn slow_regime_is_stationary_and_matches_random_profile() {
    let base = simulate(&slow_config(0.1)).unwrap();
    let doubled = simulate(&slow_config(0.2)).unwrap();
    for pick in [
        |s: &stirred_vacuum::harness::run::Summary| s.energy_per_site.clone().unwrap(),
        |s: &stirred_vacuum::harness::run::Summary| s.entropy_per_site.clone().unwrap(),
    ] {
        let (a, b) = (pick(&base.summary), pick(&doubled.summary));
        assert!((a.mean - b.mean).abs() < a.std_error, "{} vs {} (se {})", a.mean, b.mean, a.std_error);
    }
    let profile = base.profile.unwrap();
    let predicted = entropy_approx(32, 64).unwrap();
    assert!((profile[32] - predicted).abs() / predicted < 0.05, "{} vs {predicted}", profile[32]);
    assert!((profile[0]).abs() < 1e-12 && profile[64].abs() < 1e-9);
}

#[test]
fn fast_regime_profile_fits_three_sines() {
    let mut c = ExperimentConfig {
        n: 64,
        tau: 0.5,
        n_cycles: 2000,
        ..Default::default()
    };
    c.analyses.profile = true;
    let r = simulate(&c).unwrap();
    let profile = r.profile.unwrap();
    let max = profile.iter().copied().fold(0.0, f64::max);
    let fit = r.summary.profile_fit.unwrap();
    assert!(fit.rms <= 0.03 * max, "rms {} vs max {max}", fit.rms);
}

#[test]
fn quarter_block_follows_closed_form() {
    let approx = entropy_approx(64, 256).unwrap();
    let closed = 64.0 * mean_h2_closed(0.25).unwrap();
    assert!((approx - closed).abs() < 1e-9 * closed);
}
