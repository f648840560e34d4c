use std::path::Path;

use micromotion::runner::{run_scenario, sweep, ScenarioConfig, SweepParam, SUMMARY_FILE, SWEEP_FILE};
use micromotion::Error;
use sha2::{Digest, Sha256};

fn small(name: &str, dir: &Path) -> ScenarioConfig {
    let mut c = ScenarioConfig::builtin(name).unwrap();
    c.hopf_grid = 24;
    c.alpha_points = 24;
    c.strip_sites = 12;
    c.k2_points = 9;
    c.output_dir = dir.to_path_buf();
    c
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_scenario(&small("example1-nontrivial", &tmp.path().join("a"))).unwrap();
    let mut c = small("example1-nontrivial", &tmp.path().join("b"));
    c.threads = 3;
    let b = run_scenario(&c).unwrap();
    assert_eq!(a.files, b.files);
    for f in a.files.iter().map(|f| f.file.as_str()).chain([SUMMARY_FILE]) {
        let x = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        if f == SUMMARY_FILE {
            // the thread count is echoed in the summary
            let strip = |s: &[u8]| {
                String::from_utf8_lossy(s)
                    .lines()
                    .filter(|l| !l.contains("\"threads\""))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert_eq!(x, y, "{f}");
        }
    }
}

#[test]
fn manifest_matches_the_written_files() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_scenario(&small("example1-trivial", tmp.path())).unwrap();
    assert_eq!(r.files.len(), 5);
    for f in &r.files {
        let bytes = std::fs::read(tmp.path().join(&f.file)).unwrap();
        assert_eq!(bytes.len(), f.bytes);
        assert_eq!(hex(&bytes), f.sha256);
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["scenario"]["name"], "example1-trivial");
    assert_eq!(summary["scenario"]["mu2"], -5.0);
    assert_eq!(summary["topology"]["hopf_rounded"], 0);
    assert!(summary.get("timings").is_none());
    assert!(!r.timings.is_empty());
    let spectrum = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 1 + 9 * 24);
}

#[test]
fn failing_stage_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = small("example1-nontrivial", &tmp.path().join("out"));
    c.hopf_tolerance = 1e-9;
    let e = run_scenario(&c).unwrap_err();
    assert!(matches!(e, Error::Stage { stage: "topology", .. }), "{e}");
    assert!(matches!(e.root(), Error::Resolution(_)), "{e}");
    assert!(!c.output_dir.exists());
}

#[test]
fn config_file_overrides_and_resolves() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("steep.toml");
    std::fs::write(
        &path,
        "base = \"example1-nontrivial\"\nname = \"steep\"\nmu2 = -1.5\nstrip_sites = 16\n",
    )
    .unwrap();
    let c = ScenarioConfig::resolve(path.to_str().unwrap()).unwrap();
    assert_eq!(
        (c.name.as_str(), c.mu1, c.mu2, c.strip_sites),
        ("steep", -10.0, -1.5, 16)
    );
    assert!(c.echo().starts_with("steep: piecewise"));
    assert!(matches!(
        ScenarioConfig::resolve("no-such-scenario"),
        Err(Error::UnknownScenario(_))
    ));
}

#[test]
fn sweep_rejects_bad_requests() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small("example1-trivial", tmp.path());
    assert!(matches!(sweep(&c, SweepParam::T0, &[]), Err(Error::ConfigInvalid(_))));
    assert!(matches!(
        sweep(&c, SweepParam::Omega, &[4.0]),
        Err(Error::ConfigInvalid(_))
    ));
    assert!(matches!("beta".parse::<SweepParam>(), Err(Error::ConfigInvalid(_))));
    assert!(!tmp.path().join(SWEEP_FILE).exists());
}

#[test]
fn sweep_continues_past_a_failing_value() {
    let tmp = tempfile::tempdir().unwrap();
    let c = small("example1-trivial", tmp.path());
    let r = sweep(&c, SweepParam::T0, &[1.5, 0.2]).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows[0].report.is_none() && r.rows[0].error.is_some());
    let ok = r.rows[1].report.as_ref().unwrap();
    assert_eq!(ok.scenario.t0, 0.2);
    assert!(tmp.path().join("t0_1").join(SUMMARY_FILE).exists());
    assert!(!tmp.path().join("t0_0").exists());
    let csv = std::fs::read_to_string(tmp.path().join(SWEEP_FILE)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("t0,status,hopf_value"));
    assert!(lines[1].contains(",error,"));
    assert!(lines[2].contains(",ok,"));
}
