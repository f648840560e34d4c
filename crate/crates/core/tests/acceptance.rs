//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use micromotion::bloch::{DriveProtocol, Momentum2};
use micromotion::floquet::{micromotion_unitary, period_unitary, propagate, StepControl};
use micromotion::linalg::frobenius;
use micromotion::runner::{run_scenario, RunReport, ScenarioConfig, BUILTIN_NAMES};
use micromotion::strip::{localization_length, StripOptions};
use micromotion::topology::{analyze_field, chern_number, family_linking, hopf_texture_grid, preimage_curves, Pole};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run_builtin(name: &str, root: &Path) -> RunReport {
    let mut c = ScenarioConfig::builtin(name).unwrap();
    c.output_dir = root.join(name);
    c.threads = threads();
    run_scenario(&c).unwrap()
}

fn is_nontrivial(name: &str) -> bool {
    name.ends_with("-nontrivial")
}

fn correlation(reports: &[RunReport]) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for r in reports {
        let both = r.edge_modes_in_both_gaps();
        ok &= (r.topology.hopf_rounded != 0) == both;
        detail.push(format!(
            "{} hopf {} modes {}/{}",
            r.scenario.name, r.topology.hopf_rounded, r.gap0.modes, r.gap_pi.modes
        ));
    }
    check(ok, detail.join("; "))
}

fn integrality(reports: &[RunReport]) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for r in reports {
        let t = &r.topology;
        ok &= (t.hopf_value - t.hopf_value.round()).abs() < 0.05;
        ok &= if is_nontrivial(&r.scenario.name) {
            t.hopf_rounded.abs() >= 1
        } else {
            t.hopf_rounded == 0
        };
        detail.push(format!("{} {:.4}", r.scenario.name, t.hopf_value));
    }
    check(ok, detail.join("; "))
}

fn cross_oracle(reports: &[RunReport]) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for r in reports.iter().filter(|r| is_nontrivial(&r.scenario.name)) {
        let t = &r.topology;
        ok &= t.linking_number == Some(t.hopf_rounded);
        detail.push(format!(
            "{} hopf {} linking {:?}",
            r.scenario.name, t.hopf_rounded, t.linking_number
        ));
    }
    let grid = hopf_texture_grid(48).unwrap();
    let a = analyze_field(&grid, 0.05).unwrap();
    let pole = Pole::Direction([1.0, 0.0, 0.0]);
    let l = family_linking(
        &preimage_curves(&grid, pole).unwrap(),
        &preimage_curves(&grid, pole.antipode()).unwrap(),
    )
    .unwrap();
    ok &= (a.summary.hopf_value - 1.0).abs() < 0.05 && (l.raw - 1.0).abs() < 0.05;
    detail.push(format!("texture hopf {:.4} linking {:.4}", a.summary.hopf_value, l.raw));
    check(ok, detail.join("; "))
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn alpha_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_spectrum: f64 = 0.0;
    let mut worst_conjugation: f64 = 0.0;
    for drive in [
        DriveProtocol::piecewise(-10.0, -2.0, 0.1, 1.0).unwrap(),
        DriveProtocol::harmonic(-2.0, 4.0).unwrap(),
    ] {
        for _ in 0..20 {
            let k = Momentum2::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI));
            let a1 = rng.random_range(0.0..2.0 * PI);
            let a2 = rng.random_range(0.0..2.0 * PI);
            let u1 = period_unitary(&drive, k, a1).unwrap();
            let u2 = period_unitary(&drive, k, a2).unwrap();
            let (p1, p2) = (u1.eigenphases(), u2.eigenphases());
            let d = circular_gap(p1[0], p2[0]).max(circular_gap(p1[1], p2[1])) / drive.period();
            worst_spectrum = worst_spectrum.max(d);
            let v = micromotion_unitary(&drive, k, a1, a2).unwrap();
            worst_conjugation = worst_conjugation.max(frobenius(&(v.conjugate(&u1).matrix() - u2.matrix())));
        }
    }
    check(
        worst_spectrum < 1e-8 && worst_conjugation < 1e-8,
        format!("quasienergy {worst_spectrum:.2e}, conjugation {worst_conjugation:.2e}"),
    )
}

fn edge_placement(reports: &[RunReport]) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for r in reports.iter().filter(|r| is_nontrivial(&r.scenario.name)) {
        let (g0, gp) = (&r.gap0, &r.gap_pi);
        ok &= g0.modes > 0 && gp.modes > 0;
        ok &= g0.chirality_left.is_some() && g0.chirality_left == gp.chirality_left;
        ok &= g0.chirality_right.is_some() && g0.chirality_right == gp.chirality_right;
        detail.push(format!(
            "{} left {:?}/{:?} right {:?}/{:?}",
            r.scenario.name, g0.chirality_left, gp.chirality_left, g0.chirality_right, gp.chirality_right
        ));
    }
    check(ok, detail.join("; "))
}

fn localization() -> Outcome {
    let t0s = [0.1, 0.3, 0.5, 0.7];
    let xi = localization_length(-10.0, -2.0, 1.0, &t0s, 120, 0.2, None, &StripOptions::default())
        .map_err(|e| e.to_string())?;
    let values: Vec<String> = xi.iter().map(|(t, x)| format!("{t}:{x:.4}")).collect();
    check(
        xi.windows(2).all(|w| w[1].1 >= w[0].1),
        format!("xi {}", values.join(" ")),
    )
}

fn chern() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for mu in [-10.0, -5.0, -2.0] {
        let (a, b) = (chern_number(mu, 64).unwrap(), chern_number(mu, 128).unwrap());
        ok &= a == b && (a != 0) == (mu == -2.0);
        detail.push(format!("mu {mu}: {a}/{b}"));
    }
    check(ok, detail.join("; "))
}

fn infrastructure(reports: &[RunReport], root: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let drive = if i % 2 == 0 {
            DriveProtocol::piecewise(
                rng.random_range(-12.0..0.0),
                rng.random_range(-6.0..2.0),
                rng.random_range(0.05..0.95),
                1.0,
            )
        } else {
            DriveProtocol::harmonic(rng.random_range(-12.0..2.0), rng.random_range(3.0..15.0))
        }
        .unwrap();
        let k = Momentum2::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let t1 = rng.random_range(0.0..drive.period());
        let t2 = t1 + rng.random_range(0.0..drive.period());
        worst = worst.max(
            propagate(&drive, k, t1, t2, StepControl::default().initial_steps)
                .unwrap()
                .residual(),
        );
    }
    let curl = reports.iter().map(|r| r.topology.curl_residual).fold(0.0, f64::max);
    let mut identical = true;
    for name in ["example1-trivial", "example1-nontrivial"] {
        let again = root.join("again");
        let mut c = ScenarioConfig::builtin(name).unwrap();
        c.output_dir = again.join(name);
        c.threads = threads();
        let r = run_scenario(&c).unwrap();
        for f in r.files.iter().map(|f| f.file.as_str()).chain(["summary.json"]) {
            identical &=
                std::fs::read(root.join(name).join(f)).unwrap() == std::fs::read(again.join(name).join(f)).unwrap();
        }
    }
    check(
        worst < 1e-10 && curl < 1e-8 && identical,
        format!("unitarity {worst:.2e}, curl {curl:.2e}, repeat runs identical: {identical}"),
    )
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let clock = Instant::now();
    let reports: Vec<RunReport> = BUILTIN_NAMES.iter().map(|n| run_builtin(n, root.path())).collect();
    println!("scenarios computed in {:.0} s", clock.elapsed().as_secs_f64());

    let criteria: [Criterion; 8] = [
        ("1 scenario correlation", Box::new(|| correlation(&reports))),
        ("2 Hopf integrality", Box::new(|| integrality(&reports))),
        ("3 Hopf equals linking", Box::new(|| cross_oracle(&reports))),
        ("4 alpha invariance", Box::new(alpha_invariance)),
        ("5 edge-state placement", Box::new(|| edge_placement(&reports))),
        ("6 localization length vs t0", Box::new(localization)),
        ("7 static Chern number", Box::new(chern)),
        (
            "8 numerical infrastructure",
            Box::new(|| infrastructure(&reports, root.path())),
        ),
    ];
    let mut failures = 0;
    for (name, f) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(d) => println!("criterion {name}: PASS ({d})"),
            Err(d) => {
                failures += 1;
                println!("criterion {name}: FAIL ({d})");
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
