//! End-to-end scenario runs and parameter sweeps.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ModelKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::floquet::{Branch, StepControl};
use crate::strip::edge::{edge_modes_with_threshold, fit_localization_length};
use crate::strip::{chirality, quasienergy_spectrum, EdgeMode, GapCenter, Side, SpectrumTable};
use crate::topology::preimage::curves_csv;
use crate::topology::{analyze_drive, TopologySummary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub k2: f64,
    pub quasienergy: f64,
    pub side: Side,
    pub localization_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub modes: usize,
    pub left: usize,
    pub right: usize,
    pub chirality_left: Option<i8>,
    pub chirality_right: Option<i8>,
    pub profile: Option<ProfileSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioConfig,
    pub topology: TopologySummary,
    pub gap0: GapReport,
    pub gap_pi: GapReport,
    /// Whether a nonzero Hopf integer comes with edge modes in both gaps, and a zero one with neither.
    pub correlation_holds: bool,
    pub files: Vec<ManifestEntry>,
    /// Wall-clock seconds per stage. Left out of `summary.json`, which must be reproducible.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn edge_modes_in_both_gaps(&self) -> bool {
        self.gap0.modes > 0 && self.gap_pi.modes > 0
    }
}

pub const SUMMARY_FILE: &str = "summary.json";

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// The in-gap mode whose profile is reported: the one nearest `k2` when given,
/// otherwise nearest the gap center, ties going to the larger edge weight.
fn pick_profile(modes: &[EdgeMode], table: &SpectrumTable, gap: GapCenter, k2: Option<f64>) -> Option<EdgeMode> {
    let center = gap.quasienergy(table.period);
    let zone = 2.0 * PI / table.period;
    let distance = |m: &EdgeMode| match k2 {
        Some(k) => (m.k2 - k).abs(),
        None => {
            let d = (m.quasienergy - center).rem_euclid(zone);
            d.min(zone - d)
        }
    };
    modes
        .iter()
        .copied()
        .min_by(|a, b| distance(a).total_cmp(&distance(b)).then(b.weight.total_cmp(&a.weight)))
}

fn gap_report(table: &SpectrumTable, config: &ScenarioConfig, gap: GapCenter) -> (GapReport, String) {
    let window = config.gap_window * PI / table.period;
    let modes = edge_modes_with_threshold(table, gap, window, config.edge_threshold);
    let picked = pick_profile(&modes, table, gap, config.profile_k2);
    let mut csv = String::from("site,probability\n");
    let profile = picked.map(|m| {
        let p = &table.column_profiles(m.column)[m.band];
        for (x, v) in p.iter().enumerate() {
            let _ = writeln!(csv, "{x},{v:.16e}");
        }
        ProfileSummary {
            k2: m.k2,
            quasienergy: m.quasienergy,
            side: m.side,
            localization_length: fit_localization_length(p, m.side),
        }
    });
    let report = GapReport {
        modes: modes.len(),
        left: modes.iter().filter(|m| m.side == Side::Left).count(),
        right: modes.iter().filter(|m| m.side == Side::Right).count(),
        chirality_left: chirality(&modes, Side::Left),
        chirality_right: chirality(&modes, Side::Right),
        profile,
    };
    (report, csv)
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("cannot start {threads} worker threads: {e}")))
}

/// Runs every stage in memory, then writes all files. A failing stage leaves the
/// output directory untouched.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    config.validate()?;
    thread_pool(config.threads)?.install(|| run_inner(config))
}

fn run_inner(config: &ScenarioConfig) -> Result<RunReport> {
    let drive = config.drive()?;
    let mut timings = Vec::new();

    let clock = Instant::now();
    let control = StepControl {
        tolerance: config.step_tolerance,
        ..StepControl::default()
    };
    let dims = [config.hopf_grid, config.hopf_grid, config.alpha_points];
    let topology = analyze_drive(&drive, dims, Branch::Lower, &control, config.hopf_tolerance)
        .map_err(|e| e.in_stage("topology"))?;
    timings.push(("topology".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let table = quasienergy_spectrum(&drive, config.strip_sites, config.k2_points, &config.strip_options())
        .map_err(|e| e.in_stage("strip spectrum"))?;
    timings.push(("strip spectrum".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let (gap0, profile0) = gap_report(&table, config, GapCenter::Zero);
    let (gap_pi, profile_pi) = gap_report(&table, config, GapCenter::Pi);
    timings.push(("edge modes".to_string(), clock.elapsed().as_secs_f64()));

    let outputs = [
        ("curves_north.csv", curves_csv(&topology.north)),
        ("curves_south.csv", curves_csv(&topology.south)),
        ("spectrum.csv", table.to_csv()),
        ("profile_gap0.csv", profile0),
        ("profile_gapPi.csv", profile_pi),
    ];
    let clock = Instant::now();
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_stage("output"))?;
    let mut files = Vec::new();
    for (name, text) in &outputs {
        write_file(&dir.join(name), text.as_bytes())?;
        files.push(ManifestEntry {
            file: name.to_string(),
            bytes: text.len(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    let both = gap0.modes > 0 && gap_pi.modes > 0;
    let none = gap0.modes == 0 && gap_pi.modes == 0;
    let report = RunReport {
        scenario: config.clone(),
        correlation_holds: if topology.summary.hopf_rounded != 0 { both } else { none },
        topology: topology.summary,
        gap0,
        gap_pi,
        files,
        timings: Vec::new(),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_file(&dir.join(SUMMARY_FILE), json.as_bytes())?;
    timings.push(("output".to_string(), clock.elapsed().as_secs_f64()));
    Ok(RunReport { timings, ..report })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::from(e).in_stage("output"))
}

/// `name: parameters` for the builtin scenarios followed by `extra`.
pub fn list_scenarios(extra: &[ScenarioConfig]) -> Vec<(String, String)> {
    ScenarioConfig::builtins()
        .iter()
        .chain(extra)
        .map(|c| (c.name.clone(), c.echo()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    T0,
    Mu2,
    Mu,
    Omega,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t0" => Ok(SweepParam::T0),
            "mu2" => Ok(SweepParam::Mu2),
            "mu" => Ok(SweepParam::Mu),
            "omega" => Ok(SweepParam::Omega),
            _ => Err(Error::ConfigInvalid(format!(
                "cannot sweep '{s}'; expected one of t0, mu2, mu, omega"
            ))),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T0 => "t0",
            SweepParam::Mu2 => "mu2",
            SweepParam::Mu => "mu",
            SweepParam::Omega => "omega",
        }
    }

    fn model(self) -> ModelKind {
        match self {
            SweepParam::T0 | SweepParam::Mu2 => ModelKind::Piecewise,
            SweepParam::Mu | SweepParam::Omega => ModelKind::Harmonic,
        }
    }

    fn apply(self, c: &mut ScenarioConfig, v: f64) {
        match self {
            SweepParam::T0 => c.t0 = v,
            SweepParam::Mu2 => c.mu2 = v,
            SweepParam::Mu => c.mu = v,
            SweepParam::Omega => c.omega = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameter: SweepParam,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_FILE: &str = "sweep.csv";

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "{},status,hopf_value,hopf_rounded,linking_number,modes_gap0,modes_gapPi,xi_gap0,xi_gapPi,error\n",
            self.parameter.name()
        );
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        for row in &self.rows {
            match &row.report {
                Some(r) => {
                    let xi = |g: &GapReport| opt(g.profile.as_ref().map(|p| p.localization_length));
                    let _ = writeln!(
                        s,
                        "{:.16e},ok,{:.16e},{},{},{},{},{},{},",
                        row.value,
                        r.topology.hopf_value,
                        r.topology.hopf_rounded,
                        r.topology.linking_number.map(|l| l.to_string()).unwrap_or_default(),
                        r.gap0.modes,
                        r.gap_pi.modes,
                        xi(&r.gap0),
                        xi(&r.gap_pi)
                    );
                }
                None => {
                    let msg = row.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
                    let _ = writeln!(s, "{:.16e},error,,,,,,,,\"{msg}\"", row.value);
                }
            }
        }
        s
    }
}

/// Runs `base` once per value, each into its own subdirectory, and writes
/// `sweep.csv` next to them. Failures are recorded and the sweep continues.
pub fn sweep(base: &ScenarioConfig, parameter: SweepParam, values: &[f64]) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::ConfigInvalid("sweep needs at least one value".into()));
    }
    if base.model != parameter.model() {
        return Err(Error::ConfigInvalid(format!(
            "{} does not apply to the {:?} model",
            parameter.name(),
            base.model
        )));
    }
    base.validate()?;
    let mut rows = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let mut c = base.clone();
        parameter.apply(&mut c, v);
        c.name = format!("{}-{}{}", base.name, parameter.name(), i);
        c.output_dir = base.output_dir.join(format!("{}_{i}", parameter.name()));
        let row = match run_scenario(&c) {
            Ok(r) => SweepRow {
                value: v,
                report: Some(r),
                error: None,
            },
            Err(e) => SweepRow {
                value: v,
                report: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    let report = SweepReport { parameter, rows };
    std::fs::create_dir_all(&base.output_dir)?;
    write_file(&base.output_dir.join(SWEEP_FILE), report.to_csv().as_bytes())?;
    Ok(report)
}
