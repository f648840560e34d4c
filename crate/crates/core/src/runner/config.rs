//! Scenario configuration files and the builtin scenarios.
//!
//! A configuration is a flat TOML table. Every key is optional when `base`
//! names a builtin scenario; unknown keys are rejected.
//!
//! ```toml
//! base = "example1-nontrivial"
//! name = "steeper"
//! mu2 = -1.5
//! hopf_grid = 32
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bloch::DriveProtocol;
use crate::error::{Error, Result};
use crate::strip::{
    FlatBand, StripControl, StripOptions, DEFAULT_K2_POINTS, DEFAULT_STRIP_SITES, EDGE_THRESHOLD, GAP_WINDOW,
};
use crate::topology::summary::DEFAULT_HOPF_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Piecewise,
    Harmonic,
}

/// A fully specified scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelKind,
    pub mu1: f64,
    pub mu2: f64,
    pub t0: f64,
    pub period: f64,
    pub mu: f64,
    pub omega: f64,
    /// Grid points along `k1` and `k2` for the Hopf integral.
    pub hopf_grid: usize,
    /// Grid points along the micro-motion direction.
    pub alpha_points: usize,
    pub hopf_tolerance: f64,
    /// Convergence target of the two-band propagator.
    pub step_tolerance: f64,
    pub strip_sites: usize,
    pub k2_points: usize,
    pub edge_window: Option<usize>,
    pub edge_threshold: f64,
    /// Half-width of the gap windows in units of `pi/T`.
    pub gap_window: f64,
    pub strip_tolerance: f64,
    pub flat_band: FlatBand,
    /// Transverse momentum of the edge profiles; by default the in-gap edge mode
    /// closest to each gap center is used.
    pub profile_k2: Option<f64>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub threads: usize,
}

/// Keys accepted in a configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub base: Option<String>,
    pub name: Option<String>,
    pub model: Option<ModelKind>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub t0: Option<f64>,
    pub period: Option<f64>,
    pub mu: Option<f64>,
    pub omega: Option<f64>,
    pub hopf_grid: Option<usize>,
    pub alpha_points: Option<usize>,
    pub hopf_tolerance: Option<f64>,
    pub step_tolerance: Option<f64>,
    pub strip_sites: Option<usize>,
    pub k2_points: Option<usize>,
    pub edge_window: Option<usize>,
    pub edge_threshold: Option<f64>,
    pub gap_window: Option<f64>,
    pub strip_tolerance: Option<f64>,
    pub flat_band: Option<FlatBand>,
    pub profile_k2: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub const BUILTIN_NAMES: [&str; 4] = [
    "example1-trivial",
    "example1-nontrivial",
    "example2-trivial",
    "example2-nontrivial",
];

impl ScenarioConfig {
    fn defaults(name: &str, model: ModelKind) -> Self {
        ScenarioConfig {
            name: name.to_string(),
            model,
            mu1: -10.0,
            mu2: -5.0,
            t0: 0.1,
            period: 1.0,
            mu: -10.0,
            omega: 12.0,
            hopf_grid: 48,
            alpha_points: 48,
            hopf_tolerance: DEFAULT_HOPF_TOLERANCE,
            step_tolerance: 1e-9,
            strip_sites: DEFAULT_STRIP_SITES,
            k2_points: DEFAULT_K2_POINTS,
            edge_window: None,
            edge_threshold: EDGE_THRESHOLD,
            gap_window: GAP_WINDOW,
            strip_tolerance: StripControl::default().tolerance,
            flat_band: FlatBand::default(),
            profile_k2: None,
            output_dir: PathBuf::from("out").join(name),
            threads: 1,
        }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let c = match name {
            "example1-trivial" => Self::defaults(name, ModelKind::Piecewise),
            "example1-nontrivial" => ScenarioConfig {
                mu2: -2.0,
                ..Self::defaults(name, ModelKind::Piecewise)
            },
            "example2-trivial" => Self::defaults(name, ModelKind::Harmonic),
            "example2-nontrivial" => ScenarioConfig {
                mu: -2.0,
                omega: 4.0,
                ..Self::defaults(name, ModelKind::Harmonic)
            },
            _ => return Err(Error::UnknownScenario(name.to_string())),
        };
        Ok(c)
    }

    pub fn builtins() -> Vec<Self> {
        BUILTIN_NAMES.iter().map(|n| Self::builtin(n).unwrap()).collect()
    }

    /// A configuration file applied on top of its `base` scenario.
    pub fn from_file_contents(file: ConfigFile) -> Result<Self> {
        let mut c = match (&file.base, file.model) {
            (Some(b), _) => Self::builtin(b)?,
            (None, Some(m)) => Self::defaults(file.name.as_deref().unwrap_or("custom"), m),
            (None, None) => return Err(Error::ConfigInvalid("either `base` or `model` is required".into())),
        };
        if let Some(name) = file.name {
            if file.output_dir.is_none() {
                c.output_dir = PathBuf::from("out").join(&name);
            }
            c.name = name;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = file.$field { c.$field = v; })*};
        }
        set!(
            model,
            mu1,
            mu2,
            t0,
            period,
            mu,
            omega,
            hopf_grid,
            alpha_points,
            hopf_tolerance,
            step_tolerance,
            strip_sites,
            k2_points,
            edge_threshold,
            gap_window,
            strip_tolerance,
            flat_band,
            output_dir,
            threads
        );
        if file.edge_window.is_some() {
            c.edge_window = file.edge_window;
        }
        if file.profile_k2.is_some() {
            c.profile_k2 = file.profile_k2;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        Self::from_file_contents(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// A builtin name, or else a path to a configuration file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&name_or_path) {
            return Self::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        if path.is_file() {
            return Self::load(path);
        }
        Err(Error::UnknownScenario(name_or_path.to_string()))
    }

    pub fn drive(&self) -> Result<DriveProtocol> {
        match self.model {
            ModelKind::Piecewise => DriveProtocol::piecewise(self.mu1, self.mu2, self.t0, self.period),
            ModelKind::Harmonic => DriveProtocol::harmonic(self.mu, self.omega),
        }
        .map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn strip_options(&self) -> StripOptions {
        StripOptions {
            flat: self.flat_band,
            control: StripControl {
                tolerance: self.strip_tolerance,
                ..StripControl::default()
            },
            edge_window: self.edge_window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        self.drive()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("scenario name {:?} is not a plain name", self.name));
        }
        if self.hopf_grid < 8 || self.alpha_points < 8 {
            return bad("Hopf grids need at least 8 points per axis".into());
        }
        if self.strip_sites < 8 {
            return bad(format!("strip_sites = {} is below 8", self.strip_sites));
        }
        if self.k2_points < 3 {
            return bad("k2_points must be at least 3".into());
        }
        if self.edge_window.is_some_and(|w| w == 0 || 2 * w > self.strip_sites) {
            return bad("edge_window must lie in 1 ..= strip_sites/2".into());
        }
        if !(self.edge_threshold > 0.0 && self.edge_threshold < 1.0) {
            return bad("edge_threshold must lie in (0, 1)".into());
        }
        if !(self.gap_window > 0.0 && self.gap_window <= 1.0) {
            return bad("gap_window must lie in (0, 1]".into());
        }
        for (key, v) in [
            ("hopf_tolerance", self.hopf_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("strip_tolerance", self.strip_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{key} must be positive"));
            }
        }
        if self.profile_k2.is_some_and(|k| !k.is_finite()) {
            return bad("profile_k2 must be finite".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// One-line parameter echo.
    pub fn echo(&self) -> String {
        match self.model {
            ModelKind::Piecewise => format!(
                "{}: piecewise mu1={} mu2={} t0={} T={}",
                self.name, self.mu1, self.mu2, self.t0, self.period
            ),
            ModelKind::Harmonic => format!("{}: harmonic mu={} omega={}", self.name, self.mu, self.omega),
        }
    }
}
