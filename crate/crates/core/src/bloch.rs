//! Two-band Bloch vectors and the two drive protocols.
//!
//! Every model in this crate is built from
//! `h(k) = (sin k1, sin k2, mu + cos k1 + cos k2 + cos k1 cos k2)`,
//! either static, flattened to a constant norm, or dressed with a harmonic
//! `sigma_z` drive.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Default threshold below which `|h|` counts as a gap closing.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Crystal momentum `(k1, k2)`, both reduced to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum2 {
    pub k1: f64,
    pub k2: f64,
}

impl Momentum2 {
    pub fn new(k1: f64, k2: f64) -> Self {
        Momentum2 {
            k1: reduce_angle(k1),
            k2: reduce_angle(k2),
        }
    }

    /// Node `(i, j)` of an `n1 x n2` grid, exactly `(2pi i/n1, 2pi j/n2)`.
    pub fn on_grid(i: usize, j: usize, n1: usize, n2: usize) -> Self {
        Momentum2 {
            k1: TAU * (i % n1) as f64 / n1 as f64,
            k2: TAU * (j % n2) as f64 / n2 as f64,
        }
    }
}

fn reduce_angle(k: f64) -> f64 {
    let r = k.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Coefficients of `h . sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector {
        hx: 0.0,
        hy: 0.0,
        hz: 0.0,
    };

    pub fn new(hx: f64, hy: f64, hz: f64) -> Self {
        BlochVector { hx, hy, hz }
    }

    pub fn norm(&self) -> f64 {
        (self.hx * self.hx + self.hy * self.hy + self.hz * self.hz).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.hx * other.hx + self.hy * other.hy + self.hz * other.hz
    }

    pub fn cross(&self, o: &BlochVector) -> BlochVector {
        BlochVector {
            hx: self.hy * o.hz - self.hz * o.hy,
            hy: self.hz * o.hx - self.hx * o.hz,
            hz: self.hx * o.hy - self.hy * o.hx,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.hx, self.hy, self.hz]
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.hx + o.hx, self.hy + o.hy, self.hz + o.hz)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.hx - o.hx, self.hy - o.hy, self.hz - o.hz)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, s: f64) -> BlochVector {
        BlochVector::new(self.hx * s, self.hy * s, self.hz * s)
    }
}

/// The band parameter `mu` of the static model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticModelParams {
    pub mu: f64,
}

/// `h(k)` of the static two-band model.
pub fn h_vector(k: Momentum2, mu: f64) -> BlochVector {
    let (s1, c1) = k.k1.sin_cos();
    let (s2, c2) = k.k2.sin_cos();
    BlochVector {
        hx: s1,
        hy: s2,
        hz: mu + c1 + c2 + c1 * c2,
    }
}

/// `eps0 * h / |h|`, failing when `|h| <= tol`.
pub fn flatten_with_tolerance(h: BlochVector, eps0: f64, tol: f64) -> Result<BlochVector> {
    let norm = h.norm();
    if norm <= tol {
        return Err(Error::GapClosing(format!("|h| = {norm:.3e} at or below {tol:.1e}")));
    }
    Ok(h * (eps0 / norm))
}

pub fn flatten(h: BlochVector, eps0: f64) -> Result<BlochVector> {
    flatten_with_tolerance(h, eps0, GAP_TOLERANCE)
}

/// Time-periodic drive applied to the static model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveProtocol {
    /// `h(k; mu1)` on `(nT, nT + t0]`, then `eps0 h(k; mu2)/|h|` on `(nT + t0, (n+1)T]`.
    PiecewiseI {
        mu1: f64,
        mu2: f64,
        t0: f64,
        period: f64,
        eps0: f64,
    },
    /// `h(k; mu) + (0, 0, cos(omega t))` with `T = 2pi/omega`.
    HarmonicII { mu: f64, omega: f64 },
    /// A constant `h . sigma`, independent of `k`. Used as a reference case.
    Static { h: BlochVector, period: f64 },
}

impl DriveProtocol {
    /// Piecewise drive with `eps0 = pi/(T - t0)`.
    pub fn piecewise(mu1: f64, mu2: f64, t0: f64, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        if !(t0 > 0.0 && t0 < period) {
            return Err(Error::InvalidArgument(format!(
                "t0 must satisfy 0 < t0 < T, got t0 = {t0}, T = {period}"
            )));
        }
        if !(mu1.is_finite() && mu2.is_finite()) {
            return Err(Error::InvalidArgument("mu1 and mu2 must be finite".into()));
        }
        Ok(DriveProtocol::PiecewiseI {
            mu1,
            mu2,
            t0,
            period,
            eps0: PI / (period - t0),
        })
    }

    pub fn harmonic(mu: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidArgument("mu must be finite".into()));
        }
        Ok(DriveProtocol::HarmonicII { mu, omega })
    }

    pub fn constant(h: BlochVector, period: f64) -> Self {
        DriveProtocol::Static { h, period }
    }

    pub fn period(&self) -> f64 {
        match *self {
            DriveProtocol::PiecewiseI { period, .. } => period,
            DriveProtocol::HarmonicII { omega, .. } => TAU / omega,
            DriveProtocol::Static { period, .. } => period,
        }
    }

    pub fn omega(&self) -> f64 {
        TAU / self.period()
    }

    /// Initial time `alpha/omega` for micro-motion parameter `alpha`.
    pub fn time_of_alpha(&self, alpha: f64) -> f64 {
        alpha * self.period() / TAU
    }

    /// Whether the Hamiltonian is constant between breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self, DriveProtocol::HarmonicII { .. })
    }

    /// Times strictly inside `(t_start, t_end)` at which the Hamiltonian jumps.
    pub fn breakpoints(&self, t_start: f64, t_end: f64) -> Vec<f64> {
        let DriveProtocol::PiecewiseI { t0, period, .. } = *self else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut n = (t_start / period).floor() - 1.0;
        loop {
            let base = n * period;
            if base > t_end {
                break;
            }
            for t in [base, base + t0] {
                if t > t_start && t < t_end {
                    out.push(t);
                }
            }
            n += 1.0;
        }
        out
    }
}

/// Instantaneous `h(k, t)` of the drive.
pub fn hamiltonian_at(drive: &DriveProtocol, k: Momentum2, t: f64) -> Result<BlochVector> {
    match *drive {
        DriveProtocol::PiecewiseI {
            mu1,
            mu2,
            t0,
            period,
            eps0,
        } => {
            let r = t.rem_euclid(period);
            // (0, t0] belongs to the first segment; t = 0 is the end of the previous period
            if r > 0.0 && r <= t0 {
                Ok(h_vector(k, mu1))
            } else {
                flatten(h_vector(k, mu2), eps0)
            }
        }
        DriveProtocol::HarmonicII { mu, omega } => {
            let mut h = h_vector(k, mu);
            h.hz += (omega * t).cos();
            Ok(h)
        }
        DriveProtocol::Static { h, .. } => Ok(h),
    }
}
