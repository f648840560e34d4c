//! Edge-mode detection, chirality and localization lengths.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::spectrum::{edge_weights, strip_eigenstates, SpectrumTable, StripOptions};
use crate::bloch::DriveProtocol;
use crate::error::{Error, Result};

pub const EDGE_THRESHOLD: f64 = 0.8;

/// Half-width of the gap window in units of `pi/T`.
pub const GAP_WINDOW: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapCenter {
    Zero,
    Pi,
}

impl GapCenter {
    pub fn quasienergy(self, period: f64) -> f64 {
        match self {
            GapCenter::Zero => 0.0,
            GapCenter::Pi => PI / period,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GapCenter::Zero => "gap0",
            GapCenter::Pi => "gapPi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeMode {
    /// Index into the table's `k2` grid.
    pub column: usize,
    pub k2: f64,
    pub band: usize,
    pub quasienergy: f64,
    pub side: Side,
    /// `d quasienergy / d k2` along the tracked branch.
    pub velocity: f64,
    pub weight: f64,
}

/// `a - b` folded into `(-pi/T, pi/T]`.
fn circular_difference(a: f64, b: f64, period: f64) -> f64 {
    let zone = TAU / period;
    let d = (a - b).rem_euclid(zone);
    if d > zone / 2.0 {
        d - zone
    } else {
        d
    }
}

fn overlap(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

/// Continuation of `band` of column `j` in column `to`: among the three states
/// nearest in quasienergy, the one whose site profile overlaps most.
fn follow(table: &SpectrumTable, j: usize, band: usize, to: usize) -> usize {
    let e = table.column(j)[band].quasienergy;
    let p = &table.column_profiles(j)[band];
    let mut near: Vec<(f64, usize)> = table
        .column(to)
        .iter()
        .map(|r| (circular_difference(r.quasienergy, e, table.period).abs(), r.band))
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0));
    near.truncate(3);
    let profiles = table.column_profiles(to);
    near.iter()
        .max_by(|a, b| overlap(p, &profiles[a.1]).total_cmp(&overlap(p, &profiles[b.1])))
        .map(|&(_, b)| b)
        .unwrap()
}

fn velocity(table: &SpectrumTable, j: usize, band: usize) -> f64 {
    let n = table.k2.len();
    if n < 2 {
        return 0.0;
    }
    let e = table.column(j)[band].quasienergy;
    let (lo, hi) = (j.saturating_sub(1), (j + 1).min(n - 1));
    let e_lo = if lo == j {
        e
    } else {
        table.column(lo)[follow(table, j, band, lo)].quasienergy
    };
    let e_hi = if hi == j {
        e
    } else {
        table.column(hi)[follow(table, j, band, hi)].quasienergy
    };
    circular_difference(e_hi, e_lo, table.period) / (table.k2[hi] - table.k2[lo])
}

/// Edge-localized states within `window` (absolute quasienergy) of the gap center.
pub fn edge_modes(table: &SpectrumTable, gap: GapCenter, window: f64) -> Vec<EdgeMode> {
    edge_modes_with_threshold(table, gap, window, EDGE_THRESHOLD)
}

pub fn edge_modes_with_threshold(table: &SpectrumTable, gap: GapCenter, window: f64, threshold: f64) -> Vec<EdgeMode> {
    let center = gap.quasienergy(table.period);
    let mut out = Vec::new();
    for j in 0..table.k2.len() {
        for r in table.column(j) {
            if circular_difference(r.quasienergy, center, table.period).abs() > window {
                continue;
            }
            let (side, weight) = if r.w_left >= r.w_right {
                (Side::Left, r.w_left)
            } else {
                (Side::Right, r.w_right)
            };
            if weight <= threshold {
                continue;
            }
            out.push(EdgeMode {
                column: j,
                k2: r.k2,
                band: r.band,
                quasienergy: r.quasienergy,
                side,
                velocity: velocity(table, j, r.band),
                weight,
            });
        }
    }
    out
}

/// Common sign of the velocities of the modes on `side`, if they agree.
pub fn chirality(modes: &[EdgeMode], side: Side) -> Option<i8> {
    let mut signs = modes
        .iter()
        .filter(|m| m.side == side)
        .map(|m| m.velocity.signum() as i8);
    let first = signs.next()?;
    signs.all(|s| s == first).then_some(first)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeProfile {
    pub k2: f64,
    pub quasienergy: f64,
    pub side: Side,
    pub probabilities: Vec<f64>,
    /// Decay length of `|psi(x)|^2`, in sites.
    pub localization_length: f64,
}

impl EdgeProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("site,probability\n");
        for (x, p) in self.probabilities.iter().enumerate() {
            s.push_str(&format!("{x},{p:.16e}\n"));
        }
        s
    }
}

/// Probabilities below this are rounding noise and are left out of the fit.
const FIT_FLOOR: f64 = 1e-28;

/// `-1/slope` of a least-squares line through `log p` over sites `2 .. nx/3`
/// counted from the edge the state sits on. Infinite when `p` does not decay.
pub fn fit_localization_length(probabilities: &[f64], side: Side) -> f64 {
    let nx = probabilities.len();
    let from_edge = |d: usize| match side {
        Side::Left => probabilities[d],
        Side::Right => probabilities[nx - 1 - d],
    };
    let points: Vec<(f64, f64)> = (1..(nx / 3).max(2).min(nx))
        .map(|d| (d as f64, from_edge(d)))
        .filter(|&(_, p)| p > FIT_FLOOR)
        .map(|(d, p)| (d, p.ln()))
        .collect();
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / slope
    }
}

/// The state at `k2` with the largest edge weight above [`EDGE_THRESHOLD`],
/// restricted to `window` around a gap center when one is given.
pub fn edge_profile(
    drive: &DriveProtocol,
    nx: usize,
    k2: f64,
    gap: Option<(GapCenter, f64)>,
    options: &StripOptions,
) -> Result<EdgeProfile> {
    let period = drive.period();
    let w = options.window(nx);
    let best = strip_eigenstates(drive, nx, k2, options)?
        .into_iter()
        .filter(|s| match gap {
            Some((g, window)) => circular_difference(s.quasienergy, g.quasienergy(period), period).abs() <= window,
            None => true,
        })
        .map(|s| {
            let p = s.site_probabilities();
            let (l, r) = edge_weights(&p, w);
            (s.quasienergy, p, l, r)
        })
        .filter(|(_, _, l, r)| l.max(*r) > EDGE_THRESHOLD)
        .max_by(|a, b| a.2.max(a.3).total_cmp(&b.2.max(b.3)));
    let t0 = match *drive {
        DriveProtocol::PiecewiseI { t0, .. } => t0,
        _ => f64::NAN,
    };
    let (quasienergy, probabilities, l, r) = best.ok_or(Error::NoEdgeMode { t0, k2 })?;
    let side = if l >= r { Side::Left } else { Side::Right };
    Ok(EdgeProfile {
        k2,
        quasienergy,
        side,
        localization_length: fit_localization_length(&probabilities, side),
        probabilities,
    })
}

/// Edge profiles of the piecewise drive at fixed `k2` for each `t0`.
#[allow(clippy::too_many_arguments)]
pub fn localization_profiles(
    mu1: f64,
    mu2: f64,
    period: f64,
    t0s: &[f64],
    nx: usize,
    k2_star: f64,
    gap: Option<(GapCenter, f64)>,
    options: &StripOptions,
) -> Result<Vec<(f64, EdgeProfile)>> {
    t0s.iter()
        .map(|&t0| {
            let drive = DriveProtocol::piecewise(mu1, mu2, t0, period)?;
            Ok((t0, edge_profile(&drive, nx, k2_star, gap, options)?))
        })
        .collect()
}

/// `(t0, xi)` pairs from [`localization_profiles`].
#[allow(clippy::too_many_arguments)]
pub fn localization_length(
    mu1: f64,
    mu2: f64,
    period: f64,
    t0s: &[f64],
    nx: usize,
    k2_star: f64,
    gap: Option<(GapCenter, f64)>,
    options: &StripOptions,
) -> Result<Vec<(f64, f64)>> {
    Ok(localization_profiles(mu1, mu2, period, t0s, nx, k2_star, gap, options)?
        .into_iter()
        .map(|(t0, p)| (t0, p.localization_length))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_an_exponential() {
        let xi = 3.5;
        let mut p: Vec<f64> = (0..60).map(|x| (-(x as f64) / xi).exp()).collect();
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= z);
        assert!((fit_localization_length(&p, Side::Left) - xi).abs() < 1e-9);
        p.reverse();
        assert!((fit_localization_length(&p, Side::Right) - xi).abs() < 1e-9);
        assert!(fit_localization_length(&vec![1.0 / 60.0; 60], Side::Left).is_infinite());
    }

    #[test]
    fn trivial_drive_has_no_edge_mode() {
        let r = localization_length(-10.0, -5.0, 1.0, &[0.1], 30, 0.2, None, &StripOptions::default());
        assert!(matches!(r, Err(Error::NoEdgeMode { .. })));
    }

    #[test]
    fn nontrivial_profile_is_normalized_and_localized() {
        let p = localization_profiles(-10.0, -2.0, 1.0, &[0.1], 40, 0.2, None, &StripOptions::default()).unwrap();
        let (_, prof) = &p[0];
        assert!((prof.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(prof.localization_length > 0.1 && prof.localization_length < 5.0);
        assert_eq!(prof.to_csv().lines().count(), 41);
    }

    #[test]
    fn circular_difference_wraps() {
        let d = circular_difference(PI - 0.01, -PI + 0.01, 1.0);
        assert!((d + 0.02).abs() < 1e-12);
    }
}
