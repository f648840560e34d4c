//! Quasienergy spectra of strips over a `k2` grid.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::hamiltonian::FlatBand;
use super::propagate::{StripControl, StripDrive};
use crate::bloch::DriveProtocol;
use crate::error::Result;
use crate::linalg::{principal_angle, UnitaryEigen};

pub const DEFAULT_STRIP_SITES: usize = 60;
pub const DEFAULT_K2_POINTS: usize = 121;

/// Sites counted as "edge" on each side.
pub fn default_edge_window(nx: usize) -> usize {
    (nx / 10).max(4).min(nx)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StripOptions {
    pub flat: FlatBand,
    pub control: StripControl,
    /// Defaults to [`default_edge_window`].
    pub edge_window: Option<usize>,
}

impl StripOptions {
    pub fn window(&self, nx: usize) -> usize {
        self.edge_window.unwrap_or_else(|| default_edge_window(nx)).min(nx)
    }
}

/// An eigenvector of the strip period unitary.
#[derive(Debug, Clone)]
pub struct StripState {
    /// In `(-pi/T, pi/T]`.
    pub quasienergy: f64,
    pub vector: DVector<C64>,
}

impl StripState {
    /// `|psi(x)|^2` summed over the two internal components.
    pub fn site_probabilities(&self) -> Vec<f64> {
        self.vector
            .as_slice()
            .chunks(2)
            .map(|c| c[0].norm_sqr() + c[1].norm_sqr())
            .collect()
    }
}

/// `(left, right)` probability on the outermost `window` sites.
pub fn edge_weights(probabilities: &[f64], window: usize) -> (f64, f64) {
    let w = window.min(probabilities.len());
    let left: f64 = probabilities[..w].iter().sum();
    let right: f64 = probabilities[probabilities.len() - w..].iter().sum();
    if 2 * w > probabilities.len() {
        // overlapping windows would double count
        let total = left + right;
        return (left / total.max(1.0), right / total.max(1.0));
    }
    (left, right)
}

/// Eigenstates of the period unitary at `k2`, sorted by quasienergy.
pub fn strip_eigenstates(drive: &DriveProtocol, nx: usize, k2: f64, options: &StripOptions) -> Result<Vec<StripState>> {
    let sd = StripDrive::new(drive, nx, k2, options.flat)?;
    let u = sd.period_unitary(0.0, &options.control)?;
    let eig = UnitaryEigen::new(&u);
    let period = drive.period();
    let mut states: Vec<StripState> = eig
        .angles
        .iter()
        .enumerate()
        .map(|(i, a)| StripState {
            quasienergy: principal_angle(-a) / period,
            vector: eig.vectors.column(i).into_owned(),
        })
        .collect();
    states.sort_by(|a, b| a.quasienergy.total_cmp(&b.quasienergy));
    Ok(states)
}

/// Uniform grid on `[-pi, pi]`, both ends included.
pub fn k2_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|j| (2 * j as i64 - (n as i64 - 1)) as f64 * PI / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub k2: f64,
    pub band: usize,
    pub quasienergy: f64,
    pub w_left: f64,
    pub w_right: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub nx: usize,
    pub period: f64,
    pub edge_window: usize,
    pub k2: Vec<f64>,
    /// `2 nx` rows per `k2`, column after column.
    pub rows: Vec<SpectrumRow>,
    /// Site probabilities of each row.
    pub profiles: Vec<Vec<f64>>,
}

impl SpectrumTable {
    pub fn column(&self, j: usize) -> &[SpectrumRow] {
        let n = 2 * self.nx;
        &self.rows[j * n..(j + 1) * n]
    }

    pub fn column_profiles(&self, j: usize) -> &[Vec<f64>] {
        let n = 2 * self.nx;
        &self.profiles[j * n..(j + 1) * n]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k2,band,quasienergy,w_left,w_right\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                r.k2, r.band, r.quasienergy, r.w_left, r.w_right
            ));
        }
        s
    }
}

/// Period-unitary spectrum of the strip for each point of [`k2_grid`].
pub fn quasienergy_spectrum(
    drive: &DriveProtocol,
    nx: usize,
    k2_points: usize,
    options: &StripOptions,
) -> Result<SpectrumTable> {
    let k2 = k2_grid(k2_points);
    let window = options.window(nx);
    let columns: Vec<Vec<(SpectrumRow, Vec<f64>)>> = k2
        .par_iter()
        .map(|&q| -> Result<Vec<(SpectrumRow, Vec<f64>)>> {
            let states = strip_eigenstates(drive, nx, q, options)?;
            Ok(states
                .iter()
                .enumerate()
                .map(|(band, s)| {
                    let p = s.site_probabilities();
                    let (w_left, w_right) = edge_weights(&p, window);
                    (
                        SpectrumRow {
                            k2: q,
                            band,
                            quasienergy: s.quasienergy,
                            w_left,
                            w_right,
                        },
                        p,
                    )
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let (rows, profiles) = columns.into_iter().flatten().unzip();
    Ok(SpectrumTable {
        nx,
        period: drive.period(),
        edge_window: window,
        k2,
        rows,
        profiles,
    })
}
