//! One-call topological analysis of a pseudo-spin field.

use serde::Serialize;

use super::gauge::{curl_residual, gauge_field, hopf_invariant};
use super::grid::{chern_slices, current_field, pseudospin_grid_with, PseudoSpinGrid};
use super::linking::{family_linking, Linking};
use super::preimage::{preimage_curves, Pole, PreimageCurve};
use crate::bloch::DriveProtocol;
use crate::error::{Error, Result};
use crate::floquet::{Branch, StepControl};

pub const DEFAULT_HOPF_TOLERANCE: f64 = 0.05;

/// Second pole pair used to confirm that the linking number does not depend on the poles.
pub const ROTATED_POLE: [f64; 3] = [1.0, 0.0, 0.0];

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TopologySummary {
    pub grid: [usize; 3],
    pub hopf_value: f64,
    pub hopf_rounded: i64,
    /// Linking of the north and south preimage families, when it is defined.
    pub linking_number: Option<i64>,
    pub linking_raw: Option<f64>,
    pub linking_error: Option<String>,
    /// The same for the pole pair `+-ROTATED_POLE`.
    pub rotated_linking_number: Option<i64>,
    pub chern_slices: [i64; 3],
    pub curl_residual: f64,
    pub max_neighbor_angle: f64,
}

#[derive(Debug, Clone)]
pub struct TopologyAnalysis {
    pub summary: TopologySummary,
    pub north: Vec<PreimageCurve>,
    pub south: Vec<PreimageCurve>,
}

fn pole_linking(n: &PseudoSpinGrid, pole: Pole) -> Result<(Linking, Vec<PreimageCurve>, Vec<PreimageCurve>)> {
    let a = preimage_curves(n, pole)?;
    let b = preimage_curves(n, pole.antipode())?;
    let l = family_linking(&a, &b)?;
    Ok((l, a, b))
}

/// Hopf integral, slice Chern numbers and preimage linking of `n`.
///
/// Fails with [`Error::Resolution`] when the integral is further than `tolerance`
/// from an integer, and with [`Error::NonzeroFlux`] when a slice carries flux.
pub fn analyze_field(n: &PseudoSpinGrid, tolerance: f64) -> Result<TopologyAnalysis> {
    n.check_resolution()?;
    let j = current_field(n);
    let chern = chern_slices(&j);
    let a = gauge_field(&j)?;
    let spacing = super::grid::Dims(n.dims()).spacing();
    let hopf_value = hopf_invariant(&j, &a, spacing);
    let hopf_rounded = hopf_value.round() as i64;
    if (hopf_value - hopf_rounded as f64).abs() > tolerance {
        return Err(Error::Resolution(format!(
            "Hopf integral {hopf_value:.4} is not within {tolerance} of an integer on a {:?} grid",
            n.dims()
        )));
    }
    let (linking, north, south, linking_error) = match pole_linking(n, Pole::North) {
        Ok((l, a, b)) => (Some(l), a, b, None),
        Err(e) => {
            let north = preimage_curves(n, Pole::North).unwrap_or_default();
            let south = preimage_curves(n, Pole::South).unwrap_or_default();
            (None, north, south, Some(e.to_string()))
        }
    };
    let rotated = pole_linking(n, Pole::Direction(ROTATED_POLE))
        .ok()
        .map(|(l, _, _)| l.value);
    Ok(TopologyAnalysis {
        summary: TopologySummary {
            grid: n.dims(),
            hopf_value,
            hopf_rounded,
            linking_number: linking.map(|l| l.value),
            linking_raw: linking.map(|l| l.raw),
            linking_error,
            rotated_linking_number: rotated,
            chern_slices: chern,
            curl_residual: curl_residual(&a, &j),
            max_neighbor_angle: n.max_neighbor_angle(),
        },
        north,
        south,
    })
}

pub fn analyze_drive(
    drive: &DriveProtocol,
    dims: [usize; 3],
    branch: Branch,
    control: &StepControl,
    tolerance: f64,
) -> Result<TopologyAnalysis> {
    let n = pseudospin_grid_with(drive, dims, branch, control)?;
    analyze_field(&n, tolerance)
}
