//! Analytic degree-one Hopf texture used as an oracle.

use std::f64::consts::PI;

use super::grid::{PseudoSpinGrid, Vec3};
use crate::error::Result;
use crate::linalg::{pauli_expectation, Vec2};
use num_complex::Complex64 as C64;

/// Radius of the ball carrying the texture, centred in the `[0, 2pi)^3` box.
pub const TEXTURE_RADIUS: f64 = 0.95 * PI;

/// Pseudo-spin of the standard Hopf map composed with a ball-to-sphere collapse.
///
/// Inside the ball the spinor is `((x + i y) sin g / r, cos g + i z sin g / r)` with
/// `g = pi (1 - r/R)^2`; outside it is constant and `n = (0, 0, -1)`.
pub fn hopf_texture(k: Vec3) -> Vec3 {
    let x = [k[0] - PI, k[1] - PI, k[2] - PI];
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r >= TEXTURE_RADIUS {
        return [0.0, 0.0, -1.0];
    }
    let g = PI * (1.0 - r / TEXTURE_RADIUS).powi(2);
    let s = if r > 0.0 { g.sin() / r } else { 0.0 };
    let z = Vec2::new(C64::new(x[0] * s, x[1] * s), C64::new(g.cos(), x[2] * s));
    pauli_expectation(&(z / C64::new(z.norm(), 0.0)))
}

pub fn hopf_texture_grid(n: usize) -> Result<PseudoSpinGrid> {
    PseudoSpinGrid::from_fn([n, n, n], |a, b, c| hopf_texture([a, b, c]))
}
