//! Lattice Chern number of the lower band of the static model.

use std::f64::consts::TAU;

use crate::bloch::{h_vector, Momentum2, GAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{axis_eigenvector, Vec2};
use num_complex::Complex64 as C64;

/// Plaquette Berry phases from normalized link overlaps of the lower band of
/// `h(k) . sigma` on an `n x n` grid, summed and divided by `2 pi`.
pub fn chern_number(mu: f64, n: usize) -> Result<i64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Chern grid of size {n}")));
    }
    let mut states: Vec<Vec2> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let k = Momentum2::on_grid(i, j, n, n);
            let h = h_vector(k, mu);
            let norm = h.norm();
            if norm <= GAP_TOLERANCE {
                return Err(Error::GapClosing(format!(
                    "|h| = {norm:.3e} at k = ({:.6}, {:.6}), mu = {mu}",
                    k.k1, k.k2
                )));
            }
            states.push(axis_eigenvector([-h.hx / norm, -h.hy / norm, -h.hz / norm]));
        }
    }
    let at = |i: usize, j: usize| &states[(i % n) * n + (j % n)];
    let link = |a: &Vec2, b: &Vec2| {
        let z: C64 = a.dotc(b);
        z / z.norm()
    };
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let u1 = link(at(i, j), at(i + 1, j));
            let u2 = link(at(i + 1, j), at(i + 1, j + 1));
            let u3 = link(at(i, j + 1), at(i + 1, j + 1));
            let u4 = link(at(i, j), at(i, j + 1));
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    Ok((total / TAU).round() as i64)
}
