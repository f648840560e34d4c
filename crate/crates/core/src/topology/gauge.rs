//! Coulomb-gauge vector potential of the current and the Hopf integral.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rustfft::{FftDirection, FftPlanner};

use super::grid::{curl, slice_fluxes, Dims, VectorFieldGrid};
use crate::error::{Error, Result};

/// Largest slice flux tolerated before the gauge solve refuses to run.
pub const FLUX_TOLERANCE: f64 = 1e-6;

/// In-place 3D DFT over a `Dims` layout (unnormalized in both directions).
fn fft3(buf: &mut [C64], dims: Dims, direction: FftDirection) {
    let [n1, n2, n3] = dims.0;
    let mut planner = FftPlanner::new();
    let mut line = Vec::new();
    for (axis, n) in [n1, n2, n3].into_iter().enumerate() {
        let fft = planner.plan_fft(n, direction);
        let stride = match axis {
            0 => n2 * n3,
            1 => n3,
            _ => 1,
        };
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for start in 0..dims.len() {
            let c = dims.coords(start);
            if c[axis] != 0 {
                continue;
            }
            line.clear();
            line.extend((0..n).map(|m| buf[start + m * stride]));
            fft.process_with_scratch(&mut line, &mut scratch);
            for (m, v) in line.iter().enumerate() {
                buf[start + m * stride] = *v;
            }
        }
    }
}

/// Symbols `(e^{i theta_m} - 1) / h` of the forward difference, `theta_m = 2 pi m / N`.
fn forward_symbols(n: usize, h: f64) -> Vec<C64> {
    (0..n)
        .map(|m| (C64::from_polar(1.0, TAU * m as f64 / n as f64) - 1.0) / h)
        .collect()
}

fn symbols(dims: Dims) -> [Vec<C64>; 3] {
    let h = dims.spacing();
    std::array::from_fn(|a| forward_symbols(dims.0[a], h[a]))
}

fn spectra(f: &VectorFieldGrid) -> [Vec<C64>; 3] {
    let dims = f.layout();
    std::array::from_fn(|axis| {
        let mut c: Vec<C64> = f.data().iter().map(|v| C64::new(v[axis], 0.0)).collect();
        fft3(&mut c, dims, FftDirection::Forward);
        c
    })
}

/// Edge field `A` with `curl A = j` and `div A = 0` for a face current `j`.
///
/// Solved per Fourier mode as `A(q) = -conj(d) x j(q) / |d|^2`, where `d` are the
/// forward-difference symbols, so the lattice curl reproduces `j` to rounding
/// whenever `j` is divergence-free. The zero mode is set to zero; it must vanish,
/// which is the statement that every slice Chern number is zero.
pub fn gauge_field(j: &VectorFieldGrid) -> Result<VectorFieldGrid> {
    gauge_field_with_tolerance(j, FLUX_TOLERANCE)
}

pub fn gauge_field_with_tolerance(j: &VectorFieldGrid, flux_tolerance: f64) -> Result<VectorFieldGrid> {
    let flux = slice_fluxes(j);
    if let Some(axis) = (0..3).find(|&a| flux[a].abs() > flux_tolerance) {
        return Err(Error::NonzeroFlux { axis, flux: flux[axis] });
    }
    let dims = j.layout();
    let hat = spectra(j);
    let d = symbols(dims);
    let total = dims.len() as f64;
    let mut a: [Vec<C64>; 3] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); dims.len()]);
    for flat in 1..dims.len() {
        let [m1, m2, m3] = dims.coords(flat);
        let dc = [d[0][m1].conj(), d[1][m2].conj(), d[2][m3].conj()];
        let d2: f64 = dc.iter().map(|z| z.norm_sqr()).sum();
        let jv = [hat[0][flat], hat[1][flat], hat[2][flat]];
        let s = -1.0 / d2;
        a[0][flat] = (dc[1] * jv[2] - dc[2] * jv[1]) * s;
        a[1][flat] = (dc[2] * jv[0] - dc[0] * jv[2]) * s;
        a[2][flat] = (dc[0] * jv[1] - dc[1] * jv[0]) * s;
    }
    let comps = a.map(|mut c| {
        fft3(&mut c, dims, FftDirection::Inverse);
        c.into_iter().map(|z| z.re / total).collect::<Vec<f64>>()
    });
    Ok(VectorFieldGrid::from_components(dims.0, comps))
}

/// `-sum_x sum_mu A_mu(x) j_mu(x + e_mu) h^3`: the lattice `-integral j . A`.
///
/// Each edge is paired with the face across its far end, which keeps the sum
/// exactly invariant under lattice gauge transformations of `A`.
pub fn hopf_invariant(j: &VectorFieldGrid, a: &VectorFieldGrid, spacing: [f64; 3]) -> f64 {
    assert_eq!(j.dims(), a.dims(), "j and A live on different grids");
    let dims = j.layout();
    let vol = spacing[0] * spacing[1] * spacing[2];
    let (jd, ad) = (j.data(), a.data());
    let sum: f64 = (0..dims.len())
        .map(|flat| {
            let c = dims.coords(flat);
            (0..3)
                .map(|mu| ad[flat][mu] * jd[dims.shifted(c, mu, 1)][mu])
                .sum::<f64>()
        })
        .sum();
    -sum * vol
}

/// `||curl A - j|| / ||j||`.
pub fn curl_residual(a: &VectorFieldGrid, j: &VectorFieldGrid) -> f64 {
    let n = j.norm();
    if n == 0.0 {
        return curl(a).norm();
    }
    curl(a).sub(j).norm() / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::grid::edge_divergence;

    fn field(dims: [usize; 3], f: impl Fn(f64, f64, f64) -> [f64; 3]) -> VectorFieldGrid {
        let d = Dims(dims);
        let h = d.spacing();
        let data = (0..d.len())
            .map(|flat| {
                let [i, j, l] = d.coords(flat);
                f(i as f64 * h[0], j as f64 * h[1], l as f64 * h[2])
            })
            .collect();
        VectorFieldGrid::new(dims, data).unwrap()
    }

    #[test]
    fn zero_current_gives_zero_potential() {
        let a = gauge_field(&VectorFieldGrid::zeros([8, 8, 8])).unwrap();
        assert_eq!(a.max_abs(), 0.0);
    }

    #[test]
    fn solves_the_discrete_curl_of_a_solenoidal_field() {
        // the lattice curl of any edge field is a divergence-free face field
        let b = field([16, 12, 10], |x, y, z| {
            [(y + 2.0 * z).sin(), (x - z).cos() * (2.0 * x).sin(), (x + y).cos()]
        });
        let j = curl(&b);
        let a = gauge_field(&j).unwrap();
        assert!(curl_residual(&a, &j) < 1e-12);
        assert!(edge_divergence(&a).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn nonzero_flux_is_rejected() {
        let j = field([8, 8, 8], |_, _, _| [0.0, 0.0, 0.1]);
        assert!(matches!(gauge_field(&j), Err(Error::NonzeroFlux { axis: 2, .. })));
    }

    #[test]
    fn hopf_integral_is_gauge_invariant() {
        // A -> A + grad(lambda) leaves the pairing unchanged when div j = 0
        let b = field([12, 12, 12], |x, y, z| {
            [y.sin() * z.cos(), (x + z).sin(), (2.0 * y).cos()]
        });
        let j = curl(&b);
        let a = gauge_field(&j).unwrap();
        let h = Dims([12, 12, 12]).spacing();
        let lam = field([12, 12, 12], |x, y, z| [(x + 2.0 * y - z).sin() * 0.7, 0.0, 0.0]);
        // forward gradient of the scalar stored in component 0
        let d = Dims([12, 12, 12]);
        let grad: Vec<[f64; 3]> = (0..d.len())
            .map(|flat| {
                let c = d.coords(flat);
                std::array::from_fn(|ax| {
                    (lam.data()[d.shifted(c, ax, 1)][0] - lam.data()[d.index(c[0], c[1], c[2])][0]) / h[ax]
                })
            })
            .collect();
        let shifted: Vec<[f64; 3]> = a
            .data()
            .iter()
            .zip(&grad)
            .map(|(x, g)| [x[0] + g[0], x[1] + g[1], x[2] + g[2]])
            .collect();
        let shifted = VectorFieldGrid::new([12, 12, 12], shifted).unwrap();
        let before = hopf_invariant(&j, &a, h);
        let after = hopf_invariant(&j, &shifted, h);
        assert!((before - after).abs() < 1e-12 * before.abs().max(1.0));
    }
}
