//! Strip Hamiltonians: open along `k1`'s real-space direction, Bloch in `k2`.
//!
//! Basis index `2 x + s` for site `x` and spin component `s`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bloch::{h_vector, BlochVector, Momentum2, GAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{bloch_matrix, frobenius_dense, HermitianEigen, Mat2, I};

/// Samples of `k1` used to Fourier transform the flattened Bloch Hamiltonian.
pub const KERNEL_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct StripHamiltonian {
    pub nx: usize,
    pub k2: f64,
    pub matrix: DMatrix<C64>,
}

impl StripHamiltonian {
    pub fn dim(&self) -> usize {
        2 * self.nx
    }

    pub fn hermiticity_residual(&self) -> f64 {
        frobenius_dense(&(&self.matrix - self.matrix.adjoint()))
    }
}

/// How the flat second segment of the piecewise drive is put on a strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatBand {
    /// Real-space hoppings of `eps0 h(k)/|h(k)| . sigma`, cut off by the open ends.
    #[default]
    Truncated,
    /// `eps0 sgn(H)` of the open-boundary static matrix.
    Spectral,
}

fn set_block(m: &mut DMatrix<C64>, x: usize, y: usize, b: &Mat2) {
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * x + r, 2 * y + c)] = b[(r, c)];
        }
    }
}

fn add_block(m: &mut DMatrix<C64>, x: usize, y: usize, b: &Mat2) {
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * x + r, 2 * y + c)] += b[(r, c)];
        }
    }
}

/// On-site `(mu + cos k2 + lambda_z) sigma_z + sin k2 sigma_y`, hopping
/// `x -> x+1` equal to `sigma_x/(2i) + ((1 + cos k2)/2) sigma_z`, open ends.
pub fn build_strip_static(mu: f64, lambda_z: f64, nx: usize, k2: f64) -> Result<StripHamiltonian> {
    if nx == 0 {
        return Err(Error::InvalidArgument("strip needs at least one site".into()));
    }
    let onsite = bloch_matrix(&BlochVector::new(0.0, k2.sin(), mu + k2.cos() + lambda_z));
    let hop = hop_block(k2);
    let mut m = DMatrix::zeros(2 * nx, 2 * nx);
    for x in 0..nx {
        set_block(&mut m, x, x, &onsite);
        if x + 1 < nx {
            set_block(&mut m, x, x + 1, &hop);
            set_block(&mut m, x + 1, x, &hop.adjoint());
        }
    }
    Ok(StripHamiltonian { nx, k2, matrix: m })
}

fn hop_block(k2: f64) -> Mat2 {
    let sx = bloch_matrix(&BlochVector::new(1.0, 0.0, 0.0));
    let sz = bloch_matrix(&BlochVector::new(0.0, 0.0, 1.0));
    sx * (-I * 0.5) + sz * C64::new(0.5 * (1.0 + k2.cos()), 0.0)
}

/// The same blocks closed into a ring; its spectrum is `+-|h(2 pi m/nx, k2)|`.
pub fn build_strip_ring(mu: f64, nx: usize, k2: f64) -> Result<StripHamiltonian> {
    let mut h = build_strip_static(mu, 0.0, nx, k2)?;
    if nx >= 3 {
        let hop = hop_block(k2);
        add_block(&mut h.matrix, nx - 1, 0, &hop);
        add_block(&mut h.matrix, 0, nx - 1, &hop.adjoint());
    }
    Ok(h)
}

/// Blocks `f(d) = (1/M) sum_k b(k) e^{-i k d}` for `d = 0 .. count`, so that
/// `f(d)` is the hopping `x -> x + d` of the Bloch matrix `b(k1)`.
fn real_space_blocks(count: usize, samples: usize, b: impl Fn(f64) -> Result<Mat2>) -> Result<Vec<Mat2>> {
    let bloch: Vec<(f64, Mat2)> = (0..samples)
        .map(|s| {
            let k1 = std::f64::consts::TAU * s as f64 / samples as f64;
            Ok((k1, b(k1)?))
        })
        .collect::<Result<_>>()?;
    Ok((0..count)
        .map(|d| {
            let mut acc = Mat2::zeros();
            for (k1, hk) in &bloch {
                acc += hk * C64::from_polar(1.0, -k1 * d as f64);
            }
            acc / C64::new(samples as f64, 0.0)
        })
        .collect())
}

fn flat_kernel(mu: f64, eps0: f64, count: usize, k2: f64, samples: usize) -> Result<Vec<Mat2>> {
    real_space_blocks(count, samples, |k1| {
        let h = h_vector(Momentum2::new(k1, k2), mu);
        let n = h.norm();
        if n <= GAP_TOLERANCE {
            return Err(Error::GapClosing(format!(
                "|h| = {n:.3e} at k = ({k1:.6}, {k2:.6}), mu = {mu}"
            )));
        }
        Ok(bloch_matrix(&(h * (eps0 / n))))
    })
}

/// Open-boundary matrix of `eps0 h_hat(k) . sigma` built from its real-space
/// hoppings, every hopping that fits inside the strip retained.
pub fn build_strip_flat(mu: f64, eps0: f64, nx: usize, k2: f64) -> Result<StripHamiltonian> {
    if nx == 0 {
        return Err(Error::InvalidArgument("strip needs at least one site".into()));
    }
    let f = flat_kernel(mu, eps0, nx, k2, KERNEL_SAMPLES.max(4 * nx))?;
    let mut m = DMatrix::zeros(2 * nx, 2 * nx);
    for x in 0..nx {
        for y in x..nx {
            let b = f[y - x];
            set_block(&mut m, x, y, &b);
            if y != x {
                set_block(&mut m, y, x, &b.adjoint());
            }
        }
    }
    // the d = 0 block is Hermitian up to rounding; symmetrize exactly
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Ok(StripHamiltonian { nx, k2, matrix: m })
}

/// `eps0 sgn(H)` through a full eigendecomposition.
pub fn flatten_strip(h: &StripHamiltonian, eps0: f64) -> Result<StripHamiltonian> {
    let eig = HermitianEigen::new(&h.matrix);
    let smallest = eig.values.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    if smallest <= GAP_TOLERANCE {
        return Err(Error::GapClosing(format!(
            "strip eigenvalue {smallest:.3e} at k2 = {:.6}",
            h.k2
        )));
    }
    Ok(StripHamiltonian {
        nx: h.nx,
        k2: h.k2,
        matrix: eig.apply_real(|e| eps0 * e.signum()),
    })
}

/// Second segment of the piecewise drive on a strip.
pub fn build_strip_flat_band(mu: f64, eps0: f64, nx: usize, k2: f64, flat: FlatBand) -> Result<StripHamiltonian> {
    match flat {
        FlatBand::Truncated => build_strip_flat(mu, eps0, nx, k2),
        FlatBand::Spectral => flatten_strip(&build_strip_static(mu, 0.0, nx, k2)?, eps0),
    }
}
