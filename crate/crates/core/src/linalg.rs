//! Small dense complex linear algebra used across the crate.

use nalgebra::{DMatrix, DVector, Matrix2, Schur, SymmetricEigen, Vector2};
use num_complex::Complex64 as C64;

use crate::bloch::BlochVector;

pub type Mat2 = Matrix2<C64>;
pub type Vec2 = Vector2<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `h . sigma`.
pub fn bloch_matrix(h: &BlochVector) -> Mat2 {
    Mat2::new(
        C64::new(h.hz, 0.0),
        C64::new(h.hx, -h.hy),
        C64::new(h.hx, h.hy),
        C64::new(-h.hz, 0.0),
    )
}

/// `<v| sigma |v>` for a normalized spinor.
pub fn pauli_expectation(v: &Vec2) -> [f64; 3] {
    let a = v[0];
    let b = v[1];
    let ab = a.conj() * b;
    [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()]
}

/// `U = e^{i phase} (cos(theta) I - i sin(theta) axis . sigma)` with `theta` in `[0, pi]`.
///
/// The eigenvector of `axis . sigma` with eigenvalue `+1` picks up `e^{i(phase - theta)}`,
/// the other `e^{i(phase + theta)}`.
#[derive(Debug, Clone, Copy)]
pub struct U2Decomposition {
    pub phase: f64,
    pub theta: f64,
    pub axis: [f64; 3],
}

pub fn decompose_u2(u: &Mat2) -> U2Decomposition {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let phase = 0.5 * det.arg();
    let v = u * C64::from_polar(1.0, -phase);
    let a0 = 0.5 * (v[(0, 0)] + v[(1, 1)]).re;
    let a3 = 0.5 * (v[(1, 1)].im - v[(0, 0)].im);
    let a1 = -0.5 * (v[(0, 1)] + v[(1, 0)]).im;
    let a2 = 0.5 * (v[(1, 0)] - v[(0, 1)]).re;
    let s = (a1 * a1 + a2 * a2 + a3 * a3).sqrt();
    let theta = s.atan2(a0);
    let axis = if s > 0.0 {
        [a1 / s, a2 / s, a3 / s]
    } else {
        [0.0, 0.0, 1.0]
    };
    U2Decomposition { phase, theta, axis }
}

/// Eigenvector of `m . sigma` with eigenvalue `+1` (unit `m`), before gauge fixing.
pub fn axis_eigenvector(m: [f64; 3]) -> Vec2 {
    let [mx, my, mz] = m;
    let v = if mz >= 0.0 {
        Vec2::new(C64::new(1.0 + mz, 0.0), C64::new(mx, my))
    } else {
        Vec2::new(C64::new(mx, -my), C64::new(1.0 - mz, 0.0))
    };
    v / C64::new(v.norm(), 0.0)
}

/// Multiplies by a phase so the largest-magnitude component is real and positive.
/// Magnitudes within `1e-12` of each other count as a tie, resolved towards the first component.
pub fn fix_gauge(v: &Vec2) -> Vec2 {
    let (m0, m1) = (v[0].norm(), v[1].norm());
    let pivot = if m0 + 1e-12 >= m1 { v[0] } else { v[1] };
    if pivot.norm() == 0.0 {
        return *v;
    }
    v * (pivot.conj() / pivot.norm())
}

pub fn frobenius(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn unitarity_residual2(u: &Mat2) -> f64 {
    frobenius(&(u.adjoint() * u - Mat2::identity()))
}

/// Wraps an angle into `(-pi, pi]`.
pub fn principal_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = x.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Dense product via `matrixmultiply`'s complex kernel.
pub fn matmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = DMatrix::<C64>::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is repr(C) { re, im }, layout-identical to [f64; 2]; nalgebra
    // storage is column-major with the given dimensions, so the strides below are in bounds.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

pub fn frobenius_dense(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    frobenius_dense(&(matmul(&u.adjoint(), u) - DMatrix::identity(n, n)))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn new(h: &DMatrix<C64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let n = h.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        HermitianEigen { values, vectors }
    }

    /// `f(H)` for a real spectral function `f`.
    pub fn apply_real(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        self.apply(|e| C64::new(f(e), 0.0))
    }

    pub fn apply(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let fe = f(e);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fe);
        }
        matmul(&scaled, &self.vectors.adjoint())
    }

    /// `exp(-i H t)`.
    pub fn evolve(&self, t: f64) -> DMatrix<C64> {
        self.apply(|e| C64::from_polar(1.0, -e * t))
    }
}

/// Eigendecomposition of a unitary matrix through its complex Schur form,
/// which is diagonal for normal matrices.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    /// `angle(lambda)` in `(-pi, pi]`.
    pub angles: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl UnitaryEigen {
    pub fn new(u: &DMatrix<C64>) -> Self {
        let (q, t) = Schur::new(u.clone()).unpack();
        let angles = (0..u.nrows()).map(|i| principal_angle(t[(i, i)].arg())).collect();
        UnitaryEigen { angles, vectors: q }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decomposition_reconstructs_the_matrix() {
        let m = [0.3, -0.5, 0.81];
        let n: f64 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        let axis = [m[0] / n.sqrt(), m[1] / n.sqrt(), m[2] / n.sqrt()];
        let (phase, theta): (f64, f64) = (0.7, 2.2);
        let ms = bloch_matrix(&BlochVector::new(axis[0], axis[1], axis[2]));
        let u = (Mat2::identity() * C64::new(theta.cos(), 0.0) - ms * (I * theta.sin())) * C64::from_polar(1.0, phase);
        let d = decompose_u2(&u);
        let ms2 = bloch_matrix(&BlochVector::new(d.axis[0], d.axis[1], d.axis[2]));
        let u2 = (Mat2::identity() * C64::new(d.theta.cos(), 0.0) - ms2 * (I * d.theta.sin()))
            * C64::from_polar(1.0, d.phase);
        assert!(frobenius(&(u - u2)) < 1e-13);
        let v = axis_eigenvector(d.axis);
        let uv = u2 * v;
        let expect = v * C64::from_polar(1.0, d.phase - d.theta);
        assert!((uv - expect).norm() < 1e-13);
    }

    #[test]
    fn gauge_fix_makes_largest_component_positive() {
        let v = Vec2::new(C64::new(0.1, 0.2), C64::new(-0.6, 0.7)).normalize();
        let g = fix_gauge(&v);
        assert_abs_diff_eq!(g[1].im, 0.0, epsilon = 1e-15);
        assert!(g[1].re > 0.0);
        let tie = Vec2::new(C64::new(0.0, 1.0), C64::new(1.0, 0.0)) / C64::new(2f64.sqrt(), 0.0);
        let g = fix_gauge(&tie);
        assert!(g[0].re > 0.0 && g[0].im.abs() < 1e-15);
    }

    #[test]
    fn matmul_matches_nalgebra() {
        let a = DMatrix::from_fn(7, 5, |i, j| {
            C64::new((i * 3 + j) as f64 * 0.1, (i as f64) - (j as f64) * 0.3)
        });
        let b = DMatrix::from_fn(5, 4, |i, j| C64::new((i + j) as f64 * -0.2, 0.5 * (i * j) as f64));
        assert!(frobenius_dense(&(matmul(&a, &b) - &a * &b)) < 1e-12);
    }

    #[test]
    fn hermitian_exponential_is_unitary() {
        let n = 6;
        let h = DMatrix::from_fn(n, n, |i, j| {
            let z = C64::new((i + 2 * j) as f64 * 0.13, (i as f64 - j as f64) * 0.21);
            if i == j {
                C64::new(z.re, 0.0)
            } else {
                z
            }
        });
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = HermitianEigen::new(&h);
        let u = eig.evolve(0.9);
        assert!(unitarity_residual(&u) < 1e-12);
        let ue = UnitaryEigen::new(&u);
        let mut a = ue.angles.clone();
        a.sort_by(f64::total_cmp);
        let mut b: Vec<f64> = eig.values.iter().map(|e| principal_angle(-e * 0.9)).collect();
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }
}
