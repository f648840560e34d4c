//! Strip evolution operators.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::hamiltonian::{build_strip_flat_band, build_strip_static, FlatBand};
use crate::bloch::DriveProtocol;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_dense, matmul, HermitianEigen, UnitaryEigen};

/// Adaptive stepping for the harmonic drive on a strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripControl {
    /// Steps per period at the first attempt.
    pub initial_steps: usize,
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for StripControl {
    fn default() -> Self {
        StripControl {
            initial_steps: 64,
            tolerance: 1e-7,
            max_steps: 1 << 14,
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Piecewise {
        t0: f64,
        first: HermitianEigen,
        second: HermitianEigen,
    },
    Harmonic {
        omega: f64,
        base: HermitianEigen,
        /// `sigma_z` diagonal in the strip basis.
        z: Vec<f64>,
    },
}

/// A drive on a strip at fixed `k2`, with its constant parts diagonalized once.
#[derive(Debug, Clone)]
pub struct StripDrive {
    pub nx: usize,
    pub k2: f64,
    pub period: f64,
    kind: Kind,
}

// fourth-order triple-jump weights
const YOSHIDA_OUTER: f64 = 1.351_207_191_959_657_6;
const YOSHIDA_INNER: f64 = -1.702_414_383_919_315_3;

impl StripDrive {
    pub fn new(drive: &DriveProtocol, nx: usize, k2: f64, flat: FlatBand) -> Result<Self> {
        let kind = match *drive {
            DriveProtocol::PiecewiseI { mu1, mu2, t0, eps0, .. } => Kind::Piecewise {
                t0,
                first: HermitianEigen::new(&build_strip_static(mu1, 0.0, nx, k2)?.matrix),
                second: HermitianEigen::new(&build_strip_flat_band(mu2, eps0, nx, k2, flat)?.matrix),
            },
            DriveProtocol::HarmonicII { mu, omega } => Kind::Harmonic {
                omega,
                base: HermitianEigen::new(&build_strip_static(mu, 0.0, nx, k2)?.matrix),
                z: (0..2 * nx).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            },
            DriveProtocol::Static { .. } => {
                return Err(Error::InvalidArgument(
                    "the static reference drive has no strip form".into(),
                ))
            }
        };
        Ok(StripDrive {
            nx,
            k2,
            period: drive.period(),
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.nx
    }

    /// Time-ordered evolution from `t_start` to `t_end`.
    pub fn evolve(&self, t_start: f64, t_end: f64, control: &StripControl) -> Result<DMatrix<C64>> {
        if t_start.is_nan() || t_end.is_nan() || t_end < t_start {
            return Err(Error::InvalidArgument(format!(
                "propagation interval [{t_start}, {t_end}] is reversed"
            )));
        }
        let dim = self.dim();
        if t_end == t_start {
            return Ok(DMatrix::identity(dim, dim));
        }
        match &self.kind {
            Kind::Piecewise { t0, first, second } => Ok(self.piecewise(*t0, first, second, t_start, t_end)),
            Kind::Harmonic { omega, base, z } => {
                let fraction = (t_end - t_start) / self.period;
                let mut n = ((control.initial_steps as f64 * fraction).ceil() as usize).max(1);
                let mut prev = split_product(base, z, *omega, t_start, t_end, n);
                loop {
                    if 2 * n > control.max_steps {
                        let next = split_product(base, z, *omega, t_start, t_end, n);
                        return Err(Error::NonConvergence {
                            steps: n,
                            change: frobenius_dense(&(next - prev)),
                        });
                    }
                    n *= 2;
                    let next = split_product(base, z, *omega, t_start, t_end, n);
                    let change = frobenius_dense(&(&next - &prev));
                    if change < control.tolerance {
                        return Ok(next);
                    }
                    prev = next;
                }
            }
        }
    }

    fn piecewise(&self, t0: f64, first: &HermitianEigen, second: &HermitianEigen, a: f64, b: f64) -> DMatrix<C64> {
        let mut cuts = vec![a];
        let mut n = (a / self.period).floor();
        while n * self.period < b {
            for t in [n * self.period, n * self.period + t0] {
                if t > a && t < b {
                    cuts.push(t);
                }
            }
            n += 1.0;
        }
        cuts.push(b);
        let mut u: Option<DMatrix<C64>> = None;
        for w in cuts.windows(2) {
            let r = (0.5 * (w[0] + w[1])).rem_euclid(self.period);
            let seg = if r <= t0 { first } else { second }.evolve(w[1] - w[0]);
            u = Some(match u {
                None => seg,
                Some(prev) => matmul(&seg, &prev),
            });
        }
        u.unwrap()
    }

    /// One period starting at drive phase `alpha`.
    pub fn period_unitary(&self, alpha: f64, control: &StripControl) -> Result<DMatrix<C64>> {
        let t = alpha * self.period / std::f64::consts::TAU;
        self.evolve(t, t + self.period, control)
    }
}

/// Fourth-order composition of Strang steps for `H0 + cos(omega t) Z`.
fn split_product(base: &HermitianEigen, z: &[f64], omega: f64, a: f64, b: f64, n: usize) -> DMatrix<C64> {
    let h = (b - a) / n as f64;
    let weights = [YOSHIDA_OUTER, YOSHIDA_INNER, YOSHIDA_OUTER];
    let outer = base.evolve(YOSHIDA_OUTER * h);
    let inner = base.evolve(YOSHIDA_INNER * h);
    let dim = z.len();
    let mut u = DMatrix::<C64>::identity(dim, dim);
    let kick = |u: &mut DMatrix<C64>, t: f64, s: f64| {
        let c = (omega * t).cos() * s;
        for (i, zi) in z.iter().enumerate() {
            let p = C64::from_polar(1.0, -c * zi);
            u.row_mut(i).iter_mut().for_each(|x| *x *= p);
        }
    };
    for step in 0..n {
        let mut t = a + step as f64 * h;
        for (w, drift) in weights.iter().zip([&outer, &inner, &outer]) {
            let tau = w * h;
            kick(&mut u, t, 0.5 * tau);
            u = matmul(drift, &u);
            kick(&mut u, t + tau, 0.5 * tau);
            t += tau;
        }
    }
    u
}

/// One-period strip unitary from `t = 0`.
pub fn strip_period_unitary(
    drive: &DriveProtocol,
    nx: usize,
    k2: f64,
    flat: FlatBand,
    control: &StripControl,
) -> Result<DMatrix<C64>> {
    StripDrive::new(drive, nx, k2, flat)?.period_unitary(0.0, control)
}

fn sorted_phases(u: &DMatrix<C64>) -> Vec<f64> {
    let mut p = UnitaryEigen::new(u).angles;
    p.sort_by(f64::total_cmp);
    p
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Largest eigenphase mismatch between strip period unitaries started at the given
/// drive phases, each built as `W(alpha) U(0) W(alpha)^dag`.
pub fn alpha_flatness_check(
    drive: &DriveProtocol,
    nx: usize,
    k2: f64,
    alphas: &[f64],
    flat: FlatBand,
    control: &StripControl,
) -> Result<f64> {
    let sd = StripDrive::new(drive, nx, k2, flat)?;
    let u0 = sd.period_unitary(0.0, control)?;
    let mut spectra = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let w = sd.evolve(0.0, alpha * sd.period / std::f64::consts::TAU, control)?;
        let u = matmul(&matmul(&w, &u0), &w.adjoint());
        spectra.push(sorted_phases(&u));
    }
    let mut worst: f64 = 0.0;
    for i in 0..spectra.len() {
        for j in i + 1..spectra.len() {
            for (a, b) in spectra[i].iter().zip(&spectra[j]) {
                worst = worst.max(circular_gap(*a, *b));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;
    use std::f64::consts::PI;

    fn ex1(mu2: f64, t0: f64) -> DriveProtocol {
        DriveProtocol::piecewise(-10.0, mu2, t0, 1.0).unwrap()
    }

    #[test]
    fn piecewise_period_is_two_exact_factors() {
        let d = ex1(-2.0, 0.1);
        let u = strip_period_unitary(&d, 20, 0.4, FlatBand::Truncated, &StripControl::default()).unwrap();
        let h1 = HermitianEigen::new(&build_strip_static(-10.0, 0.0, 20, 0.4).unwrap().matrix);
        let h2 = HermitianEigen::new(
            &build_strip_flat_band(-2.0, PI / 0.9, 20, 0.4, FlatBand::Truncated)
                .unwrap()
                .matrix,
        );
        let want = matmul(&h2.evolve(0.9), &h1.evolve(0.1));
        assert!(frobenius_dense(&(u - want)) < 1e-12);
    }

    #[test]
    fn unitary_at_sixty_sites() {
        for d in [ex1(-2.0, 0.1), DriveProtocol::harmonic(-2.0, 4.0).unwrap()] {
            let u = strip_period_unitary(&d, 60, 0.3, FlatBand::Truncated, &StripControl::default()).unwrap();
            assert!(unitarity_residual(&u) < 1e-9);
        }
    }

    #[test]
    fn vanishing_first_segment_leaves_minus_identity() {
        let d = ex1(-5.0, 1e-9);
        let u = strip_period_unitary(&d, 12, 0.2, FlatBand::Spectral, &StripControl::default()).unwrap();
        let minus = DMatrix::<C64>::identity(24, 24) * C64::new(-1.0, 0.0);
        assert!(frobenius_dense(&(u - minus)) < 1e-6);
    }

    #[test]
    fn trivial_piecewise_spectrum_is_gapped() {
        let d = ex1(-5.0, 0.1);
        let u = strip_period_unitary(&d, 30, 0.0, FlatBand::Truncated, &StripControl::default()).unwrap();
        for p in sorted_phases(&u) {
            assert!(p.abs() > 0.3 && PI - p.abs() > 0.3, "{p}");
        }
    }

    #[test]
    fn splitting_matches_a_finer_splitting() {
        let d = DriveProtocol::harmonic(-2.0, 4.0).unwrap();
        let sd = StripDrive::new(&d, 8, 0.5, FlatBand::Truncated).unwrap();
        let StripDrive {
            kind: Kind::Harmonic { base, z, omega },
            ..
        } = &sd
        else {
            unreachable!()
        };
        let coarse = split_product(base, z, *omega, 0.0, sd.period, 64);
        let fine = split_product(base, z, *omega, 0.0, sd.period, 1024);
        // fourth order: 16x the steps cuts the error by about 16^4
        let finer = split_product(base, z, *omega, 0.0, sd.period, 2048);
        let e_coarse = frobenius_dense(&(&coarse - &finer));
        let e_fine = frobenius_dense(&(&fine - &finer));
        assert!(e_fine < 1e-10 && e_coarse / e_fine > 1e3, "{e_coarse} {e_fine}");
    }

    #[test]
    fn single_site_harmonic_strip_matches_midpoint_product() {
        use crate::bloch::BlochVector;
        use crate::floquet::{step_exponential, Unitary2};
        let d = DriveProtocol::harmonic(-2.0, 4.0).unwrap();
        let k2 = 0.7;
        let u = strip_period_unitary(&d, 1, k2, FlatBand::Truncated, &StripControl::default()).unwrap();
        let n = 1 << 14;
        let dt = d.period() / n as f64;
        let mut w = Unitary2::identity();
        for s in 0..n {
            let t = (s as f64 + 0.5) * dt;
            let h = BlochVector::new(0.0, k2.sin(), -2.0 + k2.cos() + (4.0 * t).cos());
            w = step_exponential(h, dt).after(&w);
        }
        let w = w.matrix();
        let err = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (u[(r, c)] - w[(r, c)]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn alpha_flatness() {
        let alphas = [0.0, PI / 2.0, PI, 1.3];
        let c = StripControl::default();
        for d in [ex1(-2.0, 0.1), DriveProtocol::harmonic(-2.0, 4.0).unwrap()] {
            let dev = alpha_flatness_check(&d, 16, 0.4, &alphas, FlatBand::Truncated, &c).unwrap();
            assert!(dev < 1e-7, "{dev}");
        }
        let dev = alpha_flatness_check(&ex1(-2.0, 0.1), 1, 0.0, &alphas, FlatBand::Truncated, &c).unwrap();
        assert!(dev < 1e-12);
    }

    #[test]
    fn direct_alpha_start_has_the_same_spectrum() {
        let d = ex1(-2.0, 0.1);
        let sd = StripDrive::new(&d, 16, 0.4, FlatBand::Truncated).unwrap();
        let c = StripControl::default();
        let a = sorted_phases(&sd.period_unitary(0.0, &c).unwrap());
        let b = sorted_phases(&sd.period_unitary(2.0, &c).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!(circular_gap(*x, *y) < 1e-9);
        }
    }
}
