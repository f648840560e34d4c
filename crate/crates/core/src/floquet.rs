//! Time-ordered evolution of a single Bloch momentum, micro-motion unitaries
//! and the effective Hamiltonian `H_F(alpha)` for each initial drive phase.
//!
//! Eigenphase convention: an eigenvector with `U v = e^{-i phi} v` has eigenphase
//! `phi` in `(-pi, pi]` and quasienergy `phi / T`. No global phase is removed, so the
//! `-I` produced by the flat segment of the piecewise drive shifts every
//! quasienergy of that model by `pi / T`.

use std::f64::consts::PI;

use crate::bloch::{hamiltonian_at, BlochVector, DriveProtocol, Momentum2};
use crate::error::{Error, Result};
use crate::linalg::{
    axis_eigenvector, bloch_matrix, decompose_u2, fix_gauge, frobenius, principal_angle, unitarity_residual2, Mat2,
    Vec2, I,
};
use num_complex::Complex64 as C64;

/// Distance from the log branch cut (and minimum band splitting) accepted when
/// taking the matrix logarithm.
pub const BRANCH_TOLERANCE: f64 = 1e-6;

/// Adaptive stepping settings for smooth drives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub initial_steps: usize,
    /// Convergence target on the Frobenius change of the propagator between doublings.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            initial_steps: 256,
            tolerance: 1e-9,
            max_steps: 1 << 22,
        }
    }
}

/// A 2x2 unitary with `||U^dag U - I||_F < 1e-10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(Mat2);

impl Unitary2 {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: Mat2) -> Result<Self> {
        let residual = unitarity_residual2(&m);
        if residual >= Self::TOLERANCE {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Unitary2(m))
    }

    #[allow(dead_code)]
    pub(crate) fn new_unchecked(m: Mat2) -> Self {
        Unitary2(m)
    }

    pub fn identity() -> Self {
        Unitary2(Mat2::identity())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Unitary2(self.0.adjoint())
    }

    /// `self * earlier`: evolve with `earlier` first.
    pub fn after(&self, earlier: &Unitary2) -> Self {
        Unitary2(self.0 * earlier.0)
    }

    /// `self * inner * self^dag`.
    pub fn conjugate(&self, inner: &Unitary2) -> Self {
        Unitary2(self.0 * inner.0 * self.0.adjoint())
    }

    pub fn residual(&self) -> f64 {
        unitarity_residual2(&self.0)
    }

    /// Both eigenphases in `(-pi, pi]`, ascending.
    pub fn eigenphases(&self) -> [f64; 2] {
        let d = decompose_u2(&self.0);
        let mut p = [
            principal_angle(-(d.phase - d.theta)),
            principal_angle(-(d.phase + d.theta)),
        ];
        p.sort_by(f64::total_cmp);
        p
    }
}

/// `exp(-i dt h . sigma) = cos(|h| dt) I - i sin(|h| dt) h_hat . sigma`.
pub fn step_exponential(h: BlochVector, dt: f64) -> Unitary2 {
    let norm = h.norm();
    if norm == 0.0 {
        return Unitary2::identity();
    }
    let angle = norm * dt;
    let generator = bloch_matrix(&(h * (1.0 / norm)));
    Unitary2(Mat2::identity() * C64::new(angle.cos(), 0.0) - generator * (I * angle.sin()))
}

/// One fourth-order Magnus step over `[t, t + dt]` using the two Gauss-Legendre nodes.
fn magnus_step(drive: &DriveProtocol, k: Momentum2, t: f64, dt: f64) -> Result<Mat2> {
    const OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
    let a1 = hamiltonian_at(drive, k, t + (0.5 - OFFSET) * dt)?;
    let a2 = hamiltonian_at(drive, k, t + (0.5 + OFFSET) * dt)?;
    // [-i a2.s, -i a1.s] = -2i (a2 x a1).s
    let g = (a1 + a2) * (0.5 * dt) + a2.cross(&a1) * (OFFSET * dt * dt);
    Ok(step_exponential(g, 1.0).0)
}

/// Fixed-step time-ordered product on `[t_start, t_end]`. Breakpoints of
/// piecewise drives are honoured, so constant segments are integrated exactly.
pub fn propagate_stepped(
    drive: &DriveProtocol,
    k: Momentum2,
    t_start: f64,
    t_end: f64,
    n_steps: usize,
) -> Result<Unitary2> {
    if t_start.is_nan() || t_end.is_nan() || t_end < t_start {
        return Err(Error::InvalidArgument(format!(
            "propagation interval [{t_start}, {t_end}] is reversed"
        )));
    }
    let span = t_end - t_start;
    if span == 0.0 {
        return Ok(Unitary2::identity());
    }
    let n_steps = n_steps.max(1);
    let mut cuts = vec![t_start];
    cuts.extend(drive.breakpoints(t_start, t_end));
    cuts.push(t_end);

    let mut u = Mat2::identity();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steps = ((n_steps as f64 * (b - a) / span).ceil() as usize).max(1);
        let dt = (b - a) / steps as f64;
        for s in 0..steps {
            u = magnus_step(drive, k, a + s as f64 * dt, dt)? * u;
        }
    }
    Ok(Unitary2(u))
}

/// Exact product of segment exponentials for drives that are constant between breakpoints.
fn propagate_segments(drive: &DriveProtocol, k: Momentum2, t_start: f64, t_end: f64) -> Result<Unitary2> {
    let mut cuts = vec![t_start];
    cuts.extend(drive.breakpoints(t_start, t_end));
    cuts.push(t_end);
    let mut u = Mat2::identity();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > a {
            let h = hamiltonian_at(drive, k, 0.5 * (a + b))?;
            u = step_exponential(h, b - a).0 * u;
        }
    }
    Ok(Unitary2(u))
}

/// Time-ordered evolution `U(t_end, t_start)`.
///
/// Piecewise-constant drives are multiplied out exactly. Smooth drives use
/// fourth-order Magnus steps, doubling `n_steps` until the propagator changes by
/// less than the tolerance of `control`.
pub fn propagate(drive: &DriveProtocol, k: Momentum2, t_start: f64, t_end: f64, n_steps: usize) -> Result<Unitary2> {
    let control = StepControl {
        initial_steps: n_steps.max(1),
        ..StepControl::default()
    };
    propagate_with(drive, k, t_start, t_end, &control)
}

pub fn propagate_with(
    drive: &DriveProtocol,
    k: Momentum2,
    t_start: f64,
    t_end: f64,
    control: &StepControl,
) -> Result<Unitary2> {
    if t_start.is_nan() || t_end.is_nan() || t_end < t_start {
        return Err(Error::InvalidArgument(format!(
            "propagation interval [{t_start}, {t_end}] is reversed"
        )));
    }
    if t_end == t_start {
        return Ok(Unitary2::identity());
    }
    if drive.is_piecewise_constant() {
        return propagate_segments(drive, k, t_start, t_end);
    }
    let mut n = control.initial_steps.max(1);
    let mut prev = propagate_stepped(drive, k, t_start, t_end, n)?;
    loop {
        if 2 * n > control.max_steps {
            let next = propagate_stepped(drive, k, t_start, t_end, n)?;
            return Err(Error::NonConvergence {
                steps: n,
                change: frobenius(&(next.0 - prev.0)),
            });
        }
        n *= 2;
        let next = propagate_stepped(drive, k, t_start, t_end, n)?;
        let change = frobenius(&(next.0 - prev.0));
        if change < control.tolerance {
            return Ok(next);
        }
        prev = next;
    }
}

/// `U(alpha2, alpha1)`: evolution from `alpha1/omega` to `alpha2/omega`, or the
/// adjoint of the forward evolution when `alpha2 < alpha1`.
pub fn micromotion_unitary(drive: &DriveProtocol, k: Momentum2, alpha1: f64, alpha2: f64) -> Result<Unitary2> {
    for a in [alpha1, alpha2] {
        if !(0.0..=2.0 * PI).contains(&a) {
            return Err(Error::InvalidArgument(format!("alpha = {a} outside [0, 2pi]")));
        }
    }
    let t1 = drive.time_of_alpha(alpha1);
    let t2 = drive.time_of_alpha(alpha2);
    if t2 >= t1 {
        propagate(drive, k, t1, t2, StepControl::default().initial_steps)
    } else {
        Ok(propagate(drive, k, t2, t1, StepControl::default().initial_steps)?.adjoint())
    }
}

/// One-period unitary starting at drive phase `alpha`.
pub fn period_unitary(drive: &DriveProtocol, k: Momentum2, alpha: f64) -> Result<Unitary2> {
    let t = drive.time_of_alpha(alpha);
    propagate(drive, k, t, t + drive.period(), StepControl::default().initial_steps)
}

/// Which Floquet band to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Eigenphase in `(-pi, 0)`; the smaller of the two principal eigenphases.
    Lower,
    Upper,
}

/// `H_F(alpha)` with its principal-branch spectral decomposition.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub matrix: Mat2,
    pub alpha: f64,
    pub period: f64,
    /// Ascending, in `(-pi/T, pi/T]`.
    pub quasienergies: [f64; 2],
    /// `(eigenphase, eigenvector)`, ascending in eigenphase.
    eigenpairs: [(f64, Vec2); 2],
}

impl EffectiveHamiltonian {
    /// `H_F = (i/T) log U` on the principal branch.
    pub fn from_period_unitary(u: &Unitary2, alpha: f64, period: f64) -> Result<Self> {
        let d = decompose_u2(u.matrix());
        let plus = (principal_angle(-(d.phase - d.theta)), axis_eigenvector(d.axis));
        let minus = (
            principal_angle(-(d.phase + d.theta)),
            axis_eigenvector([-d.axis[0], -d.axis[1], -d.axis[2]]),
        );
        for (phase, _) in [&plus, &minus] {
            if PI - phase.abs() < BRANCH_TOLERANCE {
                return Err(Error::BranchAmbiguity {
                    phase: *phase,
                    tol: BRANCH_TOLERANCE,
                });
            }
        }
        let eigenpairs = if plus.0 <= minus.0 {
            [plus, minus]
        } else {
            [minus, plus]
        };
        let mut matrix = Mat2::zeros();
        for (phase, v) in &eigenpairs {
            matrix += v * v.adjoint() * C64::new(phase / period, 0.0);
        }
        Ok(EffectiveHamiltonian {
            matrix,
            alpha,
            period,
            quasienergies: [eigenpairs[0].0 / period, eigenpairs[1].0 / period],
            eigenpairs,
        })
    }

    /// `exp(-i H_F T)`.
    pub fn period_unitary(&self) -> Unitary2 {
        let mut m = Mat2::zeros();
        for (phase, v) in &self.eigenpairs {
            m += v * v.adjoint() * C64::from_polar(1.0, -phase);
        }
        Unitary2(m)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        frobenius(&(self.matrix - self.matrix.adjoint()))
    }
}

/// `H_F(k, alpha)` from the one-period evolution starting at `alpha / omega`.
pub fn effective_hamiltonian(drive: &DriveProtocol, k: Momentum2, alpha: f64) -> Result<EffectiveHamiltonian> {
    let u = period_unitary(drive, k, alpha)?;
    EffectiveHamiltonian::from_period_unitary(&u, alpha, drive.period())
}

/// A gauge-fixed Floquet eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandState {
    pub eigenphase: f64,
    pub eigenvector: Vec2,
    pub quasienergy: f64,
}

impl BandState {
    /// `<v| sigma |v>`.
    pub fn pseudospin(&self) -> [f64; 3] {
        crate::linalg::pauli_expectation(&self.eigenvector)
    }
}

pub fn band_state(h: &EffectiveHamiltonian, branch: Branch) -> Result<BandState> {
    let [(p0, _), (p1, _)] = h.eigenpairs;
    if (p1 - p0) < BRANCH_TOLERANCE {
        return Err(Error::GapClosing(format!(
            "Floquet bands degenerate at eigenphase {p0:.6} (alpha = {:.6})",
            h.alpha
        )));
    }
    let (phase, v) = match branch {
        Branch::Lower => h.eigenpairs[0],
        Branch::Upper => h.eigenpairs[1],
    };
    Ok(BandState {
        eigenphase: phase,
        eigenvector: fix_gauge(&v),
        quasienergy: phase / h.period,
    })
}

/// Evolution operators `U(t_l, 0)` at `t_l = l T / n_alpha` for `l = 0..=n_alpha`.
///
/// Piecewise drives are exact per chunk; smooth drives use Magnus steps with the
/// per-chunk count doubled until the whole series moves by less than the tolerance.
pub fn micromotion_series(
    drive: &DriveProtocol,
    k: Momentum2,
    n_alpha: usize,
    control: &StepControl,
) -> Result<Vec<Unitary2>> {
    let period = drive.period();
    let chunk = |l: usize| period * l as f64 / n_alpha as f64;
    let build = |steps_per_chunk: usize| -> Result<Vec<Unitary2>> {
        let mut out = Vec::with_capacity(n_alpha + 1);
        let mut acc = Unitary2::identity();
        out.push(acc);
        for l in 0..n_alpha {
            let piece = if drive.is_piecewise_constant() {
                propagate_segments(drive, k, chunk(l), chunk(l + 1))?
            } else {
                propagate_stepped(drive, k, chunk(l), chunk(l + 1), steps_per_chunk)?
            };
            acc = piece.after(&acc);
            out.push(acc);
        }
        Ok(out)
    };
    if drive.is_piecewise_constant() {
        return build(1);
    }
    let mut steps = control.initial_steps.div_ceil(n_alpha).max(1);
    let mut prev = build(steps)?;
    loop {
        if 2 * steps * n_alpha > control.max_steps {
            return Err(Error::NonConvergence {
                steps: steps * n_alpha,
                change: f64::NAN,
            });
        }
        steps *= 2;
        let next = build(steps)?;
        let change = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| frobenius(&(a.0 - b.0)))
            .fold(0.0, f64::max);
        if change < control.tolerance {
            return Ok(next);
        }
        prev = next;
    }
}
