//! Pseudo-spin fields on the periodic `(k1, k2, alpha)` grid and their currents.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::bloch::{DriveProtocol, Momentum2};
use crate::error::{Error, Result};
use crate::floquet::{band_state, micromotion_series, Branch, EffectiveHamiltonian, StepControl};
use crate::linalg::pauli_expectation;

pub type Vec3 = [f64; 3];

pub const MIN_GRID: usize = 8;
pub const UNIT_TOLERANCE: f64 = 1e-10;

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Node layout shared by every grid: index `(i * n2 + j) * n3 + l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims(pub [usize; 3]);

impl Dims {
    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.0[1] + j) * self.0[2] + l
    }

    /// Index of the node `idx` shifted by `step` along `axis`, wrapping periodically.
    #[inline]
    pub fn shifted(&self, idx: [usize; 3], axis: usize, step: isize) -> usize {
        let mut p = idx;
        let n = self.0[axis] as isize;
        p[axis] = (p[axis] as isize + step).rem_euclid(n) as usize;
        self.index(p[0], p[1], p[2])
    }

    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let l = flat % self.0[2];
        let j = (flat / self.0[2]) % self.0[1];
        let i = flat / (self.0[1] * self.0[2]);
        [i, j, l]
    }

    pub fn spacing(&self) -> Vec3 {
        [TAU / self.0[0] as f64, TAU / self.0[1] as f64, TAU / self.0[2] as f64]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }
}

/// Unit vectors `n(k1, k2, alpha)` at the nodes of a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSpinGrid {
    dims: Dims,
    data: Vec<Vec3>,
}

impl PseudoSpinGrid {
    pub fn new(dims: [usize; 3], data: Vec<Vec3>) -> Result<Self> {
        let dims = Dims(dims);
        if dims.0.iter().any(|&n| n < MIN_GRID) {
            return Err(Error::InvalidArgument(format!(
                "grid counts {:?} must all be at least {MIN_GRID}",
                dims.0
            )));
        }
        if data.len() != dims.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors for a {:?} grid",
                data.len(),
                dims.0
            )));
        }
        if let Some((at, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| (dot(**v, **v).sqrt() - 1.0).abs() > UNIT_TOLERANCE)
        {
            return Err(Error::InvalidArgument(format!(
                "vector {v:?} at node {:?} is not unit length",
                dims.coords(at)
            )));
        }
        Ok(PseudoSpinGrid { dims, data })
    }

    /// Samples `f(k1, k2, k3)` at `k_a = 2 pi i_a / N_a`, normalizing each value.
    pub fn from_fn(dims: [usize; 3], f: impl Fn(f64, f64, f64) -> Vec3 + Sync) -> Result<Self> {
        let d = Dims(dims);
        let h = d.spacing();
        let data = (0..d.len())
            .into_par_iter()
            .map(|flat| {
                let [i, j, l] = d.coords(flat);
                let v = f(i as f64 * h[0], j as f64 * h[1], l as f64 * h[2]);
                let n = dot(v, v).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            })
            .collect();
        Self::new(dims, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims.0
    }

    pub(crate) fn layout(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[Vec3] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> Vec3 {
        let d = self.dims.0;
        self.data[self.dims.index(i % d[0], j % d[1], l % d[2])]
    }

    pub fn max_unit_deviation(&self) -> f64 {
        self.data
            .iter()
            .map(|v| (dot(*v, *v).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest angle between axis neighbours.
    pub fn max_neighbor_angle(&self) -> f64 {
        let d = self.dims;
        (0..d.len())
            .into_par_iter()
            .map(|flat| {
                let c = d.coords(flat);
                (0..3)
                    .map(|axis| {
                        let c = dot(self.data[flat], self.data[d.shifted(c, axis, 1)]);
                        c.clamp(-1.0, 1.0).acos()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Fails unless every neighbour pair is closer than a right angle.
    pub fn check_resolution(&self) -> Result<()> {
        let worst = self.max_neighbor_angle();
        if worst >= 0.5 * PI {
            return Err(Error::Resolution(format!(
                "neighbouring pseudo-spins differ by {worst:.3} rad on a {:?} grid",
                self.dims.0
            )));
        }
        Ok(())
    }
}

/// A real 3-vector per node of a periodic grid.
///
/// The current is stored on faces (component `mu` belongs to the face normal to `mu`
/// whose lower corner is the node) and the gauge field on edges (component `mu`
/// belongs to the edge leaving the node along `mu`).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldGrid {
    dims: Dims,
    data: Vec<Vec3>,
}

impl VectorFieldGrid {
    pub fn new(dims: [usize; 3], data: Vec<Vec3>) -> Result<Self> {
        let dims = Dims(dims);
        if data.len() != dims.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors for a {:?} grid",
                data.len(),
                dims.0
            )));
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vector field entry".into()));
        }
        Ok(VectorFieldGrid { dims, data })
    }

    pub fn zeros(dims: [usize; 3]) -> Self {
        let dims = Dims(dims);
        VectorFieldGrid {
            dims,
            data: vec![[0.0; 3]; dims.len()],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims.0
    }

    pub(crate) fn layout(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[Vec3] {
        &self.data
    }

    pub fn component(&self, axis: usize) -> Vec<f64> {
        self.data.iter().map(|v| v[axis]).collect()
    }

    pub(crate) fn from_components(dims: [usize; 3], c: [Vec<f64>; 3]) -> Self {
        let data = (0..c[0].len()).map(|n| [c[0][n], c[1][n], c[2][n]]).collect();
        VectorFieldGrid { dims: Dims(dims), data }
    }

    /// Root-sum-square over all nodes and components.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| dot(*v, *v)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &VectorFieldGrid) -> VectorFieldGrid {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| sub(*a, *b)).collect();
        VectorFieldGrid { dims: self.dims, data }
    }
}

/// Band pseudo-spin of `H_F(k1, k2, alpha)` on an `n1 x n2 x n3` grid.
///
/// One micro-motion series per `(k1, k2)` column: the eigenvector at `alpha_l` is the
/// `alpha = 0` eigenvector carried forward by `U(t_l, 0)`.
pub fn pseudospin_grid(
    drive: &DriveProtocol,
    n1: usize,
    n2: usize,
    n3: usize,
    branch: Branch,
) -> Result<PseudoSpinGrid> {
    pseudospin_grid_with(drive, [n1, n2, n3], branch, &StepControl::default())
}

pub fn pseudospin_grid_with(
    drive: &DriveProtocol,
    dims: [usize; 3],
    branch: Branch,
    control: &StepControl,
) -> Result<PseudoSpinGrid> {
    let [n1, n2, n3] = dims;
    if dims.iter().any(|&n| n < MIN_GRID) {
        return Err(Error::InvalidArgument(format!(
            "grid counts {dims:?} must all be at least {MIN_GRID}"
        )));
    }
    let period = drive.period();
    let columns: Vec<Vec<Vec3>> = (0..n1 * n2)
        .into_par_iter()
        .map(|col| -> Result<Vec<Vec3>> {
            let (i, j) = (col / n2, col % n2);
            let k = Momentum2::on_grid(i, j, n1, n2);
            let series = micromotion_series(drive, k, n3, control)?;
            let hf = EffectiveHamiltonian::from_period_unitary(&series[n3], 0.0, period);
            let state = hf.and_then(|h| band_state(&h, branch)).map_err(|e| match e {
                Error::GapClosing(msg) | Error::Resolution(msg) => {
                    Error::GapClosing(format!("{msg} at node ({i}, {j}), k = ({:.6}, {:.6})", k.k1, k.k2))
                }
                Error::BranchAmbiguity { phase, .. } => Error::GapClosing(format!(
                    "eigenphase {phase:.6} on the branch cut at node ({i}, {j}), k = ({:.6}, {:.6})",
                    k.k1, k.k2
                )),
                other => other,
            })?;
            Ok(series[..n3]
                .iter()
                .map(|w| pauli_expectation(&(w.matrix() * state.eigenvector)))
                .collect())
        })
        .collect::<Result<_>>()?;
    PseudoSpinGrid::new(dims, columns.into_iter().flatten().collect())
}

/// Solid angle of the spherical triangle `(a, b, c)`, signed by orientation.
#[inline]
pub fn solid_angle(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    2.0 * dot(a, cross(b, c)).atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
}

/// Skyrmion density `j^mu = (1/4pi) n . (d_nu n x d_lambda n)` as plaquette fluxes.
///
/// Entry `mu` at node `x` is the solid angle swept by `n` around the face normal to
/// `mu` with lower corner `x`, over `4 pi` times the face area. Fluxes through
/// closed surfaces are therefore integers (zero on a resolved grid) to rounding.
pub fn current_field(n: &PseudoSpinGrid) -> VectorFieldGrid {
    let d = n.layout();
    let h = d.spacing();
    let data = (0..d.len())
        .into_par_iter()
        .map(|flat| {
            let c = d.coords(flat);
            std::array::from_fn(|mu| {
                let (nu, la) = ((mu + 1) % 3, (mu + 2) % 3);
                let p00 = n.data[flat];
                let p10 = n.data[d.shifted(c, nu, 1)];
                let mut c11 = c;
                c11[nu] = (c11[nu] + 1) % d.0[nu];
                let p11 = n.data[d.shifted(c11, la, 1)];
                let p01 = n.data[d.shifted(c, la, 1)];
                let omega = solid_angle(p00, p10, p11) + solid_angle(p00, p11, p01);
                omega / (4.0 * PI * h[nu] * h[la])
            })
        })
        .collect();
    VectorFieldGrid { dims: d, data }
}

/// Net flux of `j_mu` through planes normal to each axis, averaged over the planes.
pub fn slice_fluxes(j: &VectorFieldGrid) -> Vec3 {
    let d = j.layout();
    let h = d.spacing();
    std::array::from_fn(|axis| {
        let area = h[(axis + 1) % 3] * h[(axis + 2) % 3];
        let total: f64 = j.data.iter().map(|v| v[axis]).sum();
        total * area / d.0[axis] as f64
    })
}

/// Slice Chern numbers: the rounded [`slice_fluxes`].
pub fn chern_slices(j: &VectorFieldGrid) -> [i64; 3] {
    slice_fluxes(j).map(|f| f.round() as i64)
}

#[inline]
fn forward(f: &VectorFieldGrid, c: [usize; 3], comp: usize, axis: usize, h: f64) -> f64 {
    let d = f.dims;
    (f.data[d.shifted(c, axis, 1)][comp] - f.data[d.index(c[0], c[1], c[2])][comp]) / h
}

/// Forward-difference divergence of a face field, one value per cell.
pub fn divergence(f: &VectorFieldGrid) -> Vec<f64> {
    let d = f.layout();
    let h = d.spacing();
    (0..d.len())
        .map(|flat| {
            let c = d.coords(flat);
            (0..3).map(|a| forward(f, c, a, a, h[a])).sum()
        })
        .collect()
}

/// Backward-difference divergence of an edge field, one value per node.
pub fn edge_divergence(f: &VectorFieldGrid) -> Vec<f64> {
    let d = f.layout();
    let h = d.spacing();
    (0..d.len())
        .map(|flat| {
            let c = d.coords(flat);
            (0..3)
                .map(|a| (f.data[flat][a] - f.data[d.shifted(c, a, -1)][a]) / h[a])
                .sum()
        })
        .collect()
}

/// Forward-difference curl taking an edge field to a face field.
pub fn curl(f: &VectorFieldGrid) -> VectorFieldGrid {
    let d = f.layout();
    let h = d.spacing();
    let data = (0..d.len())
        .map(|flat| {
            let c = d.coords(flat);
            std::array::from_fn(|mu| {
                let (nu, la) = ((mu + 1) % 3, (mu + 2) % 3);
                forward(f, c, la, nu, h[nu]) - forward(f, c, nu, la, h[la])
            })
        })
        .collect();
    VectorFieldGrid { dims: d, data }
}
