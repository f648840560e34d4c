//! Preimage curves `n^{-1}(p)` traced through a tetrahedral subdivision of the grid.
//!
//! Each cube is cut into the six Freudenthal tetrahedra sharing its main diagonal.
//! On a tetrahedron the field projected onto the tangent plane at `p` is linear, so
//! its zero set is a straight segment joining two crossed triangles. Triangles are
//! shared between neighbouring tetrahedra, which chains segments into closed loops.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use super::grid::{cross, dot, PseudoSpinGrid, Vec3};
use crate::error::{Error, Result};

/// Pole of the target sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    North,
    South,
    /// Any other unit vector; used for pole-independence checks.
    Direction(Vec3),
}

impl Pole {
    pub fn vector(self) -> Vec3 {
        match self {
            Pole::North => [0.0, 0.0, 1.0],
            Pole::South => [0.0, 0.0, -1.0],
            Pole::Direction(v) => {
                let n = dot(v, v).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            }
        }
    }

    pub fn antipode(self) -> Pole {
        match self {
            Pole::North => Pole::South,
            Pole::South => Pole::North,
            Pole::Direction(v) => Pole::Direction([-v[0], -v[1], -v[2]]),
        }
    }
}

/// A closed oriented polyline on the 3-torus.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageCurve {
    /// Points in `[0, 2pi)^3`; the closing segment back to the first point is implicit.
    pub points: Vec<Vec3>,
    pub closed: bool,
    /// Net wraps around each torus direction.
    pub winding: [i64; 3],
    /// Largest grid spacing of the field the curve was traced from.
    pub spacing: f64,
}

impl PreimageCurve {
    /// A closed curve from points given in any lift; they are wrapped into the box.
    pub fn from_lift(lift: &[Vec3], spacing: f64) -> Self {
        let first = lift[0];
        let last = lift[lift.len() - 1];
        let back: Vec3 = std::array::from_fn(|a| last[a] + minimal_image(first[a] - last[a]));
        let winding = std::array::from_fn(|a| ((back[a] - first[a]) / TAU).round() as i64);
        let repeats_first = lift.len() > 1 && (0..3).all(|a| (back[a] - last[a]).abs() < 1e-12);
        let points = &lift[..lift.len() - usize::from(repeats_first)];
        PreimageCurve {
            points: points.iter().map(|p| p.map(|x| x.rem_euclid(TAU))).collect(),
            closed: true,
            winding,
            spacing,
        }
    }

    pub fn is_contractible(&self) -> bool {
        self.winding == [0; 3]
    }

    /// Points unwrapped into a continuous lift starting in the box; for a contractible
    /// curve the closing point equals the first.
    pub fn lift(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.points.len() + 1);
        let mut prev = self.points[0];
        out.push(prev);
        for p in self.points.iter().skip(1).chain(std::iter::once(&self.points[0])) {
            let q = std::array::from_fn(|a| prev[a] + minimal_image(p[a] - prev[a]));
            out.push(q);
            prev = q;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[inline]
fn minimal_image(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

/// Angle between the requested pole and the level actually traced, which keeps the
/// zero set away from grid nodes where the field hits a pole exactly.
pub const TARGET_TILT: f64 = 1e-7;

/// Cells whose eight corners all lie within this angle of the target are degenerate.
const DEGENERATE_ANGLE: f64 = 1e-6;

/// Orthonormal `(e1, e2)` with `e1 x e2 = p`.
fn tangent_frame(p: Vec3) -> (Vec3, Vec3) {
    let seed = if p[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let s = dot(seed, p);
    let mut e1 = [seed[0] - s * p[0], seed[1] - s * p[1], seed[2] - s * p[2]];
    let n = dot(e1, e1).sqrt();
    e1 = e1.map(|x| x / n);
    (e1, cross(p, e1))
}

fn tilted(p: Vec3) -> Vec3 {
    let (e1, e2) = tangent_frame(p);
    let (a, b) = (0.6 * TARGET_TILT, 0.8 * TARGET_TILT);
    let v = std::array::from_fn(|k| p[k] + a * e1[k] + b * e2[k]);
    let n = dot(v, v).sqrt();
    v.map(|x| x / n)
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

struct Crossing {
    /// Continuous position in index units, relative to the tetrahedron's frame.
    pos: Vec3,
    side: f64,
}

/// Crossing of the zero set with triangle `(a, b, c)`; vertices must be in a fixed order.
fn triangle_crossing(f: [[f64; 2]; 3], s: [f64; 3], x: [Vec3; 3]) -> Option<Crossing> {
    let c = |u: [f64; 2], v: [f64; 2]| u[0] * v[1] - u[1] * v[0];
    let l = [c(f[1], f[2]), c(f[2], f[0]), c(f[0], f[1])];
    let total = l[0] + l[1] + l[2];
    if total == 0.0 {
        return None;
    }
    let l = l.map(|v| v / total);
    if l.iter().any(|&v| v <= 0.0) {
        return None;
    }
    Some(Crossing {
        pos: std::array::from_fn(|k| l[0] * x[0][k] + l[1] * x[1][k] + l[2] * x[2][k]),
        side: l[0] * s[0] + l[1] * s[1] + l[2] * s[2],
    })
}

/// Closed preimage curves of `pole`, oriented along `grad F1 x grad F2` where
/// `F = (n . e1, n . e2)` in a frame with `e1 x e2 = pole`.
pub fn preimage_curves(n: &PseudoSpinGrid, pole: Pole) -> Result<Vec<PreimageCurve>> {
    n.check_resolution()?;
    let d = n.layout();
    let p = pole.vector();
    let target = tilted(p);
    let (e1, e2) = tangent_frame(target);
    let proj: Vec<[f64; 2]> = n.data().iter().map(|v| [dot(*v, e1), dot(*v, e2)]).collect();
    let side: Vec<f64> = n.data().iter().map(|v| dot(*v, target)).collect();
    let near = DEGENERATE_ANGLE.cos();
    let close_to_pole: Vec<bool> = n.data().iter().map(|v| dot(*v, p) > near).collect();

    // face key -> crossing position in index units (wrapped) ; successor links
    let mut faces: HashMap<[usize; 3], Vec3> = HashMap::new();
    let mut next: HashMap<[usize; 3], [usize; 3]> = HashMap::new();
    let mut incoming: HashMap<[usize; 3], usize> = HashMap::new();

    for flat in 0..d.len() {
        let c = d.coords(flat);
        let corner = |off: [usize; 3]| {
            d.index(
                (c[0] + off[0]) % d.0[0],
                (c[1] + off[1]) % d.0[1],
                (c[2] + off[2]) % d.0[2],
            )
        };
        if (0..8).all(|b| close_to_pole[corner([b & 1, (b >> 1) & 1, (b >> 2) & 1])]) {
            return Err(Error::Resolution(format!(
                "degenerate preimage: cell {c:?} lies entirely at the target pole"
            )));
        }
        for perm in PERMUTATIONS {
            let mut offs = [[0usize; 3]; 4];
            for k in 0..3 {
                offs[k + 1] = offs[k];
                offs[k + 1][perm[k]] = 1;
            }
            let ids = offs.map(corner);
            if ids.iter().all(|&id| side[id] < 0.0) {
                continue;
            }
            let f4 = ids.map(|id| proj[id]);
            if f4.iter().all(|v| v[0] > 0.0)
                || f4.iter().all(|v| v[0] < 0.0)
                || f4.iter().all(|v| v[1] > 0.0)
                || f4.iter().all(|v| v[1] < 0.0)
            {
                continue;
            }
            let pos = offs.map(|o| std::array::from_fn::<f64, 3, _>(|k| (c[k] + o[k]) as f64));
            let mut hits: Vec<([usize; 3], Crossing)> = Vec::with_capacity(2);
            for skip in 0..4 {
                let mut tri: Vec<usize> = (0..4).filter(|&v| v != skip).collect();
                tri.sort_by_key(|&v| ids[v]);
                let key = [ids[tri[0]], ids[tri[1]], ids[tri[2]]];
                let cr = triangle_crossing(
                    [proj[key[0]], proj[key[1]], proj[key[2]]],
                    [side[key[0]], side[key[1]], side[key[2]]],
                    [pos[tri[0]], pos[tri[1]], pos[tri[2]]],
                );
                if let Some(cr) = cr {
                    hits.push((key, cr));
                }
            }
            match hits.len() {
                0 => continue,
                2 => {}
                _ => return Err(Error::OpenCurve { cell: c }),
            }
            let kept = hits.iter().filter(|(_, h)| h.side > 0.0).count();
            match kept {
                0 => continue,
                2 => {}
                _ => {
                    return Err(Error::Resolution(format!(
                        "preimages of a pole and its antipode meet inside cell {c:?}"
                    )))
                }
            }
            // orientation from the linear interpolant on this tetrahedron
            let mut g1 = [0.0; 3];
            let mut g2 = [0.0; 3];
            for k in 0..3 {
                g1[perm[k]] = f4[k + 1][0] - f4[k][0];
                g2[perm[k]] = f4[k + 1][1] - f4[k][1];
            }
            let t = cross(g1, g2);
            let (a, b) = (&hits[0], &hits[1]);
            let dir: Vec3 = std::array::from_fn(|k| b.1.pos[k] - a.1.pos[k]);
            let (from, to) = if dot(dir, t) >= 0.0 { (a, b) } else { (b, a) };
            for (key, cr) in [from, to] {
                faces
                    .entry(*key)
                    .or_insert_with(|| std::array::from_fn(|k| cr.pos[k].rem_euclid(d.0[k] as f64)));
            }
            if next.insert(from.0, to.0).is_some() {
                return Err(Error::OpenCurve { cell: c });
            }
            *incoming.entry(to.0).or_insert(0) += 1;
        }
    }

    let h = d.spacing();
    let spacing = h.iter().cloned().fold(0.0, f64::max);
    let mut keys: Vec<[usize; 3]> = next.keys().copied().collect();
    keys.sort_unstable();
    for key in &keys {
        if incoming.get(key) != Some(&1) {
            return Err(Error::OpenCurve { cell: d.coords(key[0]) });
        }
    }
    let mut visited: HashMap<[usize; 3], bool> = HashMap::with_capacity(keys.len());
    let mut curves = Vec::new();
    for start in keys {
        if visited.contains_key(&start) {
            continue;
        }
        let mut lift: Vec<Vec3> = Vec::new();
        let mut key = start;
        let mut prev: Option<Vec3> = None;
        loop {
            visited.insert(key, true);
            let w = faces[&key];
            let k: Vec3 = std::array::from_fn(|a| w[a] * h[a]);
            let q = match prev {
                None => k,
                Some(pp) => std::array::from_fn(|a| pp[a] + minimal_image(k[a] - pp[a])),
            };
            lift.push(q);
            prev = Some(q);
            key = match next.get(&key) {
                Some(k) => *k,
                None => return Err(Error::OpenCurve { cell: d.coords(key[0]) }),
            };
            if key == start {
                break;
            }
            if visited.contains_key(&key) {
                return Err(Error::OpenCurve { cell: d.coords(key[0]) });
            }
        }
        // close the lift to measure the winding
        let first = lift[0];
        let last = *lift.last().unwrap();
        let back: Vec3 = std::array::from_fn(|a| last[a] + minimal_image(first[a] - last[a]));
        let winding = std::array::from_fn(|a| ((back[a] - first[a]) / TAU).round() as i64);
        curves.push(PreimageCurve {
            points: lift.iter().map(|p| p.map(|x| x.rem_euclid(TAU))).collect(),
            closed: true,
            winding,
            spacing,
        });
    }
    Ok(curves)
}

/// `curve,point,k1,k2,alpha` rows, one per point.
pub fn curves_csv(curves: &[PreimageCurve]) -> String {
    let mut s = String::from("curve,point,k1,k2,alpha\n");
    for (c, curve) in curves.iter().enumerate() {
        for (i, p) in curve.points.iter().enumerate() {
            let _ = writeln!(s, "{c},{i},{:.16e},{:.16e},{:.16e}", p[0], p[1], p[2]);
        }
    }
    s
}
