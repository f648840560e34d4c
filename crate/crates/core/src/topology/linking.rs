//! Gauss linking numbers of closed polylines on the 3-torus.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::grid::{cross, dot, sub, Vec3};
use super::preimage::PreimageCurve;
use crate::error::{Error, Result};

/// Linking number with the raw double sum it was rounded from.
///
/// Sign convention: `value = -round(gauss)`, the negative of the standard Gauss
/// integral of the two oriented curves. With preimages oriented as in
/// [`preimage_curves`](super::preimage_curves) this equals the Hopf integral
/// `-sum j . A`, so a degree-one texture gives `+1` from both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linking {
    pub value: i64,
    pub raw: f64,
}

impl Linking {
    pub fn residual(&self) -> f64 {
        (self.raw - self.value as f64).abs()
    }

    fn from_gauss(gauss: f64) -> Self {
        let raw = -gauss;
        Linking {
            value: raw.round() as i64,
            raw,
        }
    }
}

/// Minimum separation, in grid spacings, below which two curves count as touching.
pub const MIN_SEPARATION: f64 = 2.0;

/// Periods of a noncontractible curve unrolled on each side of the region it links.
const UNROLL: i64 = 16;

/// Exact Gauss integral of segment `p1 -> p2` against `p3 -> p4`, in units of `4 pi`.
///
/// Signed solid angle of the quadrilateral `p3 - p1, p4 - p1, p4 - p2, p3 - p2`.
pub fn segment_linking(p1: Vec3, p2: Vec3, p3: Vec3, p4: Vec3) -> f64 {
    let r13 = sub(p3, p1);
    let r14 = sub(p4, p1);
    let r23 = sub(p3, p2);
    let r24 = sub(p4, p2);
    let unit = |v: Vec3| {
        let n = dot(v, v).sqrt();
        if n == 0.0 {
            [0.0; 3]
        } else {
            v.map(|x| x / n)
        }
    };
    let n1 = unit(cross(r13, r14));
    let n2 = unit(cross(r14, r24));
    let n3 = unit(cross(r24, r23));
    let n4 = unit(cross(r23, r13));
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(dot(n1, n2)) + asin(dot(n2, n3)) + asin(dot(n3, n4)) + asin(dot(n4, n1));
    let sign = dot(cross(sub(p4, p3), sub(p2, p1)), r13);
    if sign == 0.0 {
        return 0.0;
    }
    omega.copysign(sign) / (4.0 * PI)
}

/// Standard Gauss double sum `(1/4pi) sum (r1 - r2) . (dr1 x dr2) / |r1 - r2|^3`
/// of two polylines in R^3, evaluated exactly per segment pair.
pub fn gauss_sum(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.par_windows(2)
        .map(|s| {
            b.windows(2)
                .map(|t| segment_linking(s[0], s[1], t[0], t[1]))
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    lo: Vec3,
    hi: Vec3,
}

impl Bounds {
    fn of(points: &[Vec3]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Bounds { lo, hi }
    }

    fn shifted(&self, by: Vec3) -> Self {
        Bounds {
            lo: std::array::from_fn(|k| self.lo[k] + by[k]),
            hi: std::array::from_fn(|k| self.hi[k] + by[k]),
        }
    }

    fn near(&self, other: &Bounds, margin: f64) -> bool {
        (0..3).all(|k| self.lo[k] - margin <= other.hi[k] && other.lo[k] - margin <= self.hi[k])
    }

    fn extent(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).fold(0.0, f64::max)
    }
}

fn translate(points: &[Vec3], by: Vec3) -> Vec<Vec3> {
    points.iter().map(|p| std::array::from_fn(|k| p[k] + by[k])).collect()
}

fn min_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.par_iter()
        .map(|p| {
            b.iter()
                .map(|q| {
                    let d = sub(*p, *q);
                    dot(d, d)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
        .sqrt()
}

fn lattice(g: [i64; 3]) -> Vec3 {
    g.map(|x| TAU * x as f64)
}

fn box_range(r: i64) -> impl Iterator<Item = [i64; 3]> {
    (-r..=r).flat_map(move |a| (-r..=r).flat_map(move |b| (-r..=r).map(move |c| [a, b, c])))
}

/// A closed path in R^3 projecting to a null-homologous chain on the torus.
struct ClosedLift {
    path: Vec<Vec3>,
    /// Points of the original curves, for the separation check.
    curve_points: Vec<Vec3>,
    spacing: f64,
}

impl ClosedLift {
    fn of(c: &PreimageCurve) -> Option<Self> {
        if !c.is_contractible() {
            return None;
        }
        let path = c.lift();
        Some(ClosedLift {
            curve_points: path.clone(),
            path,
            spacing: c.spacing,
        })
    }

    /// Joins curves whose windings sum to zero into one closed lift. Each extra
    /// component hangs off the first on a bridge walked out and back, so the bridges
    /// cancel as chains on the torus.
    fn merged(curves: &[PreimageCurve]) -> Option<Self> {
        let total = curves
            .iter()
            .fold([0i64; 3], |acc, c| std::array::from_fn(|k| acc[k] + c.winding[k]));
        if curves.is_empty() || total != [0; 3] {
            return None;
        }
        let lifts: Vec<Vec<Vec3>> = curves.iter().map(PreimageCurve::lift).collect();
        let base = lifts[0][0];
        let mut path = lifts[0].clone();
        let mut curve_points = lifts[0].clone();
        let mut offset = sub(*path.last().unwrap(), base);
        for lift in &lifts[1..] {
            let start = lift[0];
            // nearest image of this component's start to the base point
            let near: Vec3 = std::array::from_fn(|k| {
                let d = start[k] - base[k];
                start[k] - TAU * (d / TAU).round()
            });
            let shift: Vec3 = std::array::from_fn(|k| near[k] - start[k] + offset[k]);
            let moved = translate(lift, shift);
            curve_points.extend_from_slice(&moved);
            path.extend_from_slice(&moved);
            let end = *moved.last().unwrap();
            let step = sub(end, moved[0]);
            offset = std::array::from_fn(|k| offset[k] + step[k]);
            // walk the bridge back, displaced by this component's winding
            path.push(std::array::from_fn(|k| base[k] + offset[k]));
        }
        let spacing = curves.iter().map(|c| c.spacing).fold(0.0, f64::max);
        Some(ClosedLift {
            path,
            curve_points,
            spacing,
        })
    }
}

/// Standard Gauss sum of a closed lift against every lift of `c2` that can meet it,
/// and the closest approach of the underlying curves.
fn gauss_against(a: &ClosedLift, c2: &PreimageCurve) -> (f64, f64) {
    let limit = MIN_SEPARATION * a.spacing.max(c2.spacing);
    let ba = Bounds::of(&a.path);
    let b = c2.lift();
    let bb = Bounds::of(&b);
    let reach = 2 + ((ba.extent() + bb.extent()) / TAU).ceil() as i64;
    let mut raw = 0.0;
    let mut closest = f64::INFINITY;
    if c2.is_contractible() {
        for g in box_range(reach) {
            let shift = lattice(g);
            if !ba.near(&bb.shifted(shift), limit) {
                continue;
            }
            let moved = translate(&b, shift);
            closest = closest.min(min_distance(&a.curve_points, &moved));
            raw += gauss_sum(&a.path, &moved);
        }
        return (raw, closest);
    }
    let w = c2.winding;
    let period = lattice(w);
    let pivot = (0..3).max_by_key(|&k| w[k].abs()).unwrap();
    let classes: BTreeSet<[i64; 3]> = box_range(reach)
        .map(|g| {
            let m = g[pivot].div_euclid(w[pivot]);
            std::array::from_fn(|k| g[k] - m * w[k])
        })
        .collect();
    let span = reach + 2 * (ba.extent() / TAU).ceil() as i64 + 2;
    let body = &b[..b.len() - 1];
    for g in classes {
        let shift = lattice(g);
        let at = |m: i64| -> Vec3 { std::array::from_fn(|k| shift[k] + m as f64 * period[k]) };
        let hits: Vec<i64> = (-span..=span).filter(|&m| ba.near(&bb.shifted(at(m)), limit)).collect();
        let (Some(&lo), Some(&hi)) = (hits.first(), hits.last()) else {
            continue;
        };
        let mut open: Vec<Vec3> = Vec::with_capacity(body.len() * (hi - lo + 2 * UNROLL + 1) as usize + 1);
        for m in (lo - UNROLL)..=(hi + UNROLL) {
            open.extend(translate(body, at(m)));
        }
        let end = at(hi + UNROLL);
        open.push(std::array::from_fn(|k| b[b.len() - 1][k] + end[k]));
        for m in lo..=hi {
            closest = closest.min(min_distance(&a.curve_points, &translate(&b, at(m))));
        }
        raw += gauss_sum(&a.path, &open);
    }
    (raw, closest)
}

fn checked(raw: f64, closest: f64, limit: f64) -> Result<Linking> {
    if closest <= limit {
        return Err(Error::CurvesTooClose {
            distance: closest,
            limit,
        });
    }
    Ok(Linking::from_gauss(raw))
}

/// Linking number of two closed, null-homologous curves on the 3-torus, summed over
/// the lifts of the second curve that can meet a fixed lift of the first.
pub fn linking_number(c1: &PreimageCurve, c2: &PreimageCurve) -> Result<Linking> {
    for c in [c1, c2] {
        if !c.closed || c.is_empty() {
            return Err(Error::InvalidArgument("linking needs non-empty closed curves".into()));
        }
        if !c.is_contractible() {
            return Err(Error::NonContractibleCurve { winding: c.winding });
        }
    }
    linking_with_lift(c1, c2)
}

/// Like [`linking_number`] but the second curve may wind around the torus; it is
/// then unrolled into a long open lift, truncated far from the first curve.
pub fn linking_with_lift(c1: &PreimageCurve, c2: &PreimageCurve) -> Result<Linking> {
    let a = ClosedLift::of(c1).ok_or(Error::NonContractibleCurve { winding: c1.winding })?;
    let (raw, closest) = gauss_against(&a, c2);
    checked(raw, closest, MIN_SEPARATION * c1.spacing.max(c2.spacing))
}

/// Total linking of two families of curves, for instance all preimages of two poles.
///
/// One family must be a null-homologous chain: either every curve in it is
/// contractible, or its windings sum to zero.
pub fn family_linking(first: &[PreimageCurve], second: &[PreimageCurve]) -> Result<Linking> {
    if first.is_empty() || second.is_empty() {
        return Ok(Linking { value: 0, raw: 0.0 });
    }
    let all_contractible = |f: &[PreimageCurve]| f.iter().all(PreimageCurve::is_contractible);
    let (inner, outer): (Vec<ClosedLift>, &[PreimageCurve]) = if all_contractible(first) {
        (first.iter().filter_map(ClosedLift::of).collect(), second)
    } else if all_contractible(second) {
        (second.iter().filter_map(ClosedLift::of).collect(), first)
    } else if let Some(m) = ClosedLift::merged(first) {
        (vec![m], second)
    } else if let Some(m) = ClosedLift::merged(second) {
        (vec![m], first)
    } else {
        let bad = first.iter().find(|c| !c.is_contractible()).unwrap();
        return Err(Error::NonContractibleCurve { winding: bad.winding });
    };
    let mut raw = 0.0;
    let mut closest = f64::INFINITY;
    let mut limit: f64 = 0.0;
    for a in &inner {
        for d in outer {
            let (r, c) = gauss_against(a, d);
            raw += r;
            closest = closest.min(c);
            limit = limit.max(MIN_SEPARATION * a.spacing.max(d.spacing));
        }
    }
    checked(raw, closest, limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle(center: Vec3, u: Vec3, v: Vec3, r: f64, n: usize) -> Vec<Vec3> {
        (0..=n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                std::array::from_fn(|k| center[k] + r * (t.cos() * u[k] + t.sin() * v[k]))
            })
            .collect()
    }

    /// Midpoint-rule Gauss integral, the textbook discretization.
    fn gauss_midpoint(a: &[Vec3], b: &[Vec3]) -> f64 {
        let mut s = 0.0;
        for x in a.windows(2) {
            let m1: Vec3 = std::array::from_fn(|k| 0.5 * (x[0][k] + x[1][k]));
            let d1 = sub(x[1], x[0]);
            for y in b.windows(2) {
                let m2: Vec3 = std::array::from_fn(|k| 0.5 * (y[0][k] + y[1][k]));
                let d2 = sub(y[1], y[0]);
                let r = sub(m1, m2);
                s += dot(r, cross(d1, d2)) / dot(r, r).powf(1.5);
            }
        }
        s / (4.0 * PI)
    }

    fn hopf_link() -> (Vec<Vec3>, Vec<Vec3>) {
        let a = circle([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 400);
        let b = circle([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0, 400);
        (a, b)
    }

    #[test]
    fn exact_segment_sum_matches_midpoint_gauss() {
        let (a, b) = hopf_link();
        let exact = gauss_sum(&a, &b);
        let mid = gauss_midpoint(&a, &b);
        assert!((exact - mid).abs() < 1e-3, "{exact} vs {mid}");
        assert!((exact.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn far_circles_do_not_link() {
        let a = circle([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 64);
        let b = circle([5.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0, 64);
        assert!(gauss_sum(&a, &b).abs() < 1e-12);
    }

    fn on_torus(points: Vec<Vec3>) -> PreimageCurve {
        PreimageCurve::from_lift(&translate(&points, [3.0, 3.0, 3.0]), 0.05)
    }

    #[test]
    fn hopf_link_on_the_torus() {
        let (a, b) = hopf_link();
        let l = linking_number(&on_torus(a.clone()), &on_torus(b.clone())).unwrap();
        assert_eq!(l.value.abs(), 1);
        assert!(l.residual() < 1e-9);
        // reversing one curve flips the sign
        let mut rev = b;
        rev.reverse();
        let r = linking_number(&on_torus(a), &on_torus(rev)).unwrap();
        assert_eq!(r.value, -l.value);
    }

    #[test]
    fn links_across_the_periodic_boundary() {
        let (a, b) = hopf_link();
        // shift the pair so the linked region straddles k1 = 0
        let a = PreimageCurve::from_lift(&translate(&a, [-0.5, 3.0, 3.0]), 0.05);
        let b = PreimageCurve::from_lift(&translate(&b, [-0.5, 3.0, 3.0]), 0.05);
        assert_eq!(linking_number(&a, &b).unwrap().value.abs(), 1);
    }

    #[test]
    fn touching_and_noncontractible_curves_are_rejected() {
        let a = circle([3.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 64);
        let b = circle([3.05, 3.0, 3.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 64);
        let err = linking_number(&PreimageCurve::from_lift(&a, 0.05), &PreimageCurve::from_lift(&b, 0.05));
        assert!(matches!(err, Err(Error::CurvesTooClose { .. })));
        let line: Vec<Vec3> = (0..=32).map(|i| [1.0, 1.0, TAU * i as f64 / 32.0]).collect();
        let line = PreimageCurve::from_lift(&line, 0.05);
        assert_eq!(line.winding, [0, 0, 1]);
        assert!(matches!(
            linking_number(&line, &PreimageCurve::from_lift(&a, 0.05)),
            Err(Error::NonContractibleCurve { winding: [0, 0, 1] })
        ));
    }

    #[test]
    fn circle_around_a_straight_line() {
        let line: Vec<Vec3> = (0..=64).map(|i| [3.0, 3.0, TAU * i as f64 / 64.0]).collect();
        let line = PreimageCurve::from_lift(&line, 0.05);
        let ring = circle([3.0, 3.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.8, 128);
        let ring = PreimageCurve::from_lift(&ring, 0.05);
        let l = linking_with_lift(&ring, &line).unwrap();
        assert_eq!(l.value.abs(), 1);
        assert!(l.residual() < 1e-2);
        // a ring away from the line encloses nothing
        let away = circle([1.0, 1.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.5, 64);
        let away = PreimageCurve::from_lift(&away, 0.05);
        assert_eq!(linking_with_lift(&away, &line).unwrap().value, 0);
        // two antiparallel lines through the ring cancel as a family
        let back: Vec<Vec3> = (0..=64).rev().map(|i| [3.2, 3.0, TAU * i as f64 / 64.0]).collect();
        let back = PreimageCurve::from_lift(&back, 0.05);
        assert_eq!(family_linking(&[ring], &[line.clone(), back.clone()]).unwrap().value, 0);
        assert!(matches!(
            family_linking(&[line], &[back]),
            Err(Error::NonContractibleCurve { .. })
        ));
    }

    #[test]
    fn families_of_winding_lines_are_joined() {
        let vertical = |x: f64, y: f64, up: bool| {
            let mut p: Vec<Vec3> = (0..=64).map(|i| [x, y, TAU * i as f64 / 64.0]).collect();
            if !up {
                p.reverse();
            }
            PreimageCurve::from_lift(&p, 0.02)
        };
        let first = [vertical(3.0, 3.0, true), vertical(4.0, 3.0, false)];
        let ring = PreimageCurve::from_lift(
            &circle([3.0, 3.0, 2.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.3, 96),
            0.02,
        );
        let second = [ring.clone(), vertical(1.0, 5.0, true), vertical(5.0, 1.0, false)];
        let joined = family_linking(&first, &second).unwrap();
        let single = linking_with_lift(&ring, &first[0]).unwrap();
        assert_eq!(joined.value.abs(), 1);
        assert_eq!(joined.value, single.value);
        assert!(joined.residual() < 1e-2);
    }

    proptest! {
        #[test]
        fn linking_is_symmetric_and_translation_invariant(
            dx in -0.3f64..0.3, dy in -0.3f64..0.3, shift in 0.0f64..6.0
        ) {
            let a = circle([shift, 3.0, 3.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 48);
            let b = circle([shift + 1.0 + dx, 3.0 + dy, 3.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0, 48);
            let (ca, cb) = (PreimageCurve::from_lift(&a, 0.05), PreimageCurve::from_lift(&b, 0.05));
            let ab = linking_number(&ca, &cb).unwrap();
            let ba = linking_number(&cb, &ca).unwrap();
            prop_assert_eq!(ab.value, ba.value);
            prop_assert_eq!(ab.value.abs(), 1);
        }
    }
}
