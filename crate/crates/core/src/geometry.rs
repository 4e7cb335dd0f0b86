//! Plane geometry for cyclic rotation groups: Cartesian and polar points,
//! the action of `Z_n` by rotations, fundamental sectors, the angular
//! conjugacy `h_n` and angle lifting.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for every angle comparison.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("negative radius {0}")]
    NegativeRadius(f64),
    #[error("symmetry order must be at least 2, got {0}")]
    BadOrder(u32),
    #[error("sector index {j} out of range 1..={n}")]
    BadSector { j: u32, n: u32 },
    #[error("sector undefined at origin")]
    SectorAtOrigin,
}

/// A point of the plane in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Checked constructor rejecting NaN and infinities.
    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite(x, y))
        }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn is_origin(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }

    #[inline]
    pub fn dist(self, other: PlanarPoint) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Principal angle in `[0, 2π)`; zero at the origin.
    #[inline]
    pub fn angle(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }
}

impl std::ops::Add for PlanarPoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for PlanarPoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for PlanarPoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl fmt::Display for PlanarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A point in polar coordinates with `r >= 0` and `theta` in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    r: f64,
    theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self, GeometryError> {
        if !r.is_finite() || !theta.is_finite() {
            return Err(GeometryError::NonFinite(r, theta));
        }
        if r < 0.0 {
            return Err(GeometryError::NegativeRadius(r));
        }
        Ok(Self::new_unchecked(r, theta))
    }

    /// Normalizes `theta`; callers guarantee `r >= 0` and finiteness.
    pub(crate) fn new_unchecked(r: f64, theta: f64) -> Self {
        if r == 0.0 {
            Self { r: 0.0, theta: 0.0 }
        } else {
            Self { r, theta: normalize_angle(theta) }
        }
    }

    #[inline]
    pub fn r(self) -> f64 {
        self.r
    }

    #[inline]
    pub fn theta(self) -> f64 {
        self.theta
    }
}

/// Maps any finite angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t + 0.0
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    PI - (PI - (a - b)).rem_euclid(TAU)
}

pub fn to_polar(p: PlanarPoint) -> PolarPoint {
    if p.is_origin() {
        return PolarPoint { r: 0.0, theta: 0.0 };
    }
    PolarPoint::new_unchecked(p.norm(), p.y.atan2(p.x))
}

pub fn from_polar(q: PolarPoint) -> PlanarPoint {
    let (s, c) = q.theta.sin_cos();
    PlanarPoint::new(q.r * c, q.r * s)
}

/// Order `n >= 2` of a cyclic rotation group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SymmetryOrder(u32);

impl SymmetryOrder {
    pub fn new(n: u32) -> Result<Self, GeometryError> {
        if n >= 2 {
            Ok(Self(n))
        } else {
            Err(GeometryError::BadOrder(n))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Angular width `2π/n` of a fundamental sector.
    #[inline]
    pub fn sector_width(self) -> f64 {
        TAU / f64::from(self.0)
    }
}

impl TryFrom<u32> for SymmetryOrder {
    type Error = GeometryError;
    fn try_from(n: u32) -> Result<Self, Self::Error> {
        Self::new(n)
    }
}

impl From<SymmetryOrder> for u32 {
    fn from(n: SymmetryOrder) -> u32 {
        n.0
    }
}

impl fmt::Display for SymmetryOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Index `j` in `1..=n` of the sector `[2π(j-1)/n, 2πj/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorIndex {
    j: u32,
    n: SymmetryOrder,
}

impl SectorIndex {
    pub fn new(j: u32, n: SymmetryOrder) -> Result<Self, GeometryError> {
        if (1..=n.get()).contains(&j) {
            Ok(Self { j, n })
        } else {
            Err(GeometryError::BadSector { j, n: n.get() })
        }
    }

    #[inline]
    pub fn j(self) -> u32 {
        self.j
    }

    #[inline]
    pub fn order(self) -> SymmetryOrder {
        self.n
    }

    /// The sector one generator step counter-clockwise.
    pub fn next(self) -> Self {
        Self { j: self.j % self.n.get() + 1, n: self.n }
    }

    /// The sector one generator step clockwise.
    pub fn prev(self) -> Self {
        Self { j: (self.j + self.n.get() - 2) % self.n.get() + 1, n: self.n }
    }

    /// Angle of the lower boundary ray.
    pub fn lower_angle(self) -> f64 {
        f64::from(self.j - 1) * self.n.sector_width()
    }
}

/// The element `R_n^m` of `Z_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    m: u32,
    n: SymmetryOrder,
}

impl GroupElement {
    /// Any integer power is accepted and reduced mod `n`.
    pub fn new(m: i64, n: SymmetryOrder) -> Self {
        let m = m.rem_euclid(i64::from(n.get())) as u32;
        Self { m, n }
    }

    pub fn generator(n: SymmetryOrder) -> Self {
        Self::new(1, n)
    }

    #[inline]
    pub fn power(self) -> u32 {
        self.m
    }

    #[inline]
    pub fn order(self) -> SymmetryOrder {
        self.n
    }

    pub fn inverse(self) -> Self {
        Self::new(-i64::from(self.m), self.n)
    }

    pub fn compose(self, other: GroupElement) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self::new(i64::from(self.m) + i64::from(other.m), self.n)
    }

    pub fn angle(self) -> f64 {
        f64::from(self.m) * self.n.sector_width()
    }
}

/// Rotates `p` by `2πm/n`. Multiples of a quarter turn are exact.
pub fn rotate(p: PlanarPoint, g: GroupElement) -> PlanarPoint {
    let (m, n) = (u64::from(g.m), u64::from(g.n.get()));
    if (4 * m) % n == 0 {
        return match (4 * m / n) % 4 {
            0 => p,
            1 => PlanarPoint::new(-p.y, p.x),
            2 => PlanarPoint::new(-p.x, -p.y),
            _ => PlanarPoint::new(p.y, -p.x),
        };
    }
    rotate_by(p, g.angle())
}

/// Rotation by an arbitrary angle.
pub fn rotate_by(p: PlanarPoint, angle: f64) -> PlanarPoint {
    let (s, c) = angle.sin_cos();
    PlanarPoint::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// Sector containing `p`, with half-open sectors `[2π(j-1)/n, 2πj/n)`.
///
/// Angles within [`ANGLE_TOL`] below a boundary ray count as lying on it.
pub fn sector_of(p: PlanarPoint, n: SymmetryOrder) -> Result<SectorIndex, GeometryError> {
    if p.is_origin() {
        return Err(GeometryError::SectorAtOrigin);
    }
    Ok(sector_of_angle(p.angle(), n))
}

/// Every closed sector containing `p`: one, or two when `p` lies within
/// [`ANGLE_TOL`] of a boundary ray.
pub fn closed_sectors(p: PlanarPoint, n: SymmetryOrder) -> Result<Vec<SectorIndex>, GeometryError> {
    let s = sector_of(p, n)?;
    if angle_diff(p.angle(), s.lower_angle()).abs() <= ANGLE_TOL {
        Ok(vec![s.prev(), s])
    } else {
        Ok(vec![s])
    }
}

pub(crate) fn sector_of_angle(theta: f64, n: SymmetryOrder) -> SectorIndex {
    let idx = ((theta + ANGLE_TOL) / n.sector_width()).floor() as i64;
    let j = idx.rem_euclid(i64::from(n.get())) as u32 + 1;
    SectorIndex { j, n }
}

/// `h_n`: polar `(r, θ) ↦ (r, 4θ/n)`; the identity for `n = 4`.
pub fn h_map(p: PlanarPoint, n: SymmetryOrder) -> PlanarPoint {
    if n.get() == 4 || p.is_origin() {
        return p;
    }
    let q = to_polar(p);
    let (s, c) = (4.0 * q.theta / f64::from(n.get())).sin_cos();
    PlanarPoint::new(q.r * c, q.r * s)
}

/// `h_n⁻¹`: polar `(r, θ) ↦ (r, nθ/4)`, applied verbatim to every input.
pub fn h_inv(p: PlanarPoint, n: SymmetryOrder) -> PlanarPoint {
    if n.get() == 4 || p.is_origin() {
        return p;
    }
    let q = to_polar(p);
    let (s, c) = (f64::from(n.get()) * q.theta / 4.0).sin_cos();
    PlanarPoint::new(q.r * c, q.r * s)
}

/// Continuous lift taking the nearest branch: every successive difference
/// lands in `(-π, π]`.
pub fn angle_lift(thetas: &[f64]) -> Vec<f64> {
    lift_with(thetas, |d| angle_diff(d, 0.0))
}

/// Lift for orbits known to turn counter-clockwise: successive
/// differences land in `[0, 2π)`, up to [`ANGLE_TOL`] of backward jitter.
pub fn angle_lift_forward(thetas: &[f64]) -> Vec<f64> {
    lift_with(thetas, |d| (d + ANGLE_TOL).rem_euclid(TAU) - ANGLE_TOL)
}

fn lift_with(thetas: &[f64], wrap: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(thetas.len());
    let Some(&first) = thetas.first() else {
        return out;
    };
    out.push(first);
    let mut acc = first;
    for w in thetas.windows(2) {
        acc += wrap(w[1] - w[0]);
        out.push(acc);
    }
    out
}

/// `M(r, θ) = ∂(x, y)/∂(r, θ)` as a row-major 2×2 array.
pub(crate) fn polar_frame(r: f64, theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, -r * s], [s, r * c]]
}

/// `M(r, θ)⁻¹ = ∂(r, θ)/∂(x, y)`, requires `r > 0`.
pub(crate) fn polar_frame_inv(r: f64, theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s / r, c / r]]
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    fn ord(n: u32) -> SymmetryOrder {
        SymmetryOrder::new(n).unwrap()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn polar_examples() {
        let q = to_polar(PlanarPoint::new(1.0, 0.0));
        assert_eq!((q.r(), q.theta()), (1.0, 0.0));
        let q = to_polar(PlanarPoint::new(0.0, 2.0));
        assert_abs_diff_eq!(q.r(), 2.0);
        assert_abs_diff_eq!(q.theta(), FRAC_PI_2);
        let q = to_polar(PlanarPoint::new(-1.0, -1.0));
        assert_abs_diff_eq!(q.r(), 1.41421356, epsilon = 1e-8);
        assert_abs_diff_eq!(q.theta(), 3.92699082, epsilon = 1e-8);
        assert_eq!(to_polar(PlanarPoint::ORIGIN), PolarPoint::new(0.0, 0.0).unwrap());

        let p = from_polar(PolarPoint::new(2.0, PI).unwrap());
        assert_abs_diff_eq!(p.x, -2.0);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-15);
        let p = from_polar(PolarPoint::new(1.0, PI / 3.0).unwrap());
        assert_abs_diff_eq!(p.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.86602540, epsilon = 1e-8);
    }

    #[test]
    fn polar_point_invariants() {
        assert!(PolarPoint::new(-1.0, 0.0).is_err());
        assert!(PolarPoint::new(f64::NAN, 0.0).is_err());
        let q = PolarPoint::new(0.0, 1.3).unwrap();
        assert_eq!(q.theta(), 0.0);
        let q = PolarPoint::new(1.0, -FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(q.theta(), 3.0 * FRAC_PI_2);
        assert!(normalize_angle(-1e-300) < TAU);
    }

    #[test]
    fn rotate_examples() {
        let g = GroupElement::generator(ord(4));
        assert_eq!(rotate(PlanarPoint::new(3.0, 1.0), g), PlanarPoint::new(-1.0, 3.0));
        let p = PlanarPoint::new(0.3, -2.0);
        assert_eq!(rotate(p, GroupElement::new(0, ord(7))), p);
        let q = rotate(PlanarPoint::new(1.0, 0.0), GroupElement::generator(ord(6)));
        assert_abs_diff_eq!(q.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, 0.86602540, epsilon = 1e-8);
        assert_eq!(GroupElement::new(-1, ord(5)).power(), 4);
    }

    #[test]
    fn sector_examples() {
        assert_eq!(sector_of(PlanarPoint::new(1.0, 1.0), ord(4)).unwrap().j(), 1);
        assert_eq!(sector_of(PlanarPoint::new(0.0, 1.0), ord(4)).unwrap().j(), 2);
        assert_eq!(sector_of(PlanarPoint::new(-1.0, 0.0), ord(2)).unwrap().j(), 2);
        assert_eq!(sector_of(PlanarPoint::ORIGIN, ord(3)), Err(GeometryError::SectorAtOrigin));
        // a rotated axis point lands on the lower edge even with rounding
        let q = rotate(PlanarPoint::new(1.0, 0.0), GroupElement::generator(ord(6)));
        assert_eq!(sector_of(q, ord(6)).unwrap().j(), 2);
        // just below 2π wraps to the first sector
        assert_eq!(sector_of(PlanarPoint::new(1.0, -1e-14), ord(5)).unwrap().j(), 1);
    }

    #[test]
    fn closed_sector_membership() {
        let n = ord(4);
        let on_axis = closed_sectors(PlanarPoint::new(0.0, 2.0), n).unwrap();
        assert_eq!(on_axis.iter().map(|s| s.j()).collect::<Vec<_>>(), vec![1, 2]);
        let inside = closed_sectors(PlanarPoint::new(1.0, 1.0), n).unwrap();
        assert_eq!(inside.len(), 1);
        let edge = closed_sectors(PlanarPoint::new(1.0, -1e-20), n).unwrap();
        assert_eq!(edge.iter().map(|s| s.j()).collect::<Vec<_>>(), vec![4, 1]);
        assert_eq!(SectorIndex::new(1, n).unwrap().prev().j(), 4);
    }

    #[test]
    fn h_examples() {
        let p = PlanarPoint::new(0.7, -1.9);
        assert_eq!(h_map(p, ord(4)), p);
        assert_eq!(h_inv(p, ord(4)), p);
        let q = h_map(PlanarPoint::new(0.0, 1.0), ord(6));
        assert_abs_diff_eq!(q.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, 0.86602540, epsilon = 1e-8);
        assert_eq!(h_map(PlanarPoint::new(1.0, 0.0), ord(2)), PlanarPoint::new(1.0, 0.0));
        let q = h_map(PlanarPoint::new(0.0, 1.0), ord(2));
        assert_abs_diff_eq!(q.x, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 0.0, epsilon = 1e-15);
        let q = h_inv(PlanarPoint::new(0.5, 0.8660254037844386), ord(6));
        assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-12);
        assert_eq!(h_inv(PlanarPoint::new(1.0, 0.0), ord(8)), PlanarPoint::new(1.0, 0.0));
    }

    #[test]
    fn lift_examples() {
        let l = angle_lift(&[0.1, 6.2]);
        assert_abs_diff_eq!(l[1], 6.2 - TAU, epsilon = 1e-15);
        assert_abs_diff_eq!(l[1], -0.083185, epsilon = 1e-6);
        assert_eq!(angle_lift(&[1.0, 1.0, 1.0]), vec![1.0, 1.0, 1.0]);
        let n = ord(5);
        let mut p = PlanarPoint::new(1.0, 0.0);
        let mut thetas = vec![p.angle()];
        for _ in 0..5 {
            p = rotate(p, GroupElement::generator(n));
            thetas.push(p.angle());
        }
        assert_abs_diff_eq!(*angle_lift(&thetas).last().unwrap(), TAU, epsilon = 1e-12);
        assert!(angle_lift(&[]).is_empty());
        // a half turn counts as +π on both branches
        assert_abs_diff_eq!(angle_lift(&[0.0, PI])[1], PI);
        assert_abs_diff_eq!(angle_lift_forward(&[3.0, 3.0 + PI + 0.5])[1], 3.0 + PI + 0.5);
    }

    #[test]
    fn composing_generator_n_times_is_identity() {
        for n in 2..=12 {
            let g = GroupElement::generator(ord(n));
            let p0 = PlanarPoint::new(1.3, -0.4);
            let mut p = p0;
            for _ in 0..n {
                p = rotate(p, g);
            }
            assert!(p.dist(p0) < 1e-12, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(x in -1e3..1e3f64, y in -1e3..1e3f64, m in -20i64..20, n in 2u32..13) {
            let p = PlanarPoint::new(x, y);
            let q = rotate(p, GroupElement::new(m, ord(n)));
            prop_assert!((q.norm() - p.norm()).abs() <= 1e-14 * (1.0 + p.norm()));
        }

        #[test]
        fn polar_round_trip(x in -1e3..1e3f64, y in -1e3..1e3f64) {
            let p = PlanarPoint::new(x, y);
            let q = from_polar(to_polar(p));
            prop_assert!(q.dist(p) <= 1e-13 * (1.0 + p.norm()));
        }

        #[test]
        fn h_round_trip_on_first_sector(r in 1e-3..1e3f64, frac in 0.0..1.0f64, n in 2u32..13) {
            let n = ord(n);
            let p = from_polar(PolarPoint::new(r, frac * n.sector_width()).unwrap());
            let q = h_inv(h_map(p, n), n);
            prop_assert!(q.dist(p) <= 1e-12 * (1.0 + p.norm()));
            prop_assert!((h_map(p, n).norm() - p.norm()).abs() <= 1e-12 * (1.0 + r));
        }

        #[test]
        fn sector_advances_under_generator(r in 1e-2..1e2f64, frac in 1e-6..(1.0 - 1e-6), j in 1u32..13, n in 2u32..13) {
            let n = ord(n);
            let j = (j - 1) % n.get() + 1;
            let theta = (f64::from(j - 1) + frac) * n.sector_width();
            let p = from_polar(PolarPoint::new(r, theta).unwrap());
            let s = sector_of(p, n).unwrap();
            let s2 = sector_of(rotate(p, GroupElement::generator(n)), n).unwrap();
            prop_assert_eq!(s2, s.next());
        }

        #[test]
        fn lift_differences_in_half_open_interval(v in proptest::collection::vec(0.0..TAU, 1..50)) {
            let l = angle_lift(&v);
            prop_assert_eq!(l[0], v[0]);
            for w in l.windows(2) {
                let d = w[1] - w[0];
                prop_assert!(d > -PI - 1e-12 && d <= PI + 1e-12);
            }
        }
    }
}
