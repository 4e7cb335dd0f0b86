//! The map families: Szlenk's `F4`, its unfolding `G4`, the transplanted
//! `Fn`, and the dissipative `H`/`Hn`, with analytic Jacobians and an
//! inverse for the ray-preserving families.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    angle_diff, h_map, polar_frame, polar_frame_inv, rotate, sector_of, to_polar,
    GeometryError, GroupElement, PlanarPoint, PolarPoint, SectorIndex, SymmetryOrder,
};

/// Upper end of the admissible `k` interval, `2/√3`.
pub const K_MAX: f64 = 1.154_700_538_379_251_5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("k = {0} outside the open interval (1, 2/sqrt(3))")]
    InvalidK(f64),
    #[error("non-finite unfolding parameter")]
    NonFiniteUnfold,
    #[error("radial profile needs r0 > 0 and r_half > 0, got r0 = {r0}, r_half = {r_half}")]
    BadProfile { r0: f64, r_half: f64 },
    #[error("profile onset r0 = {r0} must exceed the periodic radius {periodic}")]
    ProfileTooSmall { r0: f64, periodic: f64 },
    #[error("polar chart singular at origin")]
    PolarSingular,
    #[error("no preimage")]
    NoPreimage,
    #[error("inversion did not converge")]
    NotConverged,
    #[error("{0} maps do not preserve rays; inversion unsupported")]
    Unsupported(Family),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The parameter `k` of Szlenk's map, validated to `1 < k < 2/√3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SzlenkParams(f64);

impl SzlenkParams {
    pub const DEFAULT_K: f64 = 1.1;

    pub fn new(k: f64) -> Result<Self, MapError> {
        if k > 1.0 && k < K_MAX {
            Ok(Self(k))
        } else {
            Err(MapError::InvalidK(k))
        }
    }

    #[inline]
    pub fn k(self) -> f64 {
        self.0
    }

    /// Radius `(k-1)^(-1/2)` of the periodic orbit on the axes.
    pub fn periodic_radius(self) -> f64 {
        (self.0 - 1.0).sqrt().recip()
    }

    /// The periodic point on the positive x-axis.
    pub fn periodic_point(self) -> PlanarPoint {
        PlanarPoint::new(self.periodic_radius(), 0.0)
    }
}

impl Default for SzlenkParams {
    fn default() -> Self {
        Self(Self::DEFAULT_K)
    }
}

impl TryFrom<f64> for SzlenkParams {
    type Error = MapError;
    fn try_from(k: f64) -> Result<Self, MapError> {
        Self::new(k)
    }
}

impl From<SzlenkParams> for f64 {
    fn from(k: SzlenkParams) -> f64 {
        k.0
    }
}

/// Coefficients of the unfolding directions `X1`, `X2` and `N·X2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UnfoldParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl UnfoldParams {
    pub fn new(alpha: f64, beta: f64, delta: f64) -> Result<Self, MapError> {
        if alpha.is_finite() && beta.is_finite() && delta.is_finite() {
            Ok(Self { alpha, beta, delta })
        } else {
            Err(MapError::NonFiniteUnfold)
        }
    }
}

/// Saturating radial profile `u`: identity up to `r0`, then half-speed
/// growth plus an exponentially fading correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    r0: f64,
    r_half: f64,
}

impl RadialProfile {
    pub fn new(r0: f64, r_half: f64) -> Result<Self, MapError> {
        if r0.is_finite() && r_half.is_finite() && r0 > 0.0 && r_half > 0.0 {
            Ok(Self { r0, r_half })
        } else {
            Err(MapError::BadProfile { r0, r_half })
        }
    }

    /// `r0 = r_half = 2(k-1)^(-1/2)`.
    pub fn default_for(k: SzlenkParams) -> Self {
        let r0 = 2.0 * k.periodic_radius();
        Self { r0, r_half: r0 }
    }

    #[inline]
    pub fn r0(self) -> f64 {
        self.r0
    }

    #[inline]
    pub fn r_half(self) -> f64 {
        self.r_half
    }

    /// `(u(s), u'(s))`.
    pub fn value_and_slope(self, s: f64) -> (f64, f64) {
        if s <= self.r0 {
            return (s, 1.0);
        }
        let w = s - self.r0;
        let e = (-w / self.r_half).exp();
        (self.r0 + 0.5 * w + 0.5 * self.r_half * (1.0 - e), 0.5 + 0.5 * e)
    }

    /// Solves `u(s) = t` for `t >= 0`.
    pub fn inverse(self, t: f64) -> f64 {
        if t <= self.r0 {
            return t;
        }
        // u(s) >= r0 + w/2, so s <= r0 + 2(t - r0); u' lies in (1/2, 1]
        let (mut lo, mut hi) = (self.r0, self.r0 + 2.0 * (t - self.r0));
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (v, dv) = self.value_and_slope(s);
            let f = v - t;
            if f == 0.0 {
                return s;
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let next = s - f / dv;
            s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        s
    }
}

/// `u(s)` for the profile.
pub fn radial_u(s: f64, prof: RadialProfile) -> f64 {
    prof.value_and_slope(s).0
}

/// A real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Jacobian2 {
    pub const ZERO: Jacobian2 = Jacobian2 { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    pub const IDENTITY: Jacobian2 = Jacobian2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub(crate) fn from_rows(m: [[f64; 2]; 2]) -> Self {
        Self::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn mul(&self, o: &Jacobian2) -> Jacobian2 {
        Jacobian2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(&self, v: PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_tr = 0.5 * self.trace();
        let disc = half_tr * half_tr - self.det();
        if disc >= 0.0 {
            let s = disc.sqrt();
            // larger-magnitude root first, the other from the product
            let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
            let small = if big != 0.0 { self.det() / big } else { 0.0 };
            [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
        } else {
            let s = (-disc).sqrt();
            [Complex64::new(half_tr, s), Complex64::new(half_tr, -s)]
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        let [l1, l2] = self.eigenvalues();
        l1.norm().max(l2.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn max_abs_diff(&self, o: &Jacobian2) -> f64 {
        Jacobian2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl fmt::Display for Jacobian2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Central-difference Jacobian of `f` at `p` with step `h`.
pub fn central_difference_jacobian(
    f: impl Fn(PlanarPoint) -> PlanarPoint,
    p: PlanarPoint,
    h: f64,
) -> Jacobian2 {
    let fx = f(PlanarPoint::new(p.x + h, p.y)) - f(PlanarPoint::new(p.x - h, p.y));
    let fy = f(PlanarPoint::new(p.x, p.y + h)) - f(PlanarPoint::new(p.x, p.y - h));
    let s = 0.5 / h;
    Jacobian2::new(fx.x * s, fy.x * s, fx.y * s, fy.y * s)
}

// ---------------------------------------------------------------- F4

pub fn eval_f4(p: PlanarPoint, k: SzlenkParams) -> PlanarPoint {
    let k = k.k();
    let s = k / (1.0 + p.x * p.x + p.y * p.y);
    PlanarPoint::new(-s * p.y * p.y * p.y, s * p.x * p.x * p.x)
}

/// `F4` in polar form: radius `k r³/(1+r²)·√(cos⁶θ+sin⁶θ)`, angle of
/// `(-sin³θ, cos³θ)`.
pub fn eval_f4_polar(q: PolarPoint, k: SzlenkParams) -> PolarPoint {
    let r = q.r();
    if r == 0.0 {
        return to_polar(PlanarPoint::ORIGIN);
    }
    let (s, c) = q.theta().sin_cos();
    let radius = k.k() * r * r * r / (1.0 + r * r) * (c.powi(6) + s.powi(6)).sqrt();
    let angle = (c * c * c).atan2(-(s * s * s));
    PolarPoint::new_unchecked(radius, angle)
}

pub fn jac_f4(p: PlanarPoint, k: SzlenkParams) -> Jacobian2 {
    let (x, y) = (p.x, p.y);
    let n1 = 1.0 + x * x + y * y;
    let s = k.k() / (n1 * n1);
    Jacobian2::new(
        s * 2.0 * x * y * y * y,
        s * (2.0 * y.powi(4) - 3.0 * y * y * n1),
        s * (3.0 * x * x * n1 - 2.0 * x.powi(4)),
        s * (-2.0 * x * x * x * y),
    )
}

/// Upper-triangular derivative of `(r, θ) ↦ (Ψ, Φ)` for `F4`.
pub fn jac_f4_polar(q: PolarPoint, k: SzlenkParams) -> Result<Jacobian2, MapError> {
    if q.r() == 0.0 {
        return Err(MapError::PolarSingular);
    }
    let (d11, d12, d22) = polar_partials(q.r(), q.theta(), k.k());
    Ok(Jacobian2::new(d11, d12, 0.0, d22))
}

/// `(∂Ψ/∂r, ∂Ψ/∂θ, ∂Φ/∂θ)` at `(r, θ)`.
fn polar_partials(r: f64, theta: f64, k: f64) -> (f64, f64, f64) {
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let sum6 = c2 * c2 * c2 + s2 * s2 * s2;
    let root = sum6.sqrt();
    let r2 = r * r;
    let d11 = k * r2 * (3.0 + r2) / ((1.0 + r2) * (1.0 + r2)) * root;
    let d12 = k * r2 * r / (1.0 + r2) * 3.0 * s * c * (s2 * s2 - c2 * c2) / root;
    let d22 = 3.0 * s2 * c2 / sum6;
    (d11, d12, d22)
}

// ---------------------------------------------------------------- G4

pub fn eval_g4(p: PlanarPoint, k: SzlenkParams, u: UnfoldParams) -> PlanarPoint {
    let f = eval_f4(p, k);
    let twist = u.beta + u.delta * (p.x * p.x + p.y * p.y);
    PlanarPoint::new(f.x + u.alpha * p.x - twist * p.y, f.y + u.alpha * p.y + twist * p.x)
}

pub fn jac_g4(p: PlanarPoint, k: SzlenkParams, u: UnfoldParams) -> Jacobian2 {
    let j = jac_f4(p, k);
    let (x, y) = (p.x, p.y);
    let n = x * x + y * y;
    Jacobian2::new(
        j.a + u.alpha - 2.0 * u.delta * x * y,
        j.b - u.beta - u.delta * (n + 2.0 * y * y),
        j.c + u.beta + u.delta * (n + 2.0 * x * x),
        j.d + u.alpha + 2.0 * u.delta * x * y,
    )
}

// ---------------------------------------------------------------- H

pub fn eval_h(p: PlanarPoint, k: SzlenkParams, prof: RadialProfile) -> PlanarPoint {
    let f = eval_f4(p, k);
    let s = f.norm();
    if s <= prof.r0() {
        return f;
    }
    f.scale(radial_u(s, prof) / s)
}

fn jac_h(p: PlanarPoint, k: SzlenkParams, prof: RadialProfile) -> Jacobian2 {
    if p.is_origin() {
        return Jacobian2::ZERO;
    }
    if eval_f4(p, k).norm() <= prof.r0() {
        return jac_f4(p, k);
    }
    chart_jacobian(p, k, 4, sector_of(p, order4()).expect("nonzero point"), Some(prof))
}

// ---------------------------------------------------------------- Fn / Hn

fn order4() -> SymmetryOrder {
    SymmetryOrder::new(4).expect("4 >= 2")
}

/// `R^m ∘ h_n ∘ base ∘ h_n⁻¹ ∘ R^{-m}` on the sector of `p`.
fn dispatch(
    p: PlanarPoint,
    n: SymmetryOrder,
    base: impl Fn(PlanarPoint) -> PlanarPoint,
) -> PlanarPoint {
    if p.is_origin() {
        return PlanarPoint::ORIGIN;
    }
    if n.get() == 4 {
        return base(p);
    }
    let sector = sector_of(p, n).expect("nonzero point");
    let g = GroupElement::new(i64::from(sector.j()) - 1, n);
    let local = rotate(p, g.inverse());
    // signed local angle, so points a hair below the lower edge stay put
    let phi = angle_diff(local.angle(), 0.0);
    let r = local.norm();
    let pre = from_polar_signed(r, f64::from(n.get()) * phi / 4.0);
    rotate(h_map(base(pre), n), g)
}

fn from_polar_signed(r: f64, theta: f64) -> PlanarPoint {
    let (s, c) = theta.sin_cos();
    PlanarPoint::new(r * c, r * s)
}

pub fn eval_fn(p: PlanarPoint, k: SzlenkParams, n: SymmetryOrder) -> PlanarPoint {
    dispatch(p, n, |q| eval_f4(q, k))
}

pub fn eval_hn(
    p: PlanarPoint,
    k: SzlenkParams,
    n: SymmetryOrder,
    prof: RadialProfile,
) -> PlanarPoint {
    dispatch(p, n, |q| eval_h(q, k, prof))
}

pub fn jac_fn(p: PlanarPoint, k: SzlenkParams, n: SymmetryOrder) -> Jacobian2 {
    if p.is_origin() {
        return Jacobian2::ZERO;
    }
    if n.get() == 4 {
        return jac_f4(p, k);
    }
    let sector = sector_of(p, n).expect("nonzero point");
    chart_jacobian(p, k, n.get(), sector, None)
}

pub fn jac_hn(
    p: PlanarPoint,
    k: SzlenkParams,
    n: SymmetryOrder,
    prof: RadialProfile,
) -> Jacobian2 {
    if p.is_origin() {
        return Jacobian2::ZERO;
    }
    if n.get() == 4 {
        return jac_h(p, k, prof);
    }
    let sector = sector_of(p, n).expect("nonzero point");
    chart_jacobian(p, k, n.get(), sector, Some(prof))
}

/// Jacobian of `Fn` at `p` using the formula of `sector`, which must
/// contain `p` in its closure. On a boundary ray the two adjacent sector
/// formulas give the one-sided derivatives.
pub fn jac_fn_in_sector(
    p: PlanarPoint,
    k: SzlenkParams,
    sector: SectorIndex,
) -> Result<Jacobian2, MapError> {
    if p.is_origin() {
        return Err(MapError::PolarSingular);
    }
    Ok(chart_jacobian(p, k, sector.order().get(), sector, None))
}

/// Polar chain rule `M(ρ, α)·A_n·D·B_n·M(r, θ)⁻¹` with
/// `A_n = diag(1, 4/n)`, `B_n = diag(1, n/4)`.
fn chart_jacobian(
    p: PlanarPoint,
    k: SzlenkParams,
    n: u32,
    sector: SectorIndex,
    prof: Option<RadialProfile>,
) -> Jacobian2 {
    let q = to_polar(p);
    let (r, theta) = (q.r(), q.theta());
    let nf = f64::from(n);
    let lower = sector.lower_angle();
    let phi = angle_diff(theta, lower);
    let t4 = nf * phi / 4.0;
    let (s, c) = t4.sin_cos();
    let base_radius = k.k() * r * r * r / (1.0 + r * r) * (c.powi(6) + s.powi(6)).sqrt();
    let base_angle = (c * c * c).atan2(-(s * s * s));
    let (d11, d12, d22) = polar_partials(r, t4, k.k());
    let (rho, du) = match prof {
        Some(pr) => pr.value_and_slope(base_radius),
        None => (base_radius, 1.0),
    };
    let out_angle = lower + 4.0 * base_angle / nf;
    let chart = Jacobian2::new(du * d11, du * d12 * nf / 4.0, 0.0, d22);
    let left = Jacobian2::from_rows(polar_frame(rho, out_angle));
    let right = Jacobian2::from_rows(polar_frame_inv(r, theta));
    left.mul(&chart).mul(&right)
}

// ---------------------------------------------------------------- MapSpec

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    F4,
    G4,
    Fn,
    H,
    Hn,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::F4 => "f4",
            Family::G4 => "g4",
            Family::Fn => "fn",
            Family::H => "h",
            Family::Hn => "hn",
        })
    }
}

/// A fully parameterized member of one of the map families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MapSpec {
    F4 { k: SzlenkParams },
    G4 { k: SzlenkParams, unfold: UnfoldParams },
    Fn { k: SzlenkParams, n: SymmetryOrder },
    H { k: SzlenkParams, profile: RadialProfile },
    Hn { k: SzlenkParams, n: SymmetryOrder, profile: RadialProfile },
}

impl MapSpec {
    pub fn f4(k: SzlenkParams) -> Self {
        MapSpec::F4 { k }
    }

    pub fn g4(k: SzlenkParams, unfold: UnfoldParams) -> Self {
        MapSpec::G4 { k, unfold }
    }

    pub fn fn_(k: SzlenkParams, n: SymmetryOrder) -> Self {
        MapSpec::Fn { k, n }
    }

    /// Fails unless `r0` exceeds the periodic radius, so that `H = F4`
    /// near the periodic orbit.
    pub fn h(k: SzlenkParams, profile: RadialProfile) -> Result<Self, MapError> {
        check_profile(k, profile)?;
        Ok(MapSpec::H { k, profile })
    }

    pub fn hn(k: SzlenkParams, n: SymmetryOrder, profile: RadialProfile) -> Result<Self, MapError> {
        check_profile(k, profile)?;
        Ok(MapSpec::Hn { k, n, profile })
    }

    /// `Hn` with the default profile.
    pub fn hn_default(k: SzlenkParams, n: SymmetryOrder) -> Self {
        MapSpec::Hn { k, n, profile: RadialProfile::default_for(k) }
    }

    pub fn family(&self) -> Family {
        match self {
            MapSpec::F4 { .. } => Family::F4,
            MapSpec::G4 { .. } => Family::G4,
            MapSpec::Fn { .. } => Family::Fn,
            MapSpec::H { .. } => Family::H,
            MapSpec::Hn { .. } => Family::Hn,
        }
    }

    pub fn k(&self) -> SzlenkParams {
        match *self {
            MapSpec::F4 { k }
            | MapSpec::G4 { k, .. }
            | MapSpec::Fn { k, .. }
            | MapSpec::H { k, .. }
            | MapSpec::Hn { k, .. } => k,
        }
    }

    /// Symmetry order; 4 for `F4`, `G4` and `H`.
    pub fn order(&self) -> SymmetryOrder {
        match *self {
            MapSpec::Fn { n, .. } | MapSpec::Hn { n, .. } => n,
            _ => order4(),
        }
    }

    pub fn profile(&self) -> Option<RadialProfile> {
        match *self {
            MapSpec::H { profile, .. } | MapSpec::Hn { profile, .. } => Some(profile),
            _ => None,
        }
    }

    pub fn unfold(&self) -> Option<UnfoldParams> {
        match *self {
            MapSpec::G4 { unfold, .. } => Some(unfold),
            _ => None,
        }
    }

    pub fn eval(&self, p: PlanarPoint) -> PlanarPoint {
        match *self {
            MapSpec::F4 { k } => eval_f4(p, k),
            MapSpec::G4 { k, unfold } => eval_g4(p, k, unfold),
            MapSpec::Fn { k, n } => eval_fn(p, k, n),
            MapSpec::H { k, profile } => eval_h(p, k, profile),
            MapSpec::Hn { k, n, profile } => eval_hn(p, k, n, profile),
        }
    }

    pub fn jacobian(&self, p: PlanarPoint) -> Jacobian2 {
        match *self {
            MapSpec::F4 { k } => jac_f4(p, k),
            MapSpec::G4 { k, unfold } => jac_g4(p, k, unfold),
            MapSpec::Fn { k, n } => jac_fn(p, k, n),
            MapSpec::H { k, profile } => jac_h(p, k, profile),
            MapSpec::Hn { k, n, profile } => jac_hn(p, k, n, profile),
        }
    }

    /// True for the families that map every ray onto a ray.
    pub fn preserves_rays(&self) -> bool {
        !matches!(self, MapSpec::G4 { .. })
    }
}

fn check_profile(k: SzlenkParams, profile: RadialProfile) -> Result<(), MapError> {
    let periodic = k.periodic_radius();
    if profile.r0() > periodic {
        Ok(())
    } else {
        Err(MapError::ProfileTooSmall { r0: profile.r0(), periodic })
    }
}

/// Anything that can be iterated in the plane.
pub trait PlanarMap: Sync {
    fn eval(&self, p: PlanarPoint) -> PlanarPoint;

    /// Analytic derivative, when one is available.
    fn jacobian(&self, _p: PlanarPoint) -> Option<Jacobian2> {
        None
    }
}

impl PlanarMap for MapSpec {
    fn eval(&self, p: PlanarPoint) -> PlanarPoint {
        MapSpec::eval(self, p)
    }

    fn jacobian(&self, p: PlanarPoint) -> Option<Jacobian2> {
        Some(MapSpec::jacobian(self, p))
    }
}

/// A rigid rotation by a group element, handy as a reference map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub GroupElement);

impl PlanarMap for Rotation {
    fn eval(&self, p: PlanarPoint) -> PlanarPoint {
        rotate(p, self.0)
    }

    fn jacobian(&self, _p: PlanarPoint) -> Option<Jacobian2> {
        let (s, c) = self.0.angle().sin_cos();
        Some(Jacobian2::new(c, -s, s, c))
    }
}

// ---------------------------------------------------------------- inverse

/// Preimage of `q` under a ray-preserving family.
///
/// The angular part is solved in closed form: inside a sector the base
/// map sends the angle `t` to `π/2 + L` with `tan L = tan³ t`.
pub fn invert_map(spec: &MapSpec, q: PlanarPoint, tol: f64) -> Result<PlanarPoint, MapError> {
    if !spec.preserves_rays() {
        return Err(MapError::Unsupported(spec.family()));
    }
    let q = PlanarPoint::try_new(q.x, q.y)?;
    if q.is_origin() {
        return Ok(PlanarPoint::ORIGIN);
    }
    let n = spec.order();
    let nf = f64::from(n.get());
    let k = spec.k();

    let image_sector = sector_of(q, n)?;
    let g = GroupElement::new(i64::from(image_sector.j()) - 2, n);
    let local = rotate(q, g.inverse());
    let rho = local.norm();
    // images of the preimage sector sit at angles in [2π/n, 4π/n)
    let image_angle = local.angle();
    let lifted = (nf * image_angle / 4.0 - FRAC_PI_2).clamp(0.0, FRAC_PI_2);
    let t4 = lifted.sin().cbrt().atan2(lifted.cos().cbrt());

    let base_rho = match spec.profile() {
        Some(prof) => prof.inverse(rho),
        None => rho,
    };
    if !base_rho.is_finite() {
        return Err(MapError::NoPreimage);
    }
    let (s, c) = t4.sin_cos();
    let target = base_rho / (k.k() * (c.powi(6) + s.powi(6)).sqrt());
    let r = solve_cubic_radius(target);

    let p = rotate(from_polar_signed(r, 4.0 * t4 / nf), g);
    if spec.eval(p).dist(q) <= tol * (1.0 + q.norm()) {
        Ok(p)
    } else {
        Err(MapError::NotConverged)
    }
}

/// Positive root of `r³/(1+r²) = t`.
fn solve_cubic_radius(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let g = |r: f64| r * r * r / (1.0 + r * r);
    let dg = |r: f64| {
        let r2 = r * r;
        r2 * (3.0 + r2) / ((1.0 + r2) * (1.0 + r2))
    };
    // g(r) >= r - 1/2, so t + 1 brackets the root
    let (mut lo, mut hi) = (0.0_f64, t + 1.0);
    let mut r = if t > 1.0 { t } else { t.cbrt() };
    for _ in 0..200 {
        let f = g(r) - t;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let d = dg(r);
        let next = if d > 0.0 { r - f / d } else { f64::NAN };
        r = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    r
}
