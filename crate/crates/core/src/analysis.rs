//! Orbits, periodic points and the numerical property checks run against
//! the map families.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    angle_diff, closed_sectors, from_polar, rotate, GroupElement, PlanarPoint, PolarPoint,
    SymmetryOrder,
};
use crate::maps::{
    central_difference_jacobian, eval_fn, eval_g4, jac_g4, Jacobian2, PlanarMap, SzlenkParams,
    UnfoldParams,
};

/// Default seed for every sampled check.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("singular Newton system at ({x}, {y})")]
    SingularNewton { x: f64, y: f64 },
    #[error("no convergence after {iterations} Newton steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("period must be at least 1")]
    BadPeriod,
    #[error("orbit left the representable range")]
    NonFinite,
}

/// Deterministic generator used for all sampling.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the disk of radius `radius`.
pub fn sample_disk(rng: &mut impl Rng, radius: f64) -> PlanarPoint {
    let r = radius * rng.random::<f64>().sqrt();
    let t = TAU * rng.random::<f64>();
    PlanarPoint::new(r * t.cos(), r * t.sin())
}

/// Uniform sample from the annulus `r_min <= |p| <= r_max`.
pub fn sample_annulus(rng: &mut impl Rng, r_min: f64, r_max: f64) -> PlanarPoint {
    let u: f64 = rng.random();
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let t = TAU * rng.random::<f64>();
    PlanarPoint::new(r * t.cos(), r * t.sin())
}

fn jacobian_or_fd<M: PlanarMap + ?Sized>(map: &M, p: PlanarPoint) -> Jacobian2 {
    map.jacobian(p)
        .unwrap_or_else(|| central_difference_jacobian(|q| map.eval(q), p, 1e-6 * (1.0 + p.norm())))
}

// ---------------------------------------------------------------- orbits

/// A forward orbit; `points[0]` is the start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub start: PlanarPoint,
    pub points: Vec<PlanarPoint>,
    /// Set when an iterate overflowed and the orbit was cut short.
    pub escaped: bool,
}

pub fn iterate<M: PlanarMap + ?Sized>(map: &M, p0: PlanarPoint, steps: usize) -> Orbit {
    let mut points = Vec::with_capacity(steps + 1);
    points.push(p0);
    let mut p = p0;
    let mut escaped = false;
    for _ in 0..steps {
        p = map.eval(p);
        if !p.is_finite() {
            escaped = true;
            break;
        }
        points.push(p);
    }
    Orbit { start: p0, points, escaped }
}

/// `f^q(p)`.
pub fn iterate_n<M: PlanarMap + ?Sized>(map: &M, mut p: PlanarPoint, q: usize) -> PlanarPoint {
    for _ in 0..q {
        p = map.eval(p);
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    ConvergedToOrigin { steps: usize },
    Escaped { steps: usize },
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictParams {
    pub budget: usize,
    pub eps_in: f64,
    pub r_escape: f64,
}

impl Default for VerdictParams {
    fn default() -> Self {
        Self { budget: 10_000, eps_in: 1e-8, r_escape: 1e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub kind: VerdictKind,
    pub budget: usize,
    pub eps_in: f64,
    pub r_escape: f64,
}

pub fn classify_orbit<M: PlanarMap + ?Sized>(
    map: &M,
    p0: PlanarPoint,
    params: VerdictParams,
) -> ConvergenceVerdict {
    assert!(params.eps_in < params.r_escape, "eps_in must be below r_escape");
    let verdict = |kind| ConvergenceVerdict {
        kind,
        budget: params.budget,
        eps_in: params.eps_in,
        r_escape: params.r_escape,
    };
    let mut p = p0;
    for steps in 0..=params.budget {
        if steps > 0 {
            p = map.eval(p);
        }
        if !p.is_finite() {
            return verdict(VerdictKind::Escaped { steps });
        }
        let r = p.norm();
        if r < params.eps_in {
            return verdict(VerdictKind::ConvergedToOrigin { steps });
        }
        if r > params.r_escape {
            return verdict(VerdictKind::Escaped { steps });
        }
    }
    verdict(VerdictKind::Undecided)
}

// ---------------------------------------------------------------- periodic orbits

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub point: PlanarPoint,
    pub period: usize,
    pub orbit: Vec<PlanarPoint>,
    /// Eigenvalues of the derivative of the period map.
    pub multipliers: [Complex64; 2],
    pub residual: f64,
    /// False when some proper divisor of the period already closes up.
    pub minimal: bool,
    pub iterations: usize,
}

impl PeriodicOrbit {
    /// No multiplier within `margin` of the unit circle.
    pub fn is_hyperbolic(&self, margin: f64) -> bool {
        self.multipliers.iter().all(|m| (m.norm() - 1.0).abs() > margin)
    }
}

const NEWTON_MAX_ITERS: usize = 50;

/// Newton's method on `f^q(p) - p` from `guess`.
pub fn find_periodic<M: PlanarMap + ?Sized>(
    map: &M,
    guess: PlanarPoint,
    q: usize,
    tol: f64,
) -> Result<PeriodicOrbit, AnalysisError> {
    if q == 0 {
        return Err(AnalysisError::BadPeriod);
    }
    let defect = |p: PlanarPoint| iterate_n(map, p, q) - p;
    let mut p = guess;
    let mut g = defect(p);
    let mut res = g.norm();
    let mut iterations = 0;
    while res > tol {
        if iterations == NEWTON_MAX_ITERS || !res.is_finite() {
            return Err(AnalysisError::NoConvergence { iterations, residual: res });
        }
        iterations += 1;
        let h = 1e-7 * (1.0 + p.norm());
        let jf = central_difference_jacobian(|x| iterate_n(map, x, q), p, h);
        let a = Jacobian2::new(jf.a - 1.0, jf.b, jf.c, jf.d - 1.0);
        let det = a.det();
        if !det.is_finite() || det.abs() <= 1e-14 * a.max_abs().powi(2).max(f64::MIN_POSITIVE) {
            return Err(AnalysisError::SingularNewton { x: p.x, y: p.y });
        }
        let step = PlanarPoint::new((a.d * g.x - a.b * g.y) / det, (a.a * g.y - a.c * g.x) / det);
        let mut lambda = 1.0;
        loop {
            let cand = p - step.scale(lambda);
            let gc = defect(cand);
            let rc = gc.norm();
            if rc < res || lambda < 1e-6 {
                p = cand;
                g = gc;
                res = rc;
                break;
            }
            lambda *= 0.5;
        }
    }
    let orbit = iterate(map, p, q - 1).points;
    let product = orbit
        .iter()
        .fold(Jacobian2::IDENTITY, |acc, &x| jacobian_or_fd(map, x).mul(&acc));
    let minimal = proper_divisors(q)
        .into_iter()
        .all(|d| iterate_n(map, p, d).dist(p) > 10.0 * tol);
    Ok(PeriodicOrbit {
        point: p,
        period: q,
        orbit,
        multipliers: product.eigenvalues(),
        residual: res,
        minimal,
        iterations,
    })
}

fn proper_divisors(q: usize) -> Vec<usize> {
    (1..q).filter(|d| q.is_multiple_of(*d)).collect()
}

// ---------------------------------------------------------------- equivariance

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub order: u32,
    pub samples: usize,
    pub radius: f64,
    pub max_residual: f64,
    /// Largest `residual / (1 + |p|³)`.
    pub max_weighted: f64,
    pub worst_point: PlanarPoint,
}

/// Max of `|f(R p) - R f(p)|` over seeded points of the disk of `radius`.
pub fn equivariance_residual<M: PlanarMap + ?Sized>(
    map: &M,
    n: SymmetryOrder,
    samples: usize,
    radius: f64,
) -> f64 {
    equivariance_scan(map, n, samples, radius, DEFAULT_SEED).max_residual
}

pub fn equivariance_scan<M: PlanarMap + ?Sized>(
    map: &M,
    n: SymmetryOrder,
    samples: usize,
    radius: f64,
    seed: u64,
) -> EquivarianceReport {
    let g = GroupElement::generator(n);
    let mut rng = seeded_rng(seed);
    let mut report = EquivarianceReport {
        order: n.get(),
        samples,
        radius,
        max_residual: 0.0,
        max_weighted: 0.0,
        worst_point: PlanarPoint::ORIGIN,
    };
    for _ in 0..samples {
        let p = sample_disk(&mut rng, radius);
        let res = map.eval(rotate(p, g)).dist(rotate(map.eval(p), g));
        let weighted = res / (1.0 + p.norm().powi(3));
        if res > report.max_residual {
            report.max_residual = res;
        }
        if weighted > report.max_weighted {
            report.max_weighted = weighted;
            report.worst_point = p;
        }
    }
    report
}

// ---------------------------------------------------------------- rays and sectors

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayReport {
    pub directions: usize,
    pub radii: Vec<f64>,
    pub max_angular_spread: f64,
    pub radii_increasing: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evenly spaced unit directions starting at angle 0.
pub fn directions(count: usize) -> Vec<PlanarPoint> {
    (0..count)
        .map(|i| {
            let t = TAU * i as f64 / count as f64;
            PlanarPoint::new(t.cos(), t.sin())
        })
        .collect()
}

/// Images of `t·v` for each direction `v` and radius `t` should share one
/// angle and have increasing radius.
pub fn ray_image_check<M: PlanarMap + ?Sized>(
    map: &M,
    dirs: &[PlanarPoint],
    radii: &[f64],
) -> RayReport {
    const TOL: f64 = 1e-10;
    let mut spread: f64 = 0.0;
    let mut increasing = true;
    for v in dirs {
        let images: Vec<PlanarPoint> = radii.iter().map(|&t| map.eval(v.scale(t))).collect();
        let a0 = images[0].angle();
        for w in &images {
            spread = spread.max(angle_diff(w.angle(), a0).abs());
        }
        increasing &= images.windows(2).all(|w| w[1].norm() > w[0].norm());
    }
    RayReport {
        directions: dirs.len(),
        radii: radii.to_vec(),
        max_angular_spread: spread,
        radii_increasing: increasing,
        tolerance: TOL,
        pass: spread <= TOL && increasing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorMapReport {
    pub order: u32,
    pub interior_samples: usize,
    pub interior_failures: usize,
    pub boundary_samples: usize,
    pub max_boundary_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Closed sector `j` should land in closed sector `j + 1`, and boundary
/// rays on boundary rays.
pub fn sector_map_check<M: PlanarMap + ?Sized>(
    map: &M,
    n: SymmetryOrder,
    samples: usize,
    max_radius: f64,
    seed: u64,
) -> SectorMapReport {
    const TOL: f64 = 1e-10;
    let width = n.sector_width();
    let mut rng = seeded_rng(seed);
    let mut failures = 0;
    for i in 0..samples {
        let j = (i % n.get() as usize) as f64;
        let r = max_radius * rng.random::<f64>().max(1e-6);
        let t = (j + rng.random::<f64>()) * width;
        let img = map.eval(from_polar(PolarPoint::new(r, t).expect("finite")));
        let rel = angle_diff(img.angle(), (j + 1.0) * width);
        if img.is_origin() || rel < -TOL || rel > width + TOL {
            failures += 1;
        }
    }
    let mut deviation: f64 = 0.0;
    let mut boundary = 0;
    for j in 0..n.get() {
        for i in 1..=16 {
            let r = max_radius * f64::from(i) / 16.0;
            let t = f64::from(j) * width;
            let img = map.eval(from_polar(PolarPoint::new(r, t).expect("finite")));
            deviation = deviation.max(angle_diff(img.angle(), t + width).abs());
            boundary += 1;
        }
    }
    SectorMapReport {
        order: n.get(),
        interior_samples: samples,
        interior_failures: failures,
        boundary_samples: boundary,
        max_boundary_deviation: deviation,
        tolerance: TOL,
        pass: failures == 0 && deviation <= TOL,
    }
}

// ---------------------------------------------------------------- gluing

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub order: u32,
    pub radius: f64,
    pub boundary_angle: f64,
    pub steps: Vec<f64>,
    /// Max entry difference of the two one-sided Jacobians, per step.
    pub mismatch: Vec<f64>,
    /// `sup |Fn(p)| / h` over `|p| = h`, per step.
    pub origin_ratio: Vec<f64>,
    /// Rounding-error bound per step; growth below it is not a failure.
    pub roundoff: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Roundoff bound of the difference quotients at step `h`: the stencils
/// have absolute weight 8 over `2h` per column, doubled for the mismatch.
fn roundoff_floor(fp_norm: f64, h: f64) -> f64 {
    16.0 * f64::EPSILON * (1.0 + fp_norm) / h
}

/// One-sided difference Jacobians of `Fn` on the ray at angle `2π/n`,
/// taken from the sector below and the sector above. Mismatch is
/// `O(h²)` until roundoff takes over.
pub fn boundary_smoothness_check(
    k: SzlenkParams,
    n: SymmetryOrder,
    r: f64,
    steps: &[f64],
) -> SmoothnessReport {
    let f = |p: PlanarPoint| eval_fn(p, k, n);
    let theta = n.sector_width();
    let (s, c) = theta.sin_cos();
    let e_r = PlanarPoint::new(c, s);
    let e_t = PlanarPoint::new(-s, c);
    let p = e_r.scale(r);
    let fp = f(p);
    // columns in the (e_r, e_θ) frame, mapped back to (x, y)
    let to_cartesian = |dr: PlanarPoint, dt: PlanarPoint| {
        Jacobian2::new(
            dr.x * c - dt.x * s,
            dr.x * s + dt.x * c,
            dr.y * c - dt.y * s,
            dr.y * s + dt.y * c,
        )
    };
    let mut mismatch = Vec::with_capacity(steps.len());
    let mut origin_ratio = Vec::with_capacity(steps.len());
    for &h in steps {
        // the ray lies in both closures, so the radial column is central;
        // the angular columns use second-order one-sided quotients
        let radial = (f(p + e_r.scale(h)) - f(p - e_r.scale(h))).scale(0.5 / h);
        let one_sided = |dir: f64| {
            let e = e_t.scale(dir);
            (fp.scale(-3.0) + f(p + e.scale(h)).scale(4.0) - f(p + e.scale(2.0 * h))).scale(dir * 0.5 / h)
        };
        let below_t = one_sided(-1.0);
        let above_t = one_sided(1.0);
        let lower = to_cartesian(radial, below_t);
        let upper = to_cartesian(radial, above_t);
        mismatch.push(lower.max_abs_diff(&upper));

        let ratio = directions(64)
            .into_iter()
            .map(|v| f(v.scale(h)).norm() / h)
            .fold(0.0, f64::max);
        origin_ratio.push(ratio);
    }
    let tolerance = 1e-6 * (1.0 + r * r);
    let last_ok = mismatch.last().is_some_and(|&m| m <= tolerance);
    let roundoff: Vec<f64> = steps.iter().map(|&h| roundoff_floor(fp.norm(), h)).collect();
    let shrinking = mismatch.windows(2).zip(&roundoff[1..]).all(|(w, &floor)| w[1] <= w[0] + floor);
    let origin_ok = steps
        .iter()
        .zip(&origin_ratio)
        .all(|(&h, &q)| q <= k.k() * h * h * (1.0 + 1e-12));
    SmoothnessReport {
        order: n.get(),
        radius: r,
        boundary_angle: theta,
        steps: steps.to_vec(),
        mismatch,
        origin_ratio,
        roundoff,
        tolerance,
        pass: last_ok && shrinking && origin_ok,
    }
}

// ---------------------------------------------------------------- spectra

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Self { xmin: -half_width, xmax: half_width, ymin: -half_width, ymax: half_width }
    }

    /// Grid node `(i, j)` of an `nx × ny` grid including the corners.
    pub fn node(&self, i: usize, j: usize, nx: usize, ny: usize) -> PlanarPoint {
        let lerp = |a: f64, b: f64, t: usize, m: usize| a + (b - a) * t as f64 / (m - 1) as f64;
        PlanarPoint::new(lerp(self.xmin, self.xmax, i, nx), lerp(self.ymin, self.ymax, j, ny))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub max_modulus: f64,
    pub argmax: PlanarPoint,
    pub samples: usize,
    pub region: Region,
    /// Off-axis nodes whose Jacobian has real eigenvalues.
    pub off_axis_real: usize,
}

/// Largest eigenvalue modulus of the Jacobian over an `nx × ny` grid.
pub fn spectral_scan<M: PlanarMap + ?Sized>(
    map: &M,
    region: Region,
    nx: usize,
    ny: usize,
) -> SpectralSample {
    assert!(nx >= 2 && ny >= 2, "grid must be at least 2x2");
    // (modulus, flat index, real-eigenvalue count); ties go to the lower index
    let best = (0..ny)
        .into_par_iter()
        .map(|j| {
            let mut acc = (f64::NEG_INFINITY, usize::MAX, 0usize);
            for i in 0..nx {
                let p = region.node(i, j, nx, ny);
                let jac = jacobian_or_fd(map, p);
                let m = jac.spectral_radius();
                let idx = j * nx + i;
                if m > acc.0 || (m == acc.0 && idx < acc.1) {
                    acc = (m, idx, acc.2);
                }
                if p.x != 0.0 && p.y != 0.0 && jac.eigenvalues()[0].im == 0.0 {
                    acc.2 += 1;
                }
            }
            acc
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, 0),
            |a, b| {
                let pick = if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a };
                (pick.0, pick.1, a.2 + b.2)
            },
        );
    SpectralSample {
        max_modulus: best.0,
        argmax: region.node(best.1 % nx, best.1 / nx, nx, ny),
        samples: nx * ny,
        region,
        off_axis_real: best.2,
    }
}

// ---------------------------------------------------------------- properness

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProperRow {
    pub radius: f64,
    pub min_norm: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperReport {
    pub beta: f64,
    pub theta_samples: usize,
    pub rows: Vec<ProperRow>,
    pub pass: bool,
}

/// `min_θ |g(r, θ)| >= (k/4)·r` for the twist-only unfolding `g`.
pub fn properness_check(
    k: SzlenkParams,
    beta: f64,
    radii: &[f64],
    theta_samples: usize,
) -> ProperReport {
    let u = UnfoldParams { alpha: 0.0, beta, delta: 0.0 };
    let rows: Vec<ProperRow> = radii
        .iter()
        .map(|&r| {
            let min_norm = (0..theta_samples)
                .map(|i| {
                    let t = TAU * i as f64 / theta_samples as f64;
                    eval_g4(PlanarPoint::new(r * t.cos(), r * t.sin()), k, u).norm()
                })
                .fold(f64::INFINITY, f64::min);
            let bound = 0.25 * k.k() * r;
            ProperRow { radius: r, min_norm, bound, pass: min_norm >= bound }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    ProperReport { beta, theta_samples, rows, pass }
}

/// Spectral radius of the unfolding's derivative at the origin, which
/// should be `√(α² + β²)`.
pub fn origin_spectral_radius(k: SzlenkParams, alpha: f64, beta: f64) -> f64 {
    jac_g4(PlanarPoint::ORIGIN, k, UnfoldParams { alpha, beta, delta: 0.0 }).spectral_radius()
}

/// Closed sectors visited by an orbit, stopping before `|p| < 1e-12`.
pub fn sector_sequence<M: PlanarMap + ?Sized>(
    map: &M,
    n: SymmetryOrder,
    p0: PlanarPoint,
    iters: usize,
) -> Vec<Vec<u32>> {
    iterate(map, p0, iters)
        .points
        .iter()
        .take_while(|p| p.norm() >= 1e-12)
        .map(|&p| closed_sectors(p, n).expect("nonzero").iter().map(|s| s.j()).collect())
        .collect()
}

/// Whether some sector of `from` is followed by its successor in `to`.
pub fn advances_one_sector(from: &[u32], to: &[u32], n: SymmetryOrder) -> bool {
    from.iter().any(|&a| to.contains(&(a % n.get() + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{MapSpec, RadialProfile, Rotation};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn k11() -> SzlenkParams {
        SzlenkParams::new(1.1).unwrap()
    }

    fn ord(n: u32) -> SymmetryOrder {
        SymmetryOrder::new(n).unwrap()
    }

    #[test]
    fn iterate_examples() {
        let f4 = MapSpec::f4(k11());
        let o = iterate(&f4, PlanarPoint::ORIGIN, 5);
        assert!(o.points.iter().all(|p| p.is_origin()));
        assert_eq!(o.points.len(), 6);

        let p = k11().periodic_point();
        let o = iterate(&f4, p, 8);
        for (j, q) in o.points.iter().enumerate() {
            let expected = rotate(p, GroupElement::new(j as i64, ord(4)));
            assert!(q.dist(expected) < 1e-13, "step {j}");
        }

        let o = iterate(&f4, PlanarPoint::new(0.5, 0.5), 60);
        assert!(o.points.windows(2).all(|w| w[1].norm() < w[0].norm() || w[1].is_origin()));
        assert!(o.points.last().unwrap().norm() < 1e-8);
    }

    #[test]
    fn iterate_flags_overflow() {
        struct Blow;
        impl PlanarMap for Blow {
            fn eval(&self, p: PlanarPoint) -> PlanarPoint {
                p.scale(1e200)
            }
        }
        let o = iterate(&Blow, PlanarPoint::new(1.0, 0.0), 5);
        assert!(o.escaped);
        assert_eq!(o.points.len(), 2);
    }

    #[test]
    fn classify_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let v = classify_orbit(&f4, PlanarPoint::new(0.5, 0.5), VerdictParams::default());
        assert!(matches!(v.kind, VerdictKind::ConvergedToOrigin { .. }));

        let hn = MapSpec::hn_default(k, ord(5));
        let params = VerdictParams { budget: 500, eps_in: 1e-8, r_escape: 1000.0 };
        let v = classify_orbit(&hn, PlanarPoint::new(100.0, 0.0), params);
        assert!(!matches!(v.kind, VerdictKind::Escaped { .. }));

        // exactly periodic but repelling: keep the budget short
        let params = VerdictParams { budget: 100, ..VerdictParams::default() };
        let v = classify_orbit(&f4, k.periodic_point(), params);
        assert_eq!(v.kind, VerdictKind::Undecided);

        let v = classify_orbit(&f4, PlanarPoint::new(5.0, 0.0), VerdictParams::default());
        assert!(matches!(v.kind, VerdictKind::Escaped { .. }));
    }

    #[test]
    fn periodic_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let orb = find_periodic(&f4, PlanarPoint::new(3.0, 0.1), 4, 1e-12).unwrap();
        assert!(orb.point.dist(PlanarPoint::new(3.16227766, 0.0)) < 1e-8);
        assert!(orb.residual < 1e-12);
        assert!(orb.minimal);
        assert!(orb.is_hyperbolic(1e-6));
        // radial multiplier per step times four, angular one vanishes
        let r2: f64 = 10.0;
        let step = 1.1 * r2 * (3.0 + r2) / ((1.0 + r2) * (1.0 + r2));
        let big = orb.multipliers.iter().map(|m| m.norm()).fold(0.0, f64::max);
        assert_abs_diff_eq!(big, step.powi(4), epsilon = 1e-6);

        let orb = find_periodic(&f4, PlanarPoint::new(0.01, 0.01), 1, 1e-12).unwrap();
        assert!(orb.point.norm() < 1e-6);

        // twist-only unfolding keeps an axis orbit at r² = (1-β)/(k-1+β)
        let beta = 0.05;
        let g4 = MapSpec::g4(k, UnfoldParams { alpha: 0.0, beta, delta: 0.0 });
        let orb = find_periodic(&g4, k.periodic_point(), 4, 1e-12).unwrap();
        let r = ((1.0 - beta) / (0.1 + beta)).sqrt();
        assert!(orb.point.dist(PlanarPoint::new(r, 0.0)) < 1e-10, "{}", orb.point);
        assert!(orb.minimal);

        // asking for period 8 finds the same orbit, flagged non-minimal
        let orb = find_periodic(&f4, PlanarPoint::new(3.0, 0.1), 8, 1e-12).unwrap();
        assert!(!orb.minimal);
        assert_eq!(find_periodic(&f4, PlanarPoint::new(1.0, 1.0), 0, 1e-12), Err(AnalysisError::BadPeriod));
    }

    #[test]
    fn periodic_point_is_stable_under_rerun() {
        let f6 = MapSpec::fn_(k11(), ord(6));
        let a = find_periodic(&f6, PlanarPoint::new(3.0, 0.1), 6, 1e-12).unwrap();
        let b = find_periodic(&f6, a.point, 6, 1e-12).unwrap();
        assert!(a.point.dist(b.point) <= 1e-12);
        assert_eq!(b.iterations, 0);
    }

    #[test]
    fn equivariance_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        assert!(equivariance_residual(&f4, ord(4), 1000, 10.0) <= 1e-12);
        assert!(equivariance_residual(&f4, ord(2), 1000, 10.0) <= 1e-12);
        let f5 = MapSpec::fn_(k, ord(5));
        assert!(equivariance_residual(&f5, ord(4), 1000, 10.0) > 0.1);
        let at_one = f5.eval(rotate(PlanarPoint::new(1.0, 0.0), GroupElement::generator(ord(4))))
            .dist(rotate(f5.eval(PlanarPoint::new(1.0, 0.0)), GroupElement::generator(ord(4))));
        assert!(at_one > 0.1);
    }

    #[test]
    fn ray_examples() {
        let k = k11();
        let radii: Vec<f64> = (1..=20).map(|i| 0.5 * f64::from(i)).collect();
        let e1 = [PlanarPoint::new(1.0, 0.0)];
        let f4 = MapSpec::f4(k);
        for &t in &radii {
            let v = f4.eval(PlanarPoint::new(t, 0.0));
            assert_eq!(v.x, 0.0);
            assert!(v.y > 0.0);
        }
        assert!(ray_image_check(&f4, &directions(64), &radii).pass);
        let f6 = MapSpec::fn_(k, ord(6));
        for &t in &radii {
            let v = f6.eval(PlanarPoint::new(t, 0.0));
            assert_abs_diff_eq!(v.angle(), TAU / 6.0, epsilon = 1e-12);
        }
        assert!(ray_image_check(&f6, &directions(64), &radii).pass);
        let g4 = MapSpec::g4(k, UnfoldParams { alpha: 0.0, beta: 0.05, delta: 0.1 });
        // the twist keeps the axes but bends every other ray
        assert!(ray_image_check(&g4, &e1, &radii).pass);
        let rep = ray_image_check(&g4, &directions(64), &radii);
        assert!(!rep.pass);
        assert!(rep.max_angular_spread > 0.1);
    }

    #[test]
    fn sector_map_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let v = f4.eval(PlanarPoint::new(1.0, 1.0));
        assert_eq!(crate::geometry::sector_of(v, ord(4)).unwrap().j(), 2);
        let v = f4.eval(PlanarPoint::new(2.0, 0.0));
        assert_eq!(v, PlanarPoint::new(-0.0, 1.1 * 8.0 / 5.0));
        assert!(sector_map_check(&f4, ord(4), 4000, 10.0, DEFAULT_SEED).pass);
        let g4 = MapSpec::g4(k, UnfoldParams { alpha: 0.0, beta: 0.05, delta: 0.01 });
        assert!(sector_map_check(&g4, ord(4), 4000, 10.0, DEFAULT_SEED).pass);
        for n in 2..=8 {
            let fnn = MapSpec::fn_(k, ord(n));
            assert!(sector_map_check(&fnn, ord(n), 2000, 10.0, DEFAULT_SEED).pass, "n={n}");
        }
        // a strong radial contraction breaks the sector advance
        let bad = MapSpec::g4(k, UnfoldParams { alpha: 0.9, beta: 0.0, delta: 0.0 });
        assert!(!sector_map_check(&bad, ord(4), 1000, 10.0, DEFAULT_SEED).pass);
    }

    #[test]
    fn smoothness_examples() {
        let k = k11();
        let steps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let rep = boundary_smoothness_check(k, ord(6), 1.0, &steps);
        assert!(rep.pass, "{rep:?}");
        let rep4 = boundary_smoothness_check(k, ord(4), 1.0, &steps);
        assert!(rep4.pass);
        let rep5 = boundary_smoothness_check(k, ord(5), 1.0, &[1e-3]);
        assert!(rep5.origin_ratio[0] <= 1.2e-6);
    }

    #[test]
    fn spectral_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let s = spectral_scan(&f4, Region::square(20.0), 101, 101);
        assert!(s.max_modulus < 1.1 * 3f64.sqrt() / 2.0);
        for i in 0..50 {
            let x = -20.0 + 0.8 * f64::from(i);
            assert_eq!(f4.jacobian(PlanarPoint::new(x, 0.0)).spectral_radius(), 0.0);
            assert_eq!(f4.jacobian(PlanarPoint::new(0.0, x)).spectral_radius(), 0.0);
        }
        let g4 = MapSpec::g4(k, UnfoldParams { alpha: 0.0, beta: 0.02, delta: 0.0 });
        assert!(spectral_scan(&g4, Region::square(20.0), 201, 201).max_modulus < 1.0);
    }

    #[test]
    fn spectral_scan_is_partition_independent() {
        let f4 = MapSpec::f4(k11());
        let a = spectral_scan(&f4, Region::square(5.0), 64, 64);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| spectral_scan(&f4, Region::square(5.0), 64, 64));
        assert_eq!(a, b);
    }

    #[test]
    fn properness_examples() {
        let k = k11();
        let rep = properness_check(k, 0.05, &[10.0, 100.0], 360);
        assert!(rep.rows[0].min_norm >= 2.75);
        assert!(rep.rows[1].min_norm >= 27.5);
        assert!(rep.pass);
        assert!(properness_check(k, 0.0, &[10.0], 360).rows[0].min_norm >= 2.75);
    }

    #[test]
    fn origin_radius_is_modulus_of_linear_part() {
        let k = k11();
        assert_abs_diff_eq!(origin_spectral_radius(k, 0.3, 0.4), 0.5, epsilon = 1e-15);
        assert!(origin_spectral_radius(k, 0.6, 0.8) >= 1.0 - 1e-15);
    }

    #[test]
    fn rigid_rotation_never_settles() {
        let rot = Rotation(GroupElement::generator(ord(5)));
        let v = classify_orbit(&rot, PlanarPoint::new(1.0, 0.0), VerdictParams { budget: 50, ..Default::default() });
        assert_eq!(v.kind, VerdictKind::Undecided);
    }

    proptest! {
        #[test]
        fn small_starts_converge(r in 0.0..0.9f64, t in 0.0..TAU, n in 2u32..9) {
            let spec = MapSpec::fn_(k11(), ord(n));
            let p = PlanarPoint::new(r * t.cos(), r * t.sin());
            let v = classify_orbit(&spec, p, VerdictParams { budget: 200, ..Default::default() });
            let converged = matches!(v.kind, VerdictKind::ConvergedToOrigin { .. });
            prop_assert!(converged);
        }

        #[test]
        fn orbits_advance_one_sector(r in 0.5..20.0f64, t in 0.0..TAU, n in 2u32..9) {
            let n = ord(n);
            let spec = MapSpec::fn_(k11(), n);
            let p = PlanarPoint::new(r * t.cos(), r * t.sin());
            let seq = sector_sequence(&spec, n, p, 12);
            for w in seq.windows(2) {
                prop_assert!(advances_one_sector(&w[0], &w[1], n), "{:?}", seq);
            }
        }

        #[test]
        fn f4_spectrum_inside_unit_disk(x in -50.0..50.0f64, y in -50.0..50.0f64, k in 1.0001..1.1547f64) {
            let k = SzlenkParams::new(k).unwrap();
            let m = MapSpec::f4(k).jacobian(PlanarPoint::new(x, y)).spectral_radius();
            prop_assert!(m < k.k() * 3f64.sqrt() / 2.0 + 1e-12);
            prop_assert!(m < 1.0);
        }

        #[test]
        fn dissipative_profile_never_escapes(r in 0.0..100.0f64, t in 0.0..TAU, n in 2u32..9) {
            let k = k11();
            let spec = MapSpec::hn(k, ord(n), RadialProfile::default_for(k)).unwrap();
            let p = PlanarPoint::new(r * t.cos(), r * t.sin());
            let v = classify_orbit(&spec, p, VerdictParams { budget: 300, eps_in: 1e-8, r_escape: 1e3 });
            let escaped = matches!(v.kind, VerdictKind::Escaped { .. });
            prop_assert!(!escaped);
        }
    }
}
