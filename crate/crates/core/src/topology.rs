//! Basin rasters, image curves of circles, and rotation numbers from
//! lifted orbit angles.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{advances_one_sector, classify_orbit, sector_sequence, Region, VerdictKind, VerdictParams};
use crate::geometry::{angle_lift_forward, PlanarPoint, SymmetryOrder};
use crate::maps::{eval_f4, PlanarMap, SzlenkParams};

/// Largest denominator accepted for a rotation number.
pub const MAX_DENOMINATOR: u64 = 64;

/// Fewest orbit points that give a rotation estimate.
pub const MIN_USABLE_ITERATES: usize = 8;

/// Orbit points closer to the origin than this carry no usable angle.
pub const ANGLE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("orbit reached origin too fast ({usable} usable iterates, need {MIN_USABLE_ITERATES})")]
    OrbitTooShort { usable: usize },
    #[error("start point must not be the origin")]
    StartAtOrigin,
    #[error("raster dimensions must be positive")]
    EmptyRaster,
}

// ---------------------------------------------------------------- basins

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinCell {
    Converged,
    Escaped,
    Undecided,
}

impl BasinCell {
    /// Gray level used in PGM output.
    pub fn gray(self) -> u8 {
        match self {
            BasinCell::Converged => 255,
            BasinCell::Escaped => 0,
            BasinCell::Undecided => 128,
        }
    }
}

impl From<VerdictKind> for BasinCell {
    fn from(v: VerdictKind) -> Self {
        match v {
            VerdictKind::ConvergedToOrigin { .. } => BasinCell::Converged,
            VerdictKind::Escaped { .. } => BasinCell::Escaped,
            VerdictKind::Undecided => BasinCell::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinRaster {
    pub window: Region,
    pub width: usize,
    pub height: usize,
    pub params: VerdictParams,
    /// Row-major, row 0 at the top (largest y).
    pub cells: Vec<BasinCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BasinCounts {
    pub converged: usize,
    pub escaped: usize,
    pub undecided: usize,
}

impl BasinRaster {
    pub fn cell(&self, row: usize, col: usize) -> BasinCell {
        self.cells[row * self.width + col]
    }

    pub fn counts(&self) -> BasinCounts {
        let mut c = BasinCounts::default();
        for cell in &self.cells {
            match cell {
                BasinCell::Converged => c.converged += 1,
                BasinCell::Escaped => c.escaped += 1,
                BasinCell::Undecided => c.undecided += 1,
            }
        }
        c
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.cells.iter().map(|c| c.gray()));
        out
    }
}

/// Center of pixel `(row, col)`.
pub fn pixel_center(window: &Region, width: usize, height: usize, row: usize, col: usize) -> PlanarPoint {
    let dx = (window.xmax - window.xmin) / width as f64;
    let dy = (window.ymax - window.ymin) / height as f64;
    PlanarPoint::new(
        window.xmin + (col as f64 + 0.5) * dx,
        window.ymax - (row as f64 + 0.5) * dy,
    )
}

pub fn basin_raster<M: PlanarMap + ?Sized>(
    map: &M,
    window: Region,
    width: usize,
    height: usize,
    params: VerdictParams,
) -> Result<BasinRaster, TopologyError> {
    if width == 0 || height == 0 {
        return Err(TopologyError::EmptyRaster);
    }
    let cells = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..width).map(move |col| {
                let p = pixel_center(&window, width, height, row, col);
                BasinCell::from(classify_orbit(map, p, params).kind)
            })
        })
        .collect();
    Ok(BasinRaster { window, width, height, params, cells })
}

// ---------------------------------------------------------------- curves

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub thetas: Vec<f64>,
    pub points: Vec<PlanarPoint>,
}

/// Images of `samples` equally spaced points of the circle of `radius`.
pub fn image_curve<M: PlanarMap + ?Sized>(map: &M, radius: f64, samples: usize) -> CurveSample {
    assert!(samples >= 4, "need at least 4 samples");
    let thetas: Vec<f64> = (0..samples).map(|i| TAU * i as f64 / samples as f64).collect();
    let points = thetas
        .iter()
        .map(|t| map.eval(PlanarPoint::new(radius * t.cos(), radius * t.sin())))
        .collect();
    CurveSample { thetas, points }
}

/// `(k/2)(-sin³θ, cos³θ)`, the image of the unit circle under `F4`.
pub fn astroid(k: SzlenkParams, theta: f64) -> PlanarPoint {
    let (s, c) = theta.sin_cos();
    PlanarPoint::new(-0.5 * k.k() * s * s * s, 0.5 * k.k() * c * c * c)
}

/// Speed `|γ'(θ)|` of the image curve at `theta`, by central differences.
pub fn curve_speed<M: PlanarMap + ?Sized>(map: &M, radius: f64, theta: f64, h: f64) -> f64 {
    let at = |t: f64| map.eval(PlanarPoint::new(radius * t.cos(), radius * t.sin()));
    (at(theta + h) - at(theta - h)).norm() / (2.0 * h)
}

/// `det[γ(θ); γ'(θ)] = (3k²/4) sin²θ cos²θ` for the astroid `γ`.
pub fn transversality_det(k: SzlenkParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    0.75 * k.k() * k.k() * s * s * c * c
}

/// The same determinant with `γ` taken from `F4` on the unit circle and
/// `γ'` from central differences.
pub fn transversality_det_numeric(k: SzlenkParams, theta: f64, h: f64) -> f64 {
    let gamma = |t: f64| eval_f4(PlanarPoint::new(t.cos(), t.sin()), k);
    let g = gamma(theta);
    let dg = (gamma(theta + h) - gamma(theta - h)).scale(0.5 / h);
    g.x * dg.y - g.y * dg.x
}

// ---------------------------------------------------------------- rotation

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub slope: f64,
    /// `(numerator, denominator)` in lowest terms.
    pub rational: (u64, u64),
    pub iterates_used: usize,
}

/// Mean counter-clockwise turn per iterate over `2π`, from the lifted
/// angles of the orbit while it stays away from the origin.
pub fn estimate_rotation<M: PlanarMap + ?Sized>(
    map: &M,
    p0: PlanarPoint,
    max_iters: usize,
) -> Result<RotationEstimate, TopologyError> {
    if p0.norm() <= ANGLE_FLOOR {
        return Err(TopologyError::StartAtOrigin);
    }
    let mut thetas = Vec::with_capacity(max_iters + 1);
    let mut p = p0;
    for i in 0..=max_iters {
        if i > 0 {
            p = map.eval(p);
        }
        if !p.is_finite() || p.norm() <= ANGLE_FLOOR {
            break;
        }
        thetas.push(p.angle());
    }
    let usable = thetas.len();
    if usable < MIN_USABLE_ITERATES {
        return Err(TopologyError::OrbitTooShort { usable });
    }
    let lift = angle_lift_forward(&thetas);
    let steps = (usable - 1) as f64;
    let slope = ((lift[usable - 1] - lift[0]) / (TAU * steps)).max(0.0);
    Ok(RotationEstimate { slope, rational: best_rational(slope, MAX_DENOMINATOR), iterates_used: usable })
}

/// Closest fraction to `x >= 0` with denominator at most `max_den`, from the
/// continued-fraction convergents and the last admissible semiconvergent.
pub fn best_rational(x: f64, max_den: u64) -> (u64, u64) {
    assert!(x >= 0.0 && x.is_finite() && max_den >= 1);
    // convergents h/k, starting from 0/1 and 1/0
    let (mut h0, mut k0, mut h1, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut rest = x;
    loop {
        let a = rest.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let k2 = a.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            // largest semiconvergent that still fits
            let t = (max_den - k0) / k1;
            let (hs, ks) = (t * h1 + h0, t * k1 + k0);
            if ks > 0 && (hs as f64 / ks as f64 - x).abs() < (h1 as f64 / k1 as f64 - x).abs() {
                return reduce(hs, ks);
            }
            break;
        }
        let h2 = a * h1 + h0;
        (h0, k0, h1, k1) = (h1, k1, h2, k2);
        let frac = rest - a as f64;
        if frac < 1e-12 {
            break;
        }
        rest = 1.0 / frac;
    }
    reduce(h1, k1)
}

fn reduce(p: u64, q: u64) -> (u64, u64) {
    let g = num_integer::gcd(p, q).max(1);
    (p / g, q / g)
}

// ---------------------------------------------------------------- sectors

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorCycleReport {
    pub order: u32,
    /// Closed sectors of each recorded orbit point.
    pub sectors: Vec<Vec<u32>>,
    pub steps_checked: usize,
    pub pass: bool,
}

/// The orbit should move one sector forward at every step.
pub fn sector_cycle_check<M: PlanarMap + ?Sized>(
    map: &M,
    n: SymmetryOrder,
    p0: PlanarPoint,
    iters: usize,
) -> Result<SectorCycleReport, TopologyError> {
    if p0.is_origin() {
        return Err(TopologyError::StartAtOrigin);
    }
    let sectors = sector_sequence(map, n, p0, iters);
    let pass = sectors.windows(2).all(|w| advances_one_sector(&w[0], &w[1], n));
    Ok(SectorCycleReport {
        order: n.get(),
        steps_checked: sectors.len().saturating_sub(1),
        sectors,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GroupElement;
    use crate::maps::{MapSpec, Rotation};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn k11() -> SzlenkParams {
        SzlenkParams::new(1.1).unwrap()
    }

    fn ord(n: u32) -> SymmetryOrder {
        SymmetryOrder::new(n).unwrap()
    }

    #[test]
    fn basin_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let params = VerdictParams { budget: 200, ..Default::default() };
        let r = basin_raster(&f4, Region::square(0.9), 24, 24, params).unwrap();
        assert_eq!(r.counts().converged, 24 * 24);

        let hn = MapSpec::hn_default(k, ord(5));
        let params = VerdictParams { budget: 200, eps_in: 1e-8, r_escape: 1e3 };
        let r = basin_raster(&hn, Region::square(20.0), 32, 32, params).unwrap();
        assert_eq!(r.counts().escaped, 0);

        // one pixel centered on the periodic point
        let p = k.periodic_point();
        let win = Region { xmin: p.x - 0.5, xmax: p.x + 0.5, ymin: -0.5, ymax: 0.5 };
        assert_eq!(pixel_center(&win, 1, 1, 0, 0), p);
        let params = VerdictParams { budget: 100, ..Default::default() };
        let r = basin_raster(&f4, win, 1, 1, params).unwrap();
        assert_eq!(r.cells, vec![BasinCell::Undecided]);
        assert!(basin_raster(&f4, win, 0, 1, params).is_err());
    }

    #[test]
    fn pixel_layout_and_pgm() {
        let win = Region { xmin: 0.0, xmax: 4.0, ymin: 0.0, ymax: 2.0 };
        assert_eq!(pixel_center(&win, 4, 2, 0, 0), PlanarPoint::new(0.5, 1.5));
        assert_eq!(pixel_center(&win, 4, 2, 1, 3), PlanarPoint::new(3.5, 0.5));
        let raster = BasinRaster {
            window: win,
            width: 2,
            height: 1,
            params: VerdictParams::default(),
            cells: vec![BasinCell::Escaped, BasinCell::Undecided],
        };
        assert_eq!(raster.to_pgm(), b"P5\n2 1\n255\n\x00\x80".to_vec());
    }

    #[test]
    fn basin_is_partition_independent() {
        let spec = MapSpec::fn_(k11(), ord(3));
        let params = VerdictParams { budget: 150, eps_in: 1e-8, r_escape: 1e4 };
        let a = basin_raster(&spec, Region::square(5.0), 40, 30, params).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| basin_raster(&spec, Region::square(5.0), 40, 30, params).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn curve_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let c = image_curve(&f4, 1.0, 4);
        assert_abs_diff_eq!(c.points[0].x, 0.0);
        assert_abs_diff_eq!(c.points[0].y, 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(c.points[1].x, -0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(c.points[1].y, 0.0, epsilon = 1e-15);
        let c = image_curve(&f4, 1.0, 360);
        for (t, p) in c.thetas.iter().zip(&c.points) {
            assert!(p.dist(astroid(k, *t)) <= 1e-12);
        }

        let f5 = MapSpec::fn_(k, ord(5));
        for m in 0..5 {
            let cusp = TAU * f64::from(m) / 5.0;
            assert!(curve_speed(&f5, 1.0, cusp, 1e-5) < 1e-4, "m={m}");
            assert!(curve_speed(&f5, 1.0, cusp + TAU / 10.0, 1e-5) > 0.1);
        }
    }

    #[test]
    fn transversality_examples() {
        let k = k11();
        assert_eq!(transversality_det(k, 0.0), 0.0);
        assert_abs_diff_eq!(transversality_det(k, FRAC_PI_4), 0.226875, epsilon = 1e-12);
        assert_abs_diff_eq!(transversality_det(k, FRAC_PI_2), 0.0, epsilon = 1e-30);
        for i in 0..100 {
            let t = 0.0629 * f64::from(i);
            let a = transversality_det(k, t);
            assert_abs_diff_eq!(a, transversality_det_numeric(k, t, 1e-5), epsilon = 1e-8);
        }
    }

    #[test]
    fn rotation_examples() {
        let k = k11();
        let rot = Rotation(GroupElement::generator(ord(5)));
        let e = estimate_rotation(&rot, PlanarPoint::new(0.3, -1.2), 50).unwrap();
        assert_abs_diff_eq!(e.slope, 0.2, epsilon = 1e-12);
        assert_eq!(e.rational, (1, 5));

        let f4 = MapSpec::f4(k);
        let e = estimate_rotation(&f4, PlanarPoint::new(2.0, 0.0), 200).unwrap();
        assert_eq!(e.rational, (1, 4));
        assert!(e.iterates_used >= MIN_USABLE_ITERATES);

        let f6 = MapSpec::fn_(k, ord(6));
        let e = estimate_rotation(&f6, PlanarPoint::new(2.0, 0.0), 200).unwrap();
        assert_eq!(e.rational, (1, 6));
        assert_eq!(format!("{:.6}", e.slope), "0.166667");

        let err = estimate_rotation(&f4, PlanarPoint::new(0.1, 0.1), 200).unwrap_err();
        assert!(matches!(err, TopologyError::OrbitTooShort { .. }));
        assert_eq!(estimate_rotation(&f4, PlanarPoint::ORIGIN, 10), Err(TopologyError::StartAtOrigin));
    }

    #[test]
    fn best_rational_examples() {
        assert_eq!(best_rational(0.25, 64), (1, 4));
        assert_eq!(best_rational(1.0 / 6.0 + 1e-4, 64), (1, 6));
        assert_eq!(best_rational(0.0, 64), (0, 1));
        assert_eq!(best_rational(std::f64::consts::PI - 3.0, 64), (9, 64));
        assert_eq!(best_rational(std::f64::consts::PI - 3.0, 200), (16, 113));
        assert_eq!(best_rational(0.4, 2), (1, 2));
    }

    #[test]
    fn sector_cycle_examples() {
        let k = k11();
        let f4 = MapSpec::f4(k);
        let rep = sector_cycle_check(&f4, ord(4), PlanarPoint::new(1.0, 1.0), 4).unwrap();
        assert!(rep.pass);
        let firsts: Vec<u32> = rep.sectors.iter().map(|s| s[0]).collect();
        assert_eq!(firsts, vec![1, 2, 3, 4]);
        let rep = sector_cycle_check(&f4, ord(4), PlanarPoint::new(2.5, 0.5), 8).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.steps_checked, 8);
        assert!(rep.sectors[8].contains(&1));

        let f6 = MapSpec::fn_(k, ord(6));
        let rep = sector_cycle_check(&f6, ord(6), k.periodic_point(), 12).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.sectors[0], rep.sectors[6]);
        assert_eq!(rep.steps_checked, 12);

        for n in 2..=8 {
            let hn = MapSpec::hn_default(k, ord(n));
            let rep = sector_cycle_check(&hn, ord(n), PlanarPoint::new(7.0, 3.0), 50).unwrap();
            assert!(rep.pass, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn astroid_is_quarter_turn_symmetric(t in 0.0..TAU) {
            let k = k11();
            let g = GroupElement::generator(ord(4));
            let a = crate::geometry::rotate(astroid(k, t), g);
            let b = eval_f4(PlanarPoint::new((t + FRAC_PI_2).cos(), (t + FRAC_PI_2).sin()), k);
            prop_assert!(a.dist(b) <= 1e-12);
        }

        #[test]
        fn transversal_off_the_axes(t in 0.0..TAU) {
            let near_axis = (t / FRAC_PI_2 - (t / FRAC_PI_2).round()).abs() < 1e-6;
            prop_assume!(!near_axis);
            prop_assert!(transversality_det(k11(), t) > 0.0);
        }

        #[test]
        fn best_rational_is_best(x in 0.0..1.0f64, q in 1u64..65) {
            let (p0, q0) = best_rational(x, 64);
            prop_assert!(q0 <= 64);
            let err = (p0 as f64 / q0 as f64 - x).abs();
            let p = (x * q as f64).round();
            prop_assert!(err <= (p / q as f64 - x).abs() + 1e-15);
        }
    }
}
