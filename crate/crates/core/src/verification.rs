//! The numbered acceptance criteria as named checks. The CLI `verify`
//! command and the acceptance test both run these.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{
    boundary_smoothness_check, classify_orbit, equivariance_residual, equivariance_scan, find_periodic,
    origin_spectral_radius, properness_check, sample_annulus, sample_disk, seeded_rng, spectral_scan, Region,
    VerdictKind, VerdictParams,
};
use crate::geometry::{PlanarPoint, SymmetryOrder};
use crate::maps::{jac_f4, jac_fn, SzlenkParams, UnfoldParams};
use crate::maps::MapSpec;
use crate::singularity::{
    build_q, cleared_tangent_generators, codimension_check, verify_invariant_relation, EqVectorField, Generator,
    InvMonomial, TangentSource,
};
use crate::topology::{astroid, basin_raster, estimate_rotation, image_curve, transversality_det};

/// One named check with the parameters and tolerance it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub criterion: u8,
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub statistic: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(criterion: Criterion, name: &str, statistic: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            criterion: criterion.number(),
            name: name.to_string(),
            parameters: BTreeMap::new(),
            statistic,
            tolerance,
            pass,
            detail: String::new(),
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Equivariance,
    PeriodicOrbit,
    LocalAttractor,
    EigenvalueBound,
    Unfolding,
    Properness,
    Smoothness,
    Astroid,
    Rotation,
    Dissipativity,
    Singularity,
    NegativeControl,
}

impl Criterion {
    pub const ALL: [Criterion; 12] = [
        Criterion::Equivariance,
        Criterion::PeriodicOrbit,
        Criterion::LocalAttractor,
        Criterion::EigenvalueBound,
        Criterion::Unfolding,
        Criterion::Properness,
        Criterion::Smoothness,
        Criterion::Astroid,
        Criterion::Rotation,
        Criterion::Dissipativity,
        Criterion::Singularity,
        Criterion::NegativeControl,
    ];

    pub fn number(self) -> u8 {
        Criterion::ALL.iter().position(|c| *c == self).expect("listed") as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Equivariance => "equivariance",
            Criterion::PeriodicOrbit => "periodic-orbit",
            Criterion::LocalAttractor => "local-attractor",
            Criterion::EigenvalueBound => "eigenvalue-bound",
            Criterion::Unfolding => "unfolding",
            Criterion::Properness => "properness",
            Criterion::Smoothness => "smoothness",
            Criterion::Astroid => "astroid",
            Criterion::Rotation => "rotation",
            Criterion::Dissipativity => "dissipativity",
            Criterion::Singularity => "singularity",
            Criterion::NegativeControl => "negative-control",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;

    /// Accepts the kebab-case name or the criterion number.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(i) = s.parse::<usize>() {
            return Criterion::ALL.get(i.wrapping_sub(1)).copied().ok_or_else(|| format!("no criterion {i}"));
        }
        Criterion::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown check '{s}'"))
    }
}

/// Inputs shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub k: SzlenkParams,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            k: SzlenkParams::new(SzlenkParams::DEFAULT_K).expect("default k"),
            seed: crate::analysis::DEFAULT_SEED,
        }
    }
}

fn order(n: u32) -> SymmetryOrder {
    SymmetryOrder::new(n).expect("n >= 2")
}

fn orders(range: impl IntoIterator<Item = u32>) -> Vec<SymmetryOrder> {
    range.into_iter().map(order).collect()
}

fn list<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub const EQUIVARIANCE_TOL: f64 = 1e-12;
pub const PERIODIC_POINT_TOL: f64 = 1e-10;
pub const NEWTON_TOL: f64 = 1e-12;
pub const HYPERBOLIC_MARGIN: f64 = 1e-6;
pub const ORIGIN_JAC_TOL: f64 = 1e-14;
pub const AXIS_EIGEN_TOL: f64 = 1e-14;
pub const CONTINUATION_TOL: f64 = 1e-10;
pub const SMOOTHNESS_TOL: f64 = 1e-6;
pub const ASTROID_TOL: f64 = 1e-12;
pub const ROTATION_TOL: f64 = 0.01;
pub const NEGATIVE_CONTROL_MIN: f64 = 0.1;

/// Unfolding parameters `β = 0.01, 0.02, ..., 0.1`.
pub fn beta_grid() -> Vec<f64> {
    (1..=10).map(|i| f64::from(i) / 100.0).collect()
}

/// Starts for the rotation-number estimates. Apart from the axis point
/// they lie outside the basin of the origin, near the ray `θ = 0`, so
/// the orbit supplies all `ROTATION_ITERS` iterates.
pub const ROTATION_STARTS: [(f64, f64); 5] = [(2.0, 0.0), (4.0, 0.5), (5.0, 1.0), (6.0, -0.5), (10.0, 0.1)];
pub const ROTATION_ITERS: usize = 200;

pub fn run_criterion(c: Criterion, cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    match c {
        Criterion::Equivariance => vec![check_equivariance(cfg)],
        Criterion::PeriodicOrbit => vec![check_periodic_orbit(cfg)],
        Criterion::LocalAttractor => check_local_attractor(cfg),
        Criterion::EigenvalueBound => check_eigenvalue_bound(cfg),
        Criterion::Unfolding => check_unfolding(cfg),
        Criterion::Properness => vec![check_properness(cfg)],
        Criterion::Smoothness => vec![check_smoothness(cfg)],
        Criterion::Astroid => check_astroid(cfg),
        Criterion::Rotation => vec![check_rotation(cfg)],
        Criterion::Dissipativity => check_dissipativity(cfg),
        Criterion::Singularity => check_singularity(),
        Criterion::NegativeControl => vec![check_negative_control(cfg)],
    }
}

pub fn run_suite(criteria: &[Criterion], cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    criteria.iter().flat_map(|c| run_criterion(*c, cfg)).collect()
}

pub fn check_equivariance(cfg: &SuiteConfig) -> CheckOutcome {
    let ns = orders(2..=8);
    let (samples, radius) = (10_000, 10.0);
    let mut worst = 0.0f64;
    let mut worst_n = 0;
    for &n in &ns {
        let rep = equivariance_scan(&MapSpec::fn_(cfg.k, n), n, samples, radius, cfg.seed);
        if rep.max_weighted >= worst {
            worst = rep.max_weighted;
            worst_n = n.get();
        }
    }
    CheckOutcome::new(Criterion::Equivariance, "equivariance", worst, EQUIVARIANCE_TOL, worst <= EQUIVARIANCE_TOL)
        .param("n", list(&ns.iter().map(|n| n.get()).collect::<Vec<_>>()))
        .param("k", cfg.k.k())
        .param("samples", samples)
        .param("radius", radius)
        .param("seed", cfg.seed)
        .param("weight", "1+|p|^3")
        .detail(format!("worst n={worst_n}"))
}

pub fn check_periodic_orbit(cfg: &SuiteConfig) -> CheckOutcome {
    let guess = PlanarPoint::new(3.0, 0.1);
    let target = cfg.k.periodic_point();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in orders(2..=8) {
        let map = MapSpec::fn_(cfg.k, n);
        match find_periodic(&map, guess, n.get() as usize, NEWTON_TOL) {
            Ok(orb) => {
                let err = orb.point.dist(target);
                worst = worst.max(err);
                if err > PERIODIC_POINT_TOL || !orb.minimal || !orb.is_hyperbolic(HYPERBOLIC_MARGIN) {
                    failures.push(format!(
                        "n={} err={err:.3e} minimal={} |mu|={:.6},{:.6}",
                        n.get(),
                        orb.minimal,
                        orb.multipliers[0].norm(),
                        orb.multipliers[1].norm()
                    ));
                }
            }
            Err(e) => {
                worst = f64::INFINITY;
                failures.push(format!("n={}: {e}", n.get()));
            }
        }
    }
    let pass = failures.is_empty();
    CheckOutcome::new(Criterion::PeriodicOrbit, "periodic-orbit", worst, PERIODIC_POINT_TOL, pass)
        .param("n", "2..8")
        .param("guess", guess)
        .param("newton_tol", NEWTON_TOL)
        .param("hyperbolic_margin", HYPERBOLIC_MARGIN)
        .detail(failures.join("; "))
}

pub fn check_local_attractor(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let mut jac_max = jac_f4(PlanarPoint::ORIGIN, cfg.k).max_abs();
    for n in orders(2..=8) {
        jac_max = jac_max.max(jac_fn(PlanarPoint::ORIGIN, cfg.k, n).max_abs());
    }
    let jac = CheckOutcome::new(Criterion::LocalAttractor, "origin-jacobian", jac_max, ORIGIN_JAC_TOL, jac_max <= ORIGIN_JAC_TOL)
        .param("maps", "f4,fn n=2..8");

    let params = VerdictParams { budget: 200, ..VerdictParams::default() };
    let (samples, radius) = (1000, 0.9);
    let mut maps = vec![MapSpec::f4(cfg.k)];
    maps.extend(orders(2..=8).into_iter().map(|n| MapSpec::fn_(cfg.k, n)));
    let mut failed = 0usize;
    let mut slowest = 0usize;
    for map in &maps {
        let mut rng = seeded_rng(cfg.seed);
        for _ in 0..samples {
            let p = sample_disk(&mut rng, radius);
            match classify_orbit(map, p, params).kind {
                VerdictKind::ConvergedToOrigin { steps } => slowest = slowest.max(steps),
                _ => failed += 1,
            }
        }
    }
    let conv = CheckOutcome::new(Criterion::LocalAttractor, "local-convergence", failed as f64, 0.0, failed == 0)
        .param("maps", "f4,fn n=2..8")
        .param("samples", samples)
        .param("radius", radius)
        .param("budget", params.budget)
        .param("eps_in", params.eps_in)
        .param("r_escape", params.r_escape)
        .param("seed", cfg.seed)
        .detail(format!("slowest convergence {slowest} steps"));
    vec![jac, conv]
}

pub fn check_eigenvalue_bound(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let map = MapSpec::f4(cfg.k);
    let region = Region::square(20.0);
    let grid = 1000;
    let s = spectral_scan(&map, region, grid, grid);
    let bound = cfg.k.k() * 3f64.sqrt() / 2.0;
    let scan = CheckOutcome::new(Criterion::EigenvalueBound, "eigenvalue-bound", s.max_modulus, bound, s.max_modulus < bound)
        .param("region", "[-20,20]^2")
        .param("grid", format!("{grid}x{grid}"))
        .param("k", cfg.k.k())
        .detail(format!("argmax {} off-axis real-eigenvalue nodes {}", s.argmax, s.off_axis_real));

    // the grid has an even node count, so the axes are probed separately
    let mut axis_max = 0.0f64;
    for i in 0..grid {
        let t = region.xmin + (region.xmax - region.xmin) * i as f64 / (grid - 1) as f64;
        for p in [PlanarPoint::new(t, 0.0), PlanarPoint::new(0.0, t)] {
            axis_max = axis_max.max(map.jacobian(p).spectral_radius());
        }
    }
    let axes = CheckOutcome::new(Criterion::EigenvalueBound, "eigenvalue-axes", axis_max, AXIS_EIGEN_TOL, axis_max <= AXIS_EIGEN_TOL)
        .param("samples_per_axis", grid);
    vec![scan, axes]
}

pub fn check_unfolding(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let betas = beta_grid();
    let region = Region::square(20.0);
    let grid = 1000;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for &beta in &betas {
        let g = MapSpec::g4(cfg.k, UnfoldParams { alpha: 0.0, beta, delta: 0.0 });
        let s = spectral_scan(&g, region, grid, grid);
        worst = worst.max(s.max_modulus);
        if s.max_modulus >= 1.0 {
            bad.push(format!("beta={beta}: {:.6} at {}", s.max_modulus, s.argmax));
        }
    }
    let spectral = CheckOutcome::new(Criterion::Unfolding, "unfolding-spectral", worst, 1.0, worst < 1.0)
        .param("beta", list(&betas))
        .param("alpha", 0.0)
        .param("delta", 0.0)
        .param("region", "[-20,20]^2")
        .param("grid", format!("{grid}x{grid}"))
        .detail(bad.join("; "));

    let mut guess = cfg.k.periodic_point();
    let mut worst_res = 0.0f64;
    let mut notes = Vec::new();
    for &beta in &betas {
        let g = MapSpec::g4(cfg.k, UnfoldParams { alpha: 0.0, beta, delta: 0.0 });
        match find_periodic(&g, guess, 4, NEWTON_TOL) {
            Ok(orb) => {
                worst_res = worst_res.max(orb.residual);
                guess = orb.point;
            }
            Err(e) => {
                worst_res = f64::INFINITY;
                notes.push(format!("beta={beta}: {e}"));
            }
        }
    }
    let cont = CheckOutcome::new(Criterion::Unfolding, "unfolding-continuation", worst_res, CONTINUATION_TOL, worst_res <= CONTINUATION_TOL)
        .param("beta", list(&betas))
        .param("period", 4)
        .param("newton_tol", NEWTON_TOL)
        .detail(if notes.is_empty() { format!("last point {guess}") } else { notes.join("; ") });

    // derivative at the origin has eigenvalues α ± iβ
    let mut worst_dev = 0.0f64;
    let mut agree = true;
    for i in 0..=24 {
        for j in 0..=24 {
            let (a, b) = (-1.2 + 0.1 * f64::from(i), -1.2 + 0.1 * f64::from(j));
            let rho = origin_spectral_radius(cfg.k, a, b);
            let expect = a.hypot(b);
            worst_dev = worst_dev.max((rho - expect).abs());
            if (expect - 1.0).abs() > 1e-9 && ((rho < 1.0) != (a * a + b * b < 1.0)) {
                agree = false;
            }
        }
    }
    let origin = CheckOutcome::new(Criterion::Unfolding, "unfolding-origin", worst_dev, 1e-14, agree && worst_dev <= 1e-14)
        .param("alpha", "-1.2:1.2:25")
        .param("beta", "-1.2:1.2:25");
    vec![spectral, cont, origin]
}

pub fn check_properness(cfg: &SuiteConfig) -> CheckOutcome {
    let radii = [2.0, 10.0, 100.0];
    let theta_samples = 360;
    let betas = beta_grid();
    let mut margin = f64::INFINITY;
    let mut pass = true;
    for &beta in &betas {
        let rep = properness_check(cfg.k, beta, &radii, theta_samples);
        pass &= rep.pass;
        for row in &rep.rows {
            margin = margin.min(row.min_norm / row.bound);
        }
    }
    CheckOutcome::new(Criterion::Properness, "properness", margin, 1.0, pass)
        .param("radii", list(&radii))
        .param("theta_samples", theta_samples)
        .param("beta", list(&betas))
        .param("bound", "(k/4) r")
        .detail("statistic is min |g| / bound")
}

pub fn check_smoothness(cfg: &SuiteConfig) -> CheckOutcome {
    let steps = [1e-3, 1e-4, 1e-5, 1e-6];
    let ns = [2, 3, 5, 6, 8];
    let radii = [0.5, 1.0, 2.0];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in ns {
        for r in radii {
            let rep = boundary_smoothness_check(cfg.k, order(n), r, &steps);
            let last = *rep.mismatch.last().unwrap_or(&f64::INFINITY);
            worst = worst.max(last / (1.0 + r * r));
            if !rep.pass {
                failures.push(format!("n={n} r={r} mismatch={:?}", rep.mismatch));
            }
        }
    }
    CheckOutcome::new(Criterion::Smoothness, "smoothness", worst, SMOOTHNESS_TOL, failures.is_empty())
        .param("n", list(&ns))
        .param("r", list(&radii))
        .param("h", list(&steps))
        .param("boundary", "2pi/n")
        .detail(if failures.is_empty() { "statistic is mismatch/(1+r^2) at h=1e-6".into() } else { failures.join("; ") })
}

pub fn check_astroid(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let map = MapSpec::f4(cfg.k);
    let samples = 720;
    let curve = image_curve(&map, 1.0, samples);
    let dev = curve
        .thetas
        .iter()
        .zip(&curve.points)
        .map(|(t, p)| p.dist(astroid(cfg.k, *t)))
        .fold(0.0, f64::max);
    let k = cfg.k.k();
    let end_dev = map
        .eval(PlanarPoint::new(1.0, 0.0))
        .dist(PlanarPoint::new(0.0, k / 2.0))
        .max(map.eval(PlanarPoint::new(0.0, 1.0)).dist(PlanarPoint::new(-k / 2.0, 0.0)));
    let curve_ok = dev <= ASTROID_TOL;
    let ends_ok = end_dev <= ASTROID_TOL;
    let a = CheckOutcome::new(Criterion::Astroid, "astroid-curve", dev.max(end_dev), ASTROID_TOL, curve_ok && ends_ok)
        .param("radius", 1.0)
        .param("samples", samples);

    let mut min_off = f64::INFINITY;
    for i in 0..samples {
        let t = TAU * (i as f64 + 0.5) / samples as f64;
        min_off = min_off.min(transversality_det(cfg.k, t));
    }
    let at_axes = (0..4).map(|m| transversality_det(cfg.k, FRAC_PI_2 * f64::from(m)).abs()).fold(0.0, f64::max);
    let pass = min_off > 0.0 && at_axes <= 1e-14;
    let t = CheckOutcome::new(Criterion::Astroid, "transversality", at_axes, 1e-14, pass)
        .param("samples", samples)
        .detail(format!("min off-axis det {min_off:.3e}"));
    vec![a, t]
}

pub fn check_rotation(cfg: &SuiteConfig) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in orders(2..=8) {
        let target = 1.0 / f64::from(n.get());
        for (label, map) in [("fn", MapSpec::fn_(cfg.k, n)), ("hn", MapSpec::hn_default(cfg.k, n))] {
            for &(x, y) in &ROTATION_STARTS {
                match estimate_rotation(&map, PlanarPoint::new(x, y), ROTATION_ITERS) {
                    Ok(e) => {
                        let err = (e.slope - target).abs();
                        worst = worst.max(err);
                        if err > ROTATION_TOL || e.rational != (1, u64::from(n.get())) {
                            failures.push(format!(
                                "{label} n={} start=({x},{y}) slope={:.6} rational={}/{}",
                                n.get(),
                                e.slope,
                                e.rational.0,
                                e.rational.1
                            ));
                        }
                    }
                    Err(err) => {
                        worst = f64::INFINITY;
                        failures.push(format!("{label} n={} start=({x},{y}): {err}", n.get()));
                    }
                }
            }
        }
    }
    CheckOutcome::new(Criterion::Rotation, "rotation", worst, ROTATION_TOL, failures.is_empty())
        .param("n", "2..8")
        .param("maps", "fn,hn")
        .param("starts", format!("{ROTATION_STARTS:?}"))
        .param("iters", ROTATION_ITERS)
        .param("max_denominator", crate::topology::MAX_DENOMINATOR)
        .detail(failures.join("; "))
}

/// Basin budget for the no-escape raster; escapes show up within a few
/// dozen steps, so a short budget suffices.
pub const DISSIPATIVE_BASIN_BUDGET: usize = 200;

pub fn check_dissipativity(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let ns = orders(2..=8);
    let samples = 1000;
    let mut worst_ratio = 0.0f64;
    for &n in &ns {
        let map = MapSpec::hn_default(cfg.k, n);
        let r0 = map.profile().expect("hn has a profile").r0();
        let mut rng = seeded_rng(cfg.seed);
        for _ in 0..samples {
            let p = sample_annulus(&mut rng, 2.0 * r0, 100.0);
            worst_ratio = worst_ratio.max(map.eval(p).norm() / p.norm());
        }
    }
    let norm = CheckOutcome::new(Criterion::Dissipativity, "dissipative-norm", worst_ratio, 1.0, worst_ratio < 1.0)
        .param("n", "2..8")
        .param("samples", samples)
        .param("annulus", "[2 r0, 100]")
        .param("seed", cfg.seed)
        .detail("statistic is max |H(p)|/|p|");

    let params = VerdictParams { budget: DISSIPATIVE_BASIN_BUDGET, eps_in: 1e-8, r_escape: 1e3 };
    let res = 256;
    let mut escaped = 0usize;
    let mut notes = Vec::new();
    for &n in &ns {
        let map = MapSpec::hn_default(cfg.k, n);
        match basin_raster(&map, Region::square(20.0), res, res, params) {
            Ok(r) => {
                let c = r.counts();
                escaped += c.escaped;
                notes.push(format!("n={}: {}/{}/{}", n.get(), c.converged, c.escaped, c.undecided));
            }
            Err(e) => {
                escaped = usize::MAX;
                notes.push(format!("n={}: {e}", n.get()));
            }
        }
    }
    let basin = CheckOutcome::new(Criterion::Dissipativity, "dissipative-basin", escaped as f64, 0.0, escaped == 0)
        .param("n", "2..8")
        .param("window", "[-20,20]^2")
        .param("res", format!("{res}x{res}"))
        .param("budget", params.budget)
        .param("eps_in", params.eps_in)
        .param("r_escape", params.r_escape)
        .detail(format!("converged/escaped/undecided {}", notes.join(" ")));
    vec![norm, basin]
}

pub fn check_singularity() -> Vec<CheckOutcome> {
    let c = Criterion::Singularity;
    let mut out = Vec::new();
    match build_q() {
        Ok(q) => {
            let rank = q.rank();
            out.push(
                CheckOutcome::new(c, "q-rank", rank as f64, 12.0, rank == 12 && q.rows.len() == 13)
                    .detail(format!("{}x{}", q.rows.len(), q.col_labels.len())),
            );
        }
        Err(e) => out.push(CheckOutcome::new(c, "q-rank", f64::NAN, 12.0, false).detail(e.to_string())),
    }
    let rep = codimension_check();
    let missing: Vec<_> = rep.memberships.iter().filter(|m| !m.member).map(|m| m.label.clone()).collect();
    out.push(
        CheckOutcome::new(c, "codimension", rep.codimension as f64, 3.0, rep.pass)
            .param("ambient", rep.ambient_dim)
            .param("complement", rep.complement.join(", "))
            .detail(format!(
                "tangent {} with V2 {} with V1 {} missing [{}]",
                rep.tangent_dim,
                rep.with_primary_complement,
                rep.with_alternative_complement,
                missing.join(", ")
            )),
    );
    let t2 = cleared_tangent_generators()
        .into_iter()
        .find(|(s, _)| *s == TangentSource::T(2))
        .map(|(_, f)| f)
        .unwrap_or_default();
    let minus_bx2: EqVectorField = Generator::X2
        .field()
        .mul_invariant(&InvMonomial::B.poly())
        .expect("B is invariant")
        .scale(&crate::singularity::rat(-1, 1));
    out.push(CheckOutcome::new(c, "t2-generator", 0.0, 0.0, t2 == minus_bx2).detail("T2 P = -B X2"));
    let rel = verify_invariant_relation();
    out.push(CheckOutcome::new(c, "invariant-relation", 0.0, 0.0, rel).detail("N^4 = A^2 + 16 B^2"));
    out
}

pub fn check_negative_control(cfg: &SuiteConfig) -> CheckOutcome {
    let map = MapSpec::fn_(cfg.k, order(5));
    let r = equivariance_residual(&map, order(4), 1000, 10.0);
    CheckOutcome::new(Criterion::NegativeControl, "negative-control", r, NEGATIVE_CONTROL_MIN, r >= NEGATIVE_CONTROL_MIN)
        .param("map", "fn n=5")
        .param("probe_order", 4)
        .param("samples", 1000)
        .param("radius", 10.0)
        .detail("statistic must be at least the tolerance")
}

/// Whether every listed check passed.
pub fn all_pass(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(c.name().parse::<Criterion>().unwrap(), c);
            assert_eq!(c.number().to_string().parse::<Criterion>().unwrap(), c);
        }
        assert_eq!(Criterion::Equivariance.number(), 1);
        assert_eq!(Criterion::NegativeControl.number(), 12);
        assert!("13".parse::<Criterion>().is_err());
        assert!("0".parse::<Criterion>().is_err());
        assert!("bogus".parse::<Criterion>().is_err());
    }

    #[test]
    fn cheap_checks_pass() {
        let cfg = SuiteConfig::default();
        assert!(check_negative_control(&cfg).pass);
        assert!(check_properness(&cfg).pass);
        assert!(check_astroid(&cfg).iter().all(|o| o.pass));
        assert!(check_singularity().iter().all(|o| o.pass));
    }

    #[test]
    fn outcomes_echo_tolerances() {
        let o = check_negative_control(&SuiteConfig::default());
        assert_eq!(o.tolerance, NEGATIVE_CONTROL_MIN);
        assert_eq!(o.criterion, 12);
        assert_eq!(o.parameters["probe_order"], "4");
    }

    #[test]
    fn beta_grid_values() {
        let b = beta_grid();
        assert_eq!(b.len(), 10);
        assert_eq!(b[0], 0.01);
        assert_eq!(b[9], 0.1);
    }
}
