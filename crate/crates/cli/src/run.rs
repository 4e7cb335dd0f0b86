use serde::Serialize;
use znmap::analysis::{find_periodic, iterate, Region, VerdictParams};
use znmap::singularity::{build_q, codimension_check, CodimensionReport, Membership};
use znmap::topology::{basin_raster, estimate_rotation, image_curve};
use znmap::verification::{all_pass, run_suite, CheckOutcome, Criterion, SuiteConfig, NEWTON_TOL};
use znmap::{MapSpec, PlanarPoint, SzlenkParams, UnfoldParams};

use crate::args::{Cli, Command, RangeSpec};
use crate::error::CliError;
use crate::output::{csv, emit, json, num, write_file};

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Eval { map, x, y } => {
            let spec = map.to_spec()?;
            let p = point(x, y)?;
            let fp = spec.eval(p);
            let j = spec.jacobian(p);
            let row = [x, y, fp.x, fp.y, j.a, j.b, j.c, j.d].map(num).to_vec();
            emit(None, &csv(&["x", "y", "fx", "fy", "j11", "j12", "j21", "j22"], [row]))
        }
        Command::Orbit { map, x0, y0, iters, out } => {
            let spec = map.to_spec()?;
            let orbit = iterate(&spec, point(x0, y0)?, iters);
            let rows = orbit.points.iter().enumerate().map(|(i, p)| vec![i.to_string(), num(p.x), num(p.y)]);
            emit(out.as_deref(), &csv(&["step", "x", "y"], rows))
        }
        Command::Verify { map, suite, json: json_path } => {
            let spec = map.to_spec()?;
            let criteria = parse_suite(&suite)?;
            let cfg = SuiteConfig { k: spec.k(), seed };
            let checks = run_suite(&criteria, &cfg);
            let pass = all_pass(&checks);
            for c in &checks {
                println!(
                    "[{}] {:>2} {:<24} statistic={} tolerance={}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.criterion,
                    c.name,
                    num(c.statistic),
                    num(c.tolerance)
                );
            }
            println!("overall: {}", if pass { "PASS" } else { "FAIL" });
            if let Some(path) = json_path {
                let report = VerificationReport {
                    tool: env!("CARGO_PKG_NAME"),
                    version: env!("CARGO_PKG_VERSION"),
                    map: spec,
                    seed,
                    suite: criteria.iter().map(|c| c.name()).collect(),
                    checks,
                    pass,
                };
                write_file(&path, json(&report).as_bytes())?;
            }
            if pass {
                Ok(())
            } else {
                Err(CliError::Failed("verification checks failed".into()))
            }
        }
        Command::Basin { map, window, res, budget, eps_in, r_escape, out } => {
            let spec = map.to_spec()?;
            let region = Region { xmin: window[0], xmax: window[1], ymin: window[2], ymax: window[3] };
            let ok_window = window.iter().all(|v| v.is_finite()) && region.xmin < region.xmax && region.ymin < region.ymax;
            if !ok_window {
                return Err(CliError::Usage("--window needs finite XMIN < XMAX and YMIN < YMAX".into()));
            }
            let thresholds_ok = eps_in.is_finite() && eps_in > 0.0 && r_escape > eps_in;
            if res == 0 || budget == 0 || !thresholds_ok {
                return Err(CliError::Usage("need --res, --budget >= 1 and 0 < --eps-in < --r-escape".into()));
            }
            let params = VerdictParams { budget, eps_in, r_escape };
            let raster =
                basin_raster(&spec, region, res, res, params).map_err(|e| CliError::Usage(e.to_string()))?;
            write_file(&out, &raster.to_pgm())?;
            let c = raster.counts();
            println!("converged={} escaped={} undecided={}", c.converged, c.escaped, c.undecided);
            Ok(())
        }
        Command::Curve { map, radius, samples, out } => {
            let spec = map.to_spec()?;
            if !(radius.is_finite() && radius > 0.0) || samples < 4 {
                return Err(CliError::Usage("need --radius > 0 and --samples >= 4".into()));
            }
            let curve = image_curve(&spec, radius, samples);
            let rows = curve.thetas.iter().zip(&curve.points).map(|(t, p)| vec![num(*t), num(p.x), num(p.y)]);
            emit(out.as_deref(), &csv(&["theta", "x", "y"], rows))
        }
        Command::Rotation { map, x0, y0, iters } => {
            let spec = map.to_spec()?;
            let est = estimate_rotation(&spec, point(x0, y0)?, iters).map_err(|e| CliError::Failed(e.to_string()))?;
            println!("slope={:.6} rational={}/{}", est.slope, est.rational.0, est.rational.1);
            Ok(())
        }
        Command::UnfoldScan { k, alpha, beta, delta, period, out } => unfold_scan(k, alpha, beta, delta, period, out),
        Command::Singularity { show_q, json: json_path } => singularity(show_q, json_path),
    }
}

fn point(x: f64, y: f64) -> Result<PlanarPoint, CliError> {
    PlanarPoint::try_new(x, y).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_suite(s: &str) -> Result<Vec<Criterion>, CliError> {
    if s == "all" {
        return Ok(Criterion::ALL.to_vec());
    }
    let mut out: Vec<Criterion> = s
        .split(',')
        .map(|t| t.trim().parse::<Criterion>().map_err(CliError::Usage))
        .collect::<Result<_, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Serialize)]
struct VerificationReport {
    tool: &'static str,
    version: &'static str,
    map: MapSpec,
    seed: u64,
    suite: Vec<&'static str>,
    checks: Vec<CheckOutcome>,
    pass: bool,
}

fn unfold_scan(
    k: f64,
    alpha: RangeSpec,
    beta: RangeSpec,
    delta: RangeSpec,
    period: usize,
    out: Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let k = SzlenkParams::new(k).map_err(|e| CliError::Usage(e.to_string()))?;
    if period == 0 {
        return Err(CliError::Usage("--period must be at least 1".into()));
    }
    let mut guess = k.periodic_point();
    let mut rows = Vec::new();
    let mut failures = 0;
    for a in alpha.values() {
        for b in beta.values() {
            for d in delta.values() {
                let spec = MapSpec::g4(k, UnfoldParams { alpha: a, beta: b, delta: d });
                let mut row = vec![num(a), num(b), num(d)];
                match find_periodic(&spec, guess, period, NEWTON_TOL) {
                    Ok(orb) => {
                        guess = orb.point;
                        row.extend([
                            num(orb.point.x),
                            num(orb.point.y),
                            num(orb.residual),
                            num(orb.multipliers[0].norm()),
                            num(orb.multipliers[1].norm()),
                            orb.minimal.to_string(),
                            "ok".to_string(),
                        ]);
                    }
                    Err(e) => {
                        failures += 1;
                        row.extend(["NaN", "NaN", "NaN", "NaN", "NaN", "false"].map(String::from));
                        row.push(e.to_string().replace(',', ";"));
                    }
                }
                rows.push(row);
            }
        }
    }
    let header = ["alpha", "beta", "delta", "x", "y", "residual", "mu1_abs", "mu2_abs", "minimal", "status"];
    emit(out.as_deref(), &csv(&header, rows))?;
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failures} continuation steps did not converge")))
    }
}

#[derive(Serialize)]
struct SingularityReport {
    rank_q: usize,
    q_rows: Vec<String>,
    q_columns: Vec<String>,
    q: Vec<Vec<String>>,
    ambient_dim: usize,
    tangent_dim: usize,
    codimension: usize,
    with_v2: usize,
    with_v1: usize,
    complement: Vec<String>,
    memberships: Vec<MembershipEntry>,
    pass: bool,
}

#[derive(Serialize)]
struct MembershipEntry {
    element: String,
    member: bool,
}

fn singularity(show_q: bool, json_path: Option<std::path::PathBuf>) -> Result<(), CliError> {
    let q = build_q().map_err(|e| CliError::Failed(e.to_string()))?;
    let rank = q.rank();
    let rep: CodimensionReport = codimension_check();
    println!("rank(Q)={rank} codimension={} complement={{{}}}", rep.codimension, rep.complement.join(", "));
    if show_q {
        println!("rows: {}", q.row_labels.join(" | "));
        println!("cols: {}", q.col_labels.join(" | "));
        for (label, row) in q.row_labels.iter().zip(&q.rows) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            println!("{label:>10}: [{}]", cells.join(", "));
        }
    }
    let pass = rank == 12 && rep.pass;
    if let Some(path) = json_path {
        let report = SingularityReport {
            rank_q: rank,
            q_rows: q.row_labels.clone(),
            q_columns: q.col_labels.clone(),
            q: q.rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect(),
            ambient_dim: rep.ambient_dim,
            tangent_dim: rep.tangent_dim,
            codimension: rep.codimension,
            with_v2: rep.with_primary_complement,
            with_v1: rep.with_alternative_complement,
            complement: rep.complement.clone(),
            memberships: rep
                .memberships
                .iter()
                .map(|Membership { label, member }| MembershipEntry { element: label.clone(), member: *member })
                .collect(),
            pass,
        };
        write_file(&path, json(&report).as_bytes())?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("singularity computation disagrees with rank 12 / codimension 3".into()))
    }
}
