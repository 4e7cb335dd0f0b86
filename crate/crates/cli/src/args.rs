use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use znmap::maps::{Family, MapError};
use znmap::{MapSpec, RadialProfile, SymmetryOrder, SzlenkParams, UnfoldParams};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "znmap", version, about = "Rotation-equivariant planar maps whose attracting origin has a bounded basin")]
pub struct Cli {
    /// RNG seed for sampled checks; decimal or 0x-prefixed hex.
    #[arg(long, global = true, env = "ZNMAP_SEED", default_value = "0x5EED", value_parser = parse_seed)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the map (and its Jacobian) at one point.
    Eval {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
    /// Iterate from a start point and write the orbit as CSV.
    Orbit {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// CSV output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run acceptance checks.
    Verify {
        #[command(flatten)]
        map: MapArgs,
        /// `all` or a comma-separated list of check names or numbers.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rasterize the basin of the origin as a binary PGM.
    Basin {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, num_args = 4, allow_negative_numbers = true,
              value_names = ["XMIN", "XMAX", "YMIN", "YMAX"],
              default_values_t = [-20.0, 20.0, -20.0, 20.0])]
        window: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        res: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 1e-8)]
        eps_in: f64,
        #[arg(long, default_value_t = 1e6)]
        r_escape: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Image of a circle under the map, as CSV.
    Curve {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 360)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the rotation number of one orbit.
    Rotation {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        y0: f64,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Continue the period-4 orbit of G4 over a parameter range.
    UnfoldScan {
        #[arg(long, default_value_t = SzlenkParams::DEFAULT_K)]
        k: f64,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        alpha: RangeSpec,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        beta: RangeSpec,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        delta: RangeSpec,
        #[arg(long, default_value_t = 4)]
        period: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact tangent-space computation for F4.
    Singularity {
        /// Also print the matrix Q.
        #[arg(long)]
        show_q: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    F4,
    G4,
    Fn,
    H,
    Hn,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::F4 => Family::F4,
            FamilyArg::G4 => Family::G4,
            FamilyArg::Fn => Family::Fn,
            FamilyArg::H => Family::H,
            FamilyArg::Hn => Family::Hn,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::F4)]
    pub family: FamilyArg,
    /// Must satisfy 1 < k < 2/√3.
    #[arg(long, default_value_t = SzlenkParams::DEFAULT_K)]
    pub k: f64,
    /// Symmetry order, fn and hn only.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Radial profile knee, h and hn only.
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub r_half: Option<f64>,
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

impl MapArgs {
    /// Validates the flag combination and builds the map.
    pub fn to_spec(&self) -> Result<MapSpec, CliError> {
        let k = SzlenkParams::new(self.k).map_err(usage)?;
        let family = self.family;
        let has_unfold = self.alpha.is_some() || self.beta.is_some() || self.delta.is_some();
        let has_profile = self.r0.is_some() || self.r_half.is_some();
        let wants_n = matches!(family, FamilyArg::Fn | FamilyArg::Hn);
        if has_unfold && family != FamilyArg::G4 {
            return Err(usage("--alpha/--beta/--delta apply to --family g4 only"));
        }
        if self.n.is_some() && !wants_n {
            return Err(usage("--n applies to --family fn or hn only"));
        }
        if has_profile && !matches!(family, FamilyArg::H | FamilyArg::Hn) {
            return Err(usage("--r0/--r-half apply to --family h or hn only"));
        }
        let n = match (wants_n, self.n) {
            (true, Some(n)) => Some(SymmetryOrder::new(n).map_err(usage)?),
            (true, None) => return Err(usage("--n is required for this family")),
            _ => None,
        };
        let profile = || -> Result<RadialProfile, CliError> {
            let d = RadialProfile::default_for(k);
            RadialProfile::new(self.r0.unwrap_or(d.r0()), self.r_half.unwrap_or(d.r_half())).map_err(usage)
        };
        let spec = match family {
            FamilyArg::F4 => MapSpec::f4(k),
            FamilyArg::G4 => {
                let u = UnfoldParams::new(
                    self.alpha.unwrap_or(0.0),
                    self.beta.unwrap_or(0.0),
                    self.delta.unwrap_or(0.0),
                )
                .map_err(usage)?;
                MapSpec::g4(k, u)
            }
            FamilyArg::Fn => MapSpec::fn_(k, n.expect("checked")),
            FamilyArg::H => MapSpec::h(k, profile()?).map_err(|e: MapError| usage(e))?,
            FamilyArg::Hn => MapSpec::hn(k, n.expect("checked"), profile()?).map_err(usage)?,
        };
        Ok(spec)
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed '{s}': {e}"))
}

/// `a:b:count` inclusive linear range, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + step * i as f64 })
            .collect()
    }
}

impl std::str::FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|e| format!("bad number '{t}': {e}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite value '{t}'"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Ok(RangeSpec { start: v, end: v, count: 1 })
            }
            [a, b, c] => {
                let count: usize = c.trim().parse().map_err(|e| format!("bad count '{c}': {e}"))?;
                if count == 0 {
                    return Err("range count must be at least 1".into());
                }
                Ok(RangeSpec { start: num(a)?, end: num(b)?, count })
            }
            _ => Err(format!("expected a or a:b:count, got '{s}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("znmap").chain(args.iter().copied()))
    }

    #[test]
    fn verify_example_parses() {
        let cli = parse(&["verify", "--family", "fn", "--n", "6", "--k", "1.1", "--suite", "all", "--json", "out.json"])
            .unwrap();
        let Command::Verify { map, suite, json } = cli.command else { panic!("wrong subcommand") };
        assert_eq!(suite, "all");
        assert_eq!(json, Some(PathBuf::from("out.json")));
        let spec = map.to_spec().unwrap();
        assert_eq!(spec.family(), Family::Fn);
        assert_eq!(spec.order().get(), 6);
        assert_eq!(spec.k().k(), 1.1);
    }

    #[test]
    fn k_out_of_range_is_usage_error() {
        let cli = parse(&["eval", "--family", "f4", "--k", "1.2", "--x", "1", "--y", "0"]).unwrap();
        let Command::Eval { map, .. } = cli.command else { panic!() };
        assert!(matches!(map.to_spec(), Err(CliError::Usage(_))));
        assert_eq!(map.to_spec().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn basin_example_parses() {
        let cli = parse(&[
            "basin", "--family", "hn", "--n", "5", "--k", "1.1", "--window", "-5", "5", "-5", "5", "--res", "512",
            "--out", "b.pgm",
        ])
        .unwrap();
        let Command::Basin { map, window, res, out, .. } = cli.command else { panic!() };
        assert_eq!(window, vec![-5.0, 5.0, -5.0, 5.0]);
        assert_eq!(res, 512);
        assert_eq!(out, PathBuf::from("b.pgm"));
        assert_eq!(map.to_spec().unwrap().family(), Family::Hn);
    }

    #[test]
    fn flag_family_mismatches() {
        let bad = [
            vec!["eval", "--family", "f4", "--n", "5", "--x", "1", "--y", "0"],
            vec!["eval", "--family", "fn", "--x", "1", "--y", "0"],
            vec!["eval", "--family", "fn", "--n", "1", "--x", "1", "--y", "0"],
            vec!["eval", "--family", "fn", "--n", "5", "--beta", "0.1", "--x", "1", "--y", "0"],
            vec!["eval", "--family", "g4", "--r0", "9", "--x", "1", "--y", "0"],
            vec!["eval", "--family", "h", "--r0", "1", "--x", "1", "--y", "0"],
        ];
        for args in bad {
            let cli = parse(&args).unwrap();
            let Command::Eval { map, .. } = cli.command else { panic!() };
            assert!(matches!(map.to_spec(), Err(CliError::Usage(_))), "{args:?}");
        }
        assert!(parse(&["eval", "--bogus"]).is_err());
        assert!(parse(&["eval", "--family", "f5", "--x", "0", "--y", "0"]).is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0x5EED"), Ok(0x5EED));
        assert_eq!(parse_seed("42"), Ok(42));
        assert!(parse_seed("x").is_err());
        let cli = parse(&["singularity", "--seed", "7"]).unwrap();
        assert_eq!(cli.seed, 7);
    }

    #[test]
    fn ranges() {
        let r: RangeSpec = "0:0.1:11".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[10], 0.1);
        assert!((v[3] - 0.03).abs() < 1e-15);
        let single: RangeSpec = "-0.5".parse().unwrap();
        assert_eq!(single.values(), vec![-0.5]);
        assert!("1:2".parse::<RangeSpec>().is_err());
        assert!("1:2:0".parse::<RangeSpec>().is_err());
        assert!("a:2:3".parse::<RangeSpec>().is_err());
        assert!("nan".parse::<RangeSpec>().is_err());
    }
}
