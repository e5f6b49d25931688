//! Command-line arguments. Everything that can change a result lives in
//! [`RunConfig`]; worker count and output paths do not.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, ValueEnum};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    /// Resolve a map spec and print or save its canonical JSON.
    Build,
    /// Separated-set entropy estimate with certificate and Lipschitz bounds.
    Entropy,
    /// Sampled Hölder or Lipschitz seminorm, or a distance with --against.
    Seminorm,
    /// Sobolev energy report with the pointwise inequality checks.
    Sobolev,
    /// Crossing certificates for a horseshoe map or a cylinder pair.
    Certify,
    /// Closes a returning orbit at successively smaller scales.
    ClosingDemo,
    /// Inserts a horseshoe chain along a returning orbit segment.
    HorseshoeDemo,
    /// Modulus, entropy growth or truncation study of the nested-squares map.
    AppendixA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Modulus,
    Growth,
    Truncation,
}

/// Sampling cloud: `grid:RES` or `pairs:COUNT`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cloud {
    Grid(usize),
    Pairs(usize),
}

impl FromStr for Cloud {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, n) = s.split_once(':').ok_or("expected grid:RES or pairs:COUNT")?;
        let n: usize = n.parse().map_err(|_| format!("bad count {n:?}"))?;
        if n == 0 {
            return Err("count must be positive".into());
        }
        match kind {
            "grid" => Ok(Cloud::Grid(n)),
            "pairs" => Ok(Cloud::Pairs(n)),
            _ => Err(format!("unknown cloud kind {kind:?}")),
        }
    }
}

/// Inclusive integer range written `a..b`, or a single value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

impl NRange {
    pub fn values(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }
}

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad integer {t:?}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => (parse(s)?, parse(s)?),
        };
        if lo == 0 || hi < lo {
            return Err("range needs 1 <= lo <= hi".into());
        }
        Ok(NRange { lo, hi })
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on entropy comparisons against log N.
    #[arg(long, default_value_t = 0.15)]
    pub tol_entropy: f64,
    /// Largest accepted |g^k(x^k) − x^k|.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_residual: f64,
    /// Relative slack for the inverse-energy check.
    #[arg(long, default_value_t = 0.05)]
    pub tol_inverse: f64,
    /// Largest accepted per-decade drift of the modulus ratios.
    #[arg(long, default_value_t = 0.1)]
    pub tol_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize)]
pub struct RunConfig {
    /// Map spec: inline JSON, a JSON file, or NAME[:{params}].
    #[arg(long)]
    pub map: Option<String>,
    /// Second map for distances; defaults to the identity.
    #[arg(long)]
    pub against: Option<String>,
    /// Orbit lengths, `a..b` inclusive.
    #[arg(long, default_value = "2..8")]
    pub n: NRange,
    /// Comma-separated separation scales.
    #[arg(long, value_delimiter = ',', default_value = "0.0625,0.03125,0.015625")]
    pub eps: Vec<f64>,
    #[arg(long, default_value = "grid:128")]
    pub cloud: Cloud,
    /// Local refinement rounds of the sampling plan.
    #[arg(long, default_value_t = 40)]
    pub rounds: usize,
    /// Point budget of the entropy refinement tree.
    #[arg(long, default_value_t = 700_000)]
    pub budget: usize,
    /// Sampling domain `x0,y0,x1,y1`; defaults to the map's own.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub domain: Option<Vec<f64>>,
    /// Cell size for Sobolev quadrature; defaults to 1/100 of the domain width.
    #[arg(long)]
    pub h: Option<f64>,
    /// Hölder exponent in [0, 1], or `lip`.
    #[arg(long, default_value = "0.5")]
    pub exponent: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Source cylinder `ax,ay,bx,by,rho` for certify.
    #[arg(long, value_delimiter = ',', num_args = 5)]
    pub source: Option<Vec<f64>>,
    /// Target cylinder `ax,ay,bx,by,rho`; defaults to the source.
    #[arg(long, value_delimiter = ',', num_args = 5)]
    pub target: Option<Vec<f64>>,
    /// Relative sampling step of crossing certificates.
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
    /// Starting point `x,y` of the orbit demos.
    #[arg(long, value_delimiter = ',', num_args = 2, default_value = "0.6,0")]
    pub y: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Elongated-neighbourhood factor of the closing perturbation.
    #[arg(long, default_value_t = 0.25)]
    pub c: f64,
    #[arg(long, default_value_t = 4)]
    pub scales: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 2)]
    pub branches: usize,
    #[arg(long, default_value_t = 0.15)]
    pub r1: f64,
    /// Skip the entropy estimate of the chained map.
    #[arg(long)]
    pub skip_entropy: bool,
    #[arg(long, value_enum, default_value = "modulus")]
    pub study: Study,
    /// Comma-separated m values for the growth and truncation studies.
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 8)]
    pub cap: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "entrolab", version, about = "Planar homeomorphisms, horseshoes and entropy estimates")]
pub struct Cli {
    #[arg(value_enum)]
    pub verb: Verb,
    #[command(flatten)]
    pub config: RunConfig,
    /// Worker threads; 0 or absent uses every core.
    #[arg(long, env = "ENTROLAB_WORKERS")]
    pub workers: Option<usize>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Map JSON written by `build`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table, for verbs that produce one.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG sketch, for verbs that produce one.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_clouds_parse() {
        assert_eq!("2..8".parse::<NRange>().unwrap().values(), vec![2, 3, 4, 5, 6, 7, 8]);
        assert_eq!("3".parse::<NRange>().unwrap().values(), vec![3]);
        assert!("5..2".parse::<NRange>().is_err());
        assert_eq!("grid:128".parse::<Cloud>().unwrap(), Cloud::Grid(128));
        assert!("mesh:4".parse::<Cloud>().is_err());
    }

    #[test]
    fn defaults_match_the_standard_experiment() {
        let cli = Cli::try_parse_from(["entrolab", "entropy", "--map", "horseshoe"]).unwrap();
        assert_eq!(cli.verb, Verb::Entropy);
        assert_eq!(cli.config.eps, vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
        assert_eq!(cli.config.cloud, Cloud::Grid(128));
        assert!(Cli::try_parse_from(["entrolab", "frobnicate"]).is_err());
    }
}
