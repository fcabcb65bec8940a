use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stein_clt::{QuadratureSpec, RealVector, RngSeed};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "stein-clt", version, about = "Numerical checks for the characteristic-function Lindeberg CLT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the standard-array conditions for each row
    Validate(RunArgs),
    /// Exact (and optionally Monte Carlo) characteristic functions of row sums
    Charfn(RunArgs),
    /// |φ_Ξ(t) − φ_{Σ_n}(t)| over the n and t grids
    Gap(RunArgs),
    /// Lindeberg sums and the Lindeberg index estimate
    Lindeberg(RunArgs),
    /// L-sums for the same array and an independent copy
    LSum(RunArgs),
    /// Both sides of the exact characteristic-function identity
    Identity(RunArgs),
    /// Stein solution, Hessian and residual checks at (t, x) points
    SteinCheck(RunArgs),
    /// The finite-n master inequality
    Bound(RunArgs),
    /// Finite-grid estimates of the asymptotic bound and its corollary
    Report(RunArgs),
    /// λ_F estimate from the gap table
    LambdaF(RunArgs),
    /// Monte Carlo Kolmogorov distance to the standard normal (N = 1)
    Kolmogorov(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Charfn(_) => "charfn",
            Command::Gap(_) => "gap",
            Command::Lindeberg(_) => "lindeberg",
            Command::LSum(_) => "l-sum",
            Command::Identity(_) => "identity",
            Command::SteinCheck(_) => "stein-check",
            Command::Bound(_) => "bound",
            Command::Report(_) => "report",
            Command::LambdaF(_) => "lambda-f",
            Command::Kolmogorov(_) => "kolmogorov",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Validate(a)
            | Command::Charfn(a)
            | Command::Gap(a)
            | Command::Lindeberg(a)
            | Command::LSum(a)
            | Command::Identity(a)
            | Command::SteinCheck(a)
            | Command::Bound(a)
            | Command::Report(a)
            | Command::LambdaF(a)
            | Command::Kolmogorov(a) => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Rademacher,
    Eta,
    ProductRademacher,
    ProductEta,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RunArgs {
    /// Array spec file (stein-clt-row/1 JSON)
    #[arg(long, conflicts_with = "family")]
    pub spec: Option<PathBuf>,
    /// Built-in family
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Dimension for product families
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Let the η family accept alpha > 1/2 by delaying the correction
    #[arg(long)]
    pub allow_large_alpha: bool,

    /// t values: a list `a,b,c` or a range `start:stop:step`
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "t")]
    pub t_list: Option<String>,
    /// Explicit t vectors, `a,b;c,d`
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["t", "t_list"])]
    pub t_vec: Option<String>,
    /// Direction multiplying scalar t and x values when N > 1 (default all ones)
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// Add t = π√n for every n in the grid
    #[arg(long)]
    pub spike_t: bool,

    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, conflicts_with = "n")]
    pub n_list: Option<String>,

    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, conflicts_with = "eps")]
    pub eps_list: Option<String>,

    /// x values for stein-check, scalars times the direction
    #[arg(long, allow_hyphen_values = true)]
    pub x_list: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "x_list")]
    pub x_vec: Option<String>,

    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_subdivisions: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub fd_step: f64,
    /// Gauss–Hermite level
    #[arg(long, default_value_t = 60)]
    pub level: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of trailing n values used for limsup estimates
    #[arg(long, default_value_t = 3)]
    pub tail_window: usize,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: standard output)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let spec = QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            ..QuadratureSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rng_seed(&self) -> RngSeed {
        RngSeed::new(self.seed, self.stream)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| usage(format!("{what}: cannot parse `{s}` as a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{what}: `{s}` is not finite")))
    }
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_real_grid(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(usage(format!("{what}: range must be start:stop:step, got `{text}`")));
        }
        let start = parse_f64(parts[0], what)?;
        let stop = parse_f64(parts[1], what)?;
        let step = parse_f64(parts[2], what)?;
        if step == 0.0 || (stop - start) * step < 0.0 {
            return Err(usage(format!("{what}: step {step} does not move from {start} to {stop}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(usage(format!("{what}: range has {count} points")));
        }
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        let values = text
            .split(',')
            .map(|s| parse_f64(s, what))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(usage(format!("{what}: empty grid")));
        }
        Ok(values)
    }
}

pub fn parse_n_grid(text: &str) -> Result<Vec<usize>, CliError> {
    let values = parse_real_grid(text, "n")?;
    let mut grid = Vec::with_capacity(values.len());
    for v in values {
        if v < 1.0 || v.fract() != 0.0 {
            return Err(usage(format!("n: `{v}` is not a positive integer")));
        }
        grid.push(v as usize);
    }
    grid.sort_unstable();
    grid.dedup();
    Ok(grid)
}

/// `a,b;c,d` into vectors of dimension `dim`.
pub fn parse_vectors(text: &str, dim: usize, what: &str) -> Result<Vec<RealVector>, CliError> {
    text.split(';')
        .map(|chunk| {
            let coords = chunk
                .split(',')
                .map(|s| parse_f64(s, what))
                .collect::<Result<Vec<_>, _>>()?;
            if coords.len() != dim {
                return Err(usage(format!(
                    "{what}: `{chunk}` has {} coordinates, expected {dim}",
                    coords.len()
                )));
            }
            Ok(RealVector::new(coords)?)
        })
        .collect()
}

pub fn direction(args: &RunArgs, dim: usize) -> Result<Vec<f64>, CliError> {
    match &args.direction {
        None => Ok(vec![1.0; dim]),
        Some(text) => {
            let v = parse_vectors(text, dim, "direction")?;
            Ok(v[0].as_slice().to_vec())
        }
    }
}

pub fn scalars_to_vectors(values: &[f64], dir: &[f64]) -> Result<Vec<RealVector>, CliError> {
    values
        .iter()
        .map(|&s| Ok(RealVector::new(dir.iter().map(|d| s * d).collect())?))
        .collect()
}

pub fn t_grid(args: &RunArgs, dim: usize, n_grid: &[usize]) -> Result<Vec<RealVector>, CliError> {
    let mut grid = if let Some(text) = &args.t_vec {
        parse_vectors(text, dim, "t-vec")?
    } else {
        let text = args.t.as_deref().or(args.t_list.as_deref()).unwrap_or("1");
        scalars_to_vectors(&parse_real_grid(text, "t")?, &direction(args, dim)?)?
    };
    if args.spike_t {
        let dir = direction(args, dim)?;
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        for &n in n_grid {
            let s = std::f64::consts::PI * (n as f64).sqrt() / norm;
            grid.push(RealVector::new(dir.iter().map(|d| s * d).collect())?);
        }
    }
    Ok(grid)
}

pub fn x_grid(args: &RunArgs, dim: usize) -> Result<Vec<RealVector>, CliError> {
    if let Some(text) = &args.x_vec {
        parse_vectors(text, dim, "x-vec")
    } else {
        let values = parse_real_grid(args.x_list.as_deref().unwrap_or("0,0.7"), "x")?;
        scalars_to_vectors(&values, &direction(args, dim)?)
    }
}

pub fn eps_grid(args: &RunArgs, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
    let grid = match args.eps.as_deref().or(args.eps_list.as_deref()) {
        Some(text) => parse_real_grid(text, "eps")?,
        None => default,
    };
    if let Some(bad) = grid.iter().find(|&&e| e <= 0.0) {
        return Err(usage(format!("eps: `{bad}` must be positive")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_real_grid("0:1:0.25", "t").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_real_grid("1,2,3", "t").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_real_grid("-1", "t").unwrap(), vec![-1.0]);
        assert_eq!(parse_real_grid("0:0.3:0.1", "t").unwrap().len(), 4);
        assert!(parse_real_grid("1:0:0.5", "t").is_err());
        assert!(parse_real_grid("0:1", "t").is_err());
        assert!(parse_real_grid("a,b", "t").is_err());
    }

    #[test]
    fn n_grids() {
        assert_eq!(parse_n_grid("10:30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_n_grid("25,5,25").unwrap(), vec![5, 25]);
        assert!(parse_n_grid("2.5").is_err());
        assert!(parse_n_grid("0").is_err());
    }

    #[test]
    fn vectors() {
        let v = parse_vectors("1,-1;0.5,2", 2, "t").unwrap();
        assert_eq!(v[1].as_slice(), &[0.5, 2.0]);
        assert!(parse_vectors("1,2,3", 2, "t").is_err());
        let s = scalars_to_vectors(&[2.0], &[1.0, -1.0]).unwrap();
        assert_eq!(s[0].as_slice(), &[2.0, -2.0]);
    }
}
