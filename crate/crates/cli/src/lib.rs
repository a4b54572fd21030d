//! Command-line front end. Every command writes a single CSV or JSON
//! artifact to stdout, or to `--out` when given.
//!
//! Exit codes: 0 on success, 2 for malformed or invalid input, 3 when a
//! computation fails, 1 for I/O errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use linkage_core::inference::{
    bayes_factor_test, log_likelihood, log_marginal_continuous, marginal_approx_haldane,
    marginal_exact_haldane, MarginalMethod, Posterior,
};
use linkage_core::model::{
    ContinuousPrior, CrossCount, MixturePrior, PriorSpec, RecombinationRate,
    DEFAULT_CHROMOSOME_LENGTH, FREE_RECOMBINATION, PRIMROSE_POINT_MASS_WEIGHT,
};
use linkage_core::montecarlo::{
    figure1, sample_prior, SeededStream, FIGURE1_BINS, FIGURE1_SAMPLES,
};
use linkage_core::LinkageError;
use serde::Serialize;
use std::io::{self, Write};
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Usage(String),
    #[error("computation failed: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<LinkageError> for CliError {
    fn from(e: LinkageError) -> Self {
        match e {
            LinkageError::Convergence { .. }
            | LinkageError::Domain(_)
            | LinkageError::EmptySamples
            | LinkageError::OutOfRange { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(e: LinkageError) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "linkage",
    version,
    about = "Bayes factor tests for genetic linkage"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binomial likelihood of the data at one recombination rate.
    Likelihood {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Marginal likelihood of the linked hypothesis, weighted by its prior probability.
    Marginal {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mixture: MixtureArgs,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bayes factor, odds and posterior probability of linkage.
    BayesFactor {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        mixture: MixtureArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Continuous prior density on a grid over its support.
    PriorDensity {
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draws from the continuous prior.
    PriorSample {
        #[command(flatten)]
        prior: PriorArgs,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = 1000)]
        n_samples: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Posterior density of the recombination rate under the continuous prior.
    PosteriorDensity {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        prior: PriorArgs,
        /// Single evaluation point; a grid over the support is used otherwise.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 1000, conflicts_with = "rho")]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Histogram of simulated recombination rates under uniformly placed loci.
    Figure1 {
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = FIGURE1_SAMPLES)]
        n_samples: usize,
        #[arg(long, default_value_t = FIGURE1_BINS)]
        bins: usize,
        /// Chromosome length in Morgan.
        #[arg(short = 'L', long, default_value_t = DEFAULT_CHROMOSOME_LENGTH)]
        length: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Approx,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Number of meioses.
    #[arg(long = "n", default_value_t = 400)]
    pub n: u64,
    /// Number of crossovers.
    #[arg(long = "y", default_value_t = 160)]
    pub y: u64,
}

impl DataArgs {
    fn cross_count(&self) -> Result<CrossCount, CliError> {
        CrossCount::new(self.n, self.y).map_err(usage)
    }
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    /// Continuous prior as JSON, e.g. '{"type":"haldane_distance","L":1}'.
    #[arg(long, default_value = r#"{"type":"flat"}"#)]
    pub prior: String,
}

impl PriorArgs {
    fn parse(&self) -> Result<ContinuousPrior, CliError> {
        let spec: PriorSpec = serde_json::from_str(&self.prior)
            .map_err(|e| CliError::Usage(format!("malformed prior JSON: {e}")))?;
        ContinuousPrior::try_from(spec).map_err(usage)
    }
}

#[derive(Debug, Args)]
pub struct MixtureArgs {
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long, default_value_t = PRIMROSE_POINT_MASS_WEIGHT)]
    pub point_mass_weight: f64,
    #[arg(long, default_value_t = FREE_RECOMBINATION)]
    pub point_mass_location: f64,
}

impl MixtureArgs {
    fn mixture(&self) -> Result<MixturePrior, CliError> {
        let loc = RecombinationRate::new(self.point_mass_location).map_err(usage)?;
        MixturePrior::new(self.point_mass_weight, loc, self.prior.parse()?).map_err(usage)
    }
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
}

impl SeedArgs {
    fn stream(&self) -> SeededStream {
        SeededStream::new(self.seed, self.stream)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Defaults to JSON for single results and CSV for tables.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct LikelihoodOut {
    n: u64,
    y: u64,
    rho: f64,
    log_likelihood: f64,
    likelihood: f64,
}

#[derive(Debug, Serialize)]
struct MarginalOut {
    n: u64,
    y: u64,
    method: MarginalMethod,
    continuous_weight: f64,
    log_marginal: f64,
    marginal: f64,
    error_estimate: f64,
}

#[derive(Debug, Serialize)]
struct BayesFactorOut {
    n: u64,
    y: u64,
    log_bf: f64,
    bf: f64,
    prior_odds: f64,
    posterior_odds: f64,
    posterior_prob_linked: f64,
    log_marginal_exact: Option<f64>,
    log_marginal_approx: Option<f64>,
    log_marginal_linked: f64,
    linked_method: MarginalMethod,
    log_likelihood_unlinked: f64,
    log_marginal_mixture: f64,
}

#[derive(Debug, Serialize)]
struct Point {
    rho: f64,
    density: f64,
}

#[derive(Debug, Serialize)]
struct Samples {
    seed: u64,
    stream: u64,
    samples: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct HistogramOut {
    seed: u64,
    stream: u64,
    n_samples: u64,
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    densities: Vec<f64>,
    analytic_densities: Vec<f64>,
}

/// One flat record as a header line and a value line.
fn record_csv<T: Serialize>(value: &T) -> Result<String, CliError> {
    let serde_json::Value::Object(map) = serde_json::to_value(value).map_err(io::Error::other)?
    else {
        unreachable!("records serialize to objects");
    };
    let keys: Vec<&str> = map.keys().map(String::as_str).collect();
    let vals: Vec<String> = map
        .values()
        .map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Null => String::new(),
            other => other.to_string(),
        })
        .collect();
    Ok(format!("{}\n{}\n", keys.join(","), vals.join(",")))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string(value).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

fn record<T: Serialize>(value: &T, format: Option<Format>) -> Result<String, CliError> {
    match format.unwrap_or(Format::Json) {
        Format::Json => to_json(value),
        Format::Csv => record_csv(value),
    }
}

fn points(points: &[Point], format: Option<Format>) -> Result<String, CliError> {
    match format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&points),
        Format::Csv => {
            let mut s = String::from("rho,density\n");
            for p in points {
                s.push_str(&format!("{},{}\n", p.rho, p.density));
            }
            Ok(s)
        }
    }
}

/// `count` equally spaced points spanning `[lo, hi]`.
fn grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, CliError> {
    if count < 2 {
        return Err(CliError::Usage("--grid needs at least 2 points".into()));
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect())
}

fn render(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Likelihood { data, rho, output } => {
            let cc = data.cross_count()?;
            let rate = RecombinationRate::new(*rho).map_err(usage)?;
            let ll = log_likelihood(&cc, rate);
            record(
                &LikelihoodOut {
                    n: cc.n_meioses(),
                    y: cc.n_crossovers(),
                    rho: *rho,
                    log_likelihood: ll.ln(),
                    likelihood: ll.value(),
                },
                output.format,
            )
        }
        Command::Marginal {
            data,
            mixture,
            method,
            output,
        } => {
            let cc = data.cross_count()?;
            let m = mixture.mixture()?;
            let result = match method {
                Method::Exact => marginal_exact_haldane(&cc, &m)?,
                Method::Approx => marginal_approx_haldane(&cc, &m)?,
                Method::Quadrature => {
                    let r = log_marginal_continuous(&cc, m.continuous())?;
                    let w = m.continuous_weight();
                    linkage_core::inference::MarginalResult {
                        log_marginal: r.log_marginal.scale(w),
                        error_estimate: r.error_estimate * w,
                        ..r
                    }
                }
            };
            record(
                &MarginalOut {
                    n: cc.n_meioses(),
                    y: cc.n_crossovers(),
                    method: result.method,
                    continuous_weight: m.continuous_weight(),
                    log_marginal: result.log_marginal.ln(),
                    marginal: result.log_marginal.value(),
                    error_estimate: result.error_estimate,
                },
                output.format,
            )
        }
        Command::BayesFactor {
            data,
            mixture,
            output,
        } => {
            let cc = data.cross_count()?;
            let m = mixture.mixture()?;
            let r = bayes_factor_test(&cc, &m)?;
            let flat = matches!(m.continuous(), ContinuousPrior::FlatHaldane);
            let (exact, approx) = if flat {
                (
                    Some(marginal_exact_haldane(&cc, &m)?.log_marginal.ln()),
                    Some(marginal_approx_haldane(&cc, &m)?.log_marginal.ln()),
                )
            } else {
                (None, None)
            };
            record(
                &BayesFactorOut {
                    n: cc.n_meioses(),
                    y: cc.n_crossovers(),
                    log_bf: r.log_bayes_factor,
                    bf: r.bayes_factor(),
                    prior_odds: r.prior_odds,
                    posterior_odds: r.posterior_odds,
                    posterior_prob_linked: r.posterior_prob_linked,
                    log_marginal_exact: exact,
                    log_marginal_approx: approx,
                    log_marginal_linked: r.log_marginal_linked.ln(),
                    linked_method: r.linked_method,
                    log_likelihood_unlinked: r.log_likelihood_unlinked.ln(),
                    log_marginal_mixture: r.log_marginal_mixture.ln(),
                },
                output.format,
            )
        }
        Command::PriorDensity {
            prior,
            grid: count,
            output,
        } => {
            let p = prior.parse()?;
            let (lo, hi) = p.support();
            let pts: Vec<Point> = grid(lo, hi, *count)?
                .into_iter()
                .map(|rho| Point {
                    rho,
                    density: p.density(rho),
                })
                .collect();
            points(&pts, output.format)
        }
        Command::PriorSample {
            prior,
            seed,
            n_samples,
            output,
        } => {
            let p = prior.parse()?;
            if *n_samples == 0 {
                return Err(CliError::Usage("--n-samples must be at least 1".into()));
            }
            let samples = sample_prior(&seed.stream(), &p, *n_samples)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&Samples {
                    seed: seed.seed,
                    stream: seed.stream,
                    samples,
                }),
                Format::Csv => {
                    let mut s = String::from("rho\n");
                    for x in samples {
                        s.push_str(&format!("{x}\n"));
                    }
                    Ok(s)
                }
            }
        }
        Command::PosteriorDensity {
            data,
            prior,
            rho,
            grid: count,
            output,
        } => {
            let cc = data.cross_count()?;
            let p = prior.parse()?;
            let post = Posterior::new(&cc, &p)?;
            let (lo, hi) = p.support();
            let xs = match rho {
                Some(r) if *r < lo || *r > hi => {
                    return Err(CliError::Usage(format!(
                        "rho {r} outside the prior support [{lo}, {hi}]"
                    )))
                }
                Some(r) => vec![*r],
                None => grid(lo, hi, *count)?,
            };
            let pts: Vec<Point> = xs
                .into_iter()
                .map(|rho| Point {
                    rho,
                    density: post.density(rho),
                })
                .collect();
            points(&pts, output.format)
        }
        Command::Figure1 {
            seed,
            n_samples,
            bins,
            length,
            output,
        } => {
            if *n_samples == 0 || *bins == 0 {
                return Err(CliError::Usage(
                    "--n-samples and --bins must be at least 1".into(),
                ));
            }
            let prior = ContinuousPrior::haldane_distance(*length).map_err(usage)?;
            let hist = figure1(&seed.stream(), *n_samples, *bins, *length)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    hist.write_csv(&mut buf, |r| prior.density(r))?;
                    Ok(String::from_utf8(buf).expect("csv output is ascii"))
                }
                Format::Json => to_json(&HistogramOut {
                    seed: seed.seed,
                    stream: seed.stream,
                    n_samples: hist.n_samples,
                    analytic_densities: hist.midpoints().map(|m| prior.density(m)).collect(),
                    bin_edges: hist.bin_edges,
                    counts: hist.counts,
                    densities: hist.densities,
                }),
            }
        }
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Likelihood { output, .. }
        | Command::Marginal { output, .. }
        | Command::BayesFactor { output, .. }
        | Command::PriorDensity { output, .. }
        | Command::PriorSample { output, .. }
        | Command::PosteriorDensity { output, .. }
        | Command::Figure1 { output, .. } => output,
    }
}

/// Runs one command, writing the artifact to `--out` if given and to
/// `stdout` otherwise.
pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> Result<(), CliError> {
    let text = render(&cli.command)?;
    match &output_args(&cli.command).out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
