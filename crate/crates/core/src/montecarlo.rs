//! Seeded simulation of the distance prior, its push-forward through the
//! mapping function, histograms, and Monte Carlo marginal likelihoods.
//!
//! # Generator contract
//!
//! Every stream is a ChaCha20 generator (`rand_chacha::ChaCha20Rng`) seeded
//! with `ChaCha20Rng::seed_from_u64(seed)` and switched to ChaCha stream
//! `stream_id` with `set_stream`. A uniform draw takes one `u64` from the
//! generator and keeps its top 53 bits: `u = (w >> 11) · 2^-53`, so
//! `u ∈ [0, 1)`. Given the same `(seed, stream_id)` the sequence of uniforms,
//! and therefore every sample and histogram produced here, is identical on
//! every platform.

use std::io::{self, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{domain, LinkageError, Result};
use crate::inference::Likelihood;
use crate::model::{haldane_map, ContinuousPrior, CrossCount, GeneticDistance};

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha20Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng(inner)
    }
}

pub struct StreamRng(ChaCha20Rng);

impl StreamRng {
    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }
}

/// Inverse CDF of Beta(1, 2): `x = 1 − √(1 − u)`.
pub fn distance_from_uniform(u: f64) -> f64 {
    1.0 - (1.0 - u).sqrt()
}

/// `n` draws of the relative distance between two uniformly placed loci.
pub fn sample_distance(stream: &SeededStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| distance_from_uniform(rng.uniform()))
        .collect()
}

/// `n` recombination rates: distance draws pushed through the mapping
/// function for a chromosome of `length` Morgan.
pub fn sample_rho(stream: &SeededStream, n: usize, length: f64) -> Result<Vec<f64>> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| {
            let d = GeneticDistance::with_length(distance_from_uniform(rng.uniform()), length)?;
            Ok(haldane_map(d).value())
        })
        .collect()
}

/// `n` draws from a proper prior.
pub fn sample_prior(stream: &SeededStream, prior: &ContinuousPrior, n: usize) -> Result<Vec<f64>> {
    match *prior {
        ContinuousPrior::FlatHaldane => {
            let mut rng = stream.rng();
            Ok((0..n).map(|_| 0.5 * rng.uniform()).collect())
        }
        ContinuousPrior::ScaledBeta { alpha, beta } => {
            let dist = Beta::new(alpha, beta).map_err(|e| domain(e.to_string()))?;
            let mut rng = stream.rng();
            Ok((0..n).map(|_| 0.5 * dist.sample(&mut rng.0)).collect())
        }
        ContinuousPrior::HaldaneDistance { length } => sample_rho(stream, n, length),
        ContinuousPrior::ImproperOneOverRho | ContinuousPrior::ImproperOneOverRhoOneMinusRho => {
            Err(LinkageError::ImproperPrior)
        }
    }
}

/// Equal-width histogram normalized as a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: u64,
}

pub const HISTOGRAM_CSV_HEADER: &str = "bin_lo,bin_hi,count,density,analytic_density";

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// Largest `|density − analytic(midpoint)|` over the bins.
    pub fn max_abs_deviation<F: Fn(f64) -> f64>(&self, analytic: F) -> f64 {
        self.midpoints()
            .zip(&self.densities)
            .map(|(m, d)| (d - analytic(m)).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `bin_lo,bin_hi,count,density,analytic_density`, one row per bin,
    /// with the analytic density evaluated at the bin midpoint.
    pub fn write_csv<W: Write, F: Fn(f64) -> f64>(
        &self,
        mut out: W,
        analytic: F,
    ) -> io::Result<()> {
        writeln!(out, "{HISTOGRAM_CSV_HEADER}")?;
        for (i, w) in self.bin_edges.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            writeln!(
                out,
                "{},{},{},{},{}",
                w[0],
                w[1],
                self.counts[i],
                self.densities[i],
                analytic(mid)
            )?;
        }
        Ok(())
    }
}

/// Bins `samples` into `bins` equal-width bins over `[lo, hi]`.
///
/// A sample outside the range is an error, not a silently dropped value.
pub fn build_histogram(samples: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if samples.is_empty() {
        return Err(LinkageError::EmptySamples);
    }
    if bins == 0 {
        return Err(domain("histogram needs at least one bin"));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(domain(format!("invalid histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let mut bin_edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    bin_edges.push(hi);

    let mut counts = vec![0u64; bins];
    for &s in samples {
        if !(lo..=hi).contains(&s) {
            return Err(LinkageError::OutOfRange { value: s, lo, hi });
        }
        let idx = (((s - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let densities = counts
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(&c, w)| c as f64 / (n * (w[1] - w[0])))
        .collect();
    Ok(Histogram {
        bin_edges,
        densities,
        counts,
        n_samples: samples.len() as u64,
    })
}

/// Default simulation size for the prior histogram.
pub const FIGURE1_SAMPLES: usize = 1_000_000;
pub const FIGURE1_BINS: usize = 50;

/// Histogram of simulated recombination rates over the full support of the
/// distance-derived prior for a chromosome of `length` Morgan.
pub fn figure1(
    stream: &SeededStream,
    n_samples: usize,
    bins: usize,
    length: f64,
) -> Result<Histogram> {
    let prior = ContinuousPrior::haldane_distance(length)?;
    let samples = sample_rho(stream, n_samples, length)?;
    build_histogram(&samples, bins, prior.support())
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMarginal {
    pub estimate: f64,
    pub std_error: f64,
    /// `ln estimate`, usable when `estimate` underflows.
    pub log_estimate: f64,
}

/// Monte Carlo marginal likelihood: the mean of `p(y | ρᵢ)` over `n` prior
/// draws, accumulated relative to the largest log-likelihood seen.
pub fn mc_marginal(
    stream: &SeededStream,
    data: &CrossCount,
    prior: &ContinuousPrior,
    n: usize,
) -> Result<McMarginal> {
    if n == 0 {
        return Err(domain("Monte Carlo marginal needs at least one draw"));
    }
    let lik = Likelihood::new(data);
    let ln_l: Vec<f64> = sample_prior(stream, prior, n)?
        .into_iter()
        .map(|rho| lik.ln_at(rho))
        .collect();
    let max = ln_l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(McMarginal {
            estimate: 0.0,
            std_error: 0.0,
            log_estimate: f64::NEG_INFINITY,
        });
    }

    // Welford on the rescaled likelihoods
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, l) in ln_l.iter().enumerate() {
        let w = (l - max).exp();
        let delta = w - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (w - mean);
    }
    let sd = if n > 1 {
        (m2 / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let log_estimate = max + mean.ln();
    Ok(McMarginal {
        estimate: log_estimate.exp(),
        std_error: max.exp() * sd / (n as f64).sqrt(),
        log_estimate,
    })
}
