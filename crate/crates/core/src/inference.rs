//! Likelihood, marginal likelihoods, Bayes factors and posterior summaries.
//!
//! Everything is carried in natural-log space. Marginals returned by the
//! `marginal_*` functions are the linked (continuous) branch of the mixture,
//! already multiplied by the continuous weight; the full mixture marginal is
//! part of [`TestResult`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, LinkageError, Result};
use crate::model::{ContinuousPrior, CrossCount, MixturePrior, RecombinationRate};
use crate::numerics::{
    integrate_with, ln_reg_inc_beta, log_beta, log_choose, log_sum_weighted, LogValue,
    QuadratureOptions, QuadratureResult,
};

const LN_2: f64 = std::f64::consts::LN_2;

/// Tolerances used by [`log_marginal_continuous`]. The integrand is scaled
/// so that the likelihood peaks at 1, which makes the absolute tolerance
/// negligible next to any realistic marginal.
const MARGINAL_REL_TOL: f64 = 1e-12;
const MARGINAL_ABS_TOL: f64 = 1e-20;

/// Half-width, in binomial standard deviations, of the window placed around
/// the likelihood peak before adaptive refinement starts.
const PEAK_WINDOW_SDS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalMethod {
    ClosedForm,
    Quadrature,
    Approximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalResult {
    pub log_marginal: LogValue,
    pub method: MarginalMethod,
    /// Absolute, linear scale; zero for closed forms.
    pub error_estimate: f64,
}

/// Linked (continuous component) versus unlinked (point mass) test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub log_bayes_factor: f64,
    pub prior_odds: f64,
    pub log_prior_odds: f64,
    pub posterior_odds: f64,
    pub log_posterior_odds: f64,
    pub posterior_prob_linked: f64,
    /// `p(y | linked)`, not weighted.
    pub log_marginal_linked: LogValue,
    pub linked_method: MarginalMethod,
    /// `p(y | ρ = point mass location)`.
    pub log_likelihood_unlinked: LogValue,
    /// `p(y)` under the whole mixture.
    pub log_marginal_mixture: LogValue,
}

impl TestResult {
    pub fn bayes_factor(&self) -> f64 {
        self.log_bayes_factor.exp()
    }
}

/// `a · ln(t)` with `0 · ln 0 = 0`.
fn xlogy(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * t.ln()
    }
}

/// Binomial log-likelihood with the coefficient supplied by the caller.
fn ln_binomial(ln_coeff: f64, y: f64, rest: f64, rho: f64) -> f64 {
    let ln_rest = if rest == 0.0 {
        0.0
    } else {
        rest * (-rho).ln_1p()
    };
    ln_coeff + xlogy(y, rho) + ln_rest
}

pub(crate) struct Likelihood {
    ln_coeff: f64,
    y: f64,
    rest: f64,
}

impl Likelihood {
    pub(crate) fn new(data: &CrossCount) -> Self {
        Self {
            ln_coeff: log_choose(data.n_meioses(), data.n_crossovers())
                .expect("CrossCount guarantees y <= N"),
            y: data.n_crossovers() as f64,
            rest: data.n_non_crossovers() as f64,
        }
    }

    pub(crate) fn ln_at(&self, rho: f64) -> f64 {
        ln_binomial(self.ln_coeff, self.y, self.rest, rho)
    }
}

/// `ln p(y | ρ, N) = ln C(N, y) + y ln ρ + (N − y) ln(1 − ρ)`.
pub fn log_likelihood(data: &CrossCount, rho: RecombinationRate) -> LogValue {
    LogValue::from_ln(Likelihood::new(data).ln_at(rho.value()))
}

/// `ln [ 2 C(N, y) B(y + 1, N − y + 1) ]`, the flat-prior marginal over `[0, 1]`.
fn ln_flat_marginal_unit_interval(data: &CrossCount) -> f64 {
    let y = data.n_crossovers() as f64;
    let rest = data.n_non_crossovers() as f64;
    let ln_coeff =
        log_choose(data.n_meioses(), data.n_crossovers()).expect("CrossCount guarantees y <= N");
    LN_2 + ln_coeff + log_beta(y + 1.0, rest + 1.0).expect("positive arguments")
}

/// `ln I_{1/2}(y + 1, N − y + 1)`, the share of the unit-interval integral
/// that falls below ρ = 1/2.
fn ln_half_share(data: &CrossCount) -> Result<f64> {
    let y = data.n_crossovers() as f64;
    let rest = data.n_non_crossovers() as f64;
    ln_reg_inc_beta(0.5, y + 1.0, rest + 1.0)
}

/// Unweighted flat-prior marginal on `[0, 1/2)`, in closed form.
fn ln_flat_marginal(data: &CrossCount) -> Result<f64> {
    Ok(ln_flat_marginal_unit_interval(data) + ln_half_share(data)?)
}

fn require_flat(mixture: &MixturePrior) -> Result<()> {
    match mixture.continuous() {
        ContinuousPrior::FlatHaldane => Ok(()),
        other => Err(LinkageError::UnsupportedPrior(format!(
            "closed forms are only available for the flat prior, got {other:?}"
        ))),
    }
}

fn weighted(weight: f64, ln: f64) -> LogValue {
    LogValue::from_ln(ln).scale(weight)
}

/// Linked branch of the marginal with the flat prior's upper limit pushed
/// from 1/2 to 1: `w · 2 · C(N, y) · B(y + 1, N − y + 1)`.
pub fn marginal_approx_haldane(
    data: &CrossCount,
    mixture: &MixturePrior,
) -> Result<MarginalResult> {
    require_flat(mixture)?;
    Ok(MarginalResult {
        log_marginal: weighted(
            mixture.continuous_weight(),
            ln_flat_marginal_unit_interval(data),
        ),
        method: MarginalMethod::Approximation,
        error_estimate: 0.0,
    })
}

/// Linked branch of the marginal under the flat prior on `[0, 1/2)`:
/// `w · 2 · C(N, y) · B(y + 1, N − y + 1) · I_{1/2}(y + 1, N − y + 1)`.
pub fn marginal_exact_haldane(data: &CrossCount, mixture: &MixturePrior) -> Result<MarginalResult> {
    require_flat(mixture)?;
    Ok(MarginalResult {
        log_marginal: weighted(mixture.continuous_weight(), ln_flat_marginal(data)?),
        method: MarginalMethod::ClosedForm,
        error_estimate: 0.0,
    })
}

/// Whether the prior density has an integrable pole at the lower / upper
/// end of its support.
fn endpoint_poles(prior: &ContinuousPrior) -> (bool, bool) {
    match *prior {
        ContinuousPrior::ScaledBeta { alpha, beta } => (alpha < 1.0, beta < 1.0),
        _ => (false, false),
    }
}

/// Breakpoints for the marginal integral: the support ends plus a window
/// around the likelihood peak.
fn breakpoints(data: &CrossCount, lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let n = data.n_meioses() as f64;
    if n == 0.0 {
        return (vec![lo, hi], 0.5 * (lo + hi));
    }
    let mode = (data.n_crossovers() as f64 / n).clamp(lo, hi);
    let sd = ((mode * (1.0 - mode)).max(1.0 / n) / n).sqrt();
    let mut pts = vec![lo, hi];
    for p in [
        mode - PEAK_WINDOW_SDS * sd,
        mode,
        mode + PEAK_WINDOW_SDS * sd,
    ] {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    (pts, mode)
}

/// Integral of a Beta-type pole piece of the scaled beta prior.
///
/// On `[0, p]` with `α < 1` the substitution `ρ = p u^{1/α}` turns
/// `(2ρ)^{α−1} dρ` into `(2p)^{α−1} (p/α) du`; on `[q, 1/2]` with `β < 1` the
/// substitution `1 − 2ρ = (1 − 2q) v^{1/β}` does the same for
/// `(1 − 2ρ)^{β−1}`. The integrands below are those cancelled forms, finite
/// at `u = 0` and `v = 0`.
fn scaled_beta_pole_piece<L: Fn(f64) -> f64>(
    ln_lik: &L,
    alpha: f64,
    beta: f64,
    piece: (f64, f64),
    pole_on_left: bool,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    let ln_norm = LN_2 - log_beta(alpha, beta)?;
    let (a, b) = piece;
    if pole_on_left {
        let ln_const = ln_norm + (alpha - 1.0) * (2.0 * b).ln() + (b / alpha).ln();
        integrate_with(
            |u: f64| {
                let rho = b * u.powf(1.0 / alpha);
                let ln_tail = if beta == 1.0 {
                    0.0
                } else {
                    (beta - 1.0) * (-2.0 * rho).ln_1p()
                };
                (ln_lik(rho) + ln_tail + ln_const).exp()
            },
            &[0.0, 1.0],
            opts,
        )
    } else {
        let gap = 1.0 - 2.0 * a;
        let ln_const = ln_norm + (beta - 1.0) * gap.ln() + (gap / (2.0 * beta)).ln();
        integrate_with(
            |v: f64| {
                let rho = 0.5 - 0.5 * gap * v.powf(1.0 / beta);
                let ln_head = if alpha == 1.0 {
                    0.0
                } else {
                    (alpha - 1.0) * (2.0 * rho).ln()
                };
                (ln_lik(rho) + ln_head + ln_const).exp()
            },
            &[0.0, 1.0],
            opts,
        )
    }
}

/// `∫ p(y | ρ) p(ρ) dρ` over the prior's support by adaptive quadrature.
///
/// The integrand is evaluated as `exp(ln p(y|ρ) + ln p(ρ) − shift)` with the
/// shift set to the likelihood maximum over the support.
pub fn log_marginal_continuous(
    data: &CrossCount,
    prior: &ContinuousPrior,
) -> Result<MarginalResult> {
    if !prior.is_proper() {
        return Err(LinkageError::ImproperPrior);
    }
    let lik = Likelihood::new(data);
    let (lo, hi) = prior.support();
    let (mut pts, mode) = breakpoints(data, lo, hi);
    let (left_pole, right_pole) = endpoint_poles(prior);
    if left_pole && right_pole && pts.len() == 2 {
        pts.insert(1, 0.5 * (lo + hi));
    }
    let shift = lik.ln_at(mode);
    let ln_integrand = |rho: f64| lik.ln_at(rho) + prior.ln_density(rho) - shift;

    let opts = QuadratureOptions::with_tolerances(MARGINAL_REL_TOL, MARGINAL_ABS_TOL);
    let ln_lik = |rho: f64| lik.ln_at(rho) - shift;
    let last = pts.len() - 2;
    let mut value = 0.0;
    let mut error = 0.0;
    for (i, w) in pts.windows(2).enumerate() {
        let piece = (w[0], w[1]);
        let r = match (*prior, i == 0 && left_pole, i == last && right_pole) {
            (ContinuousPrior::ScaledBeta { alpha, beta }, true, _) => {
                scaled_beta_pole_piece(&ln_lik, alpha, beta, piece, true, &opts)?
            }
            (ContinuousPrior::ScaledBeta { alpha, beta }, _, true) => {
                scaled_beta_pole_piece(&ln_lik, alpha, beta, piece, false, &opts)?
            }
            _ => integrate_with(|rho| ln_integrand(rho).exp(), &[piece.0, piece.1], &opts)?,
        };
        value += r.value;
        error += r.error_estimate;
    }
    if value.is_nan() || value <= 0.0 {
        return Err(domain("marginal likelihood integral vanished"));
    }
    Ok(MarginalResult {
        log_marginal: LogValue::from_ln(shift + value.ln()),
        method: MarginalMethod::Quadrature,
        error_estimate: error * shift.exp(),
    })
}

/// Unweighted linked marginal: closed form for the flat prior, quadrature
/// otherwise.
fn linked_marginal(data: &CrossCount, prior: &ContinuousPrior) -> Result<MarginalResult> {
    match prior {
        ContinuousPrior::FlatHaldane => Ok(MarginalResult {
            log_marginal: LogValue::from_ln(ln_flat_marginal(data)?),
            method: MarginalMethod::ClosedForm,
            error_estimate: 0.0,
        }),
        _ => log_marginal_continuous(data, prior),
    }
}

/// Bayes factor of linkage (continuous component) against no linkage (the
/// point mass), with prior and posterior odds from the mixture weights.
pub fn bayes_factor_test(data: &CrossCount, mixture: &MixturePrior) -> Result<TestResult> {
    let w_point = mixture.point_mass_weight();
    let w_cont = mixture.continuous_weight();
    if w_point == 0.0 || w_cont == 0.0 {
        return Err(LinkageError::DegenerateHypothesis(w_point));
    }
    let linked = linked_marginal(data, mixture.continuous())?;
    let unlinked = log_likelihood(data, mixture.point_mass_location());

    let log_bayes_factor = linked.log_marginal.ln() - unlinked.ln();
    let log_prior_odds = w_cont.ln() - w_point.ln();
    let log_posterior_odds = log_prior_odds + log_bayes_factor;
    let log_marginal_mixture =
        log_sum_weighted(&[(w_cont, linked.log_marginal), (w_point, unlinked)])?;

    Ok(TestResult {
        log_bayes_factor,
        prior_odds: w_cont / w_point,
        log_prior_odds,
        posterior_odds: w_cont / w_point * log_bayes_factor.exp(),
        log_posterior_odds,
        posterior_prob_linked: 1.0 / (1.0 + (-log_posterior_odds).exp()),
        log_marginal_linked: linked.log_marginal,
        linked_method: linked.method,
        log_likelihood_unlinked: unlinked,
        log_marginal_mixture,
    })
}

/// Normalized posterior of ρ under the linked hypothesis.
#[derive(Debug, Clone, Copy)]
pub struct Posterior {
    prior: ContinuousPrior,
    ln_coeff: f64,
    y: f64,
    rest: f64,
    ln_normalizer: f64,
}

impl Posterior {
    pub fn new(data: &CrossCount, prior: &ContinuousPrior) -> Result<Self> {
        if !prior.is_proper() {
            return Err(LinkageError::ImproperPrior);
        }
        let lik = Likelihood::new(data);
        let ln_normalizer = linked_marginal(data, prior)?.log_marginal.ln();
        Ok(Self {
            prior: *prior,
            ln_coeff: lik.ln_coeff,
            y: lik.y,
            rest: lik.rest,
            ln_normalizer,
        })
    }

    pub fn ln_normalizer(&self) -> f64 {
        self.ln_normalizer
    }

    /// Posterior density at `rho`; zero outside the prior's support.
    pub fn density(&self, rho: f64) -> f64 {
        let ln_prior = self.prior.ln_density(rho);
        if ln_prior == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln_binomial(self.ln_coeff, self.y, self.rest, rho) + ln_prior - self.ln_normalizer).exp()
    }
}

/// `p(ρ | y) = p(y | ρ) p(ρ) / ∫ p(y | ρ') p(ρ') dρ'`.
pub fn posterior_density(
    data: &CrossCount,
    prior: &ContinuousPrior,
    rho: RecombinationRate,
) -> Result<f64> {
    let (lo, hi) = prior.support();
    if !(lo..=hi).contains(&rho.value()) {
        return Err(domain(format!(
            "rate {} lies outside the prior support [{lo}, {hi}]",
            rho.value()
        )));
    }
    Ok(Posterior::new(data, prior)?.density(rho.value()))
}

/// Maximum likelihood estimate `y / N`, clamped to the parameter space
/// `[0, 1/2]`.
pub fn mle(data: &CrossCount) -> Result<RecombinationRate> {
    if data.n_meioses() == 0 {
        return Err(LinkageError::NoData);
    }
    let rho = data.n_crossovers() as f64 / data.n_meioses() as f64;
    RecombinationRate::new(rho.min(0.5))
}
