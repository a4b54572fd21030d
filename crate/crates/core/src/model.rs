//! Data, recombination rates, chromosome geometry and priors on the
//! recombination rate.

use serde::{Deserialize, Serialize};

use crate::error::{domain, LinkageError, Result};
use crate::numerics::{log_beta, reg_inc_beta};

/// Map length of a chromosome in Morgan; about one crossover per meiosis.
pub const DEFAULT_CHROMOSOME_LENGTH: f64 = 1.0;

/// Recombination rate between unlinked loci.
pub const FREE_RECOMBINATION: f64 = 0.5;

/// Prior probability that two loci sit on different chromosomes when there
/// are twelve chromosomes of equal length.
pub const PRIMROSE_POINT_MASS_WEIGHT: f64 = 11.0 / 12.0;

const LN_2: f64 = std::f64::consts::LN_2;

/// Observed meioses and the number of them that were crossovers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCrossCount")]
pub struct CrossCount {
    n_meioses: u64,
    n_crossovers: u64,
}

#[derive(Deserialize)]
struct RawCrossCount {
    n_meioses: u64,
    n_crossovers: u64,
}

impl TryFrom<RawCrossCount> for CrossCount {
    type Error = LinkageError;
    fn try_from(raw: RawCrossCount) -> Result<Self> {
        CrossCount::new(raw.n_meioses, raw.n_crossovers)
    }
}

impl CrossCount {
    pub fn new(n_meioses: u64, n_crossovers: u64) -> Result<Self> {
        if n_crossovers > n_meioses {
            return Err(domain(format!(
                "crossover count {n_crossovers} exceeds number of meioses {n_meioses}"
            )));
        }
        Ok(Self {
            n_meioses,
            n_crossovers,
        })
    }

    /// 160 crossovers in 400 meioses.
    pub fn primrose() -> Self {
        Self {
            n_meioses: 400,
            n_crossovers: 160,
        }
    }

    pub fn n_meioses(&self) -> u64 {
        self.n_meioses
    }

    pub fn n_crossovers(&self) -> u64 {
        self.n_crossovers
    }

    pub fn n_non_crossovers(&self) -> u64 {
        self.n_meioses - self.n_crossovers
    }
}

/// A recombination probability in `[0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RecombinationRate(f64);

impl RecombinationRate {
    pub const UNLINKED: RecombinationRate = RecombinationRate(FREE_RECOMBINATION);

    pub fn new(rho: f64) -> Result<Self> {
        if (0.0..=FREE_RECOMBINATION).contains(&rho) {
            Ok(Self(rho))
        } else {
            Err(domain(format!(
                "recombination rate must lie in [0, 1/2], got {rho}"
            )))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RecombinationRate {
    type Error = LinkageError;
    fn try_from(rho: f64) -> Result<Self> {
        Self::new(rho)
    }
}

impl From<RecombinationRate> for f64 {
    fn from(r: RecombinationRate) -> f64 {
        r.0
    }
}

/// Distance between two loci as a fraction of a chromosome of `length` Morgan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneticDistance {
    x: f64,
    length: f64,
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "chromosome length must be positive, got {length}"
        )))
    }
}

impl GeneticDistance {
    /// Distance on a chromosome of the default length of one Morgan.
    pub fn new(x: f64) -> Result<Self> {
        Self::with_length(x, DEFAULT_CHROMOSOME_LENGTH)
    }

    pub fn with_length(x: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(domain(format!(
                "relative distance must lie in [0, 1], got {x}"
            )));
        }
        Ok(Self { x, length })
    }

    pub fn fraction(&self) -> f64 {
        self.x
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Distance in Morgan.
    pub fn morgans(&self) -> f64 {
        self.x * self.length
    }
}

/// Haldane's mapping function, `ρ = (1 − e^{−2Lx}) / 2`.
pub fn haldane_map(d: GeneticDistance) -> RecombinationRate {
    RecombinationRate(-0.5 * (-2.0 * d.morgans()).exp_m1())
}

/// Inverse of [`haldane_map`], `x = −ln(1 − 2ρ) / (2L)`.
///
/// Fails at `ρ = 1/2` (loci are unlinked, the distance diverges) and when
/// `ρ` exceeds the largest rate reachable on a chromosome of length `L`.
pub fn haldane_inverse(rho: RecombinationRate, length: f64) -> Result<GeneticDistance> {
    check_length(length)?;
    if rho.0 >= FREE_RECOMBINATION {
        return Err(domain(
            "recombination rate 1/2 corresponds to unlinked loci",
        ));
    }
    let x = -(-2.0 * rho.0).ln_1p() / (2.0 * length);
    // rounding at the support endpoint can land a hair past 1
    let x = if x > 1.0 && x <= 1.0 + 1e-12 { 1.0 } else { x };
    GeneticDistance::with_length(x, length)
}

/// Density of the distance between two uniformly placed loci, Beta(1, 2).
pub fn distance_prior_density(d: GeneticDistance) -> f64 {
    2.0 * (1.0 - d.x)
}

/// Prior families for the recombination rate of linked loci.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorSpec", into = "PriorSpec")]
pub enum ContinuousPrior {
    /// Uniform on `[0, 1/2)`, density 2.
    FlatHaldane,
    /// Beta(α, β) stretched linearly from `[0, 1]` onto `[0, 1/2]`.
    ScaledBeta { alpha: f64, beta: f64 },
    /// Beta(1, 2) distance pushed through the mapping function on a
    /// chromosome of `length` Morgan.
    HaldaneDistance { length: f64 },
    /// Unnormalized `1/ρ`.
    ImproperOneOverRho,
    /// Unnormalized `1/(ρ(1 − ρ))`.
    ImproperOneOverRhoOneMinusRho,
}

impl ContinuousPrior {
    pub fn scaled_beta(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!(
                    "scaled beta {name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self::ScaledBeta { alpha, beta })
    }

    pub fn haldane_distance(length: f64) -> Result<Self> {
        check_length(length)?;
        Ok(Self::HaldaneDistance { length })
    }

    pub fn is_proper(&self) -> bool {
        !matches!(
            self,
            Self::ImproperOneOverRho | Self::ImproperOneOverRhoOneMinusRho
        )
    }

    /// Closed support `(lo, hi)` of the density.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::HaldaneDistance { length } => (0.0, -0.5 * (-2.0 * length).exp_m1()),
            _ => (0.0, FREE_RECOMBINATION),
        }
    }

    fn contains(&self, rho: f64) -> bool {
        let (lo, hi) = self.support();
        (lo..=hi).contains(&rho)
    }

    /// Density at `rho`; zero outside the support. Improper variants return
    /// the unnormalized density, which is `+inf` at their poles.
    pub fn density(&self, rho: f64) -> f64 {
        if !self.contains(rho) {
            return 0.0;
        }
        match *self {
            Self::FlatHaldane => 2.0,
            Self::HaldaneDistance { length } => {
                let one_minus_2rho = 1.0 - 2.0 * rho;
                let x = -(-2.0 * rho).ln_1p() / (2.0 * length);
                (2.0 * (1.0 - x)).max(0.0) / (length * one_minus_2rho)
            }
            Self::ScaledBeta { .. } => self.ln_density(rho).exp(),
            Self::ImproperOneOverRho => 1.0 / rho,
            Self::ImproperOneOverRhoOneMinusRho => 1.0 / (rho * (1.0 - rho)),
        }
    }

    /// Natural log of [`density`](Self::density).
    pub fn ln_density(&self, rho: f64) -> f64 {
        if !self.contains(rho) {
            return f64::NEG_INFINITY;
        }
        match *self {
            Self::FlatHaldane => LN_2,
            Self::HaldaneDistance { length } => {
                let ln_1m_2rho = (-2.0 * rho).ln_1p();
                let one_minus_x = 1.0 + ln_1m_2rho / (2.0 * length);
                if one_minus_x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                LN_2 + one_minus_x.ln() - length.ln() - ln_1m_2rho
            }
            Self::ScaledBeta { alpha, beta } => {
                let t = 2.0 * rho;
                let ln_t = xlogy(alpha - 1.0, t);
                let ln_1mt = if beta == 1.0 {
                    0.0
                } else {
                    (beta - 1.0) * (-t).ln_1p()
                };
                // parameters were validated at construction
                LN_2 + ln_t + ln_1mt - log_beta(alpha, beta).unwrap_or(f64::NAN)
            }
            Self::ImproperOneOverRho => -rho.ln(),
            Self::ImproperOneOverRhoOneMinusRho => -rho.ln() - (-rho).ln_1p(),
        }
    }

    /// Cumulative distribution function; only defined for proper priors.
    pub fn cdf(&self, rho: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !self.is_proper() {
            return Err(LinkageError::ImproperPrior);
        }
        if rho <= lo {
            return Ok(0.0);
        }
        if rho >= hi {
            return Ok(1.0);
        }
        match *self {
            Self::FlatHaldane => Ok(2.0 * rho),
            Self::ScaledBeta { alpha, beta } => reg_inc_beta(2.0 * rho, alpha, beta),
            Self::HaldaneDistance { length } => {
                let x = (-(-2.0 * rho).ln_1p() / (2.0 * length)).min(1.0);
                Ok(1.0 - (1.0 - x) * (1.0 - x))
            }
            _ => unreachable!("improper priors rejected above"),
        }
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

/// Wire form of a prior:
/// `{"type": "flat"|"scaled_beta"|"haldane_distance"|"improper_1_over_rho"|"improper_1_over_rho_1mrho", "alpha"?, "beta"?, "L"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

impl TryFrom<PriorSpec> for ContinuousPrior {
    type Error = LinkageError;

    fn try_from(spec: PriorSpec) -> Result<Self> {
        let unexpected = |field: &str, present: bool| -> Result<()> {
            if present {
                Err(LinkageError::InvalidSpec(format!(
                    "field \"{field}\" does not apply to prior type \"{}\"",
                    spec.kind
                )))
            } else {
                Ok(())
            }
        };
        let invalid = |e: LinkageError| LinkageError::InvalidSpec(e.to_string());
        match spec.kind.as_str() {
            "flat" | "scaled_beta" | "improper_1_over_rho" | "improper_1_over_rho_1mrho" => {
                unexpected("L", spec.length.is_some())?
            }
            "haldane_distance" => {}
            other => {
                return Err(LinkageError::InvalidSpec(format!(
                    "unknown prior type \"{other}\""
                )))
            }
        }
        if spec.kind != "scaled_beta" {
            unexpected("alpha", spec.alpha.is_some())?;
            unexpected("beta", spec.beta.is_some())?;
        }
        match spec.kind.as_str() {
            "flat" => Ok(Self::FlatHaldane),
            "scaled_beta" => {
                let (Some(alpha), Some(beta)) = (spec.alpha, spec.beta) else {
                    return Err(LinkageError::InvalidSpec(
                        "scaled_beta requires both \"alpha\" and \"beta\"".into(),
                    ));
                };
                Self::scaled_beta(alpha, beta).map_err(invalid)
            }
            "haldane_distance" => {
                Self::haldane_distance(spec.length.unwrap_or(DEFAULT_CHROMOSOME_LENGTH))
                    .map_err(invalid)
            }
            "improper_1_over_rho" => Ok(Self::ImproperOneOverRho),
            _ => Ok(Self::ImproperOneOverRhoOneMinusRho),
        }
    }
}

impl From<ContinuousPrior> for PriorSpec {
    fn from(p: ContinuousPrior) -> Self {
        let spec = |kind: &str| PriorSpec {
            kind: kind.to_string(),
            alpha: None,
            beta: None,
            length: None,
        };
        match p {
            ContinuousPrior::FlatHaldane => spec("flat"),
            ContinuousPrior::ScaledBeta { alpha, beta } => PriorSpec {
                alpha: Some(alpha),
                beta: Some(beta),
                ..spec("scaled_beta")
            },
            ContinuousPrior::HaldaneDistance { length } => PriorSpec {
                length: Some(length),
                ..spec("haldane_distance")
            },
            ContinuousPrior::ImproperOneOverRho => spec("improper_1_over_rho"),
            ContinuousPrior::ImproperOneOverRhoOneMinusRho => spec("improper_1_over_rho_1mrho"),
        }
    }
}

/// Point mass at `point_mass_location` (unlinked) mixed with a proper
/// continuous prior (linked).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureSpec", into = "MixtureSpec")]
pub struct MixturePrior {
    point_mass_weight: f64,
    point_mass_location: RecombinationRate,
    continuous_weight: f64,
    continuous: ContinuousPrior,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureSpec {
    point_mass_weight: f64,
    #[serde(default = "unlinked_rate")]
    point_mass_location: f64,
    continuous: ContinuousPrior,
}

fn unlinked_rate() -> f64 {
    FREE_RECOMBINATION
}

impl TryFrom<MixtureSpec> for MixturePrior {
    type Error = LinkageError;
    fn try_from(spec: MixtureSpec) -> Result<Self> {
        MixturePrior::new(
            spec.point_mass_weight,
            RecombinationRate::new(spec.point_mass_location)?,
            spec.continuous,
        )
    }
}

impl From<MixturePrior> for MixtureSpec {
    fn from(m: MixturePrior) -> Self {
        MixtureSpec {
            point_mass_weight: m.point_mass_weight,
            point_mass_location: m.point_mass_location.value(),
            continuous: m.continuous,
        }
    }
}

impl MixturePrior {
    pub fn new(
        point_mass_weight: f64,
        point_mass_location: RecombinationRate,
        continuous: ContinuousPrior,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&point_mass_weight) {
            return Err(domain(format!(
                "point mass weight must lie in [0, 1], got {point_mass_weight}"
            )));
        }
        if !continuous.is_proper() {
            return Err(LinkageError::ImproperPrior);
        }
        Ok(Self {
            point_mass_weight,
            point_mass_location,
            continuous_weight: 1.0 - point_mass_weight,
            continuous,
        })
    }

    /// Point mass 11/12 at ρ = 1/2 and the flat prior on `[0, 1/2)`.
    pub fn primrose() -> Self {
        Self::with_continuous(ContinuousPrior::FlatHaldane)
    }

    /// Primrose weights with a different continuous component.
    ///
    /// # Panics
    /// If `continuous` is improper.
    pub fn with_continuous(continuous: ContinuousPrior) -> Self {
        Self::new(
            PRIMROSE_POINT_MASS_WEIGHT,
            RecombinationRate::UNLINKED,
            continuous,
        )
        .expect("continuous component must be proper")
    }

    pub fn point_mass_weight(&self) -> f64 {
        self.point_mass_weight
    }

    pub fn point_mass_location(&self) -> RecombinationRate {
        self.point_mass_location
    }

    pub fn continuous_weight(&self) -> f64 {
        self.continuous_weight
    }

    pub fn continuous(&self) -> &ContinuousPrior {
        &self.continuous
    }
}
