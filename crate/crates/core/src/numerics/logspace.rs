use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A nonnegative real stored as its natural log, with an explicit zero flag.
///
/// When `is_zero` is set the magnitude is meaningless and is kept at
/// `-inf` only for convenience.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_magnitude: f64,
    pub is_zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
        is_zero: true,
    };

    pub const ONE: LogValue = LogValue {
        log_magnitude: 0.0,
        is_zero: false,
    };

    /// Wraps a natural log; `-inf` maps to the zero value.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_magnitude: ln,
                is_zero: false,
            }
        }
    }

    pub fn from_linear(v: f64) -> Result<Self> {
        if v.is_nan() || v < 0.0 || v.is_infinite() {
            return Err(domain(format!(
                "LogValue requires a finite nonnegative value, got {v}"
            )));
        }
        Ok(Self::from_ln(v.ln()))
    }

    /// Natural log, `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    /// Linear-scale value. Only for reporting; may underflow to 0.
    pub fn value(&self) -> f64 {
        self.ln().exp()
    }

    /// Multiplies by a nonnegative linear factor.
    pub fn scale(self, factor: f64) -> LogValue {
        if factor == 0.0 {
            Self::ZERO
        } else {
            self * Self::from_ln(factor.ln())
        }
    }
}

impl std::ops::Mul for LogValue {
    type Output = LogValue;

    fn mul(self, other: LogValue) -> LogValue {
        if self.is_zero || other.is_zero {
            Self::ZERO
        } else {
            Self::from_ln(self.log_magnitude + other.log_magnitude)
        }
    }
}

/// `ln Σ wᵢ exp(ℓᵢ)`, factoring out the largest exponent.
pub fn log_sum_weighted(terms: &[(f64, LogValue)]) -> Result<LogValue> {
    if terms.is_empty() {
        return Err(domain("log_sum_weighted needs at least one term"));
    }
    if let Some((w, _)) = terms.iter().find(|(w, _)| !w.is_finite() || *w < 0.0) {
        return Err(domain(format!(
            "weights must be finite and nonnegative, got {w}"
        )));
    }
    let live: Vec<f64> = terms
        .iter()
        .filter(|(w, v)| *w > 0.0 && !v.is_zero)
        .map(|(w, v)| w.ln() + v.log_magnitude)
        .collect();
    let max = live.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(LogValue::ZERO);
    }
    let sum: f64 = live.iter().map(|l| (l - max).exp()).sum();
    Ok(LogValue::from_ln(max + sum.ln()))
}
