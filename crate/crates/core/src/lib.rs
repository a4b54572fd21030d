//! Bayes factor tests for genetic linkage from binomial crossover counts.
//!
//! The unlinked hypothesis puts the recombination rate at ρ = 1/2; the
//! linked hypothesis spreads it over `[0, 1/2]` with a continuous prior. The
//! crate provides the flat prior with its closed-form marginals, a prior
//! derived from uniformly placed loci and Haldane's mapping function, generic
//! quadrature marginals for any proper prior, and seeded Monte Carlo checks.
//!
//! ```
//! use linkage_core::inference::bayes_factor_test;
//! use linkage_core::model::{CrossCount, MixturePrior};
//!
//! let result = bayes_factor_test(&CrossCount::primrose(), &MixturePrior::primrose()).unwrap();
//! assert!(result.posterior_prob_linked > 0.97);
//! ```

pub mod error;
pub mod inference;
pub mod model;
pub mod montecarlo;
pub mod numerics;

pub use error::{LinkageError, Result};
