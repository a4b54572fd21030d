//! Log-space special functions and adaptive quadrature.

mod logspace;
mod quadrature;
mod special;

pub use logspace::{log_sum_weighted, LogValue};
pub use quadrature::{integrate, integrate_with, QuadratureOptions, QuadratureResult};
pub use special::{ln_reg_inc_beta, log_beta, log_choose, log_gamma, reg_inc_beta};
