//! Special functions and quadrature.

mod gamma;
mod incgamma;
mod meijer;
mod qfunc;
mod quadrature;

pub use gamma::{double_factorial, factorial, gamma, ln_gamma, ln_gamma_complex};
pub use incgamma::{
    lower_incomplete_gamma, regularized_lower_gamma, regularized_upper_gamma,
    upper_incomplete_gamma,
};
pub use meijer::{meijer_g_2313, meijer_g_2313_series};
pub use qfunc::{erfc, q_function, q_inverse};
pub use quadrature::{integrate, integrate_from, integrate_semi_infinite, QuadratureSpec};

pub(crate) use gamma::ln_gamma_unchecked;
pub(crate) use incgamma::{reg_lower_unchecked, reg_upper_unchecked};
pub(crate) use quadrature::neumaier_sum;
