//! Closed-form and quadrature error-rate analysis.

mod multiuser;
mod siso;

pub use multiuser::{
    conditional_ber, gamma_approx, interference_free_ber, multiuser_ber, multiuser_ber_or_free,
    multiuser_ber_single_integral, sample_interference, semi_analytic_mc_ber,
    single_g_closed_form_ber, sinr_ccdf, sinr_cdf, sinr_moments, sinr_pdf, McEstimate,
    SinrGammaApprox, MIN_SEMI_ANALYTIC_TRIALS,
};
pub use siso::{
    c_integral, d_integral, erlang_cdf, erlang_pdf, integer_shape, mixture_cdf, mixture_pdf,
    siso_ber, siso_ber_quadrature, snr_scales, xi_coefficients, GammaMixTerm, SCALE_GAP,
};
