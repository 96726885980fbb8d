//! Closed-form and semi-analytic evaluators: Laplace transform of the inverse
//! approximate local-average SIR, its Euler-summation inversion, SIR CDFs,
//! average rates and the outage bound.
//!
//! Stream indices are 1-based and all rates are in bit/s/Hz.

mod laplace;
mod oracle;
mod outage;
mod rates;
mod sir_cdf;

pub use laplace::{
    cdf_rho_approx, cdf_rho_approx_raw, cdf_rho_last_exact, laplace_inv_rho, EulerInversionParams,
    InvertedCdf,
};
pub use oracle::{avg_rate_quadrature_oracle, cdf_sir_tilde_quadrature, laplace_inv_rho_quadrature};
pub use outage::{
    inverse_qlb_rate, last_stream_dof, outage_analytic, outage_analytic_detail, AnalyticOutage,
};
pub use rates::{
    avg_rate_by_quadrature, avg_rate_last_stream, avg_rate_pzf, avg_rate_pzf_sic, avg_rate_stream,
    avg_rate_stream_dof,
};
pub use sir_cdf::{cdf_sir_tilde, cdf_sir_tilde_dof};

use rayon::prelude::*;

use crate::error::Result;

/// Euler-inverted CDF of `ρ̃_ℓ` on a grid, with the number of clamped points.
pub fn cdf_rho_curve(
    gammas: &[f64],
    ell: usize,
    l: usize,
    eta: f64,
    params: &EulerInversionParams,
) -> Result<(Vec<f64>, usize)> {
    let values: Vec<InvertedCdf> = gammas
        .par_iter()
        .map(|&g| cdf_rho_approx_raw(g, ell, l, eta, params))
        .collect::<Result<_>>()?;
    let clamped = values.iter().filter(|v| v.clamped()).count();
    Ok((values.into_iter().map(|v| v.value).collect(), clamped))
}
