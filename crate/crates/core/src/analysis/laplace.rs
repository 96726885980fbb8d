use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::specfun::{binomial, hyp2f1, ln_gamma, regularized_upper_gamma};

/// Constants of the Euler-summation Laplace inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EulerInversionParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: u32,
    #[serde(rename = "G")]
    pub g: u32,
}

impl Default for EulerInversionParams {
    fn default() -> Self {
        Self { a: 9.21, b: 5, g: 8 }
    }
}

impl EulerInversionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) || self.g < 1 {
            return invalid(format!("Euler inversion needs A > 0 and G >= 1, got {self:?}"));
        }
        Ok(())
    }
}

pub(crate) fn check_stream(ell: usize, l: usize, eta: f64) -> Result<()> {
    if ell == 0 || ell > l {
        return invalid(format!("need 1 <= ell <= L, got ell={ell}, L={l}"));
    }
    if !(eta > 2.0 && eta.is_finite()) {
        return invalid(format!("eta must exceed 2, got {eta}"));
    }
    Ok(())
}

/// `α₂ = 2 / (η - 2)`.
pub(crate) fn alpha2(eta: f64) -> f64 {
    2.0 / (eta - 2.0)
}

/// `(L-1)! / ((L-ℓ-1)! (ℓ-1)!)`.
pub(crate) fn stream_coefficient(ell: usize, l: usize) -> f64 {
    (ln_gamma(l as f64) - ln_gamma((l - ell) as f64) - ln_gamma(ell as f64)).exp()
}

/// Laplace transform `E[exp(-s / ρ̃_ℓ)]` of the inverse approximate local-average SIR.
///
/// Independent of the density. For `ell < L` it is the alternating sum
/// `Σ_n (-1)^n C(L-ℓ-1, n) (L-1)!/((L-ℓ-1)!(ℓ-1)!(n+ℓ)) ₂F₁(L, η'; η'+1; -α₂ s)`
/// with `η' = 2(n+ℓ)/η`; for `ell = L` it is `(1 + α₂ s)^{-L}`.
pub fn laplace_inv_rho(s: Complex64, ell: usize, l: usize, eta: f64) -> Result<Complex64> {
    check_stream(ell, l, eta)?;
    if s.re < 0.0 {
        return invalid(format!("Laplace argument needs Re s >= 0, got {s}"));
    }
    let a2 = alpha2(eta);
    if ell == l {
        return Ok((1.0 + a2 * s).powi(-(l as i32)));
    }
    let z = -a2 * s;
    let k = l - ell - 1;
    let coef = stream_coefficient(ell, l);
    let mut total = Complex64::new(0.0, 0.0);
    for n in 0..=k {
        let eta_p = 2.0 * (n + ell) as f64 / eta;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * coef * binomial(k as u32, n as u32) / (n + ell) as f64;
        total += w * hyp2f1(l as f64, eta_p, eta_p + 1.0, z)?;
    }
    Ok(total)
}

/// Result of one Euler inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertedCdf {
    pub value: f64,
    /// Value before clamping to `[0, 1]`.
    pub raw: f64,
}

impl InvertedCdf {
    pub fn clamped(&self) -> bool {
        self.value != self.raw
    }
}

/// CDF of `ρ̃_ℓ` at `gamma` by Euler-summation inversion of [`laplace_inv_rho`].
pub fn cdf_rho_approx_raw(
    gamma: f64,
    ell: usize,
    l: usize,
    eta: f64,
    params: &EulerInversionParams,
) -> Result<InvertedCdf> {
    check_stream(ell, l, eta)?;
    params.validate()?;
    if gamma.is_nan() || gamma < 0.0 {
        return invalid(format!("CDF argument must be >= 0, got {gamma}"));
    }
    if gamma == 0.0 {
        return Ok(InvertedCdf { value: 0.0, raw: 0.0 });
    }
    if gamma.is_infinite() {
        return Ok(InvertedCdf { value: 1.0, raw: 1.0 });
    }
    let terms = (params.g + params.b) as usize;
    let mut re = Vec::with_capacity(terms + 1);
    for g in 0..=terms {
        let tau = Complex64::new(params.a, 2.0 * std::f64::consts::PI * g as f64) * (gamma / 2.0);
        re.push((laplace_inv_rho(tau, ell, l, eta)? / tau).re);
    }
    let mut sum = 0.0;
    for b in 0..=params.b {
        let mut inner = 0.0;
        for (g, &w) in re.iter().enumerate().take((params.g + b) as usize + 1) {
            let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
            let d = if g == 0 { 2.0 } else { 1.0 };
            inner += sign * w / d;
        }
        sum += binomial(params.b, b) * inner;
    }
    let raw = 1.0 - gamma * (params.a / 2.0).exp() / 2f64.powi(params.b as i32) * sum;
    Ok(InvertedCdf {
        value: raw.clamp(0.0, 1.0),
        raw,
    })
}

pub fn cdf_rho_approx(gamma: f64, ell: usize, l: usize, eta: f64, params: &EulerInversionParams) -> Result<f64> {
    Ok(cdf_rho_approx_raw(gamma, ell, l, eta, params)?.value)
}

/// Exact CDF of `ρ̃_L`: `1/ρ̃_L` is `α₂` times a Gamma(L, 1) variable.
pub fn cdf_rho_last_exact(gamma: f64, l: usize, eta: f64) -> Result<f64> {
    check_stream(l, l, eta)?;
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    regularized_upper_gamma(l as u32, 1.0 / (alpha2(eta) * gamma))
}
