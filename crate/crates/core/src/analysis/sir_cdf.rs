use super::laplace::{alpha2, check_stream, stream_coefficient};
use crate::error::{invalid, Result};
use crate::specfun::{binomial, hyp2f1_real, ln_gamma};

/// CDF of `ρ̃_ℓ · X` with `X ~ Gamma(dof, 1)`, the approximate SIR after
/// zero-forcing with a useful gain of `dof` complex degrees of freedom.
///
/// For `ell = L`: `1 - Σ_{m<dof} C(m+L-1, m) w^m (1-w)^L` with `w = x/(1+x)`,
/// `x = α₂γ`. For `ell < L` each `(α₂γ)^m ₂F₁(L+m, m+η'; m+η'+1; -α₂γ)` term is
/// evaluated in the Pfaff-transformed form
/// `w^m (1+x)^{-η'} ₂F₁(η'+1-L, m+η'; m+η'+1; w)`, which stays bounded as
/// `γ → ∞`.
pub fn cdf_sir_tilde_dof(gamma: f64, ell: usize, l: usize, dof: usize, eta: f64) -> Result<f64> {
    check_stream(ell, l, eta)?;
    if dof == 0 {
        return invalid("degrees of freedom must be >= 1");
    }
    if gamma.is_nan() || gamma < 0.0 {
        return invalid(format!("CDF argument must be >= 0, got {gamma}"));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma.is_infinite() {
        return Ok(1.0);
    }
    let x = alpha2(eta) * gamma;
    let w = x / (1.0 + x);
    let one_minus_w = 1.0 / (1.0 + x);
    let lf = l as f64;
    let tail = if ell == l {
        let mut total = 0.0;
        let mut term = one_minus_w.powi(l as i32);
        for m in 0..dof {
            if m > 0 {
                term *= w * (m as f64 + lf - 1.0) / m as f64;
            }
            total += term;
        }
        total
    } else {
        let k = l - ell - 1;
        let coef = stream_coefficient(ell, l);
        let mut total = 0.0;
        for n in 0..=k {
            let eta_p = 2.0 * (n + ell) as f64 / eta;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let outer = sign * coef * binomial(k as u32, n as u32) * 2.0 / eta * (1.0 + x).powf(-eta_p);
            for m in 0..dof {
                let mf = m as f64;
                // Γ(m+L) / (m! (L-1)!) = C(m+L-1, m)
                let ratio = (ln_gamma(mf + lf) - ln_gamma(mf + 1.0) - ln_gamma(lf)).exp();
                let f = hyp2f1_near_one(eta_p + 1.0 - lf, mf + eta_p, mf + eta_p + 1.0, w)?;
                total += outer * ratio * w.powi(m as i32) / (eta_p + mf) * f;
            }
        }
        total
    };
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// `₂F₁(a, b; c; w)` that also accepts `w` rounded to 1, where the Gauss sum
/// applies; here `c - a - b = L - η' > 1`, so the error is `O(1 - w)`.
fn hyp2f1_near_one(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    if w < 1.0 - 4.0 * f64::EPSILON {
        return hyp2f1_real(a, b, c, w);
    }
    Ok((ln_gamma(c) + ln_gamma(c - a - b) - ln_gamma(c - a) - ln_gamma(c - b)).exp())
}

/// CDF of the approximate PZF SIR `ρ̃_ℓ · X_{2(n_r-L+1)}`.
pub fn cdf_sir_tilde(gamma: f64, ell: usize, l: usize, n_r: usize, eta: f64) -> Result<f64> {
    if l > n_r {
        return invalid(format!("need L <= n_r, got L={l}, n_r={n_r}"));
    }
    cdf_sir_tilde_dof(gamma, ell, l, n_r - l + 1, eta)
}
