//! Brute-force references for the closed forms: direct adaptive quadrature
//! over the ordered-distance densities. Slow; meant for validation.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::laplace::check_stream;
use crate::error::{invalid, Result};
use crate::geometry::{distance_pdf, joint_distance_pdf};
use crate::quad::{integrate, integrate_complex, QuadOptions};
use crate::specfun::regularized_upper_gamma;

// Results do not depend on λ; with πλ = 1 the distances are O(1).
const LAMBDA: f64 = 1.0 / PI;
// e^{-v²} < 1e-40 beyond this radius
const V_MAX: f64 = 10.0;

fn inv_rho(u: f64, v: f64, eta: f64) -> f64 {
    2.0 * PI * LAMBDA / (eta - 2.0) * v.powf(2.0 - eta) * u.powf(eta)
}

/// Adaptive quadrature on `[0, b]` split at `b·10^{-k}`, so that features
/// concentrated near the origin (large `s` or `γ`) are not stepped over.
fn integrate_split<F>(mut f: F, b: f64, decades: i32, opts: QuadOptions) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let mut total = Complex64::new(0.0, 0.0);
    let mut hi = b;
    for k in 1..=decades {
        let lo = if k == decades { 0.0 } else { b * 10f64.powi(-k) };
        total += integrate_complex(&mut f, lo, hi, opts)?.value;
        hi = lo;
    }
    Ok(total)
}

/// Expectation of `g(1/ρ̃_ℓ)` by nested quadrature over `(r_ℓ, r_L)`.
fn expect<G>(ell: usize, l: usize, eta: f64, g: G, tol: f64) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    let inner = QuadOptions::new(tol * 1e-2, tol * 1e-2);
    let outer = QuadOptions::new(tol, tol);
    if ell == l {
        let c = 2.0 * PI * LAMBDA / (eta - 2.0);
        return integrate_split(|v| g(c * v * v) * distance_pdf(l, LAMBDA, v), V_MAX, 14, outer);
    }
    let mut failure = None;
    let r = integrate_split(
        |v| {
            let res = integrate_split(
                |u| {
                    let p = joint_distance_pdf(ell, l, LAMBDA, u, v).unwrap_or(0.0);
                    g(inv_rho(u, v, eta)) * p
                },
                v,
                6,
                inner,
            );
            res.unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            })
        },
        V_MAX,
        8,
        outer,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// `E[exp(-s/ρ̃_ℓ)]` by quadrature.
pub fn laplace_inv_rho_quadrature(s: Complex64, ell: usize, l: usize, eta: f64) -> Result<Complex64> {
    check_stream(ell, l, eta)?;
    if s.re < 0.0 {
        return invalid(format!("need Re s >= 0, got {s}"));
    }
    expect(ell, l, eta, |x| (-s * x).exp(), 1e-11)
}

/// `P(ρ̃_ℓ X ≤ γ)` with `X ~ Gamma(dof, 1)`, by quadrature.
pub fn cdf_sir_tilde_quadrature(gamma: f64, ell: usize, l: usize, dof: usize, eta: f64) -> Result<f64> {
    check_stream(ell, l, eta)?;
    if dof == 0 {
        return invalid("degrees of freedom must be >= 1");
    }
    let m = dof as u32;
    let cdf = expect(
        ell,
        l,
        eta,
        |x| Complex64::new(1.0 - regularized_upper_gamma(m, gamma * x).unwrap_or(f64::NAN), 0.0),
        1e-10,
    )?;
    Ok(cdf.re)
}

/// `∫_0^T (1 - F(2^t - 1)) dt` using the quadrature CDF; `T` large enough for the tail.
pub fn avg_rate_quadrature_oracle(ell: usize, l: usize, dof: usize, eta: f64, t_max: f64) -> Result<f64> {
    let mut failure = None;
    let r = integrate(
        |t| match cdf_sir_tilde_quadrature(t.exp2() - 1.0, ell, l, dof, eta) {
            Ok(f) => 1.0 - f,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t_max,
        QuadOptions::new(1e-8, 1e-8),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closed_forms() {
        let s = Complex64::new(2.0, 0.0);
        let q = laplace_inv_rho_quadrature(s, 1, 3, 3.75).unwrap();
        let c = crate::analysis::laplace_inv_rho(s, 1, 3, 3.75).unwrap();
        assert!((q - c).norm() < 1e-7, "{q} vs {c}");
        let q = cdf_sir_tilde_quadrature(1.0, 2, 4, 5, 3.75).unwrap();
        let c = crate::analysis::cdf_sir_tilde_dof(1.0, 2, 4, 5, 3.75).unwrap();
        assert!((q - c).abs() < 1e-6, "{q} vs {c}");
    }
}
