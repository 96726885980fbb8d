//! Special functions used by the closed-form evaluators.
//!
//! Everything here works in nats; callers convert to bits.

mod expint;
mod gamma;
mod hyp2f1;

pub use expint::{exp_integral_e1, exp_integral_en, scaled_exp_integral};
pub use gamma::{
    binomial, factorial, ln_gamma, regularized_upper_gamma, upper_incomplete_gamma,
    upper_incomplete_gamma_real_order,
};
pub use hyp2f1::{hyp2f1, hyp2f1_real};

use crate::error::{invalid, Result};

/// Complex scalar used throughout the analytic layer.
pub type ComplexValue = num_complex::Complex64;

/// `I_M(μ) = E[ln(1 + μ X)]` where `X ~ Gamma(M, 1)` (mean `M`).
///
/// Evaluated as `Σ_{k=1}^{M} e^{1/μ} E_k(1/μ)`, a sum of positive terms,
/// which stays accurate for small `μ` where the polynomial closed form
/// cancels.
pub fn ergodic_log_moment(m: u32, mu: f64) -> Result<f64> {
    if m == 0 {
        return invalid("ergodic_log_moment needs M >= 1");
    }
    if !(mu >= 0.0) || mu.is_nan() {
        return invalid(format!("ergodic_log_moment needs mu >= 0, got {mu}"));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    if mu.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let x = 1.0 / mu;
    let mut total = 0.0;
    for k in 1..=m {
        total += scaled_exp_integral(k, x)?;
    }
    Ok(total)
}

/// The same quantity through `Π_M(-1/μ) E_1(1/μ) + Σ_{m<M} Π_m(1/μ) Π_{M-m}(-1/μ) / m`,
/// with `Π_n(x) = e^{-x} Σ_{i<n} x^i / i!`.
///
/// Only well conditioned for moderate `1/μ`; kept as a cross-check.
pub fn ergodic_log_moment_closed_form(m: u32, mu: f64) -> Result<f64> {
    if m == 0 {
        return invalid("ergodic_log_moment needs M >= 1");
    }
    if !(mu > 0.0) {
        return if mu == 0.0 {
            Ok(0.0)
        } else {
            invalid(format!("ergodic_log_moment needs mu >= 0, got {mu}"))
        };
    }
    let pi = |n: u32, x: f64| -> f64 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for i in 0..n {
            if i > 0 {
                term *= x / i as f64;
            }
            sum += term;
        }
        (-x).exp() * sum
    };
    let x = 1.0 / mu;
    let mut total = pi(m, -x) * exp_integral_e1(x)?;
    for k in 1..m {
        total += pi(k, x) * pi(m - k, -x) / k as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Gamma};

    #[test]
    fn zero_mu() {
        assert_eq!(ergodic_log_moment(4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_exponential_anchor() {
        // e·E1(1)
        let v = ergodic_log_moment(1, 1.0).unwrap();
        assert!((v - 0.596_347_362_323_194_0).abs() < 1e-13, "{v}");
        let q = crate::quad::integrate_to_infinity(
            |x| (1.0 + x).ln() * (-x).exp(),
            0.0,
            crate::quad::QuadOptions::default(),
        )
        .unwrap()
        .value;
        assert!((v - q).abs() < 1e-11);
    }

    #[test]
    fn closed_form_agrees_where_conditioned() {
        for m in 1..=8 {
            for &mu in &[0.3, 0.7, 1.0, 2.5, 10.0, 100.0] {
                let a = ergodic_log_moment(m, mu).unwrap();
                let b = ergodic_log_moment_closed_form(m, mu).unwrap();
                assert!((a - b).abs() < 1e-9 * a.max(1.0), "M={m} mu={mu}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn monte_carlo_m3() {
        let mu = 0.7;
        let exact = ergodic_log_moment(3, mu).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = Gamma::new(3.0, 1.0).unwrap();
        let n = 10_000_000usize;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = (1.0 + mu * g.sample(&mut rng)).ln();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn increasing_in_m_and_mu() {
        for m in 1..=10 {
            let mut prev = 0.0;
            for i in 1..=60 {
                let mu = 0.01 * 1.2f64.powi(i);
                let v = ergodic_log_moment(m, mu).unwrap();
                assert!(v > prev);
                assert!(v < ergodic_log_moment(m + 1, mu).unwrap());
                prev = v;
            }
        }
    }

    #[test]
    fn small_mu_is_accurate() {
        // third-order Taylor expansion of E[ln(1+μX)] with the Gamma(M) moments
        let (m, mu) = (6u32, 1e-4);
        let v = ergodic_log_moment(m, mu).unwrap();
        let mf = m as f64;
        let approx = mu * mf - mu * mu * mf * (mf + 1.0) / 2.0
            + mu.powi(3) * mf * (mf + 1.0) * (mf + 2.0) / 3.0;
        assert!((v - approx).abs() < 1e-10);
    }
}
