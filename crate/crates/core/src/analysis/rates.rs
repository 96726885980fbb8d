use super::laplace::{alpha2, check_stream};
use super::sir_cdf::cdf_sir_tilde_dof;
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::hyp2f1_real;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// `Σ_{m<dof} log₂e / (m+L) · ₂F₁(1, L; m+L+1; 1-α₂)`: average rate of the
/// last stream when its useful gain has `dof` degrees of freedom.
pub fn avg_rate_last_stream(l: usize, dof: usize, eta: f64) -> Result<f64> {
    check_stream(l, l, eta)?;
    if dof == 0 {
        return invalid("degrees of freedom must be >= 1");
    }
    let z = 1.0 - alpha2(eta);
    let lf = l as f64;
    let mut total = 0.0;
    for m in 0..dof {
        let mf = m as f64;
        total += hyp2f1_real(1.0, lf, mf + lf + 1.0, z)? / (mf + lf);
    }
    Ok(total * LOG2_E)
}

/// `∫_0^∞ (1 - F(2^t - 1)) dt` for the approximate SIR of stream `ell`.
///
/// Integrated in windows of width 4 until a window contributes less than
/// `1e-13`; the integrand decays exponentially in `t`.
pub fn avg_rate_by_quadrature(ell: usize, l: usize, dof: usize, eta: f64) -> Result<f64> {
    check_stream(ell, l, eta)?;
    let opts = QuadOptions::new(1e-11, 1e-11);
    let mut total = 0.0;
    let width = 4.0;
    let mut t0 = 0.0;
    loop {
        let mut failure = None;
        let r = integrate(
            |t| match cdf_sir_tilde_dof(t.exp2() - 1.0, ell, l, dof, eta) {
                Ok(f) => 1.0 - f,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            t0,
            t0 + width,
            opts,
        )
        .map_err(|e| Error::Numerical(format!("average rate quadrature for ell={ell}, L={l}: {e}")))?;
        if let Some(e) = failure {
            return Err(e);
        }
        total += r.value;
        t0 += width;
        if r.value < 1e-13 {
            return Ok(total);
        }
        if t0 >= 1000.0 {
            return Err(Error::Numerical(format!(
                "average rate integrand for ell={ell}, L={l} has not decayed by t=1000"
            )));
        }
    }
}

/// Average quasi-lower-bound rate of PZF stream `ell`, bit/s/Hz.
pub fn avg_rate_stream(ell: usize, l: usize, n_r: usize, eta: f64) -> Result<f64> {
    if l > n_r {
        return invalid(format!("need L <= n_r, got L={l}, n_r={n_r}"));
    }
    avg_rate_stream_dof(ell, l, n_r - l + 1, eta)
}

/// Same with an explicit dof parameter (`n_r - L + ell` for SIC stage `ell`).
pub fn avg_rate_stream_dof(ell: usize, l: usize, dof: usize, eta: f64) -> Result<f64> {
    check_stream(ell, l, eta)?;
    if ell == l {
        avg_rate_last_stream(l, dof, eta)
    } else {
        avg_rate_by_quadrature(ell, l, dof, eta)
    }
}

/// Average rate of the weakest PZF stream.
pub fn avg_rate_pzf(l: usize, n_r: usize, eta: f64) -> Result<f64> {
    avg_rate_stream(l, l, n_r, eta)
}

/// Average rate of the last SIC stage, whose useful gain has `n_r` degrees of freedom.
pub fn avg_rate_pzf_sic(l: usize, n_r: usize, eta: f64) -> Result<f64> {
    if l == 0 || l > n_r {
        return invalid(format!("need 1 <= L <= n_r, got L={l}, n_r={n_r}"));
    }
    avg_rate_last_stream(l, n_r, eta)
}
