use serde::{Deserialize, Serialize};

use super::laplace::{cdf_rho_approx_raw, EulerInversionParams};
use crate::error::{invalid, Result};
use crate::specfun::ergodic_log_moment;
use crate::Receiver;

const LOG2_E: f64 = std::f64::consts::LOG2_E;
const RHO_TOL: f64 = 1e-10;
const RHO_CEILING: f64 = 1e300;

/// Degrees of freedom of the last decoded stream's useful gain.
pub fn last_stream_dof(l: usize, n_r: usize, receiver: Receiver) -> usize {
    match receiver {
        Receiver::Pzf => n_r - l + 1,
        Receiver::PzfSic => n_r,
    }
}

/// Smallest `ρ̃` whose quasi-lower-bound rate with `dof` degrees of freedom
/// reaches `rate`; `None` if even `1e300` does not.
pub fn inverse_qlb_rate(rate: f64, dof: usize) -> Result<Option<f64>> {
    if dof == 0 {
        return invalid("degrees of freedom must be >= 1");
    }
    if rate.is_nan() || rate < 0.0 {
        return invalid(format!("rate must be >= 0, got {rate}"));
    }
    if rate == 0.0 {
        return Ok(Some(0.0));
    }
    let m = dof as u32;
    let f = |rho: f64| -> Result<f64> { Ok(ergodic_log_moment(m, rho)? * LOG2_E) };
    let mut hi = 1.0;
    while f(hi)? < rate {
        hi *= 2.0;
        if hi > RHO_CEILING {
            return Ok(None);
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    for _ in 0..400 {
        if hi - lo <= RHO_TOL.max(1e-15 * hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid)? < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticOutage {
    pub rate: f64,
    pub probability: f64,
    /// `ρ̃` threshold where the last stream's bound equals `rate` (`inf` if unreachable).
    pub threshold: f64,
    /// The rate exceeds the numeric range of the bound; probability set to 1.
    pub saturated: bool,
    /// The inverted CDF had to be clamped into `[0, 1]`.
    pub clamped: bool,
}

/// Outage bound `F_{ρ̃_L}(C_L^{-1}(R))` with the CDF obtained by Euler inversion.
pub fn outage_analytic_detail(
    rate: f64,
    l: usize,
    n_r: usize,
    eta: f64,
    receiver: Receiver,
    params: &EulerInversionParams,
) -> Result<AnalyticOutage> {
    if l == 0 || l > n_r {
        return invalid(format!("need 1 <= L <= n_r, got L={l}, n_r={n_r}"));
    }
    let dof = last_stream_dof(l, n_r, receiver);
    match inverse_qlb_rate(rate, dof)? {
        None => Ok(AnalyticOutage {
            rate,
            probability: 1.0,
            threshold: f64::INFINITY,
            saturated: true,
            clamped: false,
        }),
        Some(threshold) => {
            let c = cdf_rho_approx_raw(threshold, l, l, eta, params)?;
            Ok(AnalyticOutage {
                rate,
                probability: c.value,
                threshold,
                saturated: false,
                clamped: c.clamped(),
            })
        }
    }
}

pub fn outage_analytic(
    rate: f64,
    l: usize,
    n_r: usize,
    eta: f64,
    receiver: Receiver,
    params: &EulerInversionParams,
) -> Result<f64> {
    Ok(outage_analytic_detail(rate, l, n_r, eta, receiver, params)?.probability)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        for dof in [1usize, 5, 8] {
            for &r in &[0.01, 0.5, 2.0, 9.0] {
                let rho = inverse_qlb_rate(r, dof).unwrap().unwrap();
                let back = ergodic_log_moment(dof as u32, rho).unwrap() * LOG2_E;
                assert!((back - r).abs() < 1e-8, "{back} vs {r}");
            }
        }
        assert!(inverse_qlb_rate(1e6, 4).unwrap().is_none());
    }

    #[test]
    fn limits_and_monotonicity() {
        let p = EulerInversionParams::default();
        assert!(outage_analytic(1e-6, 4, 8, 3.75, Receiver::Pzf, &p).unwrap() < 1e-3);
        let sat = outage_analytic_detail(1e6, 4, 8, 3.75, Receiver::Pzf, &p).unwrap();
        assert!(sat.saturated && sat.probability == 1.0);
        for receiver in [Receiver::Pzf, Receiver::PzfSic] {
            let mut prev = 0.0;
            for i in 1..=60 {
                let r = 0.1 * i as f64;
                let v = outage_analytic(r, 4, 8, 3.75, receiver, &p).unwrap();
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
