//! Delivery latency, the `L × R` tradeoff and selection of the
//! macro-diversity order `L`.

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{avg_rate_pzf, avg_rate_pzf_sic, last_stream_dof, outage_analytic, EulerInversionParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::{local_avg_sir_approx, sample_ppp_at_least, SystemConfig};
use crate::montecarlo::try_run_trials;
use crate::phy_sim::{outage_mc, OutageEstimate};
use crate::stats::mean_and_std_error;
use crate::Receiver;

/// Bisection tolerance on `R` for [`rate_at_outage`].
pub const RATE_TOL: f64 = 1e-6;
const RATE_CEILING: f64 = 4096.0;
const TIE_RTOL: f64 = 1e-12;

/// Parameters of the delivery-latency formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyParams {
    /// File size `F` in bits.
    pub file_bits: f64,
    /// Bandwidth `w` in Hz.
    pub bandwidth_hz: f64,
    /// Number of users `K`.
    pub users: f64,
    /// Normalized cache size `μ = M/N`.
    pub mu: f64,
}

impl Default for LatencyParams {
    fn default() -> Self {
        Self {
            file_bits: 8e6,
            bandwidth_hz: 10e6,
            users: 100.0,
            mu: 0.1,
        }
    }
}

/// `(1/(L R)) · (F/w) · K(1-μ)/(1+Kμ)` seconds.
pub fn delivery_latency(l: usize, rate: f64, p: &LatencyParams) -> Result<f64> {
    if l == 0 {
        return invalid("L must be >= 1");
    }
    if !(rate > 0.0) {
        return invalid(format!("rate must be positive, got {rate}"));
    }
    if !(p.file_bits > 0.0 && p.bandwidth_hz > 0.0 && p.users > 0.0) {
        return invalid("file size, bandwidth and user count must be positive");
    }
    if !(p.mu > 0.0 && p.mu <= 1.0) {
        return invalid(format!("need 0 < mu <= 1, got {}", p.mu));
    }
    let gain = p.users * (1.0 - p.mu) / (1.0 + p.users * p.mu);
    Ok(p.file_bits / p.bandwidth_hz * gain / (l as f64 * rate))
}

/// Rate `R` at which the analytic outage equals `target`.
pub fn rate_at_outage(
    l: usize,
    n_r: usize,
    eta: f64,
    target: f64,
    receiver: Receiver,
    params: &EulerInversionParams,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return invalid(format!("target outage must lie in (0, 1), got {target}"));
    }
    let f = |r: f64| outage_analytic(r, l, n_r, eta, receiver, params);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > RATE_CEILING {
            return Err(Error::Unreachable(format!(
                "outage {target} not reached below R = {RATE_CEILING} (L={l}, n_r={n_r})"
            )));
        }
    }
    // a few extra halvings beyond RATE_TOL keep the round trip well inside 1e-5
    while hi - lo > RATE_TOL * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Objective {
    /// Maximize `L · avg_rate`.
    AverageRate,
    /// Maximize `L · R` where `R` meets the target outage.
    TargetOutage { target: f64 },
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::AverageRate => "average-rate",
            Objective::TargetOutage { .. } => "target-outage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerOptions {
    pub latency: LatencyParams,
    pub euler: EulerInversionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerRecord {
    #[serde(rename = "L")]
    pub l: usize,
    /// Average rate bound of the weakest stream.
    pub avg_rate: f64,
    /// Rate meeting the target outage (target-outage objective only).
    pub rate_at_target: Option<f64>,
    /// `L ×` the rate scored by the objective.
    pub product_lr: f64,
    pub latency_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerResult {
    pub objective: Objective,
    pub receiver: Receiver,
    pub n_r: usize,
    pub eta: f64,
    pub records: Vec<PlannerRecord>,
    #[serde(rename = "selected_L")]
    pub selected_l: usize,
}

impl PlannerResult {
    pub fn selected(&self) -> &PlannerRecord {
        &self.records[self.selected_l - 1]
    }
}

fn avg_rate(l: usize, n_r: usize, eta: f64, receiver: Receiver) -> Result<f64> {
    match receiver {
        Receiver::Pzf => avg_rate_pzf(l, n_r, eta),
        Receiver::PzfSic => avg_rate_pzf_sic(l, n_r, eta),
    }
}

fn score(l: usize, n_r: usize, eta: f64, objective: Objective, receiver: Receiver, opts: &PlannerOptions) -> Result<PlannerRecord> {
    let avg = avg_rate(l, n_r, eta, receiver)?;
    let rate_at_target = match objective {
        Objective::AverageRate => None,
        Objective::TargetOutage { target } => Some(rate_at_outage(l, n_r, eta, target, receiver, &opts.euler)?),
    };
    let rate = rate_at_target.unwrap_or(avg);
    Ok(PlannerRecord {
        l,
        avg_rate: avg,
        rate_at_target,
        product_lr: l as f64 * rate,
        latency_s: delivery_latency(l, rate, &opts.latency)?,
    })
}

/// Sweeps `L = 1..=n_r` and keeps the largest `L × R`; near-ties go to the smaller `L`.
pub fn optimize_l(
    n_r: usize,
    eta: f64,
    objective: Objective,
    receiver: Receiver,
    opts: &PlannerOptions,
) -> Result<PlannerResult> {
    if n_r == 0 {
        return invalid("n_r must be >= 1");
    }
    if !(eta > 2.0) {
        return invalid(format!("eta must exceed 2, got {eta}"));
    }
    opts.euler.validate()?;
    let records: Vec<PlannerRecord> = (1..=n_r)
        .into_par_iter()
        .map(|l| score(l, n_r, eta, objective, receiver, opts))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        let b = records[best].product_lr;
        if r.product_lr > b + TIE_RTOL * b.abs() {
            best = i;
        }
    }
    Ok(PlannerResult {
        objective,
        receiver,
        n_r,
        eta,
        selected_l: records[best].l,
        records,
    })
}

/// Monte Carlo re-scoring of the selected `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum McVerification {
    /// `E[log₂(1 + ρ̃_L X)]` with `X ~ Gamma(dof, 1)` versus the closed form.
    AverageRate {
        analytic: f64,
        mc_mean: f64,
        std_error: f64,
        trials: u64,
    },
    /// Empirical outage at the planned rate versus the target.
    TargetOutage { target: f64, estimate: OutageEstimate },
}

/// Re-scores `result.selected_l` by simulation over the disk described by `config`
/// (its `n_r`, `eta` and `L` are overridden by the plan).
pub fn verify_mc(result: &PlannerResult, config: &SystemConfig, trials: u64, seed: u64, workers: usize) -> Result<McVerification> {
    let mut cfg = config.clone();
    cfg.n_r = result.n_r;
    cfg.eta = result.eta;
    cfg.l = result.selected_l;
    cfg.validate()?;
    let rec = result.selected();
    match result.objective {
        Objective::TargetOutage { target } => {
            let rate = rec.rate_at_target.expect("target-outage records carry a rate");
            let estimate = outage_mc(&cfg, rate, result.receiver, trials, seed, workers)?;
            Ok(McVerification::TargetOutage { target, estimate })
        }
        Objective::AverageRate => {
            let l = cfg.l;
            let dof = last_stream_dof(l, cfg.n_r, result.receiver);
            let gamma = Gamma::new(dof as f64, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let samples = try_run_trials(seed, trials, workers, |_, rng| {
                let (g, _) = sample_ppp_at_least(&cfg, l + 1, rng)?;
                let rho = local_avg_sir_approx(g.distance(l), g.distance(l), cfg.lambda_density, cfg.eta)?;
                Ok((1.0 + rho * gamma.sample(rng)).log2())
            })?;
            let (mc_mean, std_error) = mean_and_std_error(&samples);
            Ok(McVerification::AverageRate {
                analytic: rec.avg_rate,
                mc_mean,
                std_error,
                trials,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(users: f64, mu: f64) -> LatencyParams {
        LatencyParams {
            file_bits: 1.0,
            bandwidth_hz: 1.0,
            users,
            mu,
        }
    }

    #[test]
    fn latency_examples() {
        assert!((delivery_latency(2, 1.0, &unit(2.0, 0.5)).unwrap() - 0.25).abs() < 1e-15);
        let p = unit(1e6, 0.2);
        let limit = (1.0 - 0.2) / 0.2 / 3.0;
        let v = delivery_latency(3, 1.0, &p).unwrap();
        assert!((v - limit).abs() / limit < 1e-4);
        let a = delivery_latency(4, 2.0, &LatencyParams::default()).unwrap();
        let b = delivery_latency(4, 1.0, &LatencyParams::default()).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-15 * b);
        assert!(delivery_latency(1, 1.0, &unit(2.0, 0.0)).is_err());
    }

    #[test]
    fn outage_round_trip() {
        let e = EulerInversionParams::default();
        for (l, receiver) in [(4, Receiver::Pzf), (2, Receiver::PzfSic)] {
            for &p in &[0.05, 0.1, 0.5] {
                let r = rate_at_outage(l, 8, 3.75, p, receiver, &e).unwrap();
                let back = outage_analytic(r, l, 8, 3.75, receiver, &e).unwrap();
                assert!((back - p).abs() < 1e-5, "L={l} p={p}: {back}");
            }
        }
    }

    #[test]
    fn average_rate_selection() {
        let o = PlannerOptions::default();
        let r = optimize_l(8, 3.75, Objective::AverageRate, Receiver::Pzf, &o).unwrap();
        assert_eq!(r.selected_l, 3);
        assert_eq!(r.records.len(), 8);
        let best = r.selected().product_lr;
        assert!(r.records.iter().all(|x| x.product_lr <= best));
        let s = optimize_l(8, 3.75, Objective::AverageRate, Receiver::PzfSic, &o).unwrap();
        assert_eq!(s.selected_l, 8);
    }
}
