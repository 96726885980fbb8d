use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{pseudo_inverse_columns, sample_channel, sic_stage_filter};
use crate::error::{invalid, Result};
use crate::geometry::{local_avg_sirs_approx, sample_ppp_at_least, NetworkGeometry, SystemConfig};
use crate::montecarlo::try_run_trials;
use crate::specfun::ergodic_log_moment;
use crate::stats::{mean_and_std_error, wilson_interval};
use crate::Receiver;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Quasi-lower bound on the ergodic rate of a PZF stream, in bit/s/Hz.
pub fn qlb_rate(rho_tilde: f64, n_r: usize, l: usize) -> Result<f64> {
    if l == 0 || l > n_r {
        return invalid(format!("need 1 <= L <= n_r, got L={l}, n_r={n_r}"));
    }
    Ok(ergodic_log_moment((n_r - l + 1) as u32, rho_tilde)? * LOG2_E)
}

/// Quasi-lower bound for SIC stage `ell` (dof parameter `n_r - L + ell`).
pub fn qlb_rate_sic(rho_tilde: f64, n_r: usize, l: usize, ell: usize) -> Result<f64> {
    if l == 0 || l > n_r {
        return invalid(format!("need 1 <= L <= n_r, got L={l}, n_r={n_r}"));
    }
    if ell == 0 || ell > l {
        return invalid(format!("need 1 <= ell <= L, got ell={ell}, L={l}"));
    }
    Ok(ergodic_log_moment((n_r - l + ell) as u32, rho_tilde)? * LOG2_E)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRateEstimate {
    pub ell: usize,
    pub mean_rate: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Per-trial SIRs of all `L` streams for one fading draw on a fixed geometry.
fn fading_sirs<R: Rng + ?Sized>(
    geom: &NetworkGeometry,
    l: usize,
    n_r: usize,
    eta: f64,
    receiver: Receiver,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let d = &geom.sorted_distances;
    let h = sample_channel(n_r, d.len(), rng);
    let mut out = Vec::with_capacity(l);
    let interference = |q: &nalgebra::DVector<num_complex::Complex64>| -> f64 {
        (l..d.len()).fold(0.0, |acc, j| acc + d[j].powf(-eta) * q.dotc(&h.column(j)).norm_sqr())
    };
    match receiver {
        Receiver::Pzf => {
            let pinv = pseudo_inverse_columns(&h.columns(0, l).into_owned())?;
            for (k, c) in pinv.column_iter().enumerate() {
                let n2 = c.norm_squared();
                let q = c.into_owned() / num_complex::Complex64::new(n2.sqrt(), 0.0);
                out.push(d[k].powf(-eta) / n2 / interference(&q));
            }
        }
        Receiver::PzfSic => {
            let order: Vec<usize> = (1..=l).collect();
            for ell in 1..=l {
                let (q, gain) = sic_stage_filter(&h, &order, ell)?;
                out.push(d[ell - 1].powf(-eta) * gain / interference(&q));
            }
        }
    }
    Ok(out)
}

fn check_geometry(geom: &NetworkGeometry, l: usize, n_r: usize) -> Result<()> {
    if l == 0 || l > n_r {
        return invalid(format!("need 1 <= L <= n_r, got L={l}, n_r={n_r}"));
    }
    if geom.len() < l {
        return invalid(format!("geometry has {} nodes, L={l} needed", geom.len()));
    }
    Ok(())
}

/// Ergodic rates (bit/s/Hz) of all streams on a fixed geometry, averaging
/// `log2(1 + SIR)` over `fading_trials` Rayleigh draws of the full channel.
pub fn ergodic_rates_mc<R: Rng + ?Sized>(
    geom: &NetworkGeometry,
    l: usize,
    n_r: usize,
    eta: f64,
    receiver: Receiver,
    fading_trials: u64,
    rng: &mut R,
) -> Result<Vec<StreamRateEstimate>> {
    check_geometry(geom, l, n_r)?;
    if fading_trials == 0 {
        return invalid("fading_trials must be >= 1");
    }
    let mut samples = vec![Vec::with_capacity(fading_trials as usize); l];
    for _ in 0..fading_trials {
        for (k, sir) in fading_sirs(geom, l, n_r, eta, receiver, rng)?.into_iter().enumerate() {
            samples[k].push((1.0 + sir).log2());
        }
    }
    Ok(samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (mean_rate, std_error) = mean_and_std_error(s);
            StreamRateEstimate {
                ell: k + 1,
                mean_rate,
                std_error,
                trials: fading_trials,
            }
        })
        .collect())
}

/// PZF ergodic rate of stream `ell` on a fixed geometry.
pub fn ergodic_rate_mc<R: Rng + ?Sized>(
    geom: &NetworkGeometry,
    ell: usize,
    l: usize,
    n_r: usize,
    eta: f64,
    fading_trials: u64,
    rng: &mut R,
) -> Result<StreamRateEstimate> {
    if ell == 0 || ell > l {
        return invalid(format!("need 1 <= ell <= L, got ell={ell}, L={l}"));
    }
    Ok(ergodic_rates_mc(geom, l, n_r, eta, Receiver::Pzf, fading_trials, rng)?.swap_remove(ell - 1))
}

/// Ergodic rates averaged over geometries: each geometry trial draws a
/// network (with at least `L + 1` nodes) and `fading_per_geometry` channels.
/// The standard error is taken across geometry trials.
pub fn average_stream_rates_mc(
    config: &SystemConfig,
    receiver: Receiver,
    geometry_trials: u64,
    fading_per_geometry: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<StreamRateEstimate>> {
    config.validate()?;
    if geometry_trials == 0 {
        return invalid("geometry_trials must be >= 1");
    }
    let l = config.l;
    let per_geom = try_run_trials(seed, geometry_trials, workers, |_, rng| {
        let (geom, _) = sample_ppp_at_least(config, l + 1, rng)?;
        let est = ergodic_rates_mc(&geom, l, config.n_r, config.eta, receiver, fading_per_geometry, rng)?;
        Ok(est.into_iter().map(|e| e.mean_rate).collect::<Vec<f64>>())
    })?;
    Ok((0..l)
        .map(|k| {
            let col: Vec<f64> = per_geom.iter().map(|v| v[k]).collect();
            let (mean_rate, std_error) = mean_and_std_error(&col);
            StreamRateEstimate {
                ell: k + 1,
                mean_rate,
                std_error,
                trials: geometry_trials * fading_per_geometry,
            }
        })
        .collect())
}

/// Quasi-lower-bound rates of one geometry draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryTrial {
    /// `r_1..r_L`.
    pub distances: Vec<f64>,
    /// `ρ̃_1..ρ̃_L`.
    pub rho_tilde: Vec<f64>,
    /// Per-stream quasi-lower-bound rates in bit/s/Hz.
    pub rates: Vec<f64>,
    /// Draws rejected for having fewer than `L + 1` nodes.
    pub rejected: u64,
}

impl GeometryTrial {
    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rate of the last stream (`ell = L`).
    pub fn last_rate(&self) -> f64 {
        *self.rates.last().expect("L >= 1")
    }
}

pub fn geometry_trial<R: Rng + ?Sized>(config: &SystemConfig, receiver: Receiver, rng: &mut R) -> Result<GeometryTrial> {
    let l = config.l;
    let (geom, rejected) = sample_ppp_at_least(config, l + 1, rng)?;
    let rho = local_avg_sirs_approx(&geom, l, config.lambda_density, config.eta)?;
    let rates = rho
        .iter()
        .enumerate()
        .map(|(k, &r)| match receiver {
            Receiver::Pzf => qlb_rate(r, config.n_r, l),
            Receiver::PzfSic => qlb_rate_sic(r, config.n_r, l, k + 1),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GeometryTrial {
        distances: geom.sorted_distances[..l].to_vec(),
        rho_tilde: rho,
        rates,
        rejected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub rate: f64,
    /// Fraction of geometries whose weakest stream falls at or below `rate`.
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Same with only the last stream considered.
    pub relaxed_probability: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageCurve {
    pub receiver: Receiver,
    pub points: Vec<OutageEstimate>,
    /// Total draws rejected for having fewer than `L + 1` nodes.
    pub resampled: u64,
}

/// Empirical outage at every rate of `rates` from one set of geometry trials.
pub fn outage_curve_mc(
    config: &SystemConfig,
    rates: &[f64],
    receiver: Receiver,
    geometry_trials: u64,
    seed: u64,
    workers: usize,
) -> Result<OutageCurve> {
    config.validate()?;
    if geometry_trials == 0 {
        return invalid("geometry_trials must be >= 1");
    }
    let trials = try_run_trials(seed, geometry_trials, workers, |_, rng| {
        let t = geometry_trial(config, receiver, rng)?;
        Ok((t.min_rate(), t.last_rate(), t.rejected))
    })?;
    let resampled = trials.iter().map(|t| t.2).sum();
    let z = 1.959_963_984_540_054;
    let points = rates
        .iter()
        .map(|&rate| {
            let hits = trials.iter().filter(|t| t.0 <= rate).count() as u64;
            let relaxed = trials.iter().filter(|t| t.1 <= rate).count() as u64;
            let (ci_low, ci_high) = wilson_interval(hits, geometry_trials, z);
            OutageEstimate {
                rate,
                probability: hits as f64 / geometry_trials as f64,
                ci_low,
                ci_high,
                relaxed_probability: relaxed as f64 / geometry_trials as f64,
                trials: geometry_trials,
            }
        })
        .collect();
    Ok(OutageCurve { receiver, points, resampled })
}

pub fn outage_mc(
    config: &SystemConfig,
    rate: f64,
    receiver: Receiver,
    geometry_trials: u64,
    seed: u64,
    workers: usize,
) -> Result<OutageEstimate> {
    let mut c = outage_curve_mc(config, &[rate], receiver, geometry_trials, seed, workers)?;
    Ok(c.points.swap_remove(0))
}
