use cachecast::analysis::{
    avg_rate_pzf, avg_rate_pzf_sic, avg_rate_stream_dof, cdf_rho_curve, cdf_sir_tilde_dof, last_stream_dof,
    outage_analytic_detail,
};
use cachecast::curve::{CurveTable, TrialCount};
use cachecast::geometry::{local_avg_sir_exact, local_avg_sirs_approx, sample_ppp_at_least};
use cachecast::montecarlo::try_run_trials;
use cachecast::phy_sim::{average_stream_rates_mc, outage_curve_mc};
use cachecast::stats::EmpiricalCdf;
use cachecast::Receiver;

use super::db_to_linear;
use crate::error::CliResult;
use crate::output::Output;
use crate::ExperimentSpec;

pub fn simulate(spec: &ExperimentSpec, out: &Output) -> CliResult<String> {
    let cfg = &spec.config;
    let sys = &cfg.system;
    let (l, seed, trials, workers) = (sys.l, cfg.seed(), cfg.trials, spec.workers);
    let sir_db = cfg.sir_db_grid.values();
    let mc = TrialCount::MonteCarlo(trials);

    let draws = try_run_trials(seed, trials, workers, |_, rng| {
        let (g, rejected) = sample_ppp_at_least(sys, l + 1, rng)?;
        let approx = local_avg_sirs_approx(&g, l, sys.lambda_density, sys.eta)?;
        let exact = (1..=l)
            .map(|ell| local_avg_sir_exact(&g, ell, l, sys.eta))
            .collect::<cachecast::Result<Vec<f64>>>()?;
        Ok((approx, exact, rejected))
    })?;
    let resampled: u64 = draws.iter().map(|d| d.2).sum();
    let mut cdf = CurveTable::new(
        "Monte Carlo CDFs of the local-average SIR",
        "sir_db",
        sir_db.clone(),
        out.provenance(mc)
            .with("L", l)
            .with("lambda", sys.lambda_density)
            .with("eta", sys.eta)
            .with("area_radius_km", sys.area_radius_km)
            .with("resampled_geometries", resampled),
    )?;
    for (name, pick) in [("rho_tilde", 0usize), ("rho", 1)] {
        for ell in 1..=l {
            let samples: Vec<f64> = draws
                .iter()
                .map(|d| if pick == 0 { d.0[ell - 1] } else { d.1[ell - 1] })
                .collect();
            let e = EmpiricalCdf::new(&samples);
            cdf.push_column(format!("{name}_{ell}"), sir_db.iter().map(|&x| e.eval(db_to_linear(x))).collect())?;
        }
    }
    out.write_table("sir_cdf_mc.csv", &cdf)?;

    let rates = cfg.rate_grid.values();
    let curve = outage_curve_mc(sys, &rates, cfg.receiver, trials, seed, workers)?;
    let p = &curve.points;
    let outage = CurveTable::new(
        "Monte Carlo outage probability versus delivery rate",
        "rate_bps_hz",
        rates,
        out.provenance(mc)
            .with("receiver", cfg.receiver)
            .with("n_r", sys.n_r)
            .with("L", l)
            .with("eta", sys.eta)
            .with("resampled_geometries", curve.resampled),
    )?
    .with_column("outage", p.iter().map(|e| e.probability).collect())?
    .with_column("ci_low", p.iter().map(|e| e.ci_low).collect())?
    .with_column("ci_high", p.iter().map(|e| e.ci_high).collect())?
    .with_column("relaxed_outage", p.iter().map(|e| e.relaxed_probability).collect())?;
    out.write_table("outage_mc.csv", &outage)?;

    let erg = &cfg.ergodic;
    let est = average_stream_rates_mc(sys, cfg.receiver, erg.geometries, erg.fading_per_geometry, seed, workers)?;
    let ergodic = CurveTable::new(
        "Monte Carlo average ergodic rate per stream",
        "ell",
        (1..=l).map(|e| e as f64).collect(),
        out.provenance(TrialCount::MonteCarlo(erg.geometries * erg.fading_per_geometry))
            .with("receiver", cfg.receiver)
            .with("n_r", sys.n_r)
            .with("L", l)
            .with("geometries", erg.geometries)
            .with("fading_per_geometry", erg.fading_per_geometry),
    )?
    .with_column("mean_rate", est.iter().map(|e| e.mean_rate).collect())?
    .with_column("std_error", est.iter().map(|e| e.std_error).collect())?;
    out.write_table("ergodic_rates_mc.csv", &ergodic)?;

    Ok(format!(
        "simulate: {trials} geometries, L={l}, n_r={}, receiver {}, config {}",
        sys.n_r, cfg.receiver, out.config_hash
    ))
}

fn stream_dof(ell: usize, l: usize, n_r: usize, receiver: Receiver) -> usize {
    match receiver {
        Receiver::Pzf => n_r - l + 1,
        Receiver::PzfSic => n_r - l + ell,
    }
}

pub fn analyze(spec: &ExperimentSpec, out: &Output) -> CliResult<String> {
    let cfg = &spec.config;
    let sys = &cfg.system;
    let (l, n_r, eta) = (sys.l, sys.n_r, sys.eta);
    let sir_db = cfg.sir_db_grid.values();
    let gammas: Vec<f64> = sir_db.iter().map(|&x| db_to_linear(x)).collect();

    let mut clamped_total = 0;
    let mut rho_cols = Vec::new();
    for ell in 1..=l {
        let (v, clamped) = cdf_rho_curve(&gammas, ell, l, eta, &cfg.euler)?;
        clamped_total += clamped;
        rho_cols.push(v);
    }
    let mut cdf = CurveTable::new(
        "Analytic CDFs of the approximate local-average SIR and SIR",
        "sir_db",
        sir_db,
        out.provenance(TrialCount::Analytic)
            .with("L", l)
            .with("n_r", n_r)
            .with("eta", eta)
            .with("receiver", cfg.receiver)
            .with("euler_A", cfg.euler.a)
            .with("euler_B", cfg.euler.b)
            .with("euler_G", cfg.euler.g)
            .with("clamped_points", clamped_total),
    )?;
    for (ell, col) in (1..=l).zip(rho_cols) {
        cdf.push_column(format!("rho_tilde_{ell}"), col)?;
    }
    for ell in 1..=l {
        let dof = stream_dof(ell, l, n_r, cfg.receiver);
        let col = gammas
            .iter()
            .map(|&g| cdf_sir_tilde_dof(g, ell, l, dof, eta))
            .collect::<cachecast::Result<Vec<f64>>>()?;
        cdf.push_column(format!("sir_tilde_{ell}"), col)?;
    }
    out.write_table("sir_cdf_analytic.csv", &cdf)?;

    let mut pzf = Vec::new();
    let mut sic = Vec::new();
    for ell in 1..=l {
        pzf.push(avg_rate_stream_dof(ell, l, stream_dof(ell, l, n_r, Receiver::Pzf), eta)?);
        sic.push(avg_rate_stream_dof(ell, l, stream_dof(ell, l, n_r, Receiver::PzfSic), eta)?);
    }
    let rates_tbl = CurveTable::new(
        "Average rate bound per stream",
        "ell",
        (1..=l).map(|e| e as f64).collect(),
        out.provenance(TrialCount::Analytic).with("L", l).with("n_r", n_r).with("eta", eta),
    )?
    .with_column("pzf", pzf)?
    .with_column("pzf_sic", sic)?;
    out.write_table("avg_rates.csv", &rates_tbl)?;

    let rates = cfg.rate_grid.values();
    let detail = rates
        .iter()
        .map(|&r| outage_analytic_detail(r, l, n_r, eta, cfg.receiver, &cfg.euler))
        .collect::<cachecast::Result<Vec<_>>>()?;
    let outage = CurveTable::new(
        "Analytic outage bound versus delivery rate",
        "rate_bps_hz",
        rates,
        out.provenance(TrialCount::Analytic)
            .with("receiver", cfg.receiver)
            .with("L", l)
            .with("n_r", n_r)
            .with("eta", eta)
            .with("dof", last_stream_dof(l, n_r, cfg.receiver)),
    )?
    .with_column("outage", detail.iter().map(|d| d.probability).collect())?
    .with_column("rho_tilde_threshold", detail.iter().map(|d| d.threshold).collect())?
    .with_column("saturated", detail.iter().map(|d| f64::from(u8::from(d.saturated))).collect())?;
    out.write_table("outage_analytic.csv", &outage)?;

    let mut a_pzf = Vec::new();
    let mut a_sic = Vec::new();
    for ll in 1..=n_r {
        a_pzf.push(avg_rate_pzf(ll, n_r, eta)?);
        a_sic.push(avg_rate_pzf_sic(ll, n_r, eta)?);
    }
    let xs: Vec<f64> = (1..=n_r).map(|x| x as f64).collect();
    let product = CurveTable::new(
        "L times the weakest-stream average rate bound",
        "L",
        xs.clone(),
        out.provenance(TrialCount::Analytic).with("n_r", n_r).with("eta", eta),
    )?
    .with_column("pzf_rate", a_pzf.clone())?
    .with_column("pzf_product", xs.iter().zip(&a_pzf).map(|(x, r)| x * r).collect())?
    .with_column("pzf_sic_rate", a_sic.clone())?
    .with_column("pzf_sic_product", xs.iter().zip(&a_sic).map(|(x, r)| x * r).collect())?;
    out.write_table("lr_product.csv", &product)?;

    Ok(format!(
        "analyze: L={l}, n_r={n_r}, eta={eta}, {clamped_total} clamped CDF points, config {}",
        out.config_hash
    ))
}
