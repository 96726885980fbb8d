use std::time::Instant;

use cachecast::analysis::{
    avg_rate_by_quadrature, avg_rate_pzf, avg_rate_pzf_sic, cdf_rho_approx, cdf_sir_tilde_dof,
    cdf_sir_tilde_quadrature, laplace_inv_rho, laplace_inv_rho_quadrature, outage_analytic,
};
use cachecast::coded_caching::{
    build_multicast_codeword, codeword_length_bits, mds_decode, mds_encode_bytes, place_caches, recover_file,
    subsets, Library,
};
use cachecast::curve::TrialCount;
use cachecast::montecarlo::{run_trials, trial_rng};
use cachecast::phy_sim::{outage_curve_mc, pzf_filters, sample_channel, verify_sic_order_theorem};
use cachecast::planner::{optimize_l, Objective, PlannerOptions};
use cachecast::specfun::regularized_upper_gamma;
use cachecast::stats::ks_statistic;
use cachecast::Receiver;
use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::Output;
use crate::ExperimentSpec;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn<'a> = Box<dyn Fn() -> cachecast::Result<(bool, String)> + 'a>;

fn euler_exponential() -> cachecast::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let g = 0.1 * 100f64.powf(i as f64 / 60.0);
        let f = cdf_rho_approx(g, 1, 1, 4.0, &Default::default())?;
        worst = worst.max((f - (-1.0 / g).exp()).abs());
    }
    Ok((worst <= 1e-3, format!("max |F - exp(-1/γ)| = {worst:.2e} (tol 1e-3)")))
}

fn laplace_quadrature() -> cachecast::Result<(bool, String)> {
    let pts = [
        (Complex64::new(2.0, 0.0), 1, 3, 3.75),
        (Complex64::new(0.5, 1.0), 2, 4, 3.75),
        (Complex64::new(5.0, 0.0), 1, 2, 3.0),
        (Complex64::new(1.0, -2.0), 3, 3, 4.5),
    ];
    let mut worst: f64 = 0.0;
    for (s, ell, l, eta) in pts {
        let a = laplace_inv_rho(s, ell, l, eta)?;
        let b = laplace_inv_rho_quadrature(s, ell, l, eta)?;
        worst = worst.max((a - b).norm());
    }
    Ok((worst <= 1e-7, format!("max deviation {worst:.2e} (tol 1e-7)")))
}

fn sir_cdf_quadrature() -> cachecast::Result<(bool, String)> {
    let pts = [(1.0, 2, 4, 5, 3.75), (3.0, 1, 3, 2, 3.5), (0.3, 3, 3, 6, 3.75)];
    let mut worst: f64 = 0.0;
    for (g, ell, l, dof, eta) in pts {
        let a = cdf_sir_tilde_dof(g, ell, l, dof, eta)?;
        let b = cdf_sir_tilde_quadrature(g, ell, l, dof, eta)?;
        worst = worst.max((a - b).abs());
    }
    Ok((worst <= 1e-6, format!("max deviation {worst:.2e} (tol 1e-6)")))
}

fn sir_laplace_consistency() -> cachecast::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for l in 1..=5 {
        for ell in 1..=l {
            for g in [0.1, 1.0, 10.0] {
                let tail = 1.0 - cdf_sir_tilde_dof(g, ell, l, 1, 3.75)?;
                let lap = laplace_inv_rho(Complex64::new(g, 0.0), ell, l, 3.75)?.re;
                worst = worst.max((tail - lap).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max |1 - F - L| = {worst:.2e} (tol 1e-10)")))
}

fn avg_rate_closed_form() -> cachecast::Result<(bool, String)> {
    let pzf = (avg_rate_pzf(4, 8, 3.75)? - avg_rate_by_quadrature(4, 4, 5, 3.75)?).abs();
    let sic = (avg_rate_pzf_sic(8, 8, 3.75)? - avg_rate_by_quadrature(8, 8, 8, 3.75)?).abs();
    Ok((
        pzf <= 1e-6 && sic <= 1e-5,
        format!("PZF (4,8) {pzf:.2e} (tol 1e-6), SIC (8,8) {sic:.2e} (tol 1e-5)"),
    ))
}

fn planner_selection() -> cachecast::Result<(bool, String)> {
    let o = PlannerOptions::default();
    let pick = |n_r, rx| optimize_l(n_r, 3.75, Objective::AverageRate, rx, &o).map(|r| r.selected_l);
    let got = [
        pick(8, Receiver::Pzf)?,
        pick(16, Receiver::Pzf)?,
        pick(8, Receiver::PzfSic)?,
        pick(16, Receiver::PzfSic)?,
    ];
    Ok((
        got == [3, 6, 8, 16],
        format!("L* = {got:?} for (PZF 8, PZF 16, SIC 8, SIC 16), expected [3, 6, 8, 16]"),
    ))
}

fn coded_caching(seed: u64) -> cachecast::Result<(bool, String)> {
    let mut cases = 0u64;
    let mut failures = 0u64;
    let mut rng = trial_rng(seed, 1);
    for k in 1..=4usize {
        for n in 1..=3usize {
            for t in 1..=k {
                let m = Ratio::new((t * n) as u64, k as u64);
                let parts = subsets(k, t).len();
                let lib = Library::random(n, 2 * parts, &mut rng)?;
                let a = place_caches(k, n, m, &lib)?;
                let mut demand = vec![0usize; k];
                loop {
                    cases += 1;
                    let cw = build_multicast_codeword(&demand, &a, &lib)?;
                    let len = codeword_length_bits(k as u64, m / Ratio::from_integer(n as u64), lib.file_bits())?;
                    let ok = cw.total_bits == len
                        && (0..k).all(|u| recover_file(u, &cw, &a, &demand).map(|f| f == lib.file(demand[u])).unwrap_or(false));
                    failures += u64::from(!ok);
                    // next demand vector in base N
                    let mut i = 0;
                    while i < k && demand[i] == n - 1 {
                        demand[i] = 0;
                        i += 1;
                    }
                    if i == k {
                        break;
                    }
                    demand[i] += 1;
                }
            }
        }
    }
    Ok((failures == 0, format!("{cases} (K, N, t, demand) cases, {failures} failures")))
}

fn mds_subsets(seed: u64) -> cachecast::Result<(bool, String)> {
    let mut rng = trial_rng(seed, 2);
    let mut decodes = 0u64;
    let mut failures = 0u64;
    for n_e in 1..=6usize {
        for l in 1..=n_e {
            let data = Library::random(1, 37, &mut rng)?.file(0).to_vec();
            let bits = data.len() as u64 * 8 - 3;
            let set = mds_encode_bytes(&data, bits, l, n_e)?;
            let mut want = data.clone();
            *want.last_mut().expect("non-empty") &= 0xF8;
            for s in subsets(n_e, l) {
                decodes += 1;
                let chosen: Vec<(usize, Vec<u8>)> = s.iter().map(|&i| (i, set.blocks[i].clone())).collect();
                let ok = mds_decode(&chosen, l, n_e, bits).map(|d| d == want).unwrap_or(false);
                failures += u64::from(!ok);
            }
        }
    }
    Ok((failures == 0, format!("{decodes} subset decodes, {failures} failures")))
}

fn sic_order(seed: u64) -> cachecast::Result<(bool, String)> {
    let mut rng = trial_rng(seed, 3);
    let mut bad = 0;
    let mut total = 0;
    for l in 2..=5 {
        let r = verify_sic_order_theorem(l, 1000, &mut rng)?;
        bad += r.counterexamples.len();
        total += r.instances;
    }
    Ok((bad == 0, format!("{total} instances, {bad} counterexamples")))
}

fn useful_gain_law(seed: u64, workers: usize) -> cachecast::Result<(bool, String)> {
    let n = 20_000u64;
    let gains = run_trials(seed, n, workers, |_, rng| {
        let h = sample_channel(8, 4, rng);
        pzf_filters(&h, 4).map(|f| f.useful_gain[1])
    })?
    .into_iter()
    .collect::<cachecast::Result<Vec<f64>>>()?;
    let d = ks_statistic(&gains, |x| 1.0 - regularized_upper_gamma(5, x).unwrap_or(f64::NAN));
    let crit = 1.63 / (n as f64).sqrt();
    Ok((d <= crit, format!("KS {d:.4} vs Gamma(5) over {n} draws (1% critical {crit:.4})")))
}

fn outage_mc(spec: &ExperimentSpec) -> cachecast::Result<(bool, String)> {
    let cfg = &spec.config;
    let sys = &cfg.system;
    let rates = cfg.rate_grid.values();
    let curve = outage_curve_mc(sys, &rates, Receiver::Pzf, cfg.trials, cfg.seed(), spec.workers)?;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let mut ok = true;
    for e in &curve.points {
        let a = outage_analytic(e.rate, sys.l, sys.n_r, sys.eta, Receiver::Pzf, &cfg.euler)?;
        if !(0.02..=0.9).contains(&a) {
            continue;
        }
        used += 1;
        let sigma = (a * (1.0 - a) / e.trials as f64).sqrt();
        let dev = (a - e.probability).abs();
        ok &= dev <= 0.01_f64.max(3.0 * sigma);
        worst = worst.max(dev);
    }
    Ok((
        ok && used > 0,
        format!(
            "PZF n_r={} L={}: max |MC - analytic| = {worst:.4} over {used} rates, {} geometries (tol max(0.01, 3σ))",
            sys.n_r, sys.l, cfg.trials
        ),
    ))
}

fn determinism(spec: &ExperimentSpec) -> cachecast::Result<(bool, String)> {
    let cfg = &spec.config;
    let rates = cfg.rate_grid.values();
    let a = outage_curve_mc(&cfg.system, &rates, cfg.receiver, 2000, cfg.seed(), 1)?;
    let b = outage_curve_mc(&cfg.system, &rates, cfg.receiver, 2000, cfg.seed(), 3)?;
    Ok((a == b, "outage curve at 1 and 3 workers".to_string()))
}

pub fn validate(spec: &ExperimentSpec, out: &Output) -> CliResult<String> {
    let seed = spec.config.seed();
    let workers = spec.workers;
    let suite: Vec<(&'static str, CheckFn)> = vec![
        ("euler-exponential", Box::new(euler_exponential)),
        ("laplace-quadrature", Box::new(laplace_quadrature)),
        ("sir-cdf-quadrature", Box::new(sir_cdf_quadrature)),
        ("sir-laplace-consistency", Box::new(sir_laplace_consistency)),
        ("avg-rate-closed-form", Box::new(avg_rate_closed_form)),
        ("planner-average-rate", Box::new(planner_selection)),
        ("coded-caching-exhaustive", Box::new(move || coded_caching(seed))),
        ("mds-all-subsets", Box::new(move || mds_subsets(seed))),
        ("sic-order-brute-force", Box::new(move || sic_order(seed))),
        ("useful-gain-law", Box::new(move || useful_gain_law(seed, workers))),
        ("outage-mc-vs-analytic", Box::new(|| outage_mc(spec))),
        ("worker-count-determinism", Box::new(|| determinism(spec))),
    ];
    let mut checks = Vec::new();
    for (name, f) in suite {
        let t0 = Instant::now();
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let c = Check {
            name,
            passed,
            detail,
            seconds: t0.elapsed().as_secs_f64(),
        };
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        checks.push(c);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let prov = out.provenance(TrialCount::MonteCarlo(spec.config.trials));
    out.write_json("validate_report.json", &prov, &checks)?;
    let summary = format!("validate: {}/{} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        println!("{summary}");
        return Err(CliError::Validation(format!("{failed} check(s) failed")));
    }
    Ok(summary)
}
