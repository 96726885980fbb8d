use cachecast::curve::{CurveTable, TrialCount};
use cachecast::planner::{optimize_l, verify_mc, McVerification, PlannerOptions, PlannerResult};
use serde::Serialize;

use crate::error::CliResult;
use crate::output::Output;
use crate::ExperimentSpec;

#[derive(Serialize)]
struct Report<'a> {
    #[serde(flatten)]
    plan: &'a PlannerResult,
    verification: Option<McVerification>,
}

pub fn optimize(spec: &ExperimentSpec, out: &Output) -> CliResult<String> {
    let cfg = &spec.config;
    let sys = &cfg.system;
    let opts = PlannerOptions {
        latency: cfg.latency_params(),
        euler: cfg.euler,
    };
    let plan = optimize_l(sys.n_r, sys.eta, cfg.objective, cfg.receiver, &opts)?;
    let verification = if cfg.verify_trials > 0 {
        Some(verify_mc(&plan, sys, cfg.verify_trials, cfg.seed(), spec.workers)?)
    } else {
        None
    };
    let trials = if cfg.verify_trials > 0 {
        TrialCount::MonteCarlo(cfg.verify_trials)
    } else {
        TrialCount::Analytic
    };
    let prov = out
        .provenance(trials)
        .with("objective", plan.objective.name())
        .with("receiver", plan.receiver)
        .with("n_r", plan.n_r)
        .with("eta", plan.eta)
        .with("selected_L", plan.selected_l);
    out.write_json(
        "planner.json",
        &prov,
        &Report {
            plan: &plan,
            verification,
        },
    )?;
    let r = &plan.records;
    let table = CurveTable::new(
        "Macro-diversity order sweep",
        "L",
        r.iter().map(|x| x.l as f64).collect(),
        prov,
    )?
    .with_column("avg_rate", r.iter().map(|x| x.avg_rate).collect())?
    .with_column("rate_at_target", r.iter().map(|x| x.rate_at_target.unwrap_or(f64::NAN)).collect())?
    .with_column("product_lr", r.iter().map(|x| x.product_lr).collect())?
    .with_column("latency_s", r.iter().map(|x| x.latency_s).collect())?;
    out.write_table("planner.csv", &table)?;
    let sel = plan.selected();
    Ok(format!(
        "optimize: selected_L={} ({} objective, receiver {}, n_r={}, L*R={:.6}, latency {:.6} s)",
        plan.selected_l,
        plan.objective.name(),
        plan.receiver,
        plan.n_r,
        sel.product_lr,
        sel.latency_s
    ))
}
