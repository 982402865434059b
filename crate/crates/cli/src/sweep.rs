//! The N sweep: Monte Carlo estimates and closed-form bounds, one row per N.

use std::io::Write;

use crdiv_core::closedform::{
    asymptotic_k_lower, asymptotic_k_upper, log2_ln, lower_bound_capacity, upper_bound_capacity,
};
use crdiv_core::montecarlo::{
    estimate_capacities_analytic, estimate_departure_rates, simulate_queue_with_capacity,
};
use crdiv_core::{CapacityEstimate, Scheduler, SystemParams};
use rayon::prelude::*;

use crate::config::{linear_to_db, ExperimentConfig, Occupancy};
use crate::error::CliError;

pub const CSV_HEADER: [&str; 14] = [
    "N",
    "mc_exact_mean",
    "mc_exact_se",
    "mc_lower_mean",
    "mc_lower_se",
    "mc_upper_mean",
    "mc_upper_se",
    "cf_lower",
    "cf_upper",
    "kl_log2lnN",
    "ku_log2lnN",
    "mu_hat",
    "mu_hat_se",
    "busy_fraction",
];

const CAPACITY_STREAM: u64 = 0;
const DEPARTURE_STREAM: u64 = 1;

/// One sweep row. `None` cells are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    /// Monte Carlo capacities in the order exact, lower, upper.
    pub mc: [Option<CapacityEstimate>; 3],
    pub cf_lower: Option<f64>,
    pub cf_upper: Option<f64>,
    pub kl_log2_ln_n: Option<f64>,
    pub ku_log2_ln_n: Option<f64>,
    pub mu_hat: Option<f64>,
    pub mu_hat_se: Option<f64>,
    pub busy_fraction: Option<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one `(N, purpose)` pair, so rows can be computed in any order.
pub fn derive_seed(master: u64, n: usize, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(((n as u64) << 4) | stream))
}

fn slot_of(s: Scheduler) -> usize {
    Scheduler::BOUNDED.iter().position(|&b| b == s).expect("bounded scheduler")
}

fn analytic_row(config: &ExperimentConfig, params: &SystemParams, n: usize) -> SweepRow {
    let mut row = closed_form_cells(params, n);
    // The exact scheduler's departure rate is always reported.
    let mut departure_set = vec![Scheduler::MaxSnr];
    departure_set.extend(config.schedulers.iter().filter(|&&s| s != Scheduler::MaxSnr));
    let mus = estimate_departure_rates(
        params,
        &departure_set,
        config.trials,
        derive_seed(config.seed, n, DEPARTURE_STREAM),
    );
    let requests: Vec<(Scheduler, f64)> = config
        .schedulers
        .iter()
        .map(|&s| (s, mus[departure_set.iter().position(|&d| d == s).unwrap()].mean))
        .collect();
    let caps = estimate_capacities_analytic(
        params,
        &requests,
        config.trials,
        derive_seed(config.seed, n, CAPACITY_STREAM),
    );
    for (&(s, _), cap) in requests.iter().zip(&caps) {
        row.mc[slot_of(s)] = Some(cap.total);
    }
    let mu = mus[0];
    row.mu_hat = Some(mu.mean);
    row.mu_hat_se = Some(mu.std_error);
    row.busy_fraction = Some(if mu.mean > 0.0 {
        (params.lambda() / mu.mean).min(1.0)
    } else {
        1.0
    });
    row
}

fn queue_row(config: &ExperimentConfig, params: &SystemParams, n: usize) -> SweepRow {
    let mut row = closed_form_cells(params, n);
    let seed = derive_seed(config.seed, n, CAPACITY_STREAM);
    let mut exact_report = None;
    for &s in &config.schedulers {
        let (report, cap) = simulate_queue_with_capacity(params, s, config.trials, seed);
        row.mc[slot_of(s)] = Some(cap.total);
        if s == Scheduler::MaxSnr {
            exact_report = Some(report);
        }
    }
    let report = exact_report.unwrap_or_else(|| {
        simulate_queue_with_capacity(params, Scheduler::MaxSnr, config.trials, seed).0
    });
    if report.saturated {
        log::warn!("N = {n}: primary queue is unstable (lambda >= measured departure rate)");
    }
    row.mu_hat = report.empirical_mu;
    row.mu_hat_se = report.empirical_mu.map(|_| report.empirical_mu_se);
    row.busy_fraction = Some(report.busy_fraction);
    row
}

fn closed_form_cells(params: &SystemParams, n: usize) -> SweepRow {
    let growth = log2_ln(n);
    SweepRow {
        n,
        mc: [None; 3],
        cf_lower: lower_bound_capacity(params, n).ok(),
        cf_upper: upper_bound_capacity(params, n).ok(),
        kl_log2_ln_n: growth.map(|g| asymptotic_k_lower(params) * g),
        ku_log2_ln_n: growth.map(|g| asymptotic_k_upper(params) * g),
        mu_hat: None,
        mu_hat_se: None,
        busy_fraction: None,
    }
}

pub fn sweep_row(config: &ExperimentConfig, n: usize) -> Result<SweepRow, CliError> {
    let params = config.params.with_n(n)?;
    let row = match config.occupancy {
        Occupancy::Analytic => analytic_row(config, &params, n),
        Occupancy::Queue => queue_row(config, &params, n),
    };
    log::info!("N = {n} done");
    Ok(row)
}

/// Runs every N of the configuration. Rows come back in `n_list` order and
/// do not depend on the number of worker threads.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    config.n_list.par_iter().map(|&n| sweep_row(config, n)).collect()
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

/// Writes the `#` provenance block, the header and the rows.
pub fn write_sweep_csv<W: Write>(config: &ExperimentConfig, rows: &[SweepRow], mut out: W) -> Result<(), CliError> {
    let p = &config.params;
    let names: Vec<&str> = config.schedulers.iter().map(|s| s.name()).collect();
    writeln!(out, "# crdiv sweep")?;
    writeln!(out, "# p_d = {}", p.p_d())?;
    writeln!(out, "# p_f = {}", p.p_f())?;
    writeln!(out, "# lambda = {}", p.lambda())?;
    writeln!(out, "# mu_min = {}", p.mu_min())?;
    writeln!(out, "# P_p = {} linear = {} dB", p.p_p(), config.pp_db)?;
    writeln!(out, "# P_s_max = {} linear = {} dB", p.p_s_max(), config.psmax_db)?;
    writeln!(out, "# R = {}", p.rate())?;
    writeln!(out, "# derived R_p = {} K = {} ({} dB)", p.rp(), p.headroom(), linear_to_db(p.headroom()))?;
    writeln!(out, "# k_l = {} k_u = {}", asymptotic_k_lower(p), asymptotic_k_upper(p))?;
    writeln!(
        out,
        "# trials = {} seed = {} occupancy = {} schedulers = {}",
        config.trials,
        config.seed,
        config.occupancy.name(),
        names.join(",")
    )?;
    writeln!(
        out,
        "# empty cell: bound formula not applicable at this N, scheduler not selected, or no busy slot observed"
    )?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let mut record = vec![r.n.to_string()];
        for est in &r.mc {
            record.push(cell(est.map(|e| e.mean)));
            record.push(cell(est.map(|e| e.std_error)));
        }
        for v in [
            r.cf_lower,
            r.cf_upper,
            r.kl_log2_ln_n,
            r.ku_log2_ln_n,
            r.mu_hat,
            r.mu_hat_se,
            r.busy_fraction,
        ] {
            record.push(cell(v));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
