//! Asymptotic lower/upper capacity bounds and their scaling constants.
//!
//! The bound formulas are large-`N` approximations. At small `N` some of
//! their logarithms are negative or undefined; those cases are reported as
//! [`ClosedFormError::NotApplicable`] rather than clamped.

use std::f64::consts::LN_2;

use thiserror::Error;

use crate::model::SystemParams;
use crate::specfun::{lambert_w0, mean_log2_one_plus_exp_scaled, SpecialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("{what} requires N >= {min}, got N = {n}")]
    Domain {
        what: &'static str,
        min: usize,
        n: usize,
    },
    #[error("{what} is not applicable at N = {n}: {reason}")]
    NotApplicable {
        what: &'static str,
        n: usize,
        reason: &'static str,
    },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Probability that no secondary transmitter saturates, i.e. that
/// `max_i K/α_i ≤ P_s,max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnsaturatedProbability {
    /// `exp(K / (P_s,max · ln(1 − 1/N)))`, the prefactor used by the bounds.
    pub prefactor: f64,
    /// `exp(−N·K / P_s,max)`.
    pub exact: f64,
}

/// Exact probability that all `n` power caps fit under `P_s,max`.
pub fn prob_unsaturated_exact(params: &SystemParams, n: usize) -> f64 {
    (-(n as f64) * params.headroom() / params.p_s_max()).exp()
}

pub fn prob_unsaturated(params: &SystemParams, n: usize) -> Result<UnsaturatedProbability, ClosedFormError> {
    if n < 2 {
        return Err(ClosedFormError::Domain {
            what: "prob_unsaturated",
            min: 2,
            n,
        });
    }
    let log_term = (-1.0 / n as f64).ln_1p();
    Ok(UnsaturatedProbability {
        prefactor: (params.headroom() / (params.p_s_max() * log_term)).exp(),
        exact: prob_unsaturated_exact(params, n),
    })
}

/// Effective SNR of the unsaturated branch of the lower bound,
/// `P_s,max · W(K·N/P_s,max · e^{K/P_s,max}) − K`.
pub fn b_n_low1(params: &SystemParams, n: usize) -> Result<f64, ClosedFormError> {
    if n < 1 {
        return Err(ClosedFormError::Domain {
            what: "b_n_low1",
            min: 1,
            n,
        });
    }
    let k = params.headroom();
    let p = params.p_s_max();
    let arg = k * n as f64 / p * (k / p).exp();
    Ok(p * lambert_w0(arg)? - k)
}

// E[μ(min of m Exp(1) gains, P_s,max) | that minimum < K/P_s,max], in closed form:
// p_d e^{-R_p} + (1-p_d) · m e^{-R_p(1+K)} (e^{K(R_p P + m)/P} - 1) / ((R_p P + m)(e^{K m/P} - 1)),
// rearranged so that neither exponential overflows.
fn saturated_departure_mean(params: &SystemParams, m: f64) -> f64 {
    let p_d = params.p_d();
    let rp = params.rp();
    let base = (-rp).exp();
    if p_d >= 1.0 {
        return base;
    }
    let k = params.headroom();
    let p = params.p_s_max();
    let a = k * rp + m * k / p;
    let b = m * k / p;
    let ratio = (-a).exp_m1() / (-b).exp_m1();
    p_d * base + (1.0 - p_d) * m / (rp * p + m) * base * ratio
}

/// Mean primary departure rate given a saturated transmitter, `M_avg,l`.
pub fn m_avg_lower(params: &SystemParams) -> f64 {
    saturated_departure_mean(params, 1.0)
}

/// Mean primary departure rate when the weakest interference link transmits
/// at `P_s,max`, `M_avg,u(N)`. Tends to `e^{−R_p}` as `N` grows.
pub fn m_avg_upper(params: &SystemParams, n: usize) -> f64 {
    saturated_departure_mean(params, n as f64)
}

/// One branch (unsaturated or saturated) of a bound, split by slot type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTerms {
    /// Busy-slot weight `λ/μ` used by the branch.
    pub busy_weight: f64,
    /// The branch's `log2(1 + SNR)`-type term.
    pub log_term: f64,
    /// `[w(1 − p_d) + (1 − w)(1 − p_f)] · log_term`.
    pub log_part: f64,
    /// `−w(1 − p_d) · e^{1/P_p}E1(1/P_p)/ln 2`.
    pub penalty_part: f64,
    /// Interfered (busy-slot) contribution `w(1 − p_d)(log_term − penalty)`.
    pub busy: f64,
    /// Idle-slot contribution `(1 − w)(1 − p_f) · log_term`.
    pub idle: f64,
}

impl BranchTerms {
    fn new(params: &SystemParams, busy_weight: f64, log_term: f64, penalty: f64) -> Self {
        let busy_factor = busy_weight * (1.0 - params.p_d());
        let idle_factor = (1.0 - busy_weight) * (1.0 - params.p_f());
        Self {
            busy_weight,
            log_term,
            log_part: (busy_factor + idle_factor) * log_term,
            penalty_part: -busy_factor * penalty,
            busy: busy_factor * (log_term - penalty),
            idle: idle_factor * log_term,
        }
    }

    const ZERO: BranchTerms = BranchTerms {
        busy_weight: 0.0,
        log_term: 0.0,
        log_part: 0.0,
        penalty_part: 0.0,
        busy: 0.0,
        idle: 0.0,
    };

    pub fn value(&self) -> f64 {
        self.busy + self.idle
    }
}

/// A bound decomposed into its two branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub prob_unsaturated: f64,
    pub unsaturated: BranchTerms,
    pub saturated: BranchTerms,
}

impl BoundTerms {
    pub fn value(&self) -> f64 {
        let q = self.prob_unsaturated;
        // Skip a branch with zero weight: its terms may be infinite.
        let unsat = if q > 0.0 { q * self.unsaturated.value() } else { 0.0 };
        let sat = if q < 1.0 { (1.0 - q) * self.saturated.value() } else { 0.0 };
        unsat + sat
    }
}

/// Expected log-penalty from primary interference at the secondary receiver,
/// `e^{1/P_p}·E1(1/P_p)/ln 2`.
pub fn interference_penalty(params: &SystemParams) -> Result<f64, ClosedFormError> {
    Ok(mean_log2_one_plus_exp_scaled(params.p_p())?)
}

pub fn lower_bound_terms(params: &SystemParams, n: usize) -> Result<BoundTerms, ClosedFormError> {
    const WHAT: &str = "lower_bound_capacity";
    let q = prob_unsaturated(params, n)?.prefactor;
    let p = params.p_s_max();
    let k = params.headroom();
    let screened = n as f64 * -(-k / p).exp_m1();
    if screened <= 1.0 {
        return Err(ClosedFormError::NotApplicable {
            what: WHAT,
            n,
            reason: "N(1 - exp(-K/P_s,max)) <= 1, the saturated log term is undefined",
        });
    }
    let penalty = interference_penalty(params)?;
    let lam = params.lambda();

    let unsaturated = if q > 0.0 {
        let b = b_n_low1(params, n)?;
        BranchTerms::new(params, lam / params.mu_min(), b.ln_1p() / LN_2, penalty)
    } else {
        BranchTerms::ZERO
    };
    let sat_log = (p * screened.ln()).ln_1p() / LN_2;
    let saturated = BranchTerms::new(params, lam / m_avg_lower(params), sat_log, penalty);
    Ok(BoundTerms {
        prob_unsaturated: q,
        unsaturated,
        saturated,
    })
}

pub fn upper_bound_terms(params: &SystemParams, n: usize) -> Result<BoundTerms, ClosedFormError> {
    const WHAT: &str = "upper_bound_capacity";
    let q = prob_unsaturated(params, n)?.prefactor;
    let p = params.p_s_max();
    let snr = p * (n as f64).ln();
    if snr <= 1.0 {
        return Err(ClosedFormError::NotApplicable {
            what: WHAT,
            n,
            reason: "P_s,max ln N <= 1, the unsaturated log term is not positive",
        });
    }
    let penalty = interference_penalty(params)?;
    let lam = params.lambda();
    let unsaturated = BranchTerms::new(params, lam / params.mu_min(), snr.log2(), penalty);
    let saturated = BranchTerms::new(params, lam / m_avg_upper(params, n), snr.ln_1p() / LN_2, penalty);
    Ok(BoundTerms {
        prob_unsaturated: q,
        unsaturated,
        saturated,
    })
}

/// Asymptotic lower bound on the secondary average capacity (bits/s/Hz).
pub fn lower_bound_capacity(params: &SystemParams, n: usize) -> Result<f64, ClosedFormError> {
    Ok(lower_bound_terms(params, n)?.value())
}

/// Asymptotic upper bound on the secondary average capacity (bits/s/Hz).
pub fn upper_bound_capacity(params: &SystemParams, n: usize) -> Result<f64, ClosedFormError> {
    Ok(upper_bound_terms(params, n)?.value())
}

fn mix(params: &SystemParams, busy_weight: f64) -> f64 {
    busy_weight * (1.0 - params.p_d()) + (1.0 - busy_weight) * (1.0 - params.p_f())
}

/// `k_l` in the lower bound's `k_l·log2(ln N)` growth.
pub fn asymptotic_k_lower(params: &SystemParams) -> f64 {
    mix(params, params.lambda() / m_avg_lower(params))
}

/// `k_u` in the upper bound's `k_u·log2(ln N)` growth.
pub fn asymptotic_k_upper(params: &SystemParams) -> f64 {
    mix(params, params.lambda() / (-params.rp()).exp())
}

/// `log2(ln N)`, the multiuser diversity growth; `None` for `N < 2`.
pub fn log2_ln(n: usize) -> Option<f64> {
    (n >= 2).then(|| (n as f64).ln().log2())
}

/// Closed-form curves over a grid of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub n_values: Vec<usize>,
    /// `None` where the formula is not applicable.
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    pub k_lower: f64,
    pub k_upper: f64,
}

pub fn bound_curve(params: &SystemParams, n_values: &[usize]) -> BoundCurve {
    BoundCurve {
        n_values: n_values.to_vec(),
        lower: n_values.iter().map(|&n| lower_bound_capacity(params, n).ok()).collect(),
        upper: n_values.iter().map(|&n| upper_bound_capacity(params, n).ok()).collect(),
        k_lower: asymptotic_k_lower(params),
        k_upper: asymptotic_k_upper(params),
    }
}
