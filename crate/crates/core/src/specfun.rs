//! Special functions needed by the closed-form capacity expressions.
//!
//! Only what the bounds use: the principal branch of the Lambert W function,
//! the exponential integral `E1`, and the expected value of
//! `log2(1 + P·X)` for a unit-mean exponential `X`.

use std::f64::consts::{E, LN_2};

use thiserror::Error;

/// `-1/e`, the branch point of the principal Lambert W branch.
pub const BRANCH_POINT: f64 = -1.0 / E;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: argument {value} is outside the domain ({domain})")]
    Domain {
        function: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("{function}: no convergence after {iterations} iterations at x = {value}")]
    NoConvergence {
        function: &'static str,
        value: f64,
        iterations: usize,
    },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(&'static str),
}

/// Stopping rule for the iterative evaluations in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
    max_iterations: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, max_iterations: usize) -> Result<Self, SpecialError> {
        if abs_tol.is_nan() || abs_tol <= 0.0 {
            return Err(SpecialError::InvalidTolerance("abs_tol must be positive"));
        }
        if max_iterations == 0 {
            return Err(SpecialError::InvalidTolerance("max_iterations must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            max_iterations,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iterations: 100,
        }
    }
}

/// Principal branch `W0(x)` of the Lambert W function, the solution `w ≥ -1`
/// of `w·e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64, SpecialError> {
    lambert_w0_with(x, &Tolerance::default())
}

/// [`lambert_w0`] with an explicit stopping rule.
///
/// Halley iteration on `f(w) = w·e^w − x`. The starting point is the
/// branch-point series in `p = sqrt(2(e·x + 1))` near `-1/e`, the asymptotic
/// `ln x − ln ln x + ln ln x / ln x` above `e`, and `ln(1 + x)` in between.
pub fn lambert_w0_with(x: f64, tol: &Tolerance) -> Result<f64, SpecialError> {
    if x.is_nan() || x < BRANCH_POINT {
        return Err(SpecialError::Domain {
            function: "lambert_w0",
            value: x,
            domain: "x >= -1/e",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    if w <= -1.0 {
        // x sits on (or within rounding of) the branch point.
        return Ok(-1.0);
    }

    for _ in 0..tol.max_iterations {
        let ew = w.exp();
        let f = w * ew - x;
        // Residual at rounding level: further steps only chase noise, which
        // matters next to the branch point where f'(w) vanishes.
        if f.abs() <= 2.0 * f64::EPSILON * x.abs() {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        // Halley can overshoot below the branch point when x is within a few
        // ulps of -1/e; pull back halfway toward -1 instead.
        let next = if next <= -1.0 { 0.5 * (w - 1.0) } else { next };
        if (next - w).abs() <= tol.abs_tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        w = next;
    }

    Err(SpecialError::NoConvergence {
        function: "lambert_w0",
        value: x,
        iterations: tol.max_iterations,
    })
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x > E {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    } else {
        x.ln_1p()
    }
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series up to `x = 1`, continued fraction beyond. Both run to
/// machine precision; the tolerance only bounds the number of terms.
pub fn exp_integral_e1(x: f64) -> Result<f64, SpecialError> {
    exp_integral_e1_with(x, &Tolerance::default())
}

pub fn exp_integral_e1_with(x: f64, tol: &Tolerance) -> Result<f64, SpecialError> {
    check_positive("exp_integral_e1", x)?;
    if x <= 1.0 {
        e1_series(x, tol)
    } else {
        Ok(e1_continued_fraction_scaled(x, tol)? * (-x).exp())
    }
}

/// `e^x·E1(x)`, evaluated without forming `e^x` for large `x` so that it
/// stays finite where `E1` itself underflows.
pub fn exp_scaled_e1(x: f64) -> Result<f64, SpecialError> {
    let tol = Tolerance::default();
    check_positive("exp_scaled_e1", x)?;
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x, &tol)?)
    } else {
        e1_continued_fraction_scaled(x, &tol)
    }
}

/// `E[log2(1 + P·X)]` for `X ~ Exp(1)`, which equals `e^{1/P}·E1(1/P) / ln 2`.
pub fn mean_log2_one_plus_exp_scaled(power: f64) -> Result<f64, SpecialError> {
    if power.is_nan() || power <= 0.0 {
        return Err(SpecialError::Domain {
            function: "mean_log2_one_plus_exp_scaled",
            value: power,
            domain: "P > 0",
        });
    }
    Ok(exp_scaled_e1(1.0 / power)? / LN_2)
}

fn check_positive(function: &'static str, x: f64) -> Result<(), SpecialError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialError::Domain {
            function,
            value: x,
            domain: "x > 0",
        });
    }
    Ok(())
}

// E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
fn e1_series(x: f64, tol: &Tolerance) -> Result<f64, SpecialError> {
    let mut sum = 0.0;
    let mut term = 1.0;
    // The series needs ~30 terms at x = 1; give it room beyond the default budget.
    let budget = tol.max_iterations.max(200);
    for k in 1..=budget {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            return Ok(-EULER_GAMMA - x.ln() - sum);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "exp_integral_e1",
        value: x,
        iterations: budget,
    })
}

// Modified Lentz evaluation of the continued fraction
// e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...))).
fn e1_continued_fraction_scaled(x: f64, tol: &Tolerance) -> Result<f64, SpecialError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let budget = tol.max_iterations.max(200);
    for i in 1..=budget {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            return Ok(h);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "exp_integral_e1",
        value: x,
        iterations: budget,
    })
}
