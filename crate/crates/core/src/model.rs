//! System parameters, channel sampling and the QoS-driven power control law.
//!
//! Powers are linear and normalized to the (unit-variance) noise, so a
//! received SNR is simply `power · gain`. Every channel gain is an
//! independent unit-mean exponential (Rayleigh fading power).

use rand::distr::Open01;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} = {value} is out of range: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error(
        "mu_min = {mu_min} must exceed p_d*exp(-R_p) = {floor}: the headroom K = \
         (1/R_p)*ln((1-p_d)/(mu_min - p_d*exp(-R_p))) - 1 is undefined"
    )]
    HeadroomUndefined { mu_min: f64, floor: f64 },
    #[error(
        "headroom K = {k} is not positive: the primary cannot reach mu_min = {mu_min} \
         even without secondary interference (require K > 0)"
    )]
    NonPositiveHeadroom { k: f64, mu_min: f64 },
    #[error(
        "lambda = {lambda} must be below the interference-free departure rate \
         exp(-R_p) = {limit} for a stable primary queue"
    )]
    Unstable { lambda: f64, limit: f64 },
}

/// Unvalidated scalar inputs. [`Default`] is the reference configuration
/// (`p_d = 0.8`, `p_f = 0.3`, `λ = 0.5`, `P_p = P_s,max = 10 dB`, `R = 0.5`,
/// `μ_min = 0.95`) with a single secondary transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub p_d: f64,
    pub p_f: f64,
    pub lambda: f64,
    pub mu_min: f64,
    pub p_p: f64,
    pub p_s_max: f64,
    pub rate: f64,
    pub n: usize,
}

impl Default for ParamSet {
    fn default() -> Self {
        Self {
            p_d: 0.8,
            p_f: 0.3,
            lambda: 0.5,
            mu_min: 0.95,
            p_p: 10.0,
            p_s_max: 10.0,
            rate: 0.5,
            n: 1,
        }
    }
}

impl ParamSet {
    pub fn validate(self) -> Result<SystemParams, ParamError> {
        SystemParams::new(self)
    }
}

/// Validated system parameters together with the derived constants `R_p`
/// and `K`. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    set: ParamSet,
    rp: f64,
    k: f64,
}

fn probability(name: &'static str, value: f64) -> Result<(), ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name,
            value,
            constraint: "must lie in [0, 1]",
        })
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::OutOfRange {
            name,
            value,
            constraint: "must be positive and finite",
        })
    }
}

/// `R_p = (2^R − 1) / P_p`, the outage threshold on `α_p`.
pub fn derived_rp(rate: f64, p_p: f64) -> f64 {
    (rate.exp2() - 1.0) / p_p
}

/// Interference headroom `K = (1/R_p)·ln((1 − p_d)/(μ_min − p_d·e^{−R_p})) − 1`.
///
/// Errors when `μ_min ≤ p_d·e^{−R_p}`. With perfect detection (`p_d = 1`)
/// the secondary never interferes, so any power is admissible and `K = +∞`.
/// The sign of `K` itself is checked by [`SystemParams::new`].
pub fn headroom_k(p_d: f64, mu_min: f64, rp: f64) -> Result<f64, ParamError> {
    if p_d == 1.0 {
        return Ok(if mu_min < (-rp).exp() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    let floor = p_d * (-rp).exp();
    let gap = mu_min - floor;
    if gap.is_nan() || gap <= 0.0 {
        return Err(ParamError::HeadroomUndefined { mu_min, floor });
    }
    Ok(((1.0 - p_d) / gap).ln() / rp - 1.0)
}

impl SystemParams {
    pub fn new(set: ParamSet) -> Result<Self, ParamError> {
        probability("p_d", set.p_d)?;
        probability("p_f", set.p_f)?;
        probability("lambda", set.lambda)?;
        if !(set.mu_min > 0.0 && set.mu_min <= 1.0) {
            return Err(ParamError::OutOfRange {
                name: "mu_min",
                value: set.mu_min,
                constraint: "must lie in (0, 1]",
            });
        }
        positive("P_p", set.p_p)?;
        positive("P_s_max", set.p_s_max)?;
        positive("R", set.rate)?;
        if set.n == 0 {
            return Err(ParamError::OutOfRange {
                name: "N",
                value: 0.0,
                constraint: "at least one secondary transmitter",
            });
        }

        let rp = derived_rp(set.rate, set.p_p);
        let k = headroom_k(set.p_d, set.mu_min, rp)?;
        if k.is_nan() || k <= 0.0 || set.mu_min >= (-rp).exp() {
            return Err(ParamError::NonPositiveHeadroom {
                k,
                mu_min: set.mu_min,
            });
        }
        let limit = (-rp).exp();
        if set.lambda.is_nan() || set.lambda >= limit {
            return Err(ParamError::Unstable {
                lambda: set.lambda,
                limit,
            });
        }
        Ok(Self { set, rp, k })
    }

    /// Same parameters with a different number of secondary transmitters.
    pub fn with_n(&self, n: usize) -> Result<Self, ParamError> {
        Self::new(ParamSet { n, ..self.set })
    }

    pub fn set(&self) -> &ParamSet {
        &self.set
    }

    pub fn p_d(&self) -> f64 {
        self.set.p_d
    }

    pub fn p_f(&self) -> f64 {
        self.set.p_f
    }

    pub fn lambda(&self) -> f64 {
        self.set.lambda
    }

    pub fn mu_min(&self) -> f64 {
        self.set.mu_min
    }

    pub fn p_p(&self) -> f64 {
        self.set.p_p
    }

    pub fn p_s_max(&self) -> f64 {
        self.set.p_s_max
    }

    pub fn rate(&self) -> f64 {
        self.set.rate
    }

    pub fn n(&self) -> usize {
        self.set.n
    }

    pub fn rp(&self) -> f64 {
        self.rp
    }

    /// The headroom constant `K`; always positive, and infinite when `p_d = 1`.
    pub fn headroom(&self) -> f64 {
        self.k
    }

    /// Primary outage without secondary interference, `1 − e^{−R_p}`.
    pub fn outage_no_interference(&self) -> f64 {
        -(-self.rp).exp_m1()
    }

    /// Primary outage when a secondary transmitter with interference gain
    /// `alpha` transmits at `p_s`: `1 − e^{−R_p(1 + α·P_s)}`.
    pub fn outage_with_interference(&self, alpha: f64, p_s: f64) -> f64 {
        -(-self.rp * (1.0 + alpha * p_s)).exp_m1()
    }

    /// Primary departure rate `μ(α, P_s) = p_d·e^{−R_p} + (1 − p_d)·e^{−R_p(1 + α·P_s)}`.
    pub fn departure_rate(&self, alpha: f64, p_s: f64) -> f64 {
        let p_d = self.set.p_d;
        p_d * (-self.rp).exp() + (1.0 - p_d) * (-self.rp * (1.0 + alpha * p_s)).exp()
    }

    /// Power that drives the departure rate exactly to `μ_min`: `K / α`.
    pub fn power_cap(&self, alpha: f64) -> f64 {
        self.k / alpha
    }

    /// Power cap clamped to `[0, P_s,max]`.
    pub fn transmit_power(&self, alpha: f64) -> f64 {
        let cap = self.power_cap(alpha);
        if cap < 0.0 {
            log::warn!("negative power cap {cap} (K = {}); transmitter stays silent", self.k);
            return 0.0;
        }
        cap.min(self.set.p_s_max)
    }

    /// Whether a transmitter with interference gain `alpha` hits `P_s,max`.
    pub fn is_saturated(&self, alpha: f64) -> bool {
        self.power_cap(alpha) >= self.set.p_s_max
    }

    /// Received secondary SNR `transmit_power(α)·β`.
    pub fn received_snr(&self, alpha: f64, beta: f64) -> f64 {
        self.transmit_power(alpha) * beta
    }
}

/// One slot's fading realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    /// Secondary transmitter → primary receiver.
    pub alpha_s: Vec<f64>,
    /// Secondary transmitter → secondary receiver.
    pub beta_s: Vec<f64>,
    /// Primary transmitter → primary receiver.
    pub alpha_p: f64,
    /// Primary transmitter → secondary receiver.
    pub beta_p: f64,
}

impl ChannelDraw {
    /// Builds a draw from explicit gains; `alpha_s` and `beta_s` must have
    /// the same, nonzero length.
    pub fn new(alpha_s: Vec<f64>, beta_s: Vec<f64>, alpha_p: f64, beta_p: f64) -> Self {
        assert_eq!(alpha_s.len(), beta_s.len(), "gain vectors differ in length");
        assert!(!alpha_s.is_empty(), "a draw needs at least one transmitter");
        Self {
            alpha_s,
            beta_s,
            alpha_p,
            beta_p,
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            alpha_s: Vec::with_capacity(n),
            beta_s: Vec::with_capacity(n),
            alpha_p: 1.0,
            beta_p: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha_s.is_empty()
    }
}

/// Unit-mean exponential by inversion, `−ln U` with `U` on the open interval.
#[inline]
pub fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln()
}

/// Draws the `2N + 2` independent gains of one slot.
pub fn sample_channels<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelDraw {
    let mut draw = ChannelDraw::with_capacity(params.n());
    sample_channels_into(params.n(), rng, &mut draw);
    draw
}

/// Refills `draw` in place. Sampling order: `α_s[0..N]`, `β_s[0..N]`, `α_p`, `β_p`.
pub fn sample_channels_into<R: Rng + ?Sized>(n: usize, rng: &mut R, draw: &mut ChannelDraw) {
    draw.alpha_s.clear();
    draw.beta_s.clear();
    draw.alpha_s.extend((0..n).map(|_| sample_exp1(rng)));
    draw.beta_s.extend((0..n).map(|_| sample_exp1(rng)));
    draw.alpha_p = sample_exp1(rng);
    draw.beta_p = sample_exp1(rng);
}
