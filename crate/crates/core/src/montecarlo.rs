//! Slot-level Monte Carlo simulation of the primary/secondary system.
//!
//! Each trial is one slot: fresh block-fading gains, the primary's occupancy,
//! a sensing verdict, the scheduler's decision and the resulting secondary
//! rate and primary success. Every trial consumes the same random variates
//! in the same order, whatever the scheduler, so estimates for different
//! schedulers under one seed share their channel realizations:
//!
//! `α_s[0..N]`, `β_s[0..N]`, `α_p`, `β_p`, `u_occupancy`, `u_sensing`.
//!
//! Independent trials get their own ChaCha stream keyed by
//! `(seed, trial_index)` and are reduced in fixed-size blocks in index
//! order, so results do not depend on the rayon thread count.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{sample_channels_into, ChannelDraw, SystemParams};
use crate::sched::{ScheduleDecision, Scheduler};

const BLOCK_TRIALS: u64 = 4096;
const QUEUE_BATCH: u64 = 1000;

/// How the primary transmitter's busy/idle state is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OccupancyMode {
    /// Independent slots, busy with probability `min(1, λ/μ̄)`.
    Analytic { mu_bar: f64 },
    /// An explicit queue with Bernoulli(λ) arrivals; the head-of-line packet
    /// leaves whenever the primary transmission succeeds.
    Queue,
}

impl OccupancyMode {
    /// Busy probability for analytic mode; `None` for the queue.
    pub fn busy_probability(&self, lambda: f64) -> Option<f64> {
        match *self {
            OccupancyMode::Analytic { mu_bar } => Some(if mu_bar > 0.0 {
                (lambda / mu_bar).clamp(0.0, 1.0)
            } else {
                1.0
            }),
            OccupancyMode::Queue => None,
        }
    }
}

/// Primary traffic state carried from slot to slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryTraffic {
    lambda: f64,
    busy_probability: Option<f64>,
    backlog: u64,
}

impl PrimaryTraffic {
    pub fn new(params: &SystemParams, mode: OccupancyMode) -> Self {
        Self {
            lambda: params.lambda(),
            busy_probability: mode.busy_probability(params.lambda()),
            backlog: 0,
        }
    }

    pub fn backlog(&self) -> u64 {
        self.backlog
    }

    fn is_busy(&self, u: f64) -> bool {
        match self.busy_probability {
            Some(p) => u < p,
            None => self.backlog > 0,
        }
    }

    // Departure during the slot, arrival at its end.
    fn advance(&mut self, outcome: &SlotOutcome, u: f64) {
        if self.busy_probability.is_some() {
            return;
        }
        if outcome.primary_success == Some(true) {
            self.backlog -= 1;
        }
        if u < self.lambda {
            self.backlog += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub primary_busy: bool,
    pub sensing_says_busy: bool,
    /// The scheduler's choice when the secondary network transmits.
    pub decision: Option<ScheduleDecision>,
    pub secondary_rate: f64,
    /// Defined only for busy slots.
    pub primary_success: Option<bool>,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl CapacityEstimate {
    /// Half width of the normal-approximation 95% confidence interval.
    pub fn ci95_half_width(&self) -> f64 {
        1.96 * self.std_error
    }

    /// `mean − other.mean` in units of the pooled standard error.
    pub fn z_score_against(&self, other: &CapacityEstimate) -> f64 {
        let pooled = self.std_error.hypot(other.std_error);
        let diff = self.mean - other.mean;
        if pooled > 0.0 {
            diff / pooled
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Capacity split into busy-slot (missed detection) and idle-slot
/// contributions; per trial, `total = busy + idle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBreakdown {
    pub total: CapacityEstimate,
    pub busy: CapacityEstimate,
    pub idle: CapacityEstimate,
}

/// Long-run behaviour of the explicit primary queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueReport {
    pub slots: u64,
    pub busy_fraction: f64,
    /// Success rate over busy slots; `None` if the queue never held a packet.
    pub empirical_mu: Option<f64>,
    pub empirical_mu_se: f64,
    /// `λ ≥ μ̂`: the queue is not stable and the busy fraction tends to 1.
    pub saturated: bool,
    pub final_backlog: u64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let wa = self.n as f64 / n as f64;
        let wb = other.n as f64 / n as f64;
        self.mean = wa * self.mean + wb * other.mean;
        self.m2 += other.m2 + delta * delta * wa * other.n as f64;
        self.n = n;
    }

    fn estimate(&self) -> CapacityEstimate {
        let std_error = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        CapacityEstimate {
            mean: self.mean,
            std_error,
            trials: self.n,
        }
    }
}

/// Deterministic per-trial generator.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws a full slot (channels plus the two uniforms).
fn sample_slot<R: Rng + ?Sized>(n: usize, rng: &mut R, draw: &mut ChannelDraw) -> (f64, f64) {
    sample_channels_into(n, rng, draw);
    let u_occupancy: f64 = rng.sample(Open01);
    let u_sensing: f64 = rng.sample(Open01);
    (u_occupancy, u_sensing)
}

/// Resolves one slot once the draw, the decision and the occupancy are known.
pub fn resolve_slot(
    params: &SystemParams,
    draw: &ChannelDraw,
    decision: &ScheduleDecision,
    primary_busy: bool,
    u_sensing: f64,
) -> SlotOutcome {
    let sensing_says_busy = if primary_busy {
        u_sensing < params.p_d()
    } else {
        u_sensing < params.p_f()
    };
    let transmits = !sensing_says_busy && decision.index.is_some();
    let snr = if transmits { decision.snr } else { 0.0 };

    if primary_busy {
        let interference = if transmits {
            decision.interference_gain * decision.power
        } else {
            0.0
        };
        let sinr_primary = draw.alpha_p * params.p_p() / (1.0 + interference);
        let threshold = params.rate().exp2() - 1.0;
        SlotOutcome {
            primary_busy,
            sensing_says_busy,
            decision: transmits.then_some(*decision),
            secondary_rate: (snr / (1.0 + draw.beta_p * params.p_p())).ln_1p() / std::f64::consts::LN_2,
            primary_success: Some(sinr_primary >= threshold),
        }
    } else {
        SlotOutcome {
            primary_busy,
            sensing_says_busy,
            decision: transmits.then_some(*decision),
            secondary_rate: snr.ln_1p() / std::f64::consts::LN_2,
            primary_success: None,
        }
    }
}

/// Simulates one slot, advancing the primary traffic state.
pub fn simulate_slot<R: Rng + ?Sized>(
    params: &SystemParams,
    scheduler: Scheduler,
    traffic: &mut PrimaryTraffic,
    rng: &mut R,
) -> SlotOutcome {
    let mut draw = ChannelDraw::with_capacity(params.n());
    simulate_slot_with(params, scheduler, traffic, rng, &mut draw)
}

fn simulate_slot_with<R: Rng + ?Sized>(
    params: &SystemParams,
    scheduler: Scheduler,
    traffic: &mut PrimaryTraffic,
    rng: &mut R,
    draw: &mut ChannelDraw,
) -> SlotOutcome {
    let (u_occupancy, u_sensing) = sample_slot(params.n(), rng, draw);
    let decision = scheduler.decide(params, draw);
    let busy = traffic.is_busy(u_occupancy);
    let outcome = resolve_slot(params, draw, &decision, busy, u_sensing);
    traffic.advance(&outcome, u_occupancy);
    outcome
}

/// Runs `trials` independent trials in parallel. `body` gets the trial's
/// generator, a scratch draw and the block's accumulators.
fn run_trials<F>(trials: u64, seed: u64, slots: usize, body: F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut ChannelDraw, &mut [Moments]) + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partials: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Moments::default(); slots];
            let mut draw = ChannelDraw::with_capacity(0);
            let start = b * BLOCK_TRIALS;
            let end = (start + BLOCK_TRIALS).min(trials);
            for t in start..end {
                let mut rng = trial_rng(seed, t);
                body(&mut rng, &mut draw, &mut acc);
            }
            acc
        })
        .collect();

    let mut total = vec![Moments::default(); slots];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

/// Capacity estimates for several schedulers in analytic occupancy mode over
/// one shared set of trials. Each entry pairs a scheduler with its `μ̄`.
pub fn estimate_capacities_analytic(
    params: &SystemParams,
    requests: &[(Scheduler, f64)],
    trials: u64,
    seed: u64,
) -> Vec<CapacityBreakdown> {
    assert!(trials >= 1, "at least one trial is required");
    let n = params.n();
    let busy_probs: Vec<f64> = requests
        .iter()
        .map(|&(_, mu_bar)| {
            OccupancyMode::Analytic { mu_bar }
                .busy_probability(params.lambda())
                .unwrap_or(1.0)
        })
        .collect();

    let acc = run_trials(trials, seed, 3 * requests.len(), |rng, draw, acc| {
        let (u_occupancy, u_sensing) = sample_slot(n, rng, draw);
        for (r, &(scheduler, _)) in requests.iter().enumerate() {
            let decision = scheduler.decide(params, draw);
            let busy = u_occupancy < busy_probs[r];
            let out = resolve_slot(params, draw, &decision, busy, u_sensing);
            let rate = out.secondary_rate;
            let (b, i) = if busy { (rate, 0.0) } else { (0.0, rate) };
            acc[3 * r].push(rate);
            acc[3 * r + 1].push(b);
            acc[3 * r + 2].push(i);
        }
    });

    acc.chunks(3)
        .map(|c| CapacityBreakdown {
            total: c[0].estimate(),
            busy: c[1].estimate(),
            idle: c[2].estimate(),
        })
        .collect()
}

/// Average secondary capacity (bits/s/Hz) for one scheduler.
///
/// Deterministic in `(params, scheduler, occupancy, trials, seed)`. Queue
/// mode is inherently sequential; its standard error uses batch means.
pub fn estimate_capacity(
    params: &SystemParams,
    scheduler: Scheduler,
    occupancy: OccupancyMode,
    trials: u64,
    seed: u64,
) -> CapacityEstimate {
    estimate_capacity_breakdown(params, scheduler, occupancy, trials, seed).total
}

pub fn estimate_capacity_breakdown(
    params: &SystemParams,
    scheduler: Scheduler,
    occupancy: OccupancyMode,
    trials: u64,
    seed: u64,
) -> CapacityBreakdown {
    match occupancy {
        OccupancyMode::Analytic { mu_bar } => {
            estimate_capacities_analytic(params, &[(scheduler, mu_bar)], trials, seed)[0]
        }
        OccupancyMode::Queue => run_queue(params, scheduler, trials, seed).1,
    }
}

/// Primary departure rate (packets/slot): the fraction of busy slots in
/// which the primary packet gets through, for each scheduler over one shared
/// set of trials. Every trial is a busy slot.
pub fn estimate_departure_rates(
    params: &SystemParams,
    schedulers: &[Scheduler],
    trials: u64,
    seed: u64,
) -> Vec<CapacityEstimate> {
    assert!(trials >= 1, "at least one trial is required");
    let n = params.n();
    let acc = run_trials(trials, seed, schedulers.len(), |rng, draw, acc| {
        let (_, u_sensing) = sample_slot(n, rng, draw);
        for (s, &scheduler) in schedulers.iter().enumerate() {
            let decision = scheduler.decide(params, draw);
            let out = resolve_slot(params, draw, &decision, true, u_sensing);
            acc[s].push(if out.primary_success == Some(true) { 1.0 } else { 0.0 });
        }
    });
    acc.iter().map(Moments::estimate).collect()
}

pub fn estimate_departure_rate(
    params: &SystemParams,
    scheduler: Scheduler,
    trials: u64,
    seed: u64,
) -> CapacityEstimate {
    estimate_departure_rates(params, &[scheduler], trials, seed)[0]
}

/// Runs the explicit primary queue for `slots` slots from an empty queue.
pub fn simulate_queue(
    params: &SystemParams,
    scheduler: Scheduler,
    slots: u64,
    seed: u64,
) -> QueueReport {
    run_queue(params, scheduler, slots, seed).0
}

/// [`simulate_queue`] together with the capacity measured along the same
/// queue trajectory. Equivalent to pairing it with a queue-mode
/// [`estimate_capacity_breakdown`] under the same seed, at half the cost.
pub fn simulate_queue_with_capacity(
    params: &SystemParams,
    scheduler: Scheduler,
    slots: u64,
    seed: u64,
) -> (QueueReport, CapacityBreakdown) {
    run_queue(params, scheduler, slots, seed)
}

fn run_queue(
    params: &SystemParams,
    scheduler: Scheduler,
    slots: u64,
    seed: u64,
) -> (QueueReport, CapacityBreakdown) {
    assert!(slots >= 1, "at least one slot is required");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traffic = PrimaryTraffic::new(params, OccupancyMode::Queue);
    let mut draw = ChannelDraw::with_capacity(params.n());

    let (mut busy_slots, mut successes) = (0u64, 0u64);
    // Slot-level and batch-level moments for total/busy/idle rates.
    let mut slot_acc = [Moments::default(); 3];
    let mut batch_acc = [Moments::default(); 3];
    let mut batch_sum = [0.0f64; 3];
    let mut in_batch = 0u64;

    for _ in 0..slots {
        let out = simulate_slot_with(params, scheduler, &mut traffic, &mut rng, &mut draw);
        if out.primary_busy {
            busy_slots += 1;
            successes += (out.primary_success == Some(true)) as u64;
        }
        let rate = out.secondary_rate;
        let parts = if out.primary_busy {
            [rate, rate, 0.0]
        } else {
            [rate, 0.0, rate]
        };
        for k in 0..3 {
            slot_acc[k].push(parts[k]);
            batch_sum[k] += parts[k];
        }
        in_batch += 1;
        if in_batch == QUEUE_BATCH {
            for k in 0..3 {
                batch_acc[k].push(batch_sum[k] / QUEUE_BATCH as f64);
                batch_sum[k] = 0.0;
            }
            in_batch = 0;
        }
    }

    // Batch means need enough batches to say anything; otherwise fall back to
    // the i.i.d. formula.
    let estimate = |k: usize| {
        let mut e = slot_acc[k].estimate();
        if batch_acc[k].n >= 20 {
            let b = batch_acc[k].estimate();
            e.std_error = b.std_error.max(e.std_error);
        }
        e
    };
    let breakdown = CapacityBreakdown {
        total: estimate(0),
        busy: estimate(1),
        idle: estimate(2),
    };

    let empirical_mu = (busy_slots > 0).then(|| successes as f64 / busy_slots as f64);
    let empirical_mu_se = match empirical_mu {
        Some(mu) if busy_slots > 1 => (mu * (1.0 - mu) / busy_slots as f64).sqrt(),
        _ => 0.0,
    };
    let report = QueueReport {
        slots,
        busy_fraction: busy_slots as f64 / slots as f64,
        empirical_mu,
        empirical_mu_se,
        saturated: empirical_mu.is_some_and(|mu| params.lambda() >= mu),
        final_backlog: traffic.backlog(),
    };
    (report, breakdown)
}
