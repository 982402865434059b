//! Secondary user selection rules.
//!
//! [`Scheduler::MaxSnr`] is the actual rule. [`Scheduler::TwoStage`] gives up
//! some SNR to make the selected user's gains independent (a lower bound),
//! and [`Scheduler::Genie`] pairs the best forward gain with the weakest
//! interference gain across users (an upper bound). Ties go to the lowest
//! index.

use std::fmt;
use std::str::FromStr;

use crate::model::{ChannelDraw, SystemParams};

/// Which power-control branch produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Unsaturated,
    Saturated,
    GenieUnsaturated,
    GenieSaturated,
    Silent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleDecision {
    /// Scheduled transmitter. For the genie this is the strongest forward
    /// link, kept for tracing only.
    pub index: Option<usize>,
    pub power: f64,
    pub snr: f64,
    /// Interference gain toward the primary receiver that `power` is applied
    /// to: the scheduled user's `α`, or the smallest `α` for the genie.
    pub interference_gain: f64,
    pub branch: Branch,
}

impl ScheduleDecision {
    pub const SILENT: ScheduleDecision = ScheduleDecision {
        index: None,
        power: 0.0,
        snr: 0.0,
        interference_gain: 0.0,
        branch: Branch::Silent,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheduler {
    /// Largest received SNR (the "exact" curve).
    MaxSnr,
    /// Saturated-set screening, then largest forward gain (the "lower" curve).
    TwoStage,
    /// Genie-aided SNR (the "upper" curve).
    Genie,
    /// No secondary transmission at all.
    Silent,
}

impl Scheduler {
    pub const BOUNDED: [Scheduler; 3] = [Scheduler::MaxSnr, Scheduler::TwoStage, Scheduler::Genie];

    pub fn name(self) -> &'static str {
        match self {
            Scheduler::MaxSnr => "exact",
            Scheduler::TwoStage => "lower",
            Scheduler::Genie => "upper",
            Scheduler::Silent => "silent",
        }
    }

    pub fn decide(self, params: &SystemParams, draw: &ChannelDraw) -> ScheduleDecision {
        match self {
            Scheduler::MaxSnr => schedule_max_snr(params, draw),
            Scheduler::TwoStage => schedule_two_stage(params, draw),
            Scheduler::Genie => genie_upper_snr(params, draw),
            Scheduler::Silent => ScheduleDecision::SILENT,
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheduler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "exact" | "max-snr" => Ok(Scheduler::MaxSnr),
            "lower" | "two-stage" => Ok(Scheduler::TwoStage),
            "upper" | "genie" => Ok(Scheduler::Genie),
            "silent" => Ok(Scheduler::Silent),
            other => Err(format!(
                "unknown scheduler '{other}' (expected exact, lower or upper)"
            )),
        }
    }
}

fn branch_of(params: &SystemParams, alpha: f64) -> Branch {
    if params.is_saturated(alpha) {
        Branch::Saturated
    } else {
        Branch::Unsaturated
    }
}

/// Picks the transmitter with the largest received SNR.
pub fn schedule_max_snr(params: &SystemParams, draw: &ChannelDraw) -> ScheduleDecision {
    assert!(!draw.is_empty(), "cannot schedule among zero transmitters");
    let mut best = 0;
    let mut best_power = params.transmit_power(draw.alpha_s[0]);
    let mut best_snr = best_power * draw.beta_s[0];
    for i in 1..draw.len() {
        let power = params.transmit_power(draw.alpha_s[i]);
        let snr = power * draw.beta_s[i];
        if snr > best_snr {
            best = i;
            best_power = power;
            best_snr = snr;
        }
    }
    let alpha = draw.alpha_s[best];
    ScheduleDecision {
        index: (best_power > 0.0).then_some(best),
        power: best_power,
        snr: best_snr,
        interference_gain: alpha,
        branch: branch_of(params, alpha),
    }
}

/// Two-stage selection: if any transmitter's power cap exceeds `P_s,max`,
/// the one with the strongest forward gain among those transmits at
/// `P_s,max`; otherwise fall back to [`schedule_max_snr`].
pub fn schedule_two_stage(params: &SystemParams, draw: &ChannelDraw) -> ScheduleDecision {
    assert!(!draw.is_empty(), "cannot schedule among zero transmitters");
    let p_max = params.p_s_max();
    let mut chosen: Option<usize> = None;
    for i in 0..draw.len() {
        if params.power_cap(draw.alpha_s[i]) > p_max
            && chosen.is_none_or(|c| draw.beta_s[i] > draw.beta_s[c])
        {
            chosen = Some(i);
        }
    }
    match chosen {
        Some(i) => ScheduleDecision {
            index: Some(i),
            power: p_max,
            snr: p_max * draw.beta_s[i],
            interference_gain: draw.alpha_s[i],
            branch: Branch::Saturated,
        },
        None => schedule_max_snr(params, draw),
    }
}

/// Genie-aided SNR: `K·max β / min α` when every power cap fits under
/// `P_s,max`, else `P_s,max · max β`.
pub fn genie_upper_snr(params: &SystemParams, draw: &ChannelDraw) -> ScheduleDecision {
    assert!(!draw.is_empty(), "cannot schedule among zero transmitters");
    let mut best_beta = 0;
    let mut min_alpha = draw.alpha_s[0];
    for i in 1..draw.len() {
        if draw.beta_s[i] > draw.beta_s[best_beta] {
            best_beta = i;
        }
        min_alpha = min_alpha.min(draw.alpha_s[i]);
    }
    // max_i K/α_i is attained at the smallest α.
    let power = params.transmit_power(min_alpha);
    let branch = if params.power_cap(min_alpha) > params.p_s_max() {
        Branch::GenieSaturated
    } else {
        Branch::GenieUnsaturated
    };
    ScheduleDecision {
        index: (power > 0.0).then_some(best_beta),
        power,
        snr: power * draw.beta_s[best_beta],
        interference_gain: min_alpha,
        branch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParamSet;

    fn reference(n: usize) -> SystemParams {
        ParamSet {
            n,
            ..ParamSet::default()
        }
        .validate()
        .unwrap()
    }

    fn draw(alpha: &[f64], beta: &[f64]) -> ChannelDraw {
        ChannelDraw::new(alpha.to_vec(), beta.to_vec(), 1.0, 1.0)
    }

    #[test]
    fn max_snr_examples() {
        let p = reference(2);
        let d = schedule_max_snr(&p, &draw(&[0.5, 2.0], &[1.0, 1.0]));
        assert_eq!(d.index, Some(0));
        assert!((d.snr - 2.4315).abs() < 1e-3);
        assert_eq!(d.branch, Branch::Unsaturated);

        let d = schedule_max_snr(&p, &draw(&[0.05, 2.0], &[0.5, 1.0]));
        assert_eq!(d.index, Some(0));
        assert_eq!(d.power, 10.0);
        assert_eq!(d.snr, 5.0);
        assert_eq!(d.branch, Branch::Saturated);

        let p1 = reference(1);
        let d = schedule_max_snr(&p1, &draw(&[7.0], &[1e-6]));
        assert_eq!(d.index, Some(0));
    }

    #[test]
    fn max_snr_breaks_ties_low() {
        let p = reference(3);
        let d = schedule_max_snr(&p, &draw(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]));
        assert_eq!(d.index, Some(0));
    }

    #[test]
    fn two_stage_examples() {
        let p = reference(2);
        let d = schedule_two_stage(&p, &draw(&[0.05, 2.0], &[0.5, 1.0]));
        assert_eq!((d.index, d.power, d.snr), (Some(0), 10.0, 5.0));

        let d = schedule_two_stage(&p, &draw(&[0.5, 2.0], &[1.0, 1.0]));
        assert_eq!(d.index, Some(0));
        assert!((d.snr - 2.4315).abs() < 1e-3);
        assert_eq!(d.branch, Branch::Unsaturated);

        let d = schedule_two_stage(&p, &draw(&[0.05, 0.06], &[0.3, 0.9]));
        assert_eq!(d.index, Some(1));
        assert!((d.snr - 9.0).abs() < 1e-12);
        assert_eq!(d.power, 10.0);
    }

    #[test]
    fn genie_examples() {
        let p = reference(2);
        let d = genie_upper_snr(&p, &draw(&[0.5, 2.0], &[1.0, 1.0]));
        assert!((d.snr - 2.4315).abs() < 1e-3);
        assert_eq!(d.branch, Branch::GenieUnsaturated);

        let d = genie_upper_snr(&p, &draw(&[0.05, 2.0], &[0.5, 1.0]));
        assert_eq!(d.snr, 10.0);
        assert_eq!(d.branch, Branch::GenieSaturated);
        assert_eq!(d.index, Some(1));
        assert_eq!(d.interference_gain, 0.05);
    }

    #[test]
    fn genie_matches_max_snr_for_one_user() {
        let p = reference(1);
        for &(a, b) in &[(0.01, 0.3), (0.5, 2.0), (3.0, 0.1)] {
            let d = draw(&[a], &[b]);
            assert!(genie_upper_snr(&p, &d).snr >= schedule_max_snr(&p, &d).snr);
        }
    }

    #[test]
    fn scheduler_names_round_trip() {
        for s in Scheduler::BOUNDED {
            assert_eq!(s.name().parse::<Scheduler>().unwrap(), s);
        }
        assert!("bogus".parse::<Scheduler>().is_err());
        let d = Scheduler::Silent.decide(&reference(1), &draw(&[1.0], &[1.0]));
        assert_eq!(d, ScheduleDecision::SILENT);
    }
}
