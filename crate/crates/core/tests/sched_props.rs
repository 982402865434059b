mod common;

use crdiv_core::model::{sample_channels, ChannelDraw, ParamSet, SystemParams};
use crdiv_core::sched::{genie_upper_snr, schedule_max_snr, schedule_two_stage, Branch};
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reference(n: usize) -> SystemParams {
    ParamSet { n, ..ParamSet::default() }.validate().unwrap()
}

fn arb_draw() -> impl Strategy<Value = ChannelDraw> {
    (1usize..12).prop_flat_map(|n| {
        (vec(1e-3f64..8.0, n), vec(1e-3f64..8.0, n), 1e-3f64..5.0, 1e-3f64..5.0)
            .prop_map(|(a, b, ap, bp)| ChannelDraw::new(a, b, ap, bp))
    })
}

#[test]
fn saturated_set_size_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let trials = 100_000;
    for n in [1usize, 3, 10] {
        let p = reference(n);
        let q = (-p.headroom() / p.p_s_max()).exp();
        let mut empty = 0u64;
        let mut full = 0u64;
        for _ in 0..trials {
            let d = sample_channels(&p, &mut rng);
            let members = d.alpha_s.iter().filter(|&&a| p.power_cap(a) > p.p_s_max()).count();
            let two = schedule_two_stage(&p, &d);
            assert_eq!(members > 0, two.branch == Branch::Saturated);
            empty += (members == 0) as u64;
            full += (members == n) as u64;
        }
        let want_empty = q.powi(n as i32);
        let want_full = (1.0 - q).powi(n as i32);
        let f_empty = empty as f64 / trials as f64;
        let f_full = full as f64 / trials as f64;
        assert!((f_empty - want_empty).abs() <= 4.0 * common::binomial_se(want_empty, trials), "N = {n}");
        assert!((f_full - want_full).abs() <= 4.0 * common::binomial_se(want_full, trials), "N = {n}");
    }
}

proptest! {
    #[test]
    fn snr_ordering_two_stage_max_genie(d in arb_draw()) {
        let p = reference(d.len());
        let lower = schedule_two_stage(&p, &d).snr;
        let exact = schedule_max_snr(&p, &d).snr;
        let upper = genie_upper_snr(&p, &d).snr;
        prop_assert!(lower <= exact && exact <= upper, "{lower} {exact} {upper}");
    }

    #[test]
    fn common_forward_scaling_keeps_choice(d in arb_draw(), c in 0.01f64..100.0) {
        let p = reference(d.len());
        let scaled = ChannelDraw::new(
            d.alpha_s.clone(),
            d.beta_s.iter().map(|b| b * c).collect(),
            d.alpha_p,
            d.beta_p,
        );
        let snrs: Vec<f64> = (0..d.len()).map(|i| p.received_snr(d.alpha_s[i], d.beta_s[i])).collect();
        let best = schedule_max_snr(&p, &d);
        let near_tie = snrs.iter().enumerate()
            .any(|(i, &s)| Some(i) != best.index && (best.snr - s).abs() <= 1e-12 * best.snr);
        prop_assume!(!near_tie);
        prop_assert_eq!(schedule_max_snr(&p, &scaled).index, best.index);
    }

    #[test]
    fn branch_bookkeeping(d in arb_draw()) {
        let p = reference(d.len());
        let two = schedule_two_stage(&p, &d);
        let any_saturated = d.alpha_s.iter().any(|&a| p.power_cap(a) > p.p_s_max());
        prop_assert_eq!(two.power == p.p_s_max() && two.branch == Branch::Saturated, any_saturated);

        let best = schedule_max_snr(&p, &d);
        let i = best.index.unwrap();
        prop_assert_eq!(best.power, p.transmit_power(d.alpha_s[i]));
        prop_assert_eq!(best.interference_gain, d.alpha_s[i]);
        prop_assert!(best.power >= 0.0 && best.power <= p.p_s_max());

        let genie = genie_upper_snr(&p, &d);
        let min_alpha = d.alpha_s.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(genie.interference_gain, min_alpha);
    }
}
