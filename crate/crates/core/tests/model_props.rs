mod common;

use crdiv_core::model::{sample_channels, ParamSet, SystemParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reference() -> SystemParams {
    ParamSet::default().validate().unwrap()
}

#[test]
fn outage_without_interference_matches_sampling() {
    let p = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let n = 1_000_000;
    let (freq, _) = common::mc_mean(&mut rng, n, |r| {
        let alpha_p = common::exp1(r);
        ((1.0 + alpha_p * p.p_p()).log2() < p.rate()) as u8 as f64
    });
    let want = p.outage_no_interference();
    assert!((freq - want).abs() <= 4.0 * common::binomial_se(want, n));
}

#[test]
fn outage_with_interference_matches_sampling() {
    let p = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let n = 1_000_000;
    for &(alpha, ps) in &[(0.3, 4.0), (1.0, p.headroom()), (2.0, 10.0)] {
        let (freq, _) = common::mc_mean(&mut rng, n, |r| {
            let alpha_p = common::exp1(r);
            ((1.0 + alpha_p * p.p_p() / (1.0 + alpha * ps)).log2() < p.rate()) as u8 as f64
        });
        let want = p.outage_with_interference(alpha, ps);
        assert!((freq - want).abs() <= 4.0 * common::binomial_se(want, n), "{alpha} {ps}");
    }
}

#[test]
fn saturation_probability_matches_threshold() {
    let p = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 500_000;
    let (freq, _) = common::mc_mean(&mut rng, n, |r| p.is_saturated(common::exp1(r)) as u8 as f64);
    let want = 1.0 - (-p.headroom() / p.p_s_max()).exp();
    assert!((freq - want).abs() <= 4.0 * common::binomial_se(want, n));
}

#[test]
fn sampler_produces_2n_plus_2_positive_gains() {
    let p = reference().with_n(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    let d = sample_channels(&p, &mut rng);
    assert_eq!(d.alpha_s.len(), 7);
    assert_eq!(d.beta_s.len(), 7);
    assert!(d.alpha_s.iter().chain(&d.beta_s).all(|&g| g > 0.0));
    assert!(d.alpha_p > 0.0 && d.beta_p > 0.0);
}

fn arb_params() -> impl Strategy<Value = SystemParams> {
    (0.0f64..0.95, 0.0f64..1.0, 0.05f64..0.95, 1.0f64..100.0, 0.5f64..50.0, 0.1f64..2.0)
        .prop_filter_map("invalid parameter set", |(p_d, p_f, frac, p_p, p_s_max, rate)| {
            let rp = (rate.exp2() - 1.0) / p_p;
            let lo = p_d * (-rp).exp();
            let hi = (-rp).exp();
            ParamSet {
                p_d,
                p_f,
                lambda: 0.3 * hi,
                mu_min: lo + frac * (hi - lo),
                p_p,
                p_s_max,
                rate,
                n: 1,
            }
            .validate()
            .ok()
        })
}

proptest! {
    #[test]
    fn qos_floor_holds_for_every_gain(p in arb_params(), alpha in 1e-4f64..50.0) {
        let mu = p.departure_rate(alpha, p.transmit_power(alpha));
        prop_assert!(mu >= p.mu_min() - 1e-12);
        if !p.is_saturated(alpha) {
            prop_assert!((mu - p.mu_min()).abs() <= 1e-9);
        }
    }

    #[test]
    fn departure_rate_decreases_with_power(p in arb_params(), alpha in 1e-3f64..10.0, a in 0.0f64..20.0, b in 0.0f64..20.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(p.departure_rate(alpha, lo) >= p.departure_rate(alpha, hi));
        if p.rp() * alpha * (hi - lo) > 1e-6 && p.rp() * (1.0 + alpha * hi) < 30.0 {
            prop_assert!(p.departure_rate(alpha, lo) > p.departure_rate(alpha, hi));
        }
        let mu = p.departure_rate(alpha, hi);
        prop_assert!(mu >= p.p_d() * (-p.rp()).exp() && mu <= (-p.rp()).exp());
    }

    #[test]
    fn transmit_power_non_increasing(p in arb_params(), a in 1e-3f64..10.0, b in 1e-3f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(p.transmit_power(lo) >= p.transmit_power(hi));
        prop_assert!(p.transmit_power(hi) >= 0.0 && p.transmit_power(lo) <= p.p_s_max());
    }

    #[test]
    fn departure_is_the_outage_mixture(p in arb_params(), alpha in 1e-3f64..10.0, ps in 0.0f64..30.0) {
        let composed = p.p_d() * (1.0 - p.outage_no_interference())
            + (1.0 - p.p_d()) * (1.0 - p.outage_with_interference(alpha, ps));
        prop_assert!((p.departure_rate(alpha, ps) - composed).abs() < 1e-14);
    }
}
