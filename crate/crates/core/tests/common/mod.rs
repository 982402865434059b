//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls into `crdiv_core`: bisection for Lambert W, adaptive
//! Gauss–Kronrod quadrature for the integrals, and plain Monte Carlo helpers.

#![allow(dead_code)]

use rand::distr::Open01;
use rand::Rng;

/// Solves `w·e^w = x` on the principal branch by bisection down to adjacent
/// floating-point values.
pub fn lambert_bisection(x: f64) -> f64 {
    let f = |w: f64| w * w.exp() - x;
    let mut lo = -1.0f64;
    let mut hi = if x > std::f64::consts::E { x.ln() } else { 1.0 };
    assert!(f(hi) >= 0.0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs: f64, rel: f64, depth: u32) -> f64 {
    let (k, err) = gk15(f, a, b);
    if err <= abs.max(rel * k.abs()) || depth == 0 {
        return k;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * abs, rel, depth - 1) + adapt(f, m, b, 0.5 * abs, rel, depth - 1)
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs: f64, rel: f64) -> f64 {
    adapt(&f, a, b, abs, rel, 60)
}

/// `∫_0^∞ f`, via `t = u/(1 − u)`.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, abs: f64, rel: f64) -> f64 {
    integrate(
        |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - u;
            f(u / one_minus) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        abs,
        rel,
    )
}

/// `e^x·E1(x) = ∫_0^1 exp(−x(1/s − 1))/s ds`.
pub fn scaled_e1_quadrature(x: f64) -> f64 {
    integrate(
        |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                (-x * (1.0 / s - 1.0)).exp() / s
            }
        },
        0.0,
        1.0,
        1e-300,
        1e-13,
    )
}

pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln()
}

/// Mean and standard error of `f` over `n` samples.
pub fn mc_mean<R: Rng + ?Sized>(rng: &mut R, n: u64, mut f: impl FnMut(&mut R) -> f64) -> (f64, f64) {
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let v = f(rng);
        sum += v;
        sq += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Standard error of a Bernoulli frequency.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
