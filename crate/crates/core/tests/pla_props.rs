mod common;

use num_complex::Complex64;
use pla_delay::channel::ChannelSampler;
use pla_delay::pla::{
    chernoff_pd, false_alarm_rate, md_l2_bounds, missed_detection_rate, threshold_for_fa, Discriminant,
    ImpersonationParams,
};
use pla_delay::sim::{detection_mc, replication_rng};
use pla_delay::specfun::chi2_cdf;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{reference_deployment, synthetic_pair, three_sigma};

#[test]
fn rates_are_strictly_monotone_in_threshold() {
    for n_rx in [1, 2, 4, 8, 16] {
        let params = ImpersonationParams::new(0.8, 12.0, n_rx).unwrap();
        let (mut fa, mut md) = (2.0, -1.0);
        for i in 0..200 {
            let t = 0.05 + 0.25 * i as f64;
            let f = false_alarm_rate(t, n_rx).unwrap();
            let m = missed_detection_rate(t, &params).unwrap();
            // Both rates saturate at 1 in double precision at the ends of the grid.
            assert!(f < fa || (f == 1.0 && fa == 1.0), "n_rx={n_rx} T={t}: p_fa {f} not below {fa}");
            assert!(m > md || (m == 1.0 && md == 1.0), "n_rx={n_rx} T={t}: p_md {m} not above {md}");
            fa = f;
            md = m;
        }
    }
}

#[test]
fn unit_scale_zero_offset_attacker_is_the_legit_law() {
    for n_rx in [1, 3, 8, 32] {
        let params = ImpersonationParams::new(1.0, 0.0, n_rx).unwrap();
        for t in [0.0, 0.3, 2.0, 9.5, 40.0] {
            let md = missed_detection_rate(t, &params).unwrap();
            let fa = false_alarm_rate(t, n_rx).unwrap();
            assert!((md - (1.0 - fa)).abs() <= 1e-14, "n_rx={n_rx} T={t}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chernoff_dominates_confusion_rate(
        lambda in 0.2f64..5.0,
        nu in 0.0f64..50.0,
        n_idx in 0usize..3,
        seed in any::<u64>(),
    ) {
        let n_rx = [2, 4, 8][n_idx];
        let (legit, eve) = synthetic_pair(lambda, nu, n_rx, 0.0);
        let bound = chernoff_pd(&ImpersonationParams::new(lambda, nu, n_rx).unwrap());
        let n = 200_000;
        let mc = detection_mc(&legit, Some(&eve), 1.0, n, seed).unwrap().p_confuse.unwrap();
        prop_assert!(bound >= mc.estimate - 3.0 * mc.std_error, "bound {} mc {:?}", bound, mc);
    }
}

#[test]
fn two_message_rate_lies_in_the_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..20 {
        let lambda = rng.gen_range(0.2..5.0);
        let nu = rng.gen_range(0.0..30.0);
        let n_rx = [1, 2, 4, 8][rng.gen_range(0..4)];
        let p_fa = 10f64.powf(rng.gen_range(-3.0..-0.5));
        let t = threshold_for_fa(p_fa, n_rx).unwrap();
        let corr = rng.gen_range(0.0..0.7);
        let (legit, eve) = synthetic_pair(lambda, nu, n_rx, corr);
        let b = md_l2_bounds(t, &ImpersonationParams::new(lambda, nu, n_rx).unwrap()).unwrap();
        let n = 400_000;
        let mc = detection_mc(&legit, Some(&eve), t, n, 1000 + i).unwrap().p_md_l2.unwrap();
        assert!(
            mc.estimate >= b.lower - three_sigma(b.lower, n) && mc.estimate <= b.upper + three_sigma(b.upper, n),
            "config {i} (λ={lambda}, ν={nu}, N={n_rx}, T={t}): {} outside [{}, {}]",
            mc.estimate,
            b.lower,
            b.upper
        );
    }
}

/// Kolmogorov–Smirnov statistic of `xs` against `cdf`.
fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn legitimate_discriminant_passes_ks() {
    const N: usize = 20_000;
    // Asymptotic critical value at significance 1e-3.
    let crit = (-(0.5e-3f64).ln() / 2.0).sqrt() / (N as f64).sqrt();
    for n_rx in [1, 4, 8] {
        let dep = reference_deployment(n_rx, 6.0, 0.4);
        let stats = dep.device_stats("D18").unwrap();
        let sampler = ChannelSampler::new(&stats).unwrap();
        let disc = Discriminant::for_device(&stats).unwrap();
        let mut rng = replication_rng(3, n_rx as u64);
        let mut h = vec![Complex64::new(0.0, 0.0); n_rx];
        let mut xs: Vec<f64> = (0..N)
            .map(|_| {
                sampler.sample_into(&mut rng, &mut h);
                disc.eval(&h)
            })
            .collect();
        let d = ks_statistic(&mut xs, |x| chi2_cdf(2 * n_rx as u32, x).unwrap());
        assert!(d < crit, "n_rx={n_rx}: D={d} critical {crit}");
    }
}
