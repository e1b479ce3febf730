mod common;

use common::*;
use num_complex::Complex;
use pmlpos::channel::{generate_observation, sample_multipath, ChannelParams, MultipathRealization};
use pmlpos::geometry::{ArrayConfig, GlobalBearing};

fn cfg(m: usize) -> ArrayConfig<f64> {
    ArrayConfig::new(m, m / 2, 5.9e9).unwrap()
}

#[test]
fn noise_is_white_across_antennas_and_snapshots() {
    let m = 4;
    let sigma2 = 2.5;
    let silent = MultipathRealization {
        los_aoa: GlobalBearing::new(0.3),
        los_blocked: false,
        gamma: Complex::new(0.0, 0.0),
        paths: vec![],
    };
    let mut r = rng(21);
    let mut cov = vec![vec![C::new(0.0, 0.0); m]; m];
    let mut lag = C::new(0.0, 0.0);
    let mut k = 0usize;
    for _ in 0..100 {
        let obs = generate_observation(&mut r, &silent, GlobalBearing::new(0.0), &cfg(m), 1000, sigma2, 0.0, 0).unwrap();
        for n in 0..obs.snapshots() {
            for i in 0..m {
                for j in 0..m {
                    cov[i][j] += obs.samples[(i, n)] * obs.samples[(j, n)].conj();
                }
            }
            if n > 0 {
                lag += obs.samples[(0, n)] * obs.samples[(0, n - 1)].conj();
            }
        }
        k += obs.snapshots();
    }
    let kf = k as f64;
    let se_diag = sigma2 / kf.sqrt();
    let se_part = sigma2 / (2.0 * kf).sqrt();
    for i in 0..m {
        for j in 0..m {
            let v = cov[i][j] / kf;
            if i == j {
                assert!((v.re - sigma2).abs() < 3.0 * se_diag, "diag {i}: {v}");
            } else {
                assert!(v.re.abs() < 3.0 * se_part && v.im.abs() < 3.0 * se_part, "({i},{j}): {v}");
            }
        }
    }
    let v = lag / kf;
    assert!(v.re.abs() < 3.0 * se_part && v.im.abs() < 3.0 * se_part, "lag-1: {v}");
}

#[test]
fn snapshot_energy_is_signal_plus_noise() {
    let m = 8;
    let ch = ChannelParams::<f64>::vehicular_defaults(37.5e3);
    let mut r = rng(22);
    let real = sample_multipath(&mut r, &ch, 12, 1.0, GlobalBearing::new(1.1), false).unwrap();
    let heading = GlobalBearing::new(0.4);
    let mut x = vec![C::new(0.0, 0.0); m];
    let mut add = |bearing: f64, amp: C| {
        let u = (bearing - heading.radians()).sin();
        for (xi, a) in x.iter_mut().zip(steering_oracle(u, m)) {
            *xi += amp * a;
        }
    };
    add(real.los_aoa.radians(), C::new(1.0, 0.0));
    for p in &real.paths {
        add(p.aoa.radians(), p.beta);
    }
    let signal: f64 = x.iter().map(|z| (real.gamma * z).norm_sqr()).sum();
    let sigma2 = signal / m as f64;
    let mut total = 0.0;
    let mut count = 0;
    for _ in 0..100 {
        let obs = generate_observation(&mut r, &real, heading, &cfg(m), 1000, sigma2, 0.0, 0).unwrap();
        total += obs.sample_energy();
        count += obs.snapshots();
    }
    let expected = signal + m as f64 * sigma2;
    let mean = total / count as f64;
    assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
}

#[test]
fn blocked_link_does_not_depend_on_los_direction() {
    let ch = ChannelParams::<f64>::vehicular_defaults(37.5e3);
    let obs_for = |los: f64| {
        let mut r = rng(23);
        let real = sample_multipath(&mut r, &ch, 10, 30.0, GlobalBearing::new(los), true).unwrap();
        generate_observation(&mut r, &real, GlobalBearing::new(0.2), &cfg(12), 16, ch.noise_power, 0.0, 0).unwrap()
    };
    assert_eq!(obs_for(0.1).samples, obs_for(2.9).samples);
}
