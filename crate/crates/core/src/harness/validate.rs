//! Quick self-check suite run by `pmlpos validate`: algebraic invariants,
//! brute-force oracles, recursive/batch replay and the parameter study.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::feasibility::{feasibility, stationarity_time};
use super::scenario::{ScenarioConfig, PRESETS};
use crate::channel::{complex_gaussian, generate_observation, sample_multipath, ChannelParams, Observation};
use crate::error::Result;
use crate::estimators::{
    compressed_score, single_path_residual, GammaRule, GridSpec, GridState, MaxPower, MotionSnapshot, PositionEstimator,
    ProjectorEstimate, PseudoMl, ReplayItem, SinglePath,
};
use crate::geometry::{
    global_to_local, los_bearing, steering, ArrayConfig, GlobalBearing, LocalAoa, MotionHistory, Position, Velocity,
};
use crate::scalar::{cis, dotc, frobenius_sqr, norm_sqr, CMatrix, CVector};
use crate::spectral::{
    fb_covariance, forward_covariance, hermitian_residual, persymmetry_residual, AngularGrid, CaponBeamformer,
    SpectralEstimator,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Runs every check; a check that errors is reported as failed.
pub fn run_validation(seed: u64) -> Vec<CheckResult> {
    type Check = (&'static str, fn(&mut ChaCha8Rng) -> Result<(bool, String)>);
    let checks: [Check; 12] = [
        ("steering_unit_modulus_and_reflection", steering_identities),
        ("local_angle_folding", folding),
        ("fb_covariance_structure", fb_structure),
        ("capon_distortionless", capon_distortionless),
        ("projector_idempotent_hermitian", projector_structure),
        ("compressed_score_vs_brute_force", compressed_vs_brute_force),
        ("single_path_residual_vs_brute_force", single_path_vs_brute_force),
        ("recursive_equals_batch", recursive_equals_batch),
        ("power_delay_profile", pdp_values),
        ("feasibility_snapshots", feasibility_snapshots),
        ("stationarity_times", stationarity_values),
        ("presets_valid", presets_valid),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    checks
        .iter()
        .map(|(name, f)| match f(&mut rng) {
            Ok((ok, detail)) => check(name, ok, detail),
            Err(e) => check(name, false, format!("error: {e}")),
        })
        .collect()
}

fn array(m: usize, p: usize) -> Result<ArrayConfig<f64>> {
    ArrayConfig::new(m, p, 5.9e9)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, 1.0))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector<f64> {
    CVector::from_fn(n, |_, _| complex_gaussian(rng, 1.0))
}

fn random_observation(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Result<Observation<f64>> {
    let symbols = CVector::from_fn(n, |_, _| cis(rng.random_range(0.0..std::f64::consts::TAU)));
    Observation::new(random_matrix(rng, m, n), symbols, 0.0, 0)
}

fn steering_identities(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let cfg = array(16, 8)?;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let th = LocalAoa::from_sine(rng.random_range(-1.0..1.0));
        let a = steering(th, 16, &cfg);
        for x in a.iter() {
            worst = worst.max((x.norm() - 1.0).abs());
        }
        let phase = cis(-15.0 * cfg.phase_per_sine() * th.sine());
        for k in 0..16 {
            worst = worst.max((a[15 - k].conj() - phase * a[k]).norm());
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
}

fn folding(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let b = GlobalBearing::new(rng.random_range(0.0..std::f64::consts::TAU));
        let h = GlobalBearing::new(rng.random_range(0.0..std::f64::consts::TAU));
        let l = global_to_local(b, h);
        worst = worst.max((l.sine() - (b.radians() - h.radians()).sin()).abs());
        let again = global_to_local(GlobalBearing::new(l.radians()), GlobalBearing::new(0.0));
        worst = worst.max((again.radians() - l.radians()).abs());
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
}

fn fb_structure(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let y = random_matrix(rng, 12, 20);
    let fb = fb_covariance(&forward_covariance(&y, 8)?);
    let (h, p) = (hermitian_residual(fb.matrix()), persymmetry_residual(fb.matrix()));
    Ok((h < 1e-12 && p < 1e-12, format!("hermitian {h:.2e}, persymmetry {p:.2e}")))
}

fn capon_distortionless(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let cfg = array(12, 8)?;
    let y = random_matrix(rng, 12, 20);
    let fb = fb_covariance(&forward_covariance(&y, 8)?);
    let bf = CaponBeamformer::new(&fb, 1e-6)?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let th = LocalAoa::from_sine(rng.random_range(-0.99..0.99));
        let w = bf.weights(th, &cfg)?;
        worst = worst.max((dotc(&w, &steering(th, 8, &cfg)) - Complex::new(1.0, 0.0)).norm());
    }
    Ok((worst < 1e-8, format!("max |w^H a - 1| = {worst:.2e}")))
}

fn projector_structure(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst_idem: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    for _ in 0..100 {
        let p = ProjectorEstimate::from_vector(&random_vector(rng, 16))?.matrix();
        worst_idem = worst_idem.max(frobenius_sqr(&(&p * &p - &p)).sqrt());
        worst_herm = worst_herm.max(frobenius_sqr(&(&p - p.adjoint())).sqrt());
    }
    Ok((
        worst_idem < 1e-8 && worst_herm < 1e-10,
        format!("idempotence {worst_idem:.2e}, hermitian {worst_herm:.2e}"),
    ))
}

/// `min_γ Σ_n ‖y_n − γ·x·c_n‖²` by successive grid refinement.
fn brute_force_residual(obs: &Observation<f64>, x: &CVector<f64>) -> f64 {
    let cost = |g: Complex<f64>| {
        (0..obs.snapshots())
            .map(|n| norm_sqr(&(obs.samples.column(n).into_owned() - x * (g * obs.symbols[n]))))
            .sum::<f64>()
    };
    let scale = (obs.sample_energy() / (norm_sqr(x) * obs.symbol_energy())).sqrt();
    let (mut center, mut half) = (Complex::new(0.0, 0.0), 2.0 * scale);
    let mut best = cost(center);
    for _ in 0..12 {
        let steps = 40;
        let mut best_g = center;
        for i in 0..=steps {
            for j in 0..=steps {
                let g = center
                    + Complex::new(
                        -half + 2.0 * half * i as f64 / steps as f64,
                        -half + 2.0 * half * j as f64 / steps as f64,
                    );
                let c = cost(g);
                if c < best {
                    best = c;
                    best_g = g;
                }
            }
        }
        center = best_g;
        half /= 8.0;
    }
    best
}

fn compressed_vs_brute_force(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let obs = random_observation(rng, 8, 6)?;
        let x = random_vector(rng, 8);
        let score = compressed_score(&ProjectorEstimate::from_vector(&x)?, &obs.matched_sum(), obs.symbol_energy())?;
        let profiled = obs.sample_energy() - brute_force_residual(&obs, &x);
        worst = worst.max((score - profiled).abs() / score.abs().max(1e-300));
    }
    Ok((worst < 1e-4, format!("max relative difference {worst:.2e}")))
}

fn single_path_vs_brute_force(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let cfg = array(8, 6)?;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let obs = random_observation(rng, 8, 6)?;
        let th = LocalAoa::from_sine(rng.random_range(-0.95..0.95));
        let (_, r) = single_path_residual(&obs, th, &cfg, GammaRule::LeastSquares);
        let brute = brute_force_residual(&obs, &steering(th, 8, &cfg));
        worst = worst.max((r - brute).abs() / brute);
    }
    Ok((worst < 1e-4, format!("max relative difference {worst:.2e}")))
}

/// Synthetic replay shared with the recursive/batch comparison.
pub fn replay_fixture(seed: u64, steps: usize) -> Result<(ArrayConfig<f64>, Vec<Position<f64>>, Vec<ReplayItem<f64>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = array(10, 7)?;
    let channel = ChannelParams::vehicular_defaults(37.5e3);
    let bs = [Position::new(40.0, 5.0), Position::new(10.0, 25.0)];
    let grid = GridSpec {
        center: Position::new(0.0, 0.0),
        half_width: 3.0,
        spacing: 1.5,
    }
    .points()?;
    let p0 = Position::new(0.5, -0.5);
    let v = Velocity::new(10.0, 1.0);
    let mut hist = MotionHistory::new(0.0, v);
    let mut items = Vec::with_capacity(steps);
    for k in 1..=steps {
        let t = k as f64 * 0.1;
        let noisy = Velocity::new(v.vx * (1.0 + 0.1 * rng.random_range(-1.0..1.0)), v.vy);
        hist.push(t, noisy)?;
        let b = bs[k % 2];
        let truth = p0.offset(v.vx * t, v.vy * t);
        let real = sample_multipath(&mut rng, &channel, 3, b.distance(&truth), los_bearing(b, truth)?, false)?;
        let heading = GlobalBearing::new(v.vy.atan2(v.vx));
        let obs = generate_observation(&mut rng, &real, heading, &cfg, 8, channel.noise_power * 1e3, t, k % 2)?;
        items.push(ReplayItem {
            observation: obs,
            motion: MotionSnapshot::from(&hist),
            bs: b,
        });
    }
    Ok((cfg, grid, items))
}

fn recursive_equals_batch(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let (cfg, grid, items) = replay_fixture(rng.random(), 12)?;
    let spectral = SpectralEstimator::new(cfg, AngularGrid::uniform_in_sine(512)?, 4)?;
    let same = |a: &GridState<f64>, b: &GridState<f64>| a.scores() == b.scores() && a.misses() == b.misses();

    let mut pml = PseudoMl::new(grid.clone(), spectral.clone(), 2f64.to_radians())?;
    let mut mp = MaxPower::new(grid.clone(), spectral)?;
    let mut sp = SinglePath::new(grid, cfg, GammaRule::LeastSquares)?;
    for it in &items {
        pml.step_snapshot(&it.observation, &it.motion, it.bs)?;
        mp.step_snapshot(&it.observation, &it.motion, it.bs)?;
        sp.step_snapshot(&it.observation, &it.motion, it.bs)?;
    }
    let ok = [
        same(pml.state(), &pml.evaluate_batch(&items)?),
        same(mp.state(), &mp.evaluate_batch(&items)?),
        same(sp.state(), &sp.evaluate_batch(&items)?),
    ];
    Ok((ok.iter().all(|&b| b), format!("pseudo_ml {}, max_power {}, single_path {}", ok[0], ok[1], ok[2])))
}

fn pdp_values(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let ch = ChannelParams::<f64>::vehicular_defaults(37.5e3);
    let (p0, p1) = (ch.power_delay_profile(0.0), ch.power_delay_profile(ch.rms_delay_spread));
    let ok = (p0 - 1.0).abs() < 1e-15 && (p1 - (-1.0f64).exp()).abs() < 1e-15;
    Ok((ok, format!("P(0) = {p0}, P(sigma) = {p1:.6}")))
}

fn feasibility_snapshots(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let ch = ChannelParams::<f64>::vehicular_defaults(37.5e3);
    let ns = [0.0, 0.5, 1.0]
        .iter()
        .map(|&a| feasibility(&ch, a, 325e-6).map(|r| r.snapshots))
        .collect::<Result<Vec<_>>>()?;
    Ok((ns.iter().all(|&n| n == 16), format!("N for alpha 0, 0.5, 1: {ns:?}")))
}

fn stationarity_values(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let cfg = array(64, 32)?;
    let v = 50.0 / 3.6;
    let far = stationarity_time(100.0, v, 0.01, &cfg)?.seconds;
    let near = stationarity_time(20.0, v, 0.01, &cfg)?.seconds;
    let ok = (far / 0.122 - 1.0).abs() <= 0.15 && (near / 0.006 - 1.0).abs() <= 0.25;
    Ok((ok, format!("100 m: {:.1} ms, 20 m: {:.1} ms", far * 1e3, near * 1e3)))
}

fn presets_valid(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for (name, _) in PRESETS {
        ScenarioConfig::preset(name)?;
    }
    Ok((true, format!("{} presets", PRESETS.len())))
}
