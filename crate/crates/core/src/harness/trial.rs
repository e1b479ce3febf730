//! One simulated run: mobility, channel synthesis and all estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mobility::{integrate_truth, mobility_profile, MotionSample, TruthState};
use super::scenario::ScenarioConfig;
use crate::channel::{generate_observation, sample_multipath, ChannelParams, MultipathRealization, Observation};
use crate::error::{Error, Result};
use crate::estimators::{
    EstimatorKind, MaxPower, PositionEstimator, PseudoMl, SinglePath, SpectralDiagnostics,
};
use crate::geometry::{
    heading_from_velocity, los_bearing, ArrayConfig, GlobalBearing, MotionHistory, Position, Velocity,
};
use crate::scalar::Real;
use crate::spectral::{AngularGrid, SpectralEstimator};

/// Scenario with its deterministic ground truth resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    /// Index 0 is the start time, index `e` the `e`-th broadcast.
    truth: Vec<TruthState>,
    grid: Vec<Position<f64>>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let times: Vec<f64> = std::iter::once(0.0)
            .chain((1..=config.event_count()).map(|e| config.event(e).0))
            .collect();
        let truth = integrate_truth(&config.mobility, config.p0(), config.duration_s, &times)?;
        let grid = config.grid_spec().points()?;
        Ok(Self { config, truth, grid })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn truth(&self) -> &[TruthState] {
        &self.truth
    }

    pub fn grid(&self) -> &[Position<f64>] {
        &self.grid
    }

    /// Broadcast instants `t_1, …, t_K`.
    pub fn event_times(&self) -> Vec<f64> {
        self.truth[1..].iter().map(|s| s.time).collect()
    }
}

/// Error of one estimator at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub time: f64,
    pub bs: usize,
    pub estimator: EstimatorKind,
    pub initial: Position<f64>,
    pub current: Position<f64>,
    pub truth: Position<f64>,
    pub error: f64,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutput {
    pub trial: u64,
    pub seed: u64,
    /// Step-major, estimators in configuration order within a step.
    pub records: Vec<StepRecord>,
    /// Spectral diagnostics of the pseudo-ML estimator, if enabled.
    pub diagnostics: SpectralDiagnostics,
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial`: `splitmix64(master ⊕ splitmix64(trial))`.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial))
}

fn motion_rng(seed: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(0);
    r
}

fn channel_rng(seed: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(1);
    r
}

fn cast_array<T: Real>(cfg: &ArrayConfig<f64>) -> Result<ArrayConfig<T>> {
    ArrayConfig::new(cfg.element_count(), cfg.subarray_len(), T::lit(cfg.carrier_hz()))
}

fn cast_channel<T: Real>(c: &ChannelParams<f64>) -> ChannelParams<T> {
    ChannelParams {
        path_loss_exponent: T::lit(c.path_loss_exponent),
        reference_distance: T::lit(c.reference_distance),
        coherence_bandwidth: T::lit(c.coherence_bandwidth),
        doppler_spread: T::lit(c.doppler_spread),
        rms_delay_spread: T::lit(c.rms_delay_spread),
        transmit_power_dbm: T::lit(c.transmit_power_dbm),
        noise_power: T::lit(c.noise_power),
        carrier_hz: T::lit(c.carrier_hz),
        amplitude_law: c.amplitude_law,
    }
}

fn cast_position<T: Real>(p: Position<f64>) -> Position<T> {
    Position::new(T::lit(p.x), T::lit(p.y))
}

fn cast_velocity<T: Real>(v: Velocity<f64>) -> Velocity<T> {
    Velocity::new(T::lit(v.vx), T::lit(v.vy))
}

/// Builds the configured estimators in configuration order.
pub fn build_estimators<T: Real>(scenario: &Scenario) -> Result<Vec<Box<dyn PositionEstimator<T>>>> {
    let c = scenario.config();
    let cfg = cast_array::<T>(&c.array_config()?)?;
    let points: Vec<Position<T>> = scenario.grid().iter().map(|&p| cast_position(p)).collect();
    let mut out: Vec<Box<dyn PositionEstimator<T>>> = Vec::new();
    let spectral = || -> Result<SpectralEstimator<T>> {
        let grid = AngularGrid::uniform_in_sine(c.array.angular_grid_points)?;
        Ok(SpectralEstimator::new(cfg, grid, c.signal_dim()?)?.with_loading(T::lit(c.array.loading)))
    };
    for kind in &c.estimators {
        match kind {
            EstimatorKind::PseudoMl => out.push(Box::new(PseudoMl::new(
                points.clone(),
                spectral()?,
                T::lit(c.association_tolerance_deg.to_radians()),
            )?)),
            EstimatorKind::MaxPower => out.push(Box::new(MaxPower::new(points.clone(), spectral()?)?)),
            EstimatorKind::SinglePath => {
                out.push(Box::new(SinglePath::new(points.clone(), cfg, c.single_path_gamma)?))
            }
        }
    }
    Ok(out)
}

/// One synthesized broadcast with the receiver state at its arrival.
#[derive(Debug, Clone)]
pub struct TrialEvent<T> {
    pub k: usize,
    pub time: f64,
    pub bs: usize,
    pub bs_position: Position<f64>,
    pub truth: Position<f64>,
    pub true_heading: GlobalBearing<f64>,
    pub realization: MultipathRealization<T>,
    pub observation: Observation<T>,
}

/// Replays the random draws of one trial event by event. Motion noise and
/// channel use separate streams of the trial seed.
pub struct TrialStream<'a, T> {
    scenario: &'a Scenario,
    motion: Vec<MotionSample>,
    rng: ChaCha8Rng,
    cfg: ArrayConfig<T>,
    channel: ChannelParams<T>,
    history: MotionHistory<T>,
    true_heading: GlobalBearing<f64>,
    next: usize,
}

impl<'a, T: Real> TrialStream<'a, T> {
    pub fn new(scenario: &'a Scenario, seed: u64) -> Result<Self> {
        let c = scenario.config();
        let motion = mobility_profile(&mut motion_rng(seed), scenario.truth(), c.velocity_noise_fraction);
        let history = MotionHistory::new(T::zero(), cast_velocity(motion[0].measured_velocity));
        let true_heading = heading_from_velocity(&motion[0].true_velocity, None);
        Ok(Self {
            scenario,
            rng: channel_rng(seed),
            cfg: cast_array::<T>(&c.array_config()?)?,
            channel: cast_channel::<T>(&c.channel_params()?),
            motion,
            history,
            true_heading,
            next: 1,
        })
    }

    /// Dead-reckoning state built from the measured velocities so far.
    pub fn history(&self) -> &MotionHistory<T> {
        &self.history
    }

    pub fn motion(&self) -> &[MotionSample] {
        &self.motion
    }

    /// Synthesizes the next event, or `None` past the last one.
    pub fn next_event(&mut self) -> Option<Result<TrialEvent<T>>> {
        let k = self.next;
        if k >= self.motion.len() {
            return None;
        }
        self.next += 1;
        Some(self.synthesize(k))
    }

    fn synthesize(&mut self, k: usize) -> Result<TrialEvent<T>> {
        let c = self.scenario.config();
        let sample = self.motion[k];
        let (t, bs_id) = c.event(k);
        let bs = c.bs_positions()[bs_id];
        let truth = sample.true_position;
        self.history.push(T::lit(t), cast_velocity(sample.measured_velocity))?;
        self.true_heading = heading_from_velocity(&sample.true_velocity, Some(self.true_heading));

        let los = los_bearing(bs, truth)?;
        let paths = self.rng.random_range(c.path_count[0]..=c.path_count[1]);
        let blocked = self.rng.random_bool(c.p_nlos);
        let realization = sample_multipath(
            &mut self.rng,
            &self.channel,
            paths,
            T::lit(bs.distance(&truth)),
            GlobalBearing::new(T::lit(los.radians())),
            blocked,
        )?;
        let observation = generate_observation(
            &mut self.rng,
            &realization,
            GlobalBearing::new(T::lit(self.true_heading.radians())),
            &self.cfg,
            c.snapshots,
            self.channel.noise_power,
            T::lit(t),
            bs_id,
        )?;
        Ok(TrialEvent {
            k,
            time: t,
            bs: bs_id,
            bs_position: bs,
            truth,
            true_heading: self.true_heading,
            realization,
            observation,
        })
    }
}

/// Runs trial `trial` in precision `T`.
pub fn run_trial<T: Real>(scenario: &Scenario, trial: u64) -> Result<TrialOutput> {
    let seed = trial_seed(scenario.config().master_seed, trial);
    run_trial_with_seed::<T>(scenario, trial, seed)
}

pub fn run_trial_with_seed<T: Real>(scenario: &Scenario, trial: u64, seed: u64) -> Result<TrialOutput> {
    let ctx = |step: usize| move |e: Error| Error::Trial { trial, step, source: Box::new(e) };
    let mut output = TrialOutput {
        trial,
        seed,
        records: Vec::new(),
        diagnostics: SpectralDiagnostics::default(),
    };
    if scenario.config().estimators.is_empty() {
        return Ok(output);
    }
    let mut estimators = build_estimators::<T>(scenario).map_err(ctx(0))?;
    let mut stream = TrialStream::<T>::new(scenario, seed).map_err(ctx(0))?;
    let mut k = 1;
    while let Some(event) = stream.next_event() {
        let ev = event.map_err(ctx(k))?;
        let bs_t = cast_position::<T>(ev.bs_position);
        for est in estimators.iter_mut() {
            let e = est.step(&ev.observation, stream.history(), bs_t).map_err(ctx(ev.k))?;
            let current = Position::new(e.current.x.as_f64(), e.current.y.as_f64());
            output.records.push(StepRecord {
                k: ev.k,
                time: ev.time,
                bs: ev.bs,
                estimator: e.estimator,
                initial: Position::new(e.initial.x.as_f64(), e.initial.y.as_f64()),
                current,
                truth: ev.truth,
                error: current.distance(&ev.truth),
                candidates: e.candidates,
            });
        }
        k += 1;
    }
    for est in &estimators {
        let d = est.spectral_diagnostics();
        output.diagnostics.padded_steps += d.padded_steps;
        output.diagnostics.degenerate_steps += d.degenerate_steps;
    }
    Ok(output)
}
