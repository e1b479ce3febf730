//! Ground-truth motion and noisy velocity measurements.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Position, Velocity};

const KMH: f64 = 1.0 / 3.6;

/// Speed profile and turn of the mobile station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityConfig {
    /// `[fraction of duration, km/h]` knots, linearly interpolated. The first
    /// knot must be at 0 and the last at 1.
    pub speed_knots_kmh: Vec<[f64; 2]>,
    /// Constant acceleration orthogonal to the velocity, m/s². Positive turns
    /// right (clockwise).
    pub lateral_acceleration: f64,
    pub initial_heading_deg: f64,
    /// Integration step of the ground truth, seconds.
    #[serde(default = "default_integration_step")]
    pub integration_step_s: f64,
}

fn default_integration_step() -> f64 {
    1e-4
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            speed_knots_kmh: vec![[0.0, 25.0], [1.0 / 3.0, 50.0], [2.0 / 3.0, 50.0], [1.0, 25.0]],
            lateral_acceleration: 0.025,
            initial_heading_deg: 0.0,
            integration_step_s: default_integration_step(),
        }
    }
}

impl MobilityConfig {
    pub fn validate(&self) -> Result<()> {
        let k = &self.speed_knots_kmh;
        if k.len() < 2 {
            return Err(Error::Config("mobility.speed_knots_kmh needs at least two knots".into()));
        }
        if k[0][0] != 0.0 || k[k.len() - 1][0] != 1.0 {
            return Err(Error::Config("speed knots must start at 0 and end at 1".into()));
        }
        if k.windows(2).any(|w| !(w[1][0] > w[0][0])) {
            return Err(Error::Config("speed knot fractions must be strictly increasing".into()));
        }
        if k.iter().any(|&[_, v]| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Config("speeds must be positive".into()));
        }
        if !self.lateral_acceleration.is_finite() || !self.initial_heading_deg.is_finite() {
            return Err(Error::Config("mobility parameters must be finite".into()));
        }
        if !(self.integration_step_s > 0.0) {
            return Err(Error::Config("mobility.integration_step_s must be positive".into()));
        }
        Ok(())
    }

    /// Speed modulus in m/s at time `t` of a run lasting `duration`.
    pub fn speed_at(&self, t: f64, duration: f64) -> f64 {
        let f = (t / duration).clamp(0.0, 1.0);
        let k = &self.speed_knots_kmh;
        let i = k.windows(2).position(|w| f <= w[1][0]).unwrap_or(k.len() - 2);
        let [f0, v0] = k[i];
        let [f1, v1] = k[i + 1];
        (v0 + (v1 - v0) * (f - f0) / (f1 - f0)) * KMH
    }
}

/// True kinematic state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthState {
    pub time: f64,
    pub position: Position<f64>,
    pub velocity: Velocity<f64>,
}

/// Integrates the ground truth and samples it at `times` (non-decreasing,
/// starting at or after 0).
pub fn integrate_truth(cfg: &MobilityConfig, p0: Position<f64>, duration: f64, times: &[f64]) -> Result<Vec<TruthState>> {
    cfg.validate()?;
    let deriv = |t: f64, s: [f64; 3]| -> [f64; 3] {
        let v = cfg.speed_at(t, duration);
        [v * s[2].cos(), v * s[2].sin(), -cfg.lateral_acceleration / v]
    };
    let mut state = [p0.x, p0.y, cfg.initial_heading_deg.to_radians()];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(Error::InvalidParameter("sample times must be non-decreasing".into()));
        }
        let n = ((target - t) / cfg.integration_step_s).ceil() as usize;
        let h = if n > 0 { (target - t) / n as f64 } else { 0.0 };
        for _ in 0..n {
            state = rk4(&deriv, t, state, h);
            t += h;
        }
        t = target;
        let v = cfg.speed_at(t, duration);
        out.push(TruthState {
            time: t,
            position: Position::new(state[0], state[1]),
            velocity: Velocity::new(v * state[2].cos(), v * state[2].sin()),
        });
    }
    Ok(out)
}

fn rk4(f: &impl Fn(f64, [f64; 3]) -> [f64; 3], t: f64, s: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]];
    let k1 = f(t, s);
    let k2 = f(t + h / 2.0, add(s, k1, h / 2.0));
    let k3 = f(t + h / 2.0, add(s, k2, h / 2.0));
    let k4 = f(t + h, add(s, k3, h));
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Adds independent zero-mean Gaussian errors with standard deviation
/// `fraction·|component|` to each velocity component.
pub fn measure_velocity<R: Rng + ?Sized>(rng: &mut R, v: Velocity<f64>, fraction: f64) -> Velocity<f64> {
    let ex: f64 = StandardNormal.sample(rng);
    let ey: f64 = StandardNormal.sample(rng);
    Velocity::new(v.vx + fraction * v.vx.abs() * ex, v.vy + fraction * v.vy.abs() * ey)
}

/// One instant of the mobility profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSample {
    pub time: f64,
    pub true_position: Position<f64>,
    pub true_velocity: Velocity<f64>,
    pub measured_velocity: Velocity<f64>,
}

/// Truth plus measured velocities at the given instants.
pub fn mobility_profile<R: Rng + ?Sized>(
    rng: &mut R,
    truth: &[TruthState],
    noise_fraction: f64,
) -> Vec<MotionSample> {
    truth
        .iter()
        .map(|s| MotionSample {
            time: s.time,
            true_position: s.position,
            true_velocity: s.velocity,
            measured_velocity: measure_velocity(rng, s.velocity, noise_fraction),
        })
        .collect()
}
