//! Array manifold, angle frames and dead-reckoning trajectories.
//!
//! Global bearings are measured counterclockwise from the x-axis in
//! `[0, 2π)`. The receiving ULA is mounted orthogonally to the heading, so
//! local angles are measured from the heading (the array normal) and live in
//! `[−π/2, π/2]`. Rear half-plane directions fold onto the front angle with the
//! same sine, which is the angle the array actually "sees".

use crate::error::{Error, Result};
use crate::scalar::{cis, CVector, Real};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Position<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Position<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Translates the position by a displacement vector.
    pub fn offset(&self, dx: T, dy: T) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Planar velocity in meters per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocity<T> {
    pub vx: T,
    pub vy: T,
}

impl<T: Real> Velocity<T> {
    pub fn new(vx: T, vy: T) -> Self {
        Self { vx, vy }
    }

    pub fn speed(&self) -> T {
        self.vx.hypot(self.vy)
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite()
    }
}

/// Angle in the global frame, wrapped to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GlobalBearing<T>(T);

impl<T: Real> GlobalBearing<T> {
    pub fn new(angle: T) -> Self {
        let two_pi = T::two_pi();
        let mut wrapped = angle - two_pi * (angle / two_pi).floor();
        if wrapped >= two_pi || wrapped < T::zero() {
            wrapped = T::zero();
        }
        Self(wrapped)
    }

    pub fn radians(self) -> T {
        self.0
    }
}

/// Angle seen by the ULA, measured from the array normal, in `[−π/2, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LocalAoa<T>(T);

impl<T: Real> LocalAoa<T> {
    pub fn new(angle: T) -> Result<Self> {
        if !angle.is_finite() || angle.abs() > T::frac_pi_2() {
            return Err(Error::InvalidParameter(format!(
                "local angle {angle} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self(angle))
    }

    /// Builds the angle from its sine, clamping rounding excursions past ±1.
    pub fn from_sine(s: T) -> Self {
        let s = s.clamp(-T::one(), T::one());
        Self(s.asin())
    }

    pub fn radians(self) -> T {
        self.0
    }

    pub fn sine(self) -> T {
        self.0.sin()
    }
}

/// Uniform linear array with half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig<T> {
    element_count: usize,
    subarray_len: usize,
    carrier_hz: T,
}

impl<T: Real> ArrayConfig<T> {
    pub fn new(element_count: usize, subarray_len: usize, carrier_hz: T) -> Result<Self> {
        if element_count == 0 {
            return Err(Error::Dimension("array needs at least one element".into()));
        }
        if subarray_len == 0 || subarray_len > element_count {
            return Err(Error::Dimension(format!(
                "subarray length {subarray_len} must lie in 1..={element_count}"
            )));
        }
        if !(carrier_hz > T::zero()) || !carrier_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {carrier_hz}"
            )));
        }
        Ok(Self {
            element_count,
            subarray_len,
            carrier_hz,
        })
    }

    /// Number of array elements `M`.
    pub fn element_count(&self) -> usize {
        self.element_count
    }

    /// Smoothing subarray length `P`.
    pub fn subarray_len(&self) -> usize {
        self.subarray_len
    }

    /// Number of overlapped subarrays `S = M − P + 1`.
    pub fn subarray_count(&self) -> usize {
        self.element_count - self.subarray_len + 1
    }

    pub fn carrier_hz(&self) -> T {
        self.carrier_hz
    }

    pub fn wavelength(&self) -> T {
        T::lit(SPEED_OF_LIGHT) / self.carrier_hz
    }

    pub fn element_spacing(&self) -> T {
        self.wavelength() / T::lit(2.0)
    }

    pub fn wavenumber(&self) -> T {
        T::two_pi() / self.wavelength()
    }

    /// Inter-element phase increment per unit of `sin θ` (π for d = λ/2).
    pub fn phase_per_sine(&self) -> T {
        self.wavenumber() * self.element_spacing()
    }

    /// Same array with a different smoothing subarray length.
    pub fn with_subarray_len(&self, subarray_len: usize) -> Result<Self> {
        Self::new(self.element_count, subarray_len, self.carrier_hz)
    }
}

/// Global bearing of the line-of-sight from `ms` towards `bs`.
pub fn los_bearing<T: Real>(bs: Position<T>, ms: Position<T>) -> Result<GlobalBearing<T>> {
    let dy = bs.y - ms.y;
    let dx = bs.x - ms.x;
    if dx == T::zero() && dy == T::zero() {
        return Err(Error::CoincidentPoints);
    }
    Ok(GlobalBearing::new(dy.atan2(dx)))
}

/// Maps a global bearing into the array frame given the heading.
pub fn global_to_local<T: Real>(bearing: GlobalBearing<T>, heading: GlobalBearing<T>) -> LocalAoa<T> {
    LocalAoa::from_sine((bearing.radians() - heading.radians()).sin())
}

/// Steering vector of the first `length` elements: `a_k = exp(j·k·ω·d·sin θ)`.
pub fn steering<T: Real>(aoa: LocalAoa<T>, length: usize, cfg: &ArrayConfig<T>) -> CVector<T> {
    steering_from_sine(aoa.sine(), length, cfg)
}

pub(crate) fn steering_from_sine<T: Real>(sine: T, length: usize, cfg: &ArrayConfig<T>) -> CVector<T> {
    let step = cfg.phase_per_sine() * sine;
    CVector::from_fn(length, |k, _| cis(T::from_usize(k).unwrap() * step))
}

/// Heading of a velocity vector. A zero velocity keeps `previous` (or 0).
pub fn heading_from_velocity<T: Real>(
    v: &Velocity<T>,
    previous: Option<GlobalBearing<T>>,
) -> GlobalBearing<T> {
    if v.vx == T::zero() && v.vy == T::zero() {
        previous.unwrap_or_else(|| GlobalBearing::new(T::zero()))
    } else {
        GlobalBearing::new(v.vy.atan2(v.vx))
    }
}

/// Integrates piecewise-constant velocities: each `(v, dt)` holds `v` for `dt`
/// seconds. Returns `p0` followed by the position after every step.
pub fn reconstruct_trajectory<T: Real>(
    p0: Position<T>,
    steps: &[(Velocity<T>, T)],
) -> Result<Vec<Position<T>>> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(p0);
    let (mut x, mut y) = (p0.x, p0.y);
    for (i, (v, dt)) in steps.iter().enumerate() {
        if !(*dt > T::zero()) {
            return Err(Error::NonPositiveTimeStep(dt.as_f64(), i));
        }
        x += v.vx * *dt;
        y += v.vy * *dt;
        out.push(Position::new(x, y));
    }
    Ok(out)
}

/// Velocity measurements collected by the mobile node, one per event time.
///
/// Sample `i` is the velocity read at `t_i`; it is held constant over
/// `[t_i, t_{i+1})`. The first sample is taken at the start time `t_0`.
#[derive(Debug, Clone)]
pub struct MotionHistory<T> {
    samples: Vec<(T, Velocity<T>)>,
    displacement: (T, T),
    heading: Option<GlobalBearing<T>>,
}

impl<T: Real> MotionHistory<T> {
    pub fn new(t0: T, v0: Velocity<T>) -> Self {
        Self {
            samples: vec![(t0, v0)],
            displacement: (T::zero(), T::zero()),
            heading: Some(heading_from_velocity(&v0, None)),
        }
    }

    /// Appends the velocity measured at a new, strictly later, event time.
    pub fn push(&mut self, t: T, v: Velocity<T>) -> Result<()> {
        let &(t_prev, v_prev) = self.samples.last().expect("history is never empty");
        let dt = t - t_prev;
        if !(dt > T::zero()) {
            return Err(Error::NonPositiveTimeStep(dt.as_f64(), self.samples.len()));
        }
        self.displacement.0 += v_prev.vx * dt;
        self.displacement.1 += v_prev.vy * dt;
        self.heading = Some(heading_from_velocity(&v, self.heading));
        self.samples.push((t, v));
        Ok(())
    }

    /// Index `k` of the latest sample.
    pub fn step(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn current_time(&self) -> T {
        self.samples.last().unwrap().0
    }

    /// Dead-reckoned displacement from `t_0` to the latest sample time.
    pub fn displacement(&self) -> (T, T) {
        self.displacement
    }

    /// Heading derived from the latest velocity sample.
    pub fn heading(&self) -> GlobalBearing<T> {
        self.heading.unwrap()
    }

    /// Position at the latest sample time for a hypothesised start `p0`.
    pub fn position_from(&self, p0: Position<T>) -> Position<T> {
        p0.offset(self.displacement.0, self.displacement.1)
    }

    pub fn samples(&self) -> &[(T, Velocity<T>)] {
        &self.samples
    }

    /// `(v, dt)` pairs suitable for [`reconstruct_trajectory`].
    pub fn as_steps(&self) -> Vec<(Velocity<T>, T)> {
        self.samples
            .windows(2)
            .map(|w| (w[0].1, w[1].0 - w[0].0))
            .collect()
    }
}
