//! Flat/slow-fading parameter feasibility and the steering-stationarity time.

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{steering, ArrayConfig, LocalAoa};
use crate::scalar::{norm_sqr, Real};

/// Factor used for "much larger" / "much smaller".
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Cross-track distance between the straight path and the BS in the
/// stationarity model, meters.
pub const DEFAULT_LATERAL_OFFSET: f64 = 0.5;

/// Largest `ΔT` reported by [`stationarity_time`]; returned (flagged as
/// capped) when the threshold is never crossed, e.g. at zero speed.
pub const STATIONARITY_HORIZON_S: f64 = 3600.0;

/// Optional inputs of [`feasibility_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityRequest<T> {
    /// Root-raised-cosine roll-off `α ∈ [0, 1]`.
    pub alpha: T,
    pub observation_time: T,
    /// Coherence time; defaults to `1/B_D`.
    pub coherence_time: Option<T>,
    pub margin: T,
    /// `(distance, speed, κ, array)` for the reported stationarity time.
    pub stationarity: Option<StationarityQuery<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityQuery<T> {
    pub distance: T,
    pub speed: T,
    pub kappa: T,
    pub array: ArrayConfig<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport<T> {
    pub alpha: T,
    pub observation_time: T,
    pub coherence_time: T,
    pub stationarity_time: Option<StationarityTime<T>>,
    pub bandwidth_min: T,
    pub bandwidth_max: T,
    /// Bandwidth minimizing the sampling interval (upper end of the interval).
    pub bandwidth: T,
    pub sampling_interval: T,
    pub snapshots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityTime<T> {
    pub seconds: T,
    /// True when the horizon was reached without crossing the threshold.
    pub capped: bool,
}

/// Sampling interval `T = (1+α)/(2B)`.
pub fn sampling_interval<T: Real>(alpha: T, bandwidth: T) -> T {
    (T::one() + alpha) / (T::lit(2.0) * bandwidth)
}

/// `N = ⌊T_obs / T⌋`, tolerant to rounding when the ratio is an integer.
pub fn snapshot_count<T: Real>(observation_time: T, sampling_interval: T) -> usize {
    let ratio = (observation_time / sampling_interval).as_f64();
    (ratio * (1.0 + 1e-9)).floor().max(0.0) as usize
}

/// Allowed bandwidth interval `[m·B_D, B_c(1+α)/m]`.
pub fn bandwidth_interval<T: Real>(channel: &ChannelParams<T>, alpha: T, margin: T) -> (T, T) {
    (
        margin * channel.doppler_spread,
        channel.coherence_bandwidth * (T::one() + alpha) / margin,
    )
}

pub fn feasibility<T: Real>(channel: &ChannelParams<T>, alpha: T, observation_time: T) -> Result<FeasibilityReport<T>> {
    feasibility_with(
        channel,
        &FeasibilityRequest {
            alpha,
            observation_time,
            coherence_time: None,
            margin: T::lit(DEFAULT_MARGIN),
            stationarity: None,
        },
    )
}

pub fn feasibility_with<T: Real>(channel: &ChannelParams<T>, req: &FeasibilityRequest<T>) -> Result<FeasibilityReport<T>> {
    let alpha = req.alpha;
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::InvalidParameter(format!("roll-off must lie in [0, 1], got {alpha}")));
    }
    if !(req.margin >= T::one()) {
        return Err(Error::InvalidParameter("margin must be at least 1".into()));
    }
    if !(req.observation_time > T::zero()) {
        return Err(Error::InvalidParameter("observation time must be positive".into()));
    }
    if !(channel.doppler_spread > T::zero()) || !(channel.coherence_bandwidth > T::zero()) {
        return Err(Error::InvalidParameter("Doppler spread and coherence bandwidth must be positive".into()));
    }
    let coherence_time = req.coherence_time.unwrap_or(T::one() / channel.doppler_spread);
    // Relative slack so that T_obs = T_c passes despite rounding.
    if req.observation_time > coherence_time * (T::one() + T::lit(1e-9)) {
        return Err(Error::Infeasible(format!(
            "T_obs <= T_c violated: observation time {} s exceeds coherence time {} s",
            req.observation_time, coherence_time
        )));
    }
    let (lo, hi) = bandwidth_interval(channel, alpha, req.margin);
    if lo > hi {
        return Err(Error::Infeasible(format!(
            "B >> B_D and B << B_c(1+alpha) cannot both hold: need B >= {lo} Hz and B <= {hi} Hz"
        )));
    }
    let t = sampling_interval(alpha, hi);
    let stationarity = req
        .stationarity
        .map(|q| stationarity_time(q.distance, q.speed, q.kappa, &q.array))
        .transpose()?;
    Ok(FeasibilityReport {
        alpha,
        observation_time: req.observation_time,
        coherence_time,
        stationarity_time: stationarity,
        bandwidth_min: lo,
        bandwidth_max: hi,
        bandwidth: hi,
        sampling_interval: t,
        snapshots: snapshot_count(req.observation_time, t),
    })
}

/// `(B, T(B))` samples over the allowed interval, `points` per curve.
pub fn sampling_curve<T: Real>(channel: &ChannelParams<T>, alpha: T, margin: T, points: usize) -> Vec<(T, T)> {
    let (lo, hi) = bandwidth_interval(channel, alpha, margin);
    if lo > hi || points == 0 {
        return Vec::new();
    }
    if points == 1 {
        return vec![(hi, sampling_interval(alpha, hi))];
    }
    let n = T::from_usize(points - 1).unwrap();
    (0..points)
        .map(|i| {
            let b = lo + (hi - lo) * T::from_usize(i).unwrap() / n;
            (b, sampling_interval(alpha, b))
        })
        .collect()
}

/// Straight constant-speed pass with the BS `distance` away, slightly off the
/// track by `lateral_offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityGeometry<T> {
    pub lateral_offset: T,
    pub horizon: T,
}

impl<T: Real> Default for StationarityGeometry<T> {
    fn default() -> Self {
        Self {
            lateral_offset: T::lit(DEFAULT_LATERAL_OFFSET),
            horizon: T::lit(STATIONARITY_HORIZON_S),
        }
    }
}

/// Largest `ΔT` keeping `‖a(θ_t) − a(θ_{t+ΔT})‖ ≤ κ‖a‖` while heading
/// straight at `speed` towards a BS initially `distance` away.
pub fn stationarity_time<T: Real>(distance: T, speed: T, kappa: T, cfg: &ArrayConfig<T>) -> Result<StationarityTime<T>> {
    stationarity_time_with(distance, speed, kappa, cfg, &StationarityGeometry::default())
}

/// As [`stationarity_time`] with explicit geometry. The lateral offset is
/// limited to half the distance.
pub fn stationarity_time_with<T: Real>(
    distance: T,
    speed: T,
    kappa: T,
    cfg: &ArrayConfig<T>,
    geom: &StationarityGeometry<T>,
) -> Result<StationarityTime<T>> {
    if !(distance > T::zero()) || !(speed >= T::zero()) || !(kappa > T::zero()) {
        return Err(Error::InvalidParameter(
            "stationarity needs distance > 0, speed >= 0 and kappa > 0".into(),
        ));
    }
    let capped = StationarityTime {
        seconds: geom.horizon,
        capped: true,
    };
    if speed == T::zero() {
        return Ok(capped);
    }
    let h = geom.lateral_offset.min(distance * T::lit(0.5));
    let along = (distance * distance - h * h).sqrt();
    let m = cfg.element_count();
    let a0 = steering(aoa_after(along, h, T::zero()), m, cfg);
    let threshold = kappa * T::from_usize(m).unwrap().sqrt();
    // Work in travelled path length so that the result scales exactly as 1/speed.
    let excess = |s: T| norm_sqr(&(steering(aoa_after(along, h, s), m, cfg) - &a0)).sqrt() - threshold;
    let max_len = geom.horizon * speed;
    let ratio = T::lit(1.005);
    let mut prev = T::zero();
    let mut s = (distance * T::lit(1e-9)).min(max_len);
    loop {
        if excess(s) > T::zero() {
            break;
        }
        if s >= max_len {
            return Ok(capped);
        }
        prev = s;
        s = (s * ratio).min(max_len);
    }
    let (mut lo, mut hi) = (prev, s);
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(StationarityTime {
        seconds: lo / speed,
        capped: false,
    })
}

fn aoa_after<T: Real>(along: T, lateral: T, travelled: T) -> LocalAoa<T> {
    LocalAoa::from_sine(lateral.atan2(along - travelled).sin())
}
