//! Direct position estimators evaluated on a fixed grid of initial positions.
//!
//! Every estimator keeps one accumulated score per hypothesised start point
//! `p̃₀` and updates it online as observations arrive. The trial LOS direction
//! of each hypothesis is obtained by dead-reckoning `p̃₀` with the measured
//! velocities, taking the bearing towards the transmitting BS and rotating it
//! into the array frame.

mod max_power;
mod projector;
mod pseudo_ml;
mod single_path;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::Observation;
use crate::error::{Error, Result};
use crate::geometry::{global_to_local, los_bearing, GlobalBearing, LocalAoa, MotionHistory, Position};
use crate::scalar::Real;

pub use max_power::{MaxPower, MaxPowerFrame};
pub use projector::{compressed_score, ProjectorEstimate};
pub use pseudo_ml::{PseudoMl, PseudoMlFrame};
pub use single_path::{single_path_residual, GammaRule, SinglePath, SinglePathFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    PseudoMl,
    MaxPower,
    SinglePath,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::PseudoMl, Self::MaxPower, Self::SinglePath];

    pub fn label(self) -> &'static str {
        match self {
            Self::PseudoMl => "pseudo_ml",
            Self::MaxPower => "max_power",
            Self::SinglePath => "single_path",
        }
    }

    /// Whether the best hypothesis maximizes (true) or minimizes the score.
    pub fn maximizes(self) -> bool {
        !matches!(self, Self::SinglePath)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Uniform square grid of start hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub center: Position<T>,
    pub half_width: T,
    pub spacing: T,
}

impl<T: Real> GridSpec<T> {
    /// Points in row-major order (y outer, x inner), edges included.
    pub fn points(&self) -> Result<Vec<Position<T>>> {
        if !(self.spacing > T::zero()) || self.half_width < T::zero() {
            return Err(Error::InvalidParameter(
                "grid spacing must be positive and half-width non-negative".into(),
            ));
        }
        let per_side = (T::lit(2.0) * self.half_width / self.spacing + T::lit(1e-9)).floor();
        let n = per_side.to_usize().unwrap_or(0) + 1;
        let start_x = self.center.x - self.half_width;
        let start_y = self.center.y - self.half_width;
        let mut pts = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                pts.push(Position::new(
                    start_x + self.spacing * T::from_usize(ix).unwrap(),
                    start_y + self.spacing * T::from_usize(iy).unwrap(),
                ));
            }
        }
        Ok(pts)
    }
}

/// Per-hypothesis accumulated score and non-association count.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState<T> {
    points: Vec<Position<T>>,
    scores: Vec<T>,
    misses: Vec<u32>,
    step: usize,
}

impl<T: Real> GridState<T> {
    pub fn new(points: Vec<Position<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let n = points.len();
        Ok(Self {
            points,
            scores: vec![T::zero(); n],
            misses: vec![0; n],
            step: 0,
        })
    }

    pub fn points(&self) -> &[Position<T>] {
        &self.points
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn misses(&self) -> &[u32] {
        &self.misses
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest non-association count over the grid.
    pub fn min_misses(&self) -> u32 {
        self.misses.iter().copied().min().unwrap_or(0)
    }

    /// Indices of the points with the minimum non-association count.
    pub fn candidates(&self) -> Vec<usize> {
        let m = self.min_misses();
        (0..self.len()).filter(|&i| self.misses[i] == m).collect()
    }

    /// Best candidate; ties resolve to the lowest (row-major) index.
    pub fn best(&self, maximize: bool) -> usize {
        let m = self.min_misses();
        let mut best: Option<usize> = None;
        for i in 0..self.len() {
            if self.misses[i] != m {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    let better = if maximize {
                        self.scores[i] > self.scores[b]
                    } else {
                        self.scores[i] < self.scores[b]
                    };
                    Some(if better { i } else { b })
                }
            };
        }
        best.expect("grid is never empty")
    }

    pub(crate) fn add_score(&mut self, i: usize, inc: T) {
        self.scores[i] += inc;
    }

    pub(crate) fn add_miss(&mut self, i: usize) {
        self.misses[i] += 1;
    }

    pub(crate) fn advance(&mut self) {
        self.step += 1;
    }

    fn estimate(&self, kind: EstimatorKind, motion: &MotionSnapshot<T>) -> PositionEstimate<T> {
        let best = self.best(kind.maximizes());
        let initial = self.points[best];
        let m = self.min_misses();
        PositionEstimate {
            initial,
            current: motion.position_from(initial),
            step: self.step,
            estimator: kind,
            candidates: self.misses.iter().filter(|&&x| x == m).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate<T> {
    pub initial: Position<T>,
    pub current: Position<T>,
    pub step: usize,
    pub estimator: EstimatorKind,
    /// Size of the candidate set `|𝒫_k|`.
    pub candidates: usize,
}

/// Dead-reckoned displacement and heading at one event time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSnapshot<T> {
    pub displacement: (T, T),
    pub heading: GlobalBearing<T>,
}

impl<T: Real> MotionSnapshot<T> {
    pub fn position_from(&self, p0: Position<T>) -> Position<T> {
        p0.offset(self.displacement.0, self.displacement.1)
    }

    /// Trial LOS direction in the array frame for the start hypothesis `p0`.
    /// `None` when the reconstructed position coincides with the BS.
    pub fn trial_angle(&self, p0: Position<T>, bs: Position<T>) -> Option<LocalAoa<T>> {
        let bearing = los_bearing(bs, self.position_from(p0)).ok()?;
        Some(global_to_local(bearing, self.heading))
    }
}

impl<T: Real> From<&MotionHistory<T>> for MotionSnapshot<T> {
    fn from(h: &MotionHistory<T>) -> Self {
        Self {
            displacement: h.displacement(),
            heading: h.heading(),
        }
    }
}

/// Online direct position estimator.
pub trait PositionEstimator<T: Real>: Send {
    fn kind(&self) -> EstimatorKind;

    fn state(&self) -> &GridState<T>;

    fn spectral_diagnostics(&self) -> SpectralDiagnostics {
        SpectralDiagnostics::default()
    }

    /// Processes observation `k`. `motion` holds the velocity measurements up
    /// to and including `t_k`; `bs` is the position of the transmitter.
    fn step(
        &mut self,
        obs: &Observation<T>,
        motion: &MotionHistory<T>,
        bs: Position<T>,
    ) -> Result<PositionEstimate<T>>;
}

/// Counts of steps whose direction estimates were padded or came from a flat
/// pseudospectrum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpectralDiagnostics {
    pub padded_steps: usize,
    pub degenerate_steps: usize,
}

/// One replayable estimator input: observation, motion state and transmitter.
#[derive(Debug, Clone)]
pub struct ReplayItem<T> {
    pub observation: Observation<T>,
    pub motion: MotionSnapshot<T>,
    pub bs: Position<T>,
}
