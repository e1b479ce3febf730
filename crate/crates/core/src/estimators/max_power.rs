use super::{EstimatorKind, GridState, MotionSnapshot, PositionEstimate, PositionEstimator, ReplayItem};
use crate::channel::Observation;
use crate::error::Result;
use crate::geometry::{ArrayConfig, LocalAoa, MotionHistory, Position};
use crate::scalar::{dotc, CMatrix, Real};
use crate::spectral::{CaponBeamformer, SpectralEstimator};

/// Max-power DPE: accumulates FBSS-Capon output energy at the trial LOS angle.
#[derive(Debug, Clone)]
pub struct MaxPower<T> {
    spectral: SpectralEstimator<T>,
    state: GridState<T>,
}

#[derive(Debug, Clone)]
pub struct MaxPowerFrame<T> {
    beamformer: CaponBeamformer<T>,
    reference: CMatrix<T>,
    cfg: ArrayConfig<T>,
}

impl<T: Real> MaxPowerFrame<T> {
    /// `‖z‖²` with `z = (w^H(θ̃)·Y⁽¹⁾)^T`; zero for undefined trial angles.
    pub fn increment(&self, trial: Option<LocalAoa<T>>) -> Result<T> {
        let Some(trial) = trial else {
            return Ok(T::zero());
        };
        let w = self.beamformer.weights(trial, &self.cfg)?;
        Ok(self
            .reference
            .column_iter()
            .fold(T::zero(), |acc, y| acc + dotc(&w, &y.into_owned()).norm_sqr()))
    }
}

impl<T: Real> MaxPower<T> {
    pub fn new(points: Vec<Position<T>>, spectral: SpectralEstimator<T>) -> Result<Self> {
        Ok(Self {
            spectral,
            state: GridState::new(points)?,
        })
    }

    pub fn prepare(&self, obs: &Observation<T>) -> Result<MaxPowerFrame<T>> {
        let (_, beamformer) = self.spectral.beamformer(obs)?;
        let p = self.spectral.array().subarray_len();
        Ok(MaxPowerFrame {
            beamformer,
            reference: obs.samples.rows(0, p).into_owned(),
            cfg: *self.spectral.array(),
        })
    }

    pub fn evaluate_batch(&self, items: &[ReplayItem<T>]) -> Result<GridState<T>> {
        let frames = items
            .iter()
            .map(|it| self.prepare(&it.observation))
            .collect::<Result<Vec<_>>>()?;
        let mut out = GridState::new(self.state.points().to_vec())?;
        for (i, &p0) in self.state.points().iter().enumerate() {
            for (frame, it) in frames.iter().zip(items) {
                out.add_score(i, frame.increment(it.motion.trial_angle(p0, it.bs))?);
            }
        }
        for _ in items {
            out.advance();
        }
        Ok(out)
    }

    pub fn step_snapshot(
        &mut self,
        obs: &Observation<T>,
        motion: &MotionSnapshot<T>,
        bs: Position<T>,
    ) -> Result<PositionEstimate<T>> {
        let frame = self.prepare(obs)?;
        for i in 0..self.state.len() {
            let inc = frame.increment(motion.trial_angle(self.state.points()[i], bs))?;
            self.state.add_score(i, inc);
        }
        self.state.advance();
        Ok(self.state.estimate(EstimatorKind::MaxPower, motion))
    }
}

impl<T: Real> PositionEstimator<T> for MaxPower<T> {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::MaxPower
    }

    fn state(&self) -> &GridState<T> {
        &self.state
    }

    fn step(&mut self, obs: &Observation<T>, motion: &MotionHistory<T>, bs: Position<T>) -> Result<PositionEstimate<T>> {
        self.step_snapshot(obs, &MotionSnapshot::from(motion), bs)
    }
}
