use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{EstimatorKind, GridState, MotionSnapshot, PositionEstimate, PositionEstimator, ReplayItem};
use crate::channel::Observation;
use crate::error::Result;
use crate::geometry::{steering, ArrayConfig, LocalAoa, MotionHistory, Position};
use crate::scalar::{creal, dotc, CVector, Real};

/// How the single-path amplitude `γ̂` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRule {
    /// Least-squares minimizer `a^H ȳ / (M·c̄̄)`.
    #[default]
    LeastSquares,
    /// `Σ_n |a^H y_n c_n*|² / Σ_n ‖a c_n‖²`, kept for comparison studies.
    SquaredMagnitude,
}

/// Single-path DPE: multipath is treated as white noise and the LOS-only
/// residual is accumulated; the best hypothesis has the smallest sum.
#[derive(Debug, Clone)]
pub struct SinglePath<T> {
    cfg: ArrayConfig<T>,
    rule: GammaRule,
    state: GridState<T>,
}

#[derive(Debug, Clone)]
pub struct SinglePathFrame<T> {
    cfg: ArrayConfig<T>,
    rule: GammaRule,
    observation: Observation<T>,
    ybar: CVector<T>,
    cbar: T,
    energy: T,
}

/// `(γ̂, r)` with `r = Σ_n ‖y_n − γ̂·a(θ)·c_n‖²`, expanded as
/// `Σ‖y‖² − 2Re(γ̂*·a^H ȳ) + |γ̂|²·M·c̄̄` and clamped at zero.
pub fn single_path_residual<T: Real>(
    obs: &Observation<T>,
    aoa: LocalAoa<T>,
    cfg: &ArrayConfig<T>,
    rule: GammaRule,
) -> (Complex<T>, T) {
    let frame = SinglePathFrame::new(obs, *cfg, rule);
    frame.fit(aoa)
}

impl<T: Real> SinglePathFrame<T> {
    pub fn new(obs: &Observation<T>, cfg: ArrayConfig<T>, rule: GammaRule) -> Self {
        Self {
            cfg,
            rule,
            ybar: obs.matched_sum(),
            cbar: obs.symbol_energy(),
            energy: obs.sample_energy(),
            observation: obs.clone(),
        }
    }

    pub fn fit(&self, aoa: LocalAoa<T>) -> (Complex<T>, T) {
        let m = self.cfg.element_count();
        let a = steering(aoa, m, &self.cfg);
        let m_t = T::from_usize(m).unwrap();
        let ahy = dotc(&a, &self.ybar);
        let gamma = match self.rule {
            GammaRule::LeastSquares => ahy / creal(m_t * self.cbar),
            GammaRule::SquaredMagnitude => {
                let num = self
                    .observation
                    .samples
                    .column_iter()
                    .zip(self.observation.symbols.iter())
                    .fold(T::zero(), |acc, (y, c)| {
                        acc + (dotc(&a, &y.into_owned()) * c.conj()).norm_sqr()
                    });
                creal(num / (m_t * self.cbar))
            }
        };
        let two = T::lit(2.0);
        let r = self.energy - two * (gamma.conj() * ahy).re + gamma.norm_sqr() * m_t * self.cbar;
        (gamma, r.max(T::zero()))
    }

    /// Residual for a hypothesis; `Σ‖y‖²` (γ̂ = 0) when the angle is undefined.
    pub fn increment(&self, trial: Option<LocalAoa<T>>) -> T {
        match trial {
            Some(a) => self.fit(a).1,
            None => self.energy,
        }
    }
}

impl<T: Real> SinglePath<T> {
    pub fn new(points: Vec<Position<T>>, cfg: ArrayConfig<T>, rule: GammaRule) -> Result<Self> {
        Ok(Self {
            cfg,
            rule,
            state: GridState::new(points)?,
        })
    }

    pub fn prepare(&self, obs: &Observation<T>) -> SinglePathFrame<T> {
        SinglePathFrame::new(obs, self.cfg, self.rule)
    }

    pub fn evaluate_batch(&self, items: &[ReplayItem<T>]) -> Result<GridState<T>> {
        let frames: Vec<_> = items.iter().map(|it| self.prepare(&it.observation)).collect();
        let mut out = GridState::new(self.state.points().to_vec())?;
        for (i, &p0) in self.state.points().iter().enumerate() {
            for (frame, it) in frames.iter().zip(items) {
                out.add_score(i, frame.increment(it.motion.trial_angle(p0, it.bs)));
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
        let frame = self.prepare(obs);
        for i in 0..self.state.len() {
            let inc = frame.increment(motion.trial_angle(self.state.points()[i], bs));
            self.state.add_score(i, inc);
        }
        self.state.advance();
        Ok(self.state.estimate(EstimatorKind::SinglePath, motion))
    }
}

impl<T: Real> PositionEstimator<T> for SinglePath<T> {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::SinglePath
    }

    fn state(&self) -> &GridState<T> {
        &self.state
    }

    fn step(&mut self, obs: &Observation<T>, motion: &MotionHistory<T>, bs: Position<T>) -> Result<PositionEstimate<T>> {
        self.step_snapshot(obs, &MotionSnapshot::from(motion), bs)
    }
}
