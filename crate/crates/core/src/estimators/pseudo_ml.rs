use num_complex::Complex;

use super::{
    compressed_score, EstimatorKind, GridState, MotionSnapshot, PositionEstimate, PositionEstimator,
    ProjectorEstimate, ReplayItem, SpectralDiagnostics,
};
use crate::channel::Observation;
use crate::error::Result;
use crate::geometry::{steering, ArrayConfig, LocalAoa, MotionHistory, Position};
use crate::scalar::{czero, CVector, Real};
use crate::spectral::{AoaEstimateSet, SpectralEstimator};

/// Recursive pseudo maximum-likelihood estimator with LOS association.
#[derive(Debug, Clone)]
pub struct PseudoMl<T> {
    spectral: SpectralEstimator<T>,
    tolerance: T,
    state: GridState<T>,
    padded_steps: usize,
    degenerate_steps: usize,
}

/// Quantities of one observation shared by every grid hypothesis.
#[derive(Debug, Clone)]
pub struct PseudoMlFrame<T> {
    cfg: ArrayConfig<T>,
    angles: Vec<T>,
    amplitudes: Vec<Complex<T>>,
    /// Full-array steering vectors of the estimated directions.
    steering: Vec<CVector<T>>,
    /// `Σ_s α̂_s·a(θ̂_s)` over all estimated components.
    combined: CVector<T>,
    ybar: CVector<T>,
    cbar: T,
    padded: bool,
    degenerate: bool,
}

impl<T: Real> PseudoMlFrame<T> {
    pub fn new(estimates: &AoaEstimateSet<T>, obs: &Observation<T>, cfg: ArrayConfig<T>) -> Self {
        let m = cfg.element_count();
        let steering: Vec<CVector<T>> = estimates.angles.iter().map(|&a| steering(a, m, &cfg)).collect();
        let amplitudes: Vec<Complex<T>> = estimates.amplitudes.iter().copied().collect();
        let mut combined = CVector::from_element(m, czero());
        for (b, &alpha) in steering.iter().zip(&amplitudes) {
            combined += b * alpha;
        }
        Self {
            cfg,
            angles: estimates.angles.iter().map(|a| a.radians()).collect(),
            amplitudes,
            steering,
            combined,
            ybar: obs.matched_sum(),
            cbar: obs.symbol_energy(),
            padded: estimates.padded > 0,
            degenerate: estimates.degenerate,
        }
    }

    /// Whether MUSIC had to pad the direction set with non-peak grid points.
    pub fn padded(&self) -> bool {
        self.padded
    }

    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// Index of the estimated direction associated with the trial LOS angle:
    /// the closest one within `tolerance`, earliest index on ties.
    pub fn associate(&self, trial: LocalAoa<T>, tolerance: T) -> Option<usize> {
        let t = trial.radians();
        let mut best: Option<(usize, T)> = None;
        for (s, &a) in self.angles.iter().enumerate() {
            let d = (t - a).abs();
            if d <= tolerance && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((s, d));
            }
        }
        best.map(|(s, _)| s)
    }

    /// `x̂ = α̂★·a(θ̃) + Σ_{s≠★} α̂_s·a(θ̂_s)` for association `star`.
    pub fn reconstructed_signal(&self, trial: LocalAoa<T>, star: usize) -> CVector<T> {
        let alpha = self.amplitudes[star];
        let los = steering(trial, self.cfg.element_count(), &self.cfg);
        &self.combined - &self.steering[star] * alpha + los * alpha
    }

    pub fn projector(&self, trial: LocalAoa<T>, star: usize) -> Result<ProjectorEstimate<T>> {
        ProjectorEstimate::from_vector(&self.reconstructed_signal(trial, star))
    }

    /// Score increment for a hypothesis, or `None` when it is not associated.
    pub fn increment(&self, trial: Option<LocalAoa<T>>, tolerance: T) -> Option<T> {
        let trial = trial?;
        let star = self.associate(trial, tolerance)?;
        let p = self.projector(trial, star).ok()?;
        compressed_score(&p, &self.ybar, self.cbar).ok()
    }
}

impl<T: Real> PseudoMl<T> {
    /// `tolerance` is the association threshold δ in radians.
    pub fn new(points: Vec<Position<T>>, spectral: SpectralEstimator<T>, tolerance: T) -> Result<Self> {
        Ok(Self {
            spectral,
            tolerance,
            state: GridState::new(points)?,
            padded_steps: 0,
            degenerate_steps: 0,
        })
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn prepare(&self, obs: &Observation<T>) -> Result<PseudoMlFrame<T>> {
        let analysis = self.spectral.analyze(obs)?;
        Ok(PseudoMlFrame::new(&analysis.estimates, obs, *self.spectral.array()))
    }

    fn apply(&mut self, frame: &PseudoMlFrame<T>, motion: &MotionSnapshot<T>, bs: Position<T>) -> PositionEstimate<T> {
        self.padded_steps += usize::from(frame.padded);
        self.degenerate_steps += usize::from(frame.degenerate);
        for i in 0..self.state.len() {
            let trial = motion.trial_angle(self.state.points()[i], bs);
            match frame.increment(trial, self.tolerance) {
                Some(inc) => self.state.add_score(i, inc),
                None => self.state.add_miss(i),
            }
        }
        self.state.advance();
        self.state.estimate(EstimatorKind::PseudoMl, motion)
    }

    /// Evaluates the non-recursive objective over a whole batch: for every
    /// hypothesis, sums the associated terms and counts the rest.
    pub fn evaluate_batch(&self, items: &[ReplayItem<T>]) -> Result<GridState<T>> {
        let frames = items
            .iter()
            .map(|it| self.prepare(&it.observation))
            .collect::<Result<Vec<_>>>()?;
        let mut out = GridState::new(self.state.points().to_vec())?;
        for (i, &p0) in self.state.points().iter().enumerate() {
            for (frame, it) in frames.iter().zip(items) {
                match frame.increment(it.motion.trial_angle(p0, it.bs), self.tolerance) {
                    Some(inc) => out.add_score(i, inc),
                    None => out.add_miss(i),
                }
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
        Ok(self.apply(&frame, motion, bs))
    }
}

impl<T: Real> PositionEstimator<T> for PseudoMl<T> {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::PseudoMl
    }

    fn state(&self) -> &GridState<T> {
        &self.state
    }

    fn spectral_diagnostics(&self) -> SpectralDiagnostics {
        SpectralDiagnostics {
            padded_steps: self.padded_steps,
            degenerate_steps: self.degenerate_steps,
        }
    }

    fn step(&mut self, obs: &Observation<T>, motion: &MotionHistory<T>, bs: Position<T>) -> Result<PositionEstimate<T>> {
        self.step_snapshot(obs, &MotionSnapshot::from(motion), bs)
    }
}
