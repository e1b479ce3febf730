//! Monte Carlo campaigns and RMSE aggregation.

use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;

use super::trial::{run_trial, Scenario, TrialOutput};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, SpectralDiagnostics};
use crate::scalar::Real;

/// Running sums of squared errors per estimator and step. Accumulators of
/// disjoint trial sets can be merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorAccumulator {
    timestamps: Vec<f64>,
    sums: BTreeMap<EstimatorKind, Vec<f64>>,
    trials: u64,
    diagnostics: SpectralDiagnostics,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn diagnostics(&self) -> SpectralDiagnostics {
        self.diagnostics
    }

    pub fn add_trial(&mut self, out: &TrialOutput) -> Result<()> {
        let mut per: BTreeMap<EstimatorKind, Vec<(f64, f64)>> = BTreeMap::new();
        for r in &out.records {
            per.entry(r.estimator).or_default().push((r.time, r.error));
        }
        self.add_series(per)?;
        self.diagnostics.padded_steps += out.diagnostics.padded_steps;
        self.diagnostics.degenerate_steps += out.diagnostics.degenerate_steps;
        Ok(())
    }

    /// Adds one trial given as `(time, error)` sequences per estimator.
    pub fn add_series(&mut self, series: BTreeMap<EstimatorKind, Vec<(f64, f64)>>) -> Result<()> {
        for (kind, steps) in series {
            if self.timestamps.is_empty() && self.sums.is_empty() {
                self.timestamps = steps.iter().map(|s| s.0).collect();
            }
            if steps.len() != self.timestamps.len() || steps.iter().zip(&self.timestamps).any(|(s, &t)| s.0 != t) {
                return Err(Error::Dimension("trial timelines differ".into()));
            }
            let sums = self.sums.entry(kind).or_insert_with(|| vec![0.0; steps.len()]);
            for (acc, (_, e)) in sums.iter_mut().zip(&steps) {
                *acc += e * e;
            }
        }
        self.trials += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ErrorAccumulator) -> Result<()> {
        if other.trials == 0 {
            return Ok(());
        }
        if self.trials == 0 {
            *self = other.clone();
            return Ok(());
        }
        if self.timestamps != other.timestamps || self.sums.keys().ne(other.sums.keys()) {
            return Err(Error::Dimension("cannot merge accumulators of different campaigns".into()));
        }
        for (k, v) in &other.sums {
            for (a, b) in self.sums.get_mut(k).unwrap().iter_mut().zip(v) {
                *a += b;
            }
        }
        self.trials += other.trials;
        self.diagnostics.padded_steps += other.diagnostics.padded_steps;
        self.diagnostics.degenerate_steps += other.diagnostics.degenerate_steps;
        Ok(())
    }

    pub fn rmse(&self) -> RmseSeries {
        let n = self.trials.max(1) as f64;
        RmseSeries {
            timestamps: self.timestamps.clone(),
            rmse: self
                .sums
                .iter()
                .map(|(k, v)| (*k, v.iter().map(|s| (s / n).sqrt()).collect()))
                .collect(),
            trials: self.trials,
        }
    }
}

/// Root mean squared error per estimator over the broadcast timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseSeries {
    pub timestamps: Vec<f64>,
    pub rmse: BTreeMap<EstimatorKind, Vec<f64>>,
    pub trials: u64,
}

impl RmseSeries {
    pub fn get(&self, kind: EstimatorKind) -> Option<&[f64]> {
        self.rmse.get(&kind).map(Vec::as_slice)
    }

    /// Mean RMSE over steps with `from <= t <= to`.
    pub fn window_mean(&self, kind: EstimatorKind, from: f64, to: f64) -> Option<f64> {
        let v = self.get(kind)?;
        let sel: Vec<f64> = self
            .timestamps
            .iter()
            .zip(v)
            .filter(|(&t, _)| t >= from - 1e-9 && t <= to + 1e-9)
            .map(|(_, &e)| e)
            .collect();
        (!sel.is_empty()).then(|| sel.iter().sum::<f64>() / sel.len() as f64)
    }

    /// First time at which the RMSE is at or below `threshold`.
    pub fn first_time_below(&self, kind: EstimatorKind, threshold: f64) -> Option<f64> {
        let v = self.get(kind)?;
        self.timestamps.iter().zip(v).find(|(_, &e)| e <= threshold).map(|(&t, _)| t)
    }
}

/// Runs the trials in `trials` (in parallel) and accumulates their errors in
/// trial order, so the result does not depend on scheduling.
pub fn run_trials<T: Real>(scenario: &Scenario, trials: Range<u64>) -> Result<(ErrorAccumulator, Vec<TrialOutput>)> {
    let outputs = trials
        .into_par_iter()
        .map(|i| run_trial::<T>(scenario, i))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut acc = ErrorAccumulator::new();
    for o in &outputs {
        acc.add_trial(o)?;
    }
    Ok((acc, outputs))
}

pub fn run_monte_carlo<T: Real>(scenario: &Scenario) -> Result<RmseSeries> {
    let (acc, _) = run_trials::<T>(scenario, 0..scenario.config().trials)?;
    Ok(acc.rmse())
}
