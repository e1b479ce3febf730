//! Runs a preset (with optional `key=value` overrides) and prints RMSE
//! summaries per estimator.
//!
//! cargo run --release --example campaign -- ci_1bs trials=10

use std::time::Instant;

use pmlpos::estimators::EstimatorKind;
use pmlpos::harness::{run_monte_carlo, Scenario, ScenarioConfig};

fn main() -> pmlpos::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "ci_1bs".into());
    let overrides: Vec<String> = args.collect();
    let cfg = ScenarioConfig::preset_with_overrides(&preset, &overrides)?;
    let duration = cfg.duration_s;
    let scenario = Scenario::new(cfg)?;
    let start = Instant::now();
    let series = run_monte_carlo::<f64>(&scenario)?;
    println!("{} trials in {:.1?}", series.trials, start.elapsed());
    for kind in EstimatorKind::ALL {
        let Some(v) = series.get(kind) else { continue };
        let every_second: Vec<String> = series
            .timestamps
            .iter()
            .zip(v)
            .filter(|(t, _)| ((*t * 10.0).round() as i64) % 5 == 0)
            .map(|(t, e)| format!("{t:.1}:{e:.2}"))
            .collect();
        println!(
            "{:<12} first2s={:.3} last2s={:.3} below1.5@{:?}\n  {}",
            kind.label(),
            series.window_mean(kind, 0.0, 2.0).unwrap(),
            series.window_mean(kind, duration - 2.0, duration).unwrap(),
            series.first_time_below(kind, 1.5),
            every_second.join(" ")
        );
    }
    Ok(())
}
