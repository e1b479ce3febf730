//! `pmlpos` batch front end.
//!
//! Usage errors exit with status 2 (clap's convention), library errors with 1.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use pmlpos::channel::ChannelParams;
use pmlpos::estimators::EstimatorKind;
use pmlpos::geometry::{global_to_local, los_bearing, ArrayConfig};
use pmlpos::harness::feasibility::{DEFAULT_MARGIN, STATIONARITY_HORIZON_S};
use pmlpos::harness::output::{rmse_path, trace_path, write_file, write_header, write_rmse_csv, write_trace_csv};
use pmlpos::harness::validate::run_validation;
use pmlpos::harness::{
    feasibility_with, run_trials, sampling_curve, FeasibilityRequest, Scenario, ScenarioConfig, StationarityQuery,
    TrialStream, PRESETS,
};
use pmlpos::spectral::{write_pseudospectrum_csv, AngularGrid, SpectralEstimator};
use pmlpos::{Error, Real, Result};

#[derive(Parser, Debug)]
#[command(name = "pmlpos", version, about = "Direct position estimation for a mobile ULA in multipath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo campaign and write RMSE (and optional trace) CSVs.
    Simulate(SimulateArgs),
    /// Flat/slow-fading parameter check and T(B) samples.
    Feasibility(FeasibilityArgs),
    /// Pseudospectrum of one synthesized observation.
    Spectrum(SpectrumArgs),
    /// Run the built-in invariant and oracle checks.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["scenario", "preset"])))]
struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, value_parser = existing_file)]
    scenario: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long, value_parser = preset_name)]
    preset: Option<String>,
    /// `key=value` override with a dotted key, e.g. `array.elements=16`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replaces the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "PMLPOS_OUT_DIR", default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Replaces the number of trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Also write per-step traces of the first N trials.
    #[arg(long, default_value_t = 0)]
    traces: u64,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Args, Debug)]
struct FeasibilityArgs {
    /// Doppler spread B_D, Hz.
    #[arg(long)]
    bd: f64,
    /// Coherence bandwidth B_c, Hz.
    #[arg(long)]
    bc: f64,
    /// Roll-off factor.
    #[arg(long)]
    alpha: f64,
    /// Observation time, s.
    #[arg(long)]
    tobs: f64,
    /// Coherence time, s (default 1/B_D).
    #[arg(long)]
    tc: Option<f64>,
    /// Factor standing for "much larger/smaller".
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// BS distance for the stationarity time, m.
    #[arg(long, requires = "speed_kmh")]
    distance: Option<f64>,
    /// Receiver speed for the stationarity time, km/h.
    #[arg(long, requires = "distance")]
    speed_kmh: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    kappa: f64,
    #[arg(long, default_value_t = 64)]
    elements: usize,
    #[arg(long, default_value_t = 5.9e9)]
    carrier: f64,
    /// Samples per T(B) curve.
    #[arg(long, default_value_t = 50)]
    curve_points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Broadcast index, starting at 1.
    #[arg(long, default_value_t = 1)]
    event: usize,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn existing_file(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("scenario file '{s}' does not exist"))
    }
}

fn preset_name(s: &str) -> std::result::Result<String, String> {
    if PRESETS.iter().any(|(n, _)| *n == s) {
        Ok(s.to_string())
    } else {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        Err(format!("unknown preset '{s}' (available: {})", names.join(", ")))
    }
}

fn load(args: &ScenarioArgs, extra: &[String]) -> Result<ScenarioConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("master_seed={seed}"));
    }
    overrides.extend_from_slice(extra);
    match (&args.scenario, &args.preset) {
        (Some(path), _) => ScenarioConfig::from_path(path, &overrides),
        (None, Some(name)) => ScenarioConfig::preset_with_overrides(name, &overrides),
        (None, None) => Err(Error::Config("no scenario given".into())),
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let extra: Vec<String> = args.trials.map(|n| format!("trials={n}")).into_iter().collect();
    let cfg = load(&args.scenario, &extra)?;
    let scenario = Scenario::new(cfg)?;
    match args.precision {
        Precision::F64 => simulate_in::<f64>(&scenario, args),
        Precision::F32 => simulate_in::<f32>(&scenario, args),
    }
}

fn simulate_in<T: Real>(scenario: &Scenario, args: &SimulateArgs) -> Result<()> {
    let cfg = scenario.config();
    let (acc, outputs) = run_trials::<T>(scenario, 0..cfg.trials)?;
    let series = acc.rmse();
    let dir = &args.out.out;
    let path = rmse_path(dir, cfg);
    write_file(&path, |w| write_rmse_csv(w, cfg, &series))?;
    println!("{}", path.display());
    for o in outputs.iter().take(args.traces as usize) {
        let p = trace_path(dir, cfg, o.trial);
        write_file(&p, |w| write_trace_csv(w, cfg, o))?;
        println!("{}", p.display());
    }
    let end = cfg.duration_s;
    for kind in EstimatorKind::ALL {
        if let Some(m) = series.window_mean(kind, end - 2.0, end) {
            println!("{:<12} final-2s rmse = {m:.3} m", kind.label());
        }
    }
    let d = acc.diagnostics();
    if d.padded_steps > 0 || d.degenerate_steps > 0 {
        eprintln!(
            "note: {} steps padded with non-peak directions, {} with a flat pseudospectrum",
            d.padded_steps, d.degenerate_steps
        );
    }
    Ok(())
}

fn feasibility(args: &FeasibilityArgs) -> Result<()> {
    let mut channel = ChannelParams::<f64>::vehicular_defaults(1.0);
    channel.doppler_spread = args.bd;
    channel.coherence_bandwidth = args.bc;
    channel.carrier_hz = args.carrier;
    let stationarity = match (args.distance, args.speed_kmh) {
        (Some(distance), Some(kmh)) => Some(StationarityQuery {
            distance,
            speed: kmh / 3.6,
            kappa: args.kappa,
            array: ArrayConfig::new(args.elements, (args.elements / 2).max(1), args.carrier)?,
        }),
        _ => None,
    };
    let report = feasibility_with(
        &channel,
        &FeasibilityRequest {
            alpha: args.alpha,
            observation_time: args.tobs,
            coherence_time: args.tc,
            margin: args.margin,
            stationarity,
        },
    )?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "alpha = {}", report.alpha)?;
    writeln!(out, "T_obs = {:e} s", report.observation_time)?;
    writeln!(out, "T_c = {:e} s", report.coherence_time)?;
    writeln!(out, "B in [{}, {}] Hz", report.bandwidth_min, report.bandwidth_max)?;
    writeln!(out, "B = {} Hz", report.bandwidth)?;
    writeln!(out, "T = {:e} s", report.sampling_interval)?;
    writeln!(out, "N = {}", report.snapshots)?;
    if let Some(s) = report.stationarity_time {
        if s.capped {
            writeln!(out, "dT >= {STATIONARITY_HORIZON_S} s (threshold never crossed)")?;
        } else {
            writeln!(out, "dT = {:.3} ms", s.seconds * 1e3)?;
        }
    }
    drop(out);

    let path = args.out.out.join("feasibility_curve.csv");
    write_file(&path, |w| {
        writeln!(w, "# bd_hz={} bc_hz={} margin={}", args.bd, args.bc, args.margin)?;
        writeln!(w, "alpha,bandwidth_hz,sampling_interval_s")?;
        for alpha in [0.0, 0.5, 1.0] {
            for (b, t) in sampling_curve(&channel, alpha, args.margin, args.curve_points) {
                writeln!(w, "{alpha},{b},{t}")?;
            }
        }
        Ok(())
    })?;
    println!("{}", path.display());
    Ok(())
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let cfg = load(&args.scenario, &[])?;
    if args.event == 0 || args.event > cfg.event_count() {
        return Err(Error::InvalidParameter(format!(
            "event must lie in 1..={}, got {}",
            cfg.event_count(),
            args.event
        )));
    }
    let scenario = Scenario::new(cfg)?;
    let cfg = scenario.config();
    let seed = pmlpos::harness::trial_seed(cfg.master_seed, args.trial);
    let mut stream = TrialStream::<f64>::new(&scenario, seed)?;
    let mut event = None;
    while let Some(ev) = stream.next_event() {
        let ev = ev?;
        if ev.k == args.event {
            event = Some(ev);
            break;
        }
    }
    let ev = event.ok_or_else(|| Error::InvalidParameter("event not reached".into()))?;
    let estimator = SpectralEstimator::new(
        cfg.array_config()?,
        AngularGrid::uniform_in_sine(cfg.array.angular_grid_points)?,
        cfg.signal_dim()?,
    )?
    .with_loading(cfg.array.loading);
    let analysis = estimator.analyze(&ev.observation)?;

    let path = args.out.out.join(format!("spectrum_{}_{}_{}.csv", cfg.name, args.trial, ev.k));
    write_file(&path, |w| {
        write_header(w, cfg, seed)?;
        writeln!(w, "# trial={} k={} t={} bs={}", args.trial, ev.k, ev.time, ev.bs)?;
        write_pseudospectrum_csv(w, estimator.grid(), &analysis.estimates.pseudospectrum)
    })?;

    let los = global_to_local(los_bearing(ev.bs_position, ev.truth)?, ev.true_heading);
    println!(
        "event {} t={:.3} s bs={} paths={} true LOS {:.3} deg",
        ev.k,
        ev.time,
        ev.bs,
        ev.realization.path_count(),
        los.radians().to_degrees()
    );
    for (a, g) in analysis.estimates.angles.iter().zip(analysis.estimates.amplitudes.iter()) {
        println!("  {:>9.3} deg  |alpha| = {:.4e}", a.radians().to_degrees(), g.norm());
    }
    println!("{}", path.display());
    Ok(())
}

fn validate(args: &ValidateArgs) -> bool {
    let results = run_validation(args.seed);
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    results.iter().all(|r| r.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Feasibility(a) => feasibility(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Validate(a) => {
            return if validate(a) { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
