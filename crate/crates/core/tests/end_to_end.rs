use pmlpos::estimators::EstimatorKind;
use pmlpos::harness::output::{write_rmse_csv, write_trace_csv};
use pmlpos::harness::{run_trial, run_trials, Scenario, ScenarioConfig};

fn small(extra: &[&str]) -> Scenario {
    let mut o = vec!["trials=4", "duration_s=2.0", "array.elements=12", "grid.half_width_m=5.0"];
    o.extend_from_slice(extra);
    Scenario::new(ScenarioConfig::preset_with_overrides("ci_1bs", &o).unwrap()).unwrap()
}

#[test]
fn line_of_sight_only_run_locks_onto_the_start_point() {
    let sc = small(&[
        "path_count=[0, 0]",
        "d_max=0",
        "p_nlos=0.0",
        "velocity_noise_fraction=0.0",
        "mobility.speed_knots_kmh=[[0.0, 36.0], [1.0, 36.0]]",
        "mobility.lateral_acceleration=0.0",
    ]);
    let out = run_trial::<f64>(&sc, 0).unwrap();
    let last_k = out.records.last().unwrap().k;
    for r in out.records.iter().filter(|r| r.k == last_k) {
        match r.estimator {
            EstimatorKind::PseudoMl | EstimatorKind::SinglePath => {
                assert!(r.error < 1e-6, "{}: {}", r.estimator, r.error);
                assert_eq!(r.initial, sc.config().p0());
            }
            EstimatorKind::MaxPower => assert!(r.error < 1.5, "max_power: {}", r.error),
        }
    }
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let render = || {
        let sc = small(&[]);
        let (acc, outs) = run_trials::<f64>(&sc, 0..3).unwrap();
        let mut rmse = Vec::new();
        write_rmse_csv(&mut rmse, sc.config(), &acc.rmse()).unwrap();
        let mut trace = Vec::new();
        write_trace_csv(&mut trace, sc.config(), &outs[1]).unwrap();
        (rmse, trace)
    };
    let (a, b) = (render(), render());
    assert_eq!(a, b);
    let text = String::from_utf8(a.0).unwrap();
    assert!(text.starts_with("# scenario=ci_1bs\n# config_sha256="));
    assert!(text.contains("\nt_s,estimator,rmse_m,trials\n"));
}

#[test]
fn different_master_seed_changes_the_run() {
    let a = run_trial::<f64>(&small(&[]), 0).unwrap();
    let b = run_trial::<f64>(&small(&["master_seed=7"]), 0).unwrap();
    assert_ne!(a.records, b.records);
}

#[test]
fn pooled_accumulators_equal_single_campaign() {
    let sc = small(&[]);
    let (all, outs_all) = run_trials::<f64>(&sc, 0..4).unwrap();
    let (mut first, outs_a) = run_trials::<f64>(&sc, 0..2).unwrap();
    let (second, outs_b) = run_trials::<f64>(&sc, 2..4).unwrap();
    assert_eq!(outs_all[..2], outs_a[..]);
    assert_eq!(outs_all[2..], outs_b[..]);
    first.merge(&second).unwrap();
    let (p, q) = (first.rmse(), all.rmse());
    assert_eq!(p.trials, 4);
    assert_eq!(p.timestamps, q.timestamps);
    for kind in EstimatorKind::ALL {
        for (x, y) in p.get(kind).unwrap().iter().zip(q.get(kind).unwrap()) {
            assert!((x - y).abs() <= 1e-12 * y.max(1.0));
        }
    }
}

#[test]
fn single_precision_tracks_double_precision() {
    let sc = small(&["path_count=[0, 0]", "d_max=0", "p_nlos=0.0", "velocity_noise_fraction=0.0"]);
    let a = run_trial::<f64>(&sc, 0).unwrap();
    let b = run_trial::<f32>(&sc, 0).unwrap();
    let last = |o: &pmlpos::harness::TrialOutput| {
        o.records.iter().rev().find(|r| r.estimator == EstimatorKind::PseudoMl).unwrap().error
    };
    assert!((last(&a) - last(&b)).abs() < 0.1, "{} vs {}", last(&a), last(&b));
}
