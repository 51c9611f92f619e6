use sharedpilot::arbitration::AuthorityMode;
use sharedpilot::experiment::{read_csv, write_csv, TelemetryRow};
use sharedpilot::{run_experiment, ExperimentConfig, RunMetrics, RunMode};

fn csv_bytes(rows: &[TelemetryRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    buf
}

/// Hand-written hysteresis machine driven only by the logged risk values.
fn replay_authority(rows: &[TelemetryRow], lo: f64, hi: f64, min_gap: f64) -> Vec<(f64, AuthorityMode)> {
    let mut regime = AuthorityMode::Brain;
    let mut mode = AuthorityMode::Brain;
    let mut last: Option<f64> = None;
    rows.iter()
        .map(|r| {
            regime = if r.rho >= hi {
                AuthorityMode::Auto
            } else if r.rho <= lo {
                AuthorityMode::Brain
            } else if regime == AuthorityMode::Auto {
                AuthorityMode::Auto
            } else {
                AuthorityMode::Blend
            };
            let alpha = match regime {
                AuthorityMode::Auto => 0.0,
                AuthorityMode::Brain => 1.0,
                AuthorityMode::Blend => (hi - r.rho) / (hi - lo),
            };
            if regime != mode && last.is_none_or(|l| r.t - l >= min_gap - 1e-9) {
                mode = regime;
                last = Some(r.t);
            }
            (alpha, mode)
        })
        .collect()
}

#[test]
fn auto_lap_stays_under_regression_bound() {
    let cfg = ExperimentConfig::default();
    let bound = cfg.regression.expect("shipped config records a bound").auto_rms_cross_track;
    let out = run_experiment(&cfg, RunMode::Auto, cfg.seed).unwrap();
    assert_eq!(out.metrics.lap_completion, 1.0);
    assert!(out.metrics.rms_cross_track < bound, "{:?}", out.metrics);
    assert!(out.metrics.rms_cross_track <= out.metrics.max_cross_track);
    assert!(out.rows.iter().all(|r| r.alpha == 0.0 && r.mode == AuthorityMode::Auto));
}

#[test]
fn metrics_recomputed_from_csv_are_identical() {
    let cfg = ExperimentConfig::default();
    let out = run_experiment(&cfg, RunMode::Shared, 3).unwrap();
    let rows = read_csv(csv_bytes(&out.rows).as_slice()).unwrap();
    let track = cfg.track.build().unwrap();
    assert_eq!(RunMetrics::from_rows(&rows, &track), out.metrics);
}

#[test]
fn same_seed_gives_identical_csv() {
    let mut cfg = ExperimentConfig::default();
    cfg.duration = 30.0;
    let a = run_experiment(&cfg, RunMode::Shared, 11).unwrap();
    let b = run_experiment(&cfg, RunMode::Shared, 11).unwrap();
    assert_eq!(csv_bytes(&a.rows), csv_bytes(&b.rows));
    let c = run_experiment(&cfg, RunMode::Shared, 12).unwrap();
    assert_ne!(csv_bytes(&a.rows), csv_bytes(&c.rows));
}

#[test]
fn logged_authority_follows_the_risk_trace() {
    let cfg = ExperimentConfig::default();
    let a = cfg.arbiter;
    let out = run_experiment(&cfg, RunMode::Shared, 5).unwrap();
    let replay = replay_authority(&out.rows, a.rho_lo, a.rho_hi, 1.0 / a.max_switch_rate);
    assert!(out.metrics.mode_switches > 0, "trace should exercise switching");
    for (r, (alpha, mode)) in out.rows.iter().zip(replay) {
        assert!((r.alpha - alpha).abs() < 1e-12, "t={} alpha {} vs {alpha}", r.t, r.alpha);
        assert_eq!(r.mode, mode, "t={}", r.t);
    }
    let mut last: Option<f64> = None;
    for w in out.rows.windows(2) {
        if w[1].mode != w[0].mode {
            if let Some(l) = last {
                assert!(w[1].t - l >= 1.0 / a.max_switch_rate - 1e-9);
            }
            last = Some(w[1].t);
        }
    }
}

#[test]
fn perfect_channel_shared_matches_brain_only() {
    let mut cfg = ExperimentConfig::default();
    cfg.duration = 60.0;
    cfg.channel.accuracy = 1.0;
    cfg.channel.recognition_interval = 0.05;
    cfg.channel.latency = 0.0;
    let brain = run_experiment(&cfg, RunMode::Brain, 1).unwrap().metrics;
    let shared = run_experiment(&cfg, RunMode::Shared, 1).unwrap().metrics;
    assert!((shared.rms_cross_track - brain.rms_cross_track).abs() < 0.05, "{shared:?} {brain:?}");
    assert!((shared.lap_completion - brain.lap_completion).abs() < 0.02);
    assert!(shared.mean_alpha > 0.95);
}

#[test]
fn telemetry_invariants_hold() {
    let cfg = ExperimentConfig::default();
    let out = run_experiment(&cfg, RunMode::Shared, 2).unwrap();
    for (k, r) in out.rows.iter().enumerate() {
        assert!((r.t - k as f64 * cfg.dt).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&r.alpha));
        assert!(r.kp_eff >= 0.0 && r.ki_eff >= 0.0 && r.kd_eff >= 0.0);
        assert!((r.ref_z - 5.0).abs() < 1e-12);
    }
    let m = out.metrics;
    assert!(m.rms_cross_track <= m.max_cross_track);
    assert!((0.0..=1.0).contains(&m.lap_completion));
}
