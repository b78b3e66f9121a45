use wideband_doa::eval::{evaluate, match_and_score, Axis, ExperimentConfig};
use wideband_doa::geometry::UlaConfig;
use wideband_doa::pipelines::{run_method, FrontEnd, Method, MethodParams};
use wideband_doa::simulate::{gen_source, synthesize, NoiseKind, Scene, SceneSource, SourceKind};

fn single_source_scene<T: wideband_doa::Real>(angle: f64) -> Scene<T> {
    Scene {
        sample_rate: T::lit(16000.0),
        sources: vec![SceneSource {
            angle: T::lit(angle),
            waveform: gen_source(&SourceKind::Speech, 1.0, 16000.0, 8).unwrap(),
            kind: "speech".into(),
        }],
        noise_kind: NoiseKind::White,
        snr_db: None,
        sir_db: T::zero(),
        seed: 8,
    }
}

#[test]
fn single_precision_pipeline() {
    let cfg = UlaConfig::<f32>::reference_setup();
    let rec = synthesize(&single_source_scene::<f32>(75.0), &cfg).unwrap();
    let params = MethodParams {
        sources: 1,
        ..MethodParams::default()
    };
    let fe = FrontEnd::prepare(&rec, &cfg, &params).unwrap();
    for m in [Method::Fss, Method::SsppFss, Method::SsppWemFss] {
        let out = run_method(m, &fe).unwrap();
        assert!((out.estimates[0] - 75.0).abs() <= 1.0, "{m}: {:?}", out.estimates);
    }
}

#[test]
fn methods_share_one_front_end() {
    let cfg = UlaConfig::<f64>::reference_setup();
    let rec = synthesize(&single_source_scene::<f64>(120.0), &cfg).unwrap();
    let params = MethodParams {
        sources: 1,
        ..MethodParams::default()
    };
    let a = FrontEnd::prepare(&rec, &cfg, &params).unwrap();
    let b = FrontEnd::prepare(&rec, &cfg, &params).unwrap();
    for bin in a.band.clone() {
        assert_eq!(a.snapshots.get(3, bin), b.snapshots.get(3, bin));
    }
    for m in Method::ALL {
        assert_eq!(run_method(m, &a).unwrap().estimates, run_method(m, &b).unwrap().estimates);
    }
}

#[test]
fn noiseless_single_trial_is_exact() {
    let mut c = ExperimentConfig::default();
    c.experiment.trials = 1;
    c.experiment.sources = vec![1];
    c.experiment.snr_db = vec![0.0];
    c.experiment.snapshots = vec![41];
    c.scene.snr_db = None;
    let report = evaluate(&c).unwrap();
    for r in report.rows_for(Axis::Snapshots) {
        assert!(r.rmse <= c.params.grid_step, "{}: {}", r.method, r.rmse);
        assert_eq!(r.detection_rate, 1.0);
    }
}

#[test]
fn report_has_one_row_per_cell() {
    let mut c = ExperimentConfig::default();
    c.experiment.trials = 1;
    c.experiment.methods = vec![Method::Iss, Method::SsppFss];
    c.experiment.snapshots = vec![21];
    let report = evaluate(&c).unwrap();
    assert_eq!(report.rows_for(Axis::Snr).count(), 14);
    assert!(report.rows.iter().all(|r| r.rmse >= 0.0 && (0.0..=1.0).contains(&r.detection_rate)));
    assert!(report.rows.iter().all(|r| r.rmse <= 10.0));
}

#[test]
fn scores_are_capped() {
    let e = match_and_score(&[10.0, 170.0], &[60.0, 95.0]);
    assert!(e.iter().all(|&x| x <= 10.0));
}
