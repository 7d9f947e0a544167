use otfs_core::ddmodem::{OtfsGrid, DEFAULT_MAX_HYPOTHESES};
use otfs_core::engine::{run_sweep, ChannelModel, Mode, RunOptions, SweepConfig, Waveform};
use otfs_core::fading::PathSpec;
use otfs_core::modulation::{ConstellationSpec, Scheme};

fn config(paths: Vec<PathSpec>, snr_db: Vec<f64>, waveform: Waveform) -> SweepConfig {
    SweepConfig {
        grid: OtfsGrid::new(2, 2, 15e3).unwrap(),
        constellation: ConstellationSpec {
            scheme: Scheme::Qpsk,
            order: 4,
        },
        channel: ChannelModel::Paths { paths },
        snr_db,
        max_frames: 4096,
        target_bit_errors: 200,
        master_seed: 11,
        waveform,
        mode: Mode::Siso,
        cp_len: None,
        users: 2,
        normalize: false,
        max_hypotheses: DEFAULT_MAX_HYPOTHESES,
    }
}

#[test]
fn noise_free_links_make_no_errors() {
    let paths = vec![PathSpec::new(1.0, 0.5, 0, 0), PathSpec::new(2.0, 0.5, 1, 1)];
    for w in [Waveform::Otfs, Waveform::Ofdm] {
        let curve = run_sweep(
            &config(paths.clone(), vec![150.0, 200.0], w),
            &RunOptions::default(),
        )
        .unwrap();
        for p in &curve.points {
            assert_eq!(p.bit_errors, 0, "{} at {} dB", w.name(), p.snr_db);
            assert_eq!(p.frames, 4096);
            assert_eq!((p.ber, p.ci_low), (0.0, 0.0));
            assert!(p.ci_high > 0.0 && p.ci_high < 1e-2);
        }
        assert!(curve.warnings.iter().any(|m| m.contains("frame budget")));
    }
}

#[test]
fn ber_falls_with_snr() {
    let paths = vec![
        PathSpec::new(1.0, 2.0 / 3.0, 0, 0),
        PathSpec::new(2.0, 1.0 / 3.0, 1, 1),
    ];
    let mut cfg = config(paths, vec![0.0, 5.0, 10.0, 15.0], Waveform::Otfs);
    cfg.max_frames = 1_000_000;
    let curve = run_sweep(&cfg, &RunOptions::default()).unwrap();
    for w in curve.points.windows(2) {
        assert!(w[1].ber < w[0].ber, "{:?}", curve.points);
        // each simulated point lies below the previous one's interval
        assert!(w[1].ci_high < w[0].ci_low);
    }
    for p in &curve.points {
        assert!(p.bit_errors >= 200);
        assert!(p.ci_low <= p.ber && p.ber <= p.ci_high);
    }
}

#[cfg(feature = "parallel")]
#[test]
fn default_pool_matches_sequential() {
    let cfg = config(
        vec![PathSpec::new(1.0, 1.0, 0, 0)],
        vec![5.0, 10.0],
        Waveform::Ofdm,
    );
    let seq = run_sweep(
        &cfg,
        &RunOptions {
            workers: Some(1),
            progress: None,
        },
    )
    .unwrap();
    let par = run_sweep(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(seq, par);
}
