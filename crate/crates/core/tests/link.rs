//! Two-board link experiments checked against the link equations.

use phasekit::acceptance::oracle;
use phasekit::analysis::welch_psd;
use phasekit::dsp::DemodConfig;
use phasekit::link::{combine_heterodyne, run_two_board_experiment, BoardInstance, SyncExperiment};
use phasekit::signal::{simulate_link, LinkScenario, NoiseSpec, Scheme};

fn band_db(a: &[f64], b: &[f64], rate: f64) -> f64 {
    let pa = welch_psd(a, rate, 1 << 17, 0.5).unwrap();
    let pb = welch_psd(b, rate, 1 << 17, 0.5).unwrap();
    10.0 * (pa.band_mean(1.0, 100.0).unwrap() / pb.band_mean(1.0, 100.0).unwrap()).log10()
}

#[test]
fn heterodyne_laser_noise_separates_below_one_over_tau() {
    let base = LinkScenario::default();
    let scenario = LinkScenario {
        laser1: NoiseSpec {
            linear_drift: 0.0,
            ..base.laser1
        },
        laser2: base.laser2,
        ..LinkScenario::quiet(Scheme::Heterodyne)
    };
    let s = simulate_link(&scenario, 20.0, 100e3).unwrap();
    let sum: Vec<f64> = s.pd1.iter().zip(&s.pd2).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = s.pd1.iter().zip(&s.pd2).map(|(a, b)| a - b).collect();
    let twice: Vec<f64> = s.rho2().iter().zip(s.rho1()).map(|(a, b)| 2.0 * (a - b)).collect();
    let miss: Vec<f64> = diff.iter().zip(&twice).map(|(a, b)| a - b).collect();
    // both leftovers scale as (2πfτ)², about −17 dB at 100 Hz for 180 µs
    assert!(band_db(&sum, &diff, s.rate) < -15.0);
    assert!(band_db(&miss, &twice, s.rate) < -15.0);
}

#[test]
fn drift_only_heterodyne_run_tracks_relative_drift() {
    let scenario = LinkScenario {
        laser1: NoiseSpec {
            linear_drift: 0.5,
            ..Default::default()
        },
        ..LinkScenario::quiet(Scheme::Heterodyne)
    };
    let exp = SyncExperiment::new(BoardInstance::new(DemodConfig::nominal(100e3, 1e3).unwrap()), scenario);
    let acq = run_two_board_experiment(&exp, 20.0, 3).unwrap();
    let (_, laser) = combine_heterodyne(&acq).unwrap();
    let truth = acq.truth.as_ref().unwrap();
    let tail = acq.len() / 2..acq.len();
    for k in tail {
        let relative = truth.rho2[k] - truth.rho1[k];
        assert!((laser[k] - relative).abs() < 1e-3, "{k}: {} vs {relative}", laser[k]);
        assert!(acq.dnu1[k].abs() < 1e-3 && acq.dnu2[k].abs() < 1e-3);
    }
    // ten seconds in, the lasers are 5 Hz apart
    assert!((truth.rho1[acq.len() / 2] - 5.0).abs() < 0.1);
}

#[test]
fn start_offset_spread_over_repeated_runs() {
    let exp = SyncExperiment::new(
        BoardInstance::new(DemodConfig::nominal(100e3, 1e3).unwrap()),
        LinkScenario::quiet(Scheme::SelfHeterodyne),
    );
    let offsets: Vec<f64> = (0..30)
        .map(|seed| run_two_board_experiment(&exp, 0.05, seed).unwrap().sync.start_offset_error)
        .collect();
    let sd = oracle::std_dev(&offsets);
    // two boards with independent 5 µs check grids: 5 µs/√6 ≈ 2.04 µs
    assert!(sd > 1.3e-6 && sd < 2.8e-6, "{sd}");
    assert!(offsets.iter().all(|o| o.abs() < 5.5e-6));
}
