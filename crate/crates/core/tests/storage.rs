//! Scenario file to acquisition file and back.

use std::f64::consts::TAU;

use phasekit::io::{read_columns, write_columns, AcquisitionFile, ScenarioFile, PHASE_LSB};
use phasekit::link::run_two_board_experiment;

const SCENARIO: &str = r#"
[board]
f_int = 100e3
f_out = 1e3

[link]
scheme = "heterodyne"

[run]
duration = 1.0
seed = 5
"#;

fn simulate(s: &ScenarioFile) -> Vec<u8> {
    let exp = s.experiment().unwrap();
    let acq = run_two_board_experiment(&exp, s.run.duration, s.run.seed).unwrap();
    AcquisitionFile::from_acquisition(&acq, s.demod().unwrap(), s.hash(), s.board.amplitude, s.run.chunk)
        .unwrap()
        .to_bytes()
        .unwrap()
}

#[test]
fn acquisition_round_trip() {
    let s = ScenarioFile::parse(SCENARIO).unwrap();
    let exp = s.experiment().unwrap();
    let acq = run_two_board_experiment(&exp, s.run.duration, s.run.seed).unwrap();
    let file = AcquisitionFile::from_acquisition(&acq, s.demod().unwrap(), s.hash(), 1.0, s.run.chunk).unwrap();
    let back = AcquisitionFile::from_bytes(&file.to_bytes().unwrap()).unwrap();
    assert!(back.gaps.is_empty());
    assert_eq!(back.header.scenario_hash, s.hash());
    assert_eq!(back.header.demod, s.demod().unwrap());
    let tol = 0.5 * PHASE_LSB * acq.rate / TAU * (1.0 + 1e-9);
    for (name, original) in [("dnu1", &acq.dnu1), ("dnu2", &acq.dnu2)] {
        let read = back.channel(name).unwrap();
        assert_eq!(read.len(), original.len());
        assert!(read.iter().zip(original.iter()).all(|(a, b)| (a - b).abs() <= tol), "{name}");
    }
    let truth = acq.truth.as_ref().unwrap();
    assert_eq!(back.channel("eta").unwrap(), truth.eta);
    assert_eq!(back.channel("f_drift").unwrap(), *acq.f_drift_record.as_ref().unwrap());
    assert_eq!(back.channel("common_time").unwrap(), acq.common_time);
}

#[test]
fn simulation_is_byte_reproducible() {
    let s = ScenarioFile::parse(SCENARIO).unwrap();
    assert_eq!(simulate(&s), simulate(&s));
    let other = ScenarioFile {
        run: phasekit::io::RunSettings { seed: 6, ..s.run },
        ..s.clone()
    };
    assert_ne!(simulate(&s), simulate(&other));
    assert_ne!(s.hash(), other.hash());
}

#[test]
fn columns_export_reads_back() {
    let x = [0.5, 1.0, 1.5];
    let y = [1e-3, -2.0, 3.25e7];
    let mut out = Vec::new();
    write_columns(&mut out, &["frequency", "value"], &[&x, &y]).unwrap();
    let cols = read_columns(std::str::from_utf8(&out).unwrap()).unwrap();
    assert_eq!(cols, vec![x.to_vec(), y.to_vec()]);
}
