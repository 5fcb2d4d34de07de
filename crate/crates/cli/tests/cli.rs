use std::path::PathBuf;
use std::process::{Command, Output};

fn phasekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasekit"))
        .args(args)
        .output()
        .expect("spawn phasekit")
}

fn scenario(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn tmp(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("phasekit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

fn columns(out: &Output) -> Vec<Vec<f64>> {
    phasekit::io::read_columns(&String::from_utf8_lossy(&out.stdout)).unwrap()
}

fn band_mean(f: &[f64], p: &[f64], lo: f64, hi: f64) -> f64 {
    let v: Vec<f64> = f.iter().zip(p).filter(|(f, _)| **f >= lo && **f <= hi).map(|(_, p)| *p).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn demod_tone_reports_offset() {
    let out = phasekit(&[
        "demod", "--tone", "1e6,1.0", "--offset", "1000", "--fint", "100000", "--fout", "4000", "--duration", "10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cols = columns(&out);
    assert_eq!(cols.len(), 3);
    let mean = cols[1].iter().sum::<f64>() / cols[1].len() as f64;
    assert!((mean - 1000.0).abs() < 1e-3, "mean {mean}");
}

#[test]
fn demod_reads_raw_text() {
    let raw = tmp("raw.txt");
    let rate = 4e6;
    let text: String = (0..400_000)
        .map(|n| format!("{:.17e}\n", 0.5 * (std::f64::consts::TAU * 1.0002e6 * n as f64 / rate).sin()))
        .collect();
    std::fs::write(&raw, text).unwrap();
    let out = phasekit(&["demod", "--input", &raw]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cols = columns(&out);
    let mean = cols[1].iter().sum::<f64>() / cols[1].len() as f64;
    assert!((mean - 200.0).abs() < 1e-6, "mean {mean}");
    let amp = cols[2].iter().sum::<f64>() / cols[2].len() as f64;
    assert!((amp - 0.5).abs() < 0.01, "amplitude {amp}");
}

#[test]
fn simulate_is_deterministic() {
    let (a, b, c) = (tmp("a.acq"), tmp("b.acq"), tmp("c.acq"));
    let sc = scenario("heterodyne.toml");
    for (path, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        let out = phasekit(&["simulate", "--scenario", &sc, "--duration", "2", "--seed", seed, "--out", path]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn psd_matches_configured_fiber_level() {
    let acq = tmp("fiber.acq");
    let out = phasekit(&["simulate", "--scenario", &scenario("fiber_only.toml"), "--duration", "30", "--out", &acq]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let level = 0.1;
    // truth channel and both round-trip legs in the beatnote
    for (channel, expected) in [("eta", level), ("dnu1", 4.0 * level)] {
        let out = phasekit(&["analyze", "psd", &acq, "--channel", channel, "--segment", "4096"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let cols = columns(&out);
        let db = 10.0 * (band_mean(&cols[0], &cols[1], 1.0, 100.0) / expected).log10();
        assert!(db.abs() < 1.0, "{channel}: {db:.2} dB");
    }
    let out = phasekit(&["analyze", "adev", &acq, "--channel", "dnu1"]);
    assert!(out.status.success());
    let cols = columns(&out);
    assert_eq!(cols.len(), 3);
    // white frequency noise well above the decimator corner
    let k = cols[0].iter().position(|&t| (t - 0.128).abs() < 1e-9).unwrap();
    let expected = (4.0 * level / (2.0 * cols[0][k])).sqrt();
    assert!((cols[1][k] / expected - 1.0).abs() < 0.15, "{} vs {expected}", cols[1][k]);
}

#[test]
fn fit_recovers_laser_drift() {
    let acq = tmp("het.acq");
    let out = phasekit(&["simulate", "--scenario", &scenario("heterodyne.toml"), "--duration", "10", "--out", &acq]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = phasekit(&["analyze", "fit", &acq, "--x", "common_time", "--y", "rho1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let slope: f64 = text.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((slope - 0.5).abs() < 0.05, "{text}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(phasekit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(phasekit(&["demod", "--tone", "1e6"]).status.code(), Some(1));
    assert_eq!(phasekit(&["demod"]).status.code(), Some(1));
    assert_eq!(phasekit(&["demod", "--tone", "1e6,1", "--fint", "7"]).status.code(), Some(1));
    assert_eq!(phasekit(&["selftest", "--criterion", "99"]).status.code(), Some(1));
    assert_eq!(phasekit(&["--help"]).status.code(), Some(0));
}

#[test]
fn corrupt_files_exit_two() {
    let acq = tmp("corrupt.acq");
    let out = phasekit(&["simulate", "--duration", "1", "--out", &acq]);
    assert!(out.status.success());
    let mut bytes = std::fs::read(&acq).unwrap();
    let n = bytes.len();
    bytes[n / 2] ^= 0x10;
    std::fs::write(&acq, &bytes).unwrap();
    let out = phasekit(&["analyze", "psd", &acq]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&acq, b"not a file").unwrap();
    assert_eq!(phasekit(&["analyze", "info", &acq]).status.code(), Some(2));
    assert_eq!(phasekit(&["analyze", "info", &tmp("missing.acq")]).status.code(), Some(2));
}

#[test]
fn selftest_runs_selected_criteria() {
    let out = phasekit(&["selftest", "--criterion", "1", "--criterion", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("[PASS]").count(), 2);
}
