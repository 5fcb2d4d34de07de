//! `phasekit` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 data or integrity, 3 internal.

use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phasekit::acceptance::{find, run_all, Outcome};
use phasekit::analysis::{linear_fit, octave_taus, overlapping_adev, welch_psd};
use phasekit::dsp::{DemodConfig, OutputSample, Pipeline, NOMINAL_CARRIER};
use phasekit::io::{read_columns, write_columns, AcquisitionFile, ScenarioFile};
use phasekit::link::run_two_board_experiment;
use phasekit::signal::{digitize_bipolar, AdcModel, BeatnoteStream, NoiseSpec, ToneSpec};
use phasekit::Error;

#[derive(Parser)]
#[command(name = "phasekit", version, about = "IQ phase demodulation and fiber-link analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Demodulate a raw-sample file or a synthesized tone
    Demod(DemodArgs),
    /// Run a two-board link experiment into an acquisition file
    Simulate(SimulateArgs),
    /// Spectra, Allan deviation and fits of acquisition channels
    #[command(subcommand)]
    Analyze(Analyze),
    /// Run the acceptance suite
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RawFormat {
    /// Whitespace or comma separated text, first column
    Text,
    /// Little-endian f64
    F64le,
}

#[derive(Args)]
struct DemodArgs {
    /// Raw samples at 4·nu0
    #[arg(long, conflicts_with = "tone")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: RawFormat,
    /// Synthesize `carrier,amplitude` (Hz, V)
    #[arg(long, value_parser = parse_tone)]
    tone: Option<(f64, f64)>,
    /// Frequency offset added to the synthesized carrier, Hz
    #[arg(long, default_value_t = 0.0)]
    offset: f64,
    /// Demodulation carrier, Hz
    #[arg(long, default_value_t = NOMINAL_CARRIER)]
    nu0: f64,
    #[arg(long, default_value_t = 100e3)]
    fint: f64,
    #[arg(long, default_value_t = 1e3)]
    fout: f64,
    /// Length of the synthesized tone, s
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Pass the synthesized tone through the ADC model
    #[arg(long)]
    adc: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output columns (time, frequency, amplitude); stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML scenario; defaults apply to anything left out
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChannelArgs {
    file: PathBuf,
    #[arg(long, default_value = "dnu1")]
    channel: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Analyze {
    /// One-sided Welch PSD: frequency, value
    Psd {
        #[command(flatten)]
        input: ChannelArgs,
        #[arg(long, default_value_t = 8192)]
        segment: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
    },
    /// Overlapping Allan deviation at octave taus: tau, sigma, count
    Adev {
        #[command(flatten)]
        input: ChannelArgs,
        /// Fractional deviation relative to this carrier, Hz
        #[arg(long)]
        normalize: Option<f64>,
    },
    /// Least-squares line through two channels
    Fit {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Header and channel list
    Info { file: PathBuf },
}

#[derive(Args)]
struct SelftestArgs {
    /// Criteria to run; all if omitted
    #[arg(long = "criterion")]
    criteria: Vec<u8>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

fn parse_tone(s: &str) -> Result<(f64, f64), String> {
    let (f, a) = s.split_once(',').ok_or("expected CARRIER,AMPLITUDE")?;
    let f: f64 = f.trim().parse().map_err(|e| format!("carrier: {e}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("amplitude: {e}"))?;
    Ok((f, a))
}

enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) | Error::Parameter(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn read_raw(path: &Path, format: RawFormat) -> Result<Vec<f64>, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    match format {
        RawFormat::Text => {
            let text = String::from_utf8(bytes).map_err(|_| Failure::Data("raw file is not UTF-8 text".into()))?;
            Ok(read_columns(&text)?.into_iter().next().unwrap_or_default())
        }
        RawFormat::F64le => {
            if bytes.len() % 8 != 0 {
                return Err(Failure::Data(format!("{} bytes is not a whole number of f64", bytes.len())));
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect())
        }
    }
}

fn demod(args: DemodArgs) -> CliResult {
    let cfg = DemodConfig::new(args.nu0, args.fint, args.fout)?;
    let mut pipe = Pipeline::new(cfg)?;
    let mut out: Vec<OutputSample> = Vec::new();
    match (&args.input, args.tone) {
        (Some(path), _) => pipe.process(&read_raw(path, args.format)?, &mut out),
        (None, Some((carrier, amplitude))) => {
            let tone = ToneSpec::new(amplitude, carrier + args.offset, 0.0);
            let mut stream = BeatnoteStream::new(&tone, &NoiseSpec::default(), cfg.f_smp)?;
            let total = (args.duration * cfg.f_smp).round() as u64;
            let mut buf = vec![0.0; 1 << 16];
            let (mut done, mut block) = (0u64, 0u64);
            while done < total {
                let len = buf.len().min((total - done) as usize);
                let chunk = &mut buf[..len];
                stream.fill(chunk);
                if args.adc {
                    let model = AdcModel {
                        noise_seed: args.seed.wrapping_add(block),
                        ..AdcModel::default()
                    };
                    let (volts, clipped) = digitize_bipolar(chunk, &model);
                    if clipped > 0 {
                        return Err(Failure::Data(format!("{clipped} samples clipped by the ADC")));
                    }
                    chunk.copy_from_slice(&volts);
                }
                pipe.process(chunk, &mut out);
                done += len as u64;
                block += 1;
            }
        }
        (None, None) => return Err(Failure::Usage("demod needs --input or --tone".into())),
    }
    let settled: Vec<&OutputSample> = out.iter().filter(|s| !s.settling).collect();
    if settled.is_empty() {
        return Err(Failure::Data("record too short to fill the filters".into()));
    }
    let freq: Vec<f64> = settled.iter().map(|s| s.increment * cfg.f_out / TAU).collect();
    let amp: Vec<f64> = settled.iter().map(|s| s.amplitude).collect();
    let time: Vec<f64> = (0..freq.len()).map(|k| k as f64 / cfg.f_out).collect();
    let mut w = open_output(&args.out)?;
    write_columns(&mut w, &["time_s", "frequency_hz", "amplitude_v"], &[&time, &freq, &amp])?;
    w.flush()?;
    let n = freq.len() as f64;
    eprintln!(
        "{} output samples at {} Hz; mean frequency deviation {:.9} Hz; mean amplitude {:.6} V",
        freq.len(),
        cfg.f_out,
        freq.iter().sum::<f64>() / n,
        amp.iter().sum::<f64>() / n
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> CliResult {
    let mut scenario = match &args.scenario {
        Some(p) => ScenarioFile::load(p)?,
        None => ScenarioFile::default(),
    };
    if let Some(d) = args.duration {
        scenario.run.duration = d;
    }
    if let Some(s) = args.seed {
        scenario.run.seed = s;
    }
    let exp = scenario.experiment()?;
    let acq = run_two_board_experiment(&exp, scenario.run.duration, scenario.run.seed)?;
    let file = AcquisitionFile::from_acquisition(
        &acq,
        scenario.demod()?,
        scenario.hash(),
        scenario.board.amplitude,
        scenario.run.chunk,
    )?;
    let bytes = file.to_bytes()?;
    fs::write(&args.out, &bytes)?;
    eprintln!(
        "{} samples per board at {} Hz; start offset error {:.2} µs; scenario {}",
        acq.len(),
        acq.rate,
        acq.sync.start_offset_error * 1e6,
        &file.header.scenario_hash[..16]
    );
    Ok(())
}

fn load(path: &Path) -> Result<AcquisitionFile, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let file = AcquisitionFile::from_bytes(&bytes)?;
    for g in &file.gaps {
        eprintln!("stream {}: {} chunk(s) missing before sequence {}", g.stream, g.missing, g.sequence);
    }
    Ok(file)
}

fn channel(file: &AcquisitionFile, name: &str) -> Result<Vec<f64>, Failure> {
    file.channel(name).ok_or_else(|| {
        Failure::Usage(format!("no channel {name}; available: {}", file.channel_names().join(", ")))
    })
}

fn analyze(cmd: Analyze) -> CliResult {
    match cmd {
        Analyze::Psd {
            input,
            segment,
            overlap,
        } => {
            let file = load(&input.file)?;
            let x = channel(&file, &input.channel)?;
            let psd = welch_psd(&x, file.header.demod.f_out, segment.min(x.len()), overlap)?;
            let mut w = open_output(&input.out)?;
            write_columns(&mut w, &["frequency_hz", "psd_per_hz"], &[&psd.frequencies, &psd.values])?;
            w.flush()?;
        }
        Analyze::Adev { input, normalize } => {
            let file = load(&input.file)?;
            let mut x = channel(&file, &input.channel)?;
            if let Some(carrier) = normalize {
                x.iter_mut().for_each(|v| *v /= carrier);
            }
            let rate = file.header.demod.f_out;
            let adev = overlapping_adev(&x, rate, &octave_taus(x.len(), rate))?;
            let counts: Vec<f64> = adev.counts.iter().map(|&c| c as f64).collect();
            let mut w = open_output(&input.out)?;
            write_columns(&mut w, &["tau_s", "adev", "count"], &[&adev.taus, &adev.sigma, &counts])?;
            w.flush()?;
        }
        Analyze::Fit { file, x, y } => {
            let file = load(&file)?;
            let (xs, ys) = (channel(&file, &x)?, channel(&file, &y)?);
            let n = xs.len().min(ys.len());
            let fit = linear_fit(&xs[..n], &ys[..n])?;
            println!("slope {:.12e} ± {:.3e}", fit.slope, fit.slope_uncertainty);
            println!("intercept {:.12e} ± {:.3e}", fit.intercept, fit.intercept_uncertainty);
        }
        Analyze::Info { file } => {
            let file = load(&file)?;
            let h = &file.header;
            println!("format version {}", h.format_version);
            println!(
                "nu0 {} Hz, f_smp {} Hz, f_int {} Hz, f_out {} Hz",
                h.demod.nu0, h.demod.f_smp, h.demod.f_int, h.demod.f_out
            );
            println!("scenario {}", h.scenario_hash);
            println!("start {} s", h.start_time);
            for (k, v) in &h.metadata {
                println!("{k} {v}");
            }
            for name in file.channel_names() {
                println!("channel {name} ({} samples)", file.channel(&name).map_or(0, |c| c.len()));
            }
        }
    }
    Ok(())
}

fn selftest(args: SelftestArgs) -> CliResult {
    let print = |o: &Outcome| println!("{o}");
    let outcomes: Vec<Outcome> = if args.criteria.is_empty() {
        run_all(args.seed, print)
    } else {
        let mut v = Vec::new();
        for id in &args.criteria {
            let o = find(*id)?.run(args.seed);
            print(&o);
            v.push(o);
        }
        v
    };
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{}/{} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(format!("criteria failed: {failed:?}")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Demod(a) => demod(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Selftest(a) => selftest(a),
    })
    .unwrap_or_else(|_| Err(Failure::Internal("unexpected internal failure".into())));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
