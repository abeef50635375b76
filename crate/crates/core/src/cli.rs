//! Command-line front end: `generate`, `simulate`, `analyze`, `report`.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
//! Every command writes a `manifest.txt` next to its outputs; passing it back
//! with `--config` repeats the run bit for bit.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::Error;
use crate::io::{self, RunManifest, MANIFEST_RESERVED};
use crate::market::{self, OhlcSchema, PriceField, SeriesTransform};
use crate::series::TimeSeries;
use crate::simulator::{self, Equation, ForcingScaling, SolverConfig};
use crate::spectral::{
    bicoherence, detect_hotspots, dft_forward, power_spectrum, segmented_bispectrum, Detrend,
    HotspotConfig, SegmentConfig, Threshold, Verdict, Window,
};
use crate::synthetic::{self, Coupling, FrequencyRule, NoiseSpec, TriadSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Parser)]
#[command(
    name = "qpc",
    version,
    about = "Bispectral phase-coupling analysis toolkit"
)]
pub struct Cli {
    /// key=value file (e.g. a previous run's manifest.txt) supplying flags
    /// not given on the command line
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic series CSV
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run the forced Burgers or diffusion solver
    Simulate(SimulateArgs),
    /// Spectrum, bispectrum and hotspot verdict for one or more series
    Analyze(AnalyzeArgs),
    /// Bundle an analyze run into raw / spectrum / heatmap panel files
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Three cosines with optional quadratic phase coupling
    Triad(TriadArgs),
    /// Uniform or Box-Muller Gaussian noise
    Noise(NoiseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Sum,
    Reciprocal,
}

#[derive(Debug, Args)]
pub struct TriadArgs {
    /// Set theta_gamma = theta_alpha + theta_beta (default: independent phases)
    #[arg(long)]
    pub coupled: bool,
    /// Radians per sample
    #[arg(long, default_value_t = 0.22)]
    pub omega_a: f64,
    /// Radians per sample
    #[arg(long, default_value_t = 0.375)]
    pub omega_b: f64,
    #[arg(long, value_enum, default_value = "sum")]
    pub rule: RuleArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = synthetic::DEFAULT_TRIAD_NOISE)]
    pub noise: f64,
    /// Redraw the phases every this many samples
    #[arg(long)]
    pub phase_block: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub kind: NoiseKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EquationArg {
    Burgers,
    Diffusion,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalingArg {
    Amplitude,
    InverseSqrtDt,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub equation: EquationArg,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    pub length: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 3e-3)]
    pub nu: f64,
    /// Forcing amplitude A
    #[arg(long, default_value_t = 6.0)]
    pub forcing: f64,
    #[arg(long, value_enum, default_value = "amplitude")]
    pub forcing_scaling: ScalingArg,
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub probe: usize,
    /// Write a snapshot every this many steps
    #[arg(long)]
    pub snapshot_stride: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowArg {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DetrendArg {
    None,
    Demean,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldArg {
    Close,
    Open,
    Mid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformArg {
    Raw,
    Demean,
    LogReturn,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Series CSV (`t,value`), or OHLCV CSV with --ohlc
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub ohlc: bool,
    #[arg(long, value_enum, default_value = "close")]
    pub field: FieldArg,
    #[arg(long, value_enum, default_value = "raw")]
    pub transform: TransformArg,
    /// Number of segments to average; picks the largest power-of-two length that fits
    #[arg(long, conflicts_with = "segment_length")]
    pub segments: Option<usize>,
    /// Explicit power-of-two segment length (uses every complete segment)
    #[arg(long)]
    pub segment_length: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub overlap: f64,
    #[arg(long, value_enum, default_value = "hann")]
    pub window: WindowArg,
    #[arg(long, value_enum, default_value = "demean")]
    pub detrend: DetrendArg,
    /// `auto` or a bicoherence level in [0, 1]
    #[arg(long, default_value = "auto")]
    pub threshold: Threshold,
    #[arg(long, default_value_t = crate::spectral::DEFAULT_MIN_SEGMENTS)]
    pub min_segments: usize,
    /// Analyze several inputs in parallel, one output subdirectory each
    #[arg(long)]
    pub batch: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directory of a completed `analyze` run
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_USAGE
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let (args, manifest) = match apply_config(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, manifest.as_ref()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Merge `--config` key/values into the argument list as long flags that the
/// command line does not already set. With no subcommand on the command line,
/// the manifest's `command` is used.
fn apply_config(mut args: Vec<OsString>) -> CliResult<(Vec<OsString>, Option<RunManifest>)> {
    let pos = args
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else {
        return Ok((args, None));
    };
    let path = match args[pos].to_string_lossy().strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => args
            .get(pos + 1)
            .map(PathBuf::from)
            .ok_or_else(|| usage("--config needs a path"))?,
    };
    let manifest = RunManifest::read(&path).map_err(|e| usage(e.to_string()))?;

    let has_subcommand = args.iter().skip(1).any(|a| {
        ["generate", "simulate", "analyze", "report"].contains(&a.to_string_lossy().as_ref())
    });
    if !has_subcommand {
        if manifest.command.is_empty() {
            return Err(usage(format!("{} names no command", path.display())));
        }
        let words: Vec<OsString> = manifest
            .command
            .split_whitespace()
            .map(OsString::from)
            .collect();
        args.splice(1..1, words);
    }
    let present = |key: &str, args: &[OsString]| {
        let flag = format!("--{key}");
        args.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&format!("{flag}="))
        })
    };
    for (key, value) in &manifest.config {
        if MANIFEST_RESERVED.contains(&key.as_str()) || present(key, &args) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    if let Some(seed) = manifest.seed {
        if !present("seed", &args) {
            args.push("--seed".into());
            args.push(seed.to_string().into());
        }
    }
    Ok((args, Some(manifest)))
}

fn execute(cli: Cli, manifest: Option<&RunManifest>) -> CliResult<()> {
    match cli.command {
        Command::Generate {
            kind: GenerateKind::Triad(a),
        } => cmd_generate_triad(&a),
        Command::Generate {
            kind: GenerateKind::Noise(a),
        } => cmd_generate_noise(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Analyze(mut a) => {
            if a.inputs.is_empty() {
                if let Some(m) = manifest {
                    a.inputs = m.inputs.clone();
                }
            }
            cmd_analyze(&a)
        }
        Command::Report(a) => cmd_report(&a),
    }
}

fn finish(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(())
}

pub fn cmd_generate_triad(a: &TriadArgs) -> CliResult<()> {
    let spec = TriadSpec {
        omega_alpha: a.omega_a,
        omega_beta: a.omega_b,
        coupling: if a.coupled {
            Coupling::PhaseSum
        } else {
            Coupling::Independent
        },
        frequency_rule: match a.rule {
            RuleArg::Sum => FrequencyRule::Sum,
            RuleArg::Reciprocal => FrequencyRule::Reciprocal,
        },
        n_samples: a.n,
        noise_amplitude: a.noise,
        seed: a.seed,
        phase_block: a.phase_block,
    };
    let series = synthetic::gen_triad(&spec)?;
    io::write_series_csv(&a.out.join("series.csv"), &series)?;
    let mut m = RunManifest::new("generate triad");
    m.seed = Some(a.seed);
    m.set("coupled", a.coupled)
        .set("omega-a", a.omega_a)
        .set("omega-b", a.omega_b)
        .set("rule", rule_name(a.rule))
        .set("n", a.n)
        .set("noise", a.noise);
    if let Some(b) = a.phase_block {
        m.set("phase-block", b);
    }
    m.outputs.push("series.csv".into());
    finish(&a.out, &m)?;
    println!(
        "wrote {} samples to {}",
        series.len(),
        a.out.join("series.csv").display()
    );
    Ok(())
}

fn rule_name(r: RuleArg) -> &'static str {
    match r {
        RuleArg::Sum => "sum",
        RuleArg::Reciprocal => "reciprocal",
    }
}

pub fn cmd_generate_noise(a: &NoiseArgs) -> CliResult<()> {
    let spec = NoiseSpec::new(a.n, a.amplitude, a.seed);
    let (series, kind) = match a.kind {
        NoiseKind::Uniform => (synthetic::gen_white_uniform(&spec)?, "uniform"),
        NoiseKind::Gaussian => (synthetic::gen_gaussian_box_muller(&spec)?, "gaussian"),
    };
    io::write_series_csv(&a.out.join("series.csv"), &series)?;
    let mut m = RunManifest::new("generate noise");
    m.seed = Some(a.seed);
    m.set("kind", kind)
        .set("n", a.n)
        .set("amplitude", a.amplitude);
    m.outputs.push("series.csv".into());
    finish(&a.out, &m)?;
    println!(
        "wrote {} samples to {}",
        series.len(),
        a.out.join("series.csv").display()
    );
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    let config = SolverConfig {
        n_grid: a.n,
        length: a.length,
        dt: a.dt,
        nu: a.nu,
        forcing_amplitude: a.forcing,
        forcing_scaling: match a.forcing_scaling {
            ScalingArg::Amplitude => ForcingScaling::Amplitude,
            ScalingArg::InverseSqrtDt => ForcingScaling::InverseSqrtDt,
        },
        equation: match a.equation {
            EquationArg::Burgers => Equation::Burgers,
            EquationArg::Diffusion => Equation::Diffusion,
        },
        seed: a.seed,
        n_steps: a.steps,
        probe_index: a.probe,
        snapshot_stride: a.snapshot_stride,
    };
    let out = simulator::run(&config)?;

    let mut m = RunManifest::new(match a.equation {
        EquationArg::Burgers => "simulate burgers",
        EquationArg::Diffusion => "simulate diffusion",
    });
    m.seed = Some(a.seed);
    m.set("n", a.n)
        .set("length", a.length)
        .set("dt", a.dt)
        .set("nu", a.nu)
        .set("forcing", a.forcing)
        .set(
            "forcing-scaling",
            match a.forcing_scaling {
                ScalingArg::Amplitude => "amplitude",
                ScalingArg::InverseSqrtDt => "inverse-sqrt-dt",
            },
        )
        .set("steps", a.steps)
        .set("probe", a.probe);
    if let Some(s) = a.snapshot_stride {
        m.set("snapshot-stride", s);
    }

    io::write_series_csv(&a.out.join("probe.csv"), &out.probe_series)?;
    io::write_spectrum_csv(
        &a.out.join("spectrum.csv"),
        &out.final_spatial_spectrum,
        a.n,
    )?;
    m.outputs.push("probe.csv".into());
    m.outputs.push("spectrum.csv".into());
    let x = config.grid_points();
    for snap in &out.snapshots {
        let name = Path::new("snapshots").join(io::snapshot_file_name(snap.step));
        io::write_snapshot_csv(&a.out.join(&name), &x, &snap.u)?;
        m.outputs.push(name);
    }
    finish(&a.out, &m)?;
    println!(
        "simulated {} steps to t = {}; probe written to {}",
        a.steps,
        out.final_state.time,
        a.out.join("probe.csv").display()
    );
    Ok(())
}

fn load_input(a: &AnalyzeArgs, path: &Path) -> CliResult<TimeSeries> {
    if a.ohlc {
        let (ticks, report) = market::load_ohlc_csv(path, &OhlcSchema::default())?;
        eprintln!(
            "{}: {} rows in, {} kept, {} invalid, {} duplicate, {} sessions",
            path.display(),
            report.n_records_in,
            report.n_records_out,
            report.n_dropped_invalid,
            report.n_dropped_duplicate,
            report.sessions_detected
        );
        let field = match a.field {
            FieldArg::Close => PriceField::Close,
            FieldArg::Open => PriceField::Open,
            FieldArg::Mid => PriceField::Mid,
        };
        let transform = match a.transform {
            TransformArg::Raw => SeriesTransform::Raw,
            TransformArg::Demean => SeriesTransform::Demean,
            TransformArg::LogReturn => SeriesTransform::LogReturn,
        };
        Ok(market::build_series(&ticks, field, transform)?)
    } else {
        Ok(io::read_series_csv(path)?)
    }
}

fn analyze_one(a: &AnalyzeArgs, input: &Path, out: &Path) -> CliResult<Verdict> {
    let series = load_input(a, input)?;
    let seg = match (a.segments, a.segment_length) {
        (Some(m), _) => SegmentConfig::with_segment_count(series.len(), m)?,
        (None, Some(len)) => SegmentConfig::new(len),
        (None, None) => SegmentConfig::with_segment_count(series.len(), 64)?,
    }
    .overlap(a.overlap)
    .window(match a.window {
        WindowArg::Hann => Window::Hann,
        WindowArg::Rectangular => Window::Rectangular,
    })
    .detrend(match a.detrend {
        DetrendArg::None => Detrend::None,
        DetrendArg::Demean => Detrend::Demean,
        DetrendArg::Linear => Detrend::Linear,
    });

    let spectrum = dft_forward(&series)?;
    let grid = segmented_bispectrum(&series, &seg)?;
    let bic = bicoherence(&grid);
    let report = detect_hotspots(
        &grid,
        &HotspotConfig {
            threshold: a.threshold,
            min_segments: a.min_segments,
        },
    );

    io::write_series_csv(&out.join("series.csv"), &series)?;
    io::write_spectrum_csv(
        &out.join("spectrum.csv"),
        &power_spectrum(&spectrum),
        series.len(),
    )?;
    io::write_bispectrum_csv(&out.join("bispectrum.csv"), &grid, &bic)?;
    io::write_heatmap_csv(&out.join("heatmap.csv"), &bic)?;
    io::write_report(&out.join("hotspots.txt"), &report)?;

    let mut m = RunManifest::new("analyze");
    m.inputs.push(input.to_path_buf());
    m.set("ohlc", a.ohlc)
        .set("field", format!("{:?}", a.field).to_lowercase())
        .set(
            "transform",
            match a.transform {
                TransformArg::Raw => "raw",
                TransformArg::Demean => "demean",
                TransformArg::LogReturn => "log-return",
            },
        )
        .set("overlap", a.overlap)
        .set("window", format!("{:?}", a.window).to_lowercase())
        .set("detrend", format!("{:?}", a.detrend).to_lowercase())
        .set("threshold", a.threshold)
        .set("min-segments", a.min_segments);
    match (a.segments, a.segment_length) {
        (_, Some(len)) => m.set("segment-length", len),
        (m_count, None) => m.set("segments", m_count.unwrap_or(64)),
    };
    for f in [
        "series.csv",
        "spectrum.csv",
        "bispectrum.csv",
        "heatmap.csv",
        "hotspots.txt",
    ] {
        m.outputs.push(f.into());
    }
    finish(out, &m)?;
    if !a.batch {
        println!("{}", report.verdict);
        for h in report.hotspots.iter().take(10) {
            println!(
                "hotspot k1={} k2={} bicoherence={:.4} |B|={:.4e}",
                h.k1, h.k2, h.bicoherence, h.bispectrum_magnitude
            );
        }
    }
    Ok(report.verdict)
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<()> {
    match a.inputs.as_slice() {
        [] => Err(usage("analyze needs at least one input file")),
        [single] if !a.batch => analyze_one(a, single, &a.out).map(|_| ()),
        _ if !a.batch => Err(usage("several inputs need --batch")),
        inputs => {
            let results: Vec<CliResult<Verdict>> = inputs
                .par_iter()
                .map(|input| {
                    let stem = input.file_stem().unwrap_or_default();
                    analyze_one(a, input, &a.out.join(stem))
                })
                .collect();
            let mut first_err = None;
            for (input, r) in inputs.iter().zip(results) {
                match r {
                    Ok(v) => println!("{}: {v}", input.display()),
                    Err(e) => {
                        eprintln!("{}: error: {}", input.display(), e.message);
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
    }
}

pub const REPORT_PANELS: [(&str, &str, &str); 3] = [
    ("raw series", "series.csv", "raw_series.csv"),
    (
        "power spectrum (log-log)",
        "spectrum.csv",
        "spectrum_loglog.csv",
    ),
    (
        "bicoherence heatmap",
        "heatmap.csv",
        "bicoherence_heatmap.csv",
    ),
];

pub fn cmd_report(a: &ReportArgs) -> CliResult<()> {
    for (_, src, _) in REPORT_PANELS {
        let p = a.run.join(src);
        if !p.is_file() {
            return Err(usage(format!("missing input file {}", p.display())));
        }
    }
    std::fs::create_dir_all(&a.out)?;
    std::fs::copy(a.run.join("series.csv"), a.out.join("raw_series.csv"))?;
    std::fs::copy(
        a.run.join("heatmap.csv"),
        a.out.join("bicoherence_heatmap.csv"),
    )?;
    write_loglog(
        &a.run.join("spectrum.csv"),
        &a.out.join("spectrum_loglog.csv"),
    )?;

    let mut index = String::from("# figure bundle\n");
    for (i, (title, _, dst)) in REPORT_PANELS.iter().enumerate() {
        index.push_str(&format!("panel {}: {title} -> {dst}\n", i + 1));
    }
    if let Ok(text) = std::fs::read_to_string(a.run.join("hotspots.txt")) {
        if let Some(v) = text.lines().find(|l| l.starts_with("verdict:")) {
            index.push_str(v);
            index.push('\n');
        }
    }
    std::fs::write(a.out.join("index.txt"), index)?;

    let mut m = RunManifest::new("report");
    m.set("run", a.run.display());
    for (_, _, dst) in REPORT_PANELS {
        m.outputs.push(dst.into());
    }
    m.outputs.push("index.txt".into());
    finish(&a.out, &m)?;
    println!("report written to {}", a.out.display());
    Ok(())
}

/// `bin,log10_frequency,log10_power` for bins with positive frequency and power.
fn write_loglog(src: &Path, dst: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(src)?;
    let mut out = String::from("bin,log10_frequency,log10_power\n");
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            Some((
                cols.first()?.parse::<usize>().ok()?,
                cols.get(1)?.parse::<f64>().ok()?,
                cols.get(2)?.parse::<f64>().ok()?,
            ))
        })();
        let (k, w, p) =
            parsed.ok_or_else(|| usage(format!("{}: bad row `{line}`", src.display())))?;
        if w > 0.0 && p > 0.0 {
            out.push_str(&format!("{k},{},{}\n", w.log10(), p.log10()));
        }
    }
    std::fs::write(dst, out)?;
    Ok(())
}
