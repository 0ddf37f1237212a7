//! `dsm`: synthesize Born S-parameters, image them with the direct sampling
//! method, and check the indicator against its Bessel-series structure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dsm_core::dsm::min_truncation;
use dsm_core::io::{read_scenario, read_sparams, write_atomic, write_map, write_sparams, MapFormat};
use dsm_core::special_fn::{bessel_j_orders, self_check, SpecialFnReport};
use dsm_core::{
    add_noise, analytic_phi_map, indicator_map, peak_extract, synth_extended, synth_point, FieldMode, IndicatorMap,
    Peak, Point2, Scenario,
};
use serde::Serialize;

/// Pass/fail threshold for the identity-chain check.
const IDENTITY_TOL: f64 = 1e-6;
/// Slack allowed when checking that artifacts shrink with N.
const SWEEP_SLACK: f64 = 0.02;

#[derive(Parser, Debug)]
#[command(name = "dsm", version, about = "Direct sampling imaging of small anomalies from S-parameters")]
struct Cli {
    /// Worker threads (defaults to DSM_THREADS, then all cores)
    #[arg(long, global = true, env = "DSM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize Born S-parameters for a scenario and write them as CSV
    Synth(SynthArgs),
    /// Image S-parameters with the DSM indicator (or the analytic map)
    Image(ImageArgs),
    /// Same as `image --analytic`: write the |Φ| structure-function map
    Analytic(AnalyticArgs),
    /// Check the DSM map against the structure function on a lossless scenario
    Verify(VerifyArgs),
    /// Print J_m(x) for m = 0..=m_max and x = 0, step, ..., x_max as CSV
    BesselTable(BesselTableArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FieldArg {
    Exact,
    Asymptotic,
}

impl From<FieldArg> for FieldMode {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Exact => FieldMode::Exact,
            FieldArg::Asymptotic => FieldMode::Asymptotic,
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    scenario: PathBuf,
    out: PathBuf,
    /// Integrate over finite disks instead of using the point model
    #[arg(long)]
    extended: bool,
    #[arg(long, default_value_t = 20, requires = "extended")]
    cells_per_wavelength: u32,
    /// Add complex Gaussian noise at this SNR (overrides the scenario)
    #[arg(long)]
    noise_snr_db: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    field_mode: Option<FieldArg>,
}

#[derive(Args, Debug)]
struct MapOutputArgs {
    /// Output stem: writes <OUT>.csv, <OUT>.pgm and <OUT>.report.json
    out: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    peak_threshold: f64,
    /// Jacobi-Anger truncation for analytic maps (default: the safe bound)
    #[arg(long)]
    truncation: Option<usize>,
}

#[derive(Args, Debug)]
struct ImageArgs {
    scenario: PathBuf,
    /// S-parameter CSV (`n,re,im`); ignored with --analytic
    sparams: PathBuf,
    #[command(flatten)]
    output: MapOutputArgs,
    #[arg(long)]
    analytic: bool,
    #[arg(long, value_enum)]
    field_mode: Option<FieldArg>,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    scenario: PathBuf,
    #[command(flatten)]
    output: MapOutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    scenario: PathBuf,
    #[arg(long)]
    truncation: Option<usize>,
    /// Multiply S-parameter entry N (1-based) by 2 before imaging
    #[arg(long)]
    corrupt: Option<usize>,
    /// Antenna counts for the artifact sweep, e.g. 4,8,16,32,64
    #[arg(long, value_delimiter = ',')]
    sweep_n: Vec<usize>,
    /// Also write the report to this file
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BesselTableArgs {
    m_max: usize,
    x_max: f64,
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunReport {
    scenario: PathBuf,
    mode: &'static str,
    field_mode: Option<FieldMode>,
    truncation: Option<usize>,
    map_csv: PathBuf,
    map_pgm: PathBuf,
    grid_points: usize,
    argmax: Point2,
    peak_threshold: f64,
    peaks: Vec<Peak>,
    timing_ms: f64,
    lossy_approximation: bool,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct SweepEntry {
    n: usize,
    max_artifact: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    scenario: PathBuf,
    truncation: usize,
    threshold: f64,
    max_deviation: f64,
    worst_point: Point2,
    identity_passed: bool,
    special_functions: SpecialFnReport,
    special_functions_passed: bool,
    sweep: Vec<SweepEntry>,
    sweep_non_increasing: Option<bool>,
    passed: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match cli.command {
        Command::Synth(args) => cmd_synth(args).map(|_| true),
        Command::Image(args) => cmd_image(args).map(|_| true),
        Command::Analytic(args) => cmd_analytic(args).map(|_| true),
        Command::Verify(args) => cmd_verify(args),
        Command::BesselTable(args) => cmd_bessel_table(args).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    read_scenario(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let scenario = load(&args.scenario)?;
    let mut s = if args.extended {
        synth_extended(&scenario, args.cells_per_wavelength)?
    } else {
        let mode = args.field_mode.map(FieldMode::from).unwrap_or_else(|| scenario.field_mode());
        synth_point(&scenario, mode)?
    };
    let scenario_noise = scenario.options.noise;
    let snr = args.noise_snr_db.or(scenario_noise.map(|n| n.snr_db));
    if let Some(snr) = snr {
        let seed = args.seed.or(scenario_noise.map(|n| n.seed)).unwrap_or(0);
        s = add_noise(&s, snr, seed)?;
    }
    write_sparams(&s, &args.out)?;
    eprintln!("wrote {} S-parameters to {}", s.len(), args.out.display());
    Ok(())
}

fn output_paths(stem: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let stem = match stem.extension().and_then(|e| e.to_str()) {
        Some("csv" | "pgm") => stem.with_extension(""),
        _ => stem.to_path_buf(),
    };
    let with = |suffix: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".csv"), with(".pgm"), with(".report.json"))
}

fn emit(
    map: &IndicatorMap,
    scenario_path: &Path,
    scenario: &Scenario,
    output: &MapOutputArgs,
    field_mode: Option<FieldMode>,
    started: Instant,
) -> Result<()> {
    if !(output.peak_threshold > 0.0 && output.peak_threshold < 1.0) {
        bail!("--peak-threshold must lie in (0, 1), got {}", output.peak_threshold);
    }
    let (csv, pgm, report_path) = output_paths(&output.out);
    write_map(map, &csv, MapFormat::Csv)?;
    write_map(map, &pgm, MapFormat::Pgm)?;

    let mut warnings = scenario.born_warnings();
    if map.near_antenna_points > 0 {
        warnings.push(format!(
            "{} grid points are within k·d < {} of an antenna (far-field hypothesis violated)",
            map.near_antenna_points,
            dsm_core::dsm::NEAR_ANTENNA_KD
        ));
    }
    if map.lossy_approximation {
        warnings.push("structure function evaluated with Re(k) of a lossy medium".into());
    }
    let report = RunReport {
        scenario: scenario_path.to_path_buf(),
        mode: match map.kind {
            dsm_core::MapKind::Dsm => "dsm",
            dsm_core::MapKind::Analytic => "analytic",
        },
        field_mode,
        truncation: map.truncation,
        map_csv: csv,
        map_pgm: pgm,
        grid_points: map.len(),
        argmax: map.max_point(),
        peak_threshold: output.peak_threshold,
        peaks: peak_extract(map, output.peak_threshold),
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
        lossy_approximation: map.lossy_approximation,
        warnings,
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_atomic(&report_path, json.as_bytes())?;
    println!("{json}");
    Ok(())
}

fn analytic_map(scenario: &Scenario, truncation: Option<usize>) -> Result<IndicatorMap> {
    let m = truncation.unwrap_or_else(|| min_truncation(scenario));
    Ok(analytic_phi_map(scenario, m)?)
}

fn cmd_image(args: ImageArgs) -> Result<()> {
    let started = Instant::now();
    let scenario = load(&args.scenario)?;
    if args.analytic {
        let map = analytic_map(&scenario, args.output.truncation)?;
        return emit(&map, &args.scenario, &scenario, &args.output, None, started);
    }
    let s = read_sparams(&args.sparams)?;
    let mode = args.field_mode.map(FieldMode::from).unwrap_or_else(|| scenario.field_mode());
    let map = indicator_map(&s, &scenario, mode)?;
    emit(&map, &args.scenario, &scenario, &args.output, Some(mode), started)
}

fn cmd_analytic(args: AnalyticArgs) -> Result<()> {
    let started = Instant::now();
    let scenario = load(&args.scenario)?;
    let map = analytic_map(&scenario, args.output.truncation)?;
    emit(&map, &args.scenario, &scenario, &args.output, None, started)
}

fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let scenario = load(&args.scenario)?;
    if !scenario.medium.is_lossless() {
        bail!("verification needs a lossless scenario (medium.sigma = 0)");
    }
    if scenario.anomalies.len() != 1 {
        bail!("verification needs exactly one anomaly, found {}", scenario.anomalies.len());
    }
    let truncation = args.truncation.unwrap_or_else(|| (scenario.wavenumber().real() * 0.2).ceil() as usize + 40);

    let mut s = synth_point(&scenario, FieldMode::Asymptotic)?;
    if let Some(n) = args.corrupt {
        let entry = s
            .values
            .get_mut(n.wrapping_sub(1))
            .with_context(|| format!("--corrupt {n} is outside 1..={}", scenario.array.len()))?;
        *entry *= 2.0;
    }
    let dsm = indicator_map(&s, &scenario, FieldMode::Asymptotic)?;
    let phi = analytic_phi_map(&scenario, truncation)?;
    let (worst, max_deviation) = dsm
        .values
        .iter()
        .zip(&phi.values)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    let identity_passed = max_deviation <= IDENTITY_TOL;

    let special_functions = self_check()?;
    let special_functions_passed = special_functions.passed();

    let center = scenario.anomalies[0].center;
    let half_lambda = 0.5 * scenario.wavenumber().wavelength;
    let mut sweep = Vec::new();
    for &n in &args.sweep_n {
        let sc = scenario.with_antenna_count(n)?;
        let data = synth_point(&sc, FieldMode::Asymptotic)?;
        let map = indicator_map(&data, &sc, FieldMode::Asymptotic)?;
        sweep.push(SweepEntry { n, max_artifact: map.max_outside(center, half_lambda) });
    }
    let sweep_non_increasing = (!sweep.is_empty())
        .then(|| sweep.windows(2).all(|w| w[1].max_artifact <= w[0].max_artifact + SWEEP_SLACK));

    let passed = identity_passed && special_functions_passed && sweep_non_increasing.unwrap_or(true);
    let report = VerifyReport {
        scenario: args.scenario.clone(),
        truncation,
        threshold: IDENTITY_TOL,
        max_deviation,
        worst_point: dsm.grid.points[worst],
        identity_passed,
        special_functions,
        special_functions_passed,
        sweep,
        sweep_non_increasing,
        passed,
    };
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &args.report {
        write_atomic(path, json.as_bytes())?;
    }
    println!("{json}");
    if passed {
        eprintln!("PASS: max deviation {max_deviation:.3e} <= {IDENTITY_TOL:e}");
    } else {
        let p = report.worst_point;
        eprintln!(
            "FAIL: max deviation {max_deviation:.3e} at ({}, {}); identity {}, special functions {}, sweep {}",
            p.x,
            p.y,
            if identity_passed { "ok" } else { "failed" },
            if special_functions_passed { "ok" } else { "failed" },
            match sweep_non_increasing {
                Some(true) => "ok",
                Some(false) => "failed",
                None => "not run",
            }
        );
    }
    Ok(passed)
}

fn cmd_bessel_table(args: BesselTableArgs) -> Result<()> {
    if !(args.step > 0.0 && args.x_max >= 0.0 && args.x_max.is_finite()) {
        bail!("need step > 0 and a finite x_max >= 0");
    }
    let count = (args.x_max / args.step + 1e-9).floor() as usize;
    let mut out = String::from("m,x,j\n");
    for i in 0..=count {
        let x = i as f64 * args.step;
        let j = bessel_j_orders(args.m_max, x)?;
        for (m, v) in j.iter().enumerate() {
            out.push_str(&format!("{m},{x:.16e},{v:.16e}\n"));
        }
    }
    match &args.out {
        Some(path) => write_atomic(path, out.as_bytes())?,
        None => print!("{out}"),
    }
    Ok(())
}
