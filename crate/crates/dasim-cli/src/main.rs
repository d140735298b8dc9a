//! Command-line front end: file-based pipeline over the simulator stages.
//!
//! Each subcommand reads one flat JSON config, writes its outputs plus a
//! `manifest.json` (seed, code version, config hash and the resolved
//! config) into the output directory, so any run can be reproduced
//! bit-for-bit from its manifest.
//!
//! Exit codes: 0 success, 2 config error, 3 resource budget, 4 I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use dasim::campaign::{run_campaign, save_campaign, CampaignConfig, SimPath};
use dasim::error::Error;
use dasim::estimation::{
    differential_phase, fading_map, phase_traces, stdv_profile, FadingMapSpec, FlagFloor,
    GridAxis, MapAxis,
};
use dasim::fiber::{synthesize, FiberConfig};
use dasim::interrogation::{
    estimate_channel, fast_channel_sim, simulate_backscatter, NoiseStreams, ProbeConfig, Scheme,
};
use dasim::jones::{
    evolve_params, jones_to_stokes, unitary_from_params, JonesVector, PolarizationParams,
};
use dasim::rng::{substream, Stream};

#[derive(Parser)]
#[command(
    name = "dasim",
    about = "Dual-polarization Rayleigh backscatter sensing simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat JSON configuration for the subcommand.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Verbose progress on stderr.
    #[arg(short, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a fibre realization and write it with a CSV summary.
    Fiber(CommonArgs),
    /// Interrogate a stored fibre and write the channel estimate.
    Probe(CommonArgs),
    /// Turn a stored channel estimate into a StDv/SNR profile CSV.
    Estimate(CommonArgs),
    /// Run a Monte Carlo campaign and persist its statistics.
    Campaign(CommonArgs),
    /// Export a phase-fading coefficient grid.
    #[command(name = "fading-map")]
    FadingMap(CommonArgs),
    /// Export Stokes trajectories for a list of segment/beat length ratios.
    Poincare(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Fiber(a) => ("fiber", a),
        Command::Probe(a) => ("probe", a),
        Command::Estimate(a) => ("estimate", a),
        Command::Campaign(a) => ("campaign", a),
        Command::FadingMap(a) => ("fading-map", a),
        Command::Poincare(a) => ("poincare", a),
    };
    match run(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("dasim {name}: {err}");
            ExitCode::from(match err {
                Error::InvalidArgument(_) | Error::Config(_) | Error::Format(_) => 2u8,
                Error::BudgetExceeded(_) => 3u8,
                Error::Io(_) => 4u8,
            })
        }
    }
}

fn run(name: &str, args: &CommonArgs) -> Result<(), Error> {
    let raw = std::fs::read_to_string(&args.config)?;
    let mut config: serde_json::Value = serde_json::from_str(&raw)?;
    if let Some(seed) = args.seed {
        config["seed"] = serde_json::json!(seed);
    }
    std::fs::create_dir_all(&args.out)?;

    match name {
        "fiber" => cmd_fiber(args, &config)?,
        "probe" => cmd_probe(args, &config)?,
        "estimate" => cmd_estimate(args, &config)?,
        "campaign" => cmd_campaign(args, &config)?,
        "fading-map" => cmd_fading_map(args, &config)?,
        "poincare" => cmd_poincare(args, &config)?,
        _ => unreachable!(),
    }

    write_manifest(&args.out, name, &config)?;
    if args.verbose > 0 {
        eprintln!("dasim {name}: outputs written to {}", args.out.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    code_version: &'a str,
    seed: Option<u64>,
    config_hash: String,
    config: &'a serde_json::Value,
}

fn write_manifest(out: &Path, name: &str, config: &serde_json::Value) -> Result<(), Error> {
    let canonical = serde_json::to_string(config)?;
    let manifest = Manifest {
        subcommand: name,
        code_version: env!("CARGO_PKG_VERSION"),
        seed: config.get("seed").and_then(|v| v.as_u64()),
        config_hash: format!("{:016x}", fnv1a(canonical.as_bytes())),
        config,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(out.join("manifest.json"), json.as_bytes())?;
    Ok(())
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

fn warn_alpha(alpha: f64) {
    if alpha > 0.05 {
        eprintln!(
            "dasim: warning: alpha = {alpha} is above the physical reflection \
             crosstalk range [0, 0.05]"
        );
    }
}

fn cmd_fiber(args: &CommonArgs, config: &serde_json::Value) -> Result<(), Error> {
    let cfg: FiberConfig = serde_json::from_value(config.clone())?;
    warn_alpha(cfg.alpha);
    let fib = synthesize(&cfg)?;
    dasim::io::write_fiber(&args.out.join("fiber.ffr"), &fib)?;
    dasim::io::write_fiber_csv(&args.out.join("fiber_summary.csv"), &fib)?;
    Ok(())
}

/// Probe config: the interrogation parameters plus the channel geometry the
/// realization file does not carry.
#[derive(Debug, Serialize, Deserialize)]
struct ProbeCommandConfig {
    fiber_file: PathBuf,
    #[serde(flatten)]
    probe: ProbeConfig,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    theta_misalign_rad: f64,
    #[serde(default = "default_probe_path")]
    sim_path: SimPath,
    pub seed: u64,
}

fn default_probe_path() -> SimPath {
    SimPath::Waveform
}

fn cmd_probe(args: &CommonArgs, config: &serde_json::Value) -> Result<(), Error> {
    let cfg: ProbeCommandConfig = serde_json::from_value(config.clone())?;
    warn_alpha(cfg.alpha);
    let fib = dasim::io::read_fiber(&cfg.fiber_file)?;
    let mut streams = NoiseStreams::from_seed(cfg.seed);
    let est = match cfg.sim_path {
        SimPath::Waveform => {
            let rx = simulate_backscatter(
                &fib,
                &cfg.probe,
                cfg.alpha,
                cfg.theta_misalign_rad,
                &mut streams,
                None,
            )?;
            estimate_channel(&rx, &cfg.probe)?
        }
        SimPath::Fast => fast_channel_sim(
            &fib,
            &cfg.probe,
            cfg.alpha,
            cfg.theta_misalign_rad,
            &mut streams,
            None,
        )?,
    };
    dasim::io::write_channel_estimate(&args.out.join("estimate.fce"), &est)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EstimateCommandConfig {
    estimate_file: PathBuf,
    #[serde(default = "default_segment_length")]
    segment_length_m: f64,
    #[serde(default = "default_gauge")]
    gauge_segments: usize,
    #[serde(default)]
    window_s: f64,
    #[serde(default)]
    highpass_hz: f64,
    #[serde(default = "default_flag_threshold")]
    flag_threshold: f64,
}

fn default_segment_length() -> f64 {
    2.0
}

fn default_gauge() -> usize {
    1
}

fn default_flag_threshold() -> f64 {
    1e-3
}

fn cmd_estimate(args: &CommonArgs, config: &serde_json::Value) -> Result<(), Error> {
    let cfg: EstimateCommandConfig = serde_json::from_value(config.clone())?;
    let est = dasim::io::read_channel_estimate(&cfg.estimate_file, cfg.segment_length_m)?;
    let traces = phase_traces(&est, &FlagFloor::Uniform(cfg.flag_threshold));
    let diff = differential_phase(&traces, cfg.gauge_segments)?;
    let profile = stdv_profile(&diff, cfg.window_s, cfg.highpass_hz)?;
    dasim::io::write_stdv_csv(&args.out.join("stdv_profile.csv"), &profile)?;
    Ok(())
}

fn cmd_campaign(args: &CommonArgs, config: &serde_json::Value) -> Result<(), Error> {
    let mut cfg: CampaignConfig = serde_json::from_value(config.clone())?;
    if args.threads > 0 {
        cfg.threads = args.threads;
    }
    warn_alpha(cfg.alpha);
    if args.verbose > 0 {
        eprintln!(
            "dasim campaign: {} lengths x {} fibres, estimators {:?}",
            cfg.lengths_m.len(),
            cfg.fibres_per_length,
            cfg.estimators
        );
    }
    let stats = run_campaign(&cfg)?;
    save_campaign(&args.out, &stats)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct FadingMapCommandConfig {
    #[serde(default = "default_row_axis")]
    row_axis: MapAxis,
    row_min: f64,
    row_max: f64,
    #[serde(default = "default_grid_n")]
    row_n: usize,
    #[serde(default = "default_col_axis")]
    col_axis: MapAxis,
    col_min: f64,
    col_max: f64,
    #[serde(default = "default_grid_n")]
    col_n: usize,
    #[serde(default)]
    fixed_beta: f64,
    #[serde(default)]
    fixed_gamma: f64,
    #[serde(default)]
    fixed_theta: f64,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    theta_misalign_rad: f64,
    estimator: Scheme,
}

fn default_row_axis() -> MapAxis {
    MapAxis::Theta
}

fn default_col_axis() -> MapAxis {
    MapAxis::Beta
}

fn default_grid_n() -> usize {
    181
}

fn cmd_fading_map(args: &CommonArgs, config: &serde_json::Value) -> Result<(), Error> {
    let cfg: FadingMapCommandConfig = serde_json::from_value(config.clone())?;
    warn_alpha(cfg.alpha);
    let spec = FadingMapSpec {
        rows: GridAxis {
            axis: cfg.row_axis,
            min: cfg.row_min,
            max: cfg.row_max,
            n: cfg.row_n,
        },
        cols: GridAxis {
            axis: cfg.col_axis,
            min: cfg.col_min,
            max: cfg.col_max,
            n: cfg.col_n,
        },
        fixed: PolarizationParams {
            beta: cfg.fixed_beta,
            gamma: cfg.fixed_gamma,
            theta_rot: cfg.fixed_theta,
            common_phase: 0.0,
        },
        alpha: cfg.alpha,
        theta_misalign: cfg.theta_misalign_rad,
        estimator: cfg.estimator,
    };
    let map = fading_map(&spec)?;
    let name = format!("fading_map_{}.csv", cfg.estimator);
    dasim::io::write_fading_map_csv(&args.out.join(name), &map)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PoincareCommandConfig {
    /// Segment-to-beat-length ratios, one trajectory file each.
    ratios: Vec<f64>,
    #[serde(default = "default_poincare_segments")]
    segments: usize,
    #[serde(default = "default_segment_length")]
    segment_length_m: f64,
    #[serde(default = "default_poincare_attenuation")]
    attenuation_db_per_km: f64,
    seed: u64,
}

fn default_poincare_segments() -> usize {
    1000
}

fn default_poincare_attenuation() -> f64 {
    0.2
}

fn cmd_poincare(args: &CommonArgs, config: &serde_json::Value) -> Result<(), Error> {
    let cfg: PoincareCommandConfig = serde_json::from_value(config.clone())?;
    if cfg.ratios.is_empty() {
        return Err(Error::invalid("poincare: ratios must be non-empty"));
    }
    if cfg.segments == 0 {
        return Err(Error::invalid("poincare: segments must be >= 1"));
    }
    let input = JonesVector {
        x: num_complex::Complex64::new(1.0, 0.0),
        y: num_complex::Complex64::new(0.0, 0.0),
    };
    for (k, &ratio) in cfg.ratios.iter().enumerate() {
        if ratio < 0.0 {
            return Err(Error::invalid("poincare: ratios must be >= 0"));
        }
        let mut rng = substream(
            dasim::rng::derive_seed(cfg.seed, k as u64, 0),
            Stream::FiberPolarization,
        );
        let mut params = PolarizationParams::IDENTITY;
        let mut trajectory = Vec::with_capacity(cfg.segments);
        for i in 0..cfg.segments {
            params = evolve_params(&params, ratio, &mut rng);
            let distance = (i as f64 + 1.0) * cfg.segment_length_m;
            // One-way field attenuation for the forward trajectory.
            let one_way =
                dasim::fiber::dual_pass_attenuation(cfg.attenuation_db_per_km, distance).sqrt();
            let mut field = unitary_from_params(&params).apply(&input);
            field.x *= one_way;
            field.y *= one_way;
            trajectory.push(jones_to_stokes(&field));
        }
        let name = format!("poincare_r{ratio}.csv");
        dasim::io::write_stokes_csv(&args.out.join(name), &trajectory)?;
    }
    Ok(())
}
