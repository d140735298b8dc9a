//! Seeded Monte Carlo campaigns over fibre populations.
//!
//! A campaign synthesizes `fibres_per_length` random fibres for every
//! requested length, interrogates each with the configured schemes (plus an
//! optional polarization-free reference channel probed with the MIMO
//! scheme), derives differential-phase StDv profiles, and pools the
//! per-segment statistics: histograms, percentiles, SNR mean/variance in
//! the dB domain, mean StDv versus distance, and percentile-crossing
//! fractions between estimators.
//!
//! Work units are `(length, fibre)` pairs; every unit derives its own seed,
//! so results are bit-identical for a given configuration regardless of the
//! thread count or scheduling order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{differential_phase, phase_traces, stdv_profile, FlagFloor};
use crate::fiber::{synthesize, FiberConfig};
use crate::interrogation::{
    estimate_channel, fast_channel_sim, simulate_backscatter, ChannelEstimate, NoiseStreams,
    ProbeConfig, Scheme, DEFAULT_TRANSIMPEDANCE,
};
use crate::rng::derive_seed;

/// Which simulation engine produces the channel estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimPath {
    /// Full waveform synthesis and Golay correlation.
    Waveform,
    /// Per-frame statistical model (campaign default).
    Fast,
}

/// Flat campaign configuration (one JSON document).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub lengths_m: Vec<f64>,
    pub fibres_per_length: u32,
    pub estimators: Vec<Scheme>,
    /// Add a polarization-free channel probed with the MIMO scheme.
    #[serde(default)]
    pub include_pol_free_baseline: bool,
    pub seed: u64,
    #[serde(default = "default_sim_path")]
    pub sim_path: SimPath,

    // Probe parameters.
    #[serde(default = "default_frames")]
    pub frames: u32,
    #[serde(default = "default_code_log2")]
    pub code_log2_length: u32,
    #[serde(default = "default_symbol_rate")]
    pub symbol_rate_baud: f64,
    #[serde(default = "default_launch_power")]
    pub launch_power_dbm: f64,
    #[serde(default = "default_linewidth")]
    pub laser_linewidth_hz: f64,
    #[serde(default = "default_rx_noise")]
    pub rx_noise_sigma_v: f64,
    #[serde(default = "default_transimpedance")]
    pub transimpedance_v_per_sqrt_mw: f64,

    // Fibre parameters.
    #[serde(default = "default_segment_length")]
    pub segment_length_m: f64,
    #[serde(default = "default_beat_length")]
    pub beat_length_m: f64,
    #[serde(default = "default_attenuation")]
    pub attenuation_db_per_km: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub theta_misalign_rad: f64,

    // Analysis parameters.
    #[serde(default = "default_gauge")]
    pub gauge_segments: usize,
    #[serde(default)]
    pub window_s: f64,
    #[serde(default)]
    pub highpass_hz: f64,
    #[serde(default = "default_flag_threshold")]
    pub flag_threshold: f64,
    #[serde(default = "default_distance_bin")]
    pub distance_bin_m: f64,
    #[serde(default)]
    pub threads: usize,
    /// Refuse configurations above this many simulated points
    /// (fibres x segments x frames x estimators).
    #[serde(default = "default_max_points")]
    pub max_points: u64,
}

fn default_sim_path() -> SimPath {
    SimPath::Fast
}

fn default_frames() -> u32 {
    128
}

fn default_code_log2() -> u32 {
    13
}

fn default_symbol_rate() -> f64 {
    50e6
}

fn default_launch_power() -> f64 {
    7.0
}

fn default_linewidth() -> f64 {
    75.0
}

fn default_rx_noise() -> f64 {
    1.7e-3
}

fn default_transimpedance() -> f64 {
    DEFAULT_TRANSIMPEDANCE
}

fn default_segment_length() -> f64 {
    2.0
}

fn default_beat_length() -> f64 {
    2.0
}

fn default_attenuation() -> f64 {
    0.2
}

fn default_gauge() -> usize {
    1
}

fn default_flag_threshold() -> f64 {
    1e-3
}

fn default_distance_bin() -> f64 {
    200.0
}

fn default_max_points() -> u64 {
    2_000_000_000
}

impl CampaignConfig {
    /// A 340 m population: 2000 fibres, 2 m gauge, both dual-output schemes.
    pub fn short_range_default(seed: u64) -> Self {
        CampaignConfig {
            lengths_m: vec![340.0],
            fibres_per_length: 2000,
            estimators: vec![Scheme::Simo, Scheme::Mimo],
            include_pol_free_baseline: false,
            seed,
            sim_path: SimPath::Fast,
            frames: default_frames(),
            code_log2_length: default_code_log2(),
            symbol_rate_baud: default_symbol_rate(),
            launch_power_dbm: default_launch_power(),
            laser_linewidth_hz: default_linewidth(),
            rx_noise_sigma_v: default_rx_noise(),
            transimpedance_v_per_sqrt_mw: default_transimpedance(),
            segment_length_m: default_segment_length(),
            beat_length_m: default_beat_length(),
            attenuation_db_per_km: default_attenuation(),
            alpha: 0.0,
            theta_misalign_rad: 0.0,
            gauge_segments: default_gauge(),
            window_s: 0.0,
            highpass_hz: 0.0,
            flag_threshold: default_flag_threshold(),
            distance_bin_m: 50.0,
            threads: 0,
            max_points: default_max_points(),
        }
    }

    fn estimator_runs(&self) -> Vec<EstimatorRun> {
        let mut runs: Vec<EstimatorRun> = self
            .estimators
            .iter()
            .map(|&scheme| EstimatorRun {
                scheme,
                pol_free: false,
            })
            .collect();
        if self.include_pol_free_baseline {
            runs.push(EstimatorRun {
                scheme: Scheme::Mimo,
                pol_free: true,
            });
        }
        runs
    }

    fn segments_at(&self, length_m: f64) -> usize {
        (length_m / self.segment_length_m).floor() as usize
    }

    fn planned_points(&self) -> u64 {
        let runs = self.estimator_runs().len() as u64;
        self.lengths_m
            .iter()
            .map(|&l| {
                self.segments_at(l) as u64
                    * self.frames as u64
                    * self.fibres_per_length as u64
                    * runs
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths_m.is_empty() {
            return Err(Error::invalid("campaign: lengths_m must be non-empty"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("campaign: estimators must be non-empty"));
        }
        if self.fibres_per_length == 0 {
            return Err(Error::invalid("campaign: fibres_per_length must be >= 1"));
        }
        if self.gauge_segments == 0 {
            return Err(Error::invalid("campaign: gauge_segments must be >= 1"));
        }
        if self.frames < 2 {
            return Err(Error::invalid("campaign: frames must be >= 2"));
        }
        for &l in &self.lengths_m {
            if self.segments_at(l) <= self.gauge_segments {
                return Err(Error::invalid(format!(
                    "campaign: length {l} m gives {} segments, too few for gauge {}",
                    self.segments_at(l),
                    self.gauge_segments
                )));
            }
        }
        let planned = self.planned_points();
        if planned > self.max_points {
            return Err(Error::BudgetExceeded(format!(
                "campaign would simulate {planned} points, budget is {} \
                 (completed 0 of {} work units); raise max_points to proceed",
                self.max_points,
                self.lengths_m.len() as u64 * self.fibres_per_length as u64
            )));
        }
        Ok(())
    }

    fn probe_config(&self, scheme: Scheme) -> ProbeConfig {
        ProbeConfig {
            scheme,
            code_log2_length: self.code_log2_length,
            symbol_rate_baud: self.symbol_rate_baud,
            launch_power_dbm: self.launch_power_dbm,
            laser_linewidth_hz: self.laser_linewidth_hz,
            rx_noise_sigma_v: self.rx_noise_sigma_v,
            frames: self.frames,
            guard_symbols: None,
            transimpedance_v_per_sqrt_mw: self.transimpedance_v_per_sqrt_mw,
            memory_budget_mib: 8192.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct EstimatorRun {
    scheme: Scheme,
    pol_free: bool,
}

impl EstimatorRun {
    fn key(&self) -> String {
        if self.pol_free {
            format!("{}-POLFREE", self.scheme)
        } else {
            self.scheme.to_string()
        }
    }

    /// Noise-stream tag; the baseline shares the tag of its scheme so both
    /// runs consume identical draws.
    fn stream_tag(&self) -> u64 {
        self.scheme as u64 + 1
    }
}

/// Histogram with uniform bins over `[0, max]` plus an overflow bucket.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    fn build(samples: &[f64], bins: usize) -> Histogram {
        let max = samples.iter().cloned().fold(0.0, f64::max);
        let top = if max > 0.0 { max } else { 1.0 };
        let edges: Vec<f64> = (0..=bins)
            .map(|i| top * i as f64 / bins as f64)
            .collect();
        let mut counts = vec![0u64; bins];
        let mut overflow = 0u64;
        for &s in samples {
            let idx = (s / top * bins as f64).floor() as usize;
            if idx >= bins {
                if s <= top {
                    counts[bins - 1] += 1;
                } else {
                    overflow += 1;
                }
            } else {
                counts[idx] += 1;
            }
        }
        Histogram {
            edges,
            counts,
            overflow,
        }
    }
}

/// Linear-interpolation percentile of pre-sorted samples.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = pct / 100.0 * (sorted.len() as f64 - 1.0);
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = rank - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PercentilePoint {
    pub pct: f64,
    pub stdv_rad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceBin {
    pub start_m: f64,
    pub end_m: f64,
    pub mean_stdv_rad: f64,
    pub samples: u64,
}

/// Pooled per-(length, estimator) statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorStats {
    pub estimator: String,
    /// Segment StDv samples that entered the statistics.
    pub segment_samples: u64,
    /// Segments dropped because (almost) all their frames were flagged.
    pub excluded_segments: u64,
    pub stdv_mean_rad: f64,
    pub percentiles: Vec<PercentilePoint>,
    pub snr_mean_db: f64,
    pub snr_var_db2: f64,
    pub histogram: Histogram,
    pub stdv_vs_distance: Vec<DistanceBin>,
    /// Sorted raw samples; kept in memory for crossing fractions, not
    /// persisted.
    #[serde(skip)]
    pub samples_sorted: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthStats {
    pub length_m: f64,
    pub estimators: Vec<EstimatorStats>,
}

/// Full campaign outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignStats {
    pub seed: u64,
    pub lengths: Vec<LengthStats>,
}

impl CampaignStats {
    pub fn estimator(&self, length_m: f64, key: &str) -> Option<&EstimatorStats> {
        self.lengths
            .iter()
            .find(|l| l.length_m == length_m)
            .and_then(|l| l.estimators.iter().find(|e| e.estimator == key))
    }
}

/// One fibre's contribution: per estimator, per segment `(sigma, snr)` or
/// `None` when the segment was excluded.
struct FibreOutcome {
    per_estimator: Vec<Vec<Option<(f64, f64)>>>,
}

fn run_fibre(cfg: &CampaignConfig, length_m: f64, length_idx: usize, fibre_idx: u32) -> Result<FibreOutcome> {
    let fibre_seed = derive_seed(cfg.seed, length_idx as u64, fibre_idx as u64);
    let runs = cfg.estimator_runs();
    let mut per_estimator = Vec::with_capacity(runs.len());
    for run in &runs {
        let fiber_cfg = FiberConfig {
            length_m,
            segment_length_m: cfg.segment_length_m,
            beat_length_m: cfg.beat_length_m,
            attenuation_db_per_km: cfg.attenuation_db_per_km,
            alpha: cfg.alpha,
            theta_misalign_rad: cfg.theta_misalign_rad,
            polarization_enabled: !run.pol_free,
            seed: fibre_seed,
        };
        let fib = synthesize(&fiber_cfg)?;
        let probe = cfg.probe_config(run.scheme);
        let mut streams = NoiseStreams::from_seed(derive_seed(fibre_seed, run.stream_tag(), 0));
        let est: ChannelEstimate = match cfg.sim_path {
            SimPath::Fast => fast_channel_sim(
                &fib,
                &probe,
                cfg.alpha,
                cfg.theta_misalign_rad,
                &mut streams,
                None,
            )?,
            SimPath::Waveform => {
                let rx = simulate_backscatter(
                    &fib,
                    &probe,
                    cfg.alpha,
                    cfg.theta_misalign_rad,
                    &mut streams,
                    None,
                )?;
                estimate_channel(&rx, &probe)?
            }
        };
        let floors: Vec<f64> = fib
            .segments
            .iter()
            .map(|s| cfg.flag_threshold * s.attenuation)
            .collect();
        let traces = phase_traces(&est, &FlagFloor::PerSegment(floors));
        let diff = differential_phase(&traces, cfg.gauge_segments)?;
        let profile = stdv_profile(&diff, cfg.window_s, cfg.highpass_hz)?;
        let records: Vec<Option<(f64, f64)>> = (0..profile.stdv_rad.len())
            .map(|i| {
                let sigma = profile.stdv_rad[i];
                if sigma.is_nan() || profile.flagged_fraction[i] > 0.5 {
                    None
                } else {
                    Some((sigma, profile.snr_db[i]))
                }
            })
            .collect();
        per_estimator.push(records);
    }
    Ok(FibreOutcome { per_estimator })
}

/// Run the configured campaign. Deterministic in `cfg` (seed included):
/// re-running produces identical statistics bit for bit.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignStats> {
    cfg.validate()?;

    let units: Vec<(usize, u32)> = cfg
        .lengths_m
        .iter()
        .enumerate()
        .flat_map(|(li, _)| (0..cfg.fibres_per_length).map(move |fi| (li, fi)))
        .collect();

    let outcomes: Result<Vec<((usize, u32), FibreOutcome)>> = {
        let work = |&(li, fi): &(usize, u32)| -> Result<((usize, u32), FibreOutcome)> {
            let outcome = run_fibre(cfg, cfg.lengths_m[li], li, fi)?;
            Ok(((li, fi), outcome))
        };
        if cfg.threads == 1 {
            units.iter().map(work).collect()
        } else if cfg.threads == 0 {
            units.par_iter().map(work).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            pool.install(|| units.par_iter().map(work).collect())
        }
    };
    let mut outcomes = outcomes?;
    outcomes.sort_by_key(|&((li, fi), _)| (li, fi));

    let runs = cfg.estimator_runs();
    let mut lengths = Vec::with_capacity(cfg.lengths_m.len());
    for (li, &length_m) in cfg.lengths_m.iter().enumerate() {
        let n_seg = cfg.segments_at(length_m);
        let mut estimators = Vec::with_capacity(runs.len());
        for (ri, run) in runs.iter().enumerate() {
            let mut sigmas: Vec<f64> = Vec::new();
            let mut snrs: Vec<f64> = Vec::new();
            let mut excluded = 0u64;
            let mut bin_acc: Vec<(f64, u64)> = Vec::new();
            let bin_width = cfg.distance_bin_m.max(cfg.segment_length_m);
            let n_bins = ((length_m / bin_width).ceil() as usize).max(1);
            bin_acc.resize(n_bins, (0.0, 0));
            for ((oli, _), outcome) in outcomes.iter().filter(|((oli, _), _)| *oli == li) {
                debug_assert_eq!(*oli, li);
                let records = &outcome.per_estimator[ri];
                for (seg, rec) in records.iter().enumerate() {
                    match rec {
                        Some((sigma, snr)) => {
                            sigmas.push(*sigma);
                            snrs.push(*snr);
                            let distance = (seg as f64 + 1.0) * cfg.segment_length_m;
                            let b = ((distance / bin_width).floor() as usize).min(n_bins - 1);
                            bin_acc[b].0 += sigma;
                            bin_acc[b].1 += 1;
                        }
                        None => excluded += 1,
                    }
                }
            }
            let mut sorted = sigmas.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mean = if sigmas.is_empty() {
                f64::NAN
            } else {
                sigmas.iter().sum::<f64>() / sigmas.len() as f64
            };
            let snr_mean = snrs.iter().sum::<f64>() / snrs.len().max(1) as f64;
            let snr_var = snrs
                .iter()
                .map(|s| (s - snr_mean) * (s - snr_mean))
                .sum::<f64>()
                / (snrs.len().max(2) as f64 - 1.0);
            let percentiles = [5.0, 25.0, 50.0, 75.0, 90.0, 95.0, 99.0]
                .iter()
                .map(|&p| PercentilePoint {
                    pct: p,
                    stdv_rad: percentile(&sorted, p),
                })
                .collect();
            let stdv_vs_distance = bin_acc
                .iter()
                .enumerate()
                .map(|(b, &(sum, count))| DistanceBin {
                    start_m: b as f64 * bin_width,
                    end_m: (b as f64 + 1.0) * bin_width,
                    mean_stdv_rad: if count > 0 { sum / count as f64 } else { f64::NAN },
                    samples: count,
                })
                .collect();
            estimators.push(EstimatorStats {
                estimator: run.key(),
                segment_samples: sigmas.len() as u64,
                excluded_segments: excluded,
                stdv_mean_rad: mean,
                percentiles,
                snr_mean_db: snr_mean,
                snr_var_db2: snr_var,
                histogram: Histogram::build(&sigmas, 100),
                stdv_vs_distance,
                samples_sorted: sorted,
            });
            debug_assert_eq!(
                estimators.last().unwrap().segment_samples + excluded,
                (n_seg as u64) * cfg.fibres_per_length as u64
            );
        }
        lengths.push(LengthStats {
            length_m,
            estimators,
        });
    }

    Ok(CampaignStats {
        seed: cfg.seed,
        lengths,
    })
}

/// Fractions of `probe` StDv samples exceeding the reference estimator's
/// percentiles, per length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingFraction {
    pub length_m: f64,
    pub percentile: f64,
    pub fraction: f64,
}

pub fn crossing_fractions(
    stats: &CampaignStats,
    reference: &str,
    probe: &str,
    percentiles: &[f64],
) -> Result<Vec<CrossingFraction>> {
    let mut out = Vec::new();
    for length in &stats.lengths {
        let ref_stats = length
            .estimators
            .iter()
            .find(|e| e.estimator == reference)
            .ok_or_else(|| {
                Error::invalid(format!("crossing_fractions: missing estimator {reference}"))
            })?;
        let probe_stats = length
            .estimators
            .iter()
            .find(|e| e.estimator == probe)
            .ok_or_else(|| {
                Error::invalid(format!("crossing_fractions: missing estimator {probe}"))
            })?;
        for &p in percentiles {
            let threshold = percentile(&ref_stats.samples_sorted, p);
            let above = probe_stats
                .samples_sorted
                .iter()
                .filter(|&&s| s > threshold)
                .count();
            out.push(CrossingFraction {
                length_m: length.length_m,
                percentile: p,
                fraction: above as f64 / probe_stats.samples_sorted.len().max(1) as f64,
            });
        }
    }
    Ok(out)
}

/// Per-length SNR summary with the MIMO-vs-SIMO differences when both are
/// present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnrSummary {
    pub length_m: f64,
    pub per_estimator: Vec<SnrRow>,
    pub mimo_minus_simo_mean_db: Option<f64>,
    pub simo_minus_mimo_var_db2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnrRow {
    pub estimator: String,
    pub mean_db: f64,
    pub var_db2: f64,
}

pub fn snr_summary(stats: &CampaignStats) -> Vec<SnrSummary> {
    stats
        .lengths
        .iter()
        .map(|length| {
            let rows: Vec<SnrRow> = length
                .estimators
                .iter()
                .map(|e| SnrRow {
                    estimator: e.estimator.clone(),
                    mean_db: e.snr_mean_db,
                    var_db2: e.snr_var_db2,
                })
                .collect();
            let find = |key: &str| length.estimators.iter().find(|e| e.estimator == key);
            let (mean_diff, var_diff) = match (find("MIMO"), find("SIMO")) {
                (Some(m), Some(s)) => (
                    Some(m.snr_mean_db - s.snr_mean_db),
                    Some(s.snr_var_db2 - m.snr_var_db2),
                ),
                _ => (None, None),
            };
            SnrSummary {
                length_m: length.length_m,
                per_estimator: rows,
                mimo_minus_simo_mean_db: mean_diff,
                simo_minus_mimo_var_db2: var_diff,
            }
        })
        .collect()
}

/// Everything persisted into `stats.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub stats: CampaignStats,
    pub crossings: Vec<NamedCrossings>,
    pub snr_summary: Vec<SnrSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedCrossings {
    pub probe: String,
    pub reference: String,
    pub fractions: Vec<CrossingFraction>,
}

/// Build the persistable report: crossings of every estimator against MIMO
/// at the 75th and 95th percentiles, plus the SNR summaries.
pub fn build_report(stats: &CampaignStats) -> CampaignReport {
    let mut crossings = Vec::new();
    let keys: Vec<String> = stats
        .lengths
        .first()
        .map(|l| l.estimators.iter().map(|e| e.estimator.clone()).collect())
        .unwrap_or_default();
    if keys.iter().any(|k| k == "MIMO") {
        for key in keys.iter().filter(|k| k.as_str() != "MIMO") {
            if let Ok(fractions) = crossing_fractions(stats, "MIMO", key, &[75.0, 95.0]) {
                crossings.push(NamedCrossings {
                    probe: key.clone(),
                    reference: "MIMO".to_string(),
                    fractions,
                });
            }
        }
    }
    CampaignReport {
        stats: stats.clone(),
        crossings,
        snr_summary: snr_summary(stats),
    }
}

/// Persist `stats.json`, per-(length, estimator) histogram CSVs and the
/// StDv-versus-distance CSV into `out_dir`.
pub fn save_campaign(out_dir: &std::path::Path, stats: &CampaignStats) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let report = build_report(stats);
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(out_dir.join("stats.json"), json.as_bytes())?;

    for length in &stats.lengths {
        for est in &length.estimators {
            let name = format!("hist_{}_{}.csv", format_length(length.length_m), est.estimator);
            let mut w = String::from("bin_start_rad,bin_end_rad,count\n");
            for (i, &count) in est.histogram.counts.iter().enumerate() {
                w.push_str(&format!(
                    "{},{},{count}\n",
                    est.histogram.edges[i],
                    est.histogram.edges[i + 1]
                ));
            }
            w.push_str(&format!(
                "{},inf,{}\n",
                est.histogram.edges.last().unwrap(),
                est.histogram.overflow
            ));
            std::fs::write(out_dir.join(name), w.as_bytes())?;
        }
    }

    let mut w = String::from("length_m,estimator,bin_start_m,bin_end_m,mean_stdv_rad,samples\n");
    for length in &stats.lengths {
        for est in &length.estimators {
            for bin in &est.stdv_vs_distance {
                w.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    length.length_m,
                    est.estimator,
                    bin.start_m,
                    bin.end_m,
                    bin.mean_stdv_rad,
                    bin.samples
                ));
            }
        }
    }
    std::fs::write(out_dir.join("stdv_vs_distance.csv"), w.as_bytes())?;
    Ok(())
}

fn format_length(length_m: f64) -> String {
    if length_m.fract() == 0.0 {
        format!("{}", length_m as u64)
    } else {
        format!("{length_m}")
    }
}
