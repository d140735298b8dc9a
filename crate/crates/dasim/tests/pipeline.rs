//! Cross-module integration: waveform path against fast path, strain
//! injection end to end, and scheme behaviour on complete interrogations.

use dasim::estimation::{
    differential_phase, phase_traces, stdv_profile, FlagFloor, PhaseTraceSet,
};
use dasim::fiber::{dual_pass_response, synthesize, FiberConfig, StrainEvent};
use dasim::interrogation::{
    estimate_channel, fast_channel_sim, simulate_backscatter, ChannelEstimate, NoiseStreams,
    ProbeConfig, Scheme, DEFAULT_TRANSIMPEDANCE,
};

fn fiber_cfg(length_m: f64, seed: u64) -> FiberConfig {
    FiberConfig {
        length_m,
        segment_length_m: 2.0,
        beat_length_m: 2.0,
        attenuation_db_per_km: 0.2,
        alpha: 0.0,
        theta_misalign_rad: 0.0,
        polarization_enabled: true,
        seed,
    }
}

fn probe_cfg(scheme: Scheme, log2: u32, frames: u32) -> ProbeConfig {
    ProbeConfig {
        scheme,
        code_log2_length: log2,
        symbol_rate_baud: 50e6,
        launch_power_dbm: 7.0,
        laser_linewidth_hz: 0.0,
        rx_noise_sigma_v: 0.0,
        frames,
        guard_symbols: None,
        transimpedance_v_per_sqrt_mw: DEFAULT_TRANSIMPEDANCE,
        memory_budget_mib: 8192.0,
    }
}

fn mimo_profile(fib: &FiberConfig, est: &ChannelEstimate, flag: f64) -> Vec<f64> {
    let realization = synthesize(fib).unwrap();
    let floors: Vec<f64> = realization
        .segments
        .iter()
        .map(|s| flag * s.attenuation)
        .collect();
    let traces = phase_traces(est, &FlagFloor::PerSegment(floors));
    let diff = differential_phase(&traces, 1).unwrap();
    stdv_profile(&diff, 0.0, 0.0).unwrap().stdv_rad
}

/// The fast path's receiver-noise level must match what the waveform path
/// actually produces after correlation: with the laser silent, the mean
/// differential StDv of both engines agrees well within 20%.
#[test]
fn fast_path_noise_matches_waveform_path() {
    let fib_cfg = fiber_cfg(400.0, 51);
    let fib = synthesize(&fib_cfg).unwrap();
    let mut cfg = probe_cfg(Scheme::Mimo, 11, 64);
    cfg.rx_noise_sigma_v = 1.7e-3;

    let mut streams = NoiseStreams::from_seed(1);
    let rx = simulate_backscatter(&fib, &cfg, 0.0, 0.0, &mut streams, None).unwrap();
    let full = estimate_channel(&rx, &cfg).unwrap();

    let mut streams = NoiseStreams::from_seed(2);
    let fast = fast_channel_sim(&fib, &cfg, 0.0, 0.0, &mut streams, None).unwrap();

    let mean = |xs: &[f64]| {
        let good: Vec<f64> = xs.iter().cloned().filter(|v| !v.is_nan()).collect();
        good.iter().sum::<f64>() / good.len() as f64
    };
    let full_mean = mean(&mimo_profile(&fib_cfg, &full, 1e-3));
    let fast_mean = mean(&mimo_profile(&fib_cfg, &fast, 1e-3));
    let ratio = fast_mean / full_mean;
    assert!(
        (ratio - 1.0).abs() < 0.2,
        "fast/full mean StDv ratio {ratio:.3} (fast {fast_mean:.3e}, full {full_mean:.3e})"
    );
}

/// With laser noise on, a complete waveform interrogation keeps the scheme
/// hierarchy: the full-matrix estimator is well below the partial ones, and
/// with a symmetric channel the row and column sum estimators coincide
/// exactly.
#[test]
fn waveform_path_scheme_hierarchy_under_laser_noise() {
    let fib_cfg = fiber_cfg(600.0, 52);
    let fib = synthesize(&fib_cfg).unwrap();
    let mut pooled = Vec::new();
    for scheme in [Scheme::Siso, Scheme::Simo, Scheme::Miso, Scheme::Mimo] {
        let mut cfg = probe_cfg(scheme, 12, 16);
        cfg.laser_linewidth_hz = 75.0;
        cfg.rx_noise_sigma_v = 1.7e-3;
        let mut streams = NoiseStreams::from_seed(7);
        let rx = simulate_backscatter(&fib, &cfg, 0.0, 0.0, &mut streams, None).unwrap();
        let est = estimate_channel(&rx, &cfg).unwrap();
        let stdv = mimo_profile(&fib_cfg, &est, 1e-3);
        let good: Vec<f64> = stdv.iter().cloned().filter(|v| !v.is_nan()).collect();
        pooled.push(good.iter().sum::<f64>() / good.len() as f64);
    }
    let (siso, simo, miso, mimo) = (pooled[0], pooled[1], pooled[2], pooled[3]);
    assert!(
        simo > 1.5 * mimo && siso > 1.5 * mimo && miso > 1.5 * mimo,
        "partial estimators must sit well above the full-matrix one: \
         SISO {siso:.3e} SIMO {simo:.3e} MISO {miso:.3e} MIMO {mimo:.3e}"
    );
    // Row and column sums are interchangeable on a symmetric channel.
    assert!(
        (miso / simo - 1.0).abs() < 0.25,
        "MISO {miso:.3e} and SIMO {simo:.3e} should be comparable"
    );
}

/// Noiseless MISO and SIMO estimates are identical when reflection
/// crosstalk and misalignment are absent (transpose-symmetric responses).
#[test]
fn miso_equals_simo_on_symmetric_channel() {
    let fib = synthesize(&fiber_cfg(100.0, 53)).unwrap();
    let simo_cfg = probe_cfg(Scheme::Simo, 7, 1);
    let miso_cfg = probe_cfg(Scheme::Miso, 7, 1);
    let mut s1 = NoiseStreams::from_seed(3);
    let mut s2 = NoiseStreams::from_seed(3);
    let rx_simo = simulate_backscatter(&fib, &simo_cfg, 0.0, 0.0, &mut s1, None).unwrap();
    let rx_miso = simulate_backscatter(&fib, &miso_cfg, 0.0, 0.0, &mut s2, None).unwrap();
    let est_simo = estimate_channel(&rx_simo, &simo_cfg).unwrap();
    let est_miso = estimate_channel(&rx_miso, &miso_cfg).unwrap();
    for seg in 0..est_simo.segments as usize {
        for k in 0..2 {
            let a = est_simo.entry(0, seg, k);
            let b = est_miso.entry(0, seg, k);
            assert!(
                (a - b).norm() < 1e-9,
                "segment {seg} entry {k}: {a:?} vs {b:?}"
            );
        }
    }
}

/// A sinusoidal strain at one segment shows up in the recovered
/// differential phase as a spectral line at the driving frequency, for the
/// disturbed segment and not upstream of it.
#[test]
fn strain_injection_recovers_driving_frequency() {
    let fib = synthesize(&fiber_cfg(200.0, 54)).unwrap();
    let cfg = probe_cfg(Scheme::Mimo, 13, 512);
    let frame_period = {
        let mut streams = NoiseStreams::from_seed(4);
        fast_channel_sim(&fib, &cfg, 0.0, 0.0, &mut streams, None)
            .unwrap()
            .frame_period_s
    };
    let f_drive = 100.0;
    let displacement: Vec<f64> = (0..cfg.frames as usize)
        .map(|t| 1e-7 * (2.0 * std::f64::consts::PI * f_drive * t as f64 * frame_period).sin())
        .collect();
    let event = StrainEvent {
        segment_index: 50,
        displacement_m: displacement,
        refr_index: dasim::PHASE_INDEX,
        photoelastic: dasim::PHOTOELASTIC_COEFF,
        wavelength_m: 1550e-9,
    };
    let mut streams = NoiseStreams::from_seed(4);
    let est = fast_channel_sim(&fib, &cfg, 0.0, 0.0, &mut streams, Some(&event)).unwrap();
    let traces = phase_traces(&est, &FlagFloor::Uniform(1e-6));
    let diff = differential_phase(&traces, 1).unwrap();

    let spectrum_peak = |traces: &PhaseTraceSet, seg: usize| -> usize {
        let series: Vec<f64> = traces.series[seg].iter().map(|v| v.unwrap()).collect();
        let unwrapped = dasim::estimation::unwrap_time(&series, traces.modulus);
        let mean = unwrapped.iter().sum::<f64>() / unwrapped.len() as f64;
        let n = unwrapped.len();
        let mut best = (0usize, 0.0f64);
        for bin in 1..n / 2 {
            // Goertzel-style single-bin DFT power.
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, &v) in unwrapped.iter().enumerate() {
                let w = 2.0 * std::f64::consts::PI * bin as f64 * t as f64 / n as f64;
                re += (v - mean) * w.cos();
                im -= (v - mean) * w.sin();
            }
            let p = re * re + im * im;
            if p > best.1 {
                best = (bin, p);
            }
        }
        best.0
    };

    let n = cfg.frames as f64;
    let expected_bin = (f_drive * frame_period * n).round() as usize;
    let peak = spectrum_peak(&diff, 50);
    assert!(
        (peak as i64 - expected_bin as i64).abs() <= 1,
        "peak at bin {peak}, expected {expected_bin}"
    );

    // Upstream segments carry no modulation; the differential at the next
    // downstream gauge cancels it again.
    let quiet = &diff.series[30];
    let spread = quiet
        .iter()
        .map(|v| v.unwrap())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    assert!(
        spread.1 - spread.0 < 1e-9,
        "undisturbed segment shows spread {:?}",
        spread
    );
    let downstream = &diff.series[52];
    let spread = downstream
        .iter()
        .map(|v| v.unwrap())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    assert!(
        spread.1 - spread.0 < 1e-9,
        "strain should cancel out of gauges beyond the disturbance: {:?}",
        spread
    );
}

/// The strain phase also survives the full waveform engine.
#[test]
fn strain_survives_waveform_engine() {
    let fib = synthesize(&fiber_cfg(60.0, 55)).unwrap();
    let cfg = probe_cfg(Scheme::Mimo, 7, 4);
    let event = StrainEvent {
        segment_index: 10,
        displacement_m: vec![0.0, 2e-8, 4e-8, 6e-8],
        refr_index: dasim::PHASE_INDEX,
        photoelastic: dasim::PHOTOELASTIC_COEFF,
        wavelength_m: 1550e-9,
    };
    let mut streams = NoiseStreams::from_seed(5);
    let rx = simulate_backscatter(&fib, &cfg, 0.0, 0.0, &mut streams, Some(&event)).unwrap();
    let est = estimate_channel(&rx, &cfg).unwrap();
    let hs = dual_pass_response(&fib, 0.0, 0.0).unwrap();
    let k = 2.0 * dasim::PHASE_INDEX * dasim::PHOTOELASTIC_COEFF * 2.0 * std::f64::consts::PI
        / 1550e-9;
    for (f, dl) in event.displacement_m.iter().enumerate() {
        for seg in [10usize, 25] {
            let got = est.matrix(f, seg);
            let expected_rot = k * dl;
            let rotated = hs[seg].scale(num_complex::Complex64::from_polar(1.0, expected_rot));
            assert!(
                got.max_entry_distance(&rotated) < 1e-9,
                "frame {f} segment {seg}"
            );
        }
        // Upstream of the disturbance nothing changes.
        let got = est.matrix(f, 5);
        assert!(got.max_entry_distance(&hs[5]) < 1e-9);
    }
}

/// Every campaign scenario shipped under `configs/` parses and validates.
#[test]
fn shipped_campaign_configs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if !name.starts_with("campaign_") {
            continue;
        }
        let raw = std::fs::read_to_string(&path).unwrap();
        let cfg: dasim::campaign::CampaignConfig = serde_json::from_str(&raw).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        seen += 1;
    }
    assert!(seen >= 5, "expected the full set of campaign scenarios, found {seen}");
}

/// Static, noise-free interrogation produces an all-zero StDv profile.
#[test]
fn static_noiseless_run_has_zero_stdv() {
    let fib = synthesize(&fiber_cfg(80.0, 56)).unwrap();
    let cfg = probe_cfg(Scheme::Simo, 7, 8);
    let mut streams = NoiseStreams::from_seed(6);
    let rx = simulate_backscatter(&fib, &cfg, 0.0, 0.0, &mut streams, None).unwrap();
    let est = estimate_channel(&rx, &cfg).unwrap();
    let traces = phase_traces(&est, &FlagFloor::Uniform(1e-6));
    let diff = differential_phase(&traces, 1).unwrap();
    let profile = stdv_profile(&diff, 0.0, 0.0).unwrap();
    for (i, &s) in profile.stdv_rad.iter().enumerate() {
        assert!(s < 1e-12, "segment {i}: stdv {s}");
    }
}
