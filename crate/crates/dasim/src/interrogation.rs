//! Code-based interrogation of a fibre realization.
//!
//! The probe transmits Golay complementary BPSK sequences continuously. Each
//! sub-frame carries one code of the pair preceded by a cyclic prefix longer
//! than the channel memory, so the periodic correlation of the received block
//! with the code realizes a sidelobe-free channel estimate
//! (`autocorr(a) + autocorr(b) = 2 L delta`). Single-polarization schemes
//! send the pair on X only; dual-input schemes use four sub-frames
//! `X: (a, b, a, b)`, `Y: (a, b, -a, -b)` whose correlation sums and
//! differences separate the X- and Y-driven columns exactly.
//!
//! Laser phase noise is a Wiener process shared between transmitter and
//! local oscillator (self-homodyne); what survives in the backscatter of
//! segment `i` is the phase increment over the round-trip delay `tau_i`.
//! Receiver noise is additive white Gaussian on every quadrature.
//!
//! Two simulation paths produce a [`ChannelEstimate`]:
//!
//! * [`simulate_backscatter`] + [`estimate_channel`] — full waveform
//!   synthesis and correlation, exact but O(frames x symbols x segments);
//! * [`fast_channel_sim`] — per-frame statistical shortcut emitting
//!   `H_i e^{j psi} + E` with the post-correlation receiver-noise level,
//!   used by Monte Carlo campaigns.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{dual_pass_response, strain_phase, FiberRealization, StrainEvent};
use crate::jones::JonesMatrix;
use crate::rng::{substream, Stream};
use crate::{GROUP_INDEX, SPEED_OF_LIGHT};

/// Polarization channel usage at the interrogator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    /// Single input, single output: transmit X, detect X.
    Siso,
    /// Single input, dual output: transmit X, detect X and Y.
    Simo,
    /// Dual input, single output: transmit X and Y, detect X.
    Miso,
    /// Dual input, dual output: the full 2x2 channel.
    Mimo,
}

impl Scheme {
    pub fn dual_input(self) -> bool {
        matches!(self, Scheme::Miso | Scheme::Mimo)
    }

    pub fn dual_output(self) -> bool {
        matches!(self, Scheme::Simo | Scheme::Mimo)
    }

    /// Number of code sub-frames per estimation frame.
    pub fn subframes(self) -> usize {
        if self.dual_input() {
            4
        } else {
            2
        }
    }

    /// Complex entries stored per segment: 4 (2x2), 2 (column/row) or 1.
    pub fn entries_per_segment(self) -> usize {
        match self {
            Scheme::Siso => 1,
            Scheme::Simo | Scheme::Miso => 2,
            Scheme::Mimo => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Siso => "SISO",
            Scheme::Simo => "SIMO",
            Scheme::Miso => "MISO",
            Scheme::Mimo => "MIMO",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SISO" => Ok(Scheme::Siso),
            "SIMO" => Ok(Scheme::Simo),
            "MISO" => Ok(Scheme::Miso),
            "MIMO" => Ok(Scheme::Mimo),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Default transimpedance scale mapping receiver volts to the normalized
/// field unit (sqrt mW). Calibrated so that at the default 7 dBm launch and
/// 1.7 mV RMS receiver noise the post-correlation noise sits just below the
/// laser delay-difference floor of a short-range sensor.
pub const DEFAULT_TRANSIMPEDANCE: f64 = 0.029;

/// Interrogation configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub scheme: Scheme,
    /// Golay code length exponent; `L_c = 2^code_log2_length`.
    pub code_log2_length: u32,
    pub symbol_rate_baud: f64,
    /// Total launch power across both polarizations, dBm.
    #[serde(default = "default_launch_power")]
    pub launch_power_dbm: f64,
    /// Laser linewidth, Hz (Wiener increment variance `2 pi dnu T_s`).
    #[serde(default = "default_linewidth")]
    pub laser_linewidth_hz: f64,
    /// Receiver AWGN, volts RMS per quadrature.
    #[serde(default = "default_rx_noise")]
    pub rx_noise_sigma_v: f64,
    /// Number of estimation frames (code repetitions).
    pub frames: u32,
    /// Cyclic prefix length in symbols; `None` sizes it to the channel.
    #[serde(default)]
    pub guard_symbols: Option<u32>,
    /// Receiver conversion, volts per sqrt(mW) of optical field.
    #[serde(default = "default_transimpedance")]
    pub transimpedance_v_per_sqrt_mw: f64,
    /// Refusal threshold for waveform/estimate allocations, MiB.
    #[serde(default = "default_memory_budget")]
    pub memory_budget_mib: f64,
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

fn default_memory_budget() -> f64 {
    4096.0
}

impl ProbeConfig {
    pub fn code_length(&self) -> usize {
        1usize << self.code_log2_length
    }

    pub fn symbol_period_s(&self) -> f64 {
        1.0 / self.symbol_rate_baud
    }

    /// Launch power in linear mW.
    pub fn launch_mw(&self) -> f64 {
        10f64.powf(self.launch_power_dbm / 10.0)
    }

    /// Receiver noise converted to the optical field scale, per quadrature.
    pub fn noise_field_sigma(&self) -> f64 {
        self.rx_noise_sigma_v / self.transimpedance_v_per_sqrt_mw
    }

    /// Round-trip tap spacing on the symbol grid, meters.
    pub fn tap_spacing_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * GROUP_INDEX * self.symbol_rate_baud)
    }

    /// Post-correlation noise std per complex-entry quadrature.
    pub fn post_correlation_sigma(&self) -> f64 {
        self.noise_field_sigma() / (2.0 * self.code_length() as f64 * self.launch_mw()).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.code_log2_length == 0 || self.code_log2_length > 20 {
            return Err(Error::invalid(
                "probe: code_log2_length must be in [1, 20]",
            ));
        }
        if !self.symbol_rate_baud.is_finite() || self.symbol_rate_baud <= 0.0 {
            return Err(Error::invalid("probe: symbol_rate_baud must be > 0"));
        }
        if self.laser_linewidth_hz < 0.0 {
            return Err(Error::invalid("probe: laser_linewidth_hz must be >= 0"));
        }
        if self.rx_noise_sigma_v < 0.0 {
            return Err(Error::invalid("probe: rx_noise_sigma_v must be >= 0"));
        }
        if self.frames == 0 {
            return Err(Error::invalid("probe: frames must be >= 1"));
        }
        if !self.transimpedance_v_per_sqrt_mw.is_finite() || self.transimpedance_v_per_sqrt_mw <= 0.0 {
            return Err(Error::invalid("probe: transimpedance must be > 0"));
        }
        Ok(())
    }
}

/// Binary Golay complementary pair; `autocorr(a) + autocorr(b)` is an exact
/// integer delta of height `2 L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolayPair {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

impl GolayPair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Generate a complementary pair of length `2^log2_len` by recursive
/// doubling `a' = a || b`, `b' = a || -b` from the seed `a = b = [1]`.
pub fn golay_pair(log2_len: u32) -> Result<GolayPair> {
    if log2_len == 0 {
        return Err(Error::invalid("golay_pair: log2_len must be >= 1"));
    }
    if log2_len > 20 {
        return Err(Error::invalid("golay_pair: log2_len above 20 is unsupported"));
    }
    let mut a: Vec<i8> = vec![1];
    let mut b: Vec<i8> = vec![1];
    for _ in 0..log2_len {
        let mut next_a = a.clone();
        next_a.extend_from_slice(&b);
        let mut next_b = a.clone();
        next_b.extend(b.iter().map(|&v| -v));
        a = next_a;
        b = next_b;
    }
    Ok(GolayPair { a, b })
}

/// Aperiodic autocorrelation at lags `-(L-1) ..= L-1`, exact integers.
pub fn aperiodic_autocorr(x: &[i8]) -> Vec<i64> {
    let l = x.len();
    let mut out = vec![0i64; 2 * l - 1];
    for (idx, lag) in (-(l as i64 - 1)..=(l as i64 - 1)).enumerate() {
        let mut acc = 0i64;
        for m in 0..l {
            let k = m as i64 + lag;
            if k >= 0 && (k as usize) < l {
                acc += x[m] as i64 * x[k as usize] as i64;
            }
        }
        out[idx] = acc;
    }
    out
}

/// Which code of the pair a sub-frame carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeChoice {
    A,
    B,
}

/// Per-sub-frame transmit pattern.
#[derive(Debug, Clone, Copy)]
pub struct Subframe {
    pub code: CodeChoice,
    pub x_sign: f64,
    pub y_sign: f64,
}

/// Fully resolved probe waveform description.
#[derive(Debug, Clone)]
pub struct Probe {
    pub scheme: Scheme,
    pub pair: GolayPair,
    /// Cyclic prefix symbols per sub-frame.
    pub guard: usize,
    /// Per-polarization field amplitude (sqrt mW).
    pub x_amp: f64,
    pub y_amp: f64,
    pub subframes: Vec<Subframe>,
}

/// Lay out the sub-frame pattern for a scheme.
///
/// Single-input schemes send `(a, b)` on X with Y silent; dual-input schemes
/// use the four-sub-frame arrangement `X: (a, b, a, b)`, `Y: (a, b, -a, -b)`
/// at half the per-polarization power so total launch power is unchanged.
pub fn build_probe(cfg: &ProbeConfig, pair: GolayPair) -> Probe {
    let g = cfg.launch_mw().sqrt();
    let (x_amp, y_amp, subframes) = if cfg.scheme.dual_input() {
        let u = g / 2f64.sqrt();
        (
            u,
            u,
            vec![
                Subframe { code: CodeChoice::A, x_sign: 1.0, y_sign: 1.0 },
                Subframe { code: CodeChoice::B, x_sign: 1.0, y_sign: 1.0 },
                Subframe { code: CodeChoice::A, x_sign: 1.0, y_sign: -1.0 },
                Subframe { code: CodeChoice::B, x_sign: 1.0, y_sign: -1.0 },
            ],
        )
    } else {
        (
            g,
            0.0,
            vec![
                Subframe { code: CodeChoice::A, x_sign: 1.0, y_sign: 0.0 },
                Subframe { code: CodeChoice::B, x_sign: 1.0, y_sign: 0.0 },
            ],
        )
    };
    Probe {
        scheme: cfg.scheme,
        pair,
        guard: cfg.guard_symbols.unwrap_or(0) as usize,
        x_amp,
        y_amp,
        subframes,
    }
}

impl Probe {
    /// Symbols per sub-frame including the cyclic prefix.
    pub fn subframe_symbols(&self) -> usize {
        self.pair.len() + self.guard
    }

    /// Symbols per estimation frame.
    pub fn frame_symbols(&self) -> usize {
        self.subframes.len() * self.subframe_symbols()
    }

    /// Frame repetition period in seconds.
    pub fn frame_period_s(&self, symbol_rate: f64) -> f64 {
        self.frame_symbols() as f64 / symbol_rate
    }

    fn code(&self, choice: CodeChoice) -> &[i8] {
        match choice {
            CodeChoice::A => &self.pair.a,
            CodeChoice::B => &self.pair.b,
        }
    }

    /// Transmitted (x, y) field at a symbol index within one frame.
    pub fn tx_symbol(&self, idx_in_frame: usize) -> (f64, f64) {
        let sf_len = self.subframe_symbols();
        let sf = idx_in_frame / sf_len;
        let pos = idx_in_frame % sf_len;
        let spec = &self.subframes[sf];
        let code = self.code(spec.code);
        let l = code.len();
        // Cyclic prefix carries the code tail.
        let sym = if pos < self.guard {
            code[l - self.guard + pos]
        } else {
            code[pos - self.guard]
        } as f64;
        (
            sym * spec.x_sign * self.x_amp,
            sym * spec.y_sign * self.y_amp,
        )
    }
}

/// Cumulative Wiener phase over `n` samples with period `sample_period_s`:
/// increments are i.i.d. `N(0, 2 pi dnu T_s)`, first sample zero.
pub fn wiener_phase(
    linewidth_hz: f64,
    sample_period_s: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if linewidth_hz <= 0.0 || n == 0 {
        return out;
    }
    let sigma = (2.0 * std::f64::consts::PI * linewidth_hz * sample_period_s).sqrt();
    let mut acc = 0.0;
    for value in out.iter_mut().skip(1) {
        let z: f64 = StandardNormal.sample(rng);
        acc += sigma * z;
        *value = acc;
    }
    out
}

/// Laser and receiver noise substreams for one interrogation run.
#[derive(Debug, Clone)]
pub struct NoiseStreams {
    pub laser: ChaCha8Rng,
    pub rx: ChaCha8Rng,
}

impl NoiseStreams {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            laser: substream(seed, Stream::Laser),
            rx: substream(seed, Stream::Receiver),
        }
    }
}

/// Received coherent-receiver outputs, one complex sample per symbol.
#[derive(Debug, Clone)]
pub struct ReceivedWaveforms {
    pub x: Vec<Complex64>,
    /// Present only for dual-output schemes.
    pub y: Option<Vec<Complex64>>,
    pub probe: Probe,
    pub frames: u32,
    /// Leading frames simulated for steady state and skipped by estimation.
    pub warmup_frames: u32,
    pub taps_per_segment: usize,
    pub segment_count: usize,
    pub symbol_rate_baud: f64,
}

/// Channel estimates per frame and segment.
///
/// Entry layout per segment: MIMO `[xx, xy, yx, yy]`, SIMO `[xx, yx]`,
/// MISO `[xx, xy]`, SISO `[xx]`.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub scheme: Scheme,
    pub frames: u32,
    pub segments: u32,
    pub frame_period_s: f64,
    pub segment_length_m: f64,
    /// Frame-major storage.
    pub entries: Vec<Complex64>,
}

impl ChannelEstimate {
    pub fn entries_per_segment(&self) -> usize {
        self.scheme.entries_per_segment()
    }

    pub fn entry(&self, frame: usize, segment: usize, k: usize) -> Complex64 {
        let epc = self.entries_per_segment();
        self.entries[(frame * self.segments as usize + segment) * epc + k]
    }

    /// Full Jones matrix (MIMO only).
    pub fn matrix(&self, frame: usize, segment: usize) -> JonesMatrix {
        debug_assert_eq!(self.scheme, Scheme::Mimo);
        JonesMatrix::new(
            self.entry(frame, segment, 0),
            self.entry(frame, segment, 1),
            self.entry(frame, segment, 2),
            self.entry(frame, segment, 3),
        )
    }
}

/// Integer number of delay taps per fibre segment, or an error when the
/// segment grid does not sit on the symbol grid.
fn taps_per_segment(fib: &FiberRealization, cfg: &ProbeConfig) -> Result<usize> {
    let spacing = cfg.tap_spacing_m();
    let ratio = fib.segment_length_m / spacing;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::invalid(format!(
            "probe: segment length {} m is not an integer multiple of the tap spacing {spacing} m",
            fib.segment_length_m
        )));
    }
    Ok(rounded as usize)
}

fn check_budget(bytes: usize, budget_mib: f64, what: &str) -> Result<()> {
    let mib = bytes as f64 / (1024.0 * 1024.0);
    if mib > budget_mib {
        return Err(Error::BudgetExceeded(format!(
            "{what} needs {mib:.1} MiB, budget is {budget_mib:.1} MiB"
        )));
    }
    Ok(())
}

/// Synthesize the received waveforms of a coded interrogation run.
///
/// The model is symbol-rate: `r(t) = sum_i H_i s(t - tau_i)
/// e^{j[phi(t - tau_i) - phi(t)]} + n(t)` with one shared Wiener laser path
/// and circular complex AWGN per output. One warmup frame establishes
/// steady state.
pub fn simulate_backscatter(
    fib: &FiberRealization,
    cfg: &ProbeConfig,
    alpha: f64,
    theta_misalign: f64,
    streams: &mut NoiseStreams,
    strain: Option<&StrainEvent>,
) -> Result<ReceivedWaveforms> {
    cfg.validate()?;
    if fib.is_empty() {
        return Err(Error::invalid("probe: empty fibre realization"));
    }
    if let Some(event) = strain {
        event.validate(fib.len())?;
    }
    let k = taps_per_segment(fib, cfg)?;
    let n_seg = fib.len();
    let max_delay = n_seg * k;
    let l = cfg.code_length();
    if max_delay >= l {
        return Err(Error::invalid(format!(
            "probe: channel spans {max_delay} taps but the code length is only {l}; \
             increase code_log2_length"
        )));
    }
    let guard = match cfg.guard_symbols {
        Some(g) => {
            if (g as usize) < max_delay {
                return Err(Error::invalid(format!(
                    "probe: guard_symbols {g} shorter than the channel memory {max_delay}"
                )));
            }
            g as usize
        }
        None => max_delay,
    };

    let mut resolved = cfg.clone();
    resolved.guard_symbols = Some(guard as u32);
    let probe = build_probe(&resolved, golay_pair(cfg.code_log2_length)?);

    let frame_symbols = probe.frame_symbols();
    let warmup = 1usize;
    let total = (cfg.frames as usize + warmup) * frame_symbols;
    let outputs = if cfg.scheme.dual_output() { 2 } else { 1 };
    let bytes = (outputs * total + total + max_delay) * 16;
    check_budget(bytes, cfg.memory_budget_mib, "waveform simulation")?;

    // Laser phase history, indexed by symbol with `max_delay` of lead-in.
    let phase = wiener_phase(
        cfg.laser_linewidth_hz,
        cfg.symbol_period_s(),
        total + max_delay,
        &mut streams.laser,
    );
    let phase_at = |t: i64| phase[(t + max_delay as i64) as usize];

    let responses = dual_pass_response(fib, alpha, theta_misalign)?;
    let strain_series = strain.map(|e| (e.segment_index, strain_phase(e)));

    let mut rx_x = vec![Complex64::default(); total];
    let mut rx_y = if cfg.scheme.dual_output() {
        Some(vec![Complex64::default(); total])
    } else {
        None
    };

    for (i, h) in responses.iter().enumerate() {
        let d = (i + 1) * k;
        for t in d..total {
            let (sx, sy) = probe.tx_symbol((t - d) % frame_symbols);
            if sx == 0.0 && sy == 0.0 {
                continue;
            }
            let mut rot = phase_at(t as i64 - d as i64) - phase_at(t as i64);
            if let Some((seg, ref series)) = strain_series {
                if i >= seg {
                    let frame = (t / frame_symbols).saturating_sub(warmup);
                    rot += series[frame.min(series.len() - 1)];
                }
            }
            let ph = Complex64::from_polar(1.0, rot);
            let ex = (h.xx * sx + h.xy * sy) * ph;
            rx_x[t] += ex;
            if let Some(ref mut y) = rx_y {
                y[t] += (h.yx * sx + h.yy * sy) * ph;
            }
        }
    }

    let sigma = cfg.noise_field_sigma();
    if sigma > 0.0 {
        let add_noise = |buf: &mut Vec<Complex64>, rng: &mut ChaCha8Rng| {
            for v in buf.iter_mut() {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *v += Complex64::new(sigma * re, sigma * im);
            }
        };
        add_noise(&mut rx_x, &mut streams.rx);
        if let Some(ref mut y) = rx_y {
            add_noise(y, &mut streams.rx);
        }
    }

    Ok(ReceivedWaveforms {
        x: rx_x,
        y: rx_y,
        probe,
        frames: cfg.frames,
        warmup_frames: warmup as u32,
        taps_per_segment: k,
        segment_count: n_seg,
        symbol_rate_baud: cfg.symbol_rate_baud,
    })
}

/// Correlate received waveforms with the probe codes and emit per-frame,
/// per-segment channel estimates.
///
/// Within each sub-frame the block after the cyclic prefix is periodically
/// correlated with the code; complementary sums cancel all cross-tap
/// leakage, and for dual-input schemes the sum/difference of the two
/// sub-frame groups separates the X- and Y-driven responses.
pub fn estimate_channel(
    rx: &ReceivedWaveforms,
    cfg: &ProbeConfig,
) -> Result<ChannelEstimate> {
    let probe = &rx.probe;
    let l = probe.pair.len();
    let scheme = probe.scheme;
    if scheme.dual_output() && rx.y.is_none() {
        return Err(Error::invalid("estimate: missing Y output for dual-output scheme"));
    }
    let n_seg = rx.segment_count;
    let k = rx.taps_per_segment;
    let frame_symbols = probe.frame_symbols();
    let sf_len = probe.subframe_symbols();
    let expected = (rx.frames as usize + rx.warmup_frames as usize) * frame_symbols;
    if rx.x.len() != expected {
        return Err(Error::invalid(format!(
            "estimate: waveform length {} does not match {} frames of {frame_symbols} symbols",
            rx.x.len(),
            rx.frames as usize + rx.warmup_frames as usize
        )));
    }

    let epc = scheme.entries_per_segment();
    let mut entries = vec![Complex64::default(); rx.frames as usize * n_seg * epc];

    let code_a: Vec<f64> = probe.pair.a.iter().map(|&v| v as f64).collect();
    let code_b: Vec<f64> = probe.pair.b.iter().map(|&v| v as f64).collect();
    let outputs: Vec<&[Complex64]> = match rx.y {
        Some(ref y) => vec![&rx.x[..], &y[..]],
        None => vec![&rx.x[..]],
    };

    // Periodic correlation of one received block with a code at lag d:
    // C(d) = sum_m code[m] r[T0 + (m + d) mod L].
    let corr = |block: &[Complex64], code: &[f64], d: usize| -> Complex64 {
        let mut acc = Complex64::default();
        let head = l - d;
        for m in 0..head {
            acc += code[m] * block[m + d];
        }
        for m in head..l {
            acc += code[m] * block[m + d - l];
        }
        acc
    };

    let combos = probe.subframes.len() / 2;
    let mut raw = vec![Complex64::default(); combos * outputs.len()];

    for f in 0..rx.frames as usize {
        let frame_start = (f + rx.warmup_frames as usize) * frame_symbols;
        for seg in 0..n_seg {
            let d = (seg + 1) * k;
            for (o, out) in outputs.iter().enumerate() {
                for group in 0..combos {
                    let t_a = frame_start + (2 * group) * sf_len + probe.guard;
                    let t_b = frame_start + (2 * group + 1) * sf_len + probe.guard;
                    let sum = corr(&out[t_a..t_a + l], &code_a, d)
                        + corr(&out[t_b..t_b + l], &code_b, d);
                    raw[o * combos + group] = sum / (2.0 * l as f64 * probe.x_amp);
                }
            }
            let base = (f * n_seg + seg) * epc;
            match scheme {
                Scheme::Siso => {
                    entries[base] = raw[0];
                }
                Scheme::Simo => {
                    entries[base] = raw[0];
                    entries[base + 1] = raw[combos];
                }
                Scheme::Miso => {
                    // Groups estimate h_xx + h_xy and h_xx - h_xy.
                    entries[base] = 0.5 * (raw[0] + raw[1]);
                    entries[base + 1] = 0.5 * (raw[0] - raw[1]);
                }
                Scheme::Mimo => {
                    for o in 0..2 {
                        let plus = raw[o * combos];
                        let minus = raw[o * combos + 1];
                        let col_x = 0.5 * (plus + minus);
                        let col_y = 0.5 * (plus - minus);
                        // Row-major [xx, xy, yx, yy].
                        entries[base + 2 * o] = col_x;
                        entries[base + 2 * o + 1] = col_y;
                    }
                }
            }
        }
    }

    Ok(ChannelEstimate {
        scheme,
        frames: rx.frames,
        segments: n_seg as u32,
        frame_period_s: probe.frame_period_s(rx.symbol_rate_baud),
        segment_length_m: rx.taps_per_segment as f64 * cfg.tap_spacing_m(),
        entries,
    })
}

/// Statistical shortcut over the waveform path.
///
/// Per frame `t` and segment `i` it emits
/// `H_i e^{j psi_{t,i}} + E_{t,i}` where
/// `psi_{t,i} = W(t_frame) - W(t_frame - tau_i)` comes from one shared
/// Wiener path and `E` is circular Gaussian at the post-correlation
/// receiver-noise level (processing gain `2 L_c` and the scheme's
/// power/sub-frame arrangement included).
pub fn fast_channel_sim(
    fib: &FiberRealization,
    cfg: &ProbeConfig,
    alpha: f64,
    theta_misalign: f64,
    streams: &mut NoiseStreams,
    strain: Option<&StrainEvent>,
) -> Result<ChannelEstimate> {
    cfg.validate()?;
    if fib.is_empty() {
        return Err(Error::invalid("probe: empty fibre realization"));
    }
    if let Some(event) = strain {
        event.validate(fib.len())?;
    }
    let n_seg = fib.len();
    let frames = cfg.frames as usize;
    let epc = cfg.scheme.entries_per_segment();
    check_budget(
        frames * n_seg * (epc * 16 + 16),
        cfg.memory_budget_mib,
        "fast channel simulation",
    )?;

    // Frame cadence mirrors the waveform path, including the auto guard.
    let max_delay_s = 2.0 * GROUP_INDEX * fib.distance_m(n_seg - 1) / SPEED_OF_LIGHT;
    let guard = match cfg.guard_symbols {
        Some(g) => g as usize,
        None => (max_delay_s * cfg.symbol_rate_baud).ceil() as usize,
    };
    let frame_period = cfg.scheme.subframes() as f64 * (cfg.code_length() + guard) as f64
        / cfg.symbol_rate_baud;

    let responses = dual_pass_response(fib, alpha, theta_misalign)?;
    let strain_series = strain.map(|e| (e.segment_index, strain_phase(e)));

    // Wiener phase sampled at every frame boundary and every emission
    // instant `t_frame - tau_i`, walked once in global time order.
    let mut psi = vec![0.0f64; frames * n_seg];
    if cfg.laser_linewidth_hz > 0.0 {
        let tau: Vec<f64> = (0..n_seg)
            .map(|i| 2.0 * GROUP_INDEX * fib.distance_m(i) / SPEED_OF_LIGHT)
            .collect();
        // (time, frame, segment index or n_seg for the frame boundary)
        let mut points: Vec<(f64, u32, u32)> = Vec::with_capacity(frames * (n_seg + 1));
        for f in 0..frames {
            let t_frame = (f as f64 + 1.0) * frame_period;
            points.push((t_frame, f as u32, n_seg as u32));
            for (i, t) in tau.iter().enumerate() {
                points.push((t_frame - t, f as u32, i as u32));
            }
        }
        points.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let q = 2.0 * std::f64::consts::PI * cfg.laser_linewidth_hz;
        let mut w = vec![0.0f64; frames * (n_seg + 1)];
        let mut acc = 0.0;
        let mut prev_t = points[0].0;
        for &(t, f, s) in &points {
            let dt = t - prev_t;
            if dt > 0.0 {
                let z: f64 = StandardNormal.sample(&mut streams.laser);
                acc += z * (q * dt).sqrt();
                prev_t = t;
            }
            w[f as usize * (n_seg + 1) + s as usize] = acc;
        }
        for f in 0..frames {
            let w_frame = w[f * (n_seg + 1) + n_seg];
            for i in 0..n_seg {
                psi[f * n_seg + i] = w_frame - w[f * (n_seg + 1) + i];
            }
        }
    }

    let sigma_e = if cfg.rx_noise_sigma_v > 0.0 {
        cfg.post_correlation_sigma()
    } else {
        0.0
    };

    let mut entries = vec![Complex64::default(); frames * n_seg * epc];
    for f in 0..frames {
        for (i, h) in responses.iter().enumerate() {
            let mut rot = psi[f * n_seg + i];
            if let Some((seg, ref series)) = strain_series {
                if i >= seg {
                    rot += series[f.min(series.len() - 1)];
                }
            }
            let ph = Complex64::from_polar(1.0, rot);
            let base = (f * n_seg + i) * epc;
            let picked: [Complex64; 4] = [h.xx * ph, h.xy * ph, h.yx * ph, h.yy * ph];
            let slots: &[usize] = match cfg.scheme {
                Scheme::Siso => &[0],
                Scheme::Simo => &[0, 2],
                Scheme::Miso => &[0, 1],
                Scheme::Mimo => &[0, 1, 2, 3],
            };
            for (k, &slot) in slots.iter().enumerate() {
                let mut v = picked[slot];
                if sigma_e > 0.0 {
                    let re: f64 = StandardNormal.sample(&mut streams.rx);
                    let im: f64 = StandardNormal.sample(&mut streams.rx);
                    v += Complex64::new(sigma_e * re, sigma_e * im);
                }
                entries[base + k] = v;
            }
        }
    }

    Ok(ChannelEstimate {
        scheme: cfg.scheme,
        frames: cfg.frames,
        segments: n_seg as u32,
        frame_period_s: frame_period,
        segment_length_m: fib.segment_length_m,
        entries,
    })
}
