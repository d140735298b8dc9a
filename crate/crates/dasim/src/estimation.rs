//! Phase estimators for the four probing schemes, differential phase over a
//! gauge length, temporal unwrapping, StDv/SNR profiles, and the
//! polarization phase-fading coefficient maps.
//!
//! Estimator summary (H is the per-segment dual-pass response):
//!
//! * MIMO: `0.5 angle(det H)` — recovers the scatter phase modulo pi for any
//!   segment birefringence since the unitary factors carry unit determinant.
//! * SIMO: `angle(h_xx + h_yx)` — the scatter phase modulated by a complex
//!   coefficient of the segment's polarization parameters; zeros of that
//!   coefficient are complete phase fades.
//! * SISO: `angle(h_xx)`; MISO: `angle(h_xx + h_xy)`.
//!
//! A sample whose estimator argument falls below a flag floor carries no
//! reliable phase and is excluded from statistics (counted separately).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interrogation::{ChannelEstimate, Scheme};
use crate::jones::{
    reflection_matrix, rotation, unitary_from_params, wrap_to_modulus, JonesMatrix,
    PolarizationParams,
};

/// Default amplitude floor below which an estimator argument is flagged.
pub const FLAG_AMPLITUDE_EPS: f64 = 1e-6;

/// SNR reported for profiles quieter than 1e-6 rad.
pub const SNR_CAP_DB: f64 = 120.0;

/// MIMO phase estimate `0.5 angle(det H)` in `(-pi/2, pi/2]`.
///
/// Returns `None` (flagged) when `sqrt(|det H|)` falls below `floor`.
pub fn phase_mimo_floor(h: &JonesMatrix, floor: f64) -> Option<f64> {
    let det = h.det();
    if det.norm() < floor * floor {
        return None;
    }
    Some(0.5 * det.arg())
}

pub fn phase_mimo(h: &JonesMatrix) -> Option<f64> {
    phase_mimo_floor(h, FLAG_AMPLITUDE_EPS)
}

/// SIMO phase estimate `angle(h_xx + h_yx)`.
pub fn phase_simo_floor(h_xx: Complex64, h_yx: Complex64, floor: f64) -> Option<f64> {
    let sum = h_xx + h_yx;
    if sum.norm() < floor {
        return None;
    }
    Some(sum.arg())
}

pub fn phase_simo(h_xx: Complex64, h_yx: Complex64) -> Option<f64> {
    phase_simo_floor(h_xx, h_yx, FLAG_AMPLITUDE_EPS)
}

/// SISO phase estimate `angle(h_xx)`.
pub fn phase_siso_floor(h_xx: Complex64, floor: f64) -> Option<f64> {
    if h_xx.norm() < floor {
        return None;
    }
    Some(h_xx.arg())
}

pub fn phase_siso(h_xx: Complex64) -> Option<f64> {
    phase_siso_floor(h_xx, FLAG_AMPLITUDE_EPS)
}

/// MISO phase estimate `angle(h_xx + h_xy)`.
pub fn phase_miso_floor(h_xx: Complex64, h_xy: Complex64, floor: f64) -> Option<f64> {
    phase_simo_floor(h_xx, h_xy, floor)
}

pub fn phase_miso(h_xx: Complex64, h_xy: Complex64) -> Option<f64> {
    phase_miso_floor(h_xx, h_xy, FLAG_AMPLITUDE_EPS)
}

/// Per-segment absolute-phase (or differential-phase) time series.
#[derive(Debug, Clone)]
pub struct PhaseTraceSet {
    /// `series[segment][frame]`; `None` marks flagged samples.
    pub series: Vec<Vec<Option<f64>>>,
    /// Wrap modulus of the stored phases: pi for MIMO, 2 pi otherwise.
    pub modulus: f64,
    /// Gauge expressed in segments; 0 for raw (undifferenced) traces.
    pub gauge_segments: usize,
    pub frame_period_s: f64,
    pub segment_length_m: f64,
}

impl PhaseTraceSet {
    pub fn segments(&self) -> usize {
        self.series.len()
    }

    pub fn frames(&self) -> usize {
        self.series.first().map(|s| s.len()).unwrap_or(0)
    }

    /// Gauge length in meters (0 for raw traces).
    pub fn gauge_length_m(&self) -> f64 {
        self.gauge_segments as f64 * self.segment_length_m
    }

    pub fn distance_m(&self, segment: usize) -> f64 {
        (segment as f64 + 1.0) * self.segment_length_m
    }
}

/// Flag floor applied when extracting phases from channel estimates.
#[derive(Debug, Clone)]
pub enum FlagFloor {
    /// One absolute amplitude floor for every segment.
    Uniform(f64),
    /// Per-segment floors (e.g. scaled by the expected attenuation).
    PerSegment(Vec<f64>),
}

impl FlagFloor {
    fn at(&self, segment: usize) -> f64 {
        match self {
            FlagFloor::Uniform(v) => *v,
            FlagFloor::PerSegment(v) => v[segment],
        }
    }
}

/// Apply the scheme's phase estimator to every frame and segment of a
/// channel estimate.
pub fn phase_traces(est: &ChannelEstimate, floor: &FlagFloor) -> PhaseTraceSet {
    let n_seg = est.segments as usize;
    let frames = est.frames as usize;
    let mut series = vec![vec![None; frames]; n_seg];
    for f in 0..frames {
        for (i, trace) in series.iter_mut().enumerate() {
            let eps = floor.at(i);
            trace[f] = match est.scheme {
                Scheme::Siso => phase_siso_floor(est.entry(f, i, 0), eps),
                Scheme::Simo => phase_simo_floor(est.entry(f, i, 0), est.entry(f, i, 1), eps),
                Scheme::Miso => phase_miso_floor(est.entry(f, i, 0), est.entry(f, i, 1), eps),
                Scheme::Mimo => phase_mimo_floor(&est.matrix(f, i), eps),
            };
        }
    }
    PhaseTraceSet {
        series,
        modulus: if est.scheme == Scheme::Mimo { PI } else { 2.0 * PI },
        gauge_segments: 0,
        frame_period_s: est.frame_period_s,
        segment_length_m: est.segment_length_m,
    }
}

/// Differential phase over `gauge_segments`:
/// `phi_diff[i, t] = wrap(phi[i, t] - phi[i - g, t])`, with the first `g`
/// segments referenced to segment 0.
pub fn differential_phase(traces: &PhaseTraceSet, gauge_segments: usize) -> Result<PhaseTraceSet> {
    let n = traces.segments();
    if gauge_segments == 0 {
        return Err(Error::invalid("differential_phase: gauge must be >= 1"));
    }
    if gauge_segments >= n {
        return Err(Error::invalid(format!(
            "differential_phase: gauge {gauge_segments} >= segment count {n}"
        )));
    }
    let mut series = Vec::with_capacity(n);
    for i in 0..n {
        let r = i.saturating_sub(gauge_segments);
        let row: Vec<Option<f64>> = traces.series[i]
            .iter()
            .zip(&traces.series[r])
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(wrap_to_modulus(a - b, traces.modulus)),
                _ => None,
            })
            .collect();
        series.push(row);
    }
    Ok(PhaseTraceSet {
        series,
        modulus: traces.modulus,
        gauge_segments,
        frame_period_s: traces.frame_period_s,
        segment_length_m: traces.segment_length_m,
    })
}

/// Remove modulus jumps from a time series: any step larger than half the
/// modulus is corrected by an integer number of moduli. Idempotent on
/// continuous series.
pub fn unwrap_time(series: &[f64], modulus: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &v in series {
        if let Some(p) = prev {
            let step = v + offset - p;
            if step.abs() > modulus / 2.0 {
                offset -= (step / modulus).round() * modulus;
            }
        }
        let unwrapped = v + offset;
        out.push(unwrapped);
        prev = Some(unwrapped);
    }
    out
}

/// Per-segment StDv / SNR profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StdvProfile {
    pub stdv_rad: Vec<f64>,
    pub snr_db: Vec<f64>,
    /// Fraction of samples flagged per segment (1.0 = no usable phase).
    pub flagged_fraction: Vec<f64>,
    pub segment_length_m: f64,
}

impl StdvProfile {
    pub fn distance_m(&self, segment: usize) -> f64 {
        (segment as f64 + 1.0) * self.segment_length_m
    }
}

fn snr_phase_db(sigma: f64) -> f64 {
    if sigma < 1e-6 {
        SNR_CAP_DB
    } else {
        10.0 * (1.0 / (sigma * sigma)).log10()
    }
}

/// Temporal standard deviation of each segment's (unwrapped) phase trace.
///
/// `window_s` limits the evaluation to the leading window (0 = full trace);
/// `highpass_hz` applies a first-order recursive high-pass before the
/// deviation (0 disables). Segments with fewer than two usable samples get
/// `NaN` StDv and a flagged fraction of 1.
pub fn stdv_profile(
    traces: &PhaseTraceSet,
    window_s: f64,
    highpass_hz: f64,
) -> Result<StdvProfile> {
    let frames = traces.frames();
    let duration = frames as f64 * traces.frame_period_s;
    if window_s > duration * (1.0 + 1e-9) {
        return Err(Error::invalid(format!(
            "stdv_profile: window {window_s} s exceeds trace duration {duration} s"
        )));
    }
    let take = if window_s <= 0.0 {
        frames
    } else {
        ((window_s / traces.frame_period_s).round() as usize).clamp(2, frames)
    };

    let n = traces.segments();
    let mut stdv = Vec::with_capacity(n);
    let mut snr = Vec::with_capacity(n);
    let mut flagged = Vec::with_capacity(n);
    for trace in &traces.series {
        let present: Vec<f64> = trace[..take].iter().filter_map(|v| *v).collect();
        let n_flagged = take - present.len();
        flagged.push(n_flagged as f64 / take as f64);
        if present.len() < 2 {
            stdv.push(f64::NAN);
            snr.push(f64::NAN);
            continue;
        }
        let mut x = unwrap_time(&present, traces.modulus);
        if highpass_hz > 0.0 {
            x = highpass(&x, highpass_hz, traces.frame_period_s);
        }
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (x.len() as f64 - 1.0);
        let sigma = var.sqrt();
        stdv.push(sigma);
        snr.push(snr_phase_db(sigma));
    }
    Ok(StdvProfile {
        stdv_rad: stdv,
        snr_db: snr,
        flagged_fraction: flagged,
        segment_length_m: traces.segment_length_m,
    })
}

/// First-order recursive high-pass (RC differencing filter).
fn highpass(x: &[f64], cutoff_hz: f64, dt: f64) -> Vec<f64> {
    let rc = 1.0 / (2.0 * PI * cutoff_hz);
    let a = rc / (rc + dt);
    let mut out = Vec::with_capacity(x.len());
    let mut y = 0.0;
    let mut prev = x[0];
    for &v in x {
        y = a * (y + v - prev);
        prev = v;
        out.push(y);
    }
    out
}

/// Complex phase-fading coefficient biasing the SIMO estimate:
/// `c = e^{j 2 gamma} cos 2 beta - j sin 2 beta (e^{j 2 gamma} cos 2 theta + sin 2 theta)`.
///
/// `|c|` close to zero marks segment parameters where the SIMO phase
/// estimate fades completely; the MIMO equivalent is identically 1.
pub fn simo_fading_coeff(p: &PolarizationParams) -> Complex64 {
    let e2g = Complex64::from_polar(1.0, 2.0 * p.gamma);
    let j = Complex64::new(0.0, 1.0);
    let (b2, t2) = (2.0 * p.beta, 2.0 * p.theta_rot);
    e2g * b2.cos() - j * b2.sin() * (e2g * t2.cos() + t2.sin())
}

/// Map axes for fading-coefficient grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapAxis {
    Beta,
    Gamma,
    Theta,
}

/// One grid axis: `n` evenly spaced values over `[min, max]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridAxis {
    pub axis: MapAxis,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridAxis {
    fn values(&self) -> Vec<f64> {
        let n = self.n.max(2);
        (0..n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (n as f64 - 1.0))
            .collect()
    }
}

/// Specification of a fading-coefficient map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FadingMapSpec {
    pub rows: GridAxis,
    pub cols: GridAxis,
    /// Values of the parameters not bound to an axis.
    pub fixed: PolarizationParams,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub theta_misalign: f64,
    /// `SIMO` or `MIMO`.
    pub estimator: Scheme,
}

/// Computed coefficient-magnitude grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FadingMap {
    pub row_values: Vec<f64>,
    pub col_values: Vec<f64>,
    /// `magnitude[row][col]`.
    pub magnitude: Vec<Vec<f64>>,
}

fn with_axis(p: &PolarizationParams, axis: MapAxis, value: f64) -> PolarizationParams {
    let mut q = *p;
    match axis {
        MapAxis::Beta => q.beta = value,
        MapAxis::Gamma => q.gamma = value,
        MapAxis::Theta => q.theta_rot = value,
    }
    q
}

/// Evaluate the fading-coefficient magnitude over a 2-D parameter grid.
///
/// For SIMO with a perfect mirror and no misalignment the analytic
/// coefficient is used; otherwise the coefficient is computed from the full
/// dual-pass construction as the SIMO sum magnitude at unit phasor and
/// attenuation. The MIMO map uses `|det|` of the unitary part.
pub fn fading_map(spec: &FadingMapSpec) -> Result<FadingMap> {
    if spec.rows.n < 2 || spec.cols.n < 2 {
        return Err(Error::invalid("fading_map: grid sizes must be >= 2"));
    }
    if spec.rows.axis == spec.cols.axis {
        return Err(Error::invalid("fading_map: row and column axes must differ"));
    }
    if !matches!(spec.estimator, Scheme::Simo | Scheme::Mimo) {
        return Err(Error::invalid("fading_map: estimator must be SIMO or MIMO"));
    }
    let analytic =
        spec.estimator == Scheme::Simo && spec.alpha == 0.0 && spec.theta_misalign == 0.0;
    let mirror = reflection_matrix(spec.alpha)?;
    let input_rot = rotation(spec.theta_misalign)?;

    let row_values = spec.rows.values();
    let col_values = spec.cols.values();
    let mut magnitude = Vec::with_capacity(row_values.len());
    for &rv in &row_values {
        let p_row = with_axis(&spec.fixed, spec.rows.axis, rv);
        let mut line = Vec::with_capacity(col_values.len());
        for &cv in &col_values {
            let p = with_axis(&p_row, spec.cols.axis, cv);
            let value = if analytic {
                simo_fading_coeff(&p).norm()
            } else {
                let u = unitary_from_params(&p);
                let h = u.transpose().mul(&mirror).mul(&u).mul(&input_rot);
                match spec.estimator {
                    Scheme::Simo => (h.xx + h.yx).norm(),
                    _ => h.det().norm(),
                }
            };
            line.push(value);
        }
        magnitude.push(line);
    }
    Ok(FadingMap {
        row_values,
        col_values,
        magnitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{segment_response, synthesize, FiberConfig, Segment};
    use crate::jones::sample_haar;
    use crate::rng::{substream, Stream};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::Distribution;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn mimo_phase_basics() {
        let h = JonesMatrix::IDENTITY.scale(Complex64::from_polar(1.0, PI / 3.0));
        assert_abs_diff_eq!(phase_mimo(&h).unwrap(), PI / 3.0, epsilon = 1e-12);

        // A phasor phase of 2.0 rad comes back wrapped into (-pi/2, pi/2].
        let mut rng = substream(1, Stream::Aux);
        let (_, u) = sample_haar(&mut rng);
        let seg = Segment {
            unitary: u,
            phasor: Complex64::from_polar(0.7, 2.0),
            attenuation: 0.9,
        };
        let h = segment_response(&seg, &JonesMatrix::IDENTITY, &JonesMatrix::IDENTITY);
        assert_abs_diff_eq!(phase_mimo(&h).unwrap(), 2.0 - PI, epsilon = 1e-10);

        assert!(phase_mimo(&JonesMatrix::IDENTITY.scale(Complex64::new(0.0, 0.0))).is_none());
    }

    #[test]
    fn mimo_phase_invariant_under_unimodular_conjugation() {
        let mut rng = substream(2, Stream::Aux);
        for _ in 0..200 {
            let (_, u) = sample_haar(&mut rng);
            let (_, v) = sample_haar(&mut rng);
            let h = u
                .transpose()
                .mul(&u)
                .scale(Complex64::from_polar(0.8, rng.random_range(-PI..PI)));
            let conj = v.transpose().mul(&h).mul(&v);
            let a = phase_mimo(&h).unwrap();
            let b = phase_mimo(&conj).unwrap();
            assert!(wrap_to_modulus(a - b, PI).abs() < 1e-10);
        }
    }

    #[test]
    fn simo_phase_basics() {
        assert_abs_diff_eq!(
            phase_simo(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)).unwrap(),
            PI / 4.0,
            epsilon = 1e-12
        );
        let xx = Complex64::from_polar(0.4, -1.2);
        assert_abs_diff_eq!(
            phase_simo(xx, Complex64::default()).unwrap(),
            -1.2,
            epsilon = 1e-12
        );
        assert!(phase_simo(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).is_none());
    }

    #[test]
    fn estimators_agree_on_polarization_free_channel() {
        let cfg = FiberConfig {
            length_m: 100.0,
            segment_length_m: 2.0,
            beat_length_m: 2.0,
            attenuation_db_per_km: 0.0,
            alpha: 0.0,
            theta_misalign_rad: 0.0,
            polarization_enabled: false,
            seed: 3,
        };
        let fib = synthesize(&cfg).unwrap();
        let hs = crate::fiber::dual_pass_response(&fib, 0.0, 0.0).unwrap();
        for (h, seg) in hs.iter().zip(&fib.segments) {
            let truth = seg.phasor.arg();
            assert_abs_diff_eq!(phase_siso(h.xx).unwrap(), truth, epsilon = 1e-12);
            assert_abs_diff_eq!(phase_simo(h.xx, h.yx).unwrap(), truth, epsilon = 1e-12);
            assert_abs_diff_eq!(phase_miso(h.xx, h.xy).unwrap(), truth, epsilon = 1e-12);
            let m = phase_mimo(h).unwrap();
            assert!(wrap_to_modulus(m - truth, PI).abs() < 1e-12);
        }
    }

    #[test]
    fn siso_flags_cross_polarized_segments() {
        // A pure rotation cancels over the round trip, so SISO fading needs
        // the retarder: h_xx = e^{j2 gamma}(cos 2 beta + j sin 2 beta cos 2 theta)
        // vanishes at beta = theta = pi/4.
        let p = PolarizationParams {
            beta: PI / 4.0,
            gamma: 0.8,
            theta_rot: PI / 4.0,
            common_phase: 0.0,
        };
        let seg = Segment {
            unitary: unitary_from_params(&p),
            phasor: Complex64::new(1.0, 0.0),
            attenuation: 1.0,
        };
        let h = segment_response(&seg, &JonesMatrix::IDENTITY, &JonesMatrix::IDENTITY);
        assert!(h.xx.norm() < 1e-6);
        assert!(phase_siso(h.xx).is_none());
        // MIMO still recovers the phase on the same segment.
        assert!(phase_mimo(&h).is_some());
    }

    #[test]
    fn simo_bias_equals_fading_coefficient_phase_of_the_response() {
        // Dual route: the estimator bias computed from the matrix-product
        // response must match the closed form derived from the expanded
        // backscatter matrix (the first-column sum).
        let mut rng = substream(4, Stream::Aux);
        for _ in 0..500 {
            let (p, u) = sample_haar(&mut rng);
            let phasor = Complex64::from_polar(rng.random_range(0.2..2.0), rng.random_range(-PI..PI));
            let seg = Segment {
                unitary: u,
                phasor,
                attenuation: 0.8,
            };
            let h = segment_response(&seg, &JonesMatrix::IDENTITY, &JonesMatrix::IDENTITY);
            let bias = phase_simo(h.xx, h.yx).unwrap() - phasor.arg();
            let e2g = Complex64::from_polar(1.0, 2.0 * p.gamma);
            let j = Complex64::new(0.0, 1.0);
            let c_sum = e2g * (2.0 * p.beta).cos()
                + j * (2.0 * p.beta).sin()
                    * (e2g * (2.0 * p.theta_rot).cos() - (2.0 * p.theta_rot).sin());
            let diff = wrap_to_modulus(bias - c_sum.arg(), 2.0 * PI);
            assert!(diff.abs() < 1e-9, "bias mismatch {diff}");
        }
    }

    #[test]
    fn flag_rates_rank_siso_above_simo_above_mimo() {
        let mut rng = substream(5, Stream::Aux);
        let n = 100_000;
        let floor = 0.1;
        let mut flags = [0u64; 3];
        for _ in 0..n {
            let (_, u) = sample_haar(&mut rng);
            let amp: f64 = {
                let r: f64 = rng.random();
                (-(1.0 - r).ln()).sqrt() // Rayleigh, E[p^2] = 1
            };
            let seg = Segment {
                unitary: u,
                phasor: Complex64::from_polar(
                    amp * std::f64::consts::FRAC_1_SQRT_2 * 2f64.sqrt(),
                    rng.random_range(-PI..PI),
                ),
                attenuation: 1.0,
            };
            let h = segment_response(&seg, &JonesMatrix::IDENTITY, &JonesMatrix::IDENTITY);
            if phase_siso_floor(h.xx, floor).is_none() {
                flags[0] += 1;
            }
            if phase_simo_floor(h.xx, h.yx, floor).is_none() {
                flags[1] += 1;
            }
            if phase_mimo_floor(&h, floor).is_none() {
                flags[2] += 1;
            }
        }
        assert!(
            flags[0] > flags[1] && flags[1] > flags[2],
            "flag counts SISO/SIMO/MIMO = {flags:?}"
        );
    }

    #[test]
    fn differential_phase_of_constant_traces_is_zero() {
        let series = vec![vec![Some(0.4); 8]; 10];
        let traces = PhaseTraceSet {
            series,
            modulus: 2.0 * PI,
            gauge_segments: 0,
            frame_period_s: 1e-3,
            segment_length_m: 2.0,
        };
        let diff = differential_phase(&traces, 2).unwrap();
        for trace in &diff.series {
            assert!(trace.iter().all(|v| v.unwrap() == 0.0));
        }
        let profile = stdv_profile(&diff, 0.0, 0.0).unwrap();
        assert!(profile.stdv_rad.iter().all(|&s| s == 0.0));
        assert!(profile.snr_db.iter().all(|&s| s == SNR_CAP_DB));

        assert!(differential_phase(&traces, 0).is_err());
        assert!(differential_phase(&traces, 10).is_err());
    }

    #[test]
    fn gauge_metadata_matches_native_convention() {
        // Two segments of 2 m or one segment of 4 m give the same gauge.
        let make = |seg_len: f64, gauge: usize| PhaseTraceSet {
            series: vec![vec![Some(0.0); 4]; 8],
            modulus: 2.0 * PI,
            gauge_segments: gauge,
            frame_period_s: 1e-3,
            segment_length_m: seg_len,
        };
        assert_eq!(make(2.0, 2).gauge_length_m(), make(4.0, 1).gauge_length_m());
    }

    #[test]
    fn unwrap_behaviour() {
        let constant = vec![0.3; 5];
        assert_eq!(unwrap_time(&constant, PI), constant);

        // Sawtooth wrapping at +-pi/2 under modulus pi becomes a ramp.
        let ramp_true: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
        let wrapped: Vec<f64> = ramp_true.iter().map(|&v| wrap_to_modulus(v, PI)).collect();
        let unwrapped = unwrap_time(&wrapped, PI);
        for (a, b) in unwrapped.iter().zip(&ramp_true) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn unwrap_leaves_small_noise_untouched() {
        let mut rng = substream(6, Stream::Aux);
        let series: Vec<f64> = (0..2000).map(|_| rng.random_range(-0.05..0.05)).collect();
        let unwrapped = unwrap_time(&series, PI);
        for (a, b) in unwrapped.iter().zip(&series) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stdv_profile_recovers_injected_noise() {
        let mut rng = substream(7, Stream::Aux);
        let sigma0 = 0.1;
        let frames = 10_000;
        let series: Vec<Vec<Option<f64>>> = (0..4)
            .map(|_| {
                (0..frames)
                    .map(|_| {
                        let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        Some(sigma0 * z)
                    })
                    .collect()
            })
            .collect();
        let traces = PhaseTraceSet {
            series,
            modulus: 2.0 * PI,
            gauge_segments: 1,
            frame_period_s: 1e-3,
            segment_length_m: 2.0,
        };
        let profile = stdv_profile(&traces, 0.0, 0.0).unwrap();
        for &s in &profile.stdv_rad {
            assert!((s / sigma0 - 1.0).abs() < 0.05, "sigma {s}");
        }
        // sigma = 0.1 rad -> 20 dB.
        for &snr in &profile.snr_db {
            assert!((snr - 20.0).abs() < 0.5, "snr {snr}");
        }
    }

    #[test]
    fn stdv_window_validation() {
        let traces = PhaseTraceSet {
            series: vec![vec![Some(0.0); 10]; 2],
            modulus: 2.0 * PI,
            gauge_segments: 1,
            frame_period_s: 1e-3,
            segment_length_m: 2.0,
        };
        assert!(stdv_profile(&traces, 0.02, 0.0).is_err());
        assert!(stdv_profile(&traces, 0.01, 0.0).is_ok());
    }

    #[test]
    fn fading_coeff_reference_values() {
        // beta = 0 leaves a pure retarder phase.
        let p = PolarizationParams {
            beta: 0.0,
            gamma: 0.9,
            theta_rot: 0.4,
            common_phase: 0.0,
        };
        let c = simo_fading_coeff(&p);
        assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.arg(), 1.8, epsilon = 1e-12);

        // Analytic complete fade.
        let zero = PolarizationParams {
            beta: PI / 4.0,
            gamma: PI / 2.0,
            theta_rot: PI / 8.0,
            common_phase: 0.0,
        };
        assert!(simo_fading_coeff(&zero).norm() < 1e-12);
    }

    #[test]
    fn fading_map_analytic_and_numeric_routes() {
        let spec = FadingMapSpec {
            rows: GridAxis {
                axis: MapAxis::Theta,
                min: 0.0,
                max: FRAC_PI_2,
                n: 61,
            },
            cols: GridAxis {
                axis: MapAxis::Beta,
                min: -PI,
                max: PI,
                n: 61,
            },
            fixed: PolarizationParams {
                beta: 0.0,
                gamma: PI / 2.0,
                theta_rot: 0.0,
                common_phase: 0.0,
            },
            alpha: 0.0,
            theta_misalign: 0.0,
            estimator: Scheme::Simo,
        };
        let map = fading_map(&spec).unwrap();
        // The analytic zero at (theta, beta) = (pi/8, pi/4) must be pinned
        // by the grid minimum to within one cell.
        let mut best = (0usize, 0usize, f64::INFINITY);
        for (r, line) in map.magnitude.iter().enumerate() {
            for (c, &v) in line.iter().enumerate() {
                if v < best.2 {
                    best = (r, c, v);
                }
            }
        }
        let row_step = map.row_values[1] - map.row_values[0];
        let col_step = map.col_values[1] - map.col_values[0];
        // Zeros sit at beta in {+-pi/4, +-3pi/4} for theta = pi/8.
        let beta_dist = [-0.75, -0.25, 0.25, 0.75]
            .iter()
            .map(|k| (map.col_values[best.1] - k * PI).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            (map.row_values[best.0] - PI / 8.0).abs() <= row_step && beta_dist <= col_step,
            "minimum at ({}, {}) is not within a cell of an analytic zero",
            map.row_values[best.0],
            map.col_values[best.1]
        );

        // alpha != 0 produces a visibly different pattern.
        let mut spec_alpha = spec.clone();
        spec_alpha.alpha = 0.15;
        let map_alpha = fading_map(&spec_alpha).unwrap();
        let max_diff = map
            .magnitude
            .iter()
            .flatten()
            .zip(map_alpha.magnitude.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            ;
        assert!(max_diff > 0.1, "max map difference {max_diff}");

        // The MIMO map is identically one.
        let mut spec_mimo = spec_alpha.clone();
        spec_mimo.estimator = Scheme::Mimo;
        let map_mimo = fading_map(&spec_mimo).unwrap();
        for v in map_mimo.magnitude.iter().flatten() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn unwrap_is_idempotent(values in prop::collection::vec(-10.0f64..10.0, 1..60)) {
            let once = unwrap_time(&values, PI);
            let twice = unwrap_time(&once, PI);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn mimo_phase_stays_in_half_open_range(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            prop_assume!(re.abs() > 1e-3 || im.abs() > 1e-3);
            let h = JonesMatrix::IDENTITY.scale(Complex64::new(re, im));
            let phi = phase_mimo(&h).unwrap();
            prop_assert!(phi > -FRAC_PI_2 - 1e-12 && phi <= FRAC_PI_2 + 1e-12);
        }
    }
}
