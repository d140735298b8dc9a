//! Static fibre realizations and their dual-pass backscatter responses.
//!
//! A fibre of length `L` is split into `N = floor(L / L_s)` segments. Each
//! segment `i` carries:
//!
//! * the cumulative forward unitary `U_i` describing the state of
//!   polarization transformation from the fibre start,
//! * a complex Rayleigh phasor `p_i` (backscatter amplitude and phase),
//! * a dual-pass attenuation factor `A_i`.
//!
//! The dual-pass response of a segment under reflection crosstalk `alpha`
//! and input misalignment `theta` is
//! `H_i = A_i p_i U_i^T M_alpha U_i R_theta`.
//!
//! Polarization evolves along the fibre with the beat-length rule: the
//! parameter change from one segment to the next is proportional to
//! `L_s / L_pb`, with fully independent draws once `L_s >= L_pb`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jones::{
    evolve_params, reflection_matrix, rotation, sample_haar, unitary_from_params, JonesMatrix,
    PolarizationParams,
};
use crate::rng::{substream, Stream};

/// Static fibre description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberConfig {
    /// Total sensed length, meters.
    pub length_m: f64,
    /// Segment (spatial resolution) length, meters.
    pub segment_length_m: f64,
    /// Polarization beat length, meters. Single-mode fibre is of the order
    /// of 10 m; values at or below `segment_length_m` give independent
    /// segment SOPs.
    #[serde(default = "default_beat_length")]
    pub beat_length_m: f64,
    /// One-way attenuation, dB/km (applied dual-pass).
    #[serde(default = "default_attenuation")]
    pub attenuation_db_per_km: f64,
    /// Reflection polarization-transfer coefficient, physical range [0, 0.05].
    #[serde(default)]
    pub alpha: f64,
    /// Transmitter/receiver SOP misalignment, radians.
    #[serde(default)]
    pub theta_misalign_rad: f64,
    /// When false every segment unitary is the identity (fading-free
    /// reference channel).
    #[serde(default = "default_true")]
    pub polarization_enabled: bool,
    pub seed: u64,
}

fn default_beat_length() -> f64 {
    10.0
}

fn default_attenuation() -> f64 {
    0.2
}

fn default_true() -> bool {
    true
}

impl FiberConfig {
    pub fn segments(&self) -> usize {
        (self.length_m / self.segment_length_m).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !self.segment_length_m.is_finite() || self.segment_length_m <= 0.0 {
            return Err(Error::invalid("fiber: segment_length_m must be > 0"));
        }
        if self.length_m < self.segment_length_m {
            return Err(Error::invalid(
                "fiber: length_m must be >= segment_length_m (zero segments)",
            ));
        }
        if self.attenuation_db_per_km < 0.0 {
            return Err(Error::invalid("fiber: attenuation_db_per_km must be >= 0"));
        }
        if !self.beat_length_m.is_finite() || self.beat_length_m <= 0.0 {
            return Err(Error::invalid("fiber: beat_length_m must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("fiber: alpha must be in [0, 1]"));
        }
        Ok(())
    }
}

/// One synthesized segment.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    /// Cumulative forward unitary from the fibre start.
    pub unitary: JonesMatrix,
    /// Complex backscatter phasor; `E[|p|^2] = 1`.
    pub phasor: Complex64,
    /// Dual-pass attenuation factor in (0, 1].
    pub attenuation: f64,
}

/// A full static channel realization. Immutable once synthesized.
#[derive(Debug, Clone)]
pub struct FiberRealization {
    pub segments: Vec<Segment>,
    /// Parameter triples behind each cumulative unitary (not persisted).
    pub params: Vec<PolarizationParams>,
    pub segment_length_m: f64,
    pub seed: u64,
}

impl FiberRealization {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Distance from the interrogator to the end of segment `i` (0-based).
    pub fn distance_m(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.segment_length_m
    }
}

/// Dual-pass attenuation factor at distance `l_m` meters for a one-way
/// attenuation of `a_db_per_km`; round-trip power loss is `2 a L` dB.
pub fn dual_pass_attenuation(a_db_per_km: f64, l_m: f64) -> f64 {
    10f64.powf(-2.0 * a_db_per_km * l_m / 10_000.0)
}

/// Synthesize a static fibre realization from its configuration.
///
/// Deterministic in `config.seed`; polarization parameters and scatterer
/// phasors are drawn from separate substreams, so two configs differing only
/// in `polarization_enabled` share identical phasors and attenuations.
pub fn synthesize(config: &FiberConfig) -> Result<FiberRealization> {
    config.validate()?;
    let n = config.segments();
    if n == 0 {
        return Err(Error::invalid("fiber: zero segments"));
    }

    let mut pol_rng = substream(config.seed, Stream::FiberPolarization);
    let mut scatter_rng = substream(config.seed, Stream::FiberScatter);
    let ratio = config.segment_length_m / config.beat_length_m;

    let mut params = Vec::with_capacity(n);
    let mut segments = Vec::with_capacity(n);
    let mut prev = PolarizationParams::IDENTITY;

    // Rayleigh scale so that E[|p|^2] = 1.
    let rayleigh_sigma = std::f64::consts::FRAC_1_SQRT_2;

    for i in 0..n {
        let p = if !config.polarization_enabled {
            PolarizationParams::IDENTITY
        } else if i == 0 || ratio >= 1.0 {
            sample_haar(&mut pol_rng).0
        } else {
            evolve_params(&prev, ratio, &mut pol_rng)
        };
        prev = p;

        let u: f64 = scatter_rng.random();
        let amplitude = rayleigh_sigma * (-2.0 * (1.0 - u).ln()).sqrt();
        let phase = scatter_rng.random_range(-PI..PI);

        let distance = (i as f64 + 1.0) * config.segment_length_m;
        segments.push(Segment {
            unitary: unitary_from_params(&p),
            phasor: Complex64::from_polar(amplitude, phase),
            attenuation: dual_pass_attenuation(config.attenuation_db_per_km, distance),
        });
        params.push(p);
    }

    Ok(FiberRealization {
        segments,
        params,
        segment_length_m: config.segment_length_m,
        seed: config.seed,
    })
}

/// Dual-pass Jones response of every segment:
/// `H_i = A_i p_i U_i^T M_alpha U_i R_theta`.
pub fn dual_pass_response(
    fib: &FiberRealization,
    alpha: f64,
    theta_misalign: f64,
) -> Result<Vec<JonesMatrix>> {
    let mirror = reflection_matrix(alpha)?;
    let input_rot = rotation(theta_misalign)?;
    Ok(fib
        .segments
        .iter()
        .map(|seg| segment_response(seg, &mirror, &input_rot))
        .collect())
}

/// Response of a single segment given precomputed mirror and input rotation.
pub fn segment_response(
    seg: &Segment,
    mirror: &JonesMatrix,
    input_rot: &JonesMatrix,
) -> JonesMatrix {
    seg.unitary
        .transpose()
        .mul(mirror)
        .mul(&seg.unitary)
        .mul(input_rot)
        .scale(seg.phasor * seg.attenuation)
}

/// A localized longitudinal strain applied to one segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrainEvent {
    /// Disturbed segment (0-based).
    pub segment_index: usize,
    /// Fibre elongation per frame, meters.
    pub displacement_m: Vec<f64>,
    /// Phase refractive index.
    #[serde(default = "default_refr_index")]
    pub refr_index: f64,
    /// Photo-elasticity coefficient.
    #[serde(default = "default_photoelastic")]
    pub photoelastic: f64,
    /// Optical wavelength, meters.
    #[serde(default = "default_wavelength")]
    pub wavelength_m: f64,
}

fn default_refr_index() -> f64 {
    crate::PHASE_INDEX
}

fn default_photoelastic() -> f64 {
    crate::PHOTOELASTIC_COEFF
}

fn default_wavelength() -> f64 {
    1550e-9
}

impl StrainEvent {
    pub fn validate(&self, n_segments: usize) -> Result<()> {
        if self.segment_index >= n_segments {
            return Err(Error::invalid(format!(
                "strain: segment_index {} out of range (N = {n_segments})",
                self.segment_index
            )));
        }
        if !self.wavelength_m.is_finite() || self.wavelength_m <= 0.0 {
            return Err(Error::invalid("strain: wavelength_m must be > 0"));
        }
        Ok(())
    }
}

/// Dual-pass phase series induced by a strain event:
/// `dphi(t) = 2 n xi dl(t) 2 pi / lambda` (the single-pass delay is applied
/// twice because the probe passes the disturbance on the way out and back).
///
/// The factor multiplies the responses of the disturbed segment and of every
/// segment beyond it as `e^{j dphi(t)}`.
pub fn strain_phase(event: &StrainEvent) -> Vec<f64> {
    let k = 2.0 * event.refr_index * event.photoelastic * 2.0 * PI / event.wavelength_m;
    event.displacement_m.iter().map(|dl| k * dl).collect()
}
