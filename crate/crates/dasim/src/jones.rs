//! Jones calculus: construction, composition and Haar sampling of 2x2
//! polarization operators, plus projection onto Stokes space.
//!
//! Random unitaries are parameterized as `D_beta * R_theta * D_gamma` —
//! two diagonal phase retarders around a real rotation. With `beta` and
//! `gamma` uniform on `[-pi, pi]` and `theta = asin(sqrt(xi))`, `xi` uniform
//! on `[0, 1]`, the product is Haar-distributed over the unitaries of unit
//! determinant; the common phase is representable but kept at zero since
//! only differential phases matter downstream.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex 2x2 Jones operator acting on (x, y) field components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub xx: Complex64,
    pub xy: Complex64,
    pub yx: Complex64,
    pub yy: Complex64,
}

/// Two-component complex field (fully polarized light).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    pub x: Complex64,
    pub y: Complex64,
}

/// Stokes parameters; `s0` carries linear power units.
///
/// Sign convention: `s3 = -2 Im(x conj(y))`, i.e. right-circular light
/// `(1, j)/sqrt(2)` maps to `s3 = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

/// Angles parameterizing one random unitary: `U = e^{j phi} D_beta R_theta D_gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationParams {
    /// Outer retarder angle, radians in `[-pi, pi]`.
    pub beta: f64,
    /// Inner retarder angle, radians in `[-pi, pi]`.
    pub gamma: f64,
    /// Rotation angle, radians in `[0, pi/2]` (`asin(sqrt(xi))` marginal).
    pub theta_rot: f64,
    /// Common phase, radians. Always zero in generation.
    pub common_phase: f64,
}

impl PolarizationParams {
    pub const IDENTITY: Self = Self {
        beta: 0.0,
        gamma: 0.0,
        theta_rot: 0.0,
        common_phase: 0.0,
    };
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl JonesMatrix {
    pub const IDENTITY: Self = Self {
        xx: ONE,
        xy: ZERO,
        yx: ZERO,
        yy: ONE,
    };

    pub fn new(xx: Complex64, xy: Complex64, yx: Complex64, yy: Complex64) -> Self {
        Self { xx, xy, yx, yy }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &JonesMatrix) -> JonesMatrix {
        JonesMatrix {
            xx: self.xx * rhs.xx + self.xy * rhs.yx,
            xy: self.xx * rhs.xy + self.xy * rhs.yy,
            yx: self.yx * rhs.xx + self.yy * rhs.yx,
            yy: self.yx * rhs.xy + self.yy * rhs.yy,
        }
    }

    /// Apply to a field vector.
    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        JonesVector {
            x: self.xx * v.x + self.xy * v.y,
            y: self.yx * v.x + self.yy * v.y,
        }
    }

    /// Scale every entry by a complex factor.
    pub fn scale(&self, k: Complex64) -> JonesMatrix {
        JonesMatrix {
            xx: self.xx * k,
            xy: self.xy * k,
            yx: self.yx * k,
            yy: self.yy * k,
        }
    }

    pub fn transpose(&self) -> JonesMatrix {
        JonesMatrix {
            xx: self.xx,
            xy: self.yx,
            yx: self.xy,
            yy: self.yy,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> JonesMatrix {
        JonesMatrix {
            xx: self.xx.conj(),
            xy: self.yx.conj(),
            yx: self.xy.conj(),
            yy: self.yy.conj(),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.xx * self.yy - self.xy * self.yx
    }

    /// Largest entry-wise modulus of `self - rhs`.
    pub fn max_entry_distance(&self, rhs: &JonesMatrix) -> f64 {
        let d = [
            (self.xx - rhs.xx).norm(),
            (self.xy - rhs.xy).norm(),
            (self.yx - rhs.yx).norm(),
            (self.yy - rhs.yy).norm(),
        ];
        d.iter().cloned().fold(0.0, f64::max)
    }

    /// `max |(H H^dag - I)_kl|`; zero for unitary matrices.
    pub fn unitarity_defect(&self) -> f64 {
        self.mul(&self.adjoint()).max_entry_distance(&Self::IDENTITY)
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.xy, self.yx, self.yy]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Diagonal phase retarder `diag(e^{+j angle}, e^{-j angle})`.
pub fn phase_retarder(angle: f64) -> Result<JonesMatrix> {
    if !angle.is_finite() {
        return Err(Error::invalid("phase_retarder: non-finite angle"));
    }
    Ok(JonesMatrix::new(
        Complex64::from_polar(1.0, angle),
        ZERO,
        ZERO,
        Complex64::from_polar(1.0, -angle),
    ))
}

/// Real rotation `[[cos, -sin], [sin, cos]]`.
pub fn rotation(angle: f64) -> Result<JonesMatrix> {
    if !angle.is_finite() {
        return Err(Error::invalid("rotation: non-finite angle"));
    }
    let (s, c) = angle.sin_cos();
    Ok(JonesMatrix::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    ))
}

/// Reflection with polarization crosstalk `alpha` (fraction of power
/// transferred to the orthogonal state).
///
/// `alpha = 0` is the perfect mirror; the physical operating range is
/// `[0, 0.05]`, larger values remain mathematically valid up to 1.
pub fn reflection_matrix(alpha: f64) -> Result<JonesMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "reflection_matrix: alpha must be in [0, 1], got {alpha}"
        )));
    }
    let t = alpha.sqrt();
    let r = (1.0 - alpha).sqrt();
    Ok(JonesMatrix::new(
        Complex64::new(r, 0.0),
        Complex64::new(-t, 0.0),
        Complex64::new(t, 0.0),
        Complex64::new(r, 0.0),
    ))
}

/// Rebuild the unitary from its parameter triple (common phase included).
pub fn unitary_from_params(p: &PolarizationParams) -> JonesMatrix {
    let d_beta = phase_retarder(p.beta).expect("finite beta");
    let r = rotation(p.theta_rot).expect("finite theta");
    let d_gamma = phase_retarder(p.gamma).expect("finite gamma");
    let u = d_beta.mul(&r).mul(&d_gamma);
    if p.common_phase == 0.0 {
        u
    } else {
        u.scale(Complex64::from_polar(1.0, p.common_phase))
    }
}

/// Draw one Haar-distributed unitary with its parameters.
///
/// `beta, gamma ~ U[-pi, pi]`, `theta = asin(sqrt(xi))` with `xi ~ U[0, 1]`;
/// the common phase is fixed at zero, so `det U = 1`.
pub fn sample_haar(rng: &mut ChaCha8Rng) -> (PolarizationParams, JonesMatrix) {
    let params = PolarizationParams {
        beta: rng.random_range(-PI..PI),
        gamma: rng.random_range(-PI..PI),
        theta_rot: sample_theta(rng),
        common_phase: 0.0,
    };
    let u = unitary_from_params(&params);
    (params, u)
}

/// Rotation-angle marginal of the Haar measure: `asin(sqrt(xi))`.
pub fn sample_theta(rng: &mut ChaCha8Rng) -> f64 {
    let xi: f64 = rng.random();
    xi.sqrt().asin()
}

/// Project a Jones vector onto Stokes parameters.
pub fn jones_to_stokes(v: &JonesVector) -> StokesVector {
    let (x, y) = (v.x, v.y);
    let cross = x * y.conj();
    StokesVector {
        s0: x.norm_sqr() + y.norm_sqr(),
        s1: x.norm_sqr() - y.norm_sqr(),
        s2: 2.0 * cross.re,
        s3: -2.0 * cross.im,
    }
}

/// Advance polarization parameters by one segment under the beat-length rule
/// `lambda_next = lambda + ratio * lambda_new`, `ratio = L_s / L_pb`.
///
/// Fresh draws use the same marginals as [`sample_haar`]; `beta` and `gamma`
/// wrap to `[-pi, pi]`, the rotation angle folds back into `[0, pi/2]` by
/// reflection at both ends.
pub fn evolve_params(
    prev: &PolarizationParams,
    ratio: f64,
    rng: &mut ChaCha8Rng,
) -> PolarizationParams {
    let beta_new = rng.random_range(-PI..PI);
    let gamma_new = rng.random_range(-PI..PI);
    let theta_new = sample_theta(rng);
    PolarizationParams {
        beta: wrap_to_pi(prev.beta + ratio * beta_new),
        gamma: wrap_to_pi(prev.gamma + ratio * gamma_new),
        theta_rot: fold_theta(prev.theta_rot + ratio * theta_new),
        common_phase: prev.common_phase,
    }
}

/// Wrap an angle into `(-pi, pi]`. In-range values pass through unchanged.
pub fn wrap_to_pi(angle: f64) -> f64 {
    wrap_to_modulus(angle, 2.0 * PI)
}

/// Wrap an angle into `(-m/2, m/2]` for modulus `m`. In-range values pass
/// through bit-exact.
pub fn wrap_to_modulus(angle: f64, modulus: f64) -> f64 {
    let half = modulus / 2.0;
    if angle > -half && angle <= half {
        return angle;
    }
    let w = angle.rem_euclid(modulus);
    if w > half {
        w - modulus
    } else {
        w
    }
}

/// Fold an angle into `[0, pi/2]` by reflection at 0 and pi/2. In-range
/// values pass through bit-exact.
pub fn fold_theta(theta: f64) -> f64 {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        return theta;
    }
    let t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        PI - t
    } else {
        t
    }
}
