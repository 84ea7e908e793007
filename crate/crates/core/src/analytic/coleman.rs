//! Expected Coleman index of a uniformly random game.
//!
//! `E(C)(q) = P(sum_i W_i xi_i >= q) = 1 - F_Z(q - 1/2)`. For `q < 1` the
//! point `x = q - 1/2` lies strictly between the two atoms of `Z`, and
//! inverting only the continuous part gives
//!
//! ```text
//! E(C)(q) = 1/2 - (1/pi) int_0^inf sin(t x) phi_c(t) / t dt
//! ```
//!
//! where `phi_c` is the characteristic function of the continuous part.
//! Removing the atoms makes the integrand decay like `t^-2`; the integral is
//! truncated at a frequency that doubles until successive estimates agree.
//! At `q = 1` only the grand coalition wins and `E(C) = 2^-n`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};

use super::charfn::ColemanCharacteristic;
use crate::error::{Error, Result};
use crate::games::validate_quota;
use crate::quadrature::kronrod_panel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColemanMethod {
    /// Characteristic-function inversion.
    Inversion,
    /// Normal approximation `1 - Phi(sqrt(2(n+1)) (q - 1/2))`.
    Normal,
    /// Average Hoeffding bound; needs Monte Carlo.
    HoeffdingBound,
}

/// Settings for the expected Coleman index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColemanCurveSpec {
    pub players: usize,
    pub method: ColemanMethod,
    /// Absolute tolerance on successive truncated integrals.
    pub tolerance: f64,
    /// Largest truncation frequency tried.
    pub max_frequency: f64,
}

impl ColemanCurveSpec {
    pub fn inversion(players: usize) -> Self {
        ColemanCurveSpec {
            players,
            method: ColemanMethod::Inversion,
            tolerance: 1e-9,
            max_frequency: 65536.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArguments(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.max_frequency >= INITIAL_FREQUENCY) {
            return Err(Error::InvalidArguments(format!(
                "maximum frequency must be at least {INITIAL_FREQUENCY}, got {}",
                self.max_frequency
            )));
        }
        Ok(())
    }
}

const INITIAL_FREQUENCY: f64 = 64.0;
/// Panel width: about one period of the slowest oscillation of `phi_c`.
const PANEL: f64 = 4.0 * PI;

/// `int_0^inf sin(t x) 2 P(1/2) sin(t/2) / t^2 dt = pi P(1/2) x` for
/// `0 <= x <= 1/2`. Integrated numerically this term alone would need
/// frequencies of order `1 / (1/2 - x)` and beyond.
fn edge_term(cf: &ColemanCharacteristic, x: f64) -> f64 {
    PI * cf.edge_density() * x
}

/// `int_a^b sin(t x) r(t) / t dt` over panels of width at most `PANEL`,
/// where `r = phi_c - 2 P(1/2) sin(t/2) / t` is the continuous part less its
/// slowly decaying edge term (see [`edge_term`]).
fn sine_transform(cf: &ColemanCharacteristic, x: f64, a: f64, b: f64) -> f64 {
    let d0 = cf.edge_density();
    let mut integrand = |t: f64| {
        if t == 0.0 {
            x * (cf.phi_continuous(0.0) - d0)
        } else {
            let edge = 2.0 * d0 * (0.5 * t).sin() / t;
            (t * x).sin() * (cf.phi_continuous(t) - edge) / t
        }
    };
    let panels = ((b - a) / PANEL).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * width;
            let (v, _) = kronrod_panel(&mut integrand, lo, lo + width);
            v
        })
        .sum()
}

/// Expected Coleman index over uniformly random weights, by inversion of
/// the characteristic function.
pub fn expected_coleman(n: usize, q: f64, spec: &ColemanCurveSpec) -> Result<f64> {
    validate_quota(q)?;
    spec.validate()?;
    let cf = ColemanCharacteristic::new(n)?;
    if q == 1.0 {
        return Ok(cf.atom_mass());
    }
    let x = q - 0.5;
    let mut upper = INITIAL_FREQUENCY;
    let mut integral = edge_term(&cf, x) + sine_transform(&cf, x, 0.0, upper);
    let mut previous = 0.5 - integral / PI;
    loop {
        let next = (2.0 * upper).min(spec.max_frequency);
        if next <= upper {
            break;
        }
        integral += sine_transform(&cf, x, upper, next);
        upper = next;
        let estimate = 0.5 - integral / PI;
        if (estimate - previous).abs() < spec.tolerance {
            return Ok(estimate.clamp(cf.atom_mass(), 0.5));
        }
        previous = estimate;
    }
    Err(Error::ConvergenceFailure {
        what: "characteristic-function inversion",
        last: 0.5 - integral / PI,
        previous,
    })
}

/// Normal approximation `C1 = 1 - Phi(sqrt(2(n+1)) (q - 1/2))`.
pub fn expected_coleman_normal(n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::InvalidQuota(q));
    }
    let z = (2.0 * (n as f64 + 1.0)).sqrt() * (q - 0.5);
    Ok(0.5 * erfc(z * FRAC_1_SQRT_2))
}

/// Quota at which the normal approximation equals `y`, for `0 < y <= 1/2`.
/// May exceed 1 for small `y`.
pub fn inverse_coleman_normal(n: usize, y: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(y > 0.0 && y <= 0.5) {
        return Err(Error::InvalidArguments(format!("y = {y} outside (0, 1/2]")));
    }
    // Phi^-1(1 - y) = sqrt(2) erfc^-1(2y), then one Newton step since
    // erfc_inv is only accurate to about 1e-11.
    let r = (2.0 * (n as f64 + 1.0)).sqrt();
    let z = SQRT_2 * erfc_inv(2.0 * y);
    let residual = 0.5 * erfc(z * FRAC_1_SQRT_2) - y;
    let density = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let z = z + residual / density;
    Ok(0.5 + z / r)
}

/// Quota at which the expected Coleman index equals `y`, by bisection.
pub fn inverse_expected_coleman(n: usize, y: f64, spec: &ColemanCurveSpec) -> Result<f64> {
    if y == 0.5 {
        return Ok(0.5);
    }
    let floor = 0.5f64.powi(n as i32);
    if !(y >= floor && y < 0.5) {
        return Err(Error::ConvergenceFailure {
            what: "bisection for the expected Coleman index (target not bracketed)",
            last: y,
            previous: floor,
        });
    }
    if y == floor {
        return Ok(1.0);
    }
    // E(C) decreases from 1/2 at q = 1/2 to 2^-n at q = 1.
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if expected_coleman(n, mid, spec)? > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRatio {
    pub y: f64,
    /// Quota solving `C1(q) = y`.
    pub normal_quota: f64,
    /// Quota solving `E(C)(q) = y`.
    pub exact_quota: f64,
    pub ratio: f64,
}

/// Ratio of the quotas at which the normal approximation and the expected
/// Coleman index reach `y`, for `2^-2n <= y <= 1/2`.
pub fn coleman_error_ratio(n: usize, y: f64, spec: &ColemanCurveSpec) -> Result<ErrorRatio> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let lower = 0.25f64.powi(n as i32);
    if !(y >= lower && y <= 0.5) {
        return Err(Error::InvalidArguments(format!(
            "y = {y} outside [{lower}, 1/2]"
        )));
    }
    let normal_quota = inverse_coleman_normal(n, y)?;
    let exact_quota = inverse_expected_coleman(n, y, spec)?;
    Ok(ErrorRatio {
        y,
        normal_quota,
        exact_quota,
        ratio: normal_quota / exact_quota,
    })
}
