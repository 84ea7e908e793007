//! Counting local extrema of quota curves.

use serde::Serialize;

use super::montecarlo::QuotaCurve;
use crate::error::{Error, Result};
use crate::poly::{Extremum, PiecewisePolynomial, PiecewiseRational};

/// Grid resolution used for floating-point analytic curves.
const ANALYTIC_RESOLUTION: usize = 20_000;
/// Minimum length of a sampled curve.
const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy)]
pub enum CurveRef<'a> {
    Sampled(&'a QuotaCurve),
    Analytic(&'a PiecewisePolynomial),
    Exact(&'a PiecewiseRational),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrema {
    pub count: usize,
    pub locations: Vec<f64>,
    /// Known for exact curves only.
    pub natures: Vec<Option<Extremum>>,
}

/// Averages over full windows only; entry `i` covers `y[i..i + window]`.
fn moving_average(y: &[f64], window: usize) -> Vec<f64> {
    y.windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Number of local extrema. Sampled curves are smoothed by a centred moving
/// average of `window` points and extrema are sign changes of the first
/// differences; `window` is ignored for analytic curves. Windows are not
/// truncated at the ends, so the smoothed curve is `window - 1` points shorter.
pub fn count_extrema(curve: CurveRef<'_>, window: usize) -> Result<Extrema> {
    match curve {
        CurveRef::Sampled(c) => {
            if c.len() < MIN_POINTS {
                return Err(Error::InvalidArguments(format!(
                    "need at least {MIN_POINTS} curve points, got {}",
                    c.len()
                )));
            }
            if window == 0 || window > c.len() {
                return Err(Error::InvalidArguments(format!(
                    "smoothing window {window} does not fit {} points",
                    c.len()
                )));
            }
            let smooth = moving_average(&c.means(), window);
            let mut locations = Vec::new();
            let mut last_sign = 0.0;
            for i in 1..smooth.len() {
                let d = smooth[i] - smooth[i - 1];
                if d == 0.0 {
                    continue;
                }
                let sign = d.signum();
                if last_sign != 0.0 && sign != last_sign {
                    // centre of the window behind smooth[i - 1]
                    let a = c.quotas[i - 1];
                    let b = c.quotas[i - 1 + window - 1];
                    locations.push(0.5 * (a + b));
                }
                last_sign = sign;
            }
            Ok(Extrema {
                count: locations.len(),
                natures: vec![None; locations.len()],
                locations,
            })
        }
        CurveRef::Analytic(p) => {
            let locations = p.sign_changes_of_derivative(ANALYTIC_RESOLUTION);
            Ok(Extrema {
                count: locations.len(),
                natures: vec![None; locations.len()],
                locations,
            })
        }
        CurveRef::Exact(p) => {
            let points = p.stationary_points();
            Ok(Extrema {
                count: points.len(),
                locations: points
                    .iter()
                    .map(|(x, _)| *x.numer() as f64 / *x.denom() as f64)
                    .collect(),
                natures: points.into_iter().map(|(_, e)| Some(e)).collect(),
            })
        }
    }
}
