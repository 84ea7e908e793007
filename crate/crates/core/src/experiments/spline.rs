//! Piecewise polynomial least-squares fits with fixed or automatically
//! chosen breakpoints.
//!
//! Abscissae are mapped to `u = (x - origin) / scale` in `[-1, 1]` and each
//! piece is a polynomial in `u`. Residual sums of squares come from Givens
//! updates of a QR factorization, so exact data fit to rounding level.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Coefficients below this fraction of the largest coefficient of a piece do
/// not count towards its effective degree.
const DEGREE_CUTOFF: f64 = 1e-9;
/// Largest input accepted by automatic breakpoint selection, which is
/// quadratic in the number of samples.
const AUTO_MAX_SAMPLES: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub enum BreakpointMode {
    /// Interior breakpoints; a sample at a breakpoint belongs to the piece
    /// on its left.
    Fixed(Vec<f64>),
    /// Breakpoints minimizing residual sum of squares plus `penalty` per
    /// breakpoint. `None` picks a penalty of `1e-9` times the total sum of
    /// squares about the mean plus a
    /// rounding-level floor.
    Auto { penalty: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplinePiece {
    pub lower: f64,
    pub upper: f64,
    /// Coefficients in the scaled variable `u`, lowest power first.
    pub coefficients: Vec<f64>,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplineFit {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<SplinePiece>,
    pub origin: f64,
    pub scale: f64,
    /// Largest effective degree over the pieces.
    pub degree: usize,
    pub max_residual: f64,
}

impl SplineFit {
    fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.origin) / self.scale;
        Polynomial::new(self.pieces[self.piece_index(x)].coefficients.clone()).eval(u)
    }

    /// Coefficients of each piece as a polynomial in `x`.
    pub fn monomial_pieces(&self) -> Vec<Polynomial> {
        self.pieces
            .iter()
            .map(|p| {
                // sum a_k ((x - o) / s)^k, expanded by Horner on polynomials
                let mut acc = vec![0.0; p.coefficients.len()];
                for &a in p.coefficients.iter().rev() {
                    let mut next = vec![0.0; acc.len()];
                    for (k, &c) in acc.iter().enumerate() {
                        if k + 1 < next.len() {
                            next[k + 1] += c / self.scale;
                        }
                        next[k] -= c * self.origin / self.scale;
                    }
                    next[0] += a;
                    acc = next;
                }
                Polynomial::new(acc)
            })
            .collect()
    }
}

/// Least squares accumulated one row at a time.
#[derive(Clone)]
struct IncrementalLs {
    p: usize,
    r: Vec<f64>,
    qty: Vec<f64>,
    sse: f64,
    rows: usize,
}

impl IncrementalLs {
    fn new(p: usize) -> Self {
        IncrementalLs {
            p,
            r: vec![0.0; p * p],
            qty: vec![0.0; p],
            sse: 0.0,
            rows: 0,
        }
    }

    fn add(&mut self, u: f64, y: f64) {
        let p = self.p;
        let mut row = vec![0.0; p];
        let mut t = 1.0;
        for v in row.iter_mut() {
            *v = t;
            t *= u;
        }
        let mut yy = y;
        for k in 0..p {
            if row[k] == 0.0 {
                continue;
            }
            let rkk = self.r[k * p + k];
            let h = rkk.hypot(row[k]);
            let (c, s) = (rkk / h, row[k] / h);
            for (rkj, x) in self.r[k * p + k..(k + 1) * p].iter_mut().zip(&mut row[k..]) {
                let a = *rkj;
                *rkj = c * a + s * *x;
                *x = -s * a + c * *x;
            }
            let a = self.qty[k];
            self.qty[k] = c * a + s * yy;
            yy = -s * a + c * yy;
        }
        self.sse += yy * yy;
        self.rows += 1;
    }

    fn solve(&self) -> Result<Vec<f64>> {
        let p = self.p;
        let scale = (0..p).map(|k| self.r[k * p + k].abs()).fold(0.0, f64::max);
        let mut a = vec![0.0; p];
        for k in (0..p).rev() {
            let d = self.r[k * p + k];
            if !(d.abs() > scale * 1e-13) {
                return Err(Error::InvalidArguments(
                    "too few distinct abscissae for the requested degree".into(),
                ));
            }
            let s: f64 = (k + 1..p).map(|j| self.r[k * p + j] * a[j]).sum();
            a[k] = (self.qty[k] - s) / d;
        }
        Ok(a)
    }
}

fn effective_degree(coefficients: &[f64]) -> usize {
    let big = coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    coefficients
        .iter()
        .rposition(|c| c.abs() > DEGREE_CUTOFF * big.max(f64::MIN_POSITIVE))
        .unwrap_or(0)
}

/// Fits a piecewise polynomial of degree at most `max_degree` to
/// `(x, y)` samples. Every piece needs at least `max_degree + 2` samples.
pub fn fit_spline(
    samples: &[(f64, f64)],
    max_degree: usize,
    mode: BreakpointMode,
) -> Result<SplineFit> {
    if samples
        .iter()
        .any(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidArguments("non-finite sample".into()));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let min_len = max_degree + 2;
    if pts.len() < min_len {
        return Err(Error::InvalidArguments(format!(
            "{} samples cannot determine a degree-{max_degree} fit",
            pts.len()
        )));
    }
    let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
    let origin = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let u: Vec<f64> = pts.iter().map(|p| (p.0 - origin) / scale).collect();
    let p = max_degree + 1;

    // segment boundaries as index ranges [start, end)
    let bounds: Vec<usize> = match mode {
        BreakpointMode::Fixed(mut bps) => {
            bps.sort_by(f64::total_cmp);
            let mut b = vec![0];
            b.extend(bps.iter().map(|&bp| pts.partition_point(|q| q.0 <= bp)));
            b.push(pts.len());
            if b.windows(2).any(|w| w[1] - w[0] < min_len) {
                return Err(Error::InvalidArguments(format!(
                    "every piece needs at least {min_len} samples"
                )));
            }
            b
        }
        BreakpointMode::Auto { penalty } => {
            if pts.len() > AUTO_MAX_SAMPLES {
                return Err(Error::InvalidArguments(format!(
                    "automatic breakpoints support at most {AUTO_MAX_SAMPLES} samples"
                )));
            }
            let penalty = penalty.unwrap_or_else(|| {
                let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
                // the second term sits well above rounding-level residuals
                1e-9 * pts.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>()
                    + 1e-20 * pts.iter().map(|p| p.1 * p.1).sum::<f64>()
            });
            if !(penalty >= 0.0) {
                return Err(Error::InvalidArguments(
                    "penalty must be non-negative".into(),
                ));
            }
            optimal_partition(&u, &pts, p, min_len, penalty)
        }
    };

    let mut pieces = Vec::with_capacity(bounds.len() - 1);
    let mut max_residual = 0.0f64;
    for w in bounds.windows(2) {
        let mut ls = IncrementalLs::new(p);
        for i in w[0]..w[1] {
            ls.add(u[i], pts[i].1);
        }
        let coefficients = ls.solve()?;
        let poly = Polynomial::new(coefficients.clone());
        for i in w[0]..w[1] {
            max_residual = max_residual.max((poly.eval(u[i]) - pts[i].1).abs());
        }
        pieces.push(SplinePiece {
            lower: pts[w[0]].0,
            upper: pts[w[1] - 1].0,
            degree: effective_degree(&coefficients),
            coefficients,
        });
    }
    let breakpoints = bounds[1..bounds.len() - 1]
        .iter()
        .map(|&i| 0.5 * (pts[i - 1].0 + pts[i].0))
        .collect();
    Ok(SplineFit {
        breakpoints,
        degree: pieces.iter().map(|p| p.degree).max().unwrap_or(0),
        pieces,
        origin,
        scale,
        max_residual,
    })
}

/// Dynamic programming over segment ends. Ties prefer fewer pieces.
fn optimal_partition(
    u: &[f64],
    pts: &[(f64, f64)],
    p: usize,
    min_len: usize,
    penalty: f64,
) -> Vec<usize> {
    let n = pts.len();
    // best[j]: (cost, pieces, previous boundary) for the prefix [0, j)
    let mut best: Vec<Option<(f64, usize, usize)>> = vec![None; n + 1];
    best[0] = Some((-penalty, 0, 0));
    for start in 0..n {
        let Some((base, count, _)) = best[start] else {
            continue;
        };
        let mut ls = IncrementalLs::new(p);
        for end in start..n {
            ls.add(u[end], pts[end].1);
            let len = end + 1 - start;
            if len < min_len || (n - end - 1 > 0 && n - end - 1 < min_len) {
                continue;
            }
            let cost = base + penalty + ls.sse;
            let better = match best[end + 1] {
                None => true,
                Some((c, k, _)) => cost < c || (cost == c && count + 1 < k),
            };
            if better {
                best[end + 1] = Some((cost, count + 1, start));
            }
        }
    }
    let mut bounds = vec![n];
    let mut j = n;
    while j > 0 {
        j = best[j].expect("full range is always reachable").2;
        bounds.push(j);
    }
    bounds.reverse();
    bounds
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=200)
            .map(|i| {
                let x = 0.5 + i as f64 / 400.0;
                (x, f(x))
            })
            .collect()
    }

    #[test]
    fn exact_linear_and_quadratic() {
        let fit = fit_spline(&grid(|x| 1.5 - x), 1, BreakpointMode::Fixed(vec![])).unwrap();
        assert_eq!(fit.degree, 1);
        assert!(fit.max_residual < 1e-13);
        let m = &fit.monomial_pieces()[0];
        assert!((m.coefficients[0] - 1.5).abs() < 1e-12);
        assert!((m.coefficients[1] + 1.0).abs() < 1e-12);

        let fit = fit_spline(&grid(|x| 3.0 * x * x - x), 4, BreakpointMode::Fixed(vec![])).unwrap();
        assert_eq!(fit.degree, 2);
        assert!((fit.eval(0.8) - (3.0 * 0.64 - 0.8)).abs() < 1e-12);
    }

    #[test]
    fn finds_a_kink() {
        let f = |x: f64| {
            if x <= 0.7 {
                x * x
            } else {
                0.49 + 1.4 * (x - 0.7) - 2.0 * (x - 0.7).powi(2)
            }
        };
        let fit = fit_spline(&grid(f), 2, BreakpointMode::Auto { penalty: None }).unwrap();
        assert_eq!(fit.breakpoints.len(), 1);
        assert!((fit.breakpoints[0] - 0.7).abs() <= 1.0 / 400.0);
        assert!(fit.max_residual < 1e-10);
        assert_eq!(fit.degree, 2);
    }

    #[test]
    fn constant_data_needs_no_breakpoints() {
        let fit = fit_spline(&grid(|_| 0.25), 3, BreakpointMode::Auto { penalty: None }).unwrap();
        assert!(fit.breakpoints.is_empty());
        assert_eq!(fit.degree, 0);
    }

    #[test]
    fn fixed_breakpoints_assign_ties_left() {
        let fit = fit_spline(
            &grid(|x| (x - 0.75).abs()),
            1,
            BreakpointMode::Fixed(vec![0.75]),
        )
        .unwrap();
        assert!(fit.max_residual < 1e-13);
        assert_eq!(fit.pieces[0].upper, 0.75);
    }

    #[test]
    fn underdetermined_is_an_error() {
        let pts = vec![(0.1, 1.0), (0.2, 2.0), (0.3, 1.0)];
        assert!(fit_spline(&pts, 2, BreakpointMode::Fixed(vec![])).is_err());
        assert!(fit_spline(&grid(|x| x), 1, BreakpointMode::Fixed(vec![0.501])).is_err());
        let dup = vec![(0.5, 1.0); 10];
        assert!(fit_spline(&dup, 1, BreakpointMode::Fixed(vec![])).is_err());
    }
}
