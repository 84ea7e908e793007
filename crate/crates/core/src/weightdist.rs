//! Distribution of the ordered weights of a uniformly random weight vector:
//! expected ordered weights, the density and distribution function of the
//! `k`-th largest weight, and product moments.
//!
//! The density of the `k`-th largest of `n` weights is
//!
//! ```text
//! f(x) = n (n-1) C(n-1, k-1) * sum_{j=k}^{min(n, floor(1/x))} (-1)^(j-k) C(n-k, j-k) (1 - j x)^(n-2)
//! ```
//!
//! supported on `[1/n, 1]` for `k = 1` and on `[0, 1/k]` otherwise. The
//! alternating sum cancels badly near `x = 0` once `n` grows, so binomial
//! coefficients are formed exactly and the sum is compensated; beyond
//! [`MAX_DENSITY_PLAYERS`] players the evaluation is refused.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Largest player count for which densities are evaluated.
pub const MAX_DENSITY_PLAYERS: usize = 64;

/// Above this many players every evaluation carries a rounding-error
/// estimate and fails rather than return a value dominated by cancellation.
pub const EXACT_RANGE_PLAYERS: usize = 30;

/// Largest acceptable estimated absolute error, relative to `max(1, |f|)`.
const CANCELLATION_TOLERANCE: f64 = 1e-8;

/// `C(n, k)` in exact integer arithmetic. Exact for every `n <= 64`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn big_factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Rising factorial `(a)_l = a (a+1) ... (a+l-1)`.
pub fn rising_factorial(a: usize, l: usize) -> BigInt {
    (0..l).fold(BigInt::one(), |acc, i| acc * BigInt::from(a + i))
}

fn check_rank(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidRank { n, k });
    }
    Ok(())
}

/// `E(W_k)` for the `k`-th largest weight, as an exact rational:
/// `(1/n) sum_{j=k}^{n} 1/j`.
pub fn expected_ordered_weight_exact(n: usize, k: usize) -> Result<BigRational> {
    check_rank(n, k)?;
    let sum = (k..=n).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::one(), BigInt::from(j))
    });
    Ok(sum / BigRational::from_integer(BigInt::from(n)))
}

/// `E(W_k)`, the `k`-th coordinate of the barycenter of the ordered simplex.
pub fn expected_ordered_weight(n: usize, k: usize) -> Result<f64> {
    Ok(expected_ordered_weight_exact(n, k)?
        .to_f64()
        .expect("rational in (0, 1]"))
}

/// All `n` expected ordered weights.
pub fn expected_ordered_weights(n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|k| expected_ordered_weight(n, k)).collect()
}

/// Density and distribution function of the `k`-th largest of `n` uniformly
/// random weights.
#[derive(Debug, Clone, Serialize)]
pub struct OrderedWeightDensity {
    n: usize,
    k: usize,
    support: (f64, f64),
    /// `n (n-1) C(n-1, k-1)`.
    prefactor: f64,
    /// `(-1)^(j-k) C(n-k, j-k)` for `j = k..=n`.
    coefficients: Vec<f64>,
}

impl OrderedWeightDensity {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        check_rank(n, k)?;
        if n == 1 {
            return Err(Error::DegenerateDistribution);
        }
        if n > MAX_DENSITY_PLAYERS {
            return Err(Error::AccuracyUnsupported(format!(
                "order-statistic densities are validated for at most {MAX_DENSITY_PLAYERS} players, got {n}"
            )));
        }
        let support = if k == 1 {
            (1.0 / n as f64, 1.0)
        } else {
            (0.0, 1.0 / k as f64)
        };
        let prefactor = (n * (n - 1)) as f64 * binomial(n - 1, k - 1) as f64;
        let coefficients = (k..=n)
            .map(|j| {
                let c = binomial(n - k, j - k) as f64;
                if (j - k) & 1 == 0 {
                    c
                } else {
                    -c
                }
            })
            .collect();
        Ok(OrderedWeightDensity {
            n,
            k,
            support,
            prefactor,
            coefficients,
        })
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Points `1/j`, `j = k..=n`, inside the support, in increasing order.
    /// The density is a single polynomial between consecutive breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        let mut out: Vec<f64> = (self.k..=self.n)
            .rev()
            .map(|j| 1.0 / j as f64)
            .filter(|&b| b >= lo && b <= hi)
            .collect();
        out.dedup();
        out
    }

    /// Number of terms `j = k..=min(n, floor(1/x))`, for `x > 0`.
    fn active_terms(&self, x: f64) -> usize {
        let mut count = 0;
        for j in self.k..=self.n {
            if j as f64 * x > 1.0 {
                break;
            }
            count += 1;
        }
        count
    }

    /// Sums `c_j (1 - j x)^power * scale_j` over active terms; returns the
    /// sum and the sum of absolute values of the terms.
    fn alternating_sum(&self, x: f64, power: i32, divide_by_j: bool) -> (f64, f64) {
        let mut acc = CompensatedSum::new();
        let mut magnitude = 0.0;
        for (i, c) in self.coefficients[..self.active_terms(x)].iter().enumerate() {
            let j = (self.k + i) as f64;
            let mut term = c * (1.0 - j * x).powi(power);
            if divide_by_j {
                term /= j;
            }
            magnitude += term.abs();
            acc.add(term);
        }
        (acc.value(), magnitude)
    }

    fn guard(&self, value: f64, magnitude: f64, what: &str, x: f64) -> Result<()> {
        if self.n <= EXACT_RANGE_PLAYERS {
            return Ok(());
        }
        let error = magnitude * (self.n as f64 + 2.0) * f64::EPSILON;
        if error > CANCELLATION_TOLERANCE * value.abs().max(1.0) {
            return Err(Error::AccuracyUnsupported(format!(
                "{what} of rank {} among {} players at x = {x}: cancellation error estimate {error:.1e}",
                self.k, self.n
            )));
        }
        Ok(())
    }

    /// `f_{n,k}(x)`; exactly zero outside the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::InvalidArguments("x is NaN".into()));
        }
        let (lo, hi) = self.support;
        if x < lo || x > hi || x <= 0.0 {
            return Ok(0.0);
        }
        let (sum, magnitude) = self.alternating_sum(x, (self.n - 2) as i32, false);
        let value = self.prefactor * sum;
        self.guard(value, self.prefactor * magnitude, "density", x)?;
        Ok(value.max(0.0))
    }

    /// `F_k(x) = P(W_k <= x)`, by exact term-wise integration.
    ///
    /// Each term integrates to `(1 - j x)^(n-1) / (j (n-1))` over `[x, 1/j]`,
    /// so the survival function is
    /// `n C(n-1, k-1) sum_j (-1)^(j-k) C(n-k, j-k) (1 - j x)^(n-1) / j`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::InvalidArguments("x is NaN".into()));
        }
        let (lo, hi) = self.support;
        if x <= lo {
            return Ok(0.0);
        }
        if x >= hi {
            return Ok(1.0);
        }
        let scale = self.prefactor / (self.n - 1) as f64;
        let (sum, magnitude) = self.alternating_sum(x, (self.n - 1) as i32, true);
        let survival = scale * sum;
        self.guard(survival, scale * magnitude, "distribution function", x)?;
        Ok((1.0 - survival).clamp(0.0, 1.0))
    }
}

/// `f_{n,k}(x)`.
pub fn ordered_weight_density(n: usize, k: usize, x: f64) -> Result<f64> {
    OrderedWeightDensity::new(n, k)?.density(x)
}

/// `F_{n,k}(x)`.
pub fn ordered_weight_cdf(n: usize, k: usize, x: f64) -> Result<f64> {
    OrderedWeightDensity::new(n, k)?.cdf(x)
}

/// Exponents `(m_1, ..., m_n)` of a product moment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentIndex(pub Vec<u32>);

impl MomentIndex {
    pub fn order(&self) -> usize {
        self.0.iter().map(|&m| m as usize).sum()
    }
}

/// `E(prod_j W_j^{m_j}) = prod_j m_j! / (n)_{|m|}`, exactly.
pub fn product_moment_exact(n: usize, m: &MomentIndex) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if m.0.len() != n {
        return Err(Error::InvalidArguments(format!(
            "moment index has {} exponents for {n} players",
            m.0.len()
        )));
    }
    let numerator =
        m.0.iter()
            .fold(BigInt::one(), |acc, &mj| acc * big_factorial(mj as usize));
    Ok(BigRational::new(numerator, rising_factorial(n, m.order())))
}

pub fn product_moment(n: usize, m: &MomentIndex) -> Result<f64> {
    Ok(to_f64(&product_moment_exact(n, m)?))
}

/// `E(sum_j W_j^m) = m! / (n+1)_{m-1}`, exactly.
pub fn power_sum_moment_exact(n: usize, m: u32) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if m == 0 {
        return Err(Error::InvalidArguments(
            "power-sum moment needs m >= 1".into(),
        ));
    }
    let m = m as usize;
    Ok(BigRational::new(
        big_factorial(m),
        rising_factorial(n + 1, m - 1),
    ))
}

pub fn power_sum_moment(n: usize, m: u32) -> Result<f64> {
    Ok(to_f64(&power_sum_moment_exact(n, m)?))
}

/// Mean and variance of `sum_j W_j^2`, exactly:
/// `2/(n+1)` and `4(n-1) / ((n+1)^2 (n+2)(n+3))`.
pub fn sum_sq_stats_exact(n: usize) -> Result<(BigRational, BigRational)> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let n = BigInt::from(n);
    let one = BigInt::one();
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let mean = BigRational::new(two.clone(), &n + &one);
    let variance = BigRational::new(
        BigInt::from(4) * (&n - &one),
        (&n + &one) * (&n + &one) * (&n + &two) * (&n + &three),
    );
    Ok((mean, variance))
}

pub fn sum_sq_stats(n: usize) -> Result<(f64, f64)> {
    let (mean, variance) = sum_sq_stats_exact(n)?;
    Ok((to_f64(&mean), to_f64(&variance)))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("moments are finite")
}
