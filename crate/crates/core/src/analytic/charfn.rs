//! Characteristic function of `Z = sum_i W_i xi_i - 1/2`, where `W` is
//! uniform on the simplex and the `xi_i` are fair coins.
//!
//! Two evaluation routes are provided:
//!
//! * the power series `sum_j (-1)^j (t/2)^(2j) C(j+n-1, n-1) / (n)_(2j)`,
//!   which is exact in principle but alternates with terms as large as
//!   roughly `e^(|t|/2)`, so it is only trusted on a validated range of `t`;
//! * a finite closed form. `Z` has atoms of mass `2^-n` at `+-1/2` and,
//!   conditionally on `k` coins landing heads (`0 < k < n`), the sum of `k`
//!   weights is `Beta(k, n-k)`. The continuous part therefore has a
//!   polynomial density `P` on `[-1/2, 1/2]`, and integrating by parts
//!   `n - 1` times gives
//!   `phi(t) = 2^(1-n) cos(t/2) + sum_j 2 P^(j)(1/2) s_j(t) / t^(j+1)`
//!   with `s_j = (-1)^(j/2) sin(t/2)` for even `j` and
//!   `-(-1)^((j+1)/2) cos(t/2)` for odd `j`. The derivatives are formed in
//!   exact rational arithmetic. This route is accurate for large `|t|` and
//!   useless near 0.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::weightdist::binomial;

/// Largest supported player count.
pub const MAX_CHARFN_PLAYERS: usize = 64;

/// Largest `|t|` for which the series keeps an absolute error below about
/// `1e-9`, established against the closed form.
pub fn series_validated_range(n: usize) -> f64 {
    match n {
        0..=16 => 36.0,
        17..=32 => 48.0,
        _ => 60.0,
    }
}

/// Below this `|t|` the series is used, above it the closed form.
fn route_switch(n: usize) -> f64 {
    if n <= 48 {
        24.0
    } else {
        32.0
    }
}

fn check_players(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if n > MAX_CHARFN_PLAYERS {
        return Err(Error::AccuracyUnsupported(format!(
            "characteristic function validated for at most {MAX_CHARFN_PLAYERS} players, got {n}"
        )));
    }
    Ok(())
}

/// Sums the series without range checks.
fn series_unchecked(n: usize, t: f64) -> f64 {
    let n_f = n as f64;
    let x = -0.25 * t * t;
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    acc.add(term);
    let mut j = 0.0f64;
    loop {
        let ratio = x * (j + n_f) / ((j + 1.0) * (n_f + 2.0 * j) * (n_f + 2.0 * j + 1.0));
        term *= ratio;
        j += 1.0;
        acc.add(term);
        if ratio.abs() < 1.0 && term.abs() <= f64::EPSILON * 1e-2 * acc.value().abs().max(1e-300) {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    acc.value()
}

/// Series evaluation of the characteristic function, refusing `|t|` beyond
/// [`series_validated_range`].
pub fn phi_z_series(n: usize, t: f64) -> Result<f64> {
    check_players(n)?;
    if !t.is_finite() || t.abs() > series_validated_range(n) {
        return Err(Error::AccuracyUnsupported(format!(
            "series for {n} players is validated for |t| <= {}, got {t}",
            series_validated_range(n)
        )));
    }
    Ok(series_unchecked(n, t))
}

/// Characteristic function of `Z` for a fixed number of players, with the
/// closed-form coefficients precomputed.
#[derive(Debug, Clone)]
pub struct ColemanCharacteristic {
    n: usize,
    /// Mass of each of the two atoms, `2^-n`.
    atom: f64,
    /// `P^(j)(1/2)` for `j = 0..n-1`.
    derivatives: Vec<f64>,
    switch: f64,
}

impl ColemanCharacteristic {
    pub fn new(n: usize) -> Result<Self> {
        check_players(n)?;
        Ok(ColemanCharacteristic {
            n,
            atom: 0.5f64.powi(n as i32),
            derivatives: edge_derivatives(n),
            switch: route_switch(n),
        })
    }

    pub fn players(&self) -> usize {
        self.n
    }

    /// Mass of each atom at `+-1/2`.
    pub fn atom_mass(&self) -> f64 {
        self.atom
    }

    /// `phi_Z(t)`, from whichever route is accurate at `t`.
    pub fn phi(&self, t: f64) -> f64 {
        let t = t.abs();
        if t <= self.switch {
            series_unchecked(self.n, t)
        } else {
            2.0 * self.atom * (0.5 * t).cos() + self.continuous_closed_form(t)
        }
    }

    /// Characteristic function of the continuous part alone (total mass
    /// `1 - 2^(1-n)`).
    pub fn phi_continuous(&self, t: f64) -> f64 {
        let t = t.abs();
        if t <= self.switch {
            series_unchecked(self.n, t) - 2.0 * self.atom * (0.5 * t).cos()
        } else {
            self.continuous_closed_form(t)
        }
    }

    /// `P(1/2)`, the height of the continuous density at the edges; the
    /// continuous part decays like `2 P(1/2) sin(t/2) / t`.
    pub fn edge_density(&self) -> f64 {
        self.derivatives.first().copied().unwrap_or(0.0)
    }

    /// The closed form at any `t != 0`; loses accuracy as `t` approaches 0.
    pub fn closed_form(&self, t: f64) -> f64 {
        let t = t.abs();
        2.0 * self.atom * (0.5 * t).cos() + self.continuous_closed_form(t)
    }

    fn continuous_closed_form(&self, t: f64) -> f64 {
        let (s, c) = (0.5 * t).sin_cos();
        let mut acc = CompensatedSum::new();
        let mut power = t;
        for (j, d) in self.derivatives.iter().enumerate() {
            let oscillation = if j % 2 == 0 {
                if (j / 2) % 2 == 0 {
                    s
                } else {
                    -s
                }
            } else if j.div_ceil(2) % 2 == 0 {
                -c
            } else {
                c
            };
            acc.add(2.0 * d * oscillation / power);
            power *= t;
        }
        acc.value()
    }
}

/// `P^(j)(1/2)`, `j = 0..n-1`, where `P` is the density of the continuous
/// part of `Z`. In `u = 1/2 - z` the `k`-heads component is
/// `C(n,k) 2^-n (1-u)^(k-1) u^m / B(k, n-k)` with `m = n-k-1`.
fn edge_derivatives(n: usize) -> Vec<f64> {
    if n < 2 {
        return Vec::new();
    }
    let fact = |m: usize| (1..=m).fold(BigInt::one(), |a, i| a * BigInt::from(i));
    let scale = BigRational::new(BigInt::one(), BigInt::one() << n);
    let mut d = vec![BigRational::zero(); n - 1];
    for k in 1..n {
        let m = n - k - 1;
        let weight = BigRational::new(
            BigInt::from(binomial(n, k)) * fact(n - 1),
            fact(k - 1) * fact(m),
        ) * &scale;
        for (j, dj) in d.iter_mut().enumerate().skip(m) {
            let i = j - m;
            if i > k - 1 {
                break;
            }
            // d^j/dz^j = (-1)^j d^j/du^j; the u^j coefficient of
            // (1-u)^(k-1) u^m is (-1)^i C(k-1, i).
            let mut term =
                &weight * BigRational::from_integer(fact(j) * BigInt::from(binomial(k - 1, i)));
            if (j + i) % 2 == 1 {
                term = -term;
            }
            *dj += term;
        }
    }
    d.iter().map(|x| x.to_f64().expect("finite")).collect()
}

/// `phi_Z(t)` for `n` players.
pub fn phi_z(n: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidArguments(format!("t = {t}")));
    }
    Ok(ColemanCharacteristic::new(n)?.phi(t))
}
