//! Polynomials and piecewise polynomials, in `f64` and in exact rationals.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Polynomial with coefficients in increasing powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Polynomial { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|c| *c != 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }
}

/// Polynomial with exact rational coefficients in increasing powers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    coefficients: Vec<Rational64>,
}

impl RationalPolynomial {
    pub fn new(mut coefficients: Vec<Rational64>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        RationalPolynomial { coefficients }
    }

    /// From integer numerators over a common denominator.
    pub fn from_ints(numerators: &[i64], denominator: i64) -> Self {
        Self::new(
            numerators
                .iter()
                .map(|&a| Rational64::new(a, denominator))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coefficients(&self) -> &[Rational64] {
        &self.coefficients
    }

    pub fn coefficient(&self, power: usize) -> Rational64 {
        self.coefficients
            .get(power)
            .copied()
            .unwrap_or_else(Rational64::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, x: Rational64) -> Rational64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Rational64::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.to_f64().eval(x)
    }

    pub fn scale(&self, factor: Rational64) -> Self {
        Self::new(self.coefficients.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coefficients.len().max(other.coefficients.len());
        Self::new(
            (0..len)
                .map(|i| self.coefficient(i) + other.coefficient(i))
                .collect(),
        )
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational64::from_integer(i as i64))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Polynomial {
        Polynomial::new(
            self.coefficients
                .iter()
                .map(|c| c.to_f64().expect("finite rational"))
                .collect(),
        )
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (power, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let unit = a == Rational64::from_integer(1);
            match power {
                0 => write!(f, "{a}")?,
                1 if unit => write!(f, "q")?,
                1 => write!(f, "{a} q")?,
                _ if unit => write!(f, "q^{power}")?,
                _ => write!(f, "{a} q^{power}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coefficients.iter().map(|c| c.to_string()))
    }
}

/// Piecewise polynomial on `[knots[0], knots[last]]`; piece `i` covers
/// `[knots[i], knots[i+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewisePolynomial {
    pub knots: Vec<f64>,
    pub pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    pub fn new(knots: Vec<f64>, pieces: Vec<Polynomial>) -> Self {
        assert_eq!(knots.len(), pieces.len() + 1, "one more knot than pieces");
        assert!(knots.windows(2).all(|k| k[0] < k[1]), "knots must increase");
        PiecewisePolynomial { knots, pieces }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().expect("non-empty"))
    }

    /// Index of the piece containing `x`; interior knots belong to the left
    /// piece.
    pub fn piece_index(&self, x: f64) -> usize {
        let interior = &self.knots[1..self.knots.len() - 1];
        interior.partition_point(|&k| k < x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// Interior points where the first derivative changes sign, found by
    /// scanning each piece on a fine grid and refining by bisection, plus
    /// knots where the one-sided derivatives have opposite signs.
    pub fn sign_changes_of_derivative(&self, resolution: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let d = p.derivative();
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            let mut prev_x = a;
            let mut prev = d.eval(a);
            for s in 1..=resolution {
                let x = a + (b - a) * s as f64 / resolution as f64;
                let v = d.eval(x);
                if prev != 0.0 && v != 0.0 && (prev < 0.0) != (v < 0.0) {
                    out.push(bisect_root(&d, prev_x, x));
                } else if v == 0.0 && s < resolution {
                    let after = d.eval(x + (b - a) / resolution as f64 * 0.5);
                    if prev != 0.0 && after != 0.0 && (prev < 0.0) != (after < 0.0) {
                        out.push(x);
                    }
                }
                if v != 0.0 {
                    prev = v;
                    prev_x = x;
                }
            }
            if i + 1 < self.pieces.len() {
                let left = d.eval(b);
                let right = self.pieces[i + 1].derivative().eval(b);
                if left != 0.0 && right != 0.0 && (left < 0.0) != (right < 0.0) {
                    out.push(b);
                }
            }
        }
        out
    }
}

fn bisect_root(p: &Polynomial, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = p.eval(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Piecewise polynomial with exact rational knots and coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiecewiseRational {
    #[serde(serialize_with = "serialize_rationals")]
    pub knots: Vec<Rational64>,
    pub pieces: Vec<RationalPolynomial>,
}

fn serialize_rationals<S: serde::Serializer>(v: &[Rational64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

/// Kind of a stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extremum {
    Minimum,
    Maximum,
}

impl PiecewiseRational {
    pub fn new(knots: Vec<Rational64>, pieces: Vec<RationalPolynomial>) -> Self {
        assert_eq!(knots.len(), pieces.len() + 1, "one more knot than pieces");
        assert!(knots.windows(2).all(|k| k[0] < k[1]), "knots must increase");
        PiecewiseRational { knots, pieces }
    }

    pub fn piece_index(&self, x: Rational64) -> usize {
        let interior = &self.knots[1..self.knots.len() - 1];
        interior.partition_point(|&k| k < x)
    }

    pub fn eval(&self, x: Rational64) -> Rational64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let interior = &self.knots[1..self.knots.len() - 1];
        let idx = interior.partition_point(|k| k.to_f64().expect("finite") < x);
        self.pieces[idx].eval_f64(x)
    }

    pub fn to_f64(&self) -> PiecewisePolynomial {
        PiecewisePolynomial::new(
            self.knots
                .iter()
                .map(|k| k.to_f64().expect("finite"))
                .collect(),
            self.pieces.iter().map(RationalPolynomial::to_f64).collect(),
        )
    }

    /// Exact stationary points with a sign change of the derivative, in the
    /// open interior of the domain. Pieces must be at most quadratic.
    pub fn stationary_points(&self) -> Vec<(Rational64, Extremum)> {
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            assert!(p.degree() <= 2, "exact stationary points need degree <= 2");
            let d = p.derivative();
            let slope = d.coefficient(1);
            if slope.is_zero() {
                continue;
            }
            let root = -d.coefficient(0) / slope;
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            if root > a && root < b {
                let nature = if slope.is_negative() {
                    Extremum::Maximum
                } else {
                    Extremum::Minimum
                };
                out.push((root, nature));
            }
            if i + 1 < self.pieces.len() {
                let left = d.eval(b);
                let right = self.pieces[i + 1].derivative().eval(b);
                if !left.is_zero() && !right.is_zero() && left.is_negative() != right.is_negative()
                {
                    let nature = if left.is_positive() {
                        Extremum::Maximum
                    } else {
                        Extremum::Minimum
                    };
                    out.push((b, nature));
                }
            }
        }
        out
    }
}
