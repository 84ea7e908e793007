//! Weight vectors on the probability simplex: validation, uniform sampling,
//! descending order and the Rényi partial-sum representation of the order
//! statistics.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::rng::{unit_exponential, RandomSeed};

/// Tolerance on `|sum - 1|` accepted at construction.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates non-negativity and the unit sum.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "entry {w} is negative or not finite"
            )));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(WeightVector(weights))
    }

    /// Rescales arbitrary non-negative reals onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(w) = raw.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "entry {w} is negative or not finite"
            )));
        }
        let total = compensated_sum(raw.iter().copied());
        if total <= 0.0 {
            return Err(Error::InvalidWeights("all entries are zero".into()));
        }
        Self::new(raw.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `sum_i w_i^2`.
    pub fn sum_of_squares(&self) -> f64 {
        compensated_sum(self.0.iter().map(|w| w * w))
    }
}

impl AsRef<[f64]> for WeightVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Weights sorted in non-increasing order, with the sorting permutation.
///
/// `permutation[k]` is the (0-based) original index of the `k`-th largest
/// weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderedWeightVector {
    weights: Vec<f64>,
    permutation: Vec<usize>,
}

impl OrderedWeightVector {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The ordered weights as a plain weight vector.
    pub fn to_weight_vector(&self) -> WeightVector {
        WeightVector(self.weights.clone())
    }

    /// Undoes the sort.
    pub fn unorder(&self) -> WeightVector {
        let mut out = vec![0.0; self.weights.len()];
        for (w, &i) in self.weights.iter().zip(&self.permutation) {
            out[i] = *w;
        }
        WeightVector(out)
    }
}

/// Draws a weight vector uniformly from the simplex by normalizing `n`
/// independent unit exponentials.
pub fn sample_uniform_simplex(n: usize, seed: RandomSeed) -> Result<WeightVector> {
    let mut rng = seed.rng();
    sample_uniform_simplex_with(n, &mut rng)
}

/// As [`sample_uniform_simplex`], drawing from a caller-owned generator.
pub fn sample_uniform_simplex_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let mut buf = vec![0.0; n];
    fill_uniform_simplex(rng, &mut buf);
    Ok(WeightVector(buf))
}

/// Allocation-free sampler for hot loops. `out` must be non-empty.
pub fn fill_uniform_simplex<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    debug_assert!(!out.is_empty());
    let mut total = CompensatedSum::new();
    for x in out.iter_mut() {
        *x = unit_exponential(rng);
        total.add(*x);
    }
    let total = total.value();
    for x in out.iter_mut() {
        *x /= total;
    }
}

/// Sorts descending; ties keep their original order.
pub fn order_descending(w: &WeightVector) -> OrderedWeightVector {
    let mut permutation: Vec<usize> = (0..w.len()).collect();
    // `sort_by` is stable.
    permutation.sort_by(|&a, &b| w.0[b].total_cmp(&w.0[a]));
    let weights = permutation.iter().map(|&i| w.0[i]).collect();
    OrderedWeightVector {
        weights,
        permutation,
    }
}

/// Sorts a slice descending in place.
pub fn sort_descending(w: &mut [f64]) {
    w.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// `(sum_{j >= k} w_j / j)_{k = 1..n}`.
///
/// Applied to an unordered uniform sample this has the same law as the
/// ordered sample.
pub fn renyi_partial_sums(w: &WeightVector) -> Vec<f64> {
    let n = w.len();
    let mut out = vec![0.0; n];
    let mut acc = CompensatedSum::new();
    for j in (0..n).rev() {
        acc.add(w.0[j] / (j + 1) as f64);
        out[j] = acc.value();
    }
    out
}
