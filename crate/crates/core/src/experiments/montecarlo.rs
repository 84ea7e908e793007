//! Monte Carlo quota curves.
//!
//! Samples are split into fixed chunks of [`CHUNK_SIZE`]; chunk `c` draws
//! from sub-stream `c` of the run's seed, chunks run in parallel, and their
//! accumulators are merged in chunk order. Results are therefore identical
//! for any number of worker threads. Every quota on the grid is evaluated on
//! the same weight samples.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{count_winning_mitm_with, half_sums, low_half, CoalitionSums, PowerProfile};
use crate::rng::RandomSeed;
use crate::simplex::{fill_uniform_simplex, sort_descending};

pub const CHUNK_SIZE: u64 = 1024;
/// Default number of sampled weight vectors.
pub const DEFAULT_SAMPLES: u64 = 1 << 16;

/// Largest player count for Monte Carlo power curves.
const POWER_CURVE_MAX_PLAYERS: usize = crate::games::CURVE_MAX_PLAYERS;
/// Largest player count for Monte Carlo Coleman curves.
const COLEMAN_CURVE_MAX_PLAYERS: usize = crate::games::MITM_MAX_PLAYERS;

/// Mean and variance accumulator. The mean is a plain sum divided by the
/// count, so that pointwise-ordered samples give ordered means; the
/// variance uses Welford's recurrence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunningMoments {
    count: u64,
    sum: f64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan's pairwise merge.
    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        self.mean += delta * other.count as f64 / count as f64;
        self.sum += other.sum;
        self.count = count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotaPoint {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
}

impl From<&RunningMoments> for QuotaPoint {
    fn from(m: &RunningMoments) -> Self {
        QuotaPoint {
            mean: m.mean(),
            standard_error: m.standard_error(),
            samples: m.count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMetadata {
    pub players: usize,
    pub seed: RandomSeed,
    pub method: String,
}

/// A statistic estimated on a grid of quotas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotaCurve {
    pub quotas: Vec<f64>,
    pub statistic: String,
    pub points: Vec<QuotaPoint>,
    pub metadata: CurveMetadata,
}

impl QuotaCurve {
    pub fn new(
        quotas: Vec<f64>,
        statistic: impl Into<String>,
        points: Vec<QuotaPoint>,
        metadata: CurveMetadata,
    ) -> Result<Self> {
        check_grid(&quotas)?;
        if points.len() != quotas.len() {
            return Err(Error::InvalidArguments(format!(
                "{} points for {} quotas",
                points.len(),
                quotas.len()
            )));
        }
        if points
            .iter()
            .any(|p| p.samples == 0 || !(p.standard_error >= 0.0))
        {
            return Err(Error::InvalidArguments(
                "points need a positive sample count and a non-negative standard error".into(),
            ));
        }
        Ok(QuotaCurve {
            quotas,
            statistic: statistic.into(),
            points,
            metadata,
        })
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn len(&self) -> usize {
        self.quotas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotas.is_empty()
    }
}

fn check_grid(quotas: &[f64]) -> Result<()> {
    if quotas.is_empty() {
        return Err(Error::InvalidArguments("empty quota grid".into()));
    }
    if quotas.iter().any(|&q| !(q > 0.5 && q <= 1.0)) {
        return Err(Error::InvalidArguments(
            "quota grid must lie in (1/2, 1]".into(),
        ));
    }
    if quotas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArguments(
            "quota grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// 99 equispaced quotas from 0.505 to 0.995, then 1.
pub fn default_quota_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (101..=199).map(|i| i as f64 / 200.0).collect();
    grid.push(1.0);
    grid
}

/// `points` equispaced quotas from `start` to `end`, optionally followed by 1.
pub fn quota_grid(start: f64, end: f64, points: usize, include_one: bool) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::InvalidArguments(
            "grid needs at least one point".into(),
        ));
    }
    let mut grid: Vec<f64> = if points == 1 {
        vec![start]
    } else {
        (0..points)
            .map(|i| start + (end - start) * i as f64 / (points - 1) as f64)
            .collect()
    };
    if include_one && grid.last() != Some(&1.0) {
        grid.push(1.0);
    }
    check_grid(&grid)?;
    Ok(grid)
}

/// Runs `body` once per sample, chunk by chunk, merging the per-chunk
/// accumulators in chunk order.
fn run_chunks<F>(
    samples: u64,
    seed: RandomSeed,
    cells: usize,
    body: F,
) -> Result<Vec<RunningMoments>>
where
    F: Fn(&mut ChaCha8Rng, &mut [RunningMoments]) -> Result<()> + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidArguments("need at least one sample".into()));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let partials: Vec<Vec<RunningMoments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.substream_rng(c);
            let mut acc = vec![RunningMoments::default(); cells];
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            for _ in 0..len {
                body(&mut rng, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_merge(partials))
}

fn pairwise_merge(mut level: Vec<Vec<RunningMoments>>) -> Vec<RunningMoments> {
    while level.len() > 1 {
        level = level
            .chunks_mut(2)
            .map(|pair| {
                let mut left = std::mem::take(&mut pair[0]);
                if let Some(right) = pair.get(1) {
                    for (a, b) in left.iter_mut().zip(right) {
                        a.merge(b);
                    }
                }
                left
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerStatistic {
    Beta,
    Psi,
}

impl PowerStatistic {
    fn name(&self) -> &'static str {
        match self {
            PowerStatistic::Beta => "beta",
            PowerStatistic::Psi => "psi",
        }
    }
}

fn check_players(n: usize, limit: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if n > limit {
        return Err(Error::BudgetExceeded { n, limit, hint: "" });
    }
    Ok(())
}

/// Expected ordered Penrose-Banzhaf indices `E(beta_k)` or `E(psi_k)` on a
/// quota grid, one curve per rank `k = 1..n` (rank 1 is the largest weight).
pub fn mc_power_curve(
    n: usize,
    quotas: &[f64],
    samples: u64,
    seed: RandomSeed,
    statistic: PowerStatistic,
) -> Result<Vec<QuotaCurve>> {
    check_players(n, POWER_CURVE_MAX_PLAYERS)?;
    check_grid(quotas)?;
    let m = quotas.len();
    let moments = run_chunks(samples, seed, n * m, |rng, acc| {
        let mut w = vec![0.0; n];
        fill_uniform_simplex(rng, &mut w);
        sort_descending(&mut w);
        let sums = CoalitionSums::new(&w)?;
        let total = sums.total();
        let thresholds: Vec<f64> = quotas.iter().rev().map(|q| q * total).collect();
        for (i, counts) in sums.sweep(&thresholds).into_iter().enumerate() {
            let qi = m - 1 - i;
            let profile = PowerProfile::from(counts);
            let values = match statistic {
                PowerStatistic::Beta => &profile.beta,
                PowerStatistic::Psi => &profile.psi,
            };
            for (k, v) in values.iter().enumerate() {
                acc[k * m + qi].push(*v);
            }
        }
        Ok(())
    })?;
    (0..n)
        .map(|k| {
            QuotaCurve::new(
                quotas.to_vec(),
                format!("{}_{}", statistic.name(), k + 1),
                moments[k * m..(k + 1) * m]
                    .iter()
                    .map(QuotaPoint::from)
                    .collect(),
                CurveMetadata {
                    players: n,
                    seed,
                    method: format!("monte-carlo, {samples} samples"),
                },
            )
        })
        .collect()
}

/// Number of winning coalitions for each threshold, by meet in the middle
/// over the two halves of the weight vector.
fn winning_counts(w: &[f64], thresholds: &[f64]) -> Vec<u64> {
    let h = low_half(w.len());
    let low = half_sums(&w[..h]);
    let mut high = half_sums(&w[h..]);
    high.sort_unstable_by(f64::total_cmp);
    thresholds
        .iter()
        .map(|&t| {
            low.iter()
                .map(|&l| (high.len() - high.partition_point(|&s| l + s < t)) as u64)
                .sum()
        })
        .collect()
}

fn grand_total(w: &[f64]) -> f64 {
    let h = low_half(w.len());
    w[..h].iter().fold(0.0, |a, b| a + b) + w[h..].iter().fold(0.0, |a, b| a + b)
}

/// Expected Coleman index on a quota grid.
pub fn mc_coleman_curve(
    n: usize,
    quotas: &[f64],
    samples: u64,
    seed: RandomSeed,
) -> Result<QuotaCurve> {
    check_players(n, COLEMAN_CURVE_MAX_PLAYERS)?;
    check_grid(quotas)?;
    let scale = 0.5f64.powi(n as i32);
    let moments = run_chunks(samples, seed, quotas.len(), |rng, acc| {
        let mut w = vec![0.0; n];
        fill_uniform_simplex(rng, &mut w);
        let total = grand_total(&w);
        let thresholds: Vec<f64> = quotas.iter().map(|q| q * total).collect();
        for (cell, count) in acc.iter_mut().zip(winning_counts(&w, &thresholds)) {
            cell.push(count as f64 * scale);
        }
        Ok(())
    })?;
    QuotaCurve::new(
        quotas.to_vec(),
        "coleman",
        moments.iter().map(QuotaPoint::from).collect(),
        CurveMetadata {
            players: n,
            seed,
            method: format!("monte-carlo, {samples} samples"),
        },
    )
}

/// Average of the Hoeffding bound `exp(-2 (q - 1/2)^2 / sum W_i^2)` on a
/// quota grid. With the same seed the weight samples coincide with those of
/// [`mc_coleman_curve`].
pub fn mc_hoeffding_curve(
    n: usize,
    quotas: &[f64],
    samples: u64,
    seed: RandomSeed,
) -> Result<QuotaCurve> {
    check_players(n, usize::MAX)?;
    check_grid(quotas)?;
    let moments = run_chunks(samples, seed, quotas.len(), |rng, acc| {
        let mut w = vec![0.0; n];
        fill_uniform_simplex(rng, &mut w);
        let s: f64 = w.iter().map(|x| x * x).sum();
        for (cell, q) in acc.iter_mut().zip(quotas) {
            let d = q - 0.5;
            cell.push((-2.0 * d * d / s).exp());
        }
        Ok(())
    })?;
    QuotaCurve::new(
        quotas.to_vec(),
        "hoeffding-bound",
        moments.iter().map(QuotaPoint::from).collect(),
        CurveMetadata {
            players: n,
            seed,
            method: format!("monte-carlo, {samples} samples"),
        },
    )
}

/// Draws a quota uniformly from the open interval (1/2, 1).
pub(crate) fn uniform_open_quota<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let q = 0.5 + 0.5 * rng.random::<f64>();
        if q > 0.5 && q < 1.0 {
            return q;
        }
    }
}

/// Exact counts for the Monte Carlo kernels' weight convention; used to
/// cross-check them against the games module.
#[allow(dead_code)]
pub(crate) fn reference_counts(w: &[f64], threshold: f64) -> Result<u64> {
    Ok(count_winning_mitm_with(w, threshold)?.winning)
}
