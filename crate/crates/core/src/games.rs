//! Exact computations on a single weighted voting game.
//!
//! # Coalition weights
//!
//! Floating-point sums depend on the order of summation, and every kernel
//! here must agree bit-for-bit on which coalitions win. The weight of a
//! coalition is therefore defined as `low + high`, where `low` sums the
//! members among the first `ceil(n/2)` players and `high` the remaining
//! members, each accumulated in increasing player index. The quota is
//! applied to the weight of the grand coalition computed the same way, so
//! the grand coalition always wins at `q = 1`: a coalition wins iff its
//! weight is `>= q * total`, with no tolerance.
//!
//! Integer weights with a rational quota ([`ExactGame`]) avoid rounding
//! altogether.

use std::ops::Add;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::WeightVector;

/// Enumeration limit of [`count_winning_naive`].
pub const NAIVE_MAX_PLAYERS: usize = 30;
/// Limit of [`count_winning_mitm`]; each half holds at most `2^24` sums.
pub const MITM_MAX_PLAYERS: usize = 48;
/// [`banzhaf`] switches to the meet-in-the-middle kernel above this size.
pub const NAIVE_DISPATCH_PLAYERS: usize = 20;
/// Limit of [`quota_step_curve`], which materializes every coalition.
pub const CURVE_MAX_PLAYERS: usize = 24;

/// Half-sum tables larger than this are processed in parallel.
const PARALLEL_HALF: usize = 1 << 12;

/// Additive weight type usable by the counting kernels.
pub trait SubsetWeight: Copy + PartialOrd + Add<Output = Self> + Default + Send + Sync {}

impl SubsetWeight for f64 {}
impl SubsetWeight for u128 {}

/// A coalition as a bit mask over player indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coalition(pub u64);

impl Coalition {
    pub fn from_members(members: &[usize]) -> Self {
        Coalition(members.iter().fold(0u64, |m, &i| m | (1 << i)))
    }

    pub fn grand(n: usize) -> Self {
        Coalition(if n == 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    pub fn is_valid_for(&self, n: usize) -> bool {
        n >= 64 || self.0 >> n == 0
    }
}

/// Number of players in the low half.
#[inline]
pub fn low_half(n: usize) -> usize {
    n.div_ceil(2)
}

/// Subset sums of `weights`, indexed by mask, each accumulated in index order.
pub fn half_sums<W: SubsetWeight>(weights: &[W]) -> Vec<W> {
    let mut sums = vec![W::default(); 1 << weights.len()];
    for mask in 1..sums.len() {
        let top = usize::BITS - 1 - mask.leading_zeros();
        sums[mask] = sums[mask ^ (1 << top)] + weights[top as usize];
    }
    sums
}

fn sum_in_order<W: SubsetWeight>(weights: &[W], mask: u64) -> W {
    let mut acc = W::default();
    for (i, w) in weights.iter().enumerate() {
        if mask >> i & 1 == 1 {
            acc = acc + *w;
        }
    }
    acc
}

/// Canonical coalition weight (see the module documentation).
pub fn coalition_weight<W: SubsetWeight>(weights: &[W], c: Coalition) -> W {
    let h = low_half(weights.len());
    let (low, high) = weights.split_at(h);
    sum_in_order(low, c.0) + sum_in_order(high, c.0 >> h)
}

/// Winning-coalition counts: `winning` is `|W|`, `per_player[i]` the number
/// of winning coalitions containing player `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WinningCounts {
    pub winning: u64,
    pub per_player: Vec<u64>,
}

impl WinningCounts {
    pub fn players(&self) -> usize {
        self.per_player.len()
    }

    /// `2 w_i - w`, the number of coalitions in which player `i` is decisive.
    pub fn swings(&self) -> Vec<u64> {
        self.per_player
            .iter()
            .map(|&wi| 2 * wi - self.winning)
            .collect()
    }
}

/// Penrose-Banzhaf indices and Coleman index of one game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerProfile {
    /// Absolute indices `psi_i = (2 w_i - w) / 2^(n-1)`.
    pub psi: Vec<f64>,
    /// Normalized indices; all zero when no player is ever decisive.
    pub beta: Vec<f64>,
    /// `w / 2^n`.
    pub coleman: f64,
    pub winning: u64,
    pub per_player_winning: Vec<u64>,
}

impl From<WinningCounts> for PowerProfile {
    fn from(counts: WinningCounts) -> Self {
        let n = counts.players();
        let swings = counts.swings();
        let half = 2f64.powi(n as i32 - 1);
        let psi = swings.iter().map(|&s| s as f64 / half).collect();
        let total: u64 = swings.iter().sum();
        let beta = if total == 0 {
            vec![0.0; n]
        } else {
            swings.iter().map(|&s| s as f64 / total as f64).collect()
        };
        PowerProfile {
            psi,
            beta,
            coleman: counts.winning as f64 / (2.0 * half),
            winning: counts.winning,
            per_player_winning: counts.per_player,
        }
    }
}

/// Weighted voting game with real weights on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VotingGame {
    weights: WeightVector,
    quota: f64,
    #[serde(skip)]
    threshold: f64,
}

/// Checks `q` in (1/2, 1].
pub fn validate_quota(q: f64) -> Result<f64> {
    if q > 0.5 && q <= 1.0 {
        Ok(q)
    } else {
        Err(Error::InvalidQuota(q))
    }
}

impl VotingGame {
    pub fn new(weights: WeightVector, quota: f64) -> Result<Self> {
        validate_quota(quota)?;
        if weights.len() > 64 {
            return Err(Error::BudgetExceeded {
                n: weights.len(),
                limit: 64,
                hint: "",
            });
        }
        let total = coalition_weight(weights.as_slice(), Coalition::grand(weights.len()));
        Ok(VotingGame {
            threshold: quota * total,
            weights,
            quota,
        })
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn quota(&self) -> f64 {
        self.quota
    }

    /// Weight a coalition needs to win.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_quota(&self, quota: f64) -> Result<Self> {
        VotingGame::new(self.weights.clone(), quota)
    }
}

/// Integer weights with quota `numerator / denominator` of the total weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactGame {
    weights: Vec<u64>,
    numerator: u64,
    denominator: u64,
    #[serde(skip)]
    threshold: u128,
}

impl ExactGame {
    pub fn new(weights: Vec<u64>, numerator: u64, denominator: u64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if weights.len() > 64 {
            return Err(Error::BudgetExceeded {
                n: weights.len(),
                limit: 64,
                hint: "",
            });
        }
        if denominator == 0
            || numerator > denominator
            || 2 * u128::from(numerator) <= u128::from(denominator)
        {
            return Err(Error::InvalidQuota(numerator as f64 / denominator as f64));
        }
        let total: u128 = weights.iter().map(|&w| u128::from(w)).sum();
        if total == 0 {
            return Err(Error::InvalidWeights("all entries are zero".into()));
        }
        let scaled = total.checked_mul(u128::from(numerator)).ok_or_else(|| {
            Error::InvalidArguments("total weight times quota numerator overflows".into())
        })?;
        let threshold = scaled.div_ceil(u128::from(denominator));
        Ok(ExactGame {
            weights,
            numerator,
            denominator,
            threshold,
        })
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Quota as (numerator, denominator).
    pub fn quota(&self) -> (u64, u64) {
        (self.numerator, self.denominator)
    }

    /// Smallest integer weight that wins.
    pub fn threshold(&self) -> u128 {
        self.threshold
    }

    fn wide_weights(&self) -> Vec<u128> {
        self.weights.iter().map(|&w| u128::from(w)).collect()
    }

    /// The same game with weights rescaled onto the simplex. The quota is
    /// rounded to the nearest double, so ties may resolve differently.
    pub fn to_voting_game(&self) -> Result<VotingGame> {
        let raw: Vec<f64> = self.weights.iter().map(|&w| w as f64).collect();
        VotingGame::new(
            WeightVector::normalized(&raw)?,
            self.numerator as f64 / self.denominator as f64,
        )
    }
}

/// `true` iff the coalition's weight reaches the quota.
pub fn is_winning(g: &VotingGame, c: Coalition) -> bool {
    debug_assert!(c.is_valid_for(g.players()));
    coalition_weight(g.weights.as_slice(), c) >= g.threshold
}

pub fn is_winning_exact(g: &ExactGame, c: Coalition) -> bool {
    coalition_weight(&g.wide_weights(), c) >= g.threshold
}

fn budget(n: usize, limit: usize, hint: &'static str) -> Result<()> {
    if n > limit {
        Err(Error::BudgetExceeded { n, limit, hint })
    } else {
        Ok(())
    }
}

/// Adds `counts[mask]` to `per_player[offset + i]` for every bit `i` of `mask`.
fn marginalize(counts: &[u64], offset: usize, per_player: &mut [u64]) {
    for (mask, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            per_player[offset + i] += c;
            m &= m - 1;
        }
    }
}

fn assemble(n: usize, h: usize, low_counts: &[u64], high_counts: &[u64]) -> WinningCounts {
    let winning = low_counts.iter().sum();
    let mut per_player = vec![0; n];
    marginalize(low_counts, 0, &mut per_player);
    marginalize(high_counts, h, &mut per_player);
    debug_assert_eq!(winning, high_counts.iter().sum::<u64>());
    WinningCounts {
        winning,
        per_player,
    }
}

/// Counts by evaluating every one of the `2^n` coalitions.
pub fn count_winning_naive_with<W: SubsetWeight>(
    weights: &[W],
    threshold: W,
) -> Result<WinningCounts> {
    let n = weights.len();
    budget(n, NAIVE_MAX_PLAYERS, "; use the meet-in-the-middle kernel")?;
    let h = low_half(n);
    let low = half_sums(&weights[..h]);
    let high = half_sums(&weights[h..]);

    // For each low mask, the winning high masks; high-mask tallies are
    // accumulated per block of low masks and then added up. Integer sums
    // make the result independent of the block schedule.
    let block = (PARALLEL_HALF / high.len().max(1)).max(1);
    let (low_counts, high_counts) = low
        .par_chunks(block)
        .map(|chunk| {
            let mut lc = Vec::with_capacity(chunk.len());
            let mut hc = vec![0u64; high.len()];
            for &l in chunk {
                let mut c = 0;
                for (hm, &s) in high.iter().enumerate() {
                    if l + s >= threshold {
                        c += 1;
                        hc[hm] += 1;
                    }
                }
                lc.push(c);
            }
            (lc, hc)
        })
        .reduce(
            || (Vec::new(), vec![0u64; high.len()]),
            |(mut la, mut ha), (lb, hb)| {
                la.extend(lb);
                for (a, b) in ha.iter_mut().zip(hb) {
                    *a += b;
                }
                (la, ha)
            },
        );
    Ok(assemble(n, h, &low_counts, &high_counts))
}

/// Number of entries `x` of the ascending `sorted` with `base + x >= threshold`.
#[inline]
fn count_reaching<W: SubsetWeight>(sorted: &[W], base: W, threshold: W) -> u64 {
    (sorted.len() - sorted.partition_point(|&x| base + x < threshold)) as u64
}

fn sorted_copy<W: SubsetWeight>(v: &[W]) -> Vec<W> {
    let mut s = v.to_vec();
    s.sort_unstable_by(|a, b| a.partial_cmp(b).expect("weights are not NaN"));
    s
}

fn cross_counts<W: SubsetWeight>(outer: &[W], sorted_inner: &[W], threshold: W) -> Vec<u64> {
    if outer.len() >= PARALLEL_HALF {
        outer
            .par_iter()
            .map(|&o| count_reaching(sorted_inner, o, threshold))
            .collect()
    } else {
        outer
            .iter()
            .map(|&o| count_reaching(sorted_inner, o, threshold))
            .collect()
    }
}

/// Meet-in-the-middle counting: the high-half sums are sorted and each
/// low-half sum finds its winning partners by binary search, then the halves
/// swap roles to obtain the counts of high-half players.
pub fn count_winning_mitm_with<W: SubsetWeight>(
    weights: &[W],
    threshold: W,
) -> Result<WinningCounts> {
    let n = weights.len();
    budget(n, MITM_MAX_PLAYERS, "")?;
    let h = low_half(n);
    let low = half_sums(&weights[..h]);
    let high = half_sums(&weights[h..]);
    // Addition is commutative in IEEE arithmetic, so `l + s` and `s + l`
    // agree and both passes see the same coalition weights.
    let low_counts = cross_counts(&low, &sorted_copy(&high), threshold);
    let high_counts = cross_counts(&high, &sorted_copy(&low), threshold);
    Ok(assemble(n, h, &low_counts, &high_counts))
}

pub fn count_winning_naive(g: &VotingGame) -> Result<WinningCounts> {
    count_winning_naive_with(g.weights.as_slice(), g.threshold)
}

pub fn count_winning_mitm(g: &VotingGame) -> Result<WinningCounts> {
    count_winning_mitm_with(g.weights.as_slice(), g.threshold)
}

fn count_dispatch<W: SubsetWeight>(weights: &[W], threshold: W) -> Result<WinningCounts> {
    if weights.len() > NAIVE_DISPATCH_PLAYERS {
        count_winning_mitm_with(weights, threshold)
    } else {
        count_winning_naive_with(weights, threshold)
    }
}

/// Penrose-Banzhaf and Coleman indices.
pub fn banzhaf(g: &VotingGame) -> Result<PowerProfile> {
    Ok(count_dispatch(g.weights.as_slice(), g.threshold)?.into())
}

pub fn banzhaf_exact(g: &ExactGame) -> Result<PowerProfile> {
    Ok(count_dispatch(&g.wide_weights(), g.threshold)?.into())
}

/// Players that are never decisive.
pub fn dummies(g: &VotingGame) -> Result<Vec<usize>> {
    let counts = count_dispatch(g.weights.as_slice(), g.threshold)?;
    Ok(counts
        .swings()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == 0)
        .map(|(i, _)| i)
        .collect())
}

/// Hoeffding bound `exp(-2 (q - 1/2)^2 / sum w_i^2)` on the Coleman index.
pub fn hoeffding_bound_for(weights: &WeightVector, quota: f64) -> Result<f64> {
    if !(quota >= 0.5) {
        return Err(Error::InvalidArguments(format!(
            "Hoeffding bound needs q >= 1/2, got {quota}"
        )));
    }
    let d = quota - 0.5;
    Ok((-2.0 * d * d / weights.sum_of_squares()).exp())
}

pub fn hoeffding_bound(g: &VotingGame) -> f64 {
    hoeffding_bound_for(&g.weights, g.quota).expect("game quotas exceed 1/2")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuotaFormula {
    /// `(1 + (sum w^2)^-1) / 2`; never below 1.
    Printed,
    /// `(1 + (sum w^2)^(1/2)) / 2`.
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotaDiagnostic {
    pub formula: QuotaFormula,
    pub value: f64,
    /// Set when the value is not a quota in (1/2, 1].
    pub exceeds_one: bool,
}

/// Approximation of the quota that brings power indices closest to weights.
pub fn optimal_quota_diagnostic(w: &WeightVector, formula: QuotaFormula) -> QuotaDiagnostic {
    let s = w.sum_of_squares();
    let value = match formula {
        QuotaFormula::Printed => 0.5 * (1.0 + 1.0 / s),
        QuotaFormula::Sqrt => 0.5 * (1.0 + s.sqrt()),
    };
    QuotaDiagnostic {
        formula,
        value,
        exceeds_one: value > 1.0,
    }
}

/// Canonical weights of all `2^n` coalitions, sorted by decreasing weight.
#[derive(Debug, Clone)]
pub struct CoalitionSums {
    players: usize,
    total: f64,
    /// (weight, mask), weight descending; ties by increasing mask.
    sorted: Vec<(f64, u64)>,
}

impl CoalitionSums {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        budget(n, CURVE_MAX_PLAYERS, "")?;
        let h = low_half(n);
        let low = half_sums(&weights[..h]);
        let high = half_sums(&weights[h..]);
        let mut sorted = Vec::with_capacity(1 << n);
        for (hm, &s) in high.iter().enumerate() {
            for (lm, &l) in low.iter().enumerate() {
                sorted.push((l + s, (hm << h | lm) as u64));
            }
        }
        sorted.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let total = sorted[0].0;
        Ok(CoalitionSums {
            players: n,
            total,
            sorted,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Weight of the grand coalition.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Coalition weights in decreasing order.
    pub fn weights_descending(&self) -> impl Iterator<Item = f64> + '_ {
        self.sorted.iter().map(|p| p.0)
    }

    /// Counts for each threshold in `thresholds`, which must be
    /// non-increasing. One pass over the coalitions.
    pub fn sweep(&self, thresholds: &[f64]) -> Vec<WinningCounts> {
        debug_assert!(thresholds.windows(2).all(|p| p[0] >= p[1]));
        let mut out = Vec::with_capacity(thresholds.len());
        let mut winning = 0u64;
        let mut per_player = vec![0u64; self.players];
        let mut next = 0;
        for &t in thresholds {
            while next < self.sorted.len() && self.sorted[next].0 >= t {
                let mut m = self.sorted[next].1;
                while m != 0 {
                    per_player[m.trailing_zeros() as usize] += 1;
                    m &= m - 1;
                }
                winning += 1;
                next += 1;
            }
            out.push(WinningCounts {
                winning,
                per_player: per_player.clone(),
            });
        }
        out
    }
}

/// One constant piece of a fixed-weight quota curve: the winning family is
/// the same for every quota in `(lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPiece {
    pub lower: f64,
    pub upper: f64,
    /// Smallest winning coalition weight on this piece.
    pub threshold: f64,
    pub counts: WinningCounts,
}

/// Exact power as a step function of the quota for fixed weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotaStepCurve {
    pub total: f64,
    /// Ordered by increasing quota; the first piece starts at 1/2 and the
    /// last ends at 1.
    pub pieces: Vec<StepPiece>,
}

impl QuotaStepCurve {
    /// Piece governing quota `q`, located in coalition-weight space exactly
    /// as [`VotingGame`] does.
    pub fn piece_at(&self, q: f64) -> Result<&StepPiece> {
        validate_quota(q)?;
        let t = q * self.total;
        // Pieces have increasing thresholds; the governing one is the first
        // whose threshold reaches t.
        let idx = self.pieces.partition_point(|p| p.threshold < t);
        self.pieces.get(idx).ok_or(Error::InvalidQuota(q))
    }

    pub fn profile_at(&self, q: f64) -> Result<PowerProfile> {
        Ok(self.piece_at(q)?.counts.clone().into())
    }
}

/// Breakpoints of the power indices as the quota sweeps (1/2, 1]: they are
/// the distinct coalition weights above half the total.
pub fn quota_step_curve(w: &WeightVector) -> Result<QuotaStepCurve> {
    let sums = CoalitionSums::new(w.as_slice())?;
    let total = sums.total();
    let half = 0.5 * total;
    // Distinct weights above the half, descending.
    let mut levels: Vec<f64> = Vec::new();
    let mut below_half = None;
    for s in sums.weights_descending() {
        if levels
            .last()
            .is_some_and(|&l: &f64| l.to_bits() == s.to_bits())
        {
            continue;
        }
        if s > half {
            levels.push(s);
        } else {
            below_half = Some(s);
            break;
        }
    }
    let counts = sums.sweep(&levels);
    let mut pieces: Vec<StepPiece> = levels
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (&level, counts))| {
            let lower = match levels.get(i + 1) {
                Some(&next) => next / total,
                None => below_half.map_or(0.5, |b| (b / total).max(0.5)),
            };
            StepPiece {
                lower,
                upper: level / total,
                threshold: level,
                counts,
            }
        })
        .collect();
    pieces.reverse();
    if let Some(last) = pieces.last_mut() {
        last.upper = 1.0;
    }
    if let Some(first) = pieces.first_mut() {
        first.lower = first.lower.max(0.5);
    }
    Ok(QuotaStepCurve { total, pieces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Psi,
    Beta,
    Coleman,
}

impl Functional {
    /// Values of this functional for a profile: per player, or a single
    /// Coleman value.
    pub fn evaluate(&self, profile: &PowerProfile) -> Vec<f64> {
        match self {
            Functional::Psi => profile.psi.clone(),
            Functional::Beta => profile.beta.clone(),
            Functional::Coleman => vec![profile.coleman],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePiece {
    pub lower: f64,
    pub upper: f64,
    pub values: Vec<f64>,
}

/// A functional of the game as an exact step function of the quota.
pub fn fixed_weight_quota_curve(
    w: &WeightVector,
    functional: Functional,
) -> Result<Vec<CurvePiece>> {
    let curve = quota_step_curve(w)?;
    Ok(curve
        .pieces
        .into_iter()
        .map(|p| CurvePiece {
            lower: p.lower,
            upper: p.upper,
            values: functional.evaluate(&p.counts.into()),
        })
        .collect())
}
