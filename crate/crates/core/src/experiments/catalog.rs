//! Enumeration of the distinct games reached by random weights and quotas.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::montecarlo::{uniform_open_quota, CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::games::{half_sums, low_half, Coalition, PowerProfile, WinningCounts};
use crate::rng::RandomSeed;
use crate::simplex::{fill_uniform_simplex, sort_descending};

/// Published numbers of distinct games for `n = 2..=7` players. Sampling
/// reproduces them exactly up to six players; for seven it finds more.
pub const CLASS_COUNT_CEILINGS: [usize; 6] = [2, 5, 14, 62, 566, 11971];

const MAX_CATALOG_PLAYERS: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscoveredClass {
    pub id: usize,
    /// Bit `m` is set when coalition `m` (over players ordered by
    /// decreasing weight) wins.
    pub family: u128,
    pub beta: Vec<f64>,
    pub hits: u64,
}

impl DiscoveredClass {
    pub fn winning_coalitions(&self) -> Vec<Coalition> {
        (0..128u64)
            .filter(|&m| self.family >> m & 1 == 1)
            .map(Coalition)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameClassCatalog {
    pub players: usize,
    pub samples: u64,
    pub seed: RandomSeed,
    /// Sorted by family bitset.
    pub classes: Vec<DiscoveredClass>,
}

impl GameClassCatalog {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// The published number of distinct games, when tabulated.
    pub fn ceiling(&self) -> Option<usize> {
        CLASS_COUNT_CEILINGS
            .get(self.players.wrapping_sub(2))
            .copied()
    }
}

/// Supersets of winning coalitions win.
pub fn is_monotone_family(n: usize, family: u128) -> bool {
    let full = 1u64 << n;
    (0..full).all(|m| family >> m & 1 == 0 || (0..n).all(|i| family >> (m | 1 << i) & 1 == 1))
}

fn family_of(w: &[f64], quota: f64) -> u128 {
    let h = low_half(w.len());
    let low = half_sums(&w[..h]);
    let high = half_sums(&w[h..]);
    let total = low[low.len() - 1] + high[high.len() - 1];
    let threshold = quota * total;
    let mut family = 0u128;
    for (hm, &s) in high.iter().enumerate() {
        for (lm, &l) in low.iter().enumerate() {
            if l + s >= threshold {
                family |= 1 << (hm << h | lm);
            }
        }
    }
    family
}

fn profile_of(n: usize, family: u128) -> PowerProfile {
    let mut counts = WinningCounts {
        winning: 0,
        per_player: vec![0; n],
    };
    for m in 0..1u64 << n {
        if family >> m & 1 == 1 {
            counts.winning += 1;
            for i in 0..n {
                counts.per_player[i] += m >> i & 1;
            }
        }
    }
    PowerProfile::from(counts)
}

/// Samples `samples` pairs of ordered uniform weights and uniform quotas in
/// (1/2, 1) and records the distinct winning families found.
pub fn discover_classes(n: usize, samples: u64, seed: RandomSeed) -> Result<GameClassCatalog> {
    if !(2..=MAX_CATALOG_PLAYERS).contains(&n) {
        return Err(Error::InvalidArguments(format!(
            "class discovery supports 2 to {MAX_CATALOG_PLAYERS} players, got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArguments("need at least one sample".into()));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.substream_rng(c);
            let mut w = vec![0.0; n];
            let mut seen: HashMap<u128, u64> = HashMap::new();
            for _ in 0..CHUNK_SIZE.min(samples - c * CHUNK_SIZE) {
                fill_uniform_simplex(&mut rng, &mut w);
                sort_descending(&mut w);
                let q = uniform_open_quota(&mut rng);
                *seen.entry(family_of(&w, q)).or_default() += 1;
            }
            seen
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });

    let mut families: Vec<(u128, u64)> = hits.into_iter().collect();
    families.sort_unstable();
    let classes = families
        .into_iter()
        .enumerate()
        .map(|(id, (family, hits))| {
            debug_assert!(is_monotone_family(n, family));
            DiscoveredClass {
                id,
                family,
                beta: profile_of(n, family).beta,
                hits,
            }
        })
        .collect();
    Ok(GameClassCatalog {
        players: n,
        samples,
        seed,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_and_three_players() {
        let c = discover_classes(2, 20_000, RandomSeed::new(1)).unwrap();
        assert_eq!(c.len(), 2);
        // unanimity and dictator of the heavier player
        assert_eq!(c.classes[0].family, 0b1000);
        assert_eq!(c.classes[0].beta, vec![0.5, 0.5]);
        assert_eq!(c.classes[1].family, 0b1010);
        assert_eq!(c.classes[1].beta, vec![1.0, 0.0]);
        assert_eq!(c.classes.iter().map(|k| k.hits).sum::<u64>(), 20_000);

        let c = discover_classes(3, 50_000, RandomSeed::new(2)).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.ceiling(), Some(5));
        let mut betas: Vec<Vec<f64>> = c.classes.iter().map(|k| k.beta.clone()).collect();
        betas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            betas,
            vec![
                vec![1.0 / 3.0; 3],
                vec![1.0 / 3.0; 3],
                vec![0.5, 0.5, 0.0],
                vec![0.6, 0.2, 0.2],
                vec![1.0, 0.0, 0.0],
            ]
        );
    }

    #[test]
    fn families_are_monotone_and_contain_the_grand_coalition() {
        for n in 2..=5 {
            let c = discover_classes(n, 20_000, RandomSeed::new(n as u64)).unwrap();
            assert!(c.len() <= c.ceiling().unwrap());
            for k in &c.classes {
                assert!(is_monotone_family(n, k.family));
                assert_eq!(k.family >> ((1 << n) - 1) & 1, 1);
                assert_eq!(k.family & 1, 0);
                let s: f64 = k.beta.iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monotonicity_check() {
        assert!(is_monotone_family(2, 0b1000));
        assert!(!is_monotone_family(2, 0b0010));
    }

    #[test]
    fn deterministic() {
        let a = discover_classes(4, 5000, RandomSeed::new(9)).unwrap();
        let b = discover_classes(4, 5000, RandomSeed::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(discover_classes(1, 10, RandomSeed::new(0)).is_err());
        assert!(discover_classes(8, 10, RandomSeed::new(0)).is_err());
        assert!(discover_classes(3, 0, RandomSeed::new(0)).is_err());
    }
}
