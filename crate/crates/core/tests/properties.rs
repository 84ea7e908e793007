use proptest::prelude::*;
use rand::SeedableRng;

use wvpower::experiments::{mc_coleman_curve, mc_power_curve, PowerStatistic};
use wvpower::games::{
    banzhaf, count_winning_mitm, count_winning_naive, hoeffding_bound, quota_step_curve,
};
use wvpower::simplex::{order_descending, sample_uniform_simplex_with};
use wvpower::weightdist::{ordered_weight_cdf, ordered_weight_density};
use wvpower::{RandomSeed, VotingGame, WeightVector};

fn weights(max_players: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.0f64..1.0, 1..=max_players)
        .prop_filter_map("zero total", |raw| WeightVector::normalized(&raw).ok())
}

fn quota() -> impl Strategy<Value = f64> {
    (0.5f64..=1.0).prop_filter("quota must exceed 1/2", |q| *q > 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernels_agree(w in weights(14), q in quota()) {
        let g = VotingGame::new(w, q).unwrap();
        prop_assert_eq!(count_winning_naive(&g).unwrap(), count_winning_mitm(&g).unwrap());
    }

    #[test]
    fn profile_is_well_formed(w in weights(10), q in quota()) {
        let g = VotingGame::new(w, q).unwrap();
        let p = banzhaf(&g).unwrap();
        prop_assert!((0.0..=1.0).contains(&p.coleman));
        prop_assert!(p.psi.iter().all(|x| (0.0..=1.0).contains(x)));
        let total: f64 = p.beta.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12 || p.beta.iter().all(|b| *b == 0.0));
        prop_assert!(hoeffding_bound(&g) >= p.coleman);
        // the grand coalition always wins
        prop_assert!(p.winning >= 1);
    }

    #[test]
    fn coleman_decreases_with_quota(w in weights(10), a in quota(), b in quota()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c_lo = banzhaf(&VotingGame::new(w.clone(), lo).unwrap()).unwrap().coleman;
        let c_hi = banzhaf(&VotingGame::new(w, hi).unwrap()).unwrap().coleman;
        prop_assert!(c_lo >= c_hi);
    }

    #[test]
    fn step_curve_matches_direct_evaluation(w in weights(9), q in quota()) {
        let curve = quota_step_curve(&w).unwrap();
        let direct = banzhaf(&VotingGame::new(w, q).unwrap()).unwrap();
        prop_assert_eq!(curve.profile_at(q).unwrap(), direct);
    }

    #[test]
    fn sampled_weights_are_on_the_simplex(n in 1usize..40, seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w = sample_uniform_simplex_with(n, &mut rng).unwrap();
        prop_assert_eq!(w.len(), n);
        prop_assert!(w.as_slice().iter().all(|x| *x >= 0.0));
        prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let o = order_descending(&w);
        prop_assert!(o.weights().windows(2).all(|p| p[0] >= p[1]));
        let restored = o.unorder();
        prop_assert_eq!(restored.as_slice(), w.as_slice());
    }

    #[test]
    fn cdf_is_a_distribution_function(n in 2usize..9, k_frac in 0.0f64..1.0, x in 0.0f64..=1.0) {
        let k = 1 + ((n as f64 * k_frac) as usize).min(n - 1);
        let f = ordered_weight_cdf(n, k, x).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!(ordered_weight_density(n, k, x).unwrap() >= -1e-9);
        let later = ordered_weight_cdf(n, k, (x + 0.01).min(1.0)).unwrap();
        prop_assert!(later >= f - 1e-12);
    }
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let quotas: Vec<f64> = (26..=50).map(|i| i as f64 / 50.0).collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                mc_power_curve(5, &quotas, 5000, RandomSeed::from(9), PowerStatistic::Psi).unwrap(),
                mc_coleman_curve(8, &quotas, 5000, RandomSeed::from(9)).unwrap(),
            )
        })
    };
    let (p1, c1) = run(1);
    for threads in [2, 4, 7] {
        let (p, c) = run(threads);
        assert_eq!(p, p1);
        assert_eq!(c, c1);
    }
}
