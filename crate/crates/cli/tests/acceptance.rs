//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! Set `WVPOWER_ACCEPTANCE_FULL=1` to run the 10^8-sample five-player class
//! census; otherwise it runs with 2*10^7 samples.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `ensure!(x <= tol)` must fail on NaN

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use wvpower::analytic::{
    class_table_n3, coleman_error_ratio, expected_beta_n2, expected_beta_n3,
    expected_beta_n3_exact, expected_coleman, expected_coleman_normal, extrema_n3, phi_z,
    ColemanCurveSpec,
};
use wvpower::experiments::{
    discover_classes, fit_spline, is_monotone_family, mc_coleman_curve, mc_power_curve,
    BreakpointMode, PowerStatistic, CLASS_COUNT_CEILINGS,
};
use wvpower::games::{
    banzhaf, banzhaf_exact, count_winning_mitm, count_winning_naive, hoeffding_bound,
};
use wvpower::poly::RationalPolynomial;
use wvpower::quadrature::integrate_pieces;
use wvpower::simplex::{
    fill_uniform_simplex, order_descending, renyi_partial_sums, sample_uniform_simplex_with,
};
use wvpower::weightdist::{
    expected_ordered_weight_exact, ordered_weight_cdf, product_moment, product_moment_exact,
    sum_sq_stats_exact, MomentIndex, OrderedWeightDensity,
};
use wvpower::{ExactGame, RandomSeed, VotingGame, WeightVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("expected ordered weights", c1_expected_weights),
        ("order-statistic densities", c2_densities),
        ("sampler goodness of fit", c3_sampler),
        ("product moments", c4_moments),
        ("winning-coalition kernels", c5_kernels),
        ("two- and three-player curves", c6_small_curves),
        ("expected Coleman index", c7_coleman),
        ("normal approximation", c8_normal),
        ("spline recovery", c9_spline),
        ("game-class census", c10_classes),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn c1_expected_weights() -> Outcome {
    let expected: [(usize, Vec<f64>); 2] = [
        (3, vec![11.0 / 18.0, 5.0 / 18.0, 2.0 / 18.0]),
        (
            6,
            [147.0, 87.0, 57.0, 37.0, 22.0, 10.0]
                .iter()
                .map(|v| v / 360.0)
                .collect(),
        ),
    ];
    let exact = [
        (3, [(11, 18), (5, 18), (1, 9)].to_vec()),
        (
            6,
            [
                (49, 120),
                (29, 120),
                (19, 120),
                (37, 360),
                (11, 180),
                (1, 36),
            ]
            .to_vec(),
        ),
    ];
    let mut worst = 0.0f64;
    for (n, want) in &expected {
        let out = Command::new(env!("CARGO_BIN_EXE_wvpower"))
            .args(["expected-weights", "--n", &n.to_string()])
            .output()
            .map_err(err)?;
        ensure!(out.status.success(), "cli exited with {}", out.status);
        let text = String::from_utf8(out.stdout).map_err(err)?;
        let got: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap_or("").parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(err)?;
        ensure!(got.len() == *n, "n={n}: {} rows", got.len());
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure!(worst < 1e-12, "max deviation {worst:e}");
    for (n, fractions) in &exact {
        for (k, &(a, b)) in fractions.iter().enumerate() {
            let got = expected_ordered_weight_exact(*n, k + 1).map_err(err)?;
            let want = BigRational::new(a.into(), b.into());
            ensure!(got == want, "n={n} k={}: {got} != {want}", k + 1);
        }
    }
    Ok(format!("max deviation {worst:.1e}; exact fractions match"))
}

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

fn c2_densities() -> Outcome {
    let mut worst_mass = 0.0f64;
    let mut worst_mean = 0.0f64;
    for n in 2..=8 {
        for k in 1..=n {
            let d = OrderedWeightDensity::new(n, k).map_err(err)?;
            let (lo, hi) = d.support();
            let want = if k == 1 {
                (1.0 / n as f64, 1.0)
            } else {
                (0.0, 1.0 / k as f64)
            };
            ensure!((lo, hi) == want, "n={n} k={k}: support ({lo}, {hi})");
            for x in [lo - 1e-6, hi + 1e-6] {
                if (0.0..=1.0).contains(&x) {
                    let v = d.density(x).map_err(err)?;
                    ensure!(v == 0.0, "n={n} k={k}: density {v} outside support at {x}");
                }
            }
            let mut points = vec![lo];
            points.extend(d.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
            points.push(hi);
            let mass = integrate_pieces(|x| d.density(x).unwrap(), &points, 1e-12).map_err(err)?;
            let mean =
                integrate_pieces(|x| x * d.density(x).unwrap(), &points, 1e-12).map_err(err)?;
            let expected_mean = (harmonic(n) - harmonic(k - 1)) / n as f64;
            worst_mass = worst_mass.max((mass - 1.0).abs());
            worst_mean = worst_mean.max((mean - expected_mean).abs());
        }
    }
    ensure!(
        worst_mass <= 1e-8 && worst_mean <= 1e-8,
        "mass error {worst_mass:e}, mean error {worst_mean:e}"
    );
    Ok(format!(
        "n<=8: mass error {worst_mass:.1e}, mean error {worst_mean:.1e}"
    ))
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
fn ks_p_value(d: f64, samples: usize) -> f64 {
    let s = (samples as f64).sqrt();
    let lambda = (s + 0.12 + 0.11 / s) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        p += if j % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

fn ks_statistic(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

fn c3_sampler() -> Outcome {
    const DRAWS: usize = 100_000;
    const BINS: usize = 50;
    let chi = ChiSquared::new((BINS - 1) as f64).map_err(err)?;

    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ordered = (0..n)
        .map(|_| Vec::with_capacity(DRAWS))
        .collect::<Vec<Vec<f64>>>();
    let mut unordered_last = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        let w = sample_uniform_simplex_with(n, &mut rng).map_err(err)?;
        unordered_last.push(w.as_slice()[n - 1]);
        let o = order_descending(&w);
        for (k, v) in o.weights().iter().enumerate() {
            ordered[k].push(*v);
        }
    }
    let mut min_chi_p = 1.0f64;
    for (k, xs) in ordered.iter().enumerate() {
        let mut counts = [0u64; BINS];
        for &x in xs {
            let u = ordered_weight_cdf(n, k + 1, x).map_err(err)?;
            counts[((u * BINS as f64) as usize).min(BINS - 1)] += 1;
        }
        let e = DRAWS as f64 / BINS as f64;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        min_chi_p = min_chi_p.min(1.0 - chi.cdf(stat));
    }
    // Marginal of one unordered weight is Beta(1, n-1).
    let beta_p = ks_p_value(
        ks_statistic(&mut unordered_last, |x| 1.0 - (1.0 - x).powi(n as i32 - 1)),
        DRAWS,
    );

    let n = 5;
    let mut renyi = (0..n)
        .map(|_| Vec::with_capacity(DRAWS))
        .collect::<Vec<Vec<f64>>>();
    let mut w = vec![0.0; n];
    for _ in 0..DRAWS {
        fill_uniform_simplex(&mut rng, &mut w);
        let partial = renyi_partial_sums(&WeightVector::new(w.clone()).map_err(err)?);
        for (k, v) in partial.iter().enumerate() {
            renyi[k].push(*v);
        }
    }
    let mut min_ks_p = 1.0f64;
    for (k, xs) in renyi.iter_mut().enumerate() {
        let d = ks_statistic(xs, |x| ordered_weight_cdf(n, k + 1, x).unwrap());
        min_ks_p = min_ks_p.min(ks_p_value(d, DRAWS));
    }
    ensure!(min_chi_p > 0.01, "n=4 chi-square p = {min_chi_p:.4}");
    ensure!(beta_p > 0.01, "n=4 marginal KS p = {beta_p:.4}");
    ensure!(min_ks_p > 0.01, "n=5 Renyi KS p = {min_ks_p:.4}");
    Ok(format!(
        "min chi-square p {min_chi_p:.3} (n=4), marginal KS p {beta_p:.3}, min Renyi KS p {min_ks_p:.3} (n=5)"
    ))
}

fn c4_moments() -> Outcome {
    const DRAWS: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let n = rng.random_range(1..=6usize);
        let order = rng.random_range(1..=6u32);
        let mut m = vec![0u32; n];
        for _ in 0..order {
            m[rng.random_range(0..n)] += 1;
        }
        let index = MomentIndex(m.clone());
        let exact = product_moment_exact(n, &index).map_err(err)?;
        let value = product_moment(n, &index).map_err(err)?;
        ensure!(
            (value - exact.to_f64().unwrap()).abs() <= 1e-15 * value.abs().max(1e-300),
            "case {case}: float {value} vs exact {exact}"
        );
        let mut w = vec![0.0; n];
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..DRAWS {
            fill_uniform_simplex(&mut rng, &mut w);
            let p: f64 = w.iter().zip(&m).map(|(x, &e)| x.powi(e as i32)).product();
            s += p;
            s2 += p * p;
        }
        let mean = s / DRAWS as f64;
        let se = ((s2 / DRAWS as f64 - mean * mean).max(0.0) / (DRAWS - 1) as f64).sqrt();
        let z = (mean - value).abs() / se.max(f64::MIN_POSITIVE);
        ensure!(
            z <= 3.0,
            "case {case} m={m:?}: MC {mean} vs {value} ({z:.2} SE)"
        );
        worst = worst.max(z);
    }
    let (mean, var) = sum_sq_stats_exact(3).map_err(err)?;
    ensure!(
        mean == BigRational::new(1.into(), 2.into())
            && var == BigRational::new(1.into(), 60.into()),
        "n=3 sum of squares: mean {mean}, variance {var}"
    );
    Ok(format!(
        "20 vectors within {worst:.2} SE; sum of squares (1/2, 1/60) exact"
    ))
}

fn c5_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid: Vec<f64> = (101..=199).map(|i| i as f64 / 200.0).collect();
    let mut checked = 0u64;
    for game in 0..1000 {
        let n = rng.random_range(1..=16usize);
        let w = sample_uniform_simplex_with(n, &mut rng).map_err(err)?;
        for &q in &grid {
            let g = VotingGame::new(w.clone(), q).map_err(err)?;
            let naive = count_winning_naive(&g).map_err(err)?;
            let mitm = count_winning_mitm(&g).map_err(err)?;
            ensure!(
                naive == mitm,
                "game {game} (n={n}, q={q}): kernels disagree"
            );
            checked += 1;
        }
    }
    let exact = banzhaf_exact(&ExactGame::new(vec![5, 3, 2], 11, 20).map_err(err)?).map_err(err)?;
    let float = banzhaf(
        &VotingGame::new(WeightVector::new(vec![0.5, 0.3, 0.2]).map_err(err)?, 0.55)
            .map_err(err)?,
    )
    .map_err(err)?;
    let want = [0.6, 0.2, 0.2];
    ensure!(
        exact.beta == want && float.beta == want,
        "(0.5, 0.3, 0.2 | 0.55): beta {:?} / {:?}",
        exact.beta,
        float.beta
    );
    ensure!(exact.winning == 3, "winning count {}", exact.winning);
    Ok(format!(
        "{checked} game/quota pairs identical; beta = (3/5, 1/5, 1/5)"
    ))
}

fn c6_small_curves() -> Outcome {
    let quotas = [0.55, 0.6, 2.0 / 3.0, 0.75, 0.9, 1.0];
    let mut worst = 0.0f64;
    for n in [2, 3] {
        let curves = mc_power_curve(
            n,
            &quotas,
            1 << 16,
            RandomSeed::from(6),
            PowerStatistic::Beta,
        )
        .map_err(err)?;
        for (i, &q) in quotas.iter().enumerate() {
            let exact: Vec<f64> = if n == 2 {
                let (a, b) = expected_beta_n2(q).map_err(err)?;
                vec![a, b]
            } else {
                expected_beta_n3(q).map_err(err)?.to_vec()
            };
            for (k, curve) in curves.iter().enumerate() {
                let p = &curve.points[i];
                let tol = 0.01f64.max(3.0 * p.standard_error);
                let dev = (p.mean - exact[k]).abs();
                ensure!(
                    dev <= tol,
                    "n={n} k={} q={q}: MC {} vs {} (tolerance {tol})",
                    k + 1,
                    p.mean,
                    exact[k]
                );
                worst = worst.max(dev);
            }
        }
    }

    let curves = expected_beta_n3_exact();
    let pieces = curves[0].pieces.len();
    for piece in 0..pieces {
        let sum = curves.iter().fold(RationalPolynomial::zero(), |acc, c| {
            acc.add(&c.pieces[piece])
        });
        ensure!(
            sum == RationalPolynomial::new(vec![Rational64::one()]),
            "piece {piece}: branches sum to {sum:?}"
        );
    }
    let two_thirds = Rational64::new(2, 3);
    for (k, c) in curves.iter().enumerate() {
        let i = c
            .knots
            .iter()
            .position(|x| *x == two_thirds)
            .ok_or("2/3 is not a knot")?;
        let left = c.pieces[i - 1].eval(two_thirds);
        let right = c.pieces[i].eval(two_thirds);
        ensure!(
            left == right,
            "beta_{} jumps at 2/3: {left} vs {right}",
            k + 1
        );
    }

    let found: Vec<(usize, Rational64)> = extrema_n3().iter().map(|s| (s.rank, s.quota)).collect();
    let want = vec![
        (2, Rational64::new(34, 39)),
        (3, Rational64::new(5, 9)),
        (3, Rational64::new(13, 18)),
    ];
    ensure!(found == want, "extrema {found:?}");
    Ok(format!(
        "MC within {worst:.4}; branches sum to 1, continuous at 2/3; extrema 34/39, 5/9, 13/18"
    ))
}

fn c7_coleman() -> Outcome {
    let mut worst_phi = 0.0f64;
    for i in 0..=1000 {
        let t = i as f64 / 100.0;
        worst_phi = worst_phi.max((phi_z(1, t).map_err(err)? - (t / 2.0).cos()).abs());
    }
    ensure!(worst_phi <= 1e-10, "phi_Z(1, t) deviates by {worst_phi:e}");

    for n in 1..=30 {
        let v = expected_coleman(n, 1.0, &ColemanCurveSpec::inversion(n)).map_err(err)?;
        ensure!(v == 0.5f64.powi(n as i32), "n={n}: E(C)(1) = {v}");
    }

    let grid: Vec<f64> = (26..=50).map(|i| i as f64 / 50.0).collect();
    let mut worst_z = 0.0f64;
    for n in [3, 6, 9, 12] {
        let spec = ColemanCurveSpec::inversion(n);
        let mc = mc_coleman_curve(n, &grid, 1 << 16, RandomSeed::from(7)).map_err(err)?;
        for (q, p) in grid.iter().zip(&mc.points) {
            let v = expected_coleman(n, *q, &spec).map_err(err)?;
            let dev = (v - p.mean).abs();
            ensure!(
                dev <= 1e-3 + 3.0 * p.standard_error,
                "n={n} q={q}: inversion {v} vs MC {} (SE {})",
                p.mean,
                p.standard_error
            );
            if p.standard_error > 0.0 {
                worst_z = worst_z.max(dev / p.standard_error);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for game in 0..1000 {
        let n = rng.random_range(1..=16usize);
        let w = sample_uniform_simplex_with(n, &mut rng).map_err(err)?;
        let q = 1.0 - rng.random_range(0.0..0.5);
        let g = VotingGame::new(w, q).map_err(err)?;
        let c = banzhaf(&g).map_err(err)?.coleman;
        let bound = hoeffding_bound(&g);
        ensure!(
            bound >= c,
            "game {game} (n={n}, q={q}): bound {bound} < C {c}"
        );
    }
    Ok(format!(
        "phi_Z(1) error {worst_phi:.1e}; E(C)(1) = 2^-n; inversion vs MC within {worst_z:.2} SE; bound holds on 1000 games"
    ))
}

fn c8_normal() -> Outcome {
    for n in 1..=64 {
        let v = expected_coleman_normal(n, 0.5).map_err(err)?;
        ensure!(v == 0.5, "n={n}: C1(1/2) = {v}");
    }
    let spec = ColemanCurveSpec::inversion(6);
    let mut ratios = Vec::new();
    for y in [0.05, 0.1, 0.25] {
        let r = coleman_error_ratio(6, y, &spec).map_err(err)?;
        let back = expected_coleman(6, r.exact_quota, &spec).map_err(err)?;
        ensure!((back - y).abs() <= 1e-6, "y={y}: E(C)(q_exact) = {back}");
        let normal = expected_coleman_normal(6, r.normal_quota).map_err(err)?;
        ensure!((normal - y).abs() <= 1e-6, "y={y}: C1(q_normal) = {normal}");
        ratios.push(format!("{:.4}", r.ratio));
    }
    Ok(format!(
        "C1(1/2) = 1/2; n=6 ratios {} at y = 0.05, 0.1, 0.25",
        ratios.join(", ")
    ))
}

fn c9_spline() -> Outcome {
    let grid: Vec<f64> = (1..=200).map(|i| 0.5 + 0.5 * i as f64 / 200.0).collect();
    let step = 0.5 / 200.0;
    let mode = || BreakpointMode::Auto { penalty: None };

    for k in 0..2 {
        let samples: Vec<(f64, f64)> = grid
            .iter()
            .map(|&q| {
                let (a, b) = expected_beta_n2(q).unwrap();
                (q, if k == 0 { a } else { b })
            })
            .collect();
        let fit = fit_spline(&samples, 3, mode()).map_err(err)?;
        ensure!(
            fit.breakpoints.is_empty() && fit.pieces.len() == 1 && fit.pieces[0].degree == 1,
            "n=2 beta_{}: {} breakpoints, degrees {:?}",
            k + 1,
            fit.breakpoints.len(),
            fit.pieces.iter().map(|p| p.degree).collect::<Vec<_>>()
        );
        ensure!(
            fit.max_residual < 1e-12,
            "n=2 residual {:e}",
            fit.max_residual
        );
    }

    let mut worst = 0.0f64;
    for k in 0..3 {
        let samples: Vec<(f64, f64)> = grid
            .iter()
            .map(|&q| (q, expected_beta_n3(q).unwrap()[k]))
            .collect();
        let fit = fit_spline(&samples, 3, mode()).map_err(err)?;
        let degrees: Vec<usize> = fit.pieces.iter().map(|p| p.degree).collect();
        ensure!(
            fit.breakpoints.len() == 1 && degrees == [2, 2],
            "n=3 beta_{}: breakpoints {:?}, degrees {degrees:?}",
            k + 1,
            fit.breakpoints
        );
        ensure!(
            (fit.breakpoints[0] - 2.0 / 3.0).abs() <= step,
            "n=3 beta_{}: breakpoint {}",
            k + 1,
            fit.breakpoints[0]
        );
        ensure!(
            fit.max_residual < 1e-10,
            "n=3 residual {:e}",
            fit.max_residual
        );
        worst = worst.max(fit.max_residual);
    }
    Ok(format!(
        "n=2 linear without breakpoints; n=3 two quadratics split near 2/3, residual {worst:.1e}"
    ))
}

fn c10_classes() -> Outcome {
    let full = std::env::var_os("WVPOWER_ACCEPTANCE_FULL").is_some();
    let five_samples: u64 = if full { 100_000_000 } else { 20_000_000 };
    let runs: [(usize, u64); 6] = [
        (2, 100_000),
        (3, 1_000_000),
        (4, 1_000_000),
        (5, five_samples),
        (6, 1_000_000),
        (7, 1_000_000),
    ];
    let mut summary = Vec::new();
    let mut over = Vec::new();
    for (n, samples) in runs {
        let catalog = discover_classes(n, samples, RandomSeed::from(10)).map_err(err)?;
        for c in &catalog.classes {
            ensure!(
                is_monotone_family(n, c.family),
                "n={n}: non-monotone family"
            );
            let s: f64 = c.beta.iter().sum();
            ensure!((s - 1.0).abs() < 1e-12, "n={n}: beta sums to {s}");
        }
        let ceiling = CLASS_COUNT_CEILINGS[n - 2];
        if n <= 5 {
            ensure!(
                catalog.len() == ceiling,
                "n={n}: {} classes from {samples} samples, expected {ceiling}",
                catalog.len()
            );
        } else if catalog.len() > ceiling {
            over.push(format!("n={n}: {} classes exceed {ceiling}", catalog.len()));
        }
        summary.push(format!("n={n}: {}", catalog.len()));
        if n == 3 {
            let mut found: Vec<Vec<f64>> = catalog.classes.iter().map(|c| c.beta.clone()).collect();
            let mut table: Vec<Vec<f64>> = class_table_n3()
                .classes
                .iter()
                .map(|c| c.beta.iter().map(|b| b.to_f64().unwrap()).collect())
                .collect();
            let cmp = |a: &Vec<f64>, b: &Vec<f64>| a.partial_cmp(b).unwrap();
            found.sort_by(cmp);
            table.sort_by(cmp);
            let same = found.len() == table.len()
                && found
                    .iter()
                    .zip(&table)
                    .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15));
            ensure!(same, "n=3 beta vectors {found:?} differ from {table:?}");
        }
    }
    if !full {
        summary.push(format!("(n=5 with {five_samples} samples)"));
    }
    ensure!(
        over.is_empty(),
        "{}; counts {}",
        over.join(", "),
        summary.join(", ")
    );
    Ok(summary.join(", "))
}
