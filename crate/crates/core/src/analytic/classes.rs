//! Game classes for two and three players and the expected ordered power
//! indices they induce.
//!
//! Players are indexed by decreasing weight. For three players the quota
//! splits into `q <= 2/3` and `q >= 2/3`; on each side the probability of
//! every class is a quadratic in `q`, and `E(beta_k)` is the
//! probability-weighted mix of the class vectors.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::Result;
use crate::games::{validate_quota, Coalition};
use crate::poly::{Extremum, PiecewiseRational, RationalPolynomial};

fn r(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

/// One class of games, identified by its winning family over ordered players.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameClass {
    pub label: char,
    /// Minimal description: every winning coalition, as masks over ordered
    /// players (bit 0 is the largest player).
    pub winning: Vec<Coalition>,
    #[serde(serialize_with = "serialize_rationals")]
    pub beta: Vec<Rational64>,
    /// Probability of the class as a function of the quota.
    pub probability: PiecewiseRational,
}

fn serialize_rationals<S: serde::Serializer>(
    v: &[Rational64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

/// Catalog of the game classes of `players` players with quota-dependent
/// probabilities under uniformly random weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassTable {
    pub players: usize,
    pub classes: Vec<GameClass>,
}

impl ClassTable {
    /// Knots shared by every class probability.
    pub fn knots(&self) -> &[Rational64] {
        &self.classes[0].probability.knots
    }

    /// `sum_chi beta_k^chi P(chi)` for each rank `k`, in exact arithmetic.
    pub fn expected_beta(&self) -> Vec<PiecewiseRational> {
        let knots = self.knots().to_vec();
        (0..self.players)
            .map(|k| {
                let pieces = (0..knots.len() - 1)
                    .map(|piece| {
                        self.classes
                            .iter()
                            .fold(RationalPolynomial::zero(), |acc, class| {
                                acc.add(&class.probability.pieces[piece].scale(class.beta[k]))
                            })
                    })
                    .collect();
                PiecewiseRational::new(knots.clone(), pieces)
            })
            .collect()
    }

    /// Class probabilities at quota `q`.
    pub fn probabilities_at(&self, q: f64) -> Result<Vec<f64>> {
        validate_quota(q)?;
        Ok(self
            .classes
            .iter()
            .map(|c| c.probability.eval_f64(q))
            .collect())
    }
}

fn family(coalitions: &[&[usize]]) -> Vec<Coalition> {
    coalitions
        .iter()
        .map(|m| Coalition::from_members(m))
        .collect()
}

/// Two players: unanimity with probability `2q - 1`, dictatorship with
/// probability `2 - 2q`.
pub fn class_table_n2() -> ClassTable {
    let knots = vec![r(1, 2), r(1, 1)];
    let class = |label, winning, beta: Vec<Rational64>, p: &[i64]| GameClass {
        label,
        winning,
        beta,
        probability: PiecewiseRational::new(
            knots.clone(),
            vec![RationalPolynomial::from_ints(p, 1)],
        ),
    };
    ClassTable {
        players: 2,
        classes: vec![
            class('A', family(&[&[0, 1]]), vec![r(1, 2), r(1, 2)], &[-1, 2]),
            class(
                'B',
                family(&[&[0], &[0, 1]]),
                vec![r(1, 1), r(0, 1)],
                &[2, -2],
            ),
        ],
    }
}

/// Three players: the five classes with their probabilities on
/// `(1/2, 2/3]` and `[2/3, 1]`.
pub fn class_table_n3() -> ClassTable {
    let knots = vec![r(1, 2), r(2, 3), r(1, 1)];
    let third = vec![r(1, 3); 3];
    // Coefficients in increasing powers of q.
    let class = |label, winning, beta: Vec<Rational64>, left: &[i64], right: &[i64]| GameClass {
        label,
        winning,
        beta,
        probability: PiecewiseRational::new(
            knots.clone(),
            vec![
                RationalPolynomial::from_ints(left, 1),
                RationalPolynomial::from_ints(right, 1),
            ],
        ),
    };
    ClassTable {
        players: 3,
        classes: vec![
            // Unanimity: q exceeds the two largest weights together.
            class(
                'A',
                family(&[&[0, 1, 2]]),
                third.clone(),
                &[0],
                &[4, -12, 9],
            ),
            class(
                'B',
                family(&[&[0, 1], &[0, 1, 2]]),
                vec![r(1, 2), r(1, 2), r(0, 1)],
                &[3, -12, 12],
                &[-9, 24, -15],
            ),
            class(
                'C',
                family(&[&[0, 1], &[0, 2], &[0, 1, 2]]),
                vec![r(3, 5), r(1, 5), r(1, 5)],
                &[-9, 30, -24],
                &[3, -6, 3],
            ),
            // Any two players win.
            class(
                'D',
                family(&[&[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]]),
                third,
                &[4, -12, 9],
                &[0],
            ),
            // The largest player alone wins.
            class(
                'E',
                family(&[&[0], &[0, 1], &[0, 2], &[0, 1, 2]]),
                vec![r(1, 1), r(0, 1), r(0, 1)],
                &[3, -6, 3],
                &[3, -6, 3],
            ),
        ],
    }
}

/// `(E(beta_1), E(beta_2)) = (3/2 - q, q - 1/2)`.
pub fn expected_beta_n2(q: f64) -> Result<(f64, f64)> {
    validate_quota(q)?;
    let e = class_table_n2().expected_beta();
    Ok((e[0].eval_f64(q), e[1].eval_f64(q)))
}

/// `E(beta_k)`, `k = 1, 2, 3`, as exact piecewise quadratics derived from
/// the class table.
pub fn expected_beta_n3_exact() -> Vec<PiecewiseRational> {
    class_table_n3().expected_beta()
}

pub fn expected_beta_n3(q: f64) -> Result<[f64; 3]> {
    validate_quota(q)?;
    let e = expected_beta_n3_exact();
    Ok([e[0].eval_f64(q), e[1].eval_f64(q), e[2].eval_f64(q)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StationaryPoint {
    /// 1-based rank.
    pub rank: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub quota: Rational64,
    pub nature: Extremum,
}

fn serialize_rational<S: serde::Serializer>(
    v: &Rational64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl StationaryPoint {
    pub fn quota_f64(&self) -> f64 {
        self.quota.to_f64().expect("finite")
    }
}

/// Local extrema of `E(beta_k)` over (1/2, 1): one for the second player
/// (a maximum at 34/39) and two for the third (a local maximum at 5/9 and a
/// local minimum at 13/18, as given by the sign of the second derivative).
pub fn extrema_n3() -> Vec<StationaryPoint> {
    expected_beta_n3_exact()
        .iter()
        .enumerate()
        .flat_map(|(k, curve)| {
            curve
                .stationary_points()
                .into_iter()
                .map(move |(quota, nature)| StationaryPoint {
                    rank: k + 1,
                    quota,
                    nature,
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weightdist::ordered_weight_cdf;
    use num_traits::{One, Zero};

    #[test]
    fn n2_closed_form() {
        assert_eq!(expected_beta_n2(0.75), Ok((0.75, 0.25)));
        let (a, b) = expected_beta_n2(1.0).unwrap();
        assert_eq!((a, b), (0.5, 0.5));
        let (a, b) = expected_beta_n2(0.5 + 1e-12).unwrap();
        assert!((a - 1.0).abs() < 1e-11 && b.abs() < 1e-11);
        assert!(expected_beta_n2(0.5).is_err());
        for q in [0.55, 0.6, 0.8, 0.99] {
            let (a, b) = expected_beta_n2(q).unwrap();
            assert!((a - (1.5 - q)).abs() < 1e-15);
            assert!((a + b - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn n2_table_agrees_with_max_weight_law() {
        let t = class_table_n2();
        for q in [0.51, 0.6, 0.75, 0.9, 1.0] {
            let p = t.probabilities_at(q).unwrap();
            let f = ordered_weight_cdf(2, 1, q).unwrap();
            assert!((p[0] - f).abs() < 1e-14);
            assert!((p[1] - (1.0 - f)).abs() < 1e-14);
        }
    }

    #[test]
    fn class_probability_examples() {
        let t = class_table_n3();
        let e = t.probabilities_at(0.51).unwrap()[4];
        assert!((e - 0.7203).abs() < 1e-12);
        let d = &t.classes[3].probability;
        assert_eq!(d.eval(r(1, 2)), r(1, 4));
    }

    #[test]
    fn class_probabilities_partition_the_simplex() {
        let t = class_table_n3();
        for piece in 0..2 {
            let sum = t.classes.iter().fold(RationalPolynomial::zero(), |acc, c| {
                acc.add(&c.probability.pieces[piece])
            });
            assert_eq!(sum, RationalPolynomial::from_ints(&[1], 1));
        }
        for c in &t.classes {
            let p = &c.probability;
            assert_eq!(p.pieces[0].eval(r(2, 3)), p.pieces[1].eval(r(2, 3)));
            for i in 1..=1000 {
                let q = 0.5 + 0.5 * i as f64 / 1000.0;
                assert!(p.eval_f64(q) >= -1e-15, "class {} at {q}", c.label);
            }
        }
    }

    /// The table rows written through the order-statistic distribution
    /// functions `F_1, F_2, F_3` of three players.
    #[test]
    fn class_probabilities_match_order_statistics() {
        let f = |k: usize, x: f64| ordered_weight_cdf(3, k, x).unwrap();
        let t = class_table_n3();
        for i in 1..=200 {
            let q = 0.5 + 0.5 * i as f64 / 200.0;
            let p = t.probabilities_at(q).unwrap();
            let want = [
                1.0 - f(3, 1.0 - q),
                f(3, 1.0 - q) - f(2, 1.0 - q),
                (1.0 - f(1, 1.0 - q)) * f(1, q) - f(1, 1.0 - q) * (1.0 - f(1, q)) - 1.0
                    + f(2, 1.0 - q),
                f(1, 1.0 - q),
                1.0 - f(1, q),
            ];
            for (a, b) in p.iter().zip(want) {
                assert!((a - b).abs() < 1e-13, "q = {q}: {p:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn class_vectors_follow_from_winning_families() {
        for t in [class_table_n2(), class_table_n3()] {
            for c in &t.classes {
                let n = t.players;
                let swings: Vec<i64> = (0..n)
                    .map(|i| {
                        (0u64..1 << n)
                            .filter(|m| m >> i & 1 == 0)
                            .filter(|&m| {
                                !c.winning.contains(&Coalition(m))
                                    && c.winning.contains(&Coalition(m | 1 << i))
                            })
                            .count() as i64
                    })
                    .collect();
                let total: i64 = swings.iter().sum();
                let beta: Vec<Rational64> = swings.iter().map(|&s| r(s, total)).collect();
                assert_eq!(beta, c.beta, "class {}", c.label);
            }
        }
    }

    #[test]
    fn derived_curves_are_consistent() {
        let e = expected_beta_n3_exact();
        for piece in 0..2 {
            let sum = e.iter().fold(RationalPolynomial::zero(), |acc, c| {
                acc.add(&c.pieces[piece])
            });
            assert_eq!(sum, RationalPolynomial::from_ints(&[1], 1));
        }
        for c in &e {
            assert_eq!(c.pieces[0].eval(r(2, 3)), c.pieces[1].eval(r(2, 3)));
        }
        // Left branches of the second and third player in closed form.
        assert_eq!(
            e[1].pieces[0],
            RationalPolynomial::new(vec![r(31, 30), r(-4, 1), r(21, 5)])
        );
        assert_eq!(
            e[2].pieces[0],
            RationalPolynomial::new(vec![r(-7, 15), r(2, 1), r(-9, 5)])
        );
        assert_eq!(
            e[0].pieces[0],
            RationalPolynomial::new(vec![r(13, 30), r(2, 1), r(-12, 5)])
        );
        assert_eq!(
            e[0].pieces[1],
            RationalPolynomial::new(vec![r(49, 30), r(-8, 5), r(3, 10)])
        );
        assert_eq!(
            e[1].pieces[1],
            RationalPolynomial::new(vec![r(-77, 30), r(34, 5), r(-39, 10)])
        );
        assert_eq!(
            e[2].pieces[1],
            RationalPolynomial::new(vec![r(29, 15), r(-26, 5), r(18, 5)])
        );

        let at = |q: Rational64| -> Vec<Rational64> { e.iter().map(|c| c.eval(q)).collect() };
        assert_eq!(at(r(1, 2)), vec![r(5, 6), r(1, 12), r(1, 12)]);
        assert_eq!(at(r(1, 1)), vec![r(1, 3), r(1, 3), r(1, 3)]);
        assert_eq!(at(r(2, 3)), vec![r(7, 10), r(7, 30), r(1, 15)]);
        let v = at(r(3, 5));
        assert_eq!(v, vec![r(577, 750), r(109, 750), r(64, 750)]);
        assert!(v.iter().fold(Rational64::zero(), |a, b| a + b).is_one());
    }

    #[test]
    fn expected_beta_values() {
        let v = expected_beta_n3(0.6).unwrap();
        let want = [
            0.769_333_333_333_333_3,
            0.145_333_333_333_333_3,
            0.085_333_333_333_333_3,
        ];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let v = expected_beta_n3(1.0).unwrap();
        assert!(v.iter().all(|b| (b - 1.0 / 3.0).abs() < 1e-15));
        assert!(expected_beta_n3(0.4).is_err());
    }

    #[test]
    fn extrema_locations() {
        let ext = extrema_n3();
        assert_eq!(
            ext,
            vec![
                StationaryPoint {
                    rank: 2,
                    quota: r(34, 39),
                    nature: Extremum::Maximum
                },
                StationaryPoint {
                    rank: 3,
                    quota: r(5, 9),
                    nature: Extremum::Maximum
                },
                StationaryPoint {
                    rank: 3,
                    quota: r(13, 18),
                    nature: Extremum::Minimum
                },
            ]
        );
        assert!((ext[0].quota_f64() - 0.871_794_871_794_871_8).abs() < 1e-15);
    }
}
