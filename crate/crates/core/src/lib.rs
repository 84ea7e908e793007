//! Voting power in weighted voting games whose weights are fixed or drawn
//! uniformly from the probability simplex.
//!
//! * [`simplex`]: weight vectors, uniform sampling, ordering.
//! * [`weightdist`]: law of the ordered weights and product moments.
//! * [`games`]: exact Penrose-Banzhaf and Coleman indices of one game.
//! * [`analytic`]: closed forms for two and three players and the expected
//!   Coleman index via its characteristic function.
//! * [`experiments`]: Monte Carlo quota curves, game-class discovery,
//!   extremum counting and spline fits.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod games;
pub mod numeric;
pub mod poly;
pub mod quadrature;
pub mod rng;
pub mod simplex;
pub mod weightdist;

pub use error::{Error, Result};
pub use games::{Coalition, ExactGame, Functional, PowerProfile, VotingGame, WinningCounts};
pub use rng::RandomSeed;
pub use simplex::{OrderedWeightVector, WeightVector};
