//! Two-dimensional Rademacher random walks.
//!
//! A walk is `S_n = a_1 ξ_1 + … + a_n ξ_n` where each `ξ_i` is uniform on the
//! four unit lattice directions and `a_n` is a deterministic positive step-size
//! sequence. The crate is split into:
//!
//! - [`sequences`]: step-size families, run-length decomposition, doubling
//!   subsequences, (r,s)-monotonicity reports and the double-exponential block
//!   sequence.
//! - [`walk`]: seeded simulation, visit statistics and parallel Monte Carlo.
//! - [`exact`]: exact convolution oracles with rational masses.
//! - [`construction`]: the coprime-pair schedule that produces recurrent walks.
//! - [`verify`]: executable versions of the anti-concentration and
//!   supermartingale inequalities.
//!
//! Parallel work runs on rayon when the `parallel` feature is enabled (the
//! default); every aggregate is an order-insensitive exact sum, so results are
//! identical across thread counts and with the feature disabled.

pub mod construction;
pub mod exact;
pub mod parallel;
pub mod ratio;
pub mod sequences;
pub mod stats;
pub mod verify;
pub mod walk;

pub use parallel::Execution;
pub use ratio::Rational;
