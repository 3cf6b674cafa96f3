//! Isotonic regression with finite-sample, locally adaptive confidence bands.
//!
//! The crate is organised around the isotonic projection `iso(y)` (the
//! least-squares nondecreasing fit) and the sliding-window norm, with respect
//! to which that projection is a contraction. From that contraction follow:
//!
//! * [`bands`]: deterministic sandwich bounds, data-adaptive confidence bands
//!   under subgaussian noise, error envelopes, Lipschitz widths and an l2 risk
//!   bound;
//! * [`density`]: the Grenander estimator of a nonincreasing density on
//!   `[0, 1]` and its uniform error band;
//! * [`sim`]: a seeded Monte Carlo harness for the local-adaptivity
//!   experiment.
//!
//! All indices in the public API are 0-based.

// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod density;
mod error;
pub mod iso;
pub mod norms;
pub mod sim;
mod window;

pub use error::{Error, Result};
pub use iso::{pava, IsotonicFit, Sequence};
pub use norms::PsiSpec;
