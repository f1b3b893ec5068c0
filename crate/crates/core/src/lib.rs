//! Divergence, mixing-time and privacy bounds for projected noisy
//! iterations whose gradient maps have a modulus of continuity
//! `phi(delta) = sqrt(c * delta^2 + h)`.
//!
//! - [`moduli`]: `(c, h)` for Lipschitz, weakly smooth, smooth and
//!   strongly dissipative potentials.
//! - [`shifts`]: the shift-allocation problem, its closed-form minimizer
//!   and an independent numeric oracle.
//! - [`bounds`]: Rényi and KL bounds built on the optimal shifts.
//! - [`mixing`]: mixing times of the projected Langevin algorithm.
//! - [`privacy`]: Rényi-DP accounting for noisy SGD.
//! - [`simulate`]: Monte-Carlo chains and empirical total variation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod numeric;

pub mod bounds;
pub mod mixing;
pub mod moduli;
pub mod privacy;
pub mod shifts;
pub mod simulate;

pub use error::{PabiError, Result};
