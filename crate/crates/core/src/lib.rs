//! Solvers for the binary knapsack problem with a second-order cone capacity
//! constraint
//!
//! ```text
//! maximize    sum_j p_j x_j
//! subject to  sum_j a_j x_j + omega * sqrt(sum_j sigma_j^2 x_j) <= b,   x in {0,1}^n
//! ```
//!
//! which is what chance-constrained and distributionally robust knapsack
//! models reduce to once the distributional assumption is folded into a
//! single safety factor `omega`.
//!
//! The crate is organised bottom-up:
//!
//! - [`knapsack`]: exact 0/1 knapsack solver on exact integer data.
//! - [`model`]: instance data, safety-factor resolution and the exact
//!   cone feasibility test.
//! - [`approx`]: piecewise-linear envelopes of `xi^2`, the segment table
//!   and the greedy support-function value `beta`.
//! - [`rkpm`]: the robust knapsack over the polyhedral inner/outer sets,
//!   solved as a family of ordinary knapsacks. Gives upper and lower bounds.
//! - [`exact`]: the doubling algorithm that refines the inner set until the
//!   incumbent is cone-feasible, plus the finite segment-count certificate.
//! - [`guarantees`]: closed-form probability gaps and a Monte-Carlo check.
//!
//! All feasibility decisions are made in exact integer arithmetic on the
//! decimal data; floating point is used only for reporting.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. With `std`, subproblem bounds are evaluated on a rayon pool and
//! wall times are recorded.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approx;
mod arith;
pub mod decimal;
mod error;
pub mod exact;
pub mod guarantees;
pub mod knapsack;
pub mod model;
pub mod normal;
pub mod rkpm;
mod timing;

pub use decimal::Decimal;
pub use error::{Error, Result};
pub use model::{OmegaKind, OmegaSpec, SockpInstance};
