//! Optimal dynamic lending under asymmetric information.
//!
//! A lender repeatedly offers loans to a borrower whose income θ is private.
//! With a fixed discount the optimal policy raises the loan gradually (Lean
//! Experimentation); with an endogenous discount it may instead run one large
//! test loan (Grand Experiment). The crate solves both models, evaluates hybrid
//! policies that start from an external income signal, and validates the
//! results by Monte Carlo.

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod demand;
pub mod endo_policy;
pub mod error;
pub mod exo_policy;
pub mod hybrid;
pub mod income_dist;
pub mod mc_sim;
pub mod numeric;
pub mod output;
pub mod value_fn;
pub mod verify;

pub use error::{Error, Result};
