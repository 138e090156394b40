// `!(x > 0.0)` is used on purpose so NaN settings are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod config;
pub mod degradations;
pub mod error;
pub mod io;
pub mod metrics;
pub mod network;
pub mod numerics;
pub mod recipes;
pub mod restoration;
pub mod synthetic;

pub use error::{Error, Result};
