//! Capacity analysis and simulation of single-server queues whose service noise
//! depends on the queue length seen by each departing job.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod cli;
pub mod coding;
pub mod dist;
pub mod error;
pub mod noise;
pub mod numeric;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
