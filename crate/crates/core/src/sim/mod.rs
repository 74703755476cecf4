//! Slot-level Monte-Carlo simulation of the queue-channel.

mod engine;
mod estimate;
mod reference;
pub mod rng;
mod trace;

pub use engine::{simulate, ArrivalProcess, InputSource, ServiceStart, SimConfig, RUNAWAY_LIMIT};
pub use estimate::{
    empirical_pi, info_density_estimate, reconstruct_queue, EmpiricalSummary, STDERR_BATCHES,
};
pub use reference::matching_stationary;
pub use trace::{JobRecord, SimulationTrace, TRACE_CSV_HEADER};
