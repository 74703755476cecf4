use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::noise::Alphabet;

/// One departed job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub arrival_slot: u64,
    pub departure_slot: u64,
    pub service: u64,
    /// Jobs left behind at departure.
    pub queue_at_departure: usize,
    pub x: u32,
    pub z: u32,
    pub y: u32,
}

impl JobRecord {
    /// Slots spent in the system, counting both the arrival and departure slots.
    pub fn sojourn(&self) -> u64 {
        self.departure_slot - self.arrival_slot + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    /// Departed jobs in FIFO order.
    pub jobs: Vec<JobRecord>,
    /// Arrival slots of jobs still in the system when the run stopped.
    pub pending_arrivals: Vec<u64>,
    /// Number in system during every slot (after arrivals, including a departing job).
    pub slot_queue: Option<Vec<u32>>,
    /// Slots elapsed through the final departure.
    pub slots: u64,
    pub alphabet: Alphabet,
    pub warmup: usize,
}

pub const TRACE_CSV_HEADER: &str =
    "job_index,arrival_slot,departure_slot,service,queue_at_departure,x,z,y";

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    /// Arrival slots of every job that entered, departed ones first.
    pub fn arrival_slots(&self) -> Vec<u64> {
        self.jobs
            .iter()
            .map(|j| j.arrival_slot)
            .chain(self.pending_arrivals.iter().copied())
            .collect()
    }

    pub fn departure_slots(&self) -> Vec<u64> {
        self.jobs.iter().map(|j| j.departure_slot).collect()
    }

    pub fn queue_lengths(&self) -> Vec<usize> {
        self.jobs.iter().map(|j| j.queue_at_departure).collect()
    }

    /// Jobs after the warmup prefix.
    pub fn measured(&self) -> &[JobRecord] {
        &self.jobs[self.warmup.min(self.jobs.len())..]
    }

    pub fn mean_sojourn(&self) -> f64 {
        let m = self.measured();
        m.iter().map(|j| j.sojourn() as f64).sum::<f64>() / m.len() as f64
    }

    /// Time-average number in system over the recorded slots.
    pub fn time_average_queue(&self) -> Option<f64> {
        self.slot_queue
            .as_ref()
            .map(|q| q.iter().map(|v| *v as f64).sum::<f64>() / q.len().max(1) as f64)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for (i, j) in self.jobs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                j.arrival_slot,
                j.departure_slot,
                j.service,
                j.queue_at_departure,
                j.x,
                j.z,
                j.y
            )?;
        }
        Ok(())
    }
}
