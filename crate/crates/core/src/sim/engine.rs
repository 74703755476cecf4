use std::collections::VecDeque;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::{stream_rng, Stream};
use super::trace::{JobRecord, SimulationTrace};
use crate::dist::ParametricDist;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Queue length at which a run is abandoned as unstable.
pub const RUNAWAY_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalProcess {
    /// At most one arrival per slot, i.i.d. inter-arrival times on `{1, 2, ...}`.
    TypeI(ParametricDist),
    /// I.i.d. batch sizes on `{0, 1, ...}` in every slot.
    #[serde(rename = "type_ii")]
    TypeII(ParametricDist),
    /// Explicit nondecreasing arrival slots (several jobs may share a slot).
    Slots(Vec<u64>),
}

impl ArrivalProcess {
    /// Long-run arrivals per slot, when defined.
    pub fn rate(&self) -> Option<f64> {
        match self {
            ArrivalProcess::TypeI(d) => Some(1.0 / d.mean()),
            ArrivalProcess::TypeII(d) => Some(d.mean()),
            ArrivalProcess::Slots(_) => None,
        }
    }
}

/// When a job reaching an idle server may start service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceStart {
    /// In its arrival slot, so a unit-length service departs in the slot it arrived.
    #[default]
    SameSlot,
    /// From the slot after its arrival.
    NextSlot,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    /// I.i.d. uniform symbols.
    #[default]
    Uniform,
    /// Symbol of the i-th arriving job; must cover every departing job.
    Fixed(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub arrival: ArrivalProcess,
    pub service: ParametricDist,
    pub noise: NoiseModel,
    pub horizon_departures: usize,
    /// Defaults to a tenth of the horizon.
    #[serde(default)]
    pub warmup_departures: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub service_start: ServiceStart,
    #[serde(default)]
    pub record_slots: bool,
    #[serde(default)]
    pub inputs: InputSource,
}

impl SimConfig {
    pub fn new(
        arrival: ArrivalProcess,
        service: ParametricDist,
        noise: NoiseModel,
        horizon_departures: usize,
        seed: u64,
    ) -> Self {
        SimConfig {
            arrival,
            service,
            noise,
            horizon_departures,
            warmup_departures: None,
            seed,
            service_start: ServiceStart::default(),
            record_slots: false,
            inputs: InputSource::default(),
        }
    }

    pub fn warmup(&self) -> usize {
        self.warmup_departures
            .unwrap_or(self.horizon_departures / 10)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_departures == 0 || self.warmup() >= self.horizon_departures {
            return Err(Error::InvalidParameter(format!(
                "need horizon > warmup >= 0, got horizon {} and warmup {}",
                self.horizon_departures,
                self.warmup()
            )));
        }
        if self.service.min_support() < 1 {
            return Err(Error::AssumptionViolation(
                "service times must be at least one slot".into(),
            ));
        }
        match &self.arrival {
            ArrivalProcess::TypeI(d) if d.min_support() < 1 => {
                return Err(Error::AssumptionViolation(
                    "inter-arrival times must be at least one slot".into(),
                ))
            }
            ArrivalProcess::Slots(s)
                if s.windows(2).any(|w| w[0] > w[1]) || s.first() == Some(&0) =>
            {
                return Err(Error::InvalidParameter(
                    "arrival slots must be positive and nondecreasing".into(),
                ))
            }
            _ => {}
        }
        if let InputSource::Fixed(x) = &self.inputs {
            let f = self.noise.alphabet().size();
            if x.len() < self.horizon_departures {
                return Err(Error::InvalidParameter(format!(
                    "{} fixed inputs for {} departures",
                    x.len(),
                    self.horizon_departures
                )));
            }
            if let Some(bad) = x.iter().find(|s| **s >= f) {
                return Err(Error::InvalidParameter(format!(
                    "input symbol {bad} outside alphabet of size {f}"
                )));
            }
        }
        let mu = 1.0 / self.service.mean();
        if let Some(lambda) = self.arrival.rate() {
            if lambda >= mu && lambda < 1.0 {
                log::warn!("arrival rate {lambda} >= service rate {mu}; queue may not be stable");
            }
        }
        Ok(())
    }
}

struct Job {
    arrival: u64,
    service: u64,
    x: u32,
}

enum Arrivals {
    TypeI {
        sampler: crate::dist::DistSampler,
        next: u64,
    },
    TypeII(crate::dist::DistSampler),
    Slots {
        slots: Vec<u64>,
        pos: usize,
    },
}

impl Arrivals {
    /// Next slot with a possible arrival at or after `t`; `None` if none will ever come.
    fn next_slot(&self, t: u64) -> Option<u64> {
        match self {
            Arrivals::TypeI { next, .. } => Some((*next).max(t)),
            Arrivals::TypeII(_) => Some(t),
            Arrivals::Slots { slots, pos } => slots.get(*pos).map(|s| (*s).max(t)),
        }
    }
}

/// Runs the slotted queue until `horizon_departures` jobs have left.
///
/// Within slot `t`: arrivals join the back of the queue, then the head-of-line job
/// receives one slot of service, and a job whose service completes departs at the end
/// of the slot, leaving `Q_i` jobs behind. Its output is `Y_i = X_i + Z_i mod |F|` with
/// `Z_i ~ psi_{Q_i}`.
pub fn simulate(cfg: &SimConfig) -> Result<SimulationTrace> {
    cfg.validate()?;
    let alphabet = cfg.noise.alphabet();
    let f = alphabet.size();
    let mut arrival_rng = stream_rng(cfg.seed, Stream::Arrival);
    let mut service_rng = stream_rng(cfg.seed, Stream::Service);
    let mut noise_rng = stream_rng(cfg.seed, Stream::Noise);
    let mut input_rng = stream_rng(cfg.seed, Stream::Input);

    let service = cfg.service.sampler()?;
    let noise: Vec<WeightedIndex<f64>> = cfg
        .noise
        .states()
        .iter()
        .map(|psi| {
            WeightedIndex::new(psi.dense(f as usize))
                .map_err(|e| Error::InvalidDistribution(format!("noise law: {e}")))
        })
        .collect::<Result<_>>()?;
    let mut arrivals = match &cfg.arrival {
        ArrivalProcess::TypeI(d) => {
            let sampler = d.sampler()?;
            let next = sampler.sample(&mut arrival_rng);
            Arrivals::TypeI { sampler, next }
        }
        ArrivalProcess::TypeII(d) => Arrivals::TypeII(d.sampler()?),
        ArrivalProcess::Slots(s) => Arrivals::Slots {
            slots: s.clone(),
            pos: 0,
        },
    };

    let horizon = cfg.horizon_departures;
    let mut jobs = Vec::with_capacity(horizon);
    let mut slot_queue = cfg.record_slots.then(Vec::new);
    let mut queue: VecDeque<Job> = VecDeque::new();
    let mut arrived = 0usize;
    let mut remaining = 0u64;
    let mut t = 1u64;
    let mut elapsed = 0u64;

    let mut enqueue = |queue: &mut VecDeque<Job>, arrived: &mut usize, slot: u64| {
        let x = match &cfg.inputs {
            InputSource::Uniform => input_rng.random_range(0..f),
            InputSource::Fixed(v) => v.get(*arrived).copied().unwrap_or(0),
        };
        queue.push_back(Job {
            arrival: slot,
            service: service.sample(&mut service_rng),
            x,
        });
        *arrived += 1;
    };

    while jobs.len() < horizon {
        match &mut arrivals {
            Arrivals::TypeI { sampler, next } => {
                if *next == t {
                    enqueue(&mut queue, &mut arrived, t);
                    *next = t + sampler.sample(&mut arrival_rng);
                }
            }
            Arrivals::TypeII(batch) => {
                for _ in 0..batch.sample(&mut arrival_rng) {
                    enqueue(&mut queue, &mut arrived, t);
                }
            }
            Arrivals::Slots { slots, pos } => {
                while slots.get(*pos) == Some(&t) {
                    enqueue(&mut queue, &mut arrived, t);
                    *pos += 1;
                }
            }
        }
        if queue.len() > RUNAWAY_LIMIT {
            return Err(Error::RunawayQueue {
                limit: RUNAWAY_LIMIT,
                slot: t,
            });
        }

        if let Some(sq) = slot_queue.as_mut() {
            sq.push(queue.len() as u32);
        }

        if remaining == 0 {
            if let Some(head) = queue.front() {
                if cfg.service_start == ServiceStart::SameSlot || head.arrival < t {
                    remaining = head.service;
                }
            }
        }
        if remaining > 0 {
            remaining -= 1;
            if remaining == 0 {
                let job = queue.pop_front().expect("job in service");
                let q = queue.len();
                let z = noise[cfg.noise.state_index(q)].sample(&mut noise_rng) as u32;
                jobs.push(JobRecord {
                    arrival_slot: job.arrival,
                    departure_slot: t,
                    service: job.service,
                    queue_at_departure: q,
                    x: job.x,
                    z,
                    y: alphabet.add(job.x, z),
                });
            }
        }

        elapsed = t;
        if jobs.len() >= horizon {
            break;
        }
        // Skip idle stretches straight to the next arrival.
        if queue.is_empty() {
            match arrivals.next_slot(t + 1) {
                Some(next) => {
                    if let Some(sq) = slot_queue.as_mut() {
                        sq.resize(sq.len() + (next - t - 1) as usize, 0);
                    }
                    t = next;
                }
                None => break,
            }
        } else {
            t += 1;
        }
    }

    let pending_arrivals = queue.iter().map(|j| j.arrival).collect();
    Ok(SimulationTrace {
        jobs,
        pending_arrivals,
        slot_queue,
        slots: elapsed,
        alphabet,
        warmup: cfg.warmup(),
    })
}
