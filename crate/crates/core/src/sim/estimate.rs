use serde::{Deserialize, Serialize};

use super::trace::SimulationTrace;
use crate::analytic::StationaryDist;
use crate::dist::Pmf;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Histogram of `Q_i` over departures after the first `warmup`.
pub fn empirical_pi(trace: &SimulationTrace, warmup: usize) -> Result<Pmf> {
    if trace.jobs.len() <= warmup {
        return Err(Error::InvalidParameter(format!(
            "trace has {} departures, not more than warmup {warmup}",
            trace.jobs.len()
        )));
    }
    let jobs = &trace.jobs[warmup..];
    let hi = jobs.iter().map(|j| j.queue_at_departure).max().unwrap_or(0);
    let mut counts = vec![0u64; hi + 1];
    for j in jobs {
        counts[j.queue_at_departure] += 1;
    }
    let n = jobs.len() as f64;
    Ok(Pmf::from_parts(
        0,
        counts.into_iter().map(|c| c as f64 / n).collect(),
        0.0,
    ))
}

/// Jobs left behind by each departure, from timestamps alone:
/// `Q_i = #{j : A_j <= D_i < D_j}`.
///
/// `arrivals` lists every job that entered, in FIFO order, and may be longer than
/// `departures`; the extra jobs have not departed.
pub fn reconstruct_queue(arrivals: &[u64], departures: &[u64]) -> Result<Vec<usize>> {
    if arrivals.len() < departures.len() {
        return Err(Error::InconsistentTimestamps {
            index: arrivals.len(),
            reason: "more departures than arrivals".into(),
        });
    }
    for (i, d) in departures.iter().enumerate() {
        if *d < arrivals[i] {
            return Err(Error::InconsistentTimestamps {
                index: i,
                reason: format!("departs at {d} before arriving at {}", arrivals[i]),
            });
        }
        if i > 0 && *d <= departures[i - 1] {
            return Err(Error::InconsistentTimestamps {
                index: i,
                reason: "departures must be strictly increasing".into(),
            });
        }
    }
    let mut sorted = arrivals.to_vec();
    sorted.sort_unstable();
    // Every earlier-or-equal departer arrived by D_i, so subtract them.
    Ok(departures
        .iter()
        .enumerate()
        .map(|(i, d)| sorted.partition_point(|a| a <= d) - (i + 1))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub jobs: usize,
    pub empirical_pi: Pmf,
    /// Mean of `log|F| + log psi_{Q_i}(Z_i)` in bits.
    pub info_density_mean: f64,
    pub info_density_stderr: f64,
    pub batches: usize,
}

impl EmpiricalSummary {
    pub fn tv_distance_to(&self, reference: &StationaryDist) -> f64 {
        reference.tv_distance(&self.empirical_pi)
    }
}

/// Batches used for the standard error of correlated terms.
pub const STDERR_BATCHES: usize = 30;

/// Mean and standard error of the per-job information density after warmup.
///
/// Successive terms are correlated through the queue, so the error uses nonoverlapping
/// batch means; below `10 * STDERR_BATCHES` terms it falls back to the i.i.d. formula.
pub fn info_density_estimate(trace: &SimulationTrace, nm: &NoiseModel) -> Result<EmpiricalSummary> {
    let warmup = trace.warmup;
    let empirical = empirical_pi(trace, warmup)?;
    let log_f = nm.alphabet().log_size();
    let mut terms = Vec::with_capacity(trace.jobs.len() - warmup);
    for (i, j) in trace.jobs.iter().enumerate().skip(warmup) {
        let p = nm.psi(j.queue_at_departure).prob(j.z as usize);
        if p <= 0.0 {
            return Err(Error::DegenerateNoise {
                index: i,
                q: j.queue_at_departure,
                z: j.z,
            });
        }
        terms.push(log_f + p.log2());
    }
    let (mean, stderr, batches) = mean_and_stderr(&terms);
    Ok(EmpiricalSummary {
        jobs: terms.len(),
        empirical_pi: empirical,
        info_density_mean: mean,
        info_density_stderr: stderr,
        batches,
    })
}

fn mean_and_stderr(x: &[f64]) -> (f64, f64, usize) {
    let n = x.len();
    let mean = crate::numeric::ksum(x.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0, n);
    }
    let (groups, size) = if n >= 10 * STDERR_BATCHES {
        (STDERR_BATCHES, n / STDERR_BATCHES)
    } else {
        (n, 1)
    };
    let means: Vec<f64> = (0..groups)
        .map(|g| x[g * size..(g + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / groups as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (groups - 1) as f64;
    (mean, (var / groups as f64).sqrt(), groups)
}
