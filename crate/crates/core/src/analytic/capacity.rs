//! Capacity of the queue-channel with and without timestamps.

use serde::{Deserialize, Serialize};

use super::{check_stability, StationaryDist};
use crate::dist::ParametricDist;
use crate::error::{Error, Result};
use crate::noise::{entropy, NoiseModel};
use crate::numeric::binary_entropy;

/// Which formula produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityMethod {
    /// Geometric departure law from the G/geo/1 fixed point.
    GGeo1,
    /// Departure chain of geo/G/1.
    GeoG1,
    /// Departure chain with batch arrivals.
    TypeII,
    /// Receiver without arrival/departure timestamps.
    NoTimestamp,
    /// All-or-nothing batch lower bound.
    BatchLower,
    /// Bernoulli batch upper bound.
    BatchUpper,
}

/// Capacity in bits per slot with its propagated truncation bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub capacity_bits_per_slot: f64,
    pub lambda: f64,
    pub log_alphabet: f64,
    /// `sum_q pi_q H(psi_q)`, or `H(sum_q pi_q psi_q)` without timestamps.
    pub noise_penalty: f64,
    pub error_bound: f64,
    pub method: CapacityMethod,
}

fn method_for(pi: &StationaryDist) -> CapacityMethod {
    use super::{KSource, StationaryForm};
    match pi.form() {
        StationaryForm::Geometric { .. } => CapacityMethod::GGeo1,
        StationaryForm::Recursive {
            source: KSource::TypeII,
        } => CapacityMethod::TypeII,
        _ => CapacityMethod::GeoG1,
    }
}

fn report(
    lambda: f64,
    log_f: f64,
    penalty: f64,
    error_bound: f64,
    method: CapacityMethod,
) -> CapacityReport {
    let penalty = penalty.clamp(0.0, log_f);
    CapacityReport {
        capacity_bits_per_slot: (lambda * (log_f - penalty)).max(0.0),
        lambda,
        log_alphabet: log_f,
        noise_penalty: penalty,
        error_bound,
        method,
    }
}

/// `lambda (log|F| - sum_q pi_q H(psi_q))`.
pub fn capacity(lambda: f64, pi: &StationaryDist, nm: &NoiseModel) -> CapacityReport {
    let log_f = nm.alphabet().log_size();
    let (penalty, _) = nm.mean_entropy(pi);
    let error_bound = lambda * pi.tail_bound() * log_f;
    report(lambda, log_f, penalty, error_bound, method_for(pi))
}

/// `lambda (log|F| - H(sum_q pi_q psi_q))`.
///
/// The bound moves at most `delta` of mixture mass, with `delta` the tail bound of `pi`,
/// and uses the continuity estimate `delta log(|F| - 1) + h(delta)`.
pub fn capacity_no_timestamps(lambda: f64, pi: &StationaryDist, nm: &NoiseModel) -> CapacityReport {
    let log_f = nm.alphabet().log_size();
    let mixed = nm.mixture(pi);
    let penalty = entropy(&mixed);
    let delta = pi.tail_bound();
    let continuity = if delta >= 0.5 {
        log_f
    } else {
        delta * ((nm.alphabet().size() - 1) as f64).log2() + binary_entropy(delta)
    };
    report(
        lambda,
        log_f,
        penalty,
        lambda * continuity,
        CapacityMethod::NoTimestamp,
    )
}

/// Upper or lower batch-arrival bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// All-or-nothing batches of size `B`.
    Lower,
    /// Bernoulli batches.
    Upper,
}

/// How the zero-batch probability is derived from the arrival rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// `lambda` is the mean batch size: `m0 = 1 - lambda` (upper), `1 - lambda/B` (lower).
    #[default]
    BatchMean,
    /// `lambda` read as a reciprocal mean: `m0 = 1 - 1/lambda` (upper), `1 - 1/(B lambda)` (lower).
    Literal,
}

impl RateConvention {
    pub fn m0(self, lambda: f64, batch: u32, which: BoundKind) -> f64 {
        let scale = match which {
            BoundKind::Upper => 1.0,
            BoundKind::Lower => batch as f64,
        };
        match self {
            RateConvention::BatchMean => 1.0 - lambda / scale,
            RateConvention::Literal => 1.0 - 1.0 / (scale * lambda),
        }
    }
}

/// Bound for `b = 1` thresholded noise given the zero-batch probability `m0` directly:
/// `lambda (log|F| + (h_2 - h_0)(1 - lambda/mu)/k_0 - h_2)` with `k_0 = E[m0^S]`.
pub fn capacity_bound_from_m0(
    lambda: f64,
    p_s: &ParametricDist,
    m0: f64,
    nm: &NoiseModel,
    which: BoundKind,
) -> Result<CapacityReport> {
    if !(m0 > 0.0 && m0 < 1.0) {
        return Err(Error::ConventionError {
            m0,
            hint: "check whether lambda denotes the mean batch size or its reciprocal".into(),
        });
    }
    let (b, h0, h2) = nm
        .threshold_entropies()
        .ok_or_else(|| Error::AssumptionViolation("batch bounds need thresholded noise".into()))?;
    if b != 1 {
        return Err(Error::AssumptionViolation(format!(
            "batch bounds need threshold b = 1, got {b}"
        )));
    }
    if h0 >= h2 {
        log::warn!("batch bound evaluated with H(psi_0) = {h0} >= H(psi_2) = {h2}");
    }
    let mu = 1.0 / p_s.mean();
    check_stability(lambda, mu)?;
    let k0 = p_s.gf_eval(m0)?;
    let log_f = nm.alphabet().log_size();
    // pi_0 + pi_1 = (1 - lambda/mu) / k_0 carries the low-entropy weight.
    let low = ((1.0 - lambda / mu) / k0).min(1.0);
    let penalty = h0 * low + h2 * (1.0 - low);
    let method = match which {
        BoundKind::Lower => CapacityMethod::BatchLower,
        BoundKind::Upper => CapacityMethod::BatchUpper,
    };
    Ok(report(lambda, log_f, penalty, 0.0, method))
}

/// Batch-arrival bound with `m0` derived from `lambda` and `batch` under `convention`.
pub fn capacity_bound_type2(
    lambda: f64,
    p_s: &ParametricDist,
    batch: u32,
    nm: &NoiseModel,
    which: BoundKind,
    convention: RateConvention,
) -> Result<CapacityReport> {
    if batch < 2 {
        return Err(Error::InvalidParameter(
            "batch size B must be at least 2".into(),
        ));
    }
    capacity_bound_from_m0(lambda, p_s, convention.m0(lambda, batch, which), nm, which)
}
