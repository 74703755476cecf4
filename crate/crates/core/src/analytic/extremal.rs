//! Extremal inter-arrival constructions, capacity orderings, and threshold-zero invariance.

use serde::{Deserialize, Serialize};

use super::{
    arrival_curve, capacity, k_coefficients_geo_g1, k_coefficients_type2, solve_sigma,
    stationary_from_k, CapacityReport, StationaryDist, Truncation, DEFAULT_Q_MAX,
};
use crate::dist::ParametricDist;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::numeric::ksum;

/// Named family with a prescribed mean `1/lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtremalKind {
    /// Point mass at `1/lambda`; needs an integer mean.
    Deterministic,
    /// Mass on the two integers around `1/lambda`: the least variable law on `{1, 2, ...}`
    /// with that mean. Coincides with `Deterministic` when the mean is an integer.
    Lattice,
    TwoPoint {
        eps: f64,
    },
    Geometric,
    /// `stages` equal geometric phases.
    SumOfGeometric {
        stages: usize,
    },
    /// Geometric components with means spread around `1/lambda`.
    MixtureOfGeometric {
        weights: Vec<f64>,
    },
}

const INTEGER_TOL: f64 = 1e-9;
const MEAN_TOL: f64 = 1e-12;

pub fn extremal_arrival(kind: &ExtremalKind, lambda: f64) -> Result<ParametricDist> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "arrival rate {lambda} outside (0,1)"
        )));
    }
    let m = 1.0 / lambda;
    let nearest = m.round();
    let integral = (m - nearest).abs() <= INTEGER_TOL * m;
    match kind {
        ExtremalKind::Deterministic => {
            if !integral {
                return Err(Error::IntegralityError(m));
            }
            ParametricDist::deterministic(nearest as u64)
        }
        ExtremalKind::Lattice => {
            if integral {
                return ParametricDist::deterministic(nearest as u64);
            }
            let lo = m.floor();
            let upper = m - lo;
            ParametricDist::explicit(lo as usize, vec![1.0 - upper, upper])
        }
        ExtremalKind::TwoPoint { eps } => ParametricDist::two_point_with_mean(m, *eps),
        ExtremalKind::Geometric => ParametricDist::geometric(lambda),
        ExtremalKind::SumOfGeometric { stages } => {
            if *stages == 0 {
                return Err(Error::InvalidParameter("need at least one stage".into()));
            }
            let stage_mean = m / *stages as f64;
            if stage_mean <= 1.0 {
                return Err(Error::Infeasible(format!(
                    "{stages} geometric stages on {{1,2,...}} have mean at least {stages}, \
                     above the target mean {m}"
                )));
            }
            ParametricDist::sum_of_geometric(vec![1.0 / stage_mean; *stages])
        }
        ExtremalKind::MixtureOfGeometric { weights } => {
            // Component i has mean 1 + (m - 1) i / sum_j c_j j, so the weighted mean is m.
            let scale = ksum(weights.iter().enumerate().map(|(i, c)| c * (i + 1) as f64));
            if !(scale > 0.0) {
                return Err(Error::InvalidDistribution(
                    "mixture weights are all zero".into(),
                ));
            }
            let rates = (1..=weights.len())
                .map(|i| 1.0 / (1.0 + (m - 1.0) * i as f64 / scale))
                .collect();
            ParametricDist::mixture_of_geometric(weights.clone(), rates)
        }
    }
}

fn common_mean(dists: &[ParametricDist]) -> Result<f64> {
    let first = dists
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty distribution list".into()))?
        .mean();
    for d in &dists[1..] {
        let m = d.mean();
        if (m - first).abs() > MEAN_TOL * first.max(1.0) {
            return Err(Error::MeanMismatch(first, m));
        }
    }
    Ok(first)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingRow {
    pub label: String,
    pub lambda: f64,
    pub sigma: f64,
    pub capacity: f64,
    pub error_bound: f64,
}

/// A predicted inequality and how it fared; `margin` is the smallest slack (negative if violated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingFlag {
    pub claim: String,
    pub holds: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingTable {
    pub mu: f64,
    pub rows: Vec<OrderingRow>,
    pub flags: Vec<OrderingFlag>,
}

impl OrderingTable {
    pub fn all_hold(&self) -> bool {
        self.flags.iter().all(|f| f.holds)
    }

    pub fn row(&self, label: &str) -> Option<&OrderingRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Points at which the arrival curves are compared.
pub const CURVE_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Deterministic,
    Lattice,
    SumOfGeometric,
    Geometric,
    TwoPoint,
    Mixture,
    Other,
}

fn role(d: &ParametricDist) -> Role {
    match d {
        ParametricDist::Deterministic(_) => Role::Deterministic,
        ParametricDist::SumOfGeometric(r) if r.len() > 1 => Role::SumOfGeometric,
        ParametricDist::SumOfGeometric(_) | ParametricDist::Geometric(_) => Role::Geometric,
        ParametricDist::TwoPoint { .. } => Role::TwoPoint,
        ParametricDist::MixtureOfGeometric { .. } => Role::Mixture,
        ParametricDist::Explicit(p) if p.offset() >= 1 && p.masses().len() == 2 => Role::Lattice,
        ParametricDist::Explicit(_) => Role::Other,
    }
}

pub fn ordering_check(dists: &[ParametricDist], mu: f64, nm: &NoiseModel) -> Result<OrderingTable> {
    ordering_check_with(dists, mu, nm, DEFAULT_Q_MAX)
}

/// G/geo/1 capacities of equal-mean inter-arrival laws plus the predicted orderings:
/// deterministic (or two-atom lattice) >= sum-of-geometric >= geometric >= two-point for
/// capacity, and
/// sum-of-geometric <= geometric <= mixture for the arrival curve on [`CURVE_GRID`].
pub fn ordering_check_with(
    dists: &[ParametricDist],
    mu: f64,
    nm: &NoiseModel,
    q_max: usize,
) -> Result<OrderingTable> {
    let mean = common_mean(dists)?;
    let lambda = 1.0 / mean;
    nm.check_threshold_order();

    let mut rows = Vec::with_capacity(dists.len());
    for d in dists {
        let sigma = solve_sigma(d, mu)?;
        let c = capacity(lambda, &StationaryDist::geometric(sigma, q_max), nm);
        rows.push(OrderingRow {
            label: d.label(),
            lambda,
            sigma,
            capacity: c.capacity_bits_per_slot,
            error_bound: c.error_bound,
        });
    }

    let roles: Vec<Role> = dists.iter().map(role).collect();
    let of = |r: Role| -> Vec<usize> { (0..dists.len()).filter(|i| roles[*i] == r).collect() };
    let mut flags = Vec::new();
    let mut cap_flag = |hi: &[usize], lo: &[usize], what: &str| {
        for &i in hi {
            for &j in lo {
                let margin = rows[i].capacity - rows[j].capacity;
                flags.push(OrderingFlag {
                    claim: format!("C({}) >= C({}) [{what}]", rows[i].label, rows[j].label),
                    holds: margin >= -(rows[i].error_bound + rows[j].error_bound),
                    margin,
                });
            }
        }
    };
    let (det, lat, sog, geo, two, mix) = (
        of(Role::Deterministic),
        of(Role::Lattice),
        of(Role::SumOfGeometric),
        of(Role::Geometric),
        of(Role::TwoPoint),
        of(Role::Mixture),
    );
    cap_flag(&det, &sog, "deterministic maximizes");
    cap_flag(&sog, &geo, "phase-type above geometric");
    cap_flag(&lat, &sog, "lattice maximizes among integer laws");
    if sog.is_empty() {
        cap_flag(&det, &geo, "deterministic maximizes");
        cap_flag(&lat, &geo, "lattice maximizes among integer laws");
    }
    cap_flag(&geo, &two, "two-point asymptotically minimizes");

    if !sog.is_empty() || !mix.is_empty() {
        let reference = ParametricDist::geometric(lambda)?;
        let curve_margin = |lo: &ParametricDist, hi: &ParametricDist| {
            CURVE_GRID
                .iter()
                .map(|s| arrival_curve(hi, mu, *s) - arrival_curve(lo, mu, *s))
                .fold(f64::INFINITY, f64::min)
        };
        for &i in &sog {
            let margin = curve_margin(&dists[i], &reference);
            flags.push(OrderingFlag {
                claim: format!("curve({}) <= curve(geometric) on grid", rows[i].label),
                holds: margin >= -1e-15,
                margin,
            });
        }
        for &i in &mix {
            let margin = curve_margin(&reference, &dists[i]);
            flags.push(OrderingFlag {
                claim: format!("curve(geometric) <= curve({}) on grid", rows[i].label),
                holds: margin >= -1e-15,
                margin,
            });
        }
    }

    Ok(OrderingTable { mu, rows, flags })
}

/// Per-distribution capacities and whether they agree within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub labels: Vec<String>,
    pub capacities: Vec<CapacityReport>,
    /// `max - min` of the capacities.
    pub spread: f64,
    /// `1e-8` plus the two largest error bounds.
    pub tolerance: f64,
    pub invariant: bool,
    /// Value predicted from `pi_0 = 1 - lambda/mu` alone.
    pub predicted: f64,
}

const INVARIANCE_TOL: f64 = 1e-8;

fn threshold_zero(nm: &NoiseModel) -> Result<(f64, f64)> {
    match nm.threshold_entropies() {
        Some((0, h0, h1)) if h0 < h1 => Ok((h0, h1)),
        Some((0, h0, h1)) => Err(Error::AssumptionViolation(format!(
            "threshold-zero check needs H(psi_0) < H(psi_1), got {h0} >= {h1}"
        ))),
        _ => Err(Error::AssumptionViolation(
            "threshold-zero check needs thresholded noise with b = 0".into(),
        )),
    }
}

fn summarize(
    labels: Vec<String>,
    capacities: Vec<CapacityReport>,
    predicted: f64,
) -> InvarianceReport {
    let values: Vec<f64> = capacities
        .iter()
        .map(|c| c.capacity_bits_per_slot)
        .collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut bounds: Vec<f64> = capacities.iter().map(|c| c.error_bound).collect();
    bounds.sort_by(|a, b| b.total_cmp(a));
    let tolerance = INVARIANCE_TOL + bounds.iter().take(2).sum::<f64>();
    InvarianceReport {
        labels,
        capacities,
        spread: hi - lo,
        tolerance,
        invariant: hi - lo <= tolerance,
        predicted,
    }
}

/// geo/G/1 capacities across equal-mean service laws under `b = 0` thresholded noise.
pub fn invariance_check_b0(
    lambda: f64,
    service_dists: &[ParametricDist],
    nm: &NoiseModel,
    trunc: &Truncation,
) -> Result<InvarianceReport> {
    let (h0, h1) = threshold_zero(nm)?;
    let mu = 1.0 / common_mean(service_dists)?;
    let mut caps = Vec::new();
    for s in service_dists {
        let k = k_coefficients_geo_g1(lambda, s, trunc.j_max, trunc.tail_eps)?;
        let pi = stationary_from_k(&k, lambda, mu, trunc.q_max)?;
        caps.push(capacity(lambda, &pi, nm));
    }
    let pi0 = 1.0 - lambda / mu;
    let predicted = lambda * (nm.alphabet().log_size() - h0 * pi0 - h1 * (1.0 - pi0));
    Ok(summarize(
        service_dists.iter().map(|d| d.label()).collect(),
        caps,
        predicted,
    ))
}

/// Batch-arrival capacities across equal-mean batch laws with a fixed service law.
pub fn invariance_check_b0_type2(
    batch_dists: &[ParametricDist],
    p_s: &ParametricDist,
    nm: &NoiseModel,
    trunc: &Truncation,
) -> Result<InvarianceReport> {
    let (h0, h1) = threshold_zero(nm)?;
    let lambda = common_mean(batch_dists)?;
    let mu = 1.0 / p_s.mean();
    let mut caps = Vec::new();
    for m in batch_dists {
        let k = k_coefficients_type2(m, p_s, trunc.j_max, trunc.tail_eps)?;
        let pi = stationary_from_k(&k, lambda, mu, trunc.q_max)?;
        caps.push(capacity(lambda, &pi, nm));
    }
    let pi0 = 1.0 - lambda / mu;
    let predicted = lambda * (nm.alphabet().log_size() - h0 * pi0 - h1 * (1.0 - pi0));
    Ok(summarize(
        batch_dists.iter().map(|d| d.label()).collect(),
        caps,
        predicted,
    ))
}
