//! Discrete distributions on the non-negative integers.
//!
//! [`Pmf`] is the finite-support carrier used for inter-arrival laws, batch-size
//! laws, service laws, noise laws and stationary distributions alike.
//! [`ParametricDist`] holds the named families whose generating functions have
//! closed forms. Infinite-support families are truncated by [`ParametricDist::materialize`]
//! with a certified tail bound that is carried along instead of renormalized.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ksum;

/// Sum-to-one tolerance for user-supplied masses.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Default tail mass left out when truncating infinite-support families.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;

/// Finite-support probability mass function.
///
/// The mass at `offset + k` is `masses[k]`. A pmf produced by truncation records
/// the omitted mass in `tail_bound`, so `sum(masses) + tail_bound == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PmfRepr", into = "PmfRepr")]
pub struct Pmf {
    offset: usize,
    masses: Vec<f64>,
    tail_bound: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PmfRepr {
    offset: usize,
    masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    tail_bound: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl TryFrom<PmfRepr> for Pmf {
    type Error = Error;
    fn try_from(r: PmfRepr) -> Result<Self> {
        Pmf::truncated(r.offset, r.masses, r.tail_bound)
    }
}

impl From<Pmf> for PmfRepr {
    fn from(p: Pmf) -> Self {
        PmfRepr {
            offset: p.offset,
            masses: p.masses,
            tail_bound: p.tail_bound,
        }
    }
}

impl Pmf {
    /// Validated pmf whose masses sum to one within [`NORMALIZATION_TOL`].
    pub fn new(offset: usize, masses: Vec<f64>) -> Result<Self> {
        Self::truncated(offset, masses, 0.0)
    }

    /// Validated pmf with an explicit omitted tail mass.
    pub fn truncated(offset: usize, masses: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if masses.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "masses must be finite and non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&tail_bound) {
            return Err(Error::InvalidDistribution(format!(
                "tail bound {tail_bound} outside [0,1]"
            )));
        }
        let total = ksum(masses.iter().copied()) + tail_bound;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "masses plus tail sum to {total}, expected 1"
            )));
        }
        let pmf = Self::from_parts(offset, masses, tail_bound);
        if pmf.masses.is_empty() {
            return Err(Error::InvalidDistribution("pmf has no mass".into()));
        }
        Ok(pmf)
    }

    /// Point mass at `k`.
    pub fn point(k: usize) -> Self {
        Pmf {
            offset: k,
            masses: vec![1.0],
            tail_bound: 0.0,
        }
    }

    /// Canonicalizing constructor without normalization checks: leading zeros
    /// are folded into the offset and trailing zeros dropped.
    pub(crate) fn from_parts(offset: usize, mut masses: Vec<f64>, tail_bound: f64) -> Self {
        while masses.last() == Some(&0.0) {
            masses.pop();
        }
        let lead = masses.iter().take_while(|p| **p == 0.0).count();
        masses.drain(..lead);
        Pmf {
            offset: offset + lead,
            masses,
            tail_bound,
        }
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest support point carrying mass.
    pub fn max_support(&self) -> usize {
        self.offset + self.masses.len().saturating_sub(1)
    }

    /// Mass at `k` (zero outside the stored support).
    pub fn prob(&self, k: usize) -> f64 {
        k.checked_sub(self.offset)
            .and_then(|i| self.masses.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(point, mass)` pairs over the stored support.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.offset + i, *p))
    }

    pub fn total_mass(&self) -> f64 {
        ksum(self.masses.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        ksum(self.iter().map(|(k, p)| k as f64 * p))
    }

    pub fn second_moment(&self) -> f64 {
        ksum(self.iter().map(|(k, p)| (k as f64) * (k as f64) * p))
    }

    /// Dense vector of masses indexed from zero, padded to `len` entries.
    pub fn dense(&self, len: usize) -> Vec<f64> {
        (0..len).map(|k| self.prob(k)).collect()
    }

    /// Total variation distance over the union of supports.
    pub fn tv_distance(&self, other: &Pmf) -> f64 {
        let lo = self.offset.min(other.offset);
        let hi = self.max_support().max(other.max_support());
        0.5 * ksum((lo..=hi).map(|k| (self.prob(k) - other.prob(k)).abs()))
    }

    /// Exact discrete convolution; offsets and tail bounds add.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        convolve(self, other)
    }
}

/// Exact discrete convolution of two pmfs.
pub fn convolve(a: &Pmf, b: &Pmf) -> Pmf {
    let mut out = vec![0.0; a.masses.len() + b.masses.len() - 1];
    for (i, pa) in a.masses.iter().enumerate() {
        if *pa == 0.0 {
            continue;
        }
        for (j, pb) in b.masses.iter().enumerate() {
            out[i + j] += pa * pb;
        }
    }
    Pmf::from_parts(a.offset + b.offset, out, a.tail_bound + b.tail_bound)
}

/// First and second moments of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub second_moment: f64,
    /// `1/mean`, the rate of an inter-arrival or service law.
    pub rate: f64,
}

impl MomentSummary {
    fn from_mean(mean: f64, second_moment: f64) -> Self {
        MomentSummary {
            mean,
            second_moment,
            rate: 1.0 / mean,
        }
    }

    /// Rate of a batch-size law, which is its mean.
    pub fn batch_rate(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }
}

/// Named discrete families plus an explicit escape hatch.
///
/// Geometric laws live on `{1, 2, ...}` with `P(T = t) = (1-r)^(t-1) r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub enum ParametricDist {
    Deterministic(u64),
    Geometric(f64),
    /// Mass `1 - eps` at 1 and `eps` at `n`.
    TwoPoint {
        eps: f64,
        n: u64,
    },
    SumOfGeometric(Vec<f64>),
    MixtureOfGeometric {
        weights: Vec<f64>,
        rates: Vec<f64>,
    },
    Explicit(Pmf),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum DistRepr {
    Deterministic { value: u64 },
    Geometric { rate: f64 },
    TwoPoint { eps: f64, n: u64 },
    SumOfGeometric { rates: Vec<f64> },
    MixtureOfGeometric { weights: Vec<f64>, rates: Vec<f64> },
    Explicit { offset: usize, masses: Vec<f64> },
}

impl TryFrom<DistRepr> for ParametricDist {
    type Error = Error;
    fn try_from(r: DistRepr) -> Result<Self> {
        match r {
            DistRepr::Deterministic { value } => ParametricDist::deterministic(value),
            DistRepr::Geometric { rate } => ParametricDist::geometric(rate),
            DistRepr::TwoPoint { eps, n } => ParametricDist::two_point(eps, n),
            DistRepr::SumOfGeometric { rates } => ParametricDist::sum_of_geometric(rates),
            DistRepr::MixtureOfGeometric { weights, rates } => {
                ParametricDist::mixture_of_geometric(weights, rates)
            }
            DistRepr::Explicit { offset, masses } => {
                Ok(ParametricDist::Explicit(Pmf::new(offset, masses)?))
            }
        }
    }
}

impl From<ParametricDist> for DistRepr {
    fn from(d: ParametricDist) -> Self {
        match d {
            ParametricDist::Deterministic(value) => DistRepr::Deterministic { value },
            ParametricDist::Geometric(rate) => DistRepr::Geometric { rate },
            ParametricDist::TwoPoint { eps, n } => DistRepr::TwoPoint { eps, n },
            ParametricDist::SumOfGeometric(rates) => DistRepr::SumOfGeometric { rates },
            ParametricDist::MixtureOfGeometric { weights, rates } => {
                DistRepr::MixtureOfGeometric { weights, rates }
            }
            ParametricDist::Explicit(p) => DistRepr::Explicit {
                offset: p.offset,
                masses: p.masses,
            },
        }
    }
}

fn check_rate(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "geometric rate {r} outside (0,1)"
        )))
    }
}

fn geometric_gf(rate: f64, alpha: f64) -> f64 {
    alpha * rate / (1.0 - alpha * (1.0 - rate))
}

impl ParametricDist {
    pub fn deterministic(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDistribution(
                "deterministic value must be positive".into(),
            ));
        }
        Ok(ParametricDist::Deterministic(d))
    }

    pub fn geometric(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(ParametricDist::Geometric(rate))
    }

    pub fn two_point(eps: f64, n: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) || n < 2 {
            return Err(Error::InvalidDistribution(format!(
                "two-point law needs eps in (0,1) and N >= 2, got eps={eps}, N={n}"
            )));
        }
        Ok(ParametricDist::TwoPoint { eps, n })
    }

    /// Two-point law `{1: 1-eps, N: eps}` with mean exactly `mean`.
    ///
    /// `N = max(2, ceil(1 + (mean-1)/eps_target))`, then `eps = (mean-1)/(N-1)`.
    pub fn two_point_with_mean(mean: f64, eps_target: f64) -> Result<Self> {
        if !(mean > 1.0) || !mean.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "two-point mean must exceed 1, got {mean}"
            )));
        }
        if !(eps_target > 0.0 && eps_target < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps {eps_target} outside (0,1)"
            )));
        }
        // Guard against (m-1)/eps landing a hair above an integer.
        let raw = 1.0 + (mean - 1.0) / eps_target;
        let n = ((raw - 1e-9).ceil() as u64).max(2);
        let eps = (mean - 1.0) / (n - 1) as f64;
        Self::two_point(eps, n)
    }

    pub fn sum_of_geometric(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidDistribution("no geometric stages".into()));
        }
        rates.iter().try_for_each(|r| check_rate(*r))?;
        Ok(ParametricDist::SumOfGeometric(rates))
    }

    pub fn mixture_of_geometric(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != rates.len() {
            return Err(Error::InvalidDistribution(
                "mixture needs matching, non-empty weights and rates".into(),
            ));
        }
        rates.iter().try_for_each(|r| check_rate(*r))?;
        if weights.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidDistribution("negative mixture weight".into()));
        }
        let total = ksum(weights.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(ParametricDist::MixtureOfGeometric { weights, rates })
    }

    pub fn explicit(offset: usize, masses: Vec<f64>) -> Result<Self> {
        Ok(ParametricDist::Explicit(Pmf::new(offset, masses)?))
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            ParametricDist::Deterministic(d) => format!("deterministic({d})"),
            ParametricDist::Geometric(r) => format!("geometric({r})"),
            ParametricDist::TwoPoint { eps, n } => format!("two_point(eps={eps},N={n})"),
            ParametricDist::SumOfGeometric(r) => format!("sum_of_geometric(I={})", r.len()),
            ParametricDist::MixtureOfGeometric { rates, .. } => {
                format!("mixture_of_geometric(I={})", rates.len())
            }
            ParametricDist::Explicit(p) => {
                format!(
                    "explicit({}..={})",
                    p.offset(),
                    p.offset() + p.masses().len().saturating_sub(1)
                )
            }
        }
    }

    /// Smallest support point.
    pub fn min_support(&self) -> usize {
        match self {
            ParametricDist::Deterministic(d) => *d as usize,
            ParametricDist::Geometric(_) => 1,
            ParametricDist::TwoPoint { .. } => 1,
            ParametricDist::SumOfGeometric(r) => r.len(),
            ParametricDist::MixtureOfGeometric { .. } => 1,
            ParametricDist::Explicit(p) => p.offset(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().mean
    }

    /// Closed-form mean and second moment.
    pub fn moments(&self) -> MomentSummary {
        match self {
            ParametricDist::Deterministic(d) => {
                let d = *d as f64;
                MomentSummary::from_mean(d, d * d)
            }
            ParametricDist::Geometric(r) => MomentSummary::from_mean(1.0 / r, (2.0 - r) / (r * r)),
            ParametricDist::TwoPoint { eps, n } => {
                let n = *n as f64;
                MomentSummary::from_mean((1.0 - eps) + eps * n, (1.0 - eps) + eps * n * n)
            }
            ParametricDist::SumOfGeometric(rates) => {
                let mean = ksum(rates.iter().map(|r| 1.0 / r));
                let var = ksum(rates.iter().map(|r| (1.0 - r) / (r * r)));
                MomentSummary::from_mean(mean, var + mean * mean)
            }
            ParametricDist::MixtureOfGeometric { weights, rates } => {
                let mean = ksum(weights.iter().zip(rates).map(|(c, r)| c / r));
                let m2 = ksum(
                    weights
                        .iter()
                        .zip(rates)
                        .map(|(c, r)| c * (2.0 - r) / (r * r)),
                );
                MomentSummary::from_mean(mean, m2)
            }
            ParametricDist::Explicit(p) => MomentSummary::from_mean(p.mean(), p.second_moment()),
        }
    }

    /// Generating function `E[alpha^T]` for `alpha` in (0,1).
    pub fn gf_eval(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "generating-function argument {alpha} outside (0,1)"
            )));
        }
        Ok(self.gf_unchecked(alpha))
    }

    /// Generating function without the domain check; callers guarantee `0 < alpha < 1`.
    pub(crate) fn gf_unchecked(&self, alpha: f64) -> f64 {
        match self {
            ParametricDist::Deterministic(d) => alpha.powi(*d as i32),
            ParametricDist::Geometric(r) => geometric_gf(*r, alpha),
            ParametricDist::TwoPoint { eps, n } => {
                (1.0 - eps) * alpha + eps * alpha.powf(*n as f64)
            }
            ParametricDist::SumOfGeometric(rates) => {
                rates.iter().map(|r| geometric_gf(*r, alpha)).product()
            }
            ParametricDist::MixtureOfGeometric { weights, rates } => ksum(
                weights
                    .iter()
                    .zip(rates)
                    .map(|(c, r)| c * geometric_gf(*r, alpha)),
            ),
            ParametricDist::Explicit(p) => {
                let start = alpha.powi(p.offset() as i32);
                let mut pow = start;
                let mut acc = crate::numeric::CompensatedSum::new();
                for m in p.masses() {
                    acc.add(m * pow);
                    pow *= alpha;
                }
                acc.value()
            }
        }
    }

    /// Finite truncation with omitted tail mass at most `tail_eps`.
    ///
    /// Masses are not renormalized; the omitted mass is stored as the pmf's tail bound.
    pub fn materialize(&self, tail_eps: f64) -> Result<Pmf> {
        if !(tail_eps > 0.0 && tail_eps <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "tail_eps {tail_eps} outside (0, 1e-3]"
            )));
        }
        Ok(match self {
            ParametricDist::Deterministic(d) => Pmf::point(*d as usize),
            ParametricDist::TwoPoint { eps, n } => {
                let mut masses = vec![0.0; *n as usize];
                masses[0] = 1.0 - eps;
                masses[*n as usize - 1] = *eps;
                Pmf::from_parts(1, masses, 0.0)
            }
            ParametricDist::Geometric(r) => materialize_geometric(*r, tail_eps),
            ParametricDist::SumOfGeometric(rates) => {
                let per_stage = tail_eps / rates.len() as f64;
                rates
                    .iter()
                    .map(|r| materialize_geometric(*r, per_stage))
                    .reduce(|a, b| convolve(&a, &b))
                    .expect("non-empty stages")
            }
            ParametricDist::MixtureOfGeometric { weights, rates } => {
                let parts: Vec<Pmf> = rates
                    .iter()
                    .map(|r| materialize_geometric(*r, tail_eps))
                    .collect();
                let len = parts.iter().map(|p| p.max_support() + 1).max().unwrap_or(1);
                let mut masses = vec![0.0; len];
                let mut tail = 0.0;
                for (c, part) in weights.iter().zip(&parts) {
                    for (k, p) in part.iter() {
                        masses[k] += c * p;
                    }
                    tail += c * part.tail_bound();
                }
                Pmf::from_parts(0, masses, tail)
            }
            ParametricDist::Explicit(p) => p.clone(),
        })
    }

    /// Sampler for Monte-Carlo use.
    pub fn sampler(&self) -> Result<DistSampler> {
        Ok(match self {
            ParametricDist::Deterministic(d) => DistSampler::Constant(*d),
            ParametricDist::Geometric(r) => DistSampler::Geometric(geometric_sampler(*r)?),
            ParametricDist::TwoPoint { eps, n } => DistSampler::TwoPoint { eps: *eps, n: *n },
            ParametricDist::SumOfGeometric(rates) => DistSampler::Sum(
                rates
                    .iter()
                    .map(|r| geometric_sampler(*r))
                    .collect::<Result<_>>()?,
            ),
            ParametricDist::MixtureOfGeometric { weights, rates } => DistSampler::Mixture {
                pick: WeightedIndex::new(weights)
                    .map_err(|e| Error::InvalidDistribution(e.to_string()))?,
                parts: rates
                    .iter()
                    .map(|r| geometric_sampler(*r))
                    .collect::<Result<_>>()?,
            },
            ParametricDist::Explicit(p) => DistSampler::Table {
                offset: p.offset() as u64,
                index: WeightedIndex::new(p.masses())
                    .map_err(|e| Error::InvalidDistribution(e.to_string()))?,
            },
        })
    }
}

fn geometric_sampler(r: f64) -> Result<rand_distr::Geometric> {
    rand_distr::Geometric::new(r).map_err(|e| Error::InvalidDistribution(e.to_string()))
}

/// Geometric law on `{1..T}` with `(1-r)^T <= tail_eps`.
fn materialize_geometric(r: f64, tail_eps: f64) -> Pmf {
    let q = 1.0 - r;
    let mut masses = Vec::new();
    let mut survival = 1.0;
    while survival > tail_eps {
        masses.push(survival * r);
        survival *= q;
    }
    Pmf::from_parts(1, masses, survival)
}

/// Draws from a [`ParametricDist`].
#[derive(Debug, Clone)]
pub enum DistSampler {
    Constant(u64),
    Geometric(rand_distr::Geometric),
    TwoPoint {
        eps: f64,
        n: u64,
    },
    Sum(Vec<rand_distr::Geometric>),
    Mixture {
        pick: WeightedIndex<f64>,
        parts: Vec<rand_distr::Geometric>,
    },
    Table {
        offset: u64,
        index: WeightedIndex<f64>,
    },
}

impl Distribution<u64> for DistSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // rand_distr's geometric counts failures before the first success.
        match self {
            DistSampler::Constant(d) => *d,
            DistSampler::Geometric(g) => g.sample(rng) + 1,
            DistSampler::TwoPoint { eps, n } => {
                if rng.random::<f64>() < *eps {
                    *n
                } else {
                    1
                }
            }
            DistSampler::Sum(stages) => stages.iter().map(|g| g.sample(rng) + 1).sum(),
            DistSampler::Mixture { pick, parts } => parts[pick.sample(rng)].sample(rng) + 1,
            DistSampler::Table { offset, index } => offset + index.sample(rng) as u64,
        }
    }
}
