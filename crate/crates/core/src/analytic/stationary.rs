//! Embedded departure chain of geo/G/1 and batch-arrival queues.
//!
//! With `k_j` the probability of `j` arrivals during one service time, the chain
//! moves `0 -> j` and `q -> q - 1 + j` (q >= 1) with probability `k_j`. Its
//! stationary law has `pi_0 = 1 - lambda/mu`.

use serde::{Deserialize, Serialize};

use super::check_stability;
use crate::dist::{ParametricDist, Pmf};
use crate::error::{Error, Result};
use crate::numeric::{ksum, CompensatedSum};

/// Which kernel produced a set of k coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSource {
    /// Bernoulli arrivals, general service.
    GeoG1,
    /// Batch arrivals per slot.
    TypeII,
}

/// Arrivals-per-service kernel `k_0..k_J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCoefficients {
    pub k: Vec<f64>,
    /// Upper bound on `sum_{j > J} k_j` plus any service-law truncation.
    pub tail_bound: f64,
    pub source: KSource,
}

impl KCoefficients {
    pub fn k0(&self) -> f64 {
        self.k[0]
    }

    /// `K'(1) = sum_j j k_j`, the mean number of arrivals per service.
    pub fn mean(&self) -> f64 {
        ksum(self.k.iter().enumerate().map(|(j, k)| j as f64 * k))
    }

    /// `K(z) = sum_j k_j z^j`.
    pub fn eval(&self, z: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut pow = 1.0;
        for k in &self.k {
            acc.add(k * pow);
            pow *= z;
        }
        acc.value()
    }

    /// Tail sums `kbar_n = sum_{j >= n} k_j` for `n = 0..=len`.
    fn tail_sums(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len + 1];
        let mut acc = CompensatedSum::new();
        for j in (0..self.k.len()).rev() {
            acc.add(self.k[j]);
            if j <= len {
                out[j] = acc.value();
            }
        }
        out
    }
}

fn check_j_max(j_max: usize) -> Result<()> {
    if j_max < 1 {
        return Err(Error::InvalidParameter("j_max must be at least 1".into()));
    }
    Ok(())
}

fn service_rate(p_s: &ParametricDist) -> Result<f64> {
    if p_s.min_support() < 1 {
        return Err(Error::AssumptionViolation(
            "service times must be at least one slot".into(),
        ));
    }
    Ok(1.0 / p_s.mean())
}

/// `k_j = sum_t C(t, j) (1 - lambda)^(t - j) lambda^j p_S(t)` for Bernoulli(lambda) arrivals.
pub fn k_coefficients_geo_g1(
    lambda: f64,
    p_s: &ParametricDist,
    j_max: usize,
    tail_eps: f64,
) -> Result<KCoefficients> {
    check_j_max(j_max)?;
    service_rate(p_s)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "arrival probability {lambda} outside (0,1)"
        )));
    }
    let service = p_s.materialize(tail_eps)?;
    let (ln_l, ln_nl) = (lambda.ln(), (1.0 - lambda).ln());

    let mut acc = vec![CompensatedSum::new(); j_max + 1];
    for (t, p) in service.iter() {
        if p == 0.0 {
            continue;
        }
        // log C(t, j) built incrementally.
        let mut ln_binom = 0.0;
        for j in 0..=t.min(j_max) {
            if j > 0 {
                ln_binom += ((t - j + 1) as f64).ln() - (j as f64).ln();
            }
            let ln_term = ln_binom + j as f64 * ln_l + (t - j) as f64 * ln_nl;
            acc[j].add(p * ln_term.exp());
        }
    }
    finish_k(acc, &service, KSource::GeoG1)
}

/// `k_j = sum_t P(N_1 + ... + N_t = j) p_S(t)` with i.i.d. batch sizes `N_i ~ m_A`.
pub fn k_coefficients_type2(
    m_a: &ParametricDist,
    p_s: &ParametricDist,
    j_max: usize,
    tail_eps: f64,
) -> Result<KCoefficients> {
    check_j_max(j_max)?;
    let batch = m_a.materialize(tail_eps)?;
    if batch.prob(1) <= 0.0 {
        return Err(Error::AssumptionViolation(
            "batch law must put mass on a single arrival (m_A(1) > 0)".into(),
        ));
    }
    let lambda = m_a.mean();
    let mu = service_rate(p_s)?;
    if !(lambda < mu) {
        return Err(Error::StabilityViolation { lambda, mu });
    }
    let service = p_s.materialize(tail_eps)?;
    let batch_dense = batch.dense((batch.max_support() + 1).min(j_max + 1));

    let mut acc = vec![CompensatedSum::new(); j_max + 1];
    // Law of the number of arrivals in t slots, truncated at j_max.
    let mut arrivals = vec![0.0; j_max + 1];
    arrivals[0] = 1.0;
    let mut t_done = 0;
    for (t, p) in service.iter() {
        while t_done < t {
            arrivals = truncated_convolve(&arrivals, &batch_dense, j_max + 1);
            t_done += 1;
        }
        for (j, a) in arrivals.iter().enumerate() {
            acc[j].add(p * a);
        }
    }
    finish_k(acc, &service, KSource::TypeII)
}

fn truncated_convolve(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn finish_k(acc: Vec<CompensatedSum>, service: &Pmf, source: KSource) -> Result<KCoefficients> {
    let mut k: Vec<f64> = acc.iter().map(|c| c.value()).collect();
    while k.len() > 1 && k.last() == Some(&0.0) {
        k.pop();
    }
    if k[0] <= 0.0 {
        return Err(Error::AssumptionViolation(
            "k_0 = 0: a service always sees an arrival".into(),
        ));
    }
    let covered = ksum(k.iter().copied());
    let kept = 1.0 - service.tail_bound();
    let tail_bound = service.tail_bound() + (kept - covered).max(0.0);
    Ok(KCoefficients {
        k,
        tail_bound,
        source,
    })
}

/// How the departure-chain law is computed from the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecursionMethod {
    /// Level-crossing balance across the cut `{0..n-1} | {n..}`:
    /// `pi_n k_0 = pi_0 kbar_n + sum_{i=1}^{n-1} pi_i kbar_{n-i+1}`.
    /// Only non-negative terms are added.
    #[default]
    LevelCrossing,
    /// Forward solve of the global balance equations,
    /// `pi_{q+1} = (pi_q - pi_0 k_q - sum_{j=1}^{q} pi_j k_{q-j+1}) / k_0`.
    /// Loses roughly a factor `1/k_0` of accuracy per step.
    ForwardBalance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum StationaryForm {
    Geometric { sigma: f64 },
    Recursive { source: KSource },
    Empirical,
}

/// Truncated departure queue-length law `pi_0..pi_K` with certified tail bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDist {
    masses: Vec<f64>,
    tail_bound: f64,
    form: StationaryForm,
}

impl StationaryDist {
    /// `pi_q = (1 - sigma) sigma^q` for `q <= q_max`; tail `sigma^(q_max + 1)`.
    pub fn geometric(sigma: f64, q_max: usize) -> Self {
        let mut masses = Vec::with_capacity(q_max + 1);
        let mut pow = 1.0;
        for _ in 0..=q_max {
            masses.push((1.0 - sigma) * pow);
            pow *= sigma;
        }
        StationaryDist {
            masses,
            tail_bound: pow,
            form: StationaryForm::Geometric { sigma },
        }
    }

    /// Arbitrary truncated law; used for tests and hand-built inputs.
    pub fn recursive(masses: Vec<f64>, tail_bound: f64) -> Self {
        StationaryDist {
            masses,
            tail_bound,
            form: StationaryForm::Recursive {
                source: KSource::GeoG1,
            },
        }
    }

    /// Law taken from a histogram.
    pub fn from_pmf(pmf: &Pmf) -> Self {
        StationaryDist {
            masses: pmf.dense(pmf.max_support() + 1),
            tail_bound: pmf.tail_bound(),
            form: StationaryForm::Empirical,
        }
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn form(&self) -> StationaryForm {
        self.form
    }

    pub fn pi0(&self) -> f64 {
        self.masses[0]
    }

    /// Mass not covered by the stored entries, `max(0, 1 - sum pi)`.
    pub fn residual_mass(&self) -> f64 {
        match self.form {
            StationaryForm::Geometric { .. } => self.tail_bound,
            _ => (1.0 - ksum(self.masses.iter().copied())).max(0.0),
        }
    }

    /// `P(Q >= q)`, with the residual counted as mass beyond the truncation.
    pub fn survival(&self, q: usize) -> f64 {
        ksum(self.masses.iter().skip(q).copied()) + self.residual_mass()
    }

    /// Stored masses as a [`Pmf`] (offset 0) carrying the residual as its tail.
    pub fn to_pmf(&self) -> Pmf {
        Pmf::from_parts(0, self.masses.clone(), self.residual_mass())
    }

    /// Total variation distance to a pmf, counting the residual as unmatched mass.
    pub fn tv_distance(&self, other: &Pmf) -> f64 {
        let hi = other.max_support().max(self.masses.len());
        let mut acc = CompensatedSum::new();
        for q in 0..=hi {
            let mine = self.masses.get(q).copied().unwrap_or(0.0);
            acc.add((mine - other.prob(q)).abs());
        }
        0.5 * (acc.value() + self.residual_mass())
    }
}

/// Departure-chain law from the kernel, using [`RecursionMethod::LevelCrossing`].
pub fn stationary_from_k(
    k: &KCoefficients,
    lambda: f64,
    mu: f64,
    q_max: usize,
) -> Result<StationaryDist> {
    stationary_from_k_with(k, lambda, mu, q_max, RecursionMethod::default())
}

/// Slack below which negative iterates are clamped rather than rejected.
const NEGATIVE_SLACK: f64 = 1e-9;

pub fn stationary_from_k_with(
    k: &KCoefficients,
    lambda: f64,
    mu: f64,
    q_max: usize,
    method: RecursionMethod,
) -> Result<StationaryDist> {
    check_stability(lambda, mu)?;
    if q_max < 1 {
        return Err(Error::InvalidParameter("q_max must be at least 1".into()));
    }
    let k0 = k.k0();
    if k0 <= 0.0 {
        return Err(Error::AssumptionViolation("k_0 must be positive".into()));
    }
    let pi0 = 1.0 - lambda / mu;
    let mut pi = Vec::with_capacity(q_max + 1);
    pi.push(pi0);

    match method {
        RecursionMethod::LevelCrossing => {
            let kbar = k.tail_sums(q_max + 1);
            for n in 1..=q_max {
                let mut acc = CompensatedSum::new();
                acc.add(pi0 * kbar[n]);
                for i in 1..n {
                    acc.add(pi[i] * kbar[n - i + 1]);
                }
                pi.push(acc.value() / k0);
            }
        }
        RecursionMethod::ForwardBalance => {
            let kj = |j: usize| k.k.get(j).copied().unwrap_or(0.0);
            for q in 0..q_max {
                let mut acc = CompensatedSum::new();
                acc.add(pi[q]);
                acc.add(-pi0 * kj(q));
                for j in 1..=q {
                    acc.add(-pi[j] * kj(q - j + 1));
                }
                let mut next = acc.value() / k0;
                if next < -NEGATIVE_SLACK {
                    return Err(Error::RecursionUnstable {
                        q: q + 1,
                        value: next,
                    });
                }
                if next < 0.0 {
                    next = 0.0;
                }
                pi.push(next);
            }
        }
    }

    let total = ksum(pi.iter().copied());
    let tail_bound = (1.0 - total).max(0.0) + k.tail_bound;
    Ok(StationaryDist {
        masses: pi,
        tail_bound,
        form: StationaryForm::Recursive { source: k.source },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn det(d: u64) -> ParametricDist {
        ParametricDist::deterministic(d).unwrap()
    }

    #[test]
    fn k_examples_geo_g1() {
        let k = k_coefficients_geo_g1(0.3, &det(2), 50, 1e-10).unwrap();
        assert_eq!(k.k.len(), 3);
        assert_abs_diff_eq!(k.k[0], 0.49, epsilon = 1e-15);
        assert_abs_diff_eq!(k.k[1], 0.42, epsilon = 1e-15);
        assert_abs_diff_eq!(k.k[2], 0.09, epsilon = 1e-15);

        let k = k_coefficients_geo_g1(0.37, &det(1), 50, 1e-10).unwrap();
        assert_abs_diff_eq!(k.k[0], 0.63, epsilon = 1e-15);
        assert_abs_diff_eq!(k.k[1], 0.37, epsilon = 1e-15);

        // k_0 = E[(1 - lambda)^S].
        let geo = ParametricDist::geometric(0.6).unwrap();
        let k = k_coefficients_geo_g1(0.5, &geo, 200, 1e-12).unwrap();
        assert_abs_diff_eq!(k.k0(), geo.gf_eval(0.5).unwrap(), epsilon = 1e-11);
    }

    #[test]
    fn k_geometric_service() {
        let geo = ParametricDist::geometric(0.5).unwrap();
        let k = k_coefficients_geo_g1(0.5, &geo, 200, 1e-12).unwrap();
        assert_abs_diff_eq!(k.k0(), 1.0 / 3.0, epsilon = 1e-11);
        let k = k_coefficients_geo_g1(0.4, &geo, 200, 1e-12).unwrap();
        assert_abs_diff_eq!(k.k0(), geo.gf_eval(0.6).unwrap(), epsilon = 1e-11);
    }

    #[test]
    fn k_type2_examples() {
        let bern = ParametricDist::explicit(0, vec![0.7, 0.3]).unwrap();
        let k = k_coefficients_type2(&bern, &det(2), 50, 1e-10).unwrap();
        assert_abs_diff_eq!(k.k[0], 0.49, epsilon = 1e-15);
        assert_abs_diff_eq!(k.k[1], 0.42, epsilon = 1e-15);
        assert_abs_diff_eq!(k.k[2], 0.09, epsilon = 1e-15);

        let m = ParametricDist::explicit(0, vec![0.8, 0.1, 0.1]).unwrap();
        let k = k_coefficients_type2(&m, &det(1), 50, 1e-10).unwrap();
        assert_eq!(k.k, vec![0.8, 0.1, 0.1]);

        let unit = ParametricDist::explicit(1, vec![1.0]).unwrap();
        assert!(k_coefficients_type2(&unit, &det(2), 10, 1e-10).is_err());
        let no_single = ParametricDist::explicit(0, vec![0.9, 0.0, 0.1]).unwrap();
        assert!(matches!(
            k_coefficients_type2(&no_single, &det(2), 10, 1e-10),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn bernoulli_batches_reproduce_bernoulli_arrivals() {
        let services = [
            ParametricDist::geometric(0.45).unwrap(),
            ParametricDist::two_point_with_mean(2.0, 0.1).unwrap(),
            ParametricDist::sum_of_geometric(vec![0.7, 0.9]).unwrap(),
        ];
        for s in services {
            let a = k_coefficients_geo_g1(0.3, &s, 120, 1e-12).unwrap();
            let bern = ParametricDist::explicit(0, vec![0.7, 0.3]).unwrap();
            let b = k_coefficients_type2(&bern, &s, 120, 1e-12).unwrap();
            for j in 0..a.k.len().max(b.k.len()) {
                let (x, y) = (
                    a.k.get(j).copied().unwrap_or(0.0),
                    b.k.get(j).copied().unwrap_or(0.0),
                );
                assert_abs_diff_eq!(x, y, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn wald_identity() {
        let s = ParametricDist::mixture_of_geometric(vec![0.5, 0.5], vec![0.6, 0.4]).unwrap();
        let lambda = 0.2;
        let k = k_coefficients_geo_g1(lambda, &s, 200, 1e-12).unwrap();
        assert_abs_diff_eq!(k.mean(), lambda * s.mean(), epsilon = 1e-9);
        let m = ParametricDist::explicit(0, vec![0.8, 0.15, 0.05]).unwrap();
        let k = k_coefficients_type2(&m, &s, 200, 1e-12).unwrap();
        assert_abs_diff_eq!(k.mean(), m.mean() * s.mean(), epsilon = 1e-9);
        assert_abs_diff_eq!(k.eval(1.0) + k.tail_bound, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn recursion_example() {
        let k = k_coefficients_geo_g1(0.3, &det(2), 50, 1e-10).unwrap();
        for method in [
            RecursionMethod::LevelCrossing,
            RecursionMethod::ForwardBalance,
        ] {
            let pi = stationary_from_k_with(&k, 0.3, 0.5, 10, method).unwrap();
            assert_eq!(pi.pi0(), 0.4);
            assert_abs_diff_eq!(pi.masses()[1], 0.4 * 0.51 / 0.49, epsilon = 1e-15);
            assert_abs_diff_eq!(pi.masses()[1], 0.416327, epsilon = 1e-6);
            assert_abs_diff_eq!(pi.masses()[2], 0.149938, epsilon = 1e-6);
            assert_abs_diff_eq!(pi.masses()[0] + pi.masses()[1], 0.4 / 0.49, epsilon = 1e-15);
        }
    }

    #[test]
    fn forward_balance_loses_relative_accuracy_at_depth() {
        let k = k_coefficients_geo_g1(0.3, &det(2), 50, 1e-10).unwrap();
        let stable = stationary_from_k(&k, 0.3, 0.5, 200).unwrap();
        assert!((ksum(stable.masses().iter().copied()) - 1.0).abs() < 1e-12);
        assert!(stable.masses().iter().all(|p| *p > 0.0));
        let forward =
            stationary_from_k_with(&k, 0.3, 0.5, 200, RecursionMethod::ForwardBalance).unwrap();
        for (a, b) in stable.masses().iter().zip(forward.masses()) {
            assert!((a - b).abs() < 1e-12);
        }
        let (a, b) = (stable.masses()[200], forward.masses()[200]);
        assert!(
            (a - b).abs() > a,
            "deep forward iterate unexpectedly accurate"
        );
    }

    #[test]
    fn mass_and_prop5_identity() {
        let services = [
            det(3),
            ParametricDist::geometric(0.4).unwrap(),
            ParametricDist::two_point_with_mean(2.5, 0.05).unwrap(),
        ];
        for s in services {
            let mu = 1.0 / s.mean();
            let lambda = 0.6 * mu;
            let k = k_coefficients_geo_g1(lambda, &s, 200, 1e-12).unwrap();
            let pi = stationary_from_k(&k, lambda, mu, 200).unwrap();
            let total = ksum(pi.masses().iter().copied()) + pi.tail_bound();
            assert!((total - 1.0).abs() < 1e-6, "{}: {total}", s.label());
            assert_eq!(pi.pi0(), 1.0 - lambda / mu);
            assert_abs_diff_eq!(
                pi.masses()[0] + pi.masses()[1],
                (1.0 - lambda / mu) / k.k0(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn recursion_rejects_bad_inputs() {
        let k = k_coefficients_geo_g1(0.3, &det(2), 50, 1e-10).unwrap();
        assert!(matches!(
            stationary_from_k(&k, 0.5, 0.5, 10),
            Err(Error::StabilityViolation { .. })
        ));
        assert!(k_coefficients_geo_g1(0.3, &det(2), 0, 1e-10).is_err());
    }
}
