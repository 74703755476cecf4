use super::engine::{ArrivalProcess, ServiceStart, SimConfig};
use crate::analytic::{
    k_coefficients_geo_g1, k_coefficients_type2, stationary_from_k, stationary_g_geo1,
    StationaryDist, Truncation,
};
use crate::dist::ParametricDist;
use crate::error::{Error, Result};

/// Analytic departure law that the simulator reproduces for `cfg`.
///
/// * Same-slot start with geometric service: the geometric law from the arrival-curve
///   fixed point, for any inter-arrival law.
/// * Next-slot start with Bernoulli arrivals (Type I geometric, or Type II batches of at
///   most one): the kernel chain with `pi_0 = 1 - lambda/mu`, for any service law.
pub fn matching_stationary(cfg: &SimConfig, trunc: &Truncation) -> Result<StationaryDist> {
    let mu = 1.0 / cfg.service.mean();
    match (&cfg.arrival, cfg.service_start, &cfg.service) {
        (ArrivalProcess::TypeI(a), ServiceStart::SameSlot, ParametricDist::Geometric(m)) => {
            stationary_g_geo1(a, *m, trunc.q_max)
        }
        (ArrivalProcess::TypeI(ParametricDist::Geometric(lambda)), ServiceStart::NextSlot, s) => {
            let k = k_coefficients_geo_g1(*lambda, s, trunc.j_max, trunc.tail_eps)?;
            stationary_from_k(&k, *lambda, mu, trunc.q_max)
        }
        (ArrivalProcess::TypeII(m), ServiceStart::NextSlot, s)
            if m.materialize(trunc.tail_eps)?.max_support() <= 1 =>
        {
            let k = k_coefficients_type2(m, s, trunc.j_max, trunc.tail_eps)?;
            stationary_from_k(&k, m.mean(), mu, trunc.q_max)
        }
        _ => Err(Error::AssumptionViolation(
            "no closed-form departure law matches this arrival/service/start combination".into(),
        )),
    }
}
