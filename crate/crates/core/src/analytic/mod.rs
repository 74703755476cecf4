//! Closed-form and semi-analytic capacity results.
//!
//! * [`sigma`]: the G/geo/1 fixed point and its geometric departure law.
//! * [`stationary`]: arrivals-per-service kernels and the embedded departure chain
//!   for geo/G/1 and batch (Type II) arrivals.
//! * [`capacity`]: capacity with and without timestamps, plus the batch-arrival bounds.
//! * [`extremal`]: extremal arrival/service constructions and ordering checks.

pub mod capacity;
pub mod extremal;
pub mod sigma;
pub mod stationary;

pub use capacity::{
    capacity, capacity_bound_from_m0, capacity_bound_type2, capacity_no_timestamps, BoundKind,
    CapacityMethod, CapacityReport, RateConvention,
};
pub use extremal::{
    extremal_arrival, invariance_check_b0, invariance_check_b0_type2, ordering_check,
    ordering_check_with, ExtremalKind, InvarianceReport, OrderingFlag, OrderingRow, OrderingTable,
    CURVE_GRID,
};
pub use sigma::{arrival_curve, sigma_closed_form_geo, solve_sigma, stationary_g_geo1};
pub use stationary::{
    k_coefficients_geo_g1, k_coefficients_type2, stationary_from_k, stationary_from_k_with,
    KCoefficients, KSource, RecursionMethod, StationaryDist, StationaryForm,
};

/// Default stationary-law truncation.
pub const DEFAULT_Q_MAX: usize = 200;
/// Default kernel truncation.
pub const DEFAULT_J_MAX: usize = 200;

/// Truncation knobs shared by the kernel and recursion pipelines.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Truncation {
    pub q_max: usize,
    pub j_max: usize,
    pub tail_eps: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            q_max: DEFAULT_Q_MAX,
            j_max: DEFAULT_J_MAX,
            tail_eps: crate::dist::DEFAULT_TAIL_EPS,
        }
    }
}

pub(crate) fn check_stability(lambda: f64, mu: f64) -> crate::error::Result<()> {
    if lambda > 0.0 && lambda < mu && mu < 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(crate::error::Error::StabilityViolation { lambda, mu })
    }
}
