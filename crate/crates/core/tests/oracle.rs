mod common;

use common::{power_iteration, tv};
use queuechan::analytic::{
    k_coefficients_geo_g1, k_coefficients_type2, stationary_from_k, stationary_from_k_with,
    RecursionMethod,
};
use queuechan::dist::{ParametricDist, DEFAULT_TAIL_EPS};

/// Kernel truncation for oracle comparisons; the truncated chain folds missing mass into its
/// last state, so the kernel must be nearly complete.
const ORACLE_EPS: f64 = 1e-15;

#[test]
fn deterministic_service_matches_hand_recursion() {
    let k = k_coefficients_geo_g1(
        0.3,
        &ParametricDist::deterministic(2).unwrap(),
        200,
        DEFAULT_TAIL_EPS,
    )
    .unwrap();
    let pi = stationary_from_k(&k, 0.3, 0.5, 200).unwrap();
    let m = pi.masses();
    let p1 = 0.4 * 0.51 / 0.49;
    let p2 = (p1 - (0.4 + p1) * 0.42) / 0.49;
    assert!((m[0] - 0.4).abs() < 1e-9);
    assert!((m[1] - p1).abs() < 1e-9);
    assert!((m[2] - p2).abs() < 1e-9);
}

#[test]
fn recursion_matches_power_iteration() {
    let cases = [
        (0.3, ParametricDist::deterministic(2).unwrap()),
        (0.3, ParametricDist::geometric(0.6).unwrap()),
        (0.2, ParametricDist::two_point_with_mean(3.0, 0.3).unwrap()),
        (
            0.25,
            ParametricDist::explicit(1, vec![0.25, 0.5, 0.25]).unwrap(),
        ),
    ];
    for (lambda, service) in cases {
        let mu = 1.0 / service.mean();
        let k = k_coefficients_geo_g1(lambda, &service, 400, ORACLE_EPS).unwrap();
        let oracle = power_iteration(&k, 400, 1e-15, 200_000);
        for method in [
            RecursionMethod::LevelCrossing,
            RecursionMethod::ForwardBalance,
        ] {
            let pi = stationary_from_k_with(&k, lambda, mu, 400, method).unwrap();
            let d = tv(pi.masses(), &oracle);
            assert!(d < 1e-8, "{} {method:?}: tv {d:e}", service.label());
        }
    }
}

#[test]
fn batch_chain_matches_power_iteration() {
    let batch = ParametricDist::explicit(0, vec![0.8, 0.15, 0.05]).unwrap();
    let service = ParametricDist::geometric(0.7).unwrap();
    let k = k_coefficients_type2(&batch, &service, 400, ORACLE_EPS).unwrap();
    let pi = stationary_from_k(&k, batch.mean(), 0.7, 400).unwrap();
    let oracle = power_iteration(&k, 400, 1e-15, 200_000);
    assert!(tv(pi.masses(), &oracle) < 1e-8);
}
