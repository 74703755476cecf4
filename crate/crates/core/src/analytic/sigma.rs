//! Fixed point of the arrival generating function for G/geo/1.

use super::{check_stability, StationaryDist};
use crate::dist::ParametricDist;
use crate::error::{Error, Result};

/// Residual tolerance `|f(sigma) - sigma|`.
pub const SIGMA_TOL: f64 = 1e-12;

/// `A~(x) = E[(1 - mu + mu x)^A]` for inter-arrival law `p_a`.
pub fn arrival_curve(p_a: &ParametricDist, mu: f64, x: f64) -> f64 {
    p_a.gf_unchecked(1.0 - mu + mu * x)
}

fn arrival_rate(p_a: &ParametricDist) -> Result<f64> {
    if p_a.min_support() < 1 {
        return Err(Error::AssumptionViolation(
            "inter-arrival times must be at least one slot".into(),
        ));
    }
    Ok(1.0 / p_a.mean())
}

/// Unique root in (0,1) of `x = E[(1 - mu + mu x)^A]`, by bisection.
pub fn solve_sigma(p_a: &ParametricDist, mu: f64) -> Result<f64> {
    let lambda = arrival_rate(p_a)?;
    check_stability(lambda, mu)?;
    let g = |x: f64| arrival_curve(p_a, mu, x) - x;

    // g(0+) > 0 always; near 1 the slope of f exceeds one, so g < 0 for small delta.
    let mut delta = 1e-6;
    let (mut lo, mut hi) = loop {
        let (a, b) = (delta, 1.0 - delta);
        if g(a) > 0.0 && g(b) < 0.0 {
            break (a, b);
        }
        delta *= 1e-2;
        if delta < 1e-14 {
            return Err(Error::NoBracket);
        }
    };

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let residual = g(sigma).abs();
    if residual > SIGMA_TOL {
        log::warn!("sigma residual {residual:e} above tolerance");
    }
    Ok(sigma)
}

/// `lambda (1 - mu) / (mu (1 - lambda))`, the fixed point for geometric arrivals.
pub fn sigma_closed_form_geo(lambda: f64, mu: f64) -> Result<f64> {
    check_stability(lambda, mu)?;
    Ok(lambda * (1.0 - mu) / (mu * (1.0 - lambda)))
}

/// Geometric departure law `pi_q = (1 - sigma) sigma^q` of the G/geo/1 queue.
pub fn stationary_g_geo1(p_a: &ParametricDist, mu: f64, q_max: usize) -> Result<StationaryDist> {
    if q_max < 1 {
        return Err(Error::InvalidParameter("q_max must be at least 1".into()));
    }
    let sigma = solve_sigma(p_a, mu)?;
    Ok(StationaryDist::geometric(sigma, q_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn geometric_arrivals_match_closed_form() {
        let s = solve_sigma(&ParametricDist::geometric(0.3).unwrap(), 0.6).unwrap();
        assert_abs_diff_eq!(s, 2.0 / 7.0, epsilon = 1e-12);
        let s = solve_sigma(&ParametricDist::geometric(0.59).unwrap(), 0.6).unwrap();
        assert_abs_diff_eq!(s, 0.59 * 0.4 / (0.6 * 0.41), epsilon = 1e-10);
        assert_abs_diff_eq!(s, 0.959350, epsilon = 1e-6);
    }

    #[test]
    fn deterministic_two_is_quadratic_root() {
        // x = (0.4 + 0.6 x)^2  =>  0.36 x^2 - 0.52 x + 0.16 = 0, roots 1 and 4/9.
        let s = solve_sigma(&ParametricDist::deterministic(2).unwrap(), 0.6).unwrap();
        assert_abs_diff_eq!(s, 4.0 / 9.0, epsilon = 1e-12);
        let pi = stationary_g_geo1(&ParametricDist::deterministic(2).unwrap(), 0.6, 10).unwrap();
        assert_abs_diff_eq!(pi.masses()[0], 5.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.masses()[1], 20.0 / 81.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(
            sigma_closed_form_geo(0.3, 0.6).unwrap(),
            2.0 / 7.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            sigma_closed_form_geo(0.5, 0.95).unwrap(),
            1.0 / 19.0,
            epsilon = 1e-15
        );
        assert!(sigma_closed_form_geo(0.49999, 0.99999).unwrap() < 1e-4);
        assert!(matches!(
            sigma_closed_form_geo(0.6, 0.6),
            Err(Error::StabilityViolation { .. })
        ));
    }

    #[test]
    fn rejects_unstable_and_degenerate() {
        let a = ParametricDist::geometric(0.7).unwrap();
        assert!(matches!(
            solve_sigma(&a, 0.6),
            Err(Error::StabilityViolation { .. })
        ));
        let a = ParametricDist::geometric(0.3).unwrap();
        assert!(matches!(
            solve_sigma(&a, 1.0),
            Err(Error::StabilityViolation { .. })
        ));
        let zero = ParametricDist::explicit(0, vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            solve_sigma(&zero, 0.9),
            Err(Error::AssumptionViolation(_))
        ));
    }

    #[test]
    fn residual_and_geometric_form() {
        let dists = [
            ParametricDist::deterministic(3).unwrap(),
            ParametricDist::two_point_with_mean(2.5, 0.01).unwrap(),
            ParametricDist::sum_of_geometric(vec![0.8, 0.8]).unwrap(),
            ParametricDist::mixture_of_geometric(vec![0.5, 0.5], vec![0.8, 0.3]).unwrap(),
        ];
        for d in dists {
            let mu = (1.0 / d.mean() + 0.2).min(0.95);
            let s = solve_sigma(&d, mu).unwrap();
            assert!(s > 0.0 && s < 1.0);
            assert!(
                (arrival_curve(&d, mu, s) - s).abs() <= SIGMA_TOL,
                "{}",
                d.label()
            );
            let pi = StationaryDist::geometric(s, 50);
            assert_eq!(pi.masses()[0], 1.0 - s);
        }
    }

    #[test]
    fn arrival_curve_increasing_convex() {
        let d = ParametricDist::two_point(0.3, 5).unwrap();
        let h = 1e-3;
        for i in 1..999 {
            let x = i as f64 * h;
            let (a, b, c) = (
                arrival_curve(&d, 0.7, x - h),
                arrival_curve(&d, 0.7, x),
                arrival_curve(&d, 0.7, x + h),
            );
            assert!(c > b && b > a);
            assert!(a + c - 2.0 * b > -1e-14);
        }
    }
}
