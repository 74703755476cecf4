//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use queuechan::analytic::{
    arrival_curve, capacity, capacity_bound_type2, capacity_no_timestamps, extremal_arrival,
    invariance_check_b0, invariance_check_b0_type2, k_coefficients_geo_g1, k_coefficients_type2,
    ordering_check, sigma_closed_form_geo, solve_sigma, stationary_from_k, stationary_g_geo1,
    BoundKind, ExtremalKind, RateConvention, StationaryDist, Truncation, CURVE_GRID, DEFAULT_Q_MAX,
};
use queuechan::coding::{run_paired, Codebook, Decoder};
use queuechan::dist::{ParametricDist, DEFAULT_TAIL_EPS};
use queuechan::noise::{symbol_pmf, Alphabet, NoiseModel};
use queuechan::sim::{
    empirical_pi, info_density_estimate, matching_stationary, simulate, ArrivalProcess, SimConfig,
};
use queuechan::sweep::{linear_grid, sweep_geo_geo, unimodal_interior_peak};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn flip_noise() -> NoiseModel {
    NoiseModel::binary_flip(0, 0.1, 0.4).unwrap()
}

fn geo(rate: f64) -> ParametricDist {
    ParametricDist::geometric(rate).unwrap()
}

fn c1_closed_form() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for mu in [0.6, 0.8, 0.95] {
        for lambda in linear_grid(0.05, 0.55, 0.05) {
            let s = solve_sigma(&geo(lambda), mu).unwrap();
            let closed = lambda * (1.0 - mu) / (mu * (1.0 - lambda));
            assert!((closed - sigma_closed_form_geo(lambda, mu).unwrap()).abs() < 1e-15);
            worst = worst.max((s - closed).abs());
            n += 1;
        }
    }
    verdict(
        worst < 1e-10,
        format!("{n} grid points, max |error| = {worst:.2e} (limit 1e-10)"),
    )
}

fn c2_figure() -> Verdict {
    let nm = flip_noise();
    let curve = |mu: f64, lambdas: &[f64]| -> Vec<f64> {
        sweep_geo_geo(lambdas, &[mu], &nm, DEFAULT_Q_MAX)
            .iter()
            .map(|r| r.capacity.expect("stable grid point"))
            .collect()
    };
    let small = [1e-2, 1e-3, 1e-4, 1e-5];
    let near_zero = curve(0.6, &small);
    let to_zero = near_zero.windows(2).all(|w| w[1] < w[0]) && near_zero[3] < 1e-5;

    let mut unimodal = true;
    for mu in [0.6, 0.8] {
        let lambdas = linear_grid(0.01, mu - 0.01 + 1e-12, 0.01);
        unimodal &= unimodal_interior_peak(&curve(mu, &lambdas));
    }
    let common = linear_grid(0.01, 0.59, 0.01);
    let (a, b) = (curve(0.6, &common), curve(0.8, &common));
    let dominance = a.iter().zip(&b).all(|(x, y)| y >= x);

    let value = curve(0.6, &[0.3])[0];
    let value_ok = (value - 0.116280).abs() <= 1e-4;
    verdict(
        to_zero && unimodal && dominance && value_ok,
        format!(
            "(a) C(1e-5) = {:.3e} decreasing to 0: {to_zero}; (b) unique interior max for mu 0.6, 0.8: {unimodal}; \
             (c) mu=0.8 dominates: {dominance}; (d) C(0.3, 0.6) = {value:.7} vs 0.116280 +- 1e-4: {value_ok}",
            near_zero[3]
        ),
    )
}

fn c3_adjudication() -> Verdict {
    let mut cfg = SimConfig::new(
        ArrivalProcess::TypeI(geo(0.3)),
        geo(0.6),
        flip_noise(),
        1_000_000,
        20_240_601,
    );
    cfg.warmup_departures = Some(100_000);
    let trace = simulate(&cfg).unwrap();
    let emp = empirical_pi(&trace, 100_000).unwrap();

    let geometric_law = stationary_g_geo1(&geo(0.3), 0.6, DEFAULT_Q_MAX).unwrap();
    let service = geo(0.6);
    let k = k_coefficients_geo_g1(0.3, &service, 400, DEFAULT_TAIL_EPS).unwrap();
    let kernel_chain = stationary_from_k(&k, 0.3, 0.6, DEFAULT_Q_MAX).unwrap();
    let (d2, d3) = (
        geometric_law.tv_distance(&emp),
        kernel_chain.tv_distance(&emp),
    );
    let matched = match (d2 < 0.01, d3 < 0.01) {
        (true, true) => "both",
        (true, false) => "G/geo/1 geometric law (pi0 = 5/7)",
        (false, true) => "geo/G/1 chain (pi0 = 0.5)",
        (false, false) => "neither",
    };
    verdict(
        d2.min(d3) < 0.01,
        format!(
            "1e6 departures, warmup 1e5; empirical pi0 = {:.4}; TV to geometric law = {d2:.4}, \
             TV to geo/G/1 chain = {d3:.4}; matches: {matched}",
            emp.prob(0)
        ),
    )
}

fn c4_recursion_oracle() -> Verdict {
    let service = ParametricDist::deterministic(2).unwrap();
    let k = k_coefficients_geo_g1(0.3, &service, 400, 1e-15).unwrap();
    let pi = stationary_from_k(&k, 0.3, 0.5, 400).unwrap();
    let m = pi.masses();
    let p1 = 0.4 * 0.51 / 0.49;
    let p2 = (p1 - (0.4 + p1) * 0.42) / 0.49;
    let errs = [(m[0] - 0.4).abs(), (m[1] - p1).abs(), (m[2] - p2).abs()];
    let values_ok = errs.iter().all(|e| *e < 1e-9);
    let oracle = common::power_iteration(&k, 400, 1e-15, 200_000);
    let d = common::tv(m, &oracle);
    verdict(
        values_ok && d < 1e-8,
        format!(
            "pi0..2 = {:.6}, {:.6}, {:.6} (max error {:.1e} vs hand recursion, limit 1e-9); \
             TV to power iteration = {d:.1e} (limit 1e-8)",
            m[0],
            m[1],
            m[2],
            errs.iter().copied().fold(0.0, f64::max)
        ),
    )
}

/// Checks `det >= sog(I) >= geo >= two-point` for I in {2, 3} with strict gaps, and
/// the curve ordering at one operating point. Returns `(all held, detail)`.
fn extremal_chain(
    lambda: f64,
    mu: f64,
    deterministic: &ExtremalKind,
    nm: &NoiseModel,
) -> (bool, String) {
    let kinds = [
        deterministic.clone(),
        ExtremalKind::SumOfGeometric { stages: 2 },
        ExtremalKind::SumOfGeometric { stages: 3 },
        ExtremalKind::Geometric,
        ExtremalKind::TwoPoint { eps: 0.01 },
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut caps: Vec<Option<(String, f64)>> = Vec::new();
    for k in &kinds {
        match extremal_arrival(k, lambda) {
            Ok(d) => {
                let sigma = solve_sigma(&d, mu).unwrap();
                let c = capacity(lambda, &StationaryDist::geometric(sigma, DEFAULT_Q_MAX), nm);
                caps.push(Some((d.label(), c.capacity_bits_per_slot)));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{k:?} not constructible ({})", e.kind()));
                caps.push(None);
            }
        }
    }
    // Indices into `kinds`: det >= each sog, each sog >= geo, geo >= two-point.
    for (hi, lo) in [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)] {
        if let (Some(a), Some(b)) = (&caps[hi], &caps[lo]) {
            let gap = a.1 - b.1;
            ok &= gap > 1e-6;
            notes.push(format!("C({}) - C({}) = {gap:.3e}", a.0, b.0));
        }
    }
    let g = geo(lambda);
    let mix = extremal_arrival(
        &ExtremalKind::MixtureOfGeometric {
            weights: vec![0.5, 0.5],
        },
        lambda,
    )
    .unwrap();
    let mut curve_ok = true;
    for stages in [2, 3] {
        if let Ok(s) = extremal_arrival(&ExtremalKind::SumOfGeometric { stages }, lambda) {
            curve_ok &= CURVE_GRID
                .iter()
                .all(|x| arrival_curve(&s, mu, *x) <= arrival_curve(&g, mu, *x) + 1e-15);
        }
    }
    curve_ok &= CURVE_GRID
        .iter()
        .all(|x| arrival_curve(&g, mu, *x) <= arrival_curve(&mix, mu, *x) + 1e-15);
    ok &= curve_ok;
    notes.push(format!(
        "curve ordering sog <= geo <= mixture on grid: {curve_ok}"
    ));
    (ok, notes.join("; "))
}

fn c5_extremal() -> Verdict {
    let nm = NoiseModel::binary_flip(1, 0.1, 0.4).unwrap();
    let (stated, detail) = extremal_chain(0.4, 0.7, &ExtremalKind::Deterministic, &nm);
    // Supplementary evidence only; the verdict is the criterion as stated.
    let lattice = {
        let kinds = [
            extremal_arrival(&ExtremalKind::Lattice, 0.4).unwrap(),
            extremal_arrival(&ExtremalKind::SumOfGeometric { stages: 2 }, 0.4).unwrap(),
            geo(0.4),
            extremal_arrival(&ExtremalKind::TwoPoint { eps: 0.01 }, 0.4).unwrap(),
        ];
        ordering_check(&kinds, 0.7, &nm).unwrap().all_hold()
    };
    let (quarter, _) = extremal_chain(0.25, 0.7, &ExtremalKind::Deterministic, &nm);
    verdict(
        stated,
        format!(
            "lambda=0.4, mu=0.7: {detail} | supplementary: lattice(2,3) in place of deterministic holds: {lattice}; \
             full chain at lambda=0.25 holds: {quarter}"
        ),
    )
}

fn c6_invariance() -> Verdict {
    let nm = flip_noise();
    let t = Truncation::default();
    let services = vec![
        ParametricDist::deterministic(2).unwrap(),
        geo(0.5),
        ParametricDist::two_point_with_mean(2.0, 0.1).unwrap(),
        ParametricDist::mixture_of_geometric(vec![0.5, 0.5], vec![0.8, 1.0 / 2.75]).unwrap(),
        ParametricDist::explicit(1, vec![0.25, 0.5, 0.25]).unwrap(),
    ];
    let a = invariance_check_b0(0.3, &services, &nm, &t).unwrap();
    let batches = vec![
        ParametricDist::explicit(0, vec![0.7, 0.3]).unwrap(),
        ParametricDist::explicit(0, vec![0.75, 0.2, 0.05]).unwrap(),
        ParametricDist::explicit(0, vec![0.8, 0.1, 0.1]).unwrap(),
        ParametricDist::explicit(0, vec![0.8, 0.15, 0.0, 0.05]).unwrap(),
        ParametricDist::explicit(0, vec![0.76, 0.2, 0.02, 0.02]).unwrap(),
    ];
    let b = invariance_check_b0_type2(&batches, &geo(0.6), &nm, &t).unwrap();
    verdict(
        a.invariant && b.invariant,
        format!(
            "service laws of mean 2: spread {:.1e} (tol {:.1e}); batch laws of mean 0.3: spread {:.1e} (tol {:.1e})",
            a.spread, a.tolerance, b.spread, b.tolerance
        ),
    )
}

fn c7_info_density() -> Verdict {
    let mut cfg = SimConfig::new(
        ArrivalProcess::TypeI(geo(0.3)),
        geo(0.6),
        flip_noise(),
        110_000,
        7_700_001,
    );
    cfg.warmup_departures = Some(10_000);
    let trace = simulate(&cfg).unwrap();
    let s = info_density_estimate(&trace, &cfg.noise).unwrap();
    let pi = matching_stationary(&cfg, &Truncation::default()).unwrap();
    let (h, _) = cfg.noise.mean_entropy(&pi);
    let target = cfg.noise.alphabet().log_size() - h;
    let z = (s.info_density_mean - target) / s.info_density_stderr;
    verdict(
        s.jobs >= 100_000 && z.abs() <= 3.0,
        format!(
            "{} jobs: mean {:.5} +- {:.5} vs analytic {target:.6}; z = {z:.2}",
            s.jobs, s.info_density_mean, s.info_density_stderr
        ),
    )
}

fn c8_coding() -> Verdict {
    let mut cfg = SimConfig::new(
        ArrivalProcess::TypeI(geo(0.3)),
        geo(0.6),
        flip_noise(),
        1,
        2024,
    );
    cfg.warmup_departures = Some(0);
    let alphabet = cfg.noise.alphabet();
    let decoders = [Decoder::WithTimestamps, Decoder::WithoutTimestamps];

    let low = Codebook::random(64, 256, alphabet, 77).unwrap();
    let a = run_paired(&low, &cfg, &decoders, 500).unwrap();
    let high = Codebook::random(16, 1 << 15, alphabet, 78).unwrap();
    let b = run_paired(&high, &cfg, &decoders, 500).unwrap();

    let (ber_low, ber_high) = (a.results[0].block_error_rate, b.results[0].block_error_rate);
    let (da, sa) = a.paired_difference(0, 1);
    let (db, sb) = b.paired_difference(0, 1);
    let paired = da <= 2.0 * sa && db <= 2.0 * sb;
    verdict(
        ber_low < 0.05 && ber_high > 0.5 && paired,
        format!(
            "500 trials each; BER(n=64,|M|=256) = {ber_low:.3} (< 0.05); BER(n=16,|M|=2^15) = {ber_high:.3} (> 0.5); \
             with - without: {da:.3} +- {sa:.3}, {db:.3} +- {sb:.3}"
        ),
    )
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn c9_no_timestamp() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst_gap = f64::INFINITY;
    let mut worst_eq: f64 = 0.0;
    let mut constant_cases = 0;
    let mut ok = true;
    for i in 0..20 {
        let size = rng.random_range(2..=5u32);
        let a = Alphabet::new(size).unwrap();
        let constant = i % 4 == 0;
        let nm = if constant {
            NoiseModel::constant(
                a,
                symbol_pmf(a, random_pmf(&mut rng, size as usize)).unwrap(),
            )
            .unwrap()
        } else {
            let states = rng.random_range(1..=4usize);
            let psis = (0..states)
                .map(|_| symbol_pmf(a, random_pmf(&mut rng, size as usize)).unwrap())
                .collect();
            let tail = symbol_pmf(a, random_pmf(&mut rng, size as usize)).unwrap();
            NoiseModel::tabulated(a, psis, tail).unwrap()
        };
        let (lambda, pi) = if i % 2 == 0 {
            let mu = rng.random_range(0.3..0.95);
            let lambda = mu * rng.random_range(0.1..0.9);
            (
                lambda,
                stationary_g_geo1(&geo(lambda), mu, DEFAULT_Q_MAX).unwrap(),
            )
        } else {
            let service = ParametricDist::explicit(1, random_pmf(&mut rng, 3)).unwrap();
            let lambda = rng.random_range(0.05..0.9) / service.mean();
            let k = k_coefficients_geo_g1(lambda, &service, 400, DEFAULT_TAIL_EPS).unwrap();
            (
                lambda,
                stationary_from_k(&k, lambda, 1.0 / service.mean(), DEFAULT_Q_MAX).unwrap(),
            )
        };
        let c = capacity(lambda, &pi, &nm).capacity_bits_per_slot;
        let c_nt = capacity_no_timestamps(lambda, &pi, &nm).capacity_bits_per_slot;
        ok &= c_nt <= c + 1e-12;
        worst_gap = worst_gap.min(c - c_nt);
        if constant {
            constant_cases += 1;
            worst_eq = worst_eq.max((c - c_nt).abs());
            ok &= (c - c_nt).abs() <= 1e-12;
        }
    }
    verdict(
        ok,
        format!(
            "20 configs; min C - C_nt = {worst_gap:.3e}; {constant_cases} constant-noise configs, max |C - C_nt| = {worst_eq:.1e}"
        ),
    )
}

fn c10_batch_bounds() -> Verdict {
    let nm = NoiseModel::binary_flip(1, 0.1, 0.4).unwrap();
    let service = geo(0.6);
    let lambda = 0.3;
    let generic = |m: &ParametricDist| -> f64 {
        let k = k_coefficients_type2(m, &service, 400, 1e-13).unwrap();
        let pi = stationary_from_k(&k, lambda, 0.6, DEFAULT_Q_MAX).unwrap();
        capacity(lambda, &pi, &nm).capacity_bits_per_slot
    };
    let bound = |b: u32, which| {
        capacity_bound_type2(lambda, &service, b, &nm, which, RateConvention::BatchMean)
            .unwrap()
            .capacity_bits_per_slot
    };
    let bern = ParametricDist::explicit(0, vec![1.0 - lambda, lambda]).unwrap();
    let bern_gap = (generic(&bern) - bound(2, BoundKind::Upper)).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut ok = bern_gap <= 1e-9;
    let mut min_lo: f64 = f64::INFINITY;
    let mut min_hi: f64 = f64::INFINITY;
    for _ in 0..10 {
        let b = rng.random_range(2..=5u32);
        let w = random_pmf(&mut rng, b as usize);
        let mean_w: f64 = w.iter().enumerate().map(|(j, p)| (j + 1) as f64 * p).sum();
        let c = lambda / mean_w;
        let mut masses = vec![1.0 - c];
        masses.extend(w.iter().map(|p| c * p));
        let m = ParametricDist::explicit(0, masses).unwrap();
        assert!((m.mean() - lambda).abs() < 1e-12);
        let g = generic(&m);
        let (lo, hi) = (bound(b, BoundKind::Lower), bound(b, BoundKind::Upper));
        min_lo = min_lo.min(g - lo);
        min_hi = min_hi.min(hi - g);
        ok &= lo <= g + 1e-12 && g <= hi + 1e-12;
    }
    verdict(
        ok,
        format!(
            "Bernoulli batch vs C_U: |diff| = {bern_gap:.1e} (limit 1e-9); 10 random batch laws: \
             min(C - C_L) = {min_lo:.3e}, min(C_U - C) = {min_hi:.3e}"
        ),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            1,
            "closed-form vs solver",
            Duration::from_secs(1),
            c1_closed_form,
        ),
        (2, "capacity curves", Duration::from_secs(1), c2_figure),
        (
            3,
            "simulation adjudication",
            Duration::from_secs(60),
            c3_adjudication,
        ),
        (
            4,
            "recursion oracle",
            Duration::from_secs(1),
            c4_recursion_oracle,
        ),
        (5, "extremal orderings", Duration::from_secs(1), c5_extremal),
        (
            6,
            "threshold-zero invariance",
            Duration::from_secs(1),
            c6_invariance,
        ),
        (
            7,
            "information-density concentration",
            Duration::from_secs(30),
            c7_info_density,
        ),
        (8, "coding crossover", Duration::from_secs(300), c8_coding),
        (
            9,
            "no-timestamp dominance",
            Duration::from_secs(1),
            c9_no_timestamp,
        ),
        (
            10,
            "batch bound consistency",
            Duration::from_secs(5),
            c10_batch_bounds,
        ),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = v.pass && in_time;
        println!(
            "criterion {id:>2} {}: {name} [{:.3} s, budget {} s{}] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            v.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria PASS");
    } else {
        println!("acceptance: FAIL for criteria {failed:?}");
        std::process::exit(1);
    }
}
