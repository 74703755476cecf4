#![allow(dead_code)]

use queuechan::analytic::KCoefficients;

/// Stationary law of the departure chain `P(0, j) = k_j`, `P(i, j) = k_{j-i+1}` truncated to
/// `n` states (mass beyond the last state is folded into it), by power iteration from the
/// uniform law.
pub fn power_iteration(k: &KCoefficients, n: usize, tol: f64, max_iter: usize) -> Vec<f64> {
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        for (i, &w) in pi.iter().enumerate() {
            let shift = i.saturating_sub(1);
            let mut placed = 0.0;
            for (d, &kd) in k.k.iter().enumerate() {
                let j = shift + d;
                if j >= n - 1 {
                    break;
                }
                next[j] += w * kd;
                placed += kd;
            }
            next[n - 1] += w * (1.0 - placed).max(0.0);
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < tol {
            break;
        }
    }
    pi
}

/// Total-variation distance between two mass vectors, padding the shorter with zeros.
pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

pub fn flip_noise_json() -> &'static str {
    r#"{"alphabet":2,"kind":"thresholded","b":0,"psi_low":[0.9,0.1],"psi_high":[0.6,0.4]}"#
}
