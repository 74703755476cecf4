//! Random codebooks sent through the simulated queue-channel with maximum-likelihood decoding.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::Truncation;
use crate::dist::Pmf;
use crate::error::{Error, Result};
use crate::noise::Alphabet;
use crate::numeric::fmt_sig;
use crate::sim::rng::{derive_seed, stream_rng, Stream};
use crate::sim::{matching_stationary, reconstruct_queue, simulate, InputSource, SimConfig};

/// Largest codebook the exhaustive decoder accepts.
pub const MAX_MESSAGES: usize = 1 << 20;

const TIE_TOL: f64 = 1e-9;

const CODEBOOK_SALT: u64 = 0xC0DE_B00C;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub messages: usize,
    pub alphabet: Alphabet,
    pub seed: u64,
    symbols: Vec<u32>,
}

impl Codebook {
    /// `messages` codewords of length `n` with i.i.d. uniform symbols.
    pub fn random(n: usize, messages: usize, alphabet: Alphabet, seed: u64) -> Result<Self> {
        check_size(n, messages)?;
        let mut rng = stream_rng(seed, Stream::Coding);
        let symbols = (0..n * messages)
            .map(|_| rng.random_range(0..alphabet.size()))
            .collect();
        Ok(Codebook {
            n,
            messages,
            alphabet,
            seed,
            symbols,
        })
    }

    pub fn from_codewords(alphabet: Alphabet, codewords: Vec<Vec<u32>>) -> Result<Self> {
        let n = codewords.first().map_or(0, Vec::len);
        check_size(n, codewords.len())?;
        if codewords.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidParameter("codewords differ in length".into()));
        }
        if codewords.iter().flatten().any(|s| *s >= alphabet.size()) {
            return Err(Error::InvalidParameter(
                "codeword symbol outside alphabet".into(),
            ));
        }
        Ok(Codebook {
            n,
            messages: codewords.len(),
            alphabet,
            seed: 0,
            symbols: codewords.concat(),
        })
    }

    pub fn codeword(&self, m: usize) -> &[u32] {
        &self.symbols[m * self.n..(m + 1) * self.n]
    }

    /// `log2 |M| / n`.
    pub fn rate_per_symbol(&self) -> f64 {
        (self.messages as f64).log2() / self.n as f64
    }
}

fn check_size(n: usize, messages: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be positive".into(),
        ));
    }
    if messages == 0 || messages > MAX_MESSAGES {
        return Err(Error::InvalidParameter(format!(
            "message count {messages} outside 1..={MAX_MESSAGES}"
        )));
    }
    Ok(())
}

/// Index of the most likely codeword given per-position noise laws; ties go to the lowest index.
pub fn ml_decode(cb: &Codebook, outputs: &[u32], laws: &[&Pmf]) -> usize {
    let f = cb.alphabet.size() as usize;
    let table: Vec<f64> = laws
        .iter()
        .flat_map(|psi| (0..f).map(|z| psi.prob(z).ln()))
        .collect();
    // Scores equal up to summation order count as ties.
    let slack = |best: f64| {
        if best.is_finite() {
            TIE_TOL * (1.0 + best.abs())
        } else {
            0.0
        }
    };
    let mut best = (0, f64::NEG_INFINITY);
    for m in 0..cb.messages {
        let mut score = 0.0;
        for (i, (x, y)) in cb.codeword(m).iter().zip(outputs).enumerate() {
            score += table[i * f + cb.alphabet.sub(*y, *x) as usize];
            if score < best.1 - slack(best.1) {
                break;
            }
        }
        if score > best.1 + slack(best.1) {
            best = (m, score);
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    /// Knows every `Q_i`, recovered from arrival and departure timestamps.
    WithTimestamps,
    /// Uses the stationary mixture of noise laws at every position.
    WithoutTimestamps,
}

impl Decoder {
    pub fn name(self) -> &'static str {
        match self {
            Decoder::WithTimestamps => "with_timestamps",
            Decoder::WithoutTimestamps => "without_timestamps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub decoder: Decoder,
    pub n: usize,
    pub messages: usize,
    pub trials: usize,
    pub errors: usize,
    pub block_error_rate: f64,
    /// Wilson 95% interval for the block error rate.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean slots until the last symbol of a block departs.
    pub mean_block_duration_slots: f64,
    pub rate_per_symbol: f64,
    pub rate_bits_per_slot: f64,
}

pub const RESULT_CSV_HEADER: &str = "decoder,n,messages,rate_per_symbol,rate_per_slot,trials,bler";

impl ExperimentResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.decoder.name(),
            self.n,
            self.messages,
            fmt_sig(self.rate_per_symbol, 12),
            fmt_sig(self.rate_bits_per_slot, 12),
            self.trials,
            fmt_sig(self.block_error_rate, 12)
        )
    }

    /// Binomial standard error of the block error rate.
    pub fn stderr(&self) -> f64 {
        let p = self.block_error_rate;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Errors per decoder on one shared channel realization per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedOutcome {
    pub results: Vec<ExperimentResult>,
    /// Per-trial error indicators, one row per decoder.
    pub errors: Vec<Vec<bool>>,
}

impl PairedOutcome {
    /// Mean and standard error of `error(a) - error(b)` over paired trials.
    pub fn paired_difference(&self, a: usize, b: usize) -> (f64, f64) {
        let d: Vec<f64> = self.errors[a]
            .iter()
            .zip(&self.errors[b])
            .map(|(x, y)| *x as u8 as f64 - *y as u8 as f64)
            .collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    }
}

/// Runs `trials` blocks, decoding each channel output with every decoder in `decoders`.
///
/// Trial `t` uses channel seed `derive_seed(cfg.seed, t)`, so results for different
/// codebooks or decoders share channel randomness.
pub fn run_paired(
    cb: &Codebook,
    cfg: &SimConfig,
    decoders: &[Decoder],
    trials: usize,
) -> Result<PairedOutcome> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if cb.alphabet != cfg.noise.alphabet() {
        return Err(Error::InvalidParameter(
            "codebook and noise model alphabets differ".into(),
        ));
    }
    let mixture = if decoders.contains(&Decoder::WithoutTimestamps) {
        let pi = matching_stationary(cfg, &Truncation::default())?;
        Some(cfg.noise.mixture(&pi))
    } else {
        None
    };

    let outcomes: Vec<(Vec<bool>, u64)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(Vec<bool>, u64)> {
            let seed = derive_seed(cfg.seed, t as u64);
            let m = stream_rng(seed, Stream::Coding).random_range(0..cb.messages);
            let mut trial = cfg.clone();
            trial.seed = seed;
            trial.horizon_departures = cb.n;
            trial.warmup_departures = Some(0);
            trial.record_slots = false;
            trial.inputs = InputSource::Fixed(cb.codeword(m).to_vec());
            let trace = simulate(&trial)?;
            let outputs: Vec<u32> = trace.jobs.iter().map(|j| j.y).collect();
            let wrong = decoders
                .iter()
                .map(|d| -> Result<bool> {
                    let decoded = match d {
                        Decoder::WithTimestamps => {
                            let q = reconstruct_queue(
                                &trace.arrival_slots(),
                                &trace.departure_slots(),
                            )?;
                            let laws: Vec<&Pmf> = q.iter().map(|q| cfg.noise.psi(*q)).collect();
                            ml_decode(cb, &outputs, &laws)
                        }
                        Decoder::WithoutTimestamps => {
                            let psi = mixture.as_ref().expect("mixture computed");
                            ml_decode(cb, &outputs, &vec![psi; cb.n])
                        }
                    };
                    Ok(decoded != m)
                })
                .collect::<Result<Vec<bool>>>()?;
            Ok((wrong, trace.slots))
        })
        .collect::<Result<_>>()?;

    let mean_t = outcomes.iter().map(|(_, s)| *s as f64).sum::<f64>() / trials as f64;
    let log_m = (cb.messages as f64).log2();
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for (k, d) in decoders.iter().enumerate() {
        let row: Vec<bool> = outcomes.iter().map(|(w, _)| w[k]).collect();
        let count = row.iter().filter(|w| **w).count();
        let (lo, hi) = wilson_interval(count, trials, 1.959_963_984_540_054);
        results.push(ExperimentResult {
            decoder: *d,
            n: cb.n,
            messages: cb.messages,
            trials,
            errors: count,
            block_error_rate: count as f64 / trials as f64,
            ci_low: lo,
            ci_high: hi,
            mean_block_duration_slots: mean_t,
            rate_per_symbol: cb.rate_per_symbol(),
            rate_bits_per_slot: log_m / mean_t,
        });
        errors.push(row);
    }
    Ok(PairedOutcome { results, errors })
}

pub fn run_experiment(
    cb: &Codebook,
    cfg: &SimConfig,
    decoder: Decoder,
    trials: usize,
) -> Result<ExperimentResult> {
    Ok(run_paired(cb, cfg, &[decoder], trials)?.results.remove(0))
}

/// One experiment per per-symbol rate, `|M| = round(2^(rate n))`, with shared channel seeds.
pub fn rate_sweep(
    cfg: &SimConfig,
    n: usize,
    rates: &[f64],
    decoder: Decoder,
    trials: usize,
) -> Result<Vec<ExperimentResult>> {
    rates
        .iter()
        .enumerate()
        .map(|(k, r)| {
            if !(*r >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative rate {r}")));
            }
            let messages = (r * n as f64).exp2().round();
            if messages > MAX_MESSAGES as f64 {
                return Err(Error::InvalidParameter(format!(
                    "rate {r} at n = {n} needs {messages} messages, above {MAX_MESSAGES}"
                )));
            }
            let seed = derive_seed(cfg.seed ^ CODEBOOK_SALT, k as u64);
            let cb = Codebook::random(n, messages as usize, cfg.noise.alphabet(), seed)?;
            run_experiment(&cb, cfg, decoder, trials)
        })
        .collect()
}
