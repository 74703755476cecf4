//! Command-line front end.

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::analytic::{
    arrival_curve, capacity, capacity_bound_from_m0, capacity_bound_type2, capacity_no_timestamps,
    extremal_arrival, k_coefficients_geo_g1, k_coefficients_type2, ordering_check_with,
    sigma_closed_form_geo, solve_sigma, stationary_from_k_with, stationary_g_geo1, BoundKind,
    CapacityReport, StationaryDist, Truncation, DEFAULT_Q_MAX,
};
use crate::coding::{rate_sweep, run_paired, Codebook, ExperimentResult, RESULT_CSV_HEADER};
use crate::dist::ParametricDist;
use crate::error::{Error, Result};
use crate::numeric::fmt_sig;
use crate::sim::rng::derive_seed;
use crate::sim::{info_density_estimate, matching_stationary, simulate};
use crate::sweep;
use config::*;

#[derive(Debug, Parser)]
#[command(
    name = "queuechan",
    version,
    about = "Capacity of queues with queue-length-dependent noise"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for stochastic commands; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Stationary-law truncation; overrides the configuration.
    #[arg(long, global = true)]
    pub q_max: Option<usize>,
    /// Distribution truncation mass; overrides the configuration.
    #[arg(long, global = true)]
    pub tail_eps: Option<f64>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Omit the generated-at comment line from CSV output.
    #[arg(long, global = true)]
    pub no_header_meta: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, ValueEnum)]
pub enum Command {
    /// Capacity of one configured system.
    Capacity,
    /// Capacity over a grid of arrival and service rates.
    Sweep,
    /// Arrival-curve fixed point.
    Sigma,
    /// Departure queue-length law.
    Stationary,
    /// Job-level simulation trace.
    Simulate,
    /// Empirical information density from a simulation.
    Infodensity,
    /// Random-coding block error experiment.
    Codeexp,
    /// Extremal arrival laws and their capacity orderings.
    Extremal,
    /// Lower and upper batch-arrival bounds.
    Bounds,
}

/// What a command produced, plus whether its assertions held.
struct Outcome {
    json: Value,
    csv: String,
    ok: bool,
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 when a per-point error
/// or assertion failed, 2 on an error (reported as a JSON object on stdout).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ =
        env_logger::Builder::from_env(env_logger::Env::new().filter("QUEUECHAN_LOG")).try_init();
    match execute(&cli) {
        Ok(ok) => {
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let obj = serde_json::json!({
                "error": { "kind": e.kind(), "code": e.code(), "message": e.to_string() }
            });
            println!("{obj}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let outcome = dispatch(cli, cfg)?;
    emit(cli, &outcome)?;
    Ok(outcome.ok)
}

fn dispatch(cli: &Cli, cfg: Value) -> Result<Outcome> {
    let body = || -> Result<Outcome> {
        match cli.command {
            Command::Capacity => cmd_capacity(cli, parse(cfg.clone())?),
            Command::Sweep => cmd_sweep(cli, parse(cfg.clone())?),
            Command::Sigma => cmd_sigma(parse(cfg.clone())?),
            Command::Stationary => cmd_stationary(cli, parse(cfg.clone())?),
            Command::Simulate => cmd_simulate(parse(with_seed(cli, cfg.clone(), "sim")?)?),
            Command::Infodensity => {
                cmd_infodensity(cli, parse(with_seed(cli, cfg.clone(), "sim")?)?)
            }
            Command::Codeexp => cmd_codeexp(parse(with_seed(cli, cfg.clone(), "sim")?)?),
            Command::Extremal => cmd_extremal(cli, parse(cfg.clone())?),
            Command::Bounds => cmd_bounds(parse(cfg.clone())?),
        }
    };
    match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Runs `command` on an in-memory configuration and returns its JSON result together with
/// whether its assertions held. Used by the C interface.
pub fn evaluate(command: Command, config: Value) -> Result<(Value, bool)> {
    let cli = Cli {
        config: None,
        seed: None,
        jobs: None,
        q_max: None,
        tail_eps: None,
        out: None,
        format: Format::Json,
        no_header_meta: true,
        command,
    };
    let outcome = dispatch(&cli, config)?;
    Ok((outcome.json, outcome.ok))
}

fn load_config(cli: &Cli) -> Result<Value> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
}

/// Applies `--seed` to `cfg[key].seed`; stochastic commands need a seed from somewhere.
fn with_seed(cli: &Cli, mut cfg: Value, key: &str) -> Result<Value> {
    let sim = cfg
        .get_mut(key)
        .and_then(Value::as_object_mut)
        .ok_or_else(|| Error::Config(format!("missing object `{key}`")))?;
    if let Some(seed) = cli.seed {
        sim.insert("seed".into(), seed.into());
    }
    if !sim.contains_key("seed") {
        return Err(Error::Config(
            "a seed is required: set `seed` in the configuration or pass --seed".into(),
        ));
    }
    Ok(cfg)
}

fn truncation(cli: &Cli, mut t: Truncation) -> Truncation {
    if let Some(q) = cli.q_max {
        t.q_max = q;
    }
    if let Some(e) = cli.tail_eps {
        t.tail_eps = e;
    }
    t
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &outcome.json)?;
            writeln!(out)?;
        }
        Format::Csv => {
            if !cli.no_header_meta {
                let secs = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                writeln!(
                    out,
                    "# queuechan {} generated at unix time {secs}",
                    env!("CARGO_PKG_VERSION")
                )?;
            }
            out.write_all(outcome.csv.as_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn create(p: &Path) -> Result<File> {
    File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn json<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn stationary_for(
    system: &SystemSpec,
    t: &Truncation,
    method: crate::analytic::RecursionMethod,
) -> Result<(f64, StationaryDist)> {
    match system {
        SystemSpec::GGeo1 { arrival, mu } => {
            if arrival.min_support() < 1 {
                return Err(Error::AssumptionViolation(
                    "inter-arrival times must be at least one slot".into(),
                ));
            }
            Ok((
                1.0 / arrival.mean(),
                stationary_g_geo1(arrival, *mu, t.q_max)?,
            ))
        }
        SystemSpec::GeoG1 { lambda, service } => {
            let k = k_coefficients_geo_g1(*lambda, service, t.j_max, t.tail_eps)?;
            let mu = 1.0 / service.mean();
            Ok((
                *lambda,
                stationary_from_k_with(&k, *lambda, mu, t.q_max, method)?,
            ))
        }
        SystemSpec::TypeII { batch, service } => {
            let k = k_coefficients_type2(batch, service, t.j_max, t.tail_eps)?;
            let (lambda, mu) = (batch.mean(), 1.0 / service.mean());
            Ok((
                lambda,
                stationary_from_k_with(&k, lambda, mu, t.q_max, method)?,
            ))
        }
    }
}

const CAPACITY_CSV_HEADER: &str = "lambda,capacity,log_alphabet,noise_penalty,error_bound,method";

fn capacity_csv(reports: &[CapacityReport]) -> String {
    let mut s = format!("{CAPACITY_CSV_HEADER}\n");
    for r in reports {
        s += &format!(
            "{},{},{},{},{},{:?}\n",
            fmt_sig(r.lambda, 12),
            fmt_sig(r.capacity_bits_per_slot, 12),
            fmt_sig(r.log_alphabet, 12),
            fmt_sig(r.noise_penalty, 12),
            fmt_sig(r.error_bound, 12),
            r.method
        );
    }
    s
}

fn cmd_capacity(cli: &Cli, cfg: CapacityConfig) -> Result<Outcome> {
    let t = truncation(cli, cfg.truncation);
    let (lambda, pi) = stationary_for(&cfg.system, &t, cfg.recursion)?;
    let report = if cfg.no_timestamps {
        capacity_no_timestamps(lambda, &pi, &cfg.noise)
    } else {
        capacity(lambda, &pi, &cfg.noise)
    };
    Ok(Outcome {
        json: json(&report)?,
        csv: capacity_csv(std::slice::from_ref(&report)),
        ok: true,
    })
}

fn cmd_sweep(cli: &Cli, cfg: SweepConfig) -> Result<Outcome> {
    let q_max = cli.q_max.or(cfg.q_max).unwrap_or(DEFAULT_Q_MAX);
    let rows = sweep::sweep_geo_geo(&cfg.lambdas.values(), &cfg.mus, &cfg.noise, q_max);
    if let Some(p) = &cfg.gnuplot {
        sweep::write_gnuplot(&rows, BufWriter::new(create(p)?))?;
    }
    if let Some(p) = &cfg.svg {
        sweep::write_svg(&rows, BufWriter::new(create(p)?))?;
    }
    let mut csv = Vec::new();
    sweep::write_csv(&rows, &mut csv)?;
    Ok(Outcome {
        ok: rows.iter().all(|r| r.error.is_none()),
        json: json(&rows)?,
        csv: String::from_utf8(csv).expect("ascii csv"),
    })
}

fn cmd_sigma(cfg: SigmaConfig) -> Result<Outcome> {
    let sigma = solve_sigma(&cfg.arrival, cfg.mu)?;
    let residual = (arrival_curve(&cfg.arrival, cfg.mu, sigma) - sigma).abs();
    let closed = match &cfg.arrival {
        ParametricDist::Geometric(l) => Some(sigma_closed_form_geo(*l, cfg.mu)?),
        _ => None,
    };
    let json = serde_json::json!({
        "sigma": sigma, "residual": residual, "closed_form": closed, "pi0": 1.0 - sigma,
    });
    let csv = format!(
        "sigma,residual,closed_form\n{},{},{}\n",
        fmt_sig(sigma, 12),
        fmt_sig(residual, 12),
        closed.map(|c| fmt_sig(c, 12)).unwrap_or_default()
    );
    Ok(Outcome {
        json,
        csv,
        ok: true,
    })
}

fn cmd_stationary(cli: &Cli, cfg: StationaryConfig) -> Result<Outcome> {
    let t = truncation(cli, cfg.truncation);
    let (_, pi) = stationary_for(&cfg.system, &t, cfg.recursion)?;
    let mut csv = String::from("q,pi\n");
    for (q, p) in pi.masses().iter().enumerate() {
        csv += &format!("{q},{}\n", fmt_sig(*p, 12));
    }
    Ok(Outcome {
        json: json(&pi)?,
        csv,
        ok: true,
    })
}

fn cmd_simulate(cfg: SimulateConfig) -> Result<Outcome> {
    let trace = simulate(&cfg.sim)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    let summary = info_density_estimate(&trace, &cfg.sim.noise)?;
    let json = serde_json::json!({
        "departures": trace.len(),
        "slots": trace.slots,
        "warmup": trace.warmup,
        "mean_sojourn": trace.mean_sojourn(),
        "summary": summary,
    });
    Ok(Outcome {
        json,
        csv: String::from_utf8(csv).expect("ascii csv"),
        ok: true,
    })
}

fn cmd_infodensity(cli: &Cli, cfg: InfoDensityConfig) -> Result<Outcome> {
    let trace = simulate(&cfg.sim)?;
    let summary = info_density_estimate(&trace, &cfg.sim.noise)?;
    let t = truncation(cli, cfg.truncation);
    let reference = matching_stationary(&cfg.sim, &t).ok().map(|pi| {
        let (h, _) = cfg.sim.noise.mean_entropy(&pi);
        cfg.sim.noise.alphabet().log_size() - h
    });
    let z = reference
        .map(|r| (summary.info_density_mean - r) / summary.info_density_stderr.max(1e-300));
    let ok = match (cfg.assert_within_stderr, z) {
        (Some(k), Some(z)) => z.abs() <= k,
        (Some(_), None) => false,
        (None, _) => true,
    };
    let csv = format!(
        "jobs,mean,stderr,analytic,z\n{},{},{},{},{}\n",
        summary.jobs,
        fmt_sig(summary.info_density_mean, 12),
        fmt_sig(summary.info_density_stderr, 12),
        reference.map(|r| fmt_sig(r, 12)).unwrap_or_default(),
        z.map(|z| fmt_sig(z, 12)).unwrap_or_default()
    );
    let json = serde_json::json!({
        "summary": summary, "analytic_per_symbol": reference, "z_score": z, "ok": ok,
    });
    Ok(Outcome { json, csv, ok })
}

fn cmd_codeexp(cfg: CodeExpConfig) -> Result<Outcome> {
    let cb_seed = cfg
        .codebook_seed
        .unwrap_or_else(|| derive_seed(cfg.sim.seed, u64::MAX));
    let mut results: Vec<ExperimentResult> = Vec::new();
    let mut paired = None;
    match (cfg.messages, &cfg.rates) {
        (Some(m), None) => {
            let cb = Codebook::random(cfg.n, m, cfg.sim.noise.alphabet(), cb_seed)?;
            let out = run_paired(&cb, &cfg.sim, &cfg.decoders, cfg.trials)?;
            if out.results.len() == 2 {
                paired = Some(out.paired_difference(0, 1));
            }
            results = out.results;
        }
        (None, Some(rates)) => {
            for d in &cfg.decoders {
                results.extend(rate_sweep(&cfg.sim, cfg.n, rates, *d, cfg.trials)?);
            }
        }
        _ => {
            return Err(Error::Config(
                "set exactly one of `messages` or `rates`".into(),
            ))
        }
    }
    let mut csv = format!("{RESULT_CSV_HEADER}\n");
    for r in &results {
        csv += &r.csv_row();
        csv.push('\n');
    }
    let json = serde_json::json!({
        "results": results,
        "paired_difference": paired.map(|(m, s)| serde_json::json!({"mean": m, "stderr": s})),
    });
    Ok(Outcome {
        json,
        csv,
        ok: true,
    })
}

fn cmd_extremal(cli: &Cli, cfg: ExtremalConfig) -> Result<Outcome> {
    let mut dists = Vec::new();
    let mut skipped = Vec::new();
    for k in &cfg.kinds {
        match extremal_arrival(k, cfg.lambda) {
            Ok(d) => dists.push(d),
            Err(e) => skipped.push(serde_json::json!({
                "kind": k, "error": e.kind(), "message": e.to_string()
            })),
        }
    }
    let q_max = cli.q_max.or(cfg.q_max).unwrap_or(DEFAULT_Q_MAX);
    let table = ordering_check_with(&dists, cfg.mu, &cfg.noise, q_max)?;
    let mut csv = String::from("label,lambda,sigma,capacity,error_bound\n");
    for r in &table.rows {
        csv += &format!(
            "{},{},{},{},{}\n",
            r.label,
            fmt_sig(r.lambda, 12),
            fmt_sig(r.sigma, 12),
            fmt_sig(r.capacity, 12),
            fmt_sig(r.error_bound, 12)
        );
    }
    csv += "\nclaim,holds,margin\n";
    for f in &table.flags {
        csv += &format!("\"{}\",{},{}\n", f.claim, f.holds, fmt_sig(f.margin, 12));
    }
    let ok = table.all_hold() && skipped.is_empty();
    Ok(Outcome {
        json: serde_json::json!({ "table": table, "skipped": skipped, "ok": ok }),
        csv,
        ok,
    })
}

fn cmd_bounds(cfg: BoundsConfig) -> Result<Outcome> {
    let (lo, hi) = match cfg.m0 {
        Some(z) => (
            capacity_bound_from_m0(
                cfg.lambda,
                &cfg.service,
                z.lower,
                &cfg.noise,
                BoundKind::Lower,
            )?,
            capacity_bound_from_m0(
                cfg.lambda,
                &cfg.service,
                z.upper,
                &cfg.noise,
                BoundKind::Upper,
            )?,
        ),
        None => (
            capacity_bound_type2(
                cfg.lambda,
                &cfg.service,
                cfg.batch,
                &cfg.noise,
                BoundKind::Lower,
                cfg.convention,
            )?,
            capacity_bound_type2(
                cfg.lambda,
                &cfg.service,
                cfg.batch,
                &cfg.noise,
                BoundKind::Upper,
                cfg.convention,
            )?,
        ),
    };
    Ok(Outcome {
        json: serde_json::json!({ "lower": lo, "upper": hi }),
        csv: capacity_csv(&[lo, hi]),
        ok: true,
    })
}
