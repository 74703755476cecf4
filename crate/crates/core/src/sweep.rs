//! Capacity sweeps of the geo/geo/1 queue-channel over arrival and service rates.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    capacity, capacity_no_timestamps, sigma_closed_form_geo, solve_sigma, StationaryDist,
};
use crate::dist::ParametricDist;
use crate::error::Result;
use crate::noise::NoiseModel;
use crate::numeric::fmt_sig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub lambda: f64,
    pub sigma: Option<f64>,
    pub pi0: Option<f64>,
    pub capacity: Option<f64>,
    pub capacity_no_ts: Option<f64>,
    pub error: Option<String>,
}

pub const SWEEP_CSV_HEADER: &str = "mu,lambda,sigma,pi0,capacity,capacity_no_ts,errors";

/// `start, start + step, ...` up to `stop` inclusive, computed by index to avoid drift.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn point(lambda: f64, mu: f64, nm: &NoiseModel, q_max: usize) -> SweepRow {
    let eval = || -> Result<(f64, f64, f64)> {
        let arrival = ParametricDist::geometric(lambda)?;
        let sigma = solve_sigma(&arrival, mu)?;
        // Cross-check the solver against the closed form for geometric arrivals.
        let closed = sigma_closed_form_geo(lambda, mu)?;
        if (sigma - closed).abs() > 1e-10 {
            log::warn!("sigma solver {sigma} differs from closed form {closed}");
        }
        let pi = StationaryDist::geometric(sigma, q_max);
        Ok((
            sigma,
            capacity(lambda, &pi, nm).capacity_bits_per_slot,
            capacity_no_timestamps(lambda, &pi, nm).capacity_bits_per_slot,
        ))
    };
    match eval() {
        Ok((sigma, c, c_nt)) => SweepRow {
            mu,
            lambda,
            sigma: Some(sigma),
            pi0: Some(1.0 - sigma),
            capacity: Some(c),
            capacity_no_ts: Some(c_nt),
            error: None,
        },
        Err(e) => SweepRow {
            mu,
            lambda,
            sigma: None,
            pi0: None,
            capacity: None,
            capacity_no_ts: None,
            error: Some(e.kind().to_string()),
        },
    }
}

/// One row per `(mu, lambda)`, `mu`-major in the given order; failures land in `error`.
pub fn sweep_geo_geo(lambdas: &[f64], mus: &[f64], nm: &NoiseModel, q_max: usize) -> Vec<SweepRow> {
    let grid: Vec<(f64, f64)> = mus
        .iter()
        .flat_map(|mu| lambdas.iter().map(move |l| (*l, *mu)))
        .collect();
    grid.par_iter()
        .map(|(l, mu)| point(*l, *mu, nm, q_max))
        .collect()
}

/// True when `values` rises to a single peak strictly inside the range and then falls.
pub fn unimodal_interior_peak(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    peak > 0
        && peak < values.len() - 1
        && values[..=peak].windows(2).all(|w| w[1] > w[0])
        && values[peak..].windows(2).all(|w| w[1] < w[0])
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| fmt_sig(v, 12)).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sig(r.mu, 12),
            fmt_sig(r.lambda, 12),
            opt(r.sigma),
            opt(r.pi0),
            opt(r.capacity),
            opt(r.capacity_no_ts),
            r.error.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

fn by_mu(rows: &[SweepRow]) -> Vec<(f64, Vec<&SweepRow>)> {
    let mut groups: Vec<(f64, Vec<&SweepRow>)> = Vec::new();
    for r in rows {
        match groups.last_mut() {
            Some((mu, g)) if *mu == r.mu => g.push(r),
            _ => groups.push((r.mu, vec![r])),
        }
    }
    groups
}

/// Whitespace-separated blocks (one per `mu`, separated by two blank lines) for gnuplot's `index`.
pub fn write_gnuplot<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    for (k, (mu, group)) in by_mu(rows).into_iter().enumerate() {
        if k > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# mu = {}", fmt_sig(mu, 12))?;
        writeln!(out, "# lambda capacity capacity_no_ts")?;
        for r in group.iter().filter(|r| r.error.is_none()) {
            writeln!(
                out,
                "{} {} {}",
                fmt_sig(r.lambda, 12),
                opt(r.capacity),
                opt(r.capacity_no_ts)
            )?;
        }
    }
    Ok(())
}

/// Minimal SVG line chart of capacity against `lambda`, one polyline per `mu`.
pub fn write_svg<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.capacity.is_some()).collect();
    let x_max = ok.iter().map(|r| r.lambda).fold(0.0, f64::max).max(1e-12);
    let y_max = ok
        .iter()
        .filter_map(|r| r.capacity)
        .fold(0.0, f64::max)
        .max(1e-12);
    let sx = |x: f64| PAD + x / x_max * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / y_max * (H - 2.0 * PAD);

    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<path d="M{PAD} {PAD} V{b} H{r}" stroke="black" fill="none"/>"#,
        b = H - PAD,
        r = W - PAD
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">lambda (max {})</text>"#,
        W / 2.0,
        H - 15.0,
        fmt_sig(x_max, 4)
    )?;
    writeln!(
        out,
        r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})">capacity, bits/slot (max {})</text>"#,
        H / 2.0 + 60.0,
        H / 2.0 + 60.0,
        fmt_sig(y_max, 4)
    )?;
    for (k, (mu, group)) in by_mu(rows).into_iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = group
            .iter()
            .filter_map(|r| {
                r.capacity
                    .map(|c| format!("{:.2},{:.2}", sx(r.lambda), sy(c)))
            })
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#,
            pts.join(" ")
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">mu = {}</text>"#,
            W - PAD - 80.0,
            PAD + 16.0 * (k as f64 + 1.0),
            fmt_sig(mu, 4)
        )?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}
