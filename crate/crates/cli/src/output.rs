//! CSV, solution dump and plot-script writers.

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use irsdm_core::experiments::presets::TracePoint;
use irsdm_core::experiments::{mean_r_s, Receivers, Scheme, SchemeOutcome, SweepRow};
use irsdm_core::numerics::ComplexVector;
use num_complex::Complex64;

use crate::error::CliError;

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// `re+imj` with both parts at [`fmt_num`] precision.
pub fn fmt_complex(z: Complex64) -> String {
    format!("{:.11e}{:+.11e}j", z.re, z.im)
}

/// Parses the output of [`fmt_complex`].
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let body = s.strip_suffix('j')?;
    // The imaginary sign is the last '+' or '-' that does not follow an 'e'.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    Some(Complex64::new(body[..split].parse().ok()?, body[split..].parse().ok()?))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "scheme",
    "variable",
    "value",
    "trial",
    "r_b",
    "r_e",
    "r_s",
    "rps",
    "iterations",
    "flops_estimate",
    "eve",
    "ratio_vs_random",
    "error",
];

fn sweep_record(row: &SweepRow, rows: &[SweepRow]) -> Vec<String> {
    let ratio = match mean_r_s(rows, Scheme::RandomPhase, row.value) {
        Some(base) if base > 0.0 && row.is_ok() => row.r_s / base,
        _ => f64::NAN,
    };
    vec![
        row.scheme.name().to_string(),
        row.variable.name().to_string(),
        fmt_num(row.value),
        row.trial.to_string(),
        fmt_num(row.r_b),
        fmt_num(row.r_e),
        fmt_num(row.r_s),
        fmt_num(row.rps),
        row.iterations_used.to_string(),
        fmt_num(row.flops_estimate.unwrap_or(f64::NAN)),
        row.eve.name().to_string(),
        fmt_num(ratio),
        row.error.clone().unwrap_or_default(),
    ]
}

/// Sweep rows, one line each, in the order given.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        w.write_record(sweep_record(row, rows))?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep rows tagged with an SNR column in front. Ratios are taken within each SNR.
pub fn write_snr_sweep_csv(path: &Path, rows: &[(f64, SweepRow)]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["snr_db"];
    header.extend(SWEEP_COLUMNS);
    w.write_record(&header)?;
    let mut snrs: Vec<f64> = rows.iter().map(|(s, _)| *s).collect();
    snrs.dedup();
    for snr in snrs {
        let group: Vec<SweepRow> = rows.iter().filter(|(s, _)| *s == snr).map(|(_, r)| r.clone()).collect();
        for row in &group {
            let mut rec = vec![fmt_num(snr)];
            rec.extend(sweep_record(row, &group));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const TRACE_COLUMNS: [&str; 5] = ["scheme", "M", "iteration", "rps", "r_s"];

pub fn write_trace_csv(path: &Path, points: &[TracePoint]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(TRACE_COLUMNS)?;
    for p in points {
        w.write_record([
            p.scheme.name().to_string(),
            p.m.to_string(),
            p.iteration.to_string(),
            fmt_num(p.rps),
            fmt_num(p.r_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const COMPLEXITY_COLUMNS: [&str; 4] = ["M", "flops_gao", "flops_zf", "zf_over_gao"];

/// `(M, flops_gao, flops_zf)` triples.
pub fn write_complexity_csv(path: &Path, rows: &[(usize, f64, f64)]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(COMPLEXITY_COLUMNS)?;
    for &(m, g, z) in rows {
        w.write_record([m.to_string(), fmt_num(g), fmt_num(z), fmt_num(z / g)])?;
    }
    w.flush()?;
    Ok(())
}

fn push_vector(out: &mut String, name: &str, v: &ComplexVector) {
    for (i, z) in v.iter().enumerate() {
        let _ = writeln!(out, "{name}[{i}] = {}", fmt_complex(*z));
    }
}

/// Key-value text of a finished run. The no-IRS baseline has no phase shifts to report.
pub fn solution_dump(out: &SchemeOutcome, config_digest: &str) -> String {
    let mut s = String::new();
    let r = &out.report;
    let _ = writeln!(s, "scheme = {}", out.scheme.name());
    let _ = writeln!(s, "eve = {}", out.eve.name());
    let _ = writeln!(s, "config_digest = {config_digest}");
    for (k, v) in [("r_b", r.r_b), ("r_e", r.r_e), ("r_s", r.r_s), ("rps", r.rps)] {
        let _ = writeln!(s, "{k} = {}", fmt_num(v));
    }
    let _ = writeln!(s, "iterations = {}", out.iterations_used);
    if let Some(trace) = &out.trace {
        let _ = writeln!(s, "converged = {}", trace.converged);
    }
    match &out.receivers {
        Receivers::TwoStream(sol) => {
            let _ = writeln!(s, "m = {}", sol.theta.len());
            for (i, p) in sol.theta.phases().iter().enumerate() {
                let _ = writeln!(s, "theta_phase[{i}] = {}", fmt_num(*p));
            }
            push_vector(&mut s, "theta", sol.theta.as_vector());
            push_vector(&mut s, "u_b1", &sol.u_b1);
            push_vector(&mut s, "u_b2", &sol.u_b2);
            push_vector(&mut s, "u_e1", &sol.u_e1);
            push_vector(&mut s, "u_e2", &sol.u_e2);
        }
        Receivers::SingleStream { u_b, u_e, v } => {
            push_vector(&mut s, "v", v);
            push_vector(&mut s, "u_b", u_b);
            push_vector(&mut s, "u_e", u_e);
        }
    }
    s
}

/// What a generated plot script draws.
pub struct PlotSpec<'a> {
    pub csv_name: &'a str,
    pub png_name: &'a str,
    pub x: &'a str,
    pub ys: &'a [&'a str],
    pub group_by: &'a [&'a str],
    pub log_y: bool,
}

const PLOT_TEMPLATE: &str = r#"#!/usr/bin/env python3
"""Plot @CSV@ written by irsdm. Requires matplotlib."""
import csv
import math
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
X = "@X@"
YS = @YS@
GROUP_BY = @GROUP@

curves = defaultdict(lambda: defaultdict(list))
with open(os.path.join(HERE, "@CSV@"), newline="") as f:
    for row in csv.DictReader(f):
        for y in YS:
            value = float(row[y])
            if math.isnan(value):
                continue
            parts = [f"{k}={row[k]}" for k in GROUP_BY]
            if len(YS) > 1:
                parts.append(y)
            curves[" ".join(parts)][float(row[X])].append(value)

fig, ax = plt.subplots(figsize=(6.4, 4.2))
for label, points in sorted(curves.items()):
    xs = sorted(points)
    ax.plot(xs, [sum(points[x]) / len(points[x]) for x in xs], marker="o", label=label)
ax.set_xlabel(X)
ax.set_ylabel(YS[0] if len(YS) == 1 else "value")
if @LOGY@:
    ax.set_yscale("log")
ax.grid(True, alpha=0.3)
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "@PNG@"), dpi=150)
"#;

fn py_list(items: &[&str]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("\"{s}\"")).collect();
    format!("[{}]", quoted.join(", "))
}

pub fn plot_script(spec: &PlotSpec) -> String {
    PLOT_TEMPLATE
        .replace("@CSV@", spec.csv_name)
        .replace("@PNG@", spec.png_name)
        .replace("@X@", spec.x)
        .replace("@YS@", &py_list(spec.ys))
        .replace("@GROUP@", &py_list(spec.group_by))
        .replace("@LOGY@", if spec.log_y { "True" } else { "False" })
}
