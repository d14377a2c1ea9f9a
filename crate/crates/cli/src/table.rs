//! Row computation and CSV output for the sweep commands.

use std::io::Write;

use anyhow::{Context, Result};
use rayon::prelude::*;
use ris_cci::metrics::{
    average_ber_closed_form, diversity_order, ergodic_capacity, loglog_slope, outage_asymptotic, outage_probability,
};
use ris_cci::monte_carlo::{estimate_ber, estimate_capacity, estimate_outage};
use ris_cci::{fit_kg_parameters, McEstimate, PhaseModelKind};
use serde::Serialize;

use crate::scenario::{McSettings, Point};

/// Nine significant digits, locale-free.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

#[derive(Debug, Clone)]
pub struct AnalyticRow {
    pub op_exact: f64,
    pub op_asymptotic: f64,
    pub ber: f64,
    pub capacity: f64,
    pub diversity: f64,
}

#[derive(Debug, Clone)]
pub struct McRow {
    pub op: McEstimate,
    pub ber: McEstimate,
    pub cap: McEstimate,
}

fn analytic(p: &Point) -> Result<AnalyticRow> {
    let ctx = || format!("series {:?} at sweep value {}", p.series, p.sweep_value);
    let params = fit_kg_parameters(p.system.n_elements).with_context(ctx)?;
    Ok(AnalyticRow {
        op_exact: outage_probability(&p.system, &params).with_context(ctx)?.value,
        op_asymptotic: outage_asymptotic(&p.system, &params).with_context(ctx)?.value,
        ber: average_ber_closed_form(&p.system, &params, &p.modulation).with_context(ctx)?,
        capacity: ergodic_capacity(&p.system, &params).with_context(ctx)?.value,
        diversity: diversity_order(&params),
    })
}

fn simulated(p: &Point, mc: &McSettings) -> Result<McRow> {
    let ctx = || format!("series {:?} at sweep value {}", p.series, p.sweep_value);
    Ok(McRow {
        op: estimate_outage(&p.system, &p.phase_model, mc.trials, mc.seed).with_context(ctx)?,
        ber: estimate_ber(&p.system, &p.phase_model, &p.modulation, mc.trials, mc.seed).with_context(ctx)?,
        cap: estimate_capacity(&p.system, &p.phase_model, mc.trials, mc.seed).with_context(ctx)?,
    })
}

pub fn analytic_rows(points: &[Point]) -> Result<Vec<AnalyticRow>> {
    points.par_iter().map(analytic).collect()
}

pub fn mc_rows(points: &[Point], mc: &McSettings) -> Result<Vec<McRow>> {
    points.par_iter().map(|p| simulated(p, mc)).collect()
}

fn model_name(p: &Point) -> &'static str {
    match p.phase_model.kind {
        PhaseModelKind::Ideal => "ideal",
        PhaseModelKind::Practical => "practical",
    }
}

pub const ANALYZE_HEADER: [&str; 6] = ["series", "sweep_value", "op_exact", "op_asymptotic", "ber", "capacity"];
pub const SIMULATE_HEADER: [&str; 9] = [
    "series",
    "sweep_value",
    "phase_model",
    "op_mc",
    "op_mc_stderr",
    "ber_mc",
    "ber_mc_stderr",
    "cap_mc",
    "cap_mc_stderr",
];
pub const COMPARE_HEADER: [&str; 15] = [
    "series",
    "sweep_value",
    "phase_model",
    "op_exact",
    "op_asymptotic",
    "op_mc",
    "op_mc_stderr",
    "op_z",
    "ber",
    "ber_mc",
    "ber_mc_stderr",
    "capacity",
    "cap_mc",
    "cap_mc_stderr",
    "diversity_order",
];

pub fn write_analyze<W: Write>(out: W, points: &[Point], rows: &[AnalyticRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ANALYZE_HEADER)?;
    for (p, r) in points.iter().zip(rows) {
        w.write_record([
            p.series.clone(),
            num(p.sweep_value),
            num(r.op_exact),
            num(r.op_asymptotic),
            num(r.ber),
            num(r.capacity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_simulate<W: Write>(out: W, points: &[Point], rows: &[McRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SIMULATE_HEADER)?;
    for (p, r) in points.iter().zip(rows) {
        w.write_record([
            p.series.clone(),
            num(p.sweep_value),
            model_name(p).into(),
            num(r.op.mean),
            num(r.op.std_error),
            num(r.ber.mean),
            num(r.ber.std_error),
            num(r.cap.mean),
            num(r.cap.std_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(exact - mc)/σ` with `σ = max(sample SE, binomial SE at the exact value)`.
/// The binomial probability is floored at `1/n`, the one-count resolution.
pub fn outage_z(exact: f64, mc: &McEstimate) -> f64 {
    let n = mc.trials as f64;
    let p = exact.clamp(1.0 / n, 1.0);
    let sigma = mc.std_error.max((p * (1.0 - p) / n).sqrt());
    if sigma > 0.0 {
        (exact - mc.mean) / sigma
    } else if exact == mc.mean {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn write_compare<W: Write>(out: W, points: &[Point], a: &[AnalyticRow], m: &[McRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_HEADER)?;
    for ((p, r), s) in points.iter().zip(a).zip(m) {
        w.write_record([
            p.series.clone(),
            num(p.sweep_value),
            model_name(p).into(),
            num(r.op_exact),
            num(r.op_asymptotic),
            num(s.op.mean),
            num(s.op.std_error),
            num(outage_z(r.op_exact, &s.op)),
            num(r.ber),
            num(s.ber.mean),
            num(s.ber.std_error),
            num(r.capacity),
            num(s.cap.mean),
            num(s.cap.std_error),
            num(r.diversity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SeriesSummary {
    pub series: String,
    pub points: usize,
    pub max_abs_op_z: f64,
    /// `-d log10(op_exact) / d log10(P_s)` over points with `op_exact <= 1e-3`;
    /// absent if any of them is non-positive.
    pub fitted_slope: Option<f64>,
    pub slope_points: usize,
    pub diversity_order: f64,
    pub slope_rel_error: Option<f64>,
}

/// Per-series summary; the slope is only fitted when `P_s` is the swept variable.
pub fn summarize(points: &[Point], a: &[AnalyticRow], m: &[McRow], fit_slope: bool) -> Vec<SeriesSummary> {
    let mut out: Vec<SeriesSummary> = Vec::new();
    let mut i = 0;
    while i < points.len() {
        let label = &points[i].series;
        let j = i + points[i..].iter().take_while(|p| &p.series == label).count();
        let max_z = (i..j).map(|k| outage_z(a[k].op_exact, &m[k].op).abs()).fold(0.0, f64::max);
        // slope region: OP at most 1e-3; any non-positive value there leaves it undefined
        let region: Vec<usize> = (i..j).filter(|&k| a[k].op_exact <= 1e-3).collect();
        let xs: Vec<f64> = region.iter().map(|&k| points[k].system.p_s()).collect();
        let ys: Vec<f64> = region.iter().map(|&k| a[k].op_exact).collect();
        let slope = if fit_slope { loglog_slope(&xs, &ys).map(|s| -s) } else { None };
        let d = a[i].diversity;
        out.push(SeriesSummary {
            series: label.clone(),
            points: j - i,
            max_abs_op_z: max_z,
            fitted_slope: slope,
            slope_points: region.len(),
            diversity_order: d,
            slope_rel_error: slope.map(|s| (s - d).abs() / d),
        });
        i = j;
    }
    out
}
