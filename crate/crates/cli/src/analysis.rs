//! Scaling analysis of one spectrum across sizes: locate critical points on the
//! coarse grid, refine each one, then fit it according to its type.

use std::collections::BTreeMap;

use dtpt::geometry::{dtop, DtopOptions, DtopSeries, Observable};
use dtpt::loschmidt::ThermalSpec;
use dtpt::scaling::{
    dynamical_exponent, find_critical_points_with, fit_log_size, fit_log_time, fit_power_law_series,
    thermal_scaling_sweep, CriticalPoint, FitWindow, KinkType, PowerLawReference, ScalingFit, ThermalFit,
};
use dtpt::spectrum::{build_mode_bank, ModeBank, SpectrumSpec};
use dtpt::{Result, TimeGrid};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScalingConfig;

/// Fit results at one critical point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAnalysis {
    pub point: CriticalPoint,
    /// Refined critical time (raw units).
    pub t_c: f64,
    pub size_values: BTreeMap<usize, f64>,
    /// `(|t - t_c|, value)` on both sides at the largest size, left branch first.
    pub time_values: Vec<(f64, f64)>,
    pub size_fit: Option<ScalingFit>,
    pub time_fit: Option<ScalingFit>,
    pub power_fit: Option<ScalingFit>,
    pub dynamical_exponent: Option<f64>,
    pub thermal: Vec<ThermalFit>,
    /// Errors of individual fits; the other fits still stand.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub sizes: Vec<usize>,
    pub points: Vec<PointAnalysis>,
}

fn bank_at(spec: &SpectrumSpec, n: usize) -> Result<ModeBank> {
    build_mode_bank(&spec.with_modes(n))
}

/// DTOP series for every size on one grid, in parallel over sizes.
pub fn series_by_size(
    spec: &SpectrumSpec,
    sizes: &[usize],
    grid: &TimeGrid,
    opts: &DtopOptions,
) -> Result<BTreeMap<usize, DtopSeries>> {
    let banks: Vec<ModeBank> = sizes.iter().map(|&n| bank_at(spec, n)).collect::<Result<_>>()?;
    Ok(sizes
        .par_iter()
        .zip(banks.par_iter())
        .map(|(&n, bank)| (n, dtop(bank, grid, opts)))
        .collect())
}

/// Uniform grid of `points` (made odd) centred exactly on `t_c`.
fn centred_grid(t_c: f64, half_width: f64, points: usize) -> Result<TimeGrid> {
    let m = points.max(3) / 2;
    let h = half_width / m as f64;
    TimeGrid::new((0..=2 * m).map(|i| t_c + (i as f64 - m as f64) * h).collect())
}

/// Peak location of |X| on a fine grid spanning one coarse step each side.
fn refine(bank: &ModeBank, obs: Observable, t: f64, step: f64, opts: &DtopOptions) -> Result<f64> {
    let grid = centred_grid(t, step, 2001)?;
    let s = dtop(bank, &grid, opts);
    let x = s.observable(obs);
    let best = (0..x.len()).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap();
    Ok(s.times[best])
}

/// The observable whose spike marks the point: the divergent one itself, or
/// the derivative of the one that jumps.
fn marker(point: &CriticalPoint) -> Observable {
    match point.kind {
        KinkType::LogDivergent => point.observable,
        KinkType::DerivativeJump => Observable::from_order(point.observable.order() + 1).unwrap_or(point.observable),
    }
}

/// Detect critical points of `spec` on `grid` and fit each of them.
///
/// `thermals` with more than the zero entry triggers a thermal sweep at every
/// derivative-jump point. Lengths in `cfg` are scaled by `time_scale`.
pub fn analyze(
    spec: &SpectrumSpec,
    sizes: &[usize],
    grid: &TimeGrid,
    cfg: &ScalingConfig,
    critical: &dtpt::scaling::CriticalOptions,
    thermals: &[ThermalSpec],
    time_scale: f64,
) -> Result<Analysis> {
    let opts = DtopOptions::default();
    let coarse = series_by_size(spec, sizes, grid, &opts)?;
    let points = find_critical_points_with(&coarse, critical)?;
    let largest = *sizes.last().unwrap();
    let big = bank_at(spec, largest)?;
    let banks: BTreeMap<usize, ModeBank> = sizes.iter().map(|&n| Ok((n, bank_at(spec, n)?))).collect::<Result<_>>()?;
    let step = grid.min_step().unwrap_or(time_scale * 1e-3);

    let mut out = Vec::new();
    for point in points {
        let mut failures = Vec::new();
        let t_c = refine(&big, marker(&point), point.t_c, step, &opts)?;
        let mut a = PointAnalysis {
            point,
            t_c,
            size_values: BTreeMap::new(),
            time_values: Vec::new(),
            size_fit: None,
            time_fit: None,
            power_fit: None,
            dynamical_exponent: None,
            thermal: Vec::new(),
            failures: Vec::new(),
        };
        match point.kind {
            KinkType::LogDivergent => {
                let fine = centred_grid(t_c, cfg.value_half_width * time_scale, cfg.value_points)?;
                let values: Vec<(usize, f64)> = banks
                    .par_iter()
                    .map(|(&n, bank)| {
                        let s = dtop(bank, &fine, &opts);
                        let x = s.observable(point.observable);
                        let v = x.iter().copied().fold(0.0, |b: f64, v| if v.abs() > b.abs() { v } else { b });
                        (n, v)
                    })
                    .collect();
                a.size_values = values.into_iter().collect();
                match fit_log_size(&a.size_values) {
                    Ok(f) => a.size_fit = Some(f),
                    Err(e) => failures.push(format!("log-size: {e}")),
                }
                let offsets = TimeGrid::log_offsets(t_c, cfg.log_inner * t_c, cfg.log_outer * t_c, cfg.log_points)?;
                let s = dtop(&big, &offsets, &opts);
                a.time_values = time_values(&s, point.observable, t_c);
                let window = FitWindow {
                    inner: Some(0.5 * cfg.log_inner * t_c),
                    outer_rel: cfg.log_outer * (1.0 + 1e-9),
                };
                match fit_log_time(&s, point.observable, t_c, &window) {
                    Ok(f) => a.time_fit = Some(f),
                    Err(e) => failures.push(format!("log-time: {e}")),
                }
                if let (Some(fs), Some(ft)) = (&a.size_fit, &a.time_fit) {
                    match dynamical_exponent(fs, ft) {
                        Ok(z) => a.dynamical_exponent = Some(z),
                        Err(e) => failures.push(format!("dynamical exponent: {e}")),
                    }
                }
            }
            KinkType::DerivativeJump => {
                let h = cfg.power_step * time_scale;
                let half = cfg.power_outer * t_c.abs() * (1.0 + 1e-9);
                let per_side = (half / h).floor() as usize;
                let local = centred_grid(t_c, per_side as f64 * h, 2 * per_side + 1)?;
                let window = FitWindow::new(cfg.power_inner_steps as f64 * h, cfg.power_outer);
                let s = dtop(&big, &local, &opts);
                a.time_values = time_values(&s, point.observable, t_c);
                match fit_power_law_series(&s, point.observable, t_c, &window, PowerLawReference::InnerEdge) {
                    Ok(f) => a.power_fit = Some(f),
                    Err(e) => failures.push(format!("power-law: {e}")),
                }
                if thermals.iter().any(|t| !t.is_zero()) {
                    let mut list = thermals.to_vec();
                    if !list.iter().any(|t| t.is_zero()) {
                        list.insert(0, ThermalSpec::zero());
                    }
                    match thermal_scaling_sweep(&big, &list, t_c, &local, &window, &opts) {
                        Ok(t) => a.thermal = t,
                        Err(e) => failures.push(format!("thermal: {e}")),
                    }
                }
            }
        }
        a.failures = failures;
        out.push(a);
    }
    Ok(Analysis {
        sizes: sizes.to_vec(),
        points: out,
    })
}

fn time_values(s: &DtopSeries, obs: Observable, t_c: f64) -> Vec<(f64, f64)> {
    let x = s.observable(obs);
    s.times
        .iter()
        .zip(x)
        .filter(|(&t, _)| t != t_c)
        .map(|(&t, &v)| (t - t_c, v))
        .collect()
}
