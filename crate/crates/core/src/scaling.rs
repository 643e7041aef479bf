//! Critical-point detection and the three scaling fits: logarithmic in system
//! size, logarithmic in distance to the critical time, and a power law.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dtop, DtopOptions, DtopSeries, Observable};
use crate::grid::TimeGrid;
use crate::loschmidt::ThermalSpec;
use crate::numeric::{fit_line, LineFit};
use crate::spectrum::ModeBank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KinkType {
    LogDivergent,
    DerivativeJump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t_c: f64,
    /// Grid index of `t_c`.
    pub index: usize,
    pub observable: Observable,
    pub kind: KinkType,
    /// Signed value of largest magnitude near `t_c` at the largest size.
    pub extremum: f64,
}

/// Knobs of [`find_critical_points_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    /// Growth candidates must exceed this multiple of the median growth.
    pub growth_ratio: f64,
    /// Kink candidates: slope change above this multiple of the median slope change.
    pub kink_ratio: f64,
    /// Relative increase of the local extremum, smallest to largest size, that
    /// counts as growth; every intermediate size step must contribute its share.
    pub growth_threshold: f64,
    /// Local growth exponent d ln|X| / d ln N separating logarithmic from power growth.
    pub power_split: f64,
    /// Half-width, in grid steps, of the window for local extrema.
    pub window: usize,
    /// Candidates closer than this many grid steps are merged.
    pub merge: usize,
    /// Classified points closer than this fraction of the grid span form one
    /// cluster; only its lowest-order, most significant member is kept.
    pub separation: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            growth_ratio: 10.0,
            kink_ratio: 10.0,
            growth_threshold: 0.1,
            power_split: 0.5,
            window: 1,
            merge: 1,
            separation: 0.1,
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Signed value of largest magnitude among `values[lo..=hi]`.
fn extremum(values: &[f64], lo: usize, hi: usize) -> f64 {
    values[lo..=hi]
        .iter()
        .copied()
        .fold(0.0, |best, v| if v.abs() > best.abs() { v } else { best })
}

fn check_sizes(series_by_size: &BTreeMap<usize, DtopSeries>) -> Result<&DtopSeries> {
    if series_by_size.len() < 3 {
        return Err(Error::InsufficientSizes {
            needed: 3,
            got: series_by_size.len(),
        });
    }
    let first = series_by_size.values().next().unwrap();
    if series_by_size.values().any(|s| s.times != first.times) {
        return Err(Error::InvalidGrid("series do not share a time grid".into()));
    }
    Ok(first)
}

pub fn find_critical_points(series_by_size: &BTreeMap<usize, DtopSeries>) -> Result<Vec<CriticalPoint>> {
    find_critical_points_with(series_by_size, &CriticalOptions::default())
}

/// Locate and classify nonanalytic points of nu_D and its time derivatives.
///
/// Candidates are grid points where the local extremum of an observable grows
/// with N far beyond its typical growth, or where the one-sided slopes of an
/// observable differ far beyond their typical difference. Each candidate is
/// then classified from the lowest order up:
///
/// * `X_m` grows logarithmically in N: log-divergent in `X_m`.
/// * `X_m` grows like a power of N: derivative jump in `X_(m-1)`.
/// * `X_m` stays bounded but kinks, `X_(m+1)` stays bounded and `X_(m+2)`
///   grows like a power: derivative jump in `X_(m+1)`.
///
/// Growth only counts when it exceeds `growth_ratio` times the median growth of
/// that observable over the grid. Candidates matching no rule are dropped, and
/// of classified points closer than `separation` times the grid span only the
/// lowest-order, most significant one survives.
pub fn find_critical_points_with(
    series_by_size: &BTreeMap<usize, DtopSeries>,
    opts: &CriticalOptions,
) -> Result<Vec<CriticalPoint>> {
    let first = check_sizes(series_by_size)?;
    let n = first.len();
    let r = opts.window.max(1);
    if n < 2 * r + 3 {
        return Err(Error::InvalidGrid(format!("need at least {} grid points, got {n}", 2 * r + 3)));
    }
    let sizes: Vec<usize> = series_by_size.keys().copied().collect();
    let series: Vec<&DtopSeries> = series_by_size.values().collect();
    let big = *series.last().unwrap();
    let small = series[0];
    let times = &big.times;
    let interior = r..n - r;

    // candidate signals
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    let mut push_peaks = |signal: &[f64], ratio: f64| {
        let mut mags: Vec<f64> = interior.clone().map(|i| signal[i].abs()).collect();
        let typical = median(&mut mags);
        for i in interior.clone() {
            let v = signal[i];
            if v > ratio * typical && v > 0.0 && v >= signal[i - 1] && v >= signal[i + 1] {
                candidates.push((i, v / typical.max(f64::MIN_POSITIVE)));
            }
        }
    };
    let mut typical_growth = [0.0; 3];
    for obs in Observable::ALL {
        let (a, b) = (big.observable(obs), small.observable(obs));
        let mut growth = vec![0.0; n];
        for i in interior.clone() {
            growth[i] = extremum(a, i - r, i + r).abs() - extremum(b, i - r, i + r).abs();
        }
        let mut mags: Vec<f64> = interior.clone().map(|i| growth[i].abs()).collect();
        typical_growth[obs.order()] = median(&mut mags);
        push_peaks(&growth, opts.growth_ratio);
    }
    for obs in [Observable::NuD, Observable::NuDDot] {
        let x = big.observable(obs);
        let mut kink = vec![0.0; n];
        for i in 1..n - 1 {
            let left = (x[i] - x[i - 1]) / (times[i] - times[i - 1]);
            let right = (x[i + 1] - x[i]) / (times[i + 1] - times[i]);
            kink[i] = (right - left).abs();
        }
        push_peaks(&kink, opts.kink_ratio);
    }
    candidates.sort_by_key(|c| c.0);
    candidates.dedup_by_key(|c| c.0);

    // merge runs of nearby candidates; the strongest represents the run, ties
    // going to the one nearest the run's centre
    let mut runs: Vec<Vec<(usize, f64)>> = Vec::new();
    for c in candidates {
        match runs.last_mut() {
            Some(run) if c.0 - run.last().unwrap().0 <= opts.merge => run.push(c),
            _ => runs.push(vec![c]),
        }
    }
    let merged: Vec<(usize, f64)> = runs
        .iter()
        .map(|run| {
            let centre = 0.5 * (run[0].0 + run[run.len() - 1].0) as f64;
            *run.iter()
                .min_by(|a, b| {
                    b.1.total_cmp(&a.1)
                        .then((a.0 as f64 - centre).abs().total_cmp(&(b.0 as f64 - centre).abs()))
                })
                .unwrap()
        })
        .collect();

    let local = |s: &DtopSeries, obs: Observable, i: usize| extremum(s.observable(obs), i - r, i + r);
    // Growth of the local extremum with N: Log when every size step increases it
    // and the local exponent d ln|X| / d ln N stays below the split, Power when
    // it stays above. The total increase must also stand out against the
    // observable's typical growth over the grid; on grids commensurate with the
    // mode ladder, exactly cancelling sums leave rounding residues that grow
    // like N.
    #[derive(PartialEq)]
    enum Growth {
        None,
        Log,
        Power,
    }
    let significance = |obs: Observable, i: usize| -> f64 {
        let gain = local(big, obs, i).abs() - local(small, obs, i).abs();
        gain / typical_growth[obs.order()].max(f64::MIN_POSITIVE)
    };
    let growth_at = |obs: Observable, i: usize| -> Growth {
        let ext: Vec<f64> = series.iter().map(|s| local(s, obs, i).abs()).collect();
        let step = (1.0 + opts.growth_threshold).powf(1.0 / (ext.len() - 1) as f64);
        if significance(obs, i) <= opts.growth_ratio || !ext.windows(2).all(|p| p[1] > step * p[0]) {
            return Growth::None;
        }
        let exponents: Vec<f64> = (1..ext.len())
            .map(|k| (ext[k] / ext[k - 1]).ln() / (sizes[k] as f64 / sizes[k - 1] as f64).ln())
            .collect();
        if exponents.iter().all(|&q| q >= opts.power_split) {
            Growth::Power
        } else if exponents.last().is_some_and(|&q| q < opts.power_split) {
            Growth::Log
        } else {
            Growth::None
        }
    };
    let kinked = |obs: Observable, i: usize| -> bool {
        let x = big.observable(obs);
        let slope_change = |j: usize| {
            let left = (x[j] - x[j - 1]) / (times[j] - times[j - 1]);
            let right = (x[j + 1] - x[j]) / (times[j + 1] - times[j]);
            (right - left).abs()
        };
        let mut all: Vec<f64> = (1..n - 1).map(slope_change).collect();
        let typical = median(&mut all);
        (i.saturating_sub(r).max(1)..=(i + r).min(n - 2)).any(|j| slope_change(j) > opts.kink_ratio * typical)
    };

    // (point, significance of the growth that classified it)
    let mut classified: Vec<(CriticalPoint, f64)> = Vec::new();
    for (i, _) in merged {
        let mut found = None;
        for m in 0..3 {
            let obs = Observable::from_order(m).unwrap();
            match growth_at(obs, i) {
                Growth::Log => {
                    found = Some((obs, KinkType::LogDivergent, significance(obs, i)));
                    break;
                }
                Growth::Power => {
                    found = Observable::from_order(m.wrapping_sub(1))
                        .map(|o| (o, KinkType::DerivativeJump, significance(obs, i)));
                    break;
                }
                Growth::None => {}
            }
            if m < 2 && kinked(obs, i) {
                let next = Observable::from_order(m + 1).unwrap();
                let power_above = match Observable::from_order(m + 2) {
                    Some(o) => growth_at(o, i) == Growth::Power,
                    None => true,
                };
                if growth_at(next, i) == Growth::None && power_above {
                    let score = Observable::from_order(m + 2).map_or(0.0, |o| significance(o, i));
                    found = Some((next, KinkType::DerivativeJump, score));
                    break;
                }
            }
        }
        if let Some((observable, kind, score)) = found {
            let point = CriticalPoint {
                t_c: times[i],
                index: i,
                observable,
                kind,
                extremum: local(big, observable, i),
            };
            classified.push((point, score));
        }
    }

    // Finite-size structure around a singularity shows up as weaker
    // nonanalyticities of higher derivatives nearby; keep the lowest order, a
    // divergence over a jump of the same observable.
    let radius = opts.separation * (times[n - 1] - times[0]);
    let mut clusters: Vec<Vec<(CriticalPoint, f64)>> = Vec::new();
    for c in classified {
        match clusters.last_mut() {
            Some(cl) if c.0.t_c - cl.last().unwrap().0.t_c <= radius => cl.push(c),
            _ => clusters.push(vec![c]),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|cl| {
            cl.into_iter()
                .min_by(|a, b| {
                    let rank = |p: &CriticalPoint| (p.observable.order(), p.kind == KinkType::DerivativeJump);
                    rank(&a.0).cmp(&rank(&b.0)).then(b.1.total_cmp(&a.1))
                })
                .unwrap()
                .0
        })
        .collect())
}

/// Signed extremum of `obs` within `|t - t_c| <= half_width`, per size.
pub fn critical_values(
    series_by_size: &BTreeMap<usize, DtopSeries>,
    obs: Observable,
    t_c: f64,
    half_width: f64,
) -> Result<BTreeMap<usize, f64>> {
    series_by_size
        .iter()
        .map(|(&n, s)| {
            let x = s.observable(obs);
            let inside: Vec<usize> = (0..s.len()).filter(|&i| (s.times[i] - t_c).abs() <= half_width).collect();
            if inside.is_empty() {
                return Err(Error::AnnulusEmpty { needed: 1, got: 0 });
            }
            Ok((n, extremum(x, inside[0], *inside.last().unwrap())))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    LogSize,
    LogTime,
    PowerLaw,
}

impl FitModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitModel::LogSize => "log-size",
            FitModel::LogTime => "log-time",
            FitModel::PowerLaw => "power-law",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: FitModel,
    /// Slope: kappa, kappa' or the power-law exponent.
    pub kappa: f64,
    /// Intercept.
    pub upsilon: f64,
    pub r2: f64,
    /// Fitted range: sizes for log-size, |t - t_c| otherwise.
    pub window: (f64, f64),
    pub n_points: usize,
    /// Left and right branch slopes of two-sided fits.
    pub branches: Option<(f64, f64)>,
}

/// f(t_c) = kappa ln N + upsilon.
pub fn fit_log_size(values: &BTreeMap<usize, f64>) -> Result<ScalingFit> {
    if values.len() < 3 {
        return Err(Error::InsufficientSizes {
            needed: 3,
            got: values.len(),
        });
    }
    let (lo, hi) = (*values.keys().next().unwrap(), *values.keys().last().unwrap());
    if (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::DegenerateFit(format!("sizes {lo}..{hi} span less than two decades")));
    }
    let x: Vec<f64> = values.keys().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = values.values().copied().collect();
    let fit = fit_line(&x, &y).ok_or_else(|| Error::DegenerateFit("zero variance in ln N".into()))?;
    Ok(ScalingFit {
        model: FitModel::LogSize,
        kappa: fit.slope,
        upsilon: fit.intercept,
        r2: fit.r2,
        window: (lo as f64, hi as f64),
        n_points: fit.n,
        branches: None,
    })
}

/// Annulus `inner < |t - t_c| < outer_rel * t_c` used by time fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    /// Absolute inner radius; `None` means ten grid steps.
    pub inner: Option<f64>,
    pub outer_rel: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            inner: None,
            outer_rel: 0.2,
        }
    }
}

impl FitWindow {
    pub fn new(inner: f64, outer_rel: f64) -> Self {
        Self {
            inner: Some(inner),
            outer_rel,
        }
    }

    fn bounds(&self, times: &[f64], t_c: f64) -> Result<(f64, f64)> {
        let inner = match self.inner {
            Some(v) => v,
            None => {
                let step = times
                    .windows(2)
                    .map(|p| p[1] - p[0])
                    .reduce(f64::min)
                    .ok_or(Error::AnnulusEmpty { needed: 8, got: times.len() })?;
                10.0 * step
            }
        };
        let outer = self.outer_rel * t_c.abs();
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::InvalidGrid(format!("empty annulus ({inner}, {outer})")));
        }
        Ok((inner, outer))
    }
}

/// Indices of the left and right branches inside the annulus.
fn branches(times: &[f64], t_c: f64, inner: f64, outer: f64) -> (Vec<usize>, Vec<usize>) {
    let inside = |i: &usize| {
        let d = (times[*i] - t_c).abs();
        d > inner && d < outer
    };
    let left = (0..times.len()).filter(|i| times[*i] < t_c).filter(inside).collect();
    let right = (0..times.len()).filter(|i| times[*i] > t_c).filter(inside).collect();
    (left, right)
}

const BRANCH_TOLERANCE: f64 = 0.1;
const MIN_POINTS: usize = 8;
const MIN_BRANCH: usize = 3;

fn check_counts(left: usize, right: usize) -> Result<()> {
    if left + right < MIN_POINTS || left.min(right) < MIN_BRANCH {
        return Err(Error::AnnulusEmpty {
            needed: MIN_POINTS,
            got: left + right,
        });
    }
    Ok(())
}

/// f(t) = kappa' ln|(t - t_c) / t_c| + upsilon', fitted on each side of `t_c`.
///
/// The two branch slopes must agree within 10%; the reported slope and intercept
/// are branch averages and R^2 is the worse branch.
pub fn fit_log_time(series: &DtopSeries, obs: Observable, t_c: f64, window: &FitWindow) -> Result<ScalingFit> {
    let (inner, outer) = window.bounds(&series.times, t_c)?;
    let (left, right) = branches(&series.times, t_c, inner, outer);
    check_counts(left.len(), right.len())?;
    let f = series.observable(obs);
    let fit_branch = |idx: &[usize]| -> Result<LineFit> {
        let x: Vec<f64> = idx.iter().map(|&i| ((series.times[i] - t_c) / t_c).abs().ln()).collect();
        let y: Vec<f64> = idx.iter().map(|&i| f[i]).collect();
        fit_line(&x, &y).ok_or_else(|| Error::DegenerateFit("zero variance in log offset".into()))
    };
    let (l, r) = (fit_branch(&left)?, fit_branch(&right)?);
    if (l.slope - r.slope).abs() > BRANCH_TOLERANCE * l.slope.abs().max(r.slope.abs()) {
        return Err(Error::BranchDisagreement {
            left: l.slope,
            right: r.slope,
            tolerance: BRANCH_TOLERANCE,
        });
    }
    Ok(ScalingFit {
        model: FitModel::LogTime,
        kappa: 0.5 * (l.slope + r.slope),
        upsilon: 0.5 * (l.intercept + r.intercept),
        r2: l.r2.min(r.r2),
        window: (inner, outer),
        n_points: left.len() + right.len(),
        branches: Some((l.slope, r.slope)),
    })
}

/// Reference value for the power-law fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerLawReference {
    /// |f(t) - f(t_c)| against |t - t_c|.
    AtCritical,
    /// Per branch, |f(t) - f(t_e)| against |t - t_e|, where t_e is the annulus
    /// point closest to t_c. At a jump the finite-N value at t_c sits mid-jump,
    /// so the one-sided limit is taken from the inner edge instead.
    #[default]
    InnerEdge,
}

/// Slope of ln|f - f_ref| against ln(offset) on the largest size, averaged over
/// the two branches; R^2 is the worse branch.
pub fn fit_power_law(
    series_by_size: &BTreeMap<usize, DtopSeries>,
    obs: Observable,
    t_c: f64,
    window: &FitWindow,
    reference: PowerLawReference,
) -> Result<ScalingFit> {
    let series = series_by_size
        .values()
        .last()
        .ok_or(Error::InsufficientSizes { needed: 1, got: 0 })?;
    fit_power_law_series(series, obs, t_c, window, reference)
}

pub fn fit_power_law_series(
    series: &DtopSeries,
    obs: Observable,
    t_c: f64,
    window: &FitWindow,
    reference: PowerLawReference,
) -> Result<ScalingFit> {
    let times = &series.times;
    let f = series.observable(obs);
    let (inner, outer) = window.bounds(times, t_c)?;
    let (left, right) = branches(times, t_c, inner, outer);
    check_counts(left.len(), right.len())?;

    let at_critical = || -> Result<f64> {
        let j = times.partition_point(|&t| t < t_c);
        if j < times.len() && times[j] == t_c {
            return Ok(f[j]);
        }
        if j == 0 || j == times.len() {
            return Err(Error::InvalidGrid(format!("t_c = {t_c} lies outside the grid")));
        }
        let w = (t_c - times[j - 1]) / (times[j] - times[j - 1]);
        Ok(f[j - 1] + w * (f[j] - f[j - 1]))
    };
    let fit_branch = |idx: &[usize]| -> Result<LineFit> {
        let (ref_t, ref_f, points): (f64, f64, Vec<usize>) = match reference {
            PowerLawReference::AtCritical => (t_c, at_critical()?, idx.to_vec()),
            PowerLawReference::InnerEdge => {
                let edge = *idx
                    .iter()
                    .min_by(|&&a, &&b| (times[a] - t_c).abs().total_cmp(&(times[b] - t_c).abs()))
                    .unwrap();
                (times[edge], f[edge], idx.iter().copied().filter(|&i| i != edge).collect())
            }
        };
        let (x, y): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter_map(|&i| {
                let dy = (f[i] - ref_f).abs();
                (dy > 0.0).then(|| ((times[i] - ref_t).abs().ln(), dy.ln()))
            })
            .unzip();
        fit_line(&x, &y).ok_or_else(|| Error::DegenerateFit("too few distinct points in branch".into()))
    };
    let (l, r) = (fit_branch(&left)?, fit_branch(&right)?);
    Ok(ScalingFit {
        model: FitModel::PowerLaw,
        kappa: 0.5 * (l.slope + r.slope),
        upsilon: 0.5 * (l.intercept + r.intercept),
        r2: l.r2.min(r.r2),
        window: (inner, outer),
        n_points: l.n + r.n,
        branches: Some((l.slope, r.slope)),
    })
}

/// |kappa' / kappa|; both fits need R^2 > 0.99.
pub fn dynamical_exponent(size_fit: &ScalingFit, time_fit: &ScalingFit) -> Result<f64> {
    for fit in [size_fit, time_fit] {
        if !(fit.r2 > 0.99) {
            return Err(Error::LowQualityFit { r2: fit.r2 });
        }
    }
    if size_fit.kappa == 0.0 {
        return Err(Error::DegenerateFit("kappa is zero".into()));
    }
    Ok((time_fit.kappa / size_fit.kappa).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalFit {
    pub n_th: f64,
    pub fit: ScalingFit,
    /// Raised when R^2 < 0.98.
    pub deviates: bool,
}

pub const DEVIATION_R2: f64 = 0.98;

/// Power-law fit of nu_D_dot at `t_c` for each temperature.
pub fn thermal_scaling_sweep(
    bank: &ModeBank,
    thermals: &[ThermalSpec],
    t_c: f64,
    grid: &TimeGrid,
    window: &FitWindow,
    opts: &DtopOptions,
) -> Result<Vec<ThermalFit>> {
    if !thermals.iter().any(|t| t.is_zero()) {
        return Err(Error::InvalidThermal("thermal list must include n_th = 0".into()));
    }
    thermals
        .iter()
        .map(|&thermal| {
            let series = dtop(bank, grid, &opts.with_thermal(thermal));
            let fit = fit_power_law_series(&series, Observable::NuDDot, t_c, window, PowerLawReference::InnerEdge)?;
            Ok(ThermalFit {
                n_th: thermal.n_th,
                fit,
                deviates: fit.r2 < DEVIATION_R2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DtopMethod;

    fn synthetic(times: Vec<f64>, f: impl Fn(f64) -> f64) -> DtopSeries {
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        DtopSeries {
            nu: values.clone(),
            nu_dot: values.clone(),
            nu_ddot: values,
            times,
            method: DtopMethod::Analytic,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn log_size_exact_line() {
        let values: BTreeMap<usize, f64> = [100, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| (n, 2.0 * (n as f64).ln() + 3.0))
            .collect();
        let fit = fit_log_size(&values).unwrap();
        assert!(rel(fit.kappa, 2.0) < 1e-9 && rel(fit.upsilon, 3.0) < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_size_preconditions() {
        let two: BTreeMap<usize, f64> = [(10, 1.0), (1000, 2.0)].into_iter().collect();
        assert!(matches!(fit_log_size(&two), Err(Error::InsufficientSizes { .. })));
        let narrow: BTreeMap<usize, f64> = [(10, 1.0), (20, 2.0), (50, 3.0)].into_iter().collect();
        assert!(matches!(fit_log_size(&narrow), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn log_time_exact_line() {
        let t_c = 3.0;
        let grid = TimeGrid::uniform(2.0, 4.0, 1e-3).unwrap();
        let s = synthetic(grid.times().to_vec(), |t| 5.0 * ((t - t_c) / t_c).abs().ln() + 1.0);
        let fit = fit_log_time(&s, Observable::NuD, t_c, &FitWindow::default()).unwrap();
        assert!(rel(fit.kappa, 5.0) < 1e-9 && rel(fit.upsilon, 1.0) < 1e-9, "{fit:?}");
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.window.0 >= 10.0 * 1e-3 * (1.0 - 1e-9));
    }

    #[test]
    fn log_time_branch_disagreement() {
        let t_c = 3.0;
        let grid = TimeGrid::uniform(2.0, 4.0, 1e-3).unwrap();
        let s = synthetic(grid.times().to_vec(), |t| {
            let k = if t < t_c { 5.0 } else { 3.0 };
            k * ((t - t_c) / t_c).abs().ln()
        });
        assert!(matches!(
            fit_log_time(&s, Observable::NuD, t_c, &FitWindow::default()),
            Err(Error::BranchDisagreement { .. })
        ));
    }

    #[test]
    fn annulus_must_hold_points() {
        let grid = TimeGrid::uniform(0.0, 10.0, 1.0).unwrap();
        let s = synthetic(grid.times().to_vec(), |t| t);
        assert!(matches!(
            fit_log_time(&s, Observable::NuD, 5.0, &FitWindow::default()),
            Err(Error::AnnulusEmpty { .. }) | Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn power_law_exact() {
        let t_c = 2.0;
        let grid = TimeGrid::uniform(1.5, 2.5, 1e-3).unwrap();
        let s = synthetic(grid.times().to_vec(), |t| 4.0 * (t - t_c).abs());
        let map: BTreeMap<usize, DtopSeries> = [(1, s)].into_iter().collect();
        for reference in [PowerLawReference::AtCritical, PowerLawReference::InnerEdge] {
            let fit = fit_power_law(&map, Observable::NuDDot, t_c, &FitWindow::default(), reference).unwrap();
            assert!(rel(fit.kappa, 1.0) < 1e-9, "{reference:?} {fit:?}");
            assert!((fit.r2 - 1.0).abs() < 1e-12);
        }
        let s = synthetic(grid.times().to_vec(), |t| 0.7 * (t - t_c).abs().powf(1.7));
        let map: BTreeMap<usize, DtopSeries> = [(1, s)].into_iter().collect();
        let fit = fit_power_law(&map, Observable::NuD, t_c, &FitWindow::default(), PowerLawReference::AtCritical)
            .unwrap();
        assert!(rel(fit.kappa, 1.7) < 1e-9);
        assert!(rel(fit.upsilon, 0.7f64.ln()) < 1e-9);
    }

    #[test]
    fn dynamical_exponent_rules() {
        let fit = |kappa: f64, r2: f64| ScalingFit {
            model: FitModel::LogSize,
            kappa,
            upsilon: 0.0,
            r2,
            window: (0.0, 1.0),
            n_points: 3,
            branches: None,
        };
        assert_eq!(dynamical_exponent(&fit(1.0, 1.0), &fit(-1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(dynamical_exponent(&fit(-3.8, 1.0), &fit(3.8, 1.0)).unwrap(), 1.0);
        assert!(matches!(
            dynamical_exponent(&fit(1.0, 0.95), &fit(-1.0, 1.0)),
            Err(Error::LowQualityFit { .. })
        ));
    }

    #[test]
    fn critical_points_need_three_sizes() {
        let grid = TimeGrid::uniform(0.0, 1.0, 0.01).unwrap();
        let map: BTreeMap<usize, DtopSeries> =
            [(10, synthetic(grid.times().to_vec(), |t| t)), (20, synthetic(grid.times().to_vec(), |t| t))]
                .into_iter()
                .collect();
        assert!(matches!(find_critical_points(&map), Err(Error::InsufficientSizes { .. })));
    }

    #[test]
    fn synthetic_log_spike_is_classified() {
        // nu_D = -ln(|t - 1| + 1/N): logarithmic growth at t = 1
        let grid = TimeGrid::uniform(0.0, 2.0, 0.01).unwrap();
        let map: BTreeMap<usize, DtopSeries> = [100usize, 1000, 10_000]
            .iter()
            .map(|&n| {
                let cut = 1.0 / n as f64;
                let mut s = synthetic(grid.times().to_vec(), |t| -((t - 1.0).abs() + cut).ln() + 0.1 * t);
                s.nu_dot = grid.times().iter().map(|t| 0.1 * t.sin()).collect();
                s.nu_ddot = grid.times().iter().map(|t| 0.1 * t.cos()).collect();
                (n, s)
            })
            .collect();
        let points = find_critical_points(&map).unwrap();
        assert_eq!(points.len(), 1, "{points:?}");
        assert_eq!(points[0].observable, Observable::NuD);
        assert_eq!(points[0].kind, KinkType::LogDivergent);
        assert!((points[0].t_c - 1.0).abs() < 1e-9);
    }
}
