//! Fisher zeros: numeric-zero regions `Re Gamma(t + i s) < ln eps` of the
//! continued Loschmidt amplitude, their tongue tips, and real-axis crossings.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loschmidt::{complex_term, ImaginaryFactor, DEFAULT_GAMMA_MAX};
use crate::numeric::{fit_line, sincos_product, LineFit, PairwiseSum, SinCos};
use crate::spectrum::{build_mode_bank, ModeBank, SpectrumSpec};

pub const DEFAULT_EPS_ZERO: f64 = 1e-12;

/// Rectangular grid in the complex time plane, `z = t + i s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub n_t: usize,
    pub n_s: usize,
}

/// `mid + half * (2i - (n-1)) / (n-1)`: mirror nodes are exact negatives.
fn node(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let m = (n - 1) as f64;
    mid + half * ((2 * i) as f64 - m) / m
}

impl ComplexWindow {
    pub fn new(t_min: f64, t_max: f64, s_min: f64, s_max: f64, n_t: usize, n_s: usize) -> Result<Self> {
        let w = Self {
            t_min,
            t_max,
            s_min,
            s_max,
            n_t,
            n_s,
        };
        w.validate()?;
        Ok(w)
    }

    /// `t_c +- half_t` by `-s_max ..= s_max`.
    pub fn centered(t_c: f64, half_t: f64, s_max: f64, n_t: usize, n_s: usize) -> Result<Self> {
        Self::new(t_c - half_t, t_c + half_t, -s_max, s_max, n_t, n_s)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.t_min, self.t_max, self.s_min, self.s_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || !(self.t_min < self.t_max) || !(self.s_min < self.s_max) {
            return Err(Error::InvalidWindow(format!(
                "need t_min < t_max and s_min < s_max, got t [{}, {}], s [{}, {}]",
                self.t_min, self.t_max, self.s_min, self.s_max
            )));
        }
        if self.n_t < 16 || self.n_s < 16 {
            return Err(Error::InvalidWindow(format!(
                "resolutions must be at least 16, got {} x {}",
                self.n_t, self.n_s
            )));
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.s_min == -self.s_max
    }

    pub fn t_at(&self, i: usize) -> f64 {
        node(self.t_min, self.t_max, self.n_t, i)
    }

    pub fn s_at(&self, j: usize) -> f64 {
        node(self.s_min, self.s_max, self.n_s, j)
    }

    pub fn cell_width(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_t - 1) as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.s_max - self.s_min) / (self.n_s - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Re and Im of Gamma on a [`ComplexWindow`], row-major with rows along s.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeField {
    pub window: ComplexWindow,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub gamma_max: f64,
    pub clamp_events: u64,
}

impl AmplitudeField {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.window.n_t + i
    }

    pub fn re_at(&self, i: usize, j: usize) -> f64 {
        self.re[self.index(i, j)]
    }

    pub fn im_at(&self, i: usize, j: usize) -> f64 {
        self.im[self.index(i, j)]
    }

    pub fn min_re(&self) -> f64 {
        self.re.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn scan(bank: &ModeBank, window: &ComplexWindow) -> Result<AmplitudeField> {
    scan_with(bank, window, DEFAULT_GAMMA_MAX)
}

/// Row factors are precomputed in blocks of at most this many entries.
const FACTOR_BUDGET: usize = 1 << 22;

pub fn scan_with(bank: &ModeBank, window: &ComplexWindow, gamma_max: f64) -> Result<AmplitudeField> {
    window.validate()?;
    let (n_t, n_s) = (window.n_t, window.n_s);
    let omega = bank.frequencies();
    let weights = bank.weights();
    let mut re = vec![0.0; n_t * n_s];
    let mut im = vec![0.0; n_t * n_s];
    let mut clamp_events = 0;

    let rows_per_block = (FACTOR_BUDGET / omega.len().max(1)).clamp(1, n_s);
    let mut row0 = 0;
    while row0 < n_s {
        let rows = rows_per_block.min(n_s - row0);
        let factors: Vec<Vec<ImaginaryFactor>> = (row0..row0 + rows)
            .into_par_iter()
            .map(|j| {
                let s = window.s_at(j);
                omega.iter().map(|&w| ImaginaryFactor::new(w, s)).collect()
            })
            .collect();
        let columns: Vec<(Vec<(f64, f64)>, u64)> = (0..n_t)
            .into_par_iter()
            .map(|i| {
                let t = window.t_at(i);
                let trig: Vec<SinCos> = omega.iter().map(|&w| sincos_product(w, t)).collect();
                let mut events = 0;
                let values = factors
                    .iter()
                    .map(|row| {
                        let mut acc_re = PairwiseSum::new();
                        let mut acc_im = PairwiseSum::new();
                        for k in 0..omega.len() {
                            let (r, m) =
                                complex_term(weights[k], &trig[k], &row[k], gamma_max, &mut events);
                            acc_re.add(r);
                            acc_im.add(m);
                        }
                        (acc_re.total(), acc_im.total())
                    })
                    .collect();
                (values, events)
            })
            .collect();
        for (i, (values, events)) in columns.into_iter().enumerate() {
            clamp_events += events;
            for (r, (vr, vi)) in values.into_iter().enumerate() {
                let idx = (row0 + r) * n_t + i;
                re[idx] = vr;
                im[idx] = vi;
            }
        }
        row0 += rows;
    }
    Ok(AmplitudeField {
        window: *window,
        re,
        im,
        gamma_max,
        clamp_events,
    })
}

/// One connected component of `Re Gamma < ln eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRegion {
    pub id: usize,
    /// Marching-squares level curves, as `(t, s)` polylines.
    pub boundary: Vec<Vec<(f64, f64)>>,
    pub tip_t: f64,
    pub tip_s: f64,
    pub touches_edge: bool,
    /// Grid nodes inside the region.
    pub n_points: usize,
}

impl ZeroRegion {
    pub fn boundary_points(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.boundary.iter().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    /// Between nodes (i, j) and (i + 1, j).
    Horizontal(usize, usize),
    /// Between nodes (i, j) and (i, j + 1).
    Vertical(usize, usize),
}

/// Connected components (4-neighbour) of the numeric-zero set, with boundaries.
pub fn extract_zero_regions(field: &AmplitudeField, eps_zero: f64) -> Result<Vec<ZeroRegion>> {
    if !(eps_zero > 0.0 && eps_zero < 1.0) {
        return Err(Error::InvalidWindow(format!("eps_zero must lie in (0, 1), got {eps_zero}")));
    }
    let level = eps_zero.ln();
    let w = &field.window;
    let (n_t, n_s) = (w.n_t, w.n_s);
    let below = |i: usize, j: usize| field.re[j * n_t + i] < level;

    const NONE: usize = usize::MAX;
    let mut label = vec![NONE; n_t * n_s];
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for j in 0..n_s {
        for i in 0..n_t {
            if !below(i, j) || label[j * n_t + i] != NONE {
                continue;
            }
            let id = members.len();
            let mut list = Vec::new();
            let mut queue = VecDeque::from([(i, j)]);
            label[j * n_t + i] = id;
            while let Some((a, b)) = queue.pop_front() {
                list.push((a, b));
                let mut visit = |x: usize, y: usize| {
                    if below(x, y) && label[y * n_t + x] == NONE {
                        label[y * n_t + x] = id;
                        queue.push_back((x, y));
                    }
                };
                if a > 0 {
                    visit(a - 1, b);
                }
                if a + 1 < n_t {
                    visit(a + 1, b);
                }
                if b > 0 {
                    visit(a, b - 1);
                }
                if b + 1 < n_s {
                    visit(a, b + 1);
                }
            }
            members.push(list);
        }
    }
    if members.is_empty() {
        return Ok(Vec::new());
    }

    let node_point = |i: usize, j: usize| (w.t_at(i), w.s_at(j), field.re[j * n_t + i]);
    let crossing = |e: Edge| -> (f64, f64) {
        let ((ta, sa, va), (tb, sb, vb)) = match e {
            Edge::Horizontal(i, j) => (node_point(i, j), node_point(i + 1, j)),
            Edge::Vertical(i, j) => (node_point(i, j), node_point(i, j + 1)),
        };
        let f = (level - va) / (vb - va);
        (ta + f * (tb - ta), sa + f * (sb - sa))
    };

    let mut segments: Vec<Vec<(Edge, Edge)>> = vec![Vec::new(); members.len()];
    for j in 0..n_s - 1 {
        for i in 0..n_t - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let state = corners.map(|(a, b)| below(a, b));
            let count = state.iter().filter(|&&b| b).count();
            if count == 0 || count == 4 {
                continue;
            }
            // edge q joins corner q and corner q + 1
            let edges = [
                Edge::Horizontal(i, j),
                Edge::Vertical(i + 1, j),
                Edge::Horizontal(i, j + 1),
                Edge::Vertical(i, j),
            ];
            let saddle = count == 2 && state[0] == state[2];
            if saddle {
                for q in 0..4 {
                    if state[q] {
                        let (a, b) = corners[q];
                        segments[label[b * n_t + a]].push((edges[(q + 3) % 4], edges[q]));
                    }
                }
            } else {
                let cut: Vec<Edge> = (0..4)
                    .filter(|&q| state[q] != state[(q + 1) % 4])
                    .map(|q| edges[q])
                    .collect();
                let q = state.iter().position(|&b| b).unwrap();
                let (a, b) = corners[q];
                segments[label[b * n_t + a]].push((cut[0], cut[1]));
            }
        }
    }

    let regions = members
        .iter()
        .enumerate()
        .map(|(id, nodes)| {
            let boundary: Vec<Vec<(f64, f64)>> = chain(&segments[id])
                .into_iter()
                .map(|path| path.into_iter().map(crossing).collect())
                .collect();
            let touches_edge = nodes
                .iter()
                .any(|&(a, b)| a == 0 || b == 0 || a + 1 == n_t || b + 1 == n_s);
            let spans_axis = nodes.iter().any(|&(_, b)| w.s_at(b) == 0.0)
                || (nodes.iter().any(|&(_, b)| w.s_at(b) > 0.0)
                    && nodes.iter().any(|&(_, b)| w.s_at(b) < 0.0));
            let closest = |pts: &mut dyn Iterator<Item = (f64, f64)>| {
                pts.fold(None, |best: Option<(f64, f64)>, p| match best {
                    Some(b) if (b.1.abs(), b.0) <= (p.1.abs(), p.0) => Some(b),
                    _ => Some(p),
                })
            };
            let (tip_t, tip_s) = if spans_axis || boundary.is_empty() {
                let (t, s) = closest(&mut nodes.iter().map(|&(a, b)| (w.t_at(a), w.s_at(b)))).unwrap();
                (t, if spans_axis { 0.0 } else { s })
            } else {
                closest(&mut boundary.iter().flatten().copied()).unwrap()
            };
            ZeroRegion {
                id,
                boundary,
                tip_t,
                tip_s,
                touches_edge,
                n_points: nodes.len(),
            }
        })
        .collect();
    Ok(regions)
}

/// Join segments sharing an edge into polylines: open chains first, then loops.
fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut incident: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut paths = Vec::new();
    let walk = |start: Edge, first: usize, used: &mut Vec<bool>| {
        let mut path = vec![start];
        let mut at = start;
        let mut seg = Some(first);
        while let Some(k) = seg {
            used[k] = true;
            let (a, b) = segments[k];
            at = if a == at { b } else { a };
            path.push(at);
            seg = incident[&at].iter().copied().find(|&m| !used[m]);
        }
        path
    };
    let ends: Vec<(Edge, usize)> = incident
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(&e, v)| (e, v[0]))
        .collect();
    for (edge, k) in ends {
        if !used[k] {
            paths.push(walk(edge, k, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            paths.push(walk(segments[k].0, k, &mut used));
        }
    }
    paths
}

/// One tongue tip at one system size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipRow {
    pub n_modes: usize,
    pub region_id: usize,
    pub t_star: f64,
    pub s_star: f64,
    pub touches_edge: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TipTable {
    pub rows: Vec<TipRow>,
    /// Grid cell height in s for every scanned size.
    pub cell_heights: BTreeMap<usize, f64>,
    pub clamp_events: u64,
}

impl TipTable {
    pub fn sizes(&self) -> Vec<usize> {
        self.cell_heights.keys().copied().collect()
    }

    pub fn tips_at(&self, n_modes: usize) -> impl Iterator<Item = &TipRow> {
        self.rows.iter().filter(move |r| r.n_modes == n_modes)
    }
}

/// Scan every size and collect the tip of each zero region.
///
/// The window is chosen per size because the tongues narrow as `1/omega_max`.
pub fn tongue_tip_trajectory<F>(specs: &[SpectrumSpec], window_for: F, eps_zero: f64) -> Result<TipTable>
where
    F: Fn(&ModeBank) -> ComplexWindow,
{
    if specs.len() < 3 {
        return Err(Error::InsufficientSizes {
            needed: 3,
            got: specs.len(),
        });
    }
    if let Some(bad) = specs.iter().find(|s| !specs[0].same_physics(s)) {
        return Err(Error::InvalidSpec(format!(
            "tip trajectory needs identical physics at every size; {:?} differs from {:?}",
            bad, specs[0]
        )));
    }
    let mut table = TipTable::default();
    for spec in specs {
        let bank = build_mode_bank(spec)?;
        let window = window_for(&bank);
        let field = scan(&bank, &window)?;
        table.clamp_events += field.clamp_events;
        table.cell_heights.insert(spec.n_modes, window.cell_height());
        for region in extract_zero_regions(&field, eps_zero)? {
            table.rows.push(TipRow {
                n_modes: spec.n_modes,
                region_id: region.id,
                t_star: region.tip_t,
                s_star: region.tip_s,
                touches_edge: region.touches_edge,
            });
        }
    }
    Ok(table)
}

/// A tongue followed across sizes and extrapolated to the real axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Tip real part at the largest size.
    pub t_c: f64,
    /// Intercept a of |s*| = a + b / ln N.
    pub extrapolated_s: f64,
    pub declared: bool,
    pub fit: LineFit,
    pub sizes: Vec<usize>,
    pub s_stars: Vec<f64>,
}

/// Group tips into tongues (tips within `match_tol` in t of a tip at the largest
/// size) and extrapolate `|s*|` linearly in `1 / ln N`.
///
/// A crossing is declared when the intercept is at most the cell height of the
/// largest-size scan. Tongues seen at fewer than three sizes are skipped.
pub fn crossing_times(table: &TipTable, match_tol: f64) -> Result<Vec<Crossing>> {
    let sizes = table.sizes();
    if sizes.len() < 3 {
        return Err(Error::InsufficientSizes {
            needed: 3,
            got: sizes.len(),
        });
    }
    let largest = *sizes.last().unwrap();
    let mut top: Vec<&TipRow> = table.tips_at(largest).collect();
    top.sort_by(|a, b| a.t_star.total_cmp(&b.t_star));

    // cluster the largest-size tips (a +-s pair shares one t)
    let mut anchors: Vec<f64> = Vec::new();
    let mut group: Vec<&TipRow> = Vec::new();
    let flush = |group: &mut Vec<&TipRow>, anchors: &mut Vec<f64>| {
        if let Some(best) = group.iter().min_by(|a, b| a.s_star.abs().total_cmp(&b.s_star.abs())) {
            anchors.push(best.t_star);
        }
        group.clear();
    };
    for row in top {
        if group.last().is_some_and(|last| row.t_star - last.t_star > match_tol) {
            flush(&mut group, &mut anchors);
        }
        group.push(row);
    }
    flush(&mut group, &mut anchors);

    let mut out = Vec::new();
    for t_ref in anchors {
        let mut used_sizes = Vec::new();
        let mut s_stars = Vec::new();
        for &n in &sizes {
            let best = table
                .tips_at(n)
                .filter(|r| (r.t_star - t_ref).abs() <= match_tol)
                .map(|r| r.s_star.abs())
                .reduce(f64::min);
            if let Some(s) = best {
                used_sizes.push(n);
                s_stars.push(s);
            }
        }
        if used_sizes.len() < 3 {
            continue;
        }
        let x: Vec<f64> = used_sizes.iter().map(|&n| 1.0 / (n as f64).ln()).collect();
        let Some(fit) = fit_line(&x, &s_stars) else {
            continue;
        };
        let height = table.cell_heights[&largest];
        out.push(Crossing {
            t_c: t_ref,
            extrapolated_s: fit.intercept,
            declared: fit.intercept <= height,
            fit,
            sizes: used_sizes,
            s_stars,
        });
    }
    Ok(out)
}
