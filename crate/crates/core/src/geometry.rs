//! Geometric phase of the displaced modes and the dynamical topological order
//! parameter `nu_D = sum_k d phi_k / d omega_k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::loschmidt::ThermalSpec;
use crate::numeric::{sincos_product, PairwiseSum};
use crate::spectrum::ModeBank;

/// phi = w (omega t - sin omega t), or `-w sin omega t` without the linear part.
pub fn mode_phase(weight: f64, omega: f64, t: f64, include_linear: bool) -> f64 {
    let sin = sincos_product(omega, t).sin;
    if include_linear {
        weight * (omega * t - sin)
    } else {
        -(weight * sin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub include_linear: bool,
}

pub fn total_geometric_phase(bank: &ModeBank, grid: &TimeGrid, include_linear: bool) -> PhaseSeries {
    let values = grid
        .times()
        .par_iter()
        .map(|&t| {
            let mut acc = PairwiseSum::new();
            for (&omega, &w) in bank.frequencies().iter().zip(bank.weights()) {
                acc.add(mode_phase(w, omega, t, include_linear));
            }
            acc.total()
        })
        .collect();
    PhaseSeries {
        times: grid.times().to_vec(),
        values,
        include_linear,
    }
}

/// How `d w / d omega` treats the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingDerivative {
    /// g_k follows the coupling law g(omega).
    #[default]
    ChainRule,
    /// g_k held at its tabulated value.
    FixedCoupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtopOptions {
    pub include_linear: bool,
    pub coupling: CouplingDerivative,
    /// Finite temperature multiplies w(omega) by coth(beta omega / 2).
    pub thermal: ThermalSpec,
}

impl Default for DtopOptions {
    fn default() -> Self {
        Self {
            include_linear: true,
            coupling: CouplingDerivative::ChainRule,
            thermal: ThermalSpec::zero(),
        }
    }
}

impl DtopOptions {
    pub fn oscillatory_only(mut self) -> Self {
        self.include_linear = false;
        self
    }

    pub fn with_coupling(mut self, coupling: CouplingDerivative) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_thermal(mut self, thermal: ThermalSpec) -> Self {
        self.thermal = thermal;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtopMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "nu_D")]
    NuD,
    #[serde(rename = "nu_D_dot")]
    NuDDot,
    #[serde(rename = "nu_D_ddot")]
    NuDDdot,
}

impl Observable {
    pub const ALL: [Observable; 3] = [Observable::NuD, Observable::NuDDot, Observable::NuDDdot];

    pub fn order(&self) -> usize {
        *self as usize
    }

    pub fn from_order(order: usize) -> Option<Self> {
        Self::ALL.get(order).copied()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Observable::NuD => "nu_D",
            Observable::NuDDot => "nu_D_dot",
            Observable::NuDDdot => "nu_D_ddot",
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtopSeries {
    pub times: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_dot: Vec<f64>,
    pub nu_ddot: Vec<f64>,
    pub method: DtopMethod,
}

impl DtopSeries {
    pub fn observable(&self, obs: Observable) -> &[f64] {
        match obs {
            Observable::NuD => &self.nu,
            Observable::NuDDot => &self.nu_dot,
            Observable::NuDDdot => &self.nu_ddot,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Per-mode w(omega_k) and w'(omega_k) under the chosen derivative convention.
pub fn dtop_weights(bank: &ModeBank, opts: &DtopOptions) -> (Vec<f64>, Vec<f64>) {
    let power = match opts.coupling {
        CouplingDerivative::ChainRule => bank.spec().effective_alpha() - 2.0,
        CouplingDerivative::FixedCoupling => -2.0,
    };
    let fund = bank.fundamental();
    bank.frequencies()
        .iter()
        .zip(bank.weights())
        .map(|(&omega, &w)| {
            let wp = power * w / omega;
            if opts.thermal.is_zero() {
                (w, wp)
            } else {
                let c = opts.thermal.coth_factor(omega, fund);
                let dc = opts.thermal.coth_derivative(omega, fund);
                (w * c, wp * c + w * dc)
            }
        })
        .unzip()
}

/// nu_D, its first and second time derivatives, from term-wise closed forms.
pub fn dtop(bank: &ModeBank, grid: &TimeGrid, opts: &DtopOptions) -> DtopSeries {
    let (w, wp) = dtop_weights(bank, opts);
    let omega = bank.frequencies();
    // a = d(w omega)/d omega, b = omega (a + w)
    let a: Vec<f64> = (0..omega.len()).map(|k| wp[k] * omega[k] + w[k]).collect();
    let b: Vec<f64> = (0..omega.len()).map(|k| omega[k] * (a[k] + w[k])).collect();
    let linear = opts.include_linear;

    let rows: Vec<[f64; 3]> = grid
        .times()
        .par_iter()
        .map(|&t| {
            let mut s0 = PairwiseSum::new();
            let mut s1 = PairwiseSum::new();
            let mut s2 = PairwiseSum::new();
            for k in 0..omega.len() {
                let om = omega[k];
                let sc = sincos_product(om, t);
                let wt = w[k] * t;
                let wto = wt * om;
                if linear {
                    s0.add(wp[k] * (om * t - sc.sin) + wt * sc.one_minus_cos);
                    s1.add(a[k] * sc.one_minus_cos + wto * sc.sin);
                } else {
                    s0.add(-(wp[k] * sc.sin) - wt * sc.cos);
                    s1.add(-(a[k] * sc.cos) + wto * sc.sin);
                }
                s2.add(b[k] * sc.sin + wto * om * sc.cos);
            }
            [s0.total(), s1.total(), s2.total()]
        })
        .collect();

    DtopSeries {
        times: grid.times().to_vec(),
        nu: rows.iter().map(|r| r[0]).collect(),
        nu_dot: rows.iter().map(|r| r[1]).collect(),
        nu_ddot: rows.iter().map(|r| r[2]).collect(),
        method: DtopMethod::Analytic,
    }
}

/// Independent check of [`dtop`]: fourth-order central differences of phi_k in
/// omega_k, weight re-evaluated at the shifted frequency, then grid differences
/// in time.
///
/// The step is `h * omega_max` for every mode. Truncation error scales with
/// `(step * t)^4` and is set by the top mode either way; a per-mode step
/// `h * omega_k` would only inflate cancellation noise in the low modes, which
/// the time differencing then amplifies.
///
/// Time derivatives use nine-point central stencils on uniform grids, narrowing
/// to five and then three points near the ends; non-uniform grids use
/// three-point Lagrange stencils throughout. Agreement with [`dtop`] is only
/// meaningful at least four points away from either end.
pub fn dtop_finite_difference(
    bank: &ModeBank,
    grid: &TimeGrid,
    opts: &DtopOptions,
    h: f64,
) -> Result<DtopSeries> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(Error::StepTooSmall(h));
    }
    if grid.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "finite-difference time derivatives need 3+ points, got {}",
            grid.len()
        )));
    }
    let delta = h * bank.max_frequency();
    if 2.0 * delta >= bank.fundamental() {
        return Err(Error::InvalidGrid(format!(
            "frequency step {delta:e} reaches below zero frequency"
        )));
    }
    let spec = bank.spec();
    let fund = bank.fundamental();
    let weight_at = |k: usize, omega: f64| -> f64 {
        let w = match opts.coupling {
            CouplingDerivative::ChainRule => spec.weight(omega),
            CouplingDerivative::FixedCoupling => {
                let lambda = bank.couplings()[k] / omega;
                lambda * lambda
            }
        };
        w * opts.thermal.coth_factor(omega, fund)
    };
    // Stencil (f(-2) - 8 f(-1) + 8 f(1) - f(2)) / 12 delta. The secular part
    // W(omega) omega t differences to t * D[W omega], computed once per mode. The
    // sine part is paired with sum-to-product identities,
    //   W+ sin(w+ t) - W- sin(w- t)
    //     = (W+ + W-) cos(wt) sin(m delta t) + (W+ - W-) sin(wt) cos(m delta t),
    // so rounding only enters through t-independent coefficients.
    const PAIRS: [(f64, f64); 2] = [(1.0, 8.0), (2.0, -1.0)];
    let denom = 12.0 * delta;
    struct Stencil {
        sums: [f64; 2],
        diffs: [f64; 2],
        secular: f64,
    }
    let stencil: Vec<Stencil> = bank
        .frequencies()
        .iter()
        .enumerate()
        .map(|(k, &omega)| {
            let mut st = Stencil {
                sums: [0.0; 2],
                diffs: [0.0; 2],
                secular: 0.0,
            };
            for (i, &(m, c)) in PAIRS.iter().enumerate() {
                let (up, down) = (omega + m * delta, omega - m * delta);
                let (wu, wd) = (weight_at(k, up), weight_at(k, down));
                st.sums[i] = wu + wd;
                st.diffs[i] = wu - wd;
                st.secular += c * (wu * up - wd * down);
            }
            st.secular /= denom;
            st
        })
        .collect();
    let linear = opts.include_linear;

    let nu: Vec<f64> = grid
        .times()
        .par_iter()
        .map(|&t| {
            let shifts = PAIRS.map(|(m, _)| (m * delta * t).sin_cos());
            let mut acc = PairwiseSum::new();
            for (st, &omega) in stencil.iter().zip(bank.frequencies()) {
                let sc = sincos_product(omega, t);
                let mut d = 0.0;
                for (i, &(_, c)) in PAIRS.iter().enumerate() {
                    let (sm, cm) = shifts[i];
                    d += c * (st.sums[i] * sc.cos * sm + st.diffs[i] * sc.sin * cm);
                }
                let osc = -d / denom;
                acc.add(if linear { st.secular * t + osc } else { osc });
            }
            acc.total()
        })
        .collect();

    let (nu_dot, nu_ddot) = time_derivatives(grid, &nu);
    Ok(DtopSeries {
        times: grid.times().to_vec(),
        nu,
        nu_dot,
        nu_ddot,
        method: DtopMethod::FiniteDifference,
    })
}

/// First and second derivative at `x` of the parabola through three points.
fn lagrange3(t: [f64; 3], f: [f64; 3], x: f64) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for j in 0..3 {
        let (a, b) = (t[(j + 1) % 3], t[(j + 2) % 3]);
        let denom = (t[j] - a) * (t[j] - b);
        d1 += f[j] * ((x - a) + (x - b)) / denom;
        d2 += f[j] * 2.0 / denom;
    }
    (d1, d2)
}

const D1_9: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2_9: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

fn time_derivatives(grid: &TimeGrid, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let t = grid.times();
    let n = t.len();
    let three = |i: usize| {
        let c = i.clamp(1, n - 2);
        lagrange3([t[c - 1], t[c], t[c + 1]], [f[c - 1], f[c], f[c + 1]], t[i])
    };
    let step = grid.uniform_step();
    (0..n)
        .map(|i| match step {
            Some(dt) if i >= 4 && i + 4 < n => {
                let mut d1 = 0.0;
                let mut d2 = D2_9[0] * f[i];
                for m in 1..=4 {
                    d1 += D1_9[m - 1] * (f[i + m] - f[i - m]);
                    d2 += D2_9[m] * (f[i + m] + f[i - m]);
                }
                (d1 / dt, d2 / (dt * dt))
            }
            Some(dt) if i >= 2 && i + 2 < n => {
                let (m2, m1, c, p1, p2) = (f[i - 2], f[i - 1], f[i], f[i + 1], f[i + 2]);
                (
                    (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dt),
                    (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * dt * dt),
                )
            }
            _ => three(i),
        })
        .unzip()
}
