//! Loschmidt amplitude `G = exp(Gamma)` on real and complex time, and thermal
//! dephasing of the probe spin.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::numeric::{sincos_product, PairwiseSum, SinCos};
use crate::spectrum::ModeBank;

/// Per-term clamp for the continued log-amplitude.
pub const DEFAULT_GAMMA_MAX: f64 = 1e4;

const PLANCK: f64 = 6.626_070_15e-34;
const BOLTZMANN: f64 = 1.380_649e-23;

/// Bath temperature, expressed through the occupation of the fundamental mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThermalSpec {
    pub n_th: f64,
}

impl ThermalSpec {
    pub fn zero() -> Self {
        Self { n_th: 0.0 }
    }

    pub fn from_n_th(n_th: f64) -> Result<Self> {
        if !(n_th >= 0.0) || !n_th.is_finite() {
            return Err(Error::InvalidThermal(format!("n_th must be finite and >= 0, got {n_th}")));
        }
        Ok(Self { n_th })
    }

    /// Bose occupation of a mode at `frequency_hz` (ordinary frequency) and `kelvin`.
    pub fn from_temperature(frequency_hz: f64, kelvin: f64) -> Result<Self> {
        if !(frequency_hz > 0.0) || !(kelvin >= 0.0) {
            return Err(Error::InvalidThermal(format!(
                "need frequency > 0 and T >= 0, got {frequency_hz} Hz, {kelvin} K"
            )));
        }
        if kelvin == 0.0 {
            return Ok(Self::zero());
        }
        let x = PLANCK * frequency_hz / (BOLTZMANN * kelvin);
        Self::from_n_th(1.0 / x.exp_m1())
    }

    pub fn is_zero(&self) -> bool {
        self.n_th == 0.0
    }

    /// beta, from `beta * omega_fund = ln(1 + 1/n_th)`; infinite at zero temperature.
    pub fn beta(&self, omega_fund: f64) -> f64 {
        if self.is_zero() {
            f64::INFINITY
        } else {
            (1.0 / self.n_th).ln_1p() / omega_fund
        }
    }

    /// coth(beta omega / 2) = 1 + 2 / (e^(beta omega) - 1).
    pub fn coth_factor(&self, omega: f64, omega_fund: f64) -> f64 {
        if self.is_zero() {
            return 1.0;
        }
        1.0 + 2.0 / (self.beta(omega_fund) * omega).exp_m1()
    }

    /// d/d omega of [`coth_factor`](Self::coth_factor): -(beta/2) csch^2(beta omega / 2).
    pub fn coth_derivative(&self, omega: f64, omega_fund: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let beta = self.beta(omega_fund);
        let x = beta * omega;
        // csch^2(x/2) = 4 e^-x / (1 - e^-x)^2, finite for large x
        let denom = (-x).exp_m1();
        -0.5 * beta * 4.0 * (-x).exp() / (denom * denom)
    }
}

/// Gamma(t) = -sum lambda_k^2 (1 - cos omega_k t).
pub fn log_amplitude_real(bank: &ModeBank, t: f64) -> f64 {
    let mut acc = PairwiseSum::new();
    for (&omega, &w) in bank.frequencies().iter().zip(bank.weights()) {
        acc.add(-(w * sincos_product(omega, t).one_minus_cos));
    }
    acc.total()
}

/// Continued log-amplitude at one complex time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGamma {
    pub re: f64,
    pub im: f64,
    /// Number of per-mode terms that hit the clamp.
    pub clamp_events: u64,
}

/// cosh(omega s) - 1 and sinh(omega s) for one mode and one imaginary time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ImaginaryFactor {
    pub cosh_m1: f64,
    pub sinh: f64,
}

impl ImaginaryFactor {
    pub fn new(omega: f64, s: f64) -> Self {
        let x = omega * s;
        let half = (0.5 * x).sinh();
        Self {
            cosh_m1: 2.0 * half * half,
            sinh: x.sinh(),
        }
    }
}

fn clamp(value: f64, gamma_max: f64, events: &mut u64) -> f64 {
    if value.abs() > gamma_max {
        *events += 1;
        gamma_max.copysign(value)
    } else {
        value
    }
}

/// One mode's contribution to (Re Gamma, Im Gamma), clamped.
///
/// `1 - cos(wt) cosh(ws)` is written as `(1 - cos wt) - cos wt (cosh ws - 1)` so
/// that `s = 0` reproduces the real-axis term bit for bit.
#[inline]
pub(crate) fn complex_term(
    w: f64,
    sc: &SinCos,
    f: &ImaginaryFactor,
    gamma_max: f64,
    events: &mut u64,
) -> (f64, f64) {
    if w == 0.0 {
        return (0.0, 0.0);
    }
    let re = if f.cosh_m1.is_finite() {
        -(w * (sc.one_minus_cos - sc.cos * f.cosh_m1))
    } else if sc.cos == 0.0 {
        -(w * sc.one_minus_cos)
    } else {
        f64::INFINITY.copysign(sc.cos)
    };
    let im = if f.sinh.is_finite() || sc.sin != 0.0 {
        -(w * sc.sin * f.sinh)
    } else {
        0.0
    };
    (clamp(re, gamma_max, events), clamp(im, gamma_max, events))
}

pub fn log_amplitude_complex(bank: &ModeBank, t: f64, s: f64) -> ComplexGamma {
    log_amplitude_complex_with(bank, t, s, DEFAULT_GAMMA_MAX)
}

pub fn log_amplitude_complex_with(bank: &ModeBank, t: f64, s: f64, gamma_max: f64) -> ComplexGamma {
    let mut re = PairwiseSum::new();
    let mut im = PairwiseSum::new();
    let mut events = 0;
    for (&omega, &w) in bank.frequencies().iter().zip(bank.weights()) {
        let sc = sincos_product(omega, t);
        let (r, i) = complex_term(w, &sc, &ImaginaryFactor::new(omega, s), gamma_max, &mut events);
        re.add(r);
        im.add(i);
    }
    ComplexGamma {
        re: re.total(),
        im: im.total(),
        clamp_events: events,
    }
}

/// lambda_k^2 coth(beta omega_k / 2) for every mode.
pub fn thermal_weights(bank: &ModeBank, thermal: &ThermalSpec) -> Vec<f64> {
    let fund = bank.fundamental();
    bank.frequencies()
        .iter()
        .zip(bank.weights())
        .map(|(&omega, &w)| w * thermal.coth_factor(omega, fund))
        .collect()
}

fn gamma_with_weights(bank: &ModeBank, weights: &[f64], t: f64) -> f64 {
    let mut acc = PairwiseSum::new();
    for (&omega, &w) in bank.frequencies().iter().zip(weights) {
        acc.add(-(w * sincos_product(omega, t).one_minus_cos));
    }
    acc.total()
}

/// Gamma_T(t) = -sum lambda_k^2 coth(beta omega_k / 2) (1 - cos omega_k t).
pub fn dephasing_gamma(bank: &ModeBank, thermal: &ThermalSpec, t: f64) -> f64 {
    if thermal.is_zero() {
        return log_amplitude_real(bank, t);
    }
    gamma_with_weights(bank, &thermal_weights(bank, thermal), t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidSeries {
    pub times: Vec<f64>,
    pub gamma: Vec<f64>,
    pub fid: Vec<f64>,
    pub thermal: ThermalSpec,
}

/// Free-induction decay exp(Gamma_T(t)) on a grid.
pub fn fid(bank: &ModeBank, thermal: &ThermalSpec, grid: &TimeGrid) -> FidSeries {
    let weights = if thermal.is_zero() {
        bank.weights().to_vec()
    } else {
        thermal_weights(bank, thermal)
    };
    let gamma: Vec<f64> = grid
        .times()
        .par_iter()
        .map(|&t| gamma_with_weights(bank, &weights, t))
        .collect();
    FidSeries {
        times: grid.times().to_vec(),
        fid: gamma.iter().map(|g| g.exp()).collect(),
        gamma,
        thermal: *thermal,
    }
}

/// Gamma(t) on a grid at zero temperature.
pub fn log_amplitude_series(bank: &ModeBank, grid: &TimeGrid) -> Vec<f64> {
    grid.times()
        .par_iter()
        .map(|&t| log_amplitude_real(bank, t))
        .collect()
}
