//! Mode banks: frequencies and couplings of the linear boson bath.
//!
//! Three ladders are supported:
//!
//! * `harmonic-bec`: `omega_k = (k + 1) omega0`, `g_k = g0 (omega_k / omega0)^(alpha/2)`
//! * `membrane-uniform`: `omega_k = (k + sigma) delta`, `g_k = g0`
//! * `power-dispersion`: `omega_k = omega0 (k + 1)^p`, coupling law as harmonic
//!
//! `harmonic-bec` is `power-dispersion` with `p = 1` and both share one code path,
//! so the two constructions agree bit for bit.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numeric::{fit_line, LineFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    HarmonicBec,
    MembraneUniform,
    PowerDispersion,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::HarmonicBec => "harmonic-bec",
            SpectrumKind::MembraneUniform => "membrane-uniform",
            SpectrumKind::PowerDispersion => "power-dispersion",
        }
    }
}

impl std::fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_offset() -> f64 {
    0.75
}

fn default_dispersion() -> f64 {
    1.0
}

/// Declarative recipe for a mode bank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub n_modes: usize,
    /// omega0 for the BEC and power ladders, the gap delta for the membrane.
    pub base_frequency: f64,
    /// Membrane ladder offset sigma.
    #[serde(default = "default_offset")]
    pub offset: f64,
    pub coupling_amplitude: f64,
    /// alpha in g_k ~ omega_k^(alpha/2); ignored (fixed to 0) for the membrane.
    #[serde(default)]
    pub spectral_exponent: f64,
    /// p in omega_k = omega0 (k+1)^p; only read for `power-dispersion`.
    #[serde(default = "default_dispersion")]
    pub dispersion_exponent: f64,
}

impl SpectrumSpec {
    pub fn harmonic(n_modes: usize, omega0: f64, g0: f64, alpha: f64) -> Self {
        Self {
            kind: SpectrumKind::HarmonicBec,
            n_modes,
            base_frequency: omega0,
            offset: default_offset(),
            coupling_amplitude: g0,
            spectral_exponent: alpha,
            dispersion_exponent: 1.0,
        }
    }

    pub fn membrane(n_modes: usize, delta: f64, sigma: f64, g0: f64) -> Self {
        Self {
            kind: SpectrumKind::MembraneUniform,
            n_modes,
            base_frequency: delta,
            offset: sigma,
            coupling_amplitude: g0,
            spectral_exponent: 0.0,
            dispersion_exponent: 1.0,
        }
    }

    pub fn power_dispersion(n_modes: usize, omega0: f64, g0: f64, alpha: f64, p: f64) -> Self {
        Self {
            kind: SpectrumKind::PowerDispersion,
            n_modes,
            base_frequency: omega0,
            offset: default_offset(),
            coupling_amplitude: g0,
            spectral_exponent: alpha,
            dispersion_exponent: p,
        }
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_coupling(mut self, g0: f64) -> Self {
        self.coupling_amplitude = g0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_modes == 0 {
            return bad("n_modes must be at least 1".into());
        }
        if !(self.base_frequency > 0.0) || !self.base_frequency.is_finite() {
            return bad(format!("base_frequency must be positive, got {}", self.base_frequency));
        }
        if !(self.coupling_amplitude >= 0.0) || !self.coupling_amplitude.is_finite() {
            return bad(format!(
                "coupling_amplitude must be non-negative, got {}",
                self.coupling_amplitude
            ));
        }
        if !self.spectral_exponent.is_finite() {
            return bad("spectral_exponent must be finite".into());
        }
        match self.kind {
            SpectrumKind::MembraneUniform => {
                if !(self.offset >= 0.0) || !self.offset.is_finite() {
                    return bad(format!("offset must be non-negative, got {}", self.offset));
                }
                if self.offset == 0.0 {
                    return bad("offset 0 puts mode k = 0 at zero frequency".into());
                }
            }
            SpectrumKind::PowerDispersion => {
                if !(self.dispersion_exponent > 0.0) || !self.dispersion_exponent.is_finite() {
                    return bad(format!(
                        "dispersion_exponent must be positive, got {}",
                        self.dispersion_exponent
                    ));
                }
            }
            SpectrumKind::HarmonicBec => {}
        }
        Ok(())
    }

    /// Spectral exponent actually used by the coupling law.
    pub fn effective_alpha(&self) -> f64 {
        match self.kind {
            SpectrumKind::MembraneUniform => 0.0,
            _ => self.spectral_exponent,
        }
    }

    fn dispersion(&self) -> f64 {
        match self.kind {
            SpectrumKind::PowerDispersion => self.dispersion_exponent,
            _ => 1.0,
        }
    }

    /// Frequency of mode `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        match self.kind {
            SpectrumKind::MembraneUniform => (k as f64 + self.offset) * self.base_frequency,
            _ => {
                let p = self.dispersion();
                let index = (k + 1) as f64;
                let ladder = if p == 1.0 { index } else { index.powf(p) };
                self.base_frequency * ladder
            }
        }
    }

    /// Coupling law evaluated at an arbitrary frequency.
    pub fn coupling(&self, omega: f64) -> f64 {
        let alpha = self.effective_alpha();
        if alpha == 0.0 {
            self.coupling_amplitude
        } else {
            self.coupling_amplitude * (omega / self.base_frequency).powf(0.5 * alpha)
        }
    }

    /// Displacement weight w(omega) = (g(omega) / omega)^2.
    pub fn weight(&self, omega: f64) -> f64 {
        let lambda = self.coupling(omega) / omega;
        lambda * lambda
    }

    /// Global period 2 pi / omega0 (for the membrane, 2 pi / delta).
    pub fn tau0(&self) -> f64 {
        TAU / self.base_frequency
    }

    /// Kink period of the membrane ladder, 4 pi / delta.
    ///
    /// With `omega_k = (k + 3/4) delta` the mode phases at `t = m 2pi/delta`
    /// share the offset `3 pi m / 2`; logarithmic kinks sit at odd `m`, jumps at
    /// even `m`, and the pattern has period `2 (2 pi / delta)`.
    pub fn tau_bar(&self) -> f64 {
        2.0 * TAU / self.base_frequency
    }

    pub fn time_scale(&self, unit: TimeUnit) -> f64 {
        match unit {
            TimeUnit::Tau0 => self.tau0(),
            TimeUnit::TauBar => self.tau_bar(),
            TimeUnit::Raw => 1.0,
        }
    }

    /// True when every physical parameter but the mode count agrees.
    pub fn same_physics(&self, other: &SpectrumSpec) -> bool {
        SpectrumSpec {
            n_modes: other.n_modes,
            ..*self
        } == *other
    }
}

/// Unit in which grid times are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    #[default]
    Tau0,
    TauBar,
    Raw,
}

/// Immutable arrays of mode frequencies, couplings and weights (g_k/omega_k)^2.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBank {
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
    weights: Vec<f64>,
    spec: SpectrumSpec,
}

pub fn build_mode_bank(spec: &SpectrumSpec) -> Result<ModeBank> {
    spec.validate()?;
    let frequencies: Vec<f64> = (0..spec.n_modes).map(|k| spec.frequency(k)).collect();
    let couplings: Vec<f64> = frequencies.iter().map(|&w| spec.coupling(w)).collect();
    let weights: Vec<f64> = frequencies
        .iter()
        .zip(&couplings)
        .map(|(&w, &g)| {
            let lambda = g / w;
            lambda * lambda
        })
        .collect();
    if let Some(bad) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::InvalidSpec(format!("weight of mode {bad} is not finite")));
    }
    if frequencies.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidSpec("frequencies are not strictly increasing".into()));
    }
    Ok(ModeBank {
        frequencies,
        couplings,
        weights,
        spec: *spec,
    })
}

impl ModeBank {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// lambda_k^2 = (g_k / omega_k)^2, in mode order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spec(&self) -> &SpectrumSpec {
        &self.spec
    }

    pub fn total_weight(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.weights)
    }

    pub fn fundamental(&self) -> f64 {
        self.frequencies[0]
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequencies[self.frequencies.len() - 1]
    }
}

/// Free function form of [`ModeBank::weights`].
pub fn weights(bank: &ModeBank) -> Vec<f64> {
    bank.weights.clone()
}

/// Which per-mode weight is histogrammed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DensityWeighting {
    /// g_k^2; the binned density scales as nu^alpha.
    #[default]
    CouplingSquared,
    /// (g_k / omega_k)^2; scales as nu^(alpha - 2).
    DisplacementSquared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensityEstimate {
    pub centers: Vec<f64>,
    pub bin_width: f64,
    pub density: Vec<f64>,
    pub weighting: DensityWeighting,
    /// Log-log fit over the central 80% of bins; `slope` is alpha-hat.
    pub fit: LineFit,
}

impl SpectralDensityEstimate {
    pub fn exponent(&self) -> f64 {
        self.fit.slope
    }

    /// Sum of density times bin width.
    pub fn total(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.density) * self.bin_width
    }
}

pub fn spectral_density(bank: &ModeBank, n_bins: usize) -> Result<SpectralDensityEstimate> {
    spectral_density_with(bank, n_bins, DensityWeighting::CouplingSquared)
}

pub fn spectral_density_with(
    bank: &ModeBank,
    n_bins: usize,
    weighting: DensityWeighting,
) -> Result<SpectralDensityEstimate> {
    if bank.len() < 2 {
        return Err(Error::TooFewModes {
            needed: 2,
            got: bank.len(),
        });
    }
    if n_bins < 2 {
        return Err(Error::InvalidSpec(format!("n_bins must be at least 2, got {n_bins}")));
    }
    let lo = bank.fundamental();
    let hi = bank.max_frequency();
    let width = (hi - lo) / n_bins as f64;
    let mut mass = vec![0.0; n_bins];
    for (k, &omega) in bank.frequencies().iter().enumerate() {
        let bin = (((omega - lo) / width) as usize).min(n_bins - 1);
        mass[bin] += match weighting {
            DensityWeighting::CouplingSquared => bank.couplings[k] * bank.couplings[k],
            DensityWeighting::DisplacementSquared => bank.weights[k],
        };
    }
    let centers: Vec<f64> = (0..n_bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let density: Vec<f64> = mass.iter().map(|m| m / width).collect();

    let trim = n_bins / 10;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (trim..n_bins - trim)
        .filter(|&i| density[i] > 0.0)
        .map(|i| (centers[i].ln(), density[i].ln()))
        .unzip();
    let fit = fit_line(&xs, &ys).ok_or_else(|| {
        Error::DegenerateFit(format!("only {} populated central bins", xs.len()))
    })?;
    Ok(SpectralDensityEstimate {
        centers,
        bin_width: width,
        density,
        weighting,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn harmonic_constant_coupling() {
        let bank = build_mode_bank(&SpectrumSpec::harmonic(3, 1.0, 0.1, 0.0)).unwrap();
        assert_eq!(bank.frequencies(), &[1.0, 2.0, 3.0]);
        assert_eq!(bank.couplings(), &[0.1, 0.1, 0.1]);
    }

    #[test]
    fn harmonic_ohmic_coupling() {
        let bank = build_mode_bank(&SpectrumSpec::harmonic(3, 1.0, 0.1, 1.0)).unwrap();
        assert!(close(bank.couplings(), &[0.1, 0.1 * 2f64.sqrt(), 0.1 * 3f64.sqrt()], 1e-15));
        assert!(close(bank.couplings(), &[0.1, 0.141421, 0.173205], 1e-6));
    }

    #[test]
    fn membrane_ladder() {
        let bank = build_mode_bank(&SpectrumSpec::membrane(3, 1.0, 0.75, 0.2)).unwrap();
        assert_eq!(bank.frequencies(), &[0.75, 1.75, 2.75]);
        assert_eq!(bank.couplings(), &[0.2, 0.2, 0.2]);
    }

    #[test]
    fn weights_examples() {
        let spec = SpectrumSpec::harmonic(2, 1.0, 0.1, 0.0);
        let bank = build_mode_bank(&spec).unwrap();
        assert!(close(&weights(&bank), &[0.01, 0.0025], 1e-17));

        let bank = build_mode_bank(&spec.with_coupling(0.0)).unwrap();
        assert!(bank.weights().iter().all(|&w| w == 0.0));

        let bank = build_mode_bank(&SpectrumSpec::harmonic(50, 2.0, 0.3, 2.0)).unwrap();
        let expected = (0.3f64 / 2.0).powi(2);
        assert!(bank.weights().iter().all(|w| (w - expected).abs() < 1e-16));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = SpectrumSpec::harmonic(0, 1.0, 0.1, 0.0);
        assert!(matches!(build_mode_bank(&spec), Err(Error::InvalidSpec(_))));
        spec.n_modes = 3;
        spec.base_frequency = 0.0;
        assert!(build_mode_bank(&spec).is_err());
        spec.base_frequency = -1.0;
        assert!(build_mode_bank(&spec).is_err());
        assert!(build_mode_bank(&SpectrumSpec::membrane(3, 1.0, 0.0, 0.2)).is_err());
        assert!(build_mode_bank(&SpectrumSpec::harmonic(3, 1.0, -0.1, 0.0)).is_err());
        assert!(build_mode_bank(&SpectrumSpec::power_dispersion(3, 1.0, 0.1, 0.0, 0.0)).is_err());
    }

    #[test]
    fn power_one_is_harmonic_bit_for_bit() {
        for &alpha in &[-1.0, 0.0, 0.5, 1.0, 2.0] {
            let h = build_mode_bank(&SpectrumSpec::harmonic(500, 0.7, 0.3, alpha)).unwrap();
            let p = build_mode_bank(&SpectrumSpec::power_dispersion(500, 0.7, 0.3, alpha, 1.0))
                .unwrap();
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(h.frequencies()), bits(p.frequencies()));
            assert_eq!(bits(h.couplings()), bits(p.couplings()));
            assert_eq!(bits(h.weights()), bits(p.weights()));
        }
    }

    #[test]
    fn uniform_gaps_are_exact() {
        let h = build_mode_bank(&SpectrumSpec::harmonic(10_000, 1.0, 0.1, 1.0)).unwrap();
        assert!(h.frequencies().windows(2).all(|p| p[1] - p[0] == 1.0));
        let m = build_mode_bank(&SpectrumSpec::membrane(10_000, 0.5, 0.75, 0.1)).unwrap();
        assert!(m.frequencies().windows(2).all(|p| p[1] - p[0] == 0.5));
    }

    #[test]
    fn spectral_density_recovers_alpha() {
        for &(alpha, tol) in &[(0.0, 0.01), (1.0, 0.02), (-1.0, 0.02)] {
            let bank = build_mode_bank(&SpectrumSpec::harmonic(10_000, 1.0, 0.1, alpha)).unwrap();
            let est = spectral_density(&bank, 50).unwrap();
            assert!((est.exponent() - alpha).abs() < tol, "alpha {alpha}: {}", est.exponent());
            let direct: f64 = bank.couplings().iter().map(|g| g * g).sum();
            assert!((est.total() - direct).abs() <= 1e-12 * direct);
        }
    }

    #[test]
    fn displacement_weighting_shifts_exponent_by_two() {
        let bank = build_mode_bank(&SpectrumSpec::harmonic(10_000, 1.0, 0.1, 1.0)).unwrap();
        let est = spectral_density_with(&bank, 50, DensityWeighting::DisplacementSquared).unwrap();
        assert!((est.exponent() + 1.0).abs() < 0.02);
        assert!((est.total() - bank.total_weight()).abs() <= 1e-12 * bank.total_weight());
    }

    #[test]
    fn spectral_density_needs_two_modes() {
        let bank = build_mode_bank(&SpectrumSpec::harmonic(1, 1.0, 0.1, 0.0)).unwrap();
        assert_eq!(
            spectral_density(&bank, 10).unwrap_err(),
            Error::TooFewModes { needed: 2, got: 1 }
        );
    }

    #[test]
    fn same_physics_ignores_mode_count() {
        let a = SpectrumSpec::membrane(100, 1.0, 0.75, 0.8);
        assert!(a.same_physics(&a.with_modes(1000)));
        assert!(!a.same_physics(&a.with_coupling(0.5)));
        assert_eq!(a.kind.to_string(), "membrane-uniform");
    }
}
