//! Run configuration: a TOML file with sections `[spectrum] [grid]
//! [complex_window] [thermal] [scaling] [output]` plus an optional `[sweep]`.
//!
//! Times in `[grid]`, `[complex_window]` and the absolute lengths of
//! `[scaling]` are in `grid.unit`; it defaults to tau0 for the BEC and power
//! ladders and taubar for the membrane.

use std::path::PathBuf;

use dtpt::fisher::{ComplexWindow, DEFAULT_EPS_ZERO};
use dtpt::loschmidt::ThermalSpec;
use dtpt::scaling::CriticalOptions;
use dtpt::spectrum::{SpectrumKind, SpectrumSpec, TimeUnit};
use dtpt::TimeGrid;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spectrum: SpectrumSpec,
    pub grid: Option<GridConfig>,
    pub complex_window: Option<WindowConfig>,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "SweepConfig::is_empty")]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub unit: Option<TimeUnit>,
}

/// A fixed scan window and, optionally, tongue tracking around `track`
/// centres with per-size windows that shrink like `1/omega_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    #[serde(default = "default_n_t")]
    pub n_t: usize,
    #[serde(default = "default_n_s")]
    pub n_s: usize,
    #[serde(default)]
    pub symmetry_check: bool,
    #[serde(default)]
    pub track: Vec<f64>,
    /// Tracking half-width in t, in units of 1/omega_max.
    #[serde(default = "default_track_half_width")]
    pub track_half_width: f64,
    /// Tracking extent in s, in units of 1/omega_max.
    #[serde(default = "default_track_s_max")]
    pub track_s_max: f64,
    #[serde(default = "default_n_t")]
    pub track_n_t: usize,
    #[serde(default = "default_track_n_s")]
    pub track_n_s: usize,
    /// Largest tip drift, in grid units, still counted as the same tongue.
    #[serde(default = "default_match_tol")]
    pub match_tol: f64,
}

fn default_n_t() -> usize {
    161
}
fn default_n_s() -> usize {
    121
}
fn default_track_n_s() -> usize {
    81
}
fn default_track_half_width() -> f64 {
    20.0
}
fn default_track_s_max() -> f64 {
    40.0
}
fn default_match_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalConfig {
    #[serde(default)]
    pub n_th: Vec<f64>,
    /// Ordinary frequency of the fundamental mode, used with `temperatures_k`.
    pub frequency_hz: Option<f64>,
    #[serde(default)]
    pub temperatures_k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps_zero: f64,
    /// Half-width of the fine grid where the critical value is read off.
    #[serde(default = "default_value_half_width")]
    pub value_half_width: f64,
    #[serde(default = "default_value_points")]
    pub value_points: usize,
    /// Log-time fit offsets, relative to t_c.
    #[serde(default = "default_log_inner")]
    pub log_inner: f64,
    #[serde(default = "default_log_outer")]
    pub log_outer: f64,
    #[serde(default = "default_log_points")]
    pub log_points: usize,
    /// Power-law fits: uniform grid step, inner radius in steps, outer radius relative to t_c.
    #[serde(default = "default_power_step")]
    pub power_step: f64,
    #[serde(default = "default_power_inner_steps")]
    pub power_inner_steps: usize,
    #[serde(default = "default_power_outer")]
    pub power_outer: f64,
    #[serde(default = "default_ratio")]
    pub growth_ratio: f64,
    #[serde(default = "default_ratio")]
    pub kink_ratio: f64,
    #[serde(default = "default_separation")]
    pub separation: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS_ZERO
}
fn default_value_half_width() -> f64 {
    0.005
}
fn default_value_points() -> usize {
    601
}
fn default_log_inner() -> f64 {
    1e-3
}
fn default_log_outer() -> f64 {
    0.05
}
fn default_log_points() -> usize {
    40
}
fn default_power_step() -> f64 {
    1e-3
}
fn default_power_inner_steps() -> usize {
    10
}
fn default_power_outer() -> f64 {
    0.1
}
fn default_ratio() -> f64 {
    10.0
}
fn default_separation() -> f64 {
    0.1
}

impl Default for ScalingConfig {
    fn default() -> Self {
        toml::from_str("").expect("scaling defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
    #[serde(default = "default_bins")]
    pub density_bins: usize,
}

fn default_bins() -> usize {
    50
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            svg: false,
            density_bins: default_bins(),
        }
    }
}

/// Variants run side by side, each overriding one spectrum field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub spectral_exponent: Vec<f64>,
    #[serde(default)]
    pub coupling_amplitude: Vec<f64>,
}

impl SweepConfig {
    pub fn is_empty(&self) -> bool {
        self.spectral_exponent.is_empty() && self.coupling_amplitude.is_empty()
    }
}

/// One spectrum of a sweep with a file-name label.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub spec: SpectrumSpec,
}

fn label_value(v: f64) -> String {
    format!("{v}")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for v in self.variants() {
            v.spec.validate().map_err(CliError::config)?;
        }
        if !self.scaling.sizes.windows(2).all(|p| p[0] < p[1]) {
            return Err(CliError::Config("scaling.sizes must be strictly increasing".into()));
        }
        if !(self.scaling.eps_zero > 0.0 && self.scaling.eps_zero < 1.0) {
            return Err(CliError::Config("scaling.eps_zero must lie in (0, 1)".into()));
        }
        if !self.sweep.spectral_exponent.is_empty() && !self.sweep.coupling_amplitude.is_empty() {
            return Err(CliError::Config("sweep one of spectral_exponent, coupling_amplitude".into()));
        }
        if let Some(g) = &self.grid {
            self.time_grid_from(g)?;
        }
        self.thermals()?;
        Ok(())
    }

    pub fn unit(&self) -> TimeUnit {
        match self.grid.and_then(|g| g.unit) {
            Some(u) => u,
            None if self.spectrum.kind == SpectrumKind::MembraneUniform => TimeUnit::TauBar,
            None => TimeUnit::Tau0,
        }
    }

    /// Raw time per grid unit.
    pub fn time_scale(&self) -> f64 {
        self.spectrum.time_scale(self.unit())
    }

    fn time_grid_from(&self, g: &GridConfig) -> Result<TimeGrid, CliError> {
        let c = self.time_scale();
        TimeGrid::uniform(g.start * c, g.end * c, g.step * c).map_err(CliError::config)
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        let g = self.grid.as_ref().ok_or_else(|| CliError::Config("missing section [grid]".into()))?;
        self.time_grid_from(g)
    }

    pub fn variants(&self) -> Vec<Variant> {
        let base = self.spectrum;
        if !self.sweep.spectral_exponent.is_empty() {
            self.sweep
                .spectral_exponent
                .iter()
                .map(|&a| Variant {
                    label: format!("alpha_{}", label_value(a)),
                    spec: SpectrumSpec {
                        spectral_exponent: a,
                        ..base
                    },
                })
                .collect()
        } else if !self.sweep.coupling_amplitude.is_empty() {
            self.sweep
                .coupling_amplitude
                .iter()
                .map(|&g| Variant {
                    label: format!("g0_{}", label_value(g)),
                    spec: base.with_coupling(g),
                })
                .collect()
        } else {
            vec![Variant {
                label: String::new(),
                spec: base,
            }]
        }
    }

    /// Sizes for multi-size commands; falls back to the spectrum's own size.
    pub fn sizes(&self) -> Vec<usize> {
        if self.scaling.sizes.is_empty() {
            vec![self.spectrum.n_modes]
        } else {
            self.scaling.sizes.clone()
        }
    }

    /// Every listed temperature, `n_th` entries first; never empty.
    pub fn thermals(&self) -> Result<Vec<ThermalSpec>, CliError> {
        let mut out = Vec::new();
        for &n in &self.thermal.n_th {
            out.push(ThermalSpec::from_n_th(n).map_err(CliError::config)?);
        }
        if !self.thermal.temperatures_k.is_empty() {
            let hz = self
                .thermal
                .frequency_hz
                .ok_or_else(|| CliError::Config("thermal.temperatures_k needs thermal.frequency_hz".into()))?;
            for &k in &self.thermal.temperatures_k {
                out.push(ThermalSpec::from_temperature(hz, k).map_err(CliError::config)?);
            }
        }
        if out.is_empty() {
            out.push(ThermalSpec::zero());
        }
        Ok(out)
    }

    /// The fixed window in raw time, when all four bounds are given.
    pub fn fixed_window(&self) -> Result<Option<ComplexWindow>, CliError> {
        let Some(w) = &self.complex_window else {
            return Ok(None);
        };
        match (w.t_min, w.t_max, w.s_min, w.s_max) {
            (Some(t0), Some(t1), Some(s0), Some(s1)) => {
                let c = self.time_scale();
                ComplexWindow::new(t0 * c, t1 * c, s0 * c, s1 * c, w.n_t, w.n_s)
                    .map(Some)
                    .map_err(CliError::config)
            }
            (None, None, None, None) => Ok(None),
            _ => Err(CliError::Config(
                "complex_window needs all of t_min, t_max, s_min, s_max or none".into(),
            )),
        }
    }

    pub fn critical_options(&self) -> CriticalOptions {
        CriticalOptions {
            growth_ratio: self.scaling.growth_ratio,
            kink_ratio: self.scaling.kink_ratio,
            separation: self.scaling.separation,
            ..CriticalOptions::default()
        }
    }

    /// The configuration as embedded in output headers: resolved, without the
    /// output directory, so headers do not depend on where files land.
    pub fn header(&self) -> String {
        let mut c = self.clone();
        c.output.dir = None;
        toml::to_string(&c).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[spectrum]
kind = "harmonic-bec"
n_modes = 1000
base_frequency = 1.0
coupling_amplitude = 0.4
spectral_exponent = 1.0
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.unit(), TimeUnit::Tau0);
        assert_eq!(c.scaling, ScalingConfig::default());
        assert_eq!(c.scaling.log_points, 40);
        assert_eq!(c.thermals().unwrap(), vec![ThermalSpec::zero()]);
    }

    #[test]
    fn missing_key_is_named() {
        let text = MINIMAL.replace("n_modes = 1000\n", "");
        match RunConfig::parse(&text) {
            Err(CliError::Config(msg)) => assert!(msg.contains("n_modes"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let text = format!("{MINIMAL}\n[grid]\nstart = 1.0\nend = 0.5\nstep = 0.1\n");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn header_round_trips() {
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        c.output.dir = Some("somewhere".into());
        let back = RunConfig::parse(&c.header()).unwrap();
        assert_eq!(back.output.dir, None);
        assert_eq!(back.spectrum, c.spectrum);
    }

    #[test]
    fn sweep_labels() {
        let text = format!("{MINIMAL}\n[sweep]\nspectral_exponent = [1.0, 0.0, -1.0]\n");
        let labels: Vec<String> = RunConfig::parse(&text).unwrap().variants().into_iter().map(|v| v.label).collect();
        assert_eq!(labels, ["alpha_1", "alpha_0", "alpha_-1"]);
    }
}
