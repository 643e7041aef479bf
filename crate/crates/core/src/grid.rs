//! Real-time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing sample times, stored in raw time units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("time grid is empty".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("time grid holds non-finite values".into()));
        }
        if times.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `start, start + step, ...` up to and including `end` (within 1e-9 steps).
    pub fn uniform(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if !(end >= start) {
            return Err(Error::InvalidGrid(format!("end {end} precedes start {start}")));
        }
        let n = ((end - start) / step + 1e-9).floor() as usize + 1;
        Self::new((0..n).map(|i| start + i as f64 * step).collect())
    }

    /// Points `t_c -/+ d` for `d` log-spaced in `[inner, outer]`, both sides, sorted.
    pub fn log_offsets(t_c: f64, inner: f64, outer: f64, per_side: usize) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) || per_side < 2 {
            return Err(Error::InvalidGrid(format!(
                "log offsets need 0 < inner < outer and 2+ points, got {inner}, {outer}, {per_side}"
            )));
        }
        let ratio = (outer / inner).ln() / (per_side - 1) as f64;
        let offsets: Vec<f64> = (0..per_side).map(|i| inner * (ratio * i as f64).exp()).collect();
        let mut times: Vec<f64> = offsets.iter().rev().map(|d| t_c - d).collect();
        times.extend(offsets.iter().map(|d| t_c + d));
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Common step if the grid is uniform to 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let n = self.times.len() - 1;
        let h = (self.times[n] - self.times[0]) / n as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|p| ((p[1] - p[0]) - h).abs() <= 1e-9 * h.abs().max(p[1].abs()));
        uniform.then_some(h)
    }

    /// Smallest spacing between neighbours.
    pub fn min_step(&self) -> Option<f64> {
        self.times.windows(2).map(|p| p[1] - p[0]).reduce(f64::min)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.times.iter().map(|t| t * factor).collect())
    }
}

impl AsRef<[f64]> for TimeGrid {
    fn as_ref(&self) -> &[f64] {
        &self.times
    }
}
