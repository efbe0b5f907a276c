//! Per-run accounting and the efficiency metrics built from it.
//!
//! Time is tallied in whole slots so that hover and move time partition the
//! measured horizon exactly.

use thiserror::Error;

use crate::policy::SlotDecision;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetricsError {
    #[error("fixed-baseline spectral efficiency is zero; gain is undefined")]
    ZeroBaseline,
    #[error("no communication time; communication energy efficiency is undefined")]
    ZeroCommunicationTime,
    #[error("empty measurement horizon; mechanical energy efficiency is undefined")]
    ZeroHorizon,
    #[error("no runs to aggregate")]
    NoRuns,
    #[error("invalid energy model: {0}")]
    InvalidEnergyModel(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub slot_len: f64,
    pub se_sum: f64,
    pub se_sq_sum: f64,
    pub se_samples: u64,
    pub delivered_bits: f64,
    pub completed_requests: u64,
    pub communication_slots: u64,
    pub hover_slots: u64,
    pub move_slots: u64,
    /// Fingerprint of every user position over the run, for pairing checks.
    pub mobility_fingerprint: u64,
}

impl RunMetrics {
    pub fn new(slot_len: f64) -> Self {
        Self {
            slot_len,
            se_sum: 0.0,
            se_sq_sum: 0.0,
            se_samples: 0,
            delivered_bits: 0.0,
            completed_requests: 0,
            communication_slots: 0,
            hover_slots: 0,
            move_slots: 0,
            mobility_fingerprint: 0,
        }
    }

    /// Mean per-slot system spectral efficiency, `None` if the drone never served.
    pub fn mean_se(&self) -> Option<f64> {
        (self.se_samples > 0).then(|| self.se_sum / self.se_samples as f64)
    }

    /// Standard deviation of the per-slot samples within this run.
    pub fn slot_se_std(&self) -> Option<f64> {
        if self.se_samples < 2 {
            return None;
        }
        let n = self.se_samples as f64;
        let mean = self.se_sum / n;
        let var = (self.se_sq_sum - n * mean * mean) / (n - 1.0);
        Some(var.max(0.0).sqrt())
    }

    pub fn communication_time(&self) -> f64 {
        self.communication_slots as f64 * self.slot_len
    }

    pub fn hover_time(&self) -> f64 {
        self.hover_slots as f64 * self.slot_len
    }

    pub fn move_time(&self) -> f64 {
        self.move_slots as f64 * self.slot_len
    }

    pub fn measured_slots(&self) -> u64 {
        self.hover_slots + self.move_slots
    }

    pub fn horizon(&self) -> f64 {
        self.measured_slots() as f64 * self.slot_len
    }

    /// Account one slot's spectral efficiency and flight mode.
    /// `se_values[i]` belongs to `decision.allocations[i]`.
    pub fn record_slot(&mut self, decision: &SlotDecision, se_values: &[f64]) {
        record_slot_se(self, decision, se_values);
        if decision.moved {
            self.move_slots += 1;
        } else {
            self.hover_slots += 1;
        }
    }
}

/// One system-SE sample per serving slot: the mean over served requests
/// (a single value for whole-band strategies). Idle slots add nothing.
pub fn record_slot_se(metrics: &mut RunMetrics, decision: &SlotDecision, se_values: &[f64]) {
    debug_assert_eq!(decision.allocations.len(), se_values.len());
    if decision.allocations.is_empty() {
        return;
    }
    let sample = se_values.iter().sum::<f64>() / se_values.len() as f64;
    metrics.se_sum += sample;
    metrics.se_sq_sum += sample * sample;
    metrics.se_samples += 1;
    metrics.communication_slots += 1;
}

/// Spectral efficiency gain in percent of the mobile drone over the fixed one.
pub fn compute_seg(mobile_mean_se: f64, fixed_mean_se: f64) -> Result<f64, MetricsError> {
    if fixed_mean_se == 0.0 {
        return Err(MetricsError::ZeroBaseline);
    }
    Ok(100.0 * (mobile_mean_se - fixed_mean_se) / fixed_mean_se)
}

/// Delivered bits per joule of radiated energy.
pub fn compute_cee(metrics: &RunMetrics, tx_power_w: f64) -> Result<f64, MetricsError> {
    let t = metrics.communication_time();
    if t <= 0.0 {
        return Err(MetricsError::ZeroCommunicationTime);
    }
    Ok(metrics.delivered_bits / (tx_power_w * t))
}

/// Hover power plus a speed-indexed table of cruise powers.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    pub hover_power: f64,
    /// (speed m/s, power W), speeds strictly increasing.
    pub move_power_points: Vec<(f64, f64)>,
}

impl EnergyModel {
    pub fn new(hover_power: f64, move_power_points: Vec<(f64, f64)>) -> Result<Self, MetricsError> {
        if !(hover_power > 0.0) {
            return Err(MetricsError::InvalidEnergyModel(
                "hover power must be positive",
            ));
        }
        if move_power_points.is_empty() {
            return Err(MetricsError::InvalidEnergyModel(
                "move power table is empty",
            ));
        }
        if move_power_points
            .iter()
            .any(|&(v, p)| !(p > 0.0) || !(v >= 0.0))
        {
            return Err(MetricsError::InvalidEnergyModel(
                "move powers must be positive",
            ));
        }
        if move_power_points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(MetricsError::InvalidEnergyModel(
                "move speeds must be strictly increasing",
            ));
        }
        Ok(Self {
            hover_power,
            move_power_points,
        })
    }

    /// Cruise power: flat below the first tabulated speed, piecewise linear
    /// between points, extended along the last segment above the table.
    pub fn move_power(&self, speed: f64) -> f64 {
        let pts = &self.move_power_points;
        let (v0, p0) = pts[0];
        if speed <= v0 || pts.len() == 1 {
            return p0;
        }
        if let Some(&(_, p)) = pts.iter().find(|&&(v, _)| v == speed) {
            return p;
        }
        let seg = pts
            .windows(2)
            .find(|w| speed < w[1].0)
            .unwrap_or(&pts[pts.len() - 2..]);
        let ((va, pa), (vb, pb)) = (seg[0], seg[1]);
        (pa + (pb - pa) * (speed - va) / (vb - va)).max(f64::MIN_POSITIVE)
    }

    pub fn mechanical_energy(&self, metrics: &RunMetrics, cruise_speed: f64) -> f64 {
        let weighted = self.hover_power * metrics.hover_slots as f64
            + self.move_power(cruise_speed) * metrics.move_slots as f64;
        weighted * metrics.slot_len
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            hover_power: 110.0,
            move_power_points: vec![(10.0, 110.0), (20.0, 170.0)],
        }
    }
}

/// Delivered bits per joule of flight energy.
pub fn compute_mee(
    metrics: &RunMetrics,
    model: &EnergyModel,
    cruise_speed: f64,
) -> Result<f64, MetricsError> {
    if metrics.measured_slots() == 0 {
        return Err(MetricsError::ZeroHorizon);
    }
    Ok(metrics.delivered_bits / model.mechanical_energy(metrics, cruise_speed))
}

/// Sample mean and standard deviation over runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// `n − 1` denominator; zero when `n == 1`.
    pub std: f64,
    pub n: usize,
}

impl Summary {
    /// A single run has no spread estimate; its `std` is a placeholder.
    pub fn is_degenerate(&self) -> bool {
        self.n < 2
    }
}

pub fn aggregate_runs(values: &[f64]) -> Result<Summary, MetricsError> {
    let n = values.len();
    if n == 0 {
        return Err(MetricsError::NoRuns);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(Summary { mean, std, n })
}
