//! Download requests and their remaining-buffer bookkeeping.
//!
//! Each user alternates between downloading one request and reading it; the
//! reading time is exponential with mean λ.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

pub type RequestId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("request {0} drained after completion")]
    DrainCompleted(RequestId),
    #[error("request {id} drained with invalid rate {rate}")]
    InvalidRate { id: RequestId, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficConfig {
    /// Mean reading time λ, seconds.
    pub mean_reading_time: f64,
    pub request_size_bytes: f64,
}

impl TrafficConfig {
    pub fn request_size_bits(&self) -> f64 {
        self.request_size_bytes * 8.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestRecord {
    pub id: RequestId,
    pub user_id: usize,
    pub arrival_time: f64,
    pub size_bits: f64,
    pub remaining_bits: f64,
    pub completion_time: Option<f64>,
}

impl RequestRecord {
    pub fn new(id: RequestId, user_id: usize, arrival_time: f64, size_bits: f64) -> Self {
        Self {
            id,
            user_id,
            arrival_time,
            size_bits,
            remaining_bits: size_bits,
            completion_time: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.completion_time.is_some()
    }

    pub fn delivered_bits(&self) -> f64 {
        self.size_bits - self.remaining_bits
    }

    /// Transmit at `rate_bps` for `dt` seconds starting at `now`. Returns the
    /// bits actually delivered. A request that empties is stamped complete at
    /// the end of the slot.
    pub fn drain(&mut self, rate_bps: f64, dt: f64, now: f64) -> Result<f64, TrafficError> {
        if self.is_complete() || self.remaining_bits <= 0.0 {
            return Err(TrafficError::DrainCompleted(self.id));
        }
        if !(rate_bps >= 0.0) || !rate_bps.is_finite() {
            return Err(TrafficError::InvalidRate {
                id: self.id,
                rate: rate_bps,
            });
        }
        let delivered = (rate_bps * dt).min(self.remaining_bits);
        self.remaining_bits -= delivered;
        if self.remaining_bits <= 0.0 {
            self.remaining_bits = 0.0;
            self.completion_time = Some(now + dt);
        }
        Ok(delivered)
    }
}

/// Functional form of [`RequestRecord::drain`].
pub fn drain_buffer(
    req: &RequestRecord,
    rate_bps: f64,
    dt: f64,
    now: f64,
) -> Result<RequestRecord, TrafficError> {
    let mut next = req.clone();
    next.drain(rate_bps, dt, now)?;
    Ok(next)
}

/// `reference_time` plus an exponential reading time of mean λ.
pub fn schedule_next_arrival<R: Rng + ?Sized>(
    cfg: &TrafficConfig,
    reference_time: f64,
    rng: &mut R,
) -> f64 {
    let exp = Exp::new(1.0 / cfg.mean_reading_time).expect("mean reading time must be positive");
    loop {
        let gap: f64 = exp.sample(rng);
        if gap > 0.0 {
            return reference_time + gap;
        }
    }
}

/// Requests that have arrived by `now` and still hold data, ordered by
/// arrival time then user.
pub fn active_requests(all: &[RequestRecord], now: f64) -> Vec<&RequestRecord> {
    let mut active: Vec<&RequestRecord> = all
        .iter()
        .filter(|r| r.arrival_time <= now && r.remaining_bits > 0.0)
        .collect();
    active.sort_by(|a, b| arrival_order(a, b));
    active
}

/// Earliest arrival first; simultaneous arrivals by user id.
pub fn arrival_order(a: &RequestRecord, b: &RequestRecord) -> Ordering {
    a.arrival_time
        .total_cmp(&b.arrival_time)
        .then(a.user_id.cmp(&b.user_id))
}
