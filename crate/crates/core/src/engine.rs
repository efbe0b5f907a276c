//! Slotted simulation loop for one drone and its users.
//!
//! Within a slot the order is: admit arrivals, decide, transmit from the
//! start-of-slot pose, retire finished requests, move users, move the drone,
//! account. Metrics only accrue once the clock has passed the warm-up.
//!
//! Every user owns two random streams derived from the run seed, one for
//! mobility and one for reading times, so the policy can never perturb the
//! user sample paths. Mobile and fixed runs on the same seed therefore see
//! identical user trajectories.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::ChannelError;
use crate::config::{ArrivalModel, ConfigError, SimConfig};
use crate::metrics::RunMetrics;
use crate::mobility::{rwp_init, rwp_step, AreaSpec, RwpState, SpeedRange, Vec2};
use crate::policy::{ActiveRequest, DronePose, PolicyEnv, SlotDecision};
use crate::traffic::{
    arrival_order, schedule_next_arrival, RequestId, RequestRecord, TrafficConfig, TrafficError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("channel model: {0}")]
    Channel(#[from] ChannelError),
    #[error("traffic: {0}")]
    Traffic(#[from] TrafficError),
    #[error("paired runs need a mobile policy, got {0}")]
    NotMobile(crate::policy::PolicyKind),
    #[error("simulation already reached its end time")]
    Finished,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    pub mobility: RwpState,
    pub next_arrival: f64,
    pub active_request: Option<RequestId>,
}

#[derive(Debug, Clone, PartialEq)]
struct UserStreams {
    mobility: ChaCha8Rng,
    traffic: ChaCha8Rng,
}

impl UserStreams {
    fn new(seed: u64, user: usize) -> Self {
        let mut mobility = ChaCha8Rng::seed_from_u64(seed);
        mobility.set_stream(2 * user as u64);
        let mut traffic = ChaCha8Rng::seed_from_u64(seed);
        traffic.set_stream(2 * user as u64 + 1);
        Self { mobility, traffic }
    }
}

const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

fn fold(hash: u64, word: u64) -> u64 {
    (hash ^ word).wrapping_mul(FNV_PRIME)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    cfg: SimConfig,
    policy: PolicyEnv,
    traffic: TrafficConfig,
    area: AreaSpec,
    speeds: SpeedRange,
    slot: u64,
    end_slot: u64,
    warmup_slots: u64,
    drone: DronePose,
    users: Vec<UserState>,
    streams: Vec<UserStreams>,
    requests: Vec<RequestRecord>,
    metrics: RunMetrics,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let area = cfg.area();
        let speeds = cfg.user_speeds();
        let traffic = cfg.traffic();
        let policy = PolicyEnv {
            kind: cfg.policy,
            channel: cfg.channel(),
            area,
            angle_step: cfg.angle_step,
            dt: cfg.time_slot,
        };

        let mut streams: Vec<UserStreams> = (0..cfg.users)
            .map(|u| UserStreams::new(cfg.seed, u))
            .collect();
        let users = streams
            .iter_mut()
            .map(|s| UserState {
                mobility: rwp_init(&area, &speeds, &mut s.mobility),
                next_arrival: schedule_next_arrival(&traffic, 0.0, &mut s.traffic),
                active_request: None,
            })
            .collect();

        Ok(Self {
            drone: DronePose {
                ground_position: area.center(),
                height: cfg.height,
                speed: cfg.speed,
            },
            policy,
            traffic,
            area,
            speeds,
            slot: 0,
            end_slot: cfg.slot_count(),
            warmup_slots: cfg.warmup_slots(),
            users,
            streams,
            requests: Vec::new(),
            metrics: RunMetrics {
                mobility_fingerprint: FNV_OFFSET,
                ..RunMetrics::new(cfg.time_slot)
            },
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn clock(&self) -> f64 {
        self.slot as f64 * self.cfg.time_slot
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn is_finished(&self) -> bool {
        self.slot >= self.end_slot
    }

    pub fn drone(&self) -> &DronePose {
        &self.drone
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    /// Scenario setup hook: lets callers pin user state before stepping.
    pub fn users_mut(&mut self) -> &mut [UserState] {
        &mut self.users
    }

    pub fn requests(&self) -> &[RequestRecord] {
        &self.requests
    }

    pub fn metrics(&self) -> &RunMetrics {
        &self.metrics
    }

    fn active_view(&self) -> Vec<ActiveRequest> {
        let mut open: Vec<&RequestRecord> = self
            .users
            .iter()
            .filter_map(|u| u.active_request.map(|id| &self.requests[id]))
            .collect();
        open.sort_by(|a, b| arrival_order(a, b));
        open.into_iter()
            .map(|r| ActiveRequest {
                request_id: r.id,
                user_id: r.user_id,
                arrival_time: r.arrival_time,
                remaining_bits: r.remaining_bits,
                user_position: self.users[r.user_id].mobility.position,
            })
            .collect()
    }

    fn admit_arrivals(&mut self, now: f64) {
        for (uid, user) in self.users.iter_mut().enumerate() {
            if user.active_request.is_some() || user.next_arrival > now {
                continue;
            }
            let id = self.requests.len();
            self.requests.push(RequestRecord::new(
                id,
                uid,
                user.next_arrival,
                self.traffic.request_size_bits(),
            ));
            user.active_request = Some(id);
            user.next_arrival = match self.cfg.arrival_model {
                ArrivalModel::ReadingTime => f64::INFINITY,
                ArrivalModel::Poisson => schedule_next_arrival(
                    &self.traffic,
                    user.next_arrival,
                    &mut self.streams[uid].traffic,
                ),
            };
        }
    }

    /// Advance one slot and return the decision that was applied.
    pub fn step(&mut self) -> Result<SlotDecision, SimError> {
        if self.is_finished() {
            return Err(SimError::Finished);
        }
        let dt = self.cfg.time_slot;
        let now = self.clock();

        self.admit_arrivals(now);

        let active = self.active_view();
        let decision = self.policy.decide(&self.drone, &active)?;

        let here = self.drone.ground_position;
        let mut se_values = Vec::with_capacity(decision.allocations.len());
        let mut delivered = 0.0;
        let mut completed = 0;
        for alloc in &decision.allocations {
            let user_pos = self.users[alloc.user_id].mobility.position;
            let se = self
                .policy
                .channel
                .spectral_efficiency(here.distance(user_pos), alloc.bandwidth)?;
            se_values.push(se);

            let req = &mut self.requests[alloc.request_id];
            delivered += req.drain(alloc.bandwidth * se, dt, now)?;
            if let Some(done) = req.completion_time {
                completed += 1;
                let user = &mut self.users[alloc.user_id];
                user.active_request = None;
                if self.cfg.arrival_model == ArrivalModel::ReadingTime {
                    user.next_arrival = schedule_next_arrival(
                        &self.traffic,
                        done,
                        &mut self.streams[alloc.user_id].traffic,
                    );
                }
            }
        }

        let mut fp = self.metrics.mobility_fingerprint;
        for (user, streams) in self.users.iter_mut().zip(self.streams.iter_mut()) {
            user.mobility = rwp_step(
                &user.mobility,
                &self.area,
                &self.speeds,
                dt,
                &mut streams.mobility,
            );
            fp = fold(
                fold(fp, user.mobility.position.x.to_bits()),
                user.mobility.position.y.to_bits(),
            );
        }
        self.metrics.mobility_fingerprint = fp;

        self.drone.ground_position = decision.next_position;

        if self.slot >= self.warmup_slots {
            self.metrics.record_slot(&decision, &se_values);
            self.metrics.delivered_bits += delivered;
            self.metrics.completed_requests += completed;
        }

        self.slot += 1;
        Ok(decision)
    }

    pub fn run_to_end(mut self) -> Result<RunMetrics, SimError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(self.metrics)
    }

    /// Position the drone, e.g. to start a scenario off-center.
    pub fn set_drone_position(&mut self, at: Vec2) {
        self.drone.ground_position = self.area.clamp(at);
    }
}

/// Execute a full run from a fresh seeded state.
pub fn run(cfg: &SimConfig) -> Result<RunMetrics, SimError> {
    Simulation::new(cfg.clone())?.run_to_end()
}

/// Run a mobile policy and its fixed counterpart on the same seed.
pub fn run_paired(cfg: &SimConfig) -> Result<(RunMetrics, RunMetrics), SimError> {
    if !cfg.policy.is_mobile() {
        return Err(SimError::NotMobile(cfg.policy));
    }
    let mobile = run(cfg)?;
    let fixed_cfg = SimConfig {
        policy: cfg.policy.counterpart(),
        ..cfg.clone()
    };
    let fixed = run(&fixed_cfg)?;
    Ok((mobile, fixed))
}
