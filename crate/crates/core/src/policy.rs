//! Per-slot bandwidth allocation and drone movement.
//!
//! Three strategies decide who gets the band and where the drone heads next:
//!
//! * Equal Bandwidth Division splits the band evenly over all active requests
//!   and flies along whichever of the `2M` quantized headings maximizes the
//!   mean expected spectral efficiency, hovering if no heading beats the
//!   current spot.
//! * Nearest User First gives the whole band to the closest active user and
//!   flies straight at it.
//! * Least Buffer First gives the whole band to the request with the least
//!   data left and flies straight at its user.
//!
//! Each strategy also has a fixed variant that hovers over the area center
//! and applies the same allocation rule from there.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelContext, ChannelError};
use crate::mobility::{AreaSpec, Vec2};
use crate::traffic::RequestId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    EqualBandwidthDivision,
    NearestUserFirst,
    LeastBufferFirst,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::EqualBandwidthDivision,
        Strategy::NearestUserFirst,
        Strategy::LeastBufferFirst,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::EqualBandwidthDivision => "ebd",
            Strategy::NearestUserFirst => "nuf",
            Strategy::LeastBufferFirst => "lbf",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ebd" | "equal_bandwidth" | "equal_bandwidth_division" => {
                Ok(Strategy::EqualBandwidthDivision)
            }
            "nuf" | "nearest_user" | "nearest_user_first" => Ok(Strategy::NearestUserFirst),
            "lbf" | "least_buffer" | "least_buffer_first" => Ok(Strategy::LeastBufferFirst),
            other => Err(format!(
                "unknown strategy `{other}` (expected ebd, nuf or lbf)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placement {
    Mobile,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolicyKind {
    pub strategy: Strategy,
    pub placement: Placement,
}

impl PolicyKind {
    pub const fn mobile(strategy: Strategy) -> Self {
        Self {
            strategy,
            placement: Placement::Mobile,
        }
    }

    pub const fn fixed(strategy: Strategy) -> Self {
        Self {
            strategy,
            placement: Placement::Fixed,
        }
    }

    /// The same allocation rule with the other placement.
    pub fn counterpart(self) -> Self {
        let placement = match self.placement {
            Placement::Mobile => Placement::Fixed,
            Placement::Fixed => Placement::Mobile,
        };
        Self { placement, ..self }
    }

    pub fn is_mobile(self) -> bool {
        self.placement == Placement::Mobile
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let placement = match self.placement {
            Placement::Mobile => "mobile",
            Placement::Fixed => "fixed",
        };
        write!(f, "{placement}-{}", self.strategy.short_name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    /// Accepts `mobile-nuf`, `fixed-ebd`, ... A bare strategy means mobile.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('-') {
            Some((placement, strategy)) => {
                let strategy = strategy.parse()?;
                match placement.to_ascii_lowercase().as_str() {
                    "mobile" => Ok(PolicyKind::mobile(strategy)),
                    "fixed" => Ok(PolicyKind::fixed(strategy)),
                    other => Err(format!(
                        "unknown placement `{other}` (expected mobile or fixed)"
                    )),
                }
            }
            None => Ok(PolicyKind::mobile(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DronePose {
    pub ground_position: Vec2,
    /// Fixed altitude for the whole run.
    pub height: f64,
    /// Cruise speed for the whole run.
    pub speed: f64,
}

/// What a policy can see of one active request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveRequest {
    pub request_id: RequestId,
    pub user_id: usize,
    pub arrival_time: f64,
    pub remaining_bits: f64,
    pub user_position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub request_id: RequestId,
    pub user_id: usize,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotDecision {
    pub allocations: Vec<Allocation>,
    pub next_position: Vec2,
    pub moved: bool,
}

impl SlotDecision {
    pub fn hover(at: Vec2) -> Self {
        Self {
            allocations: Vec::new(),
            next_position: at,
            moved: false,
        }
    }

    pub fn allocated_bandwidth(&self) -> f64 {
        self.allocations.iter().map(|a| a.bandwidth).sum()
    }
}

/// Number of headings examined for an angle step of `π/M`, i.e. `2M`.
pub fn direction_count(angle_step: f64) -> usize {
    (TAU / angle_step).round() as usize
}

/// The current position followed by every quantized heading's end point
/// that stays inside the area, in increasing angle order.
pub fn candidate_positions(
    pose: &DronePose,
    angle_step: f64,
    dt: f64,
    area: &AreaSpec,
) -> Vec<Vec2> {
    const EDGE_SLACK: f64 = 1e-9;
    let here = pose.ground_position;
    let reach = pose.speed * dt;
    let count = direction_count(angle_step);

    let mut out = Vec::with_capacity(count + 1);
    out.push(here);
    for k in 0..count {
        let p = here + Vec2::from_angle(k as f64 * angle_step, reach);
        let inside = (-EDGE_SLACK..=area.width + EDGE_SLACK).contains(&p.x)
            && (-EDGE_SLACK..=area.width + EDGE_SLACK).contains(&p.y);
        if inside {
            out.push(area.clamp(p));
        }
    }
    out
}

/// Mean expected spectral efficiency over `active` with the drone at `at`.
pub fn ebd_objective(
    ctx: &ChannelContext,
    at: Vec2,
    active: &[ActiveRequest],
) -> Result<f64, ChannelError> {
    if active.is_empty() {
        return Ok(0.0);
    }
    let share = ctx.radio.total_bandwidth_hz / active.len() as f64;
    let mut sum = 0.0;
    for req in active {
        sum += ctx.spectral_efficiency(at.distance(req.user_position), share)?;
    }
    Ok(sum / active.len() as f64)
}

fn equal_split(ctx: &ChannelContext, active: &[ActiveRequest]) -> Vec<Allocation> {
    let share = ctx.radio.total_bandwidth_hz / active.len() as f64;
    active
        .iter()
        .map(|r| Allocation {
            request_id: r.request_id,
            user_id: r.user_id,
            bandwidth: share,
        })
        .collect()
}

fn whole_band(ctx: &ChannelContext, target: &ActiveRequest) -> Vec<Allocation> {
    vec![Allocation {
        request_id: target.request_id,
        user_id: target.user_id,
        bandwidth: ctx.radio.total_bandwidth_hz,
    }]
}

/// Closest user to `from`; ties go to the earliest request, then lowest user id.
pub fn select_nearest(from: Vec2, active: &[ActiveRequest]) -> Option<&ActiveRequest> {
    active.iter().min_by(|a, b| {
        from.distance(a.user_position)
            .total_cmp(&from.distance(b.user_position))
            .then(a.arrival_time.total_cmp(&b.arrival_time))
            .then(a.user_id.cmp(&b.user_id))
    })
}

/// Request with the least remaining data; ties go to the highest spectral
/// efficiency seen from `from`, then the earliest request.
pub fn select_least_buffer<'a>(
    ctx: &ChannelContext,
    from: Vec2,
    active: &'a [ActiveRequest],
) -> Result<Option<&'a ActiveRequest>, ChannelError> {
    let band = ctx.radio.total_bandwidth_hz;
    let mut best: Option<(&ActiveRequest, f64)> = None;
    for req in active {
        let se = ctx.spectral_efficiency(from.distance(req.user_position), band)?;
        let better = match best {
            None => true,
            Some((cur, cur_se)) => {
                req.remaining_bits < cur.remaining_bits
                    || (req.remaining_bits == cur.remaining_bits
                        && (se > cur_se
                            || (se == cur_se
                                && (req.arrival_time, req.user_id)
                                    < (cur.arrival_time, cur.user_id))))
            }
        };
        if better {
            best = Some((req, se));
        }
    }
    Ok(best.map(|(r, _)| r))
}

fn fly_towards(pose: &DronePose, target: Vec2, dt: f64) -> (Vec2, bool) {
    let here = pose.ground_position;
    let next = here.step_towards(target, pose.speed * dt);
    (next, next != here)
}

pub fn decide_equal_bandwidth(
    pose: &DronePose,
    active: &[ActiveRequest],
    ctx: &ChannelContext,
    area: &AreaSpec,
    angle_step: f64,
    dt: f64,
) -> Result<SlotDecision, ChannelError> {
    let here = pose.ground_position;
    if active.is_empty() {
        return Ok(SlotDecision::hover(here));
    }

    // Staying is evaluated first and only a strictly better heading replaces it.
    let mut best = here;
    let mut best_value = ebd_objective(ctx, here, active)?;
    for cand in candidate_positions(pose, angle_step, dt, area)
        .into_iter()
        .skip(1)
    {
        let value = ebd_objective(ctx, cand, active)?;
        if value > best_value {
            best = cand;
            best_value = value;
        }
    }

    Ok(SlotDecision {
        allocations: equal_split(ctx, active),
        next_position: best,
        moved: best != here,
    })
}

pub fn decide_nearest_user(
    pose: &DronePose,
    active: &[ActiveRequest],
    ctx: &ChannelContext,
    dt: f64,
) -> SlotDecision {
    match select_nearest(pose.ground_position, active) {
        None => SlotDecision::hover(pose.ground_position),
        Some(target) => {
            let (next_position, moved) = fly_towards(pose, target.user_position, dt);
            SlotDecision {
                allocations: whole_band(ctx, target),
                next_position,
                moved,
            }
        }
    }
}

pub fn decide_least_buffer(
    pose: &DronePose,
    active: &[ActiveRequest],
    ctx: &ChannelContext,
    dt: f64,
) -> Result<SlotDecision, ChannelError> {
    Ok(
        match select_least_buffer(ctx, pose.ground_position, active)? {
            None => SlotDecision::hover(pose.ground_position),
            Some(target) => {
                let (next_position, moved) = fly_towards(pose, target.user_position, dt);
                SlotDecision {
                    allocations: whole_band(ctx, target),
                    next_position,
                    moved,
                }
            }
        },
    )
}

/// Hover at `center`, allocating as the strategy of `kind` would.
pub fn decide_fixed(
    kind: PolicyKind,
    center: Vec2,
    active: &[ActiveRequest],
    ctx: &ChannelContext,
) -> Result<SlotDecision, ChannelError> {
    debug_assert_eq!(kind.placement, Placement::Fixed);
    if active.is_empty() {
        return Ok(SlotDecision::hover(center));
    }
    let allocations = match kind.strategy {
        Strategy::EqualBandwidthDivision => equal_split(ctx, active),
        Strategy::NearestUserFirst => {
            whole_band(ctx, select_nearest(center, active).expect("non-empty"))
        }
        Strategy::LeastBufferFirst => whole_band(
            ctx,
            select_least_buffer(ctx, center, active)?.expect("non-empty"),
        ),
    };
    Ok(SlotDecision {
        allocations,
        next_position: center,
        moved: false,
    })
}

/// Everything a policy needs besides the per-slot inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEnv {
    pub kind: PolicyKind,
    pub channel: ChannelContext,
    pub area: AreaSpec,
    pub angle_step: f64,
    pub dt: f64,
}

impl PolicyEnv {
    pub fn decide(
        &self,
        pose: &DronePose,
        active: &[ActiveRequest],
    ) -> Result<SlotDecision, ChannelError> {
        match self.kind.placement {
            Placement::Fixed => decide_fixed(self.kind, self.area.center(), active, &self.channel),
            Placement::Mobile => match self.kind.strategy {
                Strategy::EqualBandwidthDivision => decide_equal_bandwidth(
                    pose,
                    active,
                    &self.channel,
                    &self.area,
                    self.angle_step,
                    self.dt,
                ),
                Strategy::NearestUserFirst => {
                    Ok(decide_nearest_user(pose, active, &self.channel, self.dt))
                }
                Strategy::LeastBufferFirst => {
                    decide_least_buffer(pose, active, &self.channel, self.dt)
                }
            },
        }
    }
}
