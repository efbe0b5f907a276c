//! Random Waypoint movement of ground users inside the square service area.
//!
//! Users walk straight legs at a constant per-leg speed toward uniformly drawn
//! waypoints. There is no pause at a waypoint.

use std::ops::{Add, Mul, Sub};

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    pub fn from_angle(angle: f64, length: f64) -> Self {
        Self::new(length * angle.cos(), length * angle.sin())
    }

    /// Point `step` metres from `self` along the bearing to `target`, never
    /// past `target`.
    pub fn step_towards(self, target: Vec2, step: f64) -> Vec2 {
        let offset = target - self;
        let dist = offset.norm();
        if step >= dist {
            target
        } else {
            self + offset * (step / dist)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Square service area `[0, width]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaSpec {
    pub width: f64,
}

impl AreaSpec {
    pub fn new(width: f64) -> Self {
        debug_assert!(width > 0.0);
        Self { width }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.width / 2.0, self.width / 2.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.width).contains(&p.y)
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.width))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2 {
        let x = rng.random_range(0.0..=self.width);
        let y = rng.random_range(0.0..=self.width);
        Vec2::new(x, y)
    }
}

/// Closed interval of user walking speeds, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedRange {
    pub min: f64,
    pub max: f64,
}

impl SpeedRange {
    pub const PEDESTRIAN: Self = Self { min: 0.2, max: 4.0 };

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

impl Default for SpeedRange {
    fn default() -> Self {
        Self::PEDESTRIAN
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpState {
    pub position: Vec2,
    pub waypoint: Vec2,
    pub leg_speed: f64,
}

pub fn rwp_init<R: Rng + ?Sized>(area: &AreaSpec, speeds: &SpeedRange, rng: &mut R) -> RwpState {
    let position = area.sample(rng);
    let waypoint = area.sample(rng);
    let leg_speed = speeds.sample(rng);
    RwpState {
        position,
        waypoint,
        leg_speed,
    }
}

/// Advance one step of `dt` seconds. Reaching (or overshooting) the waypoint
/// lands the user on it and starts a new leg; leftover time is dropped.
pub fn rwp_step<R: Rng + ?Sized>(
    state: &RwpState,
    area: &AreaSpec,
    speeds: &SpeedRange,
    dt: f64,
    rng: &mut R,
) -> RwpState {
    let travel = state.leg_speed * dt;
    if travel >= state.position.distance(state.waypoint) {
        RwpState {
            position: state.waypoint,
            waypoint: area.sample(rng),
            leg_speed: speeds.sample(rng),
        }
    } else {
        RwpState {
            position: area.clamp(state.position.step_towards(state.waypoint, travel)),
            ..*state
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const AREA: AreaSpec = AreaSpec { width: 80.0 };

    #[test]
    fn init_respects_invariants_and_is_deterministic() {
        let speeds = SpeedRange::PEDESTRIAN;
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let s = rwp_init(&AREA, &speeds, &mut a);
            assert!(AREA.contains(s.position) && AREA.contains(s.waypoint));
            assert!((speeds.min..=speeds.max).contains(&s.leg_speed));
            assert_eq!(s, rwp_init(&AREA, &speeds, &mut b));
        }
    }

    #[test]
    fn init_mean_position_is_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..n {
            let s = rwp_init(&AREA, &SpeedRange::PEDESTRIAN, &mut rng);
            sx += s.position.x;
            sy += s.position.y;
        }
        let (mx, my) = (sx / n as f64, sy / n as f64);
        assert!(
            (mx - 40.0).abs() < 0.4 && (my - 40.0).abs() < 0.4,
            "({mx}, {my})"
        );
    }

    #[test]
    fn zero_length_leg_redraws_waypoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Vec2::new(10.0, 20.0);
        let s = RwpState {
            position: p,
            waypoint: p,
            leg_speed: 1.0,
        };
        let next = rwp_step(&s, &AREA, &SpeedRange::PEDESTRIAN, 0.1, &mut rng);
        assert_eq!(next.position, p);
        assert_ne!(next.waypoint, p);
    }

    #[test]
    fn step_along_three_four_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = RwpState {
            position: Vec2::new(0.0, 0.0),
            waypoint: Vec2::new(3.0, 4.0),
            leg_speed: 1.0,
        };
        let next = rwp_step(&s, &AREA, &SpeedRange::PEDESTRIAN, 0.1, &mut rng);
        assert!((next.position.x - 0.06).abs() < 1e-12);
        assert!((next.position.y - 0.08).abs() < 1e-12);
        assert_eq!(next.waypoint, s.waypoint);
    }

    #[test]
    fn million_steps_stay_inside() {
        let speeds = SpeedRange::PEDESTRIAN;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = rwp_init(&AREA, &speeds, &mut rng);
        for _ in 0..1_000_000 {
            let next = rwp_step(&s, &AREA, &speeds, 0.1, &mut rng);
            assert!(AREA.contains(next.position));
            assert!(next.position.distance(s.position) <= speeds.max * 0.1 + 1e-9);
            s = next;
        }
    }

    proptest! {
        #[test]
        fn identical_seeds_identical_trajectories(seed in any::<u64>()) {
            let speeds = SpeedRange::PEDESTRIAN;
            let mut a = ChaCha8Rng::seed_from_u64(seed);
            let mut b = ChaCha8Rng::seed_from_u64(seed);
            let mut sa = rwp_init(&AREA, &speeds, &mut a);
            let mut sb = rwp_init(&AREA, &speeds, &mut b);
            for _ in 0..200 {
                sa = rwp_step(&sa, &AREA, &speeds, 0.1, &mut a);
                sb = rwp_step(&sb, &AREA, &speeds, 0.1, &mut b);
                prop_assert_eq!(sa, sb);
            }
        }
    }
}
