//! Air-to-ground radio model.
//!
//! Probabilistic line-of-sight between a hovering base station and a ground
//! user, log-distance path loss per propagation mode, thermal noise over the
//! allocated band, and the LoS-weighted Shannon spectral efficiency.
//!
//! Every function here is a pure function of its arguments.

use thiserror::Error;

/// Thermal noise power spectral density, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Reference distance of the path-loss model, metres.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ChannelError {
    #[error("slant distance {0} m is below the 1 m reference distance")]
    BelowReferenceDistance(f64),
    #[error("allocated bandwidth {0} Hz must be positive")]
    NonPositiveBandwidth(f64),
    #[error("allocated bandwidth {allocated} Hz exceeds total bandwidth {total} Hz")]
    BandwidthExceedsTotal { allocated: f64, total: f64 },
    #[error("height {0} m must be positive")]
    NonPositiveHeight(f64),
    #[error("ground distance {0} m must be non-negative")]
    NegativeGroundDistance(f64),
}

/// Environment constants of the LoS probability curve (urban: 11.95, 0.136).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentParams {
    pub alpha: f64,
    /// Per degree of elevation.
    pub beta: f64,
}

impl EnvironmentParams {
    pub const URBAN: Self = Self {
        alpha: 11.95,
        beta: 0.136,
    };
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        Self::URBAN
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationMode {
    LineOfSight,
    NonLineOfSight,
}

/// Log-distance path loss `A + 10 γ log10(d)` for both propagation modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    pub a_los: f64,
    pub gamma_los: f64,
    pub a_nlos: f64,
    pub gamma_nlos: f64,
}

impl PathLossParams {
    pub const DEFAULT: Self = Self {
        a_los: 41.1,
        gamma_los: 2.09,
        a_nlos: 33.0,
        gamma_nlos: 3.75,
    };

    fn pair(&self, mode: PropagationMode) -> (f64, f64) {
        match mode {
            PropagationMode::LineOfSight => (self.a_los, self.gamma_los),
            PropagationMode::NonLineOfSight => (self.a_nlos, self.gamma_nlos),
        }
    }
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Transmitter side of the link. Power is held in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub tx_power_w: f64,
    pub total_bandwidth_hz: f64,
    pub ue_noise_figure_db: f64,
    /// Not used by any formula; the path-loss constants already assume it.
    pub carrier_frequency_hz: f64,
}

impl RadioConfig {
    pub fn from_dbm(
        tx_power_dbm: f64,
        total_bandwidth_hz: f64,
        ue_noise_figure_db: f64,
        carrier_frequency_hz: f64,
    ) -> Self {
        Self {
            tx_power_w: dbm_to_watt(tx_power_dbm),
            total_bandwidth_hz,
            ue_noise_figure_db,
            carrier_frequency_hz,
        }
    }
}

/// Drone-to-user geometry. The slant distance is derived on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    height: f64,
    ground_distance: f64,
    slant_distance: f64,
}

impl Geometry {
    pub fn new(height: f64, ground_distance: f64) -> Result<Self, ChannelError> {
        if !(height > 0.0) {
            return Err(ChannelError::NonPositiveHeight(height));
        }
        if !(ground_distance >= 0.0) {
            return Err(ChannelError::NegativeGroundDistance(ground_distance));
        }
        Ok(Self {
            height,
            ground_distance,
            slant_distance: height.hypot(ground_distance),
        })
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn ground_distance(&self) -> f64 {
        self.ground_distance
    }

    pub fn slant_distance(&self) -> f64 {
        self.slant_distance
    }

    /// Elevation angle in degrees; 90° directly overhead.
    pub fn elevation_deg(&self) -> f64 {
        if self.ground_distance == 0.0 {
            90.0
        } else {
            (self.height / self.ground_distance).atan().to_degrees()
        }
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * (watt * 1e3).log10()
}

/// Probability of a line-of-sight link, `1 / (1 + α exp(-β (θ - α)))` with
/// θ the elevation angle in degrees.
pub fn los_probability(env: &EnvironmentParams, height: f64, ground_distance: f64) -> f64 {
    let theta = if ground_distance == 0.0 {
        90.0
    } else {
        (height / ground_distance).atan().to_degrees()
    };
    los_probability_at_elevation(env, theta)
}

pub fn los_probability_at_elevation(env: &EnvironmentParams, elevation_deg: f64) -> f64 {
    1.0 / (1.0 + env.alpha * (-env.beta * (elevation_deg - env.alpha)).exp())
}

pub fn path_loss_db(
    params: &PathLossParams,
    mode: PropagationMode,
    slant_distance: f64,
) -> Result<f64, ChannelError> {
    if !(slant_distance >= REFERENCE_DISTANCE_M) {
        return Err(ChannelError::BelowReferenceDistance(slant_distance));
    }
    let (a, gamma) = params.pair(mode);
    Ok(a + 10.0 * gamma * slant_distance.log10())
}

/// Noise power in watts over `allocated_bandwidth` Hz, including the UE noise figure.
pub fn noise_power(ue_noise_figure_db: f64, allocated_bandwidth: f64) -> Result<f64, ChannelError> {
    if !(allocated_bandwidth > 0.0) {
        return Err(ChannelError::NonPositiveBandwidth(allocated_bandwidth));
    }
    let density_mw = 10f64.powf((THERMAL_NOISE_DBM_PER_HZ + ue_noise_figure_db) / 10.0);
    Ok(density_mw * allocated_bandwidth * 1e-3)
}

/// Received power in watts; transmit power is shared in proportion to bandwidth.
pub fn received_power(
    radio: &RadioConfig,
    path_loss_db: f64,
    allocated_bandwidth: f64,
) -> Result<f64, ChannelError> {
    if !(allocated_bandwidth > 0.0) {
        return Err(ChannelError::NonPositiveBandwidth(allocated_bandwidth));
    }
    if allocated_bandwidth > radio.total_bandwidth_hz {
        return Err(ChannelError::BandwidthExceedsTotal {
            allocated: allocated_bandwidth,
            total: radio.total_bandwidth_hz,
        });
    }
    let share = allocated_bandwidth / radio.total_bandwidth_hz;
    Ok(share * radio.tx_power_w * 10f64.powf(-path_loss_db / 10.0))
}

/// LoS-probability-weighted Shannon spectral efficiency in bps/Hz.
///
/// Signal and noise are both linear in the allocated bandwidth, so the
/// result does not depend on it beyond rounding.
pub fn expected_spectral_efficiency(
    env: &EnvironmentParams,
    params: &PathLossParams,
    radio: &RadioConfig,
    height: f64,
    ground_distance: f64,
    allocated_bandwidth: f64,
) -> Result<f64, ChannelError> {
    let geometry = Geometry::new(height, ground_distance)?;
    let p_los = los_probability_at_elevation(env, geometry.elevation_deg());
    let noise = noise_power(radio.ue_noise_figure_db, allocated_bandwidth)?;
    let d = geometry.slant_distance();

    let los = path_loss_db(params, PropagationMode::LineOfSight, d)?;
    let nlos = path_loss_db(params, PropagationMode::NonLineOfSight, d)?;
    let s_los = received_power(radio, los, allocated_bandwidth)?;
    let s_nlos = received_power(radio, nlos, allocated_bandwidth)?;

    Ok(p_los * (1.0 + s_los / noise).log2() + (1.0 - p_los) * (1.0 + s_nlos / noise).log2())
}

/// Bundle of everything the channel needs for a fixed-altitude drone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelContext {
    pub env: EnvironmentParams,
    pub path_loss: PathLossParams,
    pub radio: RadioConfig,
    pub height: f64,
}

impl ChannelContext {
    /// Expected spectral efficiency for a user at `ground_distance`.
    pub fn spectral_efficiency(
        &self,
        ground_distance: f64,
        allocated_bandwidth: f64,
    ) -> Result<f64, ChannelError> {
        expected_spectral_efficiency(
            &self.env,
            &self.path_loss,
            &self.radio,
            self.height,
            ground_distance,
            allocated_bandwidth,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table1_radio() -> RadioConfig {
        RadioConfig::from_dbm(24.0, 10e6, 9.0, 2e9)
    }

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn los_probability_at_alpha_elevation() {
        let env = EnvironmentParams::URBAN;
        let p = los_probability_at_elevation(&env, env.alpha);
        assert!(rel_eq(p, 1.0 / 12.95, 1e-15));
    }

    #[test]
    fn los_probability_overhead() {
        // mpmath, 40 digits
        let p = los_probability(&EnvironmentParams::URBAN, 10.0, 0.0);
        assert!(rel_eq(p, 0.999_706_713_922_249_9, 1e-13), "{p}");
    }

    #[test]
    fn los_probability_falls_with_distance() {
        let env = EnvironmentParams::URBAN;
        assert!(los_probability(&env, 10.0, 10.0) > los_probability(&env, 10.0, 50.0));
    }

    #[test]
    fn path_loss_values() {
        let p = PathLossParams::DEFAULT;
        assert_eq!(
            path_loss_db(&p, PropagationMode::LineOfSight, 1.0).unwrap(),
            41.1
        );
        let los = path_loss_db(&p, PropagationMode::LineOfSight, 100.0).unwrap();
        assert!((los - 82.9).abs() < 1e-12);
        let nlos = path_loss_db(&p, PropagationMode::NonLineOfSight, 100.0).unwrap();
        assert!((nlos - 108.0).abs() < 1e-12);
    }

    #[test]
    fn path_loss_rejects_short_distance() {
        let err = path_loss_db(&PathLossParams::DEFAULT, PropagationMode::LineOfSight, 0.5);
        assert_eq!(err, Err(ChannelError::BelowReferenceDistance(0.5)));
    }

    #[test]
    fn noise_power_values() {
        let n = noise_power(9.0, 10e6).unwrap();
        assert!(rel_eq(n, 3.162_277_660_168_379e-13, 1e-12), "{n}");
        let n1 = noise_power(9.0, 1.0).unwrap();
        assert!(rel_eq(n1, 3.162_277_660_168_379e-20, 1e-12), "{n1}");
        assert!(rel_eq(
            noise_power(9.0, 2e6).unwrap(),
            2.0 * noise_power(9.0, 1e6).unwrap(),
            1e-15
        ));
        assert!(noise_power(9.0, 0.0).is_err());
        assert!(noise_power(9.0, -1.0).is_err());
    }

    #[test]
    fn received_power_values() {
        let radio = table1_radio();
        let full = received_power(&radio, 82.9, 10e6).unwrap();
        assert!(rel_eq(full, 1.288_249_551_693_134e-9, 1e-12), "{full}");
        let half = received_power(&radio, 82.9, 5e6).unwrap();
        assert!(rel_eq(half, full / 2.0, 1e-15));
        assert_eq!(received_power(&radio, 0.0, 10e6).unwrap(), radio.tx_power_w);
        assert!(matches!(
            received_power(&radio, 80.0, 11e6),
            Err(ChannelError::BandwidthExceedsTotal { .. })
        ));
    }

    #[test]
    fn spectral_efficiency_golden_values() {
        let radio = table1_radio();
        let env = EnvironmentParams::URBAN;
        let pl = PathLossParams::DEFAULT;
        // Frozen from a 40-digit independent evaluation of the closed form.
        let golden = [
            (0.0, 18.934_164_890_570_33),
            (5.0, 18.565_325_739_520_27),
            (30.0, 10.822_443_731_841_51),
            (60.0, 6.762_720_740_971_304),
        ];
        for (r, expected) in golden {
            let se = expected_spectral_efficiency(&env, &pl, &radio, 10.0, r, 10e6).unwrap();
            assert!(rel_eq(se, expected, 1e-12), "r={r}: {se} vs {expected}");
        }
    }

    #[test]
    fn spectral_efficiency_bandwidth_invariant() {
        let radio = table1_radio();
        let env = EnvironmentParams::URBAN;
        let pl = PathLossParams::DEFAULT;
        let a = expected_spectral_efficiency(&env, &pl, &radio, 10.0, 30.0, 1e6).unwrap();
        let b = expected_spectral_efficiency(&env, &pl, &radio, 10.0, 30.0, 10e6).unwrap();
        assert!(rel_eq(a, b, 1e-12));
    }

    #[test]
    fn spectral_efficiency_dense_monotone_to_twice_width() {
        let ctx = ChannelContext {
            env: EnvironmentParams::URBAN,
            path_loss: PathLossParams::DEFAULT,
            radio: table1_radio(),
            height: 10.0,
        };
        let mut prev = f64::INFINITY;
        for i in 0..=16_000 {
            let r = i as f64 * 0.01;
            let se = ctx.spectral_efficiency(r, 10e6).unwrap();
            assert!(se < prev, "not decreasing at r={r}");
            assert!(se.is_finite() && se >= 0.0);
            prev = se;
        }
    }

    #[test]
    fn geometry_rejects_bad_inputs() {
        assert!(Geometry::new(0.0, 1.0).is_err());
        assert!(Geometry::new(10.0, -1.0).is_err());
        let g = Geometry::new(3.0, 4.0).unwrap();
        assert_eq!(g.slant_distance(), 5.0);
    }

    #[test]
    fn dbm_round_trip() {
        assert!(rel_eq(dbm_to_watt(24.0), 0.251_188_643_150_958, 1e-14));
        assert!((watt_to_dbm(dbm_to_watt(24.0)) - 24.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn los_probability_open_unit_interval(h in 0.1f64..1000.0, r in 0.0f64..5000.0) {
            let p = los_probability(&EnvironmentParams::URBAN, h, r);
            prop_assert!(p > 0.0 && p < 1.0);
        }

        #[test]
        fn los_probability_decreasing(h in 1.0f64..200.0, r in 0.0f64..1000.0, dr in 0.01f64..100.0) {
            let env = EnvironmentParams::URBAN;
            prop_assert!(los_probability(&env, h, r) > los_probability(&env, h, r + dr));
        }

        #[test]
        fn path_loss_increasing(d in 1.0f64..10_000.0, dd in 0.001f64..1000.0) {
            let p = PathLossParams::DEFAULT;
            for mode in [PropagationMode::LineOfSight, PropagationMode::NonLineOfSight] {
                prop_assert!(path_loss_db(&p, mode, d).unwrap() < path_loss_db(&p, mode, d + dd).unwrap());
            }
        }

        #[test]
        fn bandwidth_cancels(h in 1.0f64..100.0, r in 0.0f64..500.0, b in 1.0f64..10e6) {
            let radio = table1_radio();
            let env = EnvironmentParams::URBAN;
            let pl = PathLossParams::DEFAULT;
            let full = expected_spectral_efficiency(&env, &pl, &radio, h, r, 10e6).unwrap();
            let part = expected_spectral_efficiency(&env, &pl, &radio, h, r, b).unwrap();
            prop_assert!(rel_eq(part, full, 1e-12), "{} vs {}", part, full);
        }
    }
}
