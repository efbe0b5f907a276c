//! Simulation configuration and its flat `key = value` text format.
//!
//! Values are held in the units the file uses (MHz, dBm, MBytes, ...);
//! SI conversions happen in the accessor methods. Absent keys keep their
//! defaults, which reproduce the reference urban scenario.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::{ChannelContext, EnvironmentParams, PathLossParams, RadioConfig};
use crate::metrics::EnergyModel;
use crate::mobility::{AreaSpec, SpeedRange};
use crate::policy::{PolicyKind, Strategy};
use crate::traffic::TrafficConfig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("{}unknown key `{key}`", at(*line))]
    UnknownKey { line: Option<usize>, key: String },
    #[error("{}duplicate key `{key}`", at(Some(*line)))]
    DuplicateKey { line: usize, key: String },
    #[error("{}invalid value for `{key}`: {message}", at(*line))]
    Value {
        line: Option<usize>,
        key: String,
        message: String,
    },
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey { key, .. }
            | ConfigError::DuplicateKey { key, .. }
            | ConfigError::Value { key, .. } => Some(key),
        }
    }
}

/// How a user's next request is timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalModel {
    /// Next request an exponential reading time after the previous download ends.
    ReadingTime,
    /// Arrival instants form a Poisson stream independent of service; a
    /// request arriving while the user is still downloading waits its turn.
    Poisson,
}

impl FromStr for ArrivalModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reading_time" => Ok(ArrivalModel::ReadingTime),
            "poisson" => Ok(ArrivalModel::Poisson),
            other => Err(format!("expected reading_time or poisson, found `{other}`")),
        }
    }
}

impl ArrivalModel {
    fn as_str(self) -> &'static str {
        match self {
            ArrivalModel::ReadingTime => "reading_time",
            ArrivalModel::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Side of the square area, m.
    pub area_width: f64,
    pub users: usize,
    pub bandwidth_mhz: f64,
    pub frequency_mhz: f64,
    /// Drone altitude, m.
    pub height: f64,
    /// Drone cruise speed, m/s.
    pub speed: f64,
    pub tx_power_dbm: f64,
    /// Mean reading time λ, s.
    pub mean_reading_time: f64,
    pub path_loss: PathLossParams,
    pub ue_noise_figure_db: f64,
    pub env: EnvironmentParams,
    /// Total simulated time T, s.
    pub sim_time: f64,
    /// Leading interval excluded from metrics, s.
    pub warmup: f64,
    pub request_size_mbytes: f64,
    /// Heading quantization Δg, rad.
    pub angle_step: f64,
    /// Slot length Δt, s.
    pub time_slot: f64,
    pub hover_power: f64,
    pub move_power: Vec<(f64, f64)>,
    pub user_speed_min: f64,
    pub user_speed_max: f64,
    pub policy: PolicyKind,
    pub arrival_model: ArrivalModel,
    pub seed: u64,
    pub replications: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            area_width: 80.0,
            users: 5,
            bandwidth_mhz: 10.0,
            frequency_mhz: 2000.0,
            height: 10.0,
            speed: 20.0,
            tx_power_dbm: 24.0,
            mean_reading_time: 5.0,
            path_loss: PathLossParams::DEFAULT,
            ue_noise_figure_db: 9.0,
            env: EnvironmentParams::URBAN,
            sim_time: 300.0,
            warmup: 100.0,
            request_size_mbytes: 2.0,
            angle_step: PI / 36.0,
            time_slot: 0.1,
            hover_power: 110.0,
            move_power: vec![(10.0, 110.0), (20.0, 170.0)],
            user_speed_min: 0.2,
            user_speed_max: 4.0,
            policy: PolicyKind::mobile(Strategy::NearestUserFirst),
            arrival_model: ArrivalModel::ReadingTime,
            seed: 1,
            replications: 200,
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: &[&str] = &[
    "area_width",
    "users",
    "bandwidth",
    "frequency",
    "height",
    "speed",
    "tx_power",
    "mean_reading_time",
    "los_path_loss_ref",
    "los_path_loss_exponent",
    "nlos_path_loss_ref",
    "nlos_path_loss_exponent",
    "ue_noise_figure",
    "env_alpha",
    "env_beta",
    "sim_time",
    "warmup",
    "request_size",
    "angle_step",
    "time_slot",
    "hover_power",
    "move_power",
    "user_speed_min",
    "user_speed_max",
    "policy",
    "arrival_model",
    "seed",
    "replications",
];

fn parse_f64(value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{value}` is not finite"))
    }
}

fn positive(value: &str) -> Result<f64, String> {
    let v = parse_f64(value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn non_negative(value: &str) -> Result<f64, String> {
    let v = parse_f64(value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be non-negative, got {v}"))
    }
}

/// `pi/36`, `pi`, or a plain radian value.
pub fn parse_angle(value: &str) -> Result<f64, String> {
    let compact: String = value.chars().filter(|c| !c.is_whitespace()).collect();
    let compact = compact.replace('π', "pi");
    let angle = if compact == "pi" {
        PI
    } else if let Some(div) = compact.strip_prefix("pi/") {
        PI / positive(div)?
    } else {
        parse_f64(&compact)?
    };
    if !(angle > 0.0) {
        return Err(format!("angle step must be positive, got {angle}"));
    }
    let count = TAU / angle;
    let rounded = count.round();
    if (count - rounded).abs() > 1e-9 * count || rounded < 2.0 || rounded % 2.0 != 0.0 {
        return Err(format!(
            "angle step {angle} rad is not pi/M for an integer M"
        ));
    }
    Ok(angle)
}

/// `speed:power` pairs separated by commas, e.g. `10:110, 20:170`.
fn parse_power_table(value: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (v, p) = item
            .split_once(':')
            .ok_or_else(|| format!("`{item}` is not a speed:power pair"))?;
        out.push((non_negative(v.trim())?, positive(p.trim())?));
    }
    EnergyModel::new(1.0, out.clone()).map_err(|e| e.to_string())?;
    Ok(out)
}

impl SimConfig {
    /// Set one key from its text form, checking only that key's own range.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim().trim_matches('"');
        let err = |message: String| ConfigError::Value {
            line: None,
            key: key.to_string(),
            message,
        };
        match key {
            "area_width" => self.area_width = positive(value).map_err(err)?,
            "users" => {
                self.users = value
                    .parse()
                    .map_err(|_| err(format!("`{value}` is not a non-negative integer")))?
            }
            "bandwidth" => self.bandwidth_mhz = positive(value).map_err(err)?,
            "frequency" => self.frequency_mhz = positive(value).map_err(err)?,
            "height" => {
                let h = parse_f64(value).map_err(err)?;
                if h < 1.0 {
                    return Err(err(format!(
                        "must be at least the 1 m reference distance, got {h}"
                    )));
                }
                self.height = h;
            }
            "speed" => self.speed = non_negative(value).map_err(err)?,
            "tx_power" => self.tx_power_dbm = parse_f64(value).map_err(err)?,
            "mean_reading_time" => self.mean_reading_time = positive(value).map_err(err)?,
            "los_path_loss_ref" => self.path_loss.a_los = parse_f64(value).map_err(err)?,
            "los_path_loss_exponent" => self.path_loss.gamma_los = positive(value).map_err(err)?,
            "nlos_path_loss_ref" => self.path_loss.a_nlos = parse_f64(value).map_err(err)?,
            "nlos_path_loss_exponent" => {
                self.path_loss.gamma_nlos = positive(value).map_err(err)?
            }
            "ue_noise_figure" => self.ue_noise_figure_db = parse_f64(value).map_err(err)?,
            "env_alpha" => self.env.alpha = positive(value).map_err(err)?,
            "env_beta" => self.env.beta = positive(value).map_err(err)?,
            "sim_time" => self.sim_time = positive(value).map_err(err)?,
            "warmup" => self.warmup = non_negative(value).map_err(err)?,
            "request_size" => self.request_size_mbytes = positive(value).map_err(err)?,
            "angle_step" => self.angle_step = parse_angle(value).map_err(err)?,
            "time_slot" => self.time_slot = positive(value).map_err(err)?,
            "hover_power" => self.hover_power = positive(value).map_err(err)?,
            "move_power" => self.move_power = parse_power_table(value).map_err(err)?,
            "user_speed_min" => self.user_speed_min = non_negative(value).map_err(err)?,
            "user_speed_max" => self.user_speed_max = non_negative(value).map_err(err)?,
            "policy" => self.policy = value.parse().map_err(err)?,
            "arrival_model" => self.arrival_model = value.parse().map_err(err)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| err(format!("`{value}` is not an unsigned integer")))?
            }
            "replications" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| err(format!("`{value}` is not an integer")))?;
                if n == 0 {
                    return Err(err("must be at least 1".into()));
                }
                self.replications = n;
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: None,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Apply a `key=value` override. Cross-key constraints are not checked
    /// here; call [`SimConfig::validate`] once all overrides are in.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax {
                line: 0,
                text: assignment.to_string(),
            })?;
        self.set(key.trim(), value)
    }

    /// Cross-key constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key: &str, message: String| {
            Err(ConfigError::Value {
                line: None,
                key: key.to_string(),
                message,
            })
        };
        if self.warmup >= self.sim_time {
            return fail(
                "warmup",
                format!(
                    "must be shorter than sim_time ({} s), got {}",
                    self.sim_time, self.warmup
                ),
            );
        }
        if self.time_slot > self.sim_time {
            return fail(
                "time_slot",
                format!("exceeds sim_time ({} s)", self.sim_time),
            );
        }
        if self.user_speed_max < self.user_speed_min {
            return fail(
                "user_speed_max",
                format!("must be at least user_speed_min ({})", self.user_speed_min),
            );
        }
        if self.path_loss.gamma_los > self.path_loss.gamma_nlos {
            return fail(
                "los_path_loss_exponent",
                format!(
                    "must not exceed nlos_path_loss_exponent ({})",
                    self.path_loss.gamma_nlos
                ),
            );
        }
        Ok(())
    }

    /// Serialize every key; parsing the result reproduces `self` exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("area_width", self.area_width.to_string());
        kv("users", self.users.to_string());
        kv("bandwidth", self.bandwidth_mhz.to_string());
        kv("frequency", self.frequency_mhz.to_string());
        kv("height", self.height.to_string());
        kv("speed", self.speed.to_string());
        kv("tx_power", self.tx_power_dbm.to_string());
        kv("mean_reading_time", self.mean_reading_time.to_string());
        kv("los_path_loss_ref", self.path_loss.a_los.to_string());
        kv(
            "los_path_loss_exponent",
            self.path_loss.gamma_los.to_string(),
        );
        kv("nlos_path_loss_ref", self.path_loss.a_nlos.to_string());
        kv(
            "nlos_path_loss_exponent",
            self.path_loss.gamma_nlos.to_string(),
        );
        kv("ue_noise_figure", self.ue_noise_figure_db.to_string());
        kv("env_alpha", self.env.alpha.to_string());
        kv("env_beta", self.env.beta.to_string());
        kv("sim_time", self.sim_time.to_string());
        kv("warmup", self.warmup.to_string());
        kv("request_size", self.request_size_mbytes.to_string());
        kv("angle_step", self.angle_step.to_string());
        kv("time_slot", self.time_slot.to_string());
        kv("hover_power", self.hover_power.to_string());
        let table: Vec<String> = self
            .move_power
            .iter()
            .map(|(v, p)| format!("{v}:{p}"))
            .collect();
        kv("move_power", table.join(", "));
        kv("user_speed_min", self.user_speed_min.to_string());
        kv("user_speed_max", self.user_speed_max.to_string());
        kv("policy", self.policy.to_string());
        kv("arrival_model", self.arrival_model.as_str().to_string());
        kv("seed", self.seed.to_string());
        kv("replications", self.replications.to_string());
        s
    }

    pub fn area(&self) -> AreaSpec {
        AreaSpec::new(self.area_width)
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_mhz * 1e6
    }

    pub fn radio(&self) -> RadioConfig {
        RadioConfig::from_dbm(
            self.tx_power_dbm,
            self.bandwidth_hz(),
            self.ue_noise_figure_db,
            self.frequency_mhz * 1e6,
        )
    }

    pub fn channel(&self) -> ChannelContext {
        ChannelContext {
            env: self.env,
            path_loss: self.path_loss,
            radio: self.radio(),
            height: self.height,
        }
    }

    pub fn traffic(&self) -> TrafficConfig {
        TrafficConfig {
            mean_reading_time: self.mean_reading_time,
            request_size_bytes: self.request_size_mbytes * 1e6,
        }
    }

    pub fn user_speeds(&self) -> SpeedRange {
        SpeedRange {
            min: self.user_speed_min,
            max: self.user_speed_max,
        }
    }

    pub fn energy_model(&self) -> EnergyModel {
        EnergyModel::new(self.hover_power, self.move_power.clone()).expect("validated on load")
    }

    pub fn slot_count(&self) -> u64 {
        (self.sim_time / self.time_slot).round() as u64
    }

    pub fn warmup_slots(&self) -> u64 {
        (self.warmup / self.time_slot).round() as u64
    }

    /// Users per 100 m².
    pub fn user_density(&self) -> f64 {
        user_density(self.users, self.area_width)
    }
}

pub fn user_density(users: usize, area_width: f64) -> f64 {
    users as f64 / (area_width * area_width / 100.0)
}

/// Parse a configuration document on top of the defaults.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: content.to_string(),
        })?;
        let key = key.trim();
        if seen.iter().any(|(k, _)| k == key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        cfg.set(key, value).map_err(|e| with_line(e, line))?;
        seen.push((key.to_string(), line));
    }
    cfg.validate().map_err(|e| {
        let line = e
            .key()
            .and_then(|k| seen.iter().find(|(s, _)| s == k).map(|&(_, l)| l));
        match line {
            Some(l) => with_line(e, l),
            None => e,
        }
    })?;
    Ok(cfg)
}

fn with_line(e: ConfigError, at: usize) -> ConfigError {
    match e {
        ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey {
            line: Some(at),
            key,
        },
        ConfigError::Value { key, message, .. } => ConfigError::Value {
            line: Some(at),
            key,
            message,
        },
        other => other,
    }
}
