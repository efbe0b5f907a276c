//! Replicated paired runs and parameter sweeps.
//!
//! A sweep cell is one (parameter value, strategy) pair. Each replication of
//! a cell runs the mobile strategy and its fixed counterpart on the same
//! seed; replication `i` uses seed `base.seed + i` in every cell, so cells
//! are also paired with each other. Jobs run in parallel and are merged back
//! by index.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, SimConfig};
use crate::engine::{run_paired, SimError};
use crate::metrics::{aggregate_runs, compute_cee, compute_mee, compute_seg, RunMetrics, Summary};
use crate::output::{Cell, Table};
use crate::policy::{PolicyKind, Strategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep has no parameter values")]
    NoValues,
    #[error("sweep has no strategies")]
    NoPolicies,
    #[error("replication count must be at least 1")]
    NoReplications,
    #[error("cannot set {param} = {value}: {source}")]
    BadValue {
        param: String,
        value: f64,
        source: ConfigError,
    },
    #[error("{param} = {value}, {policy}, seed {seed}: {source}")]
    Run {
        param: String,
        value: f64,
        policy: PolicyKind,
        seed: u64,
        source: SimError,
    },
}

pub const SIM_TIME_GRID: [f64; 6] = [50.0, 100.0, 150.0, 200.0, 250.0, 300.0];
pub const AREA_WIDTH_GRID: [f64; 4] = [40.0, 60.0, 80.0, 100.0];
pub const HEIGHT_GRID: [f64; 5] = [10.0, 20.0, 30.0, 40.0, 50.0];
pub const USERS_GRID: [f64; 4] = [2.0, 5.0, 10.0, 20.0];
pub const SPEED_GRID: [f64; 4] = [5.0, 10.0, 15.0, 20.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Configuration key being varied.
    pub param: String,
    pub values: Vec<f64>,
    pub base: SimConfig,
    pub replications: usize,
    /// Strategies to compare; each runs mobile and fixed.
    pub policies: Vec<Strategy>,
}

impl SweepSpec {
    pub fn new(param: &str, values: &[f64], base: SimConfig) -> Self {
        Self {
            param: param.to_string(),
            values: values.to_vec(),
            replications: base.replications,
            base,
            policies: Strategy::ALL.to_vec(),
        }
    }

    pub fn with_policies(mut self, policies: &[Strategy]) -> Self {
        self.policies = policies.to_vec();
        self
    }

    pub fn with_replications(mut self, n: usize) -> Self {
        self.replications = n;
        self
    }

    /// Configuration of one cell, before the seed is assigned.
    pub fn cell_config(&self, value: f64, strategy: Strategy) -> Result<SimConfig, SweepError> {
        let mut cfg = self.base.clone();
        let bad = |source| SweepError::BadValue {
            param: self.param.clone(),
            value,
            source,
        };
        cfg.set(&self.param, &value.to_string()).map_err(bad)?;
        cfg.validate().map_err(bad)?;
        cfg.policy = PolicyKind::mobile(strategy);
        Ok(cfg)
    }
}

/// All replications of one (value, strategy) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRuns {
    pub value: f64,
    pub strategy: Strategy,
    pub config: SimConfig,
    pub seeds: Vec<u64>,
    pub mobile: Vec<RunMetrics>,
    pub fixed: Vec<RunMetrics>,
}

fn summarize(values: impl Iterator<Item = Option<f64>>) -> Option<Summary> {
    let v: Vec<f64> = values.flatten().collect();
    aggregate_runs(&v).ok()
}

impl CellRuns {
    pub fn mobile_se(&self) -> Option<Summary> {
        summarize(self.mobile.iter().map(RunMetrics::mean_se))
    }

    pub fn fixed_se(&self) -> Option<Summary> {
        summarize(self.fixed.iter().map(RunMetrics::mean_se))
    }

    /// Gain of the mean mobile SE over the mean fixed SE.
    pub fn seg(&self) -> Option<f64> {
        compute_seg(self.mobile_se()?.mean, self.fixed_se()?.mean).ok()
    }

    /// Per-replication gains, for paired statistics. Replications where
    /// either side never served are skipped.
    pub fn per_run_seg(&self) -> Vec<f64> {
        self.mobile
            .iter()
            .zip(&self.fixed)
            .filter_map(|(m, f)| compute_seg(m.mean_se()?, f.mean_se()?).ok())
            .collect()
    }

    pub fn cee(&self, runs: &[RunMetrics]) -> Option<Summary> {
        let ptx = self.config.radio().tx_power_w;
        summarize(runs.iter().map(|m| compute_cee(m, ptx).ok()))
    }

    pub fn mee(&self, runs: &[RunMetrics], cruise_speed: f64) -> Option<Summary> {
        let model = self.config.energy_model();
        summarize(
            runs.iter()
                .map(|m| compute_mee(m, &model, cruise_speed).ok()),
        )
    }

    pub fn mobile_cee(&self) -> Option<Summary> {
        self.cee(&self.mobile)
    }

    pub fn fixed_cee(&self) -> Option<Summary> {
        self.cee(&self.fixed)
    }

    pub fn mobile_mee(&self) -> Option<Summary> {
        self.mee(&self.mobile, self.config.speed)
    }

    /// The fixed drone never moves, so its cruise speed is irrelevant.
    pub fn fixed_mee(&self) -> Option<Summary> {
        self.mee(&self.fixed, self.config.speed)
    }

    pub fn mean_slot_se_std(&self) -> Option<f64> {
        summarize(self.mobile.iter().map(RunMetrics::slot_se_std)).map(|s| s.mean)
    }

    pub fn mean_completed(runs: &[RunMetrics]) -> Option<f64> {
        summarize(runs.iter().map(|m| Some(m.completed_requests as f64))).map(|s| s.mean)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: String,
    pub cells: Vec<CellRuns>,
}

impl SweepResult {
    pub fn cell(&self, value: f64, strategy: Strategy) -> Option<&CellRuns> {
        self.cells
            .iter()
            .find(|c| c.value == value && c.strategy == strategy)
    }

    pub fn engine_runs(&self) -> usize {
        self.cells
            .iter()
            .map(|c| c.mobile.len() + c.fixed.len())
            .sum()
    }

    /// One row per (value, strategy) in sweep order.
    pub fn to_table(&self) -> Table {
        let header = [
            self.param.as_str(),
            "policy",
            "se_mobile_mean",
            "se_fixed_mean",
            "seg_percent",
            "se_mobile_std",
            "se_fixed_std",
            "se_mobile_slot_std",
            "cee_mobile",
            "cee_fixed",
            "mee_mobile",
            "mee_fixed",
            "completed_mobile",
            "completed_fixed",
            "runs",
        ];
        let mut table = Table::new(header);
        for c in &self.cells {
            let ms = c.mobile_se();
            let fs = c.fixed_se();
            table.push(vec![
                Cell::Num(c.value),
                Cell::Text(c.strategy.short_name().to_string()),
                Cell::opt(ms.map(|s| s.mean)),
                Cell::opt(fs.map(|s| s.mean)),
                Cell::opt(c.seg()),
                Cell::opt(ms.map(|s| s.std)),
                Cell::opt(fs.map(|s| s.std)),
                Cell::opt(c.mean_slot_se_std()),
                Cell::opt(c.mobile_cee().map(|s| s.mean)),
                Cell::opt(c.fixed_cee().map(|s| s.mean)),
                Cell::opt(c.mobile_mee().map(|s| s.mean)),
                Cell::opt(c.fixed_mee().map(|s| s.mean)),
                Cell::opt(CellRuns::mean_completed(&c.mobile)),
                Cell::opt(CellRuns::mean_completed(&c.fixed)),
                Cell::Int(c.mobile.len() as u64),
            ]);
        }
        table
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    if spec.values.is_empty() {
        return Err(SweepError::NoValues);
    }
    if spec.policies.is_empty() {
        return Err(SweepError::NoPolicies);
    }
    if spec.replications == 0 {
        return Err(SweepError::NoReplications);
    }

    let mut cells = Vec::with_capacity(spec.values.len() * spec.policies.len());
    for &value in &spec.values {
        for &strategy in &spec.policies {
            cells.push((value, strategy, spec.cell_config(value, strategy)?));
        }
    }

    let reps = spec.replications;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..reps as u64).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<Result<(RunMetrics, RunMetrics), SweepError>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (value, strategy, ref base) = cells[c];
            let cfg = SimConfig {
                seed: base.seed.wrapping_add(r),
                ..base.clone()
            };
            run_paired(&cfg).map_err(|source| SweepError::Run {
                param: spec.param.clone(),
                value,
                policy: PolicyKind::mobile(strategy),
                seed: cfg.seed,
                source,
            })
        })
        .collect();

    let mut outcomes = outcomes.into_iter();
    let mut result = Vec::with_capacity(cells.len());
    for (value, strategy, config) in cells {
        let mut mobile = Vec::with_capacity(reps);
        let mut fixed = Vec::with_capacity(reps);
        for _ in 0..reps {
            let (m, f) = outcomes.next().expect("one outcome per job")?;
            mobile.push(m);
            fixed.push(f);
        }
        let seeds = (0..reps as u64)
            .map(|r| config.seed.wrapping_add(r))
            .collect();
        result.push(CellRuns {
            value,
            strategy,
            config,
            seeds,
            mobile,
            fixed,
        });
    }
    Ok(SweepResult {
        param: spec.param.clone(),
        cells: result,
    })
}

/// Users per 100 m².
pub fn user_density(cfg: &SimConfig) -> f64 {
    cfg.user_density()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Gain vs simulated time, all strategies.
    Fig2,
    /// Gain vs area width, all strategies.
    Fig3,
    /// Mean and spread of SE vs area width, nearest-user.
    Fig4,
    /// Gain vs height.
    Fig5a,
    /// Gain vs user density.
    Fig5b,
    /// Gain vs drone speed.
    Fig5c,
    /// Communication energy efficiency vs area width.
    Fig6,
    /// Mechanical energy efficiency vs area width.
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig5c,
        FigureId::Fig6,
        FigureId::Fig7,
    ];
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig5c => "fig5c",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        };
        f.write_str(s)
    }
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown figure `{s}` (expected one of fig2 fig3 fig4 fig5a fig5b fig5c fig6 fig7)"))
    }
}

fn seg_table(
    x_name: &str,
    result: &SweepResult,
    extra: Option<(&str, &dyn Fn(f64) -> f64)>,
) -> Table {
    let mut header = vec![x_name.to_string()];
    if let Some((name, _)) = extra {
        header.push(name.to_string());
    }
    let mut strategies: Vec<Strategy> = Vec::new();
    for c in &result.cells {
        if !strategies.contains(&c.strategy) {
            strategies.push(c.strategy);
        }
    }
    header.extend(strategies.iter().map(|s| format!("seg_{}", s.short_name())));
    let mut table = Table::new(header);
    let mut values: Vec<f64> = Vec::new();
    for c in &result.cells {
        if !values.contains(&c.value) {
            values.push(c.value);
        }
    }
    for v in values {
        let mut row = vec![Cell::Num(v)];
        if let Some((_, f)) = extra {
            row.push(Cell::Num(f(v)));
        }
        for &s in &strategies {
            row.push(Cell::opt(result.cell(v, s).and_then(CellRuns::seg)));
        }
        table.push(row);
    }
    table
}

/// Run the preset sweep behind a figure and shape it into the figure's table.
pub fn reproduce(
    figure: FigureId,
    base: &SimConfig,
    replications: usize,
) -> Result<Table, SweepError> {
    let all = |param: &str, grid: &[f64], cfg: SimConfig| {
        run_sweep(&SweepSpec::new(param, grid, cfg).with_replications(replications))
    };
    let nuf_only = |speed: f64| {
        let cfg = SimConfig {
            speed,
            ..base.clone()
        };
        run_sweep(
            &SweepSpec::new("area_width", &AREA_WIDTH_GRID, cfg)
                .with_policies(&[Strategy::NearestUserFirst])
                .with_replications(replications),
        )
    };

    Ok(match figure {
        FigureId::Fig2 => {
            // Convergence study: nothing is discarded.
            let cfg = SimConfig {
                warmup: 0.0,
                ..base.clone()
            };
            seg_table("sim_time", &all("sim_time", &SIM_TIME_GRID, cfg)?, None)
        }
        FigureId::Fig3 => seg_table(
            "area_width",
            &all("area_width", &AREA_WIDTH_GRID, base.clone())?,
            None,
        ),
        FigureId::Fig5a => seg_table("height", &all("height", &HEIGHT_GRID, base.clone())?, None),
        FigureId::Fig5b => {
            let width = base.area_width;
            let density = move |u: f64| crate::config::user_density(u as usize, width);
            seg_table(
                "users",
                &all("users", &USERS_GRID, base.clone())?,
                Some(("user_density", &density)),
            )
        }
        FigureId::Fig5c => seg_table("speed", &all("speed", &SPEED_GRID, base.clone())?, None),
        FigureId::Fig4 => {
            let result = nuf_only(base.speed)?;
            let mut table = Table::new([
                "area_width",
                "se_mobile_mean",
                "se_mobile_std",
                "se_fixed_mean",
                "se_fixed_std",
                "se_mobile_slot_std",
            ]);
            for c in &result.cells {
                let m = c.mobile_se();
                let f = c.fixed_se();
                table.push(vec![
                    Cell::Num(c.value),
                    Cell::opt(m.map(|s| s.mean)),
                    Cell::opt(m.map(|s| s.std)),
                    Cell::opt(f.map(|s| s.mean)),
                    Cell::opt(f.map(|s| s.std)),
                    Cell::opt(c.mean_slot_se_std()),
                ]);
            }
            table
        }
        FigureId::Fig6 | FigureId::Fig7 => {
            let fast = nuf_only(20.0)?;
            let slow = nuf_only(10.0)?;
            type Pick = fn(&CellRuns, bool) -> Option<Summary>;
            let (prefix, pick): (&str, Pick) = if figure == FigureId::Fig6 {
                ("cee", |c, mobile| {
                    if mobile {
                        c.mobile_cee()
                    } else {
                        c.fixed_cee()
                    }
                })
            } else {
                ("mee", |c, mobile| {
                    if mobile {
                        c.mobile_mee()
                    } else {
                        c.fixed_mee()
                    }
                })
            };
            let mut table = Table::new([
                "area_width".to_string(),
                format!("{prefix}_fixed"),
                format!("{prefix}_mobile_20"),
                format!("{prefix}_mobile_10"),
            ]);
            for (f, s) in fast.cells.iter().zip(&slow.cells) {
                table.push(vec![
                    Cell::Num(f.value),
                    Cell::opt(pick(f, false).map(|x| x.mean)),
                    Cell::opt(pick(f, true).map(|x| x.mean)),
                    Cell::opt(pick(s, true).map(|x| x.mean)),
                ]);
            }
            table
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SimConfig {
        SimConfig {
            sim_time: 30.0,
            warmup: 10.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn single_cell_single_replication_is_two_runs() {
        let spec = SweepSpec::new("area_width", &[80.0], quick())
            .with_policies(&[Strategy::NearestUserFirst])
            .with_replications(1);
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.engine_runs(), 2);
    }

    #[test]
    fn rows_per_value_and_policy() {
        let spec = SweepSpec::new("users", &USERS_GRID, quick()).with_replications(2);
        let r = run_sweep(&spec).unwrap();
        assert_eq!(r.to_table().rows.len(), 12);
        assert_eq!(r.cells[0].seeds, vec![1, 2]);
    }

    #[test]
    fn sweep_is_reproducible() {
        let spec = SweepSpec::new("speed", &[10.0, 20.0], quick()).with_replications(3);
        assert_eq!(run_sweep(&spec).unwrap(), run_sweep(&spec).unwrap());
    }

    #[test]
    fn bad_values_are_rejected() {
        let spec = SweepSpec::new("height", &[-1.0], quick());
        assert!(matches!(run_sweep(&spec), Err(SweepError::BadValue { .. })));
        let spec = SweepSpec::new("nonsense", &[1.0], quick());
        assert!(matches!(run_sweep(&spec), Err(SweepError::BadValue { .. })));
        assert_eq!(
            run_sweep(&SweepSpec::new("height", &[], quick())),
            Err(SweepError::NoValues)
        );
        assert_eq!(
            run_sweep(&SweepSpec::new("height", &[10.0], quick()).with_replications(0)),
            Err(SweepError::NoReplications)
        );
    }

    #[test]
    fn density_of_defaults() {
        let d = user_density(&SimConfig::default());
        assert!((d - 0.078_125).abs() < 1e-15);
    }

    #[test]
    fn figure_ids_parse() {
        for f in FigureId::ALL {
            assert_eq!(f.to_string().parse::<FigureId>().unwrap(), f);
        }
        assert!("fig9".parse::<FigureId>().is_err());
    }

    #[test]
    fn speed_figure_has_seg_per_strategy() {
        let t = reproduce(FigureId::Fig5c, &quick(), 1).unwrap();
        assert_eq!(t.header, vec!["speed", "seg_ebd", "seg_nuf", "seg_lbf"]);
        assert_eq!(t.rows.len(), SPEED_GRID.len());
    }

    #[test]
    fn mee_figure_columns() {
        let t = reproduce(FigureId::Fig7, &quick(), 1).unwrap();
        assert_eq!(
            t.header,
            vec!["area_width", "mee_fixed", "mee_mobile_20", "mee_mobile_10"]
        );
        assert_eq!(t.rows.len(), AREA_WIDTH_GRID.len());
    }

    #[test]
    fn time_figure_spans_fifty_to_three_hundred() {
        let t = reproduce(
            FigureId::Fig2,
            &SimConfig {
                replications: 1,
                ..SimConfig::default()
            },
            1,
        )
        .unwrap();
        assert_eq!(t.rows.first().unwrap()[0], Cell::Num(50.0));
        assert_eq!(t.rows.last().unwrap()[0], Cell::Num(300.0));
    }
}
