//! Simulator for a single drone base station that repositions itself to
//! serve mobile ground users.
//!
//! The crate is layered bottom-up: [`channel`] (air-to-ground radio model),
//! [`mobility`] and [`traffic`] (user behaviour), [`policy`] (per-slot
//! allocation and movement), [`engine`] (the slot loop), [`metrics`]
//! (spectral and energy efficiency), [`experiment`] (replicated sweeps) and
//! the [`config`], [`output`] and [`cli`] front end.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod config;
pub mod engine;
pub mod experiment;
pub mod metrics;
pub mod mobility;
pub mod output;
pub mod policy;
pub mod traffic;

pub use config::{parse_config, SimConfig};
pub use engine::{run, run_paired, SimError, Simulation};
pub use experiment::{run_sweep, FigureId, SweepResult, SweepSpec};
pub use metrics::{compute_cee, compute_mee, compute_seg, RunMetrics};
pub use policy::{PolicyKind, Strategy};
