//! Consensus dynamics over signed random networks.
//!
//! Positive arcs carry the usual consensus pull; negative arcs push nodes
//! apart using relative state ("relative-state flipping"), or, for
//! comparison, attract towards the reflected state ("state flipping"). Two
//! global Bernoulli attention processes gate whether each kind of
//! recommendation is applied in a slot.
//!
//! The crate is organised bottom-up: [`graph`] (signed digraphs and positive
//! clusters), [`env`] (schedules, arc sampling and attention), [`dynamics`]
//! (the state update), [`analysis`] (metrics, constants, verdicts),
//! [`harness`] (seeded Monte-Carlo runs) and [`presets`].

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod env;
pub mod graph;
pub mod harness;
pub mod presets;
pub mod trajectory;

pub use analysis::{classify_trajectory, ClassificationCriteria, Verdict, VerdictKind};
pub use config::{ConfigError, ConfigFile, InitialState};
pub use dynamics::{step, DynamicsParams, Model, StateVector};
pub use env::{check_assumptions, Assumption, AttentionSchedule, GraphSchedule};
pub use graph::{PositiveClusterPartition, Sign, SignedArc, SignedDigraph};
pub use harness::{run_experiment, run_trial, ExperimentConfig, ExperimentSummary};
pub use presets::{preset, preset_config, PresetName};
pub use trajectory::Trajectory;
