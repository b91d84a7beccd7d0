//! Reversible pebble game engine.
//!
//! The pebble game models how a reversible computation trades memory for
//! recomputation when simulating an irreversible one: a pebble on node
//! `i` stands for a stored checkpoint after `i` computation segments,
//! placing and removing pebbles follow a locality rule, and deleting a
//! pebble out of turn costs an irreversible erasure.
//!
//! The crate provides:
//!
//! - [`game`]: move legality, schedule replay, and canonical schedule
//!   files;
//! - [`strategies`]: deterministic generators for the full-history,
//!   recursive-checkpointing, erasure-assisted, and k-ary plays, plus the
//!   space-for-erasures trade-off table;
//! - [`solver`]: exact winnability of small games by exhaustive search,
//!   with optional witness schedules;
//! - [`revsim`]: execution of a schedule as a checkpointed simulation of
//!   a deterministic machine, measuring space, recomputation, and erased
//!   bits.

pub mod game;
pub mod revsim;
pub mod solver;
pub mod strategies;

pub use game::{
    Diagnostic, GameParams, GameState, Move, MoveError, Op, ParamError, PlayMetrics, Replay,
    Schedule, ScheduleError, run_schedule,
};
pub use revsim::{
    BuiltinMachine, Checkpoint, SimError, SimulationReport, SteppedMachine, builtin_machine,
    direct_run, execute,
};
pub use solver::{SearchConfig, SolverError, SolverResult, max_winnable, winnable};
pub use strategies::{
    StrategyError, TradeoffPoint, bennett_schedule, erasure_schedule, kary_schedule,
    naive_schedule, tradeoff_csv, tradeoff_table,
};
