//! Activation-order generators.
//!
//! A scheduler is asked for one permutation of the non-sink nodes per round
//! and may look at the whole engine state while doing so. None of them look
//! at packet positions, which is what lets the engine explore adversarial
//! placements against a single control-plane run.

mod coordinate;
mod random;
mod replay;
mod stabilise;

pub use coordinate::{coordinate, coordinate_sequence, CoordinateScheduler, Partition};
pub use random::{random_fair_permutation, RandomScheduler};
pub use replay::{ReplayScheduler, Schedule};
pub use stabilise::{
    bfs_order, find_stable, reverse_bfs_order, FairStabiliseScheduler, RoundRecord, StabiliseState,
};

use thiserror::Error;

use crate::engine::EngineState;
use crate::model::{NodeId, TreeError};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("{scheduler} scheduler requires {required} filters")]
    FilterMismatch {
        scheduler: &'static str,
        required: &'static str,
    },
    #[error("round {round}: no blue node can be activated next (remaining {remaining:?})")]
    Stall { round: u32, remaining: Vec<NodeId> },
    #[error("round {round}: {msg}")]
    Contract { round: u32, msg: String },
    #[error("tree error: {0}")]
    Tree(#[from] TreeError),
    #[error("replay has no permutation for round {0}")]
    ReplayExhausted(u32),
    #[error("schedule line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// What a scheduler wants done in the next round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundPlan {
    pub order: Vec<NodeId>,
    /// Annotations recorded in the trace ahead of the round.
    pub notes: Vec<String>,
}

impl RoundPlan {
    pub fn new(order: Vec<NodeId>) -> Self {
        Self {
            order,
            notes: Vec::new(),
        }
    }
}

pub trait Scheduler {
    fn name(&self) -> &'static str;

    fn plan(&mut self, state: &EngineState) -> Result<RoundPlan, ScheduleError>;

    /// Called once the planned round has run.
    fn observe(&mut self, _state: &EngineState) -> Result<(), ScheduleError> {
        Ok(())
    }
}
