//! Static stability checkers and exhaustive oracles for small instances.

mod enumerate;
mod search;
mod stable;

pub use enumerate::{configuration_count, enumerate_equilibria, max_stable_tree, DEFAULT_BUDGET};
pub use search::{
    max_stable_tree_search, search_stable_trees, Notion, SearchOptions, SearchStats, Visit,
};
pub use stable::{has_strong_stability, is_skeleton, is_stable_tree, StableTreeReport, Violation};

use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("arc set is not an in-arborescence rooted at the sink")]
    NotArborescence,
    #[error("arc {0}->{1} is not an arc of the network")]
    ForeignArc(NodeId, NodeId),
    #[error("{needed} configurations exceed the budget of {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("search supports at most 64 nodes, got {0}")]
    TooLarge(usize),
}
