//! Deterministic simulator and analysis toolkit for interdomain routing
//! where every node ranks next hops and may filter paths through given nodes.

pub mod analysis;
pub mod cli;
pub mod dot;
pub mod engine;
pub mod gadgets;
pub mod generate;
pub mod model;
pub mod schedulers;
