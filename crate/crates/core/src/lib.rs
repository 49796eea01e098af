//! Scenario arithmetic for the disposition of a large dormant bitcoin position.
//!
//! The crate covers two tracks. The market track sizes the mechanical price
//! impact of a patient liquidation (constant-elasticity permanent impact plus
//! an execution-friction band), builds the participation-constrained selling
//! programs behind it, and evaluates discrete optimal-execution frontiers. The
//! custody track encodes which terminal dispositions are consistent with which
//! holder preferences, and simulates the mechanisms that implement them:
//! threshold secret sharding, timelocks and a dead-man's switch.
//!
//! Everything is deterministic. Randomness enters only through explicit seeds.

pub mod config;
pub mod decision_space;
pub mod error;
pub mod exec_frontier;
pub mod impact_model;
pub mod liquidation_schedule;
pub mod mechanism_sim;
pub mod scenario_engine;
pub mod supply_ledger;
pub mod units;

pub use error::{Error, Result};
pub use units::{round_pct, Btc};
