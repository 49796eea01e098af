//! Desk-scale simulations of custody mechanisms: threshold sharding,
//! timelocks, a dead-man's switch, and full disposition replays over an
//! integer epoch clock. No real keys or transactions are involved.

pub mod disposition;
pub mod dms;
pub mod shamir;
pub mod timelock;

pub use disposition::{simulate_disposition, DispositionInput, DispositionLog, LogEntry, LogEvent};
pub use dms::{dms_step, DeadMansSwitch, DmsAction, DmsConfig, DmsEvent, DmsState};
pub use shamir::{reconstruct, split, split_seeded, Secret, Share};
pub use timelock::{timelock_spendable, TimelockCondition};
