use serde::{Deserialize, Serialize};

/// Spend condition on a simulated epoch clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimelockCondition {
    /// Spendable from this epoch on (CLTV-style).
    Absolute(u64),
    /// Spendable once this many epochs have passed since confirmation
    /// (CSV-style).
    Relative(u64),
}

impl TimelockCondition {
    /// First epoch at which the condition holds.
    pub fn earliest_epoch(&self, confirmed_at: u64) -> u64 {
        match *self {
            TimelockCondition::Absolute(e) => e,
            TimelockCondition::Relative(d) => confirmed_at.saturating_add(d),
        }
    }
}

/// Both bounds are inclusive: an absolute lock at 100 is spendable at 100.
pub fn timelock_spendable(condition: TimelockCondition, now: u64, confirmed_at: u64) -> bool {
    match condition {
        TimelockCondition::Absolute(e) => now >= e,
        TimelockCondition::Relative(d) => now >= confirmed_at && now - confirmed_at >= d,
    }
}
