//! Dead-man's switch: a heartbeat-driven state machine that fires a
//! predetermined action after `grace_missed` consecutive silent intervals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmsAction {
    PublishShards,
    ExecuteBurn,
    DestroyShards,
}

impl FromStr for DmsAction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        match norm.as_str() {
            "publishshards" | "publish" => Ok(DmsAction::PublishShards),
            "executeburn" | "burn" => Ok(DmsAction::ExecuteBurn),
            "destroyshards" | "destroy" => Ok(DmsAction::DestroyShards),
            _ => Err(Error::Unknown { kind: "switch action", name: s.to_string() }),
        }
    }
}

impl fmt::Display for DmsAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DmsAction::PublishShards => "publish-shards",
            DmsAction::ExecuteBurn => "execute-burn",
            DmsAction::DestroyShards => "destroy-shards",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmsConfig {
    /// Epochs between expected heartbeats.
    pub heartbeat_interval: u64,
    pub grace_missed: u32,
    pub action: DmsAction,
}

impl DmsConfig {
    pub fn new(heartbeat_interval: u64, grace_missed: u32, action: DmsAction) -> Result<Self> {
        let c = DmsConfig { heartbeat_interval, grace_missed, action };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.heartbeat_interval == 0 {
            return Err(Error::InvalidParameter("heartbeat interval must be positive".into()));
        }
        if self.grace_missed == 0 {
            return Err(Error::InvalidParameter("grace_missed must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmsState {
    Armed,
    Grace {
        missed: u32,
    },
    /// The configured action has fired.
    Triggered,
    Unrecoverable,
}

impl fmt::Display for DmsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DmsState::Armed => f.write_str("Armed"),
            DmsState::Grace { missed } => write!(f, "Grace({missed})"),
            DmsState::Triggered => f.write_str("Triggered"),
            DmsState::Unrecoverable => f.write_str("Unrecoverable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DmsEvent {
    Heartbeat,
    IntervalElapsed,
    KeyDestruction,
}

impl fmt::Display for DmsEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DmsEvent::Heartbeat => "Heartbeat",
            DmsEvent::IntervalElapsed => "IntervalElapsed",
            DmsEvent::KeyDestruction => "KeyDestruction",
        })
    }
}

/// One transition.
///
/// Once triggered, the switch cannot be re-armed by a heartbeat. A
/// shard-destroying switch completes to `Unrecoverable` on the next event;
/// other actions stay `Triggered` until keys are destroyed. `Unrecoverable`
/// accepts no events.
pub fn dms_step(state: DmsState, config: &DmsConfig, event: DmsEvent) -> Result<DmsState> {
    use DmsState::*;
    let next = match (state, event) {
        (Unrecoverable, _) => {
            return Err(Error::TerminalState { state: state.to_string(), event: event.to_string() });
        }
        (_, DmsEvent::KeyDestruction) => Unrecoverable,
        (Triggered, _) if config.action == DmsAction::DestroyShards => Unrecoverable,
        (Triggered, _) => Triggered,
        (Armed | Grace { .. }, DmsEvent::Heartbeat) => Armed,
        (Armed, DmsEvent::IntervalElapsed) => escalate(0, config),
        (Grace { missed }, DmsEvent::IntervalElapsed) => escalate(missed, config),
    };
    Ok(next)
}

fn escalate(missed: u32, config: &DmsConfig) -> DmsState {
    let missed = missed + 1;
    if missed >= config.grace_missed {
        DmsState::Triggered
    } else {
        DmsState::Grace { missed }
    }
}

/// Owning wrapper that advances a switch one event at a time.
#[derive(Debug, Clone)]
pub struct DeadMansSwitch {
    config: DmsConfig,
    state: DmsState,
}

impl DeadMansSwitch {
    pub fn arm(config: DmsConfig) -> Result<Self> {
        config.validate()?;
        Ok(DeadMansSwitch { config, state: DmsState::Armed })
    }

    pub fn state(&self) -> DmsState {
        self.state
    }

    pub fn config(&self) -> &DmsConfig {
        &self.config
    }

    pub fn step(&mut self, event: DmsEvent) -> Result<DmsState> {
        self.state = dms_step(self.state, &self.config, event)?;
        Ok(self.state)
    }
}
