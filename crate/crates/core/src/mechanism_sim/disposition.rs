//! Replays a terminal disposition over the epoch clock.

use serde::{Deserialize, Serialize};

use super::dms::{DeadMansSwitch, DmsAction, DmsConfig, DmsEvent, DmsState};
use super::timelock::{timelock_spendable, TimelockCondition};
use crate::decision_space::{TerminalKind, TerminalState};
use crate::error::{Error, Result};
use crate::liquidation_schedule::TrancheProgram;
use crate::units::Btc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogEvent {
    Armed,
    Heartbeat,
    Missed,
    Triggered,
    ShardsPublished,
    ShardsDestroyed,
    Unrecoverable,
    Burn,
    Release,
    /// Closing entry: signed change to effective float.
    SupplyEffect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub epoch: u64,
    pub event: LogEvent,
    /// BTC; zero for events that move no coins.
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispositionInput<'a> {
    pub terminal: TerminalState,
    pub config: DmsConfig,
    pub tranche_program: Option<&'a TrancheProgram>,
    /// Last epoch simulated, inclusive.
    pub clock_horizon: u64,
    pub position: Btc,
    /// The holder sends heartbeats at every interval up to this epoch.
    pub last_heartbeat: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispositionLog {
    pub entries: Vec<LogEntry>,
    pub final_state: DmsState,
    pub released: Btc,
    pub burned: Btc,
    /// Position made unrecoverable by shard destruction.
    pub destroyed: Btc,
}

impl DispositionLog {
    pub fn count(&self, event: LogEvent) -> usize {
        self.entries.iter().filter(|e| e.event == event).count()
    }

    /// Signed change to effective float, in satoshis.
    pub fn supply_delta_sats(&self) -> i64 {
        self.released.sats() as i64 - self.burned.sats() as i64 - self.destroyed.sats() as i64
    }

    /// One JSON object per line: `{"epoch":..,"event":"..","amount":..}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }
}

struct Recorder {
    entries: Vec<LogEntry>,
}

impl Recorder {
    fn push(&mut self, epoch: u64, event: LogEvent, amount: Btc) {
        self.entries.push(LogEntry { epoch, event, amount: amount.as_btc() });
    }
}

/// Replays the mechanism behind `input.terminal` and returns the ordered
/// event log, closed by a `supply-effect` entry.
///
/// * Dormancy needs a shard-destroying switch: silence past the grace period
///   ends `Unrecoverable` with no coins released.
/// * A silent burn needs a burn switch and burns `position * (1 - retention)`
///   when it fires.
/// * Patient liquidation releases each tranche at the first epoch its
///   timelock allows (confirmation at epoch 0); the switch is not used.
/// * An adversarial switch releases the program (or the whole position) once
///   the switch fires, with relative timelocks counted from the trigger.
pub fn simulate_disposition(input: &DispositionInput<'_>) -> Result<DispositionLog> {
    input.config.validate()?;
    let terminal = TerminalState::new(input.terminal.kind, input.terminal.retention_fraction)?;
    validate_combination(input, terminal.kind)?;

    let mut rec = Recorder { entries: Vec::new() };
    let mut released = Btc::ZERO;
    let mut burned = Btc::ZERO;

    if terminal.kind == TerminalKind::PatientLiquidation {
        let program = input.tranche_program.expect("validated");
        released = release_program(&mut rec, program, 0, input.clock_horizon);
        let final_epoch = rec.entries.last().map_or(0, |e| e.epoch);
        rec.push(final_epoch, LogEvent::SupplyEffect, released);
        return Ok(DispositionLog {
            entries: rec.entries,
            final_state: DmsState::Armed,
            released,
            burned,
            destroyed: Btc::ZERO,
        });
    }

    let mut switch = DeadMansSwitch::arm(input.config)?;
    rec.push(0, LogEvent::Armed, Btc::ZERO);
    let interval = input.config.heartbeat_interval;
    let mut epoch = interval;
    let mut destroyed = Btc::ZERO;

    while epoch <= input.clock_horizon {
        let event = if epoch <= input.last_heartbeat { DmsEvent::Heartbeat } else { DmsEvent::IntervalElapsed };
        let state = switch.step(event)?;
        match state {
            DmsState::Armed => rec.push(epoch, LogEvent::Heartbeat, Btc::ZERO),
            DmsState::Grace { .. } => rec.push(epoch, LogEvent::Missed, Btc::ZERO),
            DmsState::Triggered => {
                rec.push(epoch, LogEvent::Triggered, Btc::ZERO);
                match terminal.kind {
                    TerminalKind::DormancyNonRecovery => {
                        rec.push(epoch, LogEvent::ShardsDestroyed, input.position);
                        destroyed = input.position;
                        switch.step(DmsEvent::IntervalElapsed)?;
                        rec.push(epoch, LogEvent::Unrecoverable, Btc::ZERO);
                    }
                    TerminalKind::SilentBurn => {
                        let kept =
                            Btc::from_sats((input.position.sats() as f64 * terminal.retention_fraction).round() as u64);
                        burned = input.position - kept;
                        rec.push(epoch, LogEvent::Burn, burned);
                    }
                    TerminalKind::AdversarialSwitch => {
                        if input.config.action == DmsAction::PublishShards {
                            rec.push(epoch, LogEvent::ShardsPublished, Btc::ZERO);
                        }
                        released = match input.tranche_program {
                            Some(p) => release_program(&mut rec, p, epoch, input.clock_horizon),
                            None => {
                                rec.push(epoch, LogEvent::Release, input.position);
                                input.position
                            }
                        };
                    }
                    TerminalKind::PatientLiquidation => unreachable!(),
                }
                break;
            }
            DmsState::Unrecoverable => unreachable!("only reached through key destruction"),
        }
        epoch += interval;
    }

    let mut log = DispositionLog { entries: rec.entries, final_state: switch.state(), released, burned, destroyed };
    log.entries.push(LogEntry {
        epoch: log.entries.last().map_or(0, |e| e.epoch),
        event: LogEvent::SupplyEffect,
        amount: log.supply_delta_sats() as f64 / Btc::SATS_PER_BTC as f64,
    });
    Ok(log)
}

fn validate_combination(input: &DispositionInput<'_>, kind: TerminalKind) -> Result<()> {
    let action = input.config.action;
    let err = |msg: &str| Err(Error::Inconsistent(msg.to_string()));
    match kind {
        TerminalKind::DormancyNonRecovery if action != DmsAction::DestroyShards => {
            err("dormancy with non-recovery needs a destroy-shards switch")
        }
        TerminalKind::SilentBurn if action != DmsAction::ExecuteBurn => {
            err("a silent burn needs an execute-burn switch")
        }
        TerminalKind::AdversarialSwitch if action == DmsAction::DestroyShards => {
            err("an adversarial switch cannot destroy its own shards")
        }
        TerminalKind::PatientLiquidation if input.tranche_program.is_none() => {
            err("patient liquidation needs a tranche program")
        }
        TerminalKind::DormancyNonRecovery | TerminalKind::SilentBurn if input.tranche_program.is_some() => {
            err("tranche programs only apply to liquidating dispositions")
        }
        _ => {
            if let Some(p) = input.tranche_program {
                if p.total() != input.position {
                    return err("tranche program total differs from the position");
                }
            }
            Ok(())
        }
    }
}

// Releases each tranche at the first epoch its lock allows, counting
// relative locks from `confirmed_at`. Returns the total released.
fn release_program(rec: &mut Recorder, program: &TrancheProgram, confirmed_at: u64, horizon: u64) -> Btc {
    let mut released = Btc::ZERO;
    for tranche in program.tranches() {
        let epoch = match tranche.unlock {
            TimelockCondition::Absolute(e) => e.max(confirmed_at),
            TimelockCondition::Relative(_) => tranche.unlock.earliest_epoch(confirmed_at),
        };
        if epoch > horizon {
            break;
        }
        debug_assert!(timelock_spendable(tranche.unlock, epoch, confirmed_at));
        if !timelock_spendable(tranche.unlock, epoch, confirmed_at) {
            break;
        }
        rec.push(epoch, LogEvent::Release, tranche.amount);
        released = released + tranche.amount;
    }
    released
}
