//! Constant-pace selling programs and their timelocked tranche form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism_sim::timelock::TimelockCondition;
use crate::units::Btc;

/// Reference non-wash spot volume, USD per day. Midpoint of 10-20 billion.
pub const DEFAULT_REFERENCE_DAILY_VOLUME: f64 = 15e9;
/// The market trades every day of the year.
pub const DEFAULT_TRADING_DAYS_PER_YEAR: u32 = 365;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub position: Btc,
    /// Years, at least one.
    pub horizon: f64,
    pub trading_days_per_year: u32,
    /// USD per day.
    pub reference_daily_volume: f64,
    /// USD per BTC.
    pub price: f64,
}

impl ScheduleParams {
    /// Parameters with the default calendar, reference volume and an
    /// 80,000 USD price.
    pub fn new(position: Btc, horizon: f64) -> Self {
        ScheduleParams {
            position,
            horizon,
            trading_days_per_year: DEFAULT_TRADING_DAYS_PER_YEAR,
            reference_daily_volume: DEFAULT_REFERENCE_DAILY_VOLUME,
            price: crate::supply_ledger::DEFAULT_REFERENCE_PRICE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon >= 1.0) {
            return Err(Error::out_of_range("horizon (years)", self.horizon));
        }
        if self.trading_days_per_year == 0 {
            return Err(Error::InvalidParameter("trading days per year must be positive".into()));
        }
        if !(self.reference_daily_volume.is_finite() && self.reference_daily_volume > 0.0) {
            return Err(Error::out_of_range("reference daily volume", self.reference_daily_volume));
        }
        if !(self.price.is_finite() && self.price > 0.0) {
            return Err(Error::out_of_range("price", self.price));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub position: Btc,
    pub horizon: f64,
    pub trading_days_per_year: u32,
    pub price: f64,
    pub reference_daily_volume: f64,
    pub annual_btc: f64,
    pub daily_btc: f64,
    pub daily_usd: f64,
    pub participation: f64,
}

impl Schedule {
    /// `annual_btc * horizon` rounded back to satoshis.
    pub fn reconstructed_position(&self) -> Btc {
        Btc::from_sats((self.annual_btc * self.horizon * Btc::SATS_PER_BTC as f64).round() as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tranche {
    pub unlock: TimelockCondition,
    pub amount: Btc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrancheProgram {
    tranches: Vec<Tranche>,
}

impl TrancheProgram {
    /// Checks that unlock conditions are of one kind and strictly increasing.
    pub fn new(tranches: Vec<Tranche>) -> Result<Self> {
        if tranches.is_empty() {
            return Err(Error::InvalidParameter("tranche program has no tranches".into()));
        }
        for pair in tranches.windows(2) {
            let ordered = match (pair[0].unlock, pair[1].unlock) {
                (TimelockCondition::Absolute(a), TimelockCondition::Absolute(b)) => a < b,
                (TimelockCondition::Relative(a), TimelockCondition::Relative(b)) => a < b,
                _ => false,
            };
            if !ordered {
                return Err(Error::InvalidParameter(
                    "tranche unlock conditions must be strictly increasing and of one kind".into(),
                ));
            }
        }
        Ok(TrancheProgram { tranches })
    }

    pub fn tranches(&self) -> &[Tranche] {
        &self.tranches
    }

    pub fn total(&self) -> Btc {
        self.tranches.iter().map(|t| t.amount).sum()
    }

    pub fn len(&self) -> usize {
        self.tranches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tranches.is_empty()
    }
}

/// Uniform pace: the position spread evenly over the horizon, every day.
pub fn build_uniform_schedule(params: &ScheduleParams) -> Result<Schedule> {
    params.validate()?;
    let annual_btc = params.position.as_btc() / params.horizon;
    let daily_btc = annual_btc / params.trading_days_per_year as f64;
    let daily_usd = daily_btc * params.price;
    Ok(Schedule {
        position: params.position,
        horizon: params.horizon,
        trading_days_per_year: params.trading_days_per_year,
        price: params.price,
        reference_daily_volume: params.reference_daily_volume,
        annual_btc,
        daily_btc,
        daily_usd,
        participation: daily_usd / params.reference_daily_volume,
    })
}

/// Participation at the (low, high) ends of a daily volume range, returned
/// as (at_low_volume, at_high_volume).
pub fn participation_check(schedule: &Schedule, volume_range: (f64, f64)) -> Result<(f64, f64)> {
    let (low, high) = volume_range;
    if !(low.is_finite() && high.is_finite() && low > 0.0 && low <= high) {
        return Err(Error::InvalidParameter(format!("volume range ({low}, {high})")));
    }
    Ok((schedule.daily_usd / low, schedule.daily_usd / high))
}

/// Splits a schedule into evenly sized tranches, `granularity` per year,
/// each locked to an absolute day epoch starting at `start`.
///
/// The satoshi remainder goes to the last tranche.
pub fn to_tranche_program(schedule: &Schedule, granularity: u32, start: u64) -> Result<TrancheProgram> {
    let days = schedule.trading_days_per_year;
    if granularity == 0 || granularity > days {
        return Err(Error::InvalidParameter(format!(
            "granularity must be between 1 and {days} tranches per year, got {granularity}"
        )));
    }
    let count = (schedule.horizon * granularity as f64).round().max(1.0) as u64;
    let total = schedule.position.sats();
    let each = total / count;
    let tranches = (0..count)
        .map(|i| {
            let offset = i * days as u64 / granularity as u64;
            let amount = if i + 1 == count { total - each * (count - 1) } else { each };
            Tranche { unlock: TimelockCondition::Absolute(start + offset), amount: Btc::from_sats(amount) }
        })
        .collect();
    TrancheProgram::new(tranches)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_schedule(years: f64) -> Schedule {
        build_uniform_schedule(&ScheduleParams::new(Btc::whole(1_148_000), years)).unwrap()
    }

    #[test]
    fn ten_year_pace() {
        let s = scenario_schedule(10.0);
        assert_eq!(s.annual_btc, 114_800.0);
        assert_eq!((s.daily_btc * 10.0).round() / 10.0, 314.5);
        assert!((s.daily_usd - 25.16e6).abs() < 0.01e6);
        assert_eq!((s.participation * 1e4).round() / 100.0, 0.17);
    }

    #[test]
    fn twelve_and_five_year_pace() {
        let s = scenario_schedule(12.0);
        assert_eq!(s.annual_btc.round(), 95_667.0);
        assert_eq!((s.participation * 1e4).round() / 100.0, 0.14);
        let s = scenario_schedule(5.0);
        assert_eq!(s.annual_btc, 229_600.0);
        assert_eq!((s.participation * 1e4).round() / 100.0, 0.34);
    }

    #[test]
    fn rejects_short_horizon() {
        let mut p = ScheduleParams::new(Btc::whole(1), 0.0);
        assert!(build_uniform_schedule(&p).is_err());
        p.horizon = -3.0;
        assert!(build_uniform_schedule(&p).is_err());
    }

    #[test]
    fn participation_range() {
        let mut s = scenario_schedule(10.0);
        s.daily_usd = 25e6;
        let (hi, lo) = participation_check(&s, (10e9, 20e9)).unwrap();
        assert!((hi - 0.0025).abs() < 1e-15);
        assert!((lo - 0.00125).abs() < 1e-15);

        s.daily_usd = 0.0;
        assert_eq!(participation_check(&s, (10e9, 20e9)).unwrap(), (0.0, 0.0));
        s.daily_usd = 10e9;
        assert_eq!(participation_check(&s, (10e9, 20e9)).unwrap().0, 1.0);
        assert!(participation_check(&s, (20e9, 10e9)).is_err());
        assert!(participation_check(&s, (0.0, 10e9)).is_err());
    }

    #[test]
    fn annual_tranches() {
        let prog = to_tranche_program(&scenario_schedule(10.0), 1, 0).unwrap();
        assert_eq!(prog.len(), 10);
        assert!(prog.tranches().iter().all(|t| t.amount == Btc::whole(114_800)));
        assert_eq!(prog.tranches()[9].unlock, TimelockCondition::Absolute(9 * 365));
    }

    #[test]
    fn single_tranche_unlocks_at_start() {
        let s = build_uniform_schedule(&ScheduleParams::new(Btc::whole(50), 1.0)).unwrap();
        let prog = to_tranche_program(&s, 1, 700).unwrap();
        assert_eq!(prog.tranches(), &[Tranche { unlock: TimelockCondition::Absolute(700), amount: Btc::whole(50) }]);
    }

    #[test]
    fn remainder_goes_to_last() {
        let s = build_uniform_schedule(&ScheduleParams::new(Btc::whole(1), 1.0)).unwrap();
        let prog = to_tranche_program(&s, 3, 0).unwrap();
        let amounts: Vec<u64> = prog.tranches().iter().map(|t| t.amount.sats()).collect();
        assert_eq!(amounts, vec![33_333_333, 33_333_333, 33_333_334]);
        assert_eq!(prog.total(), Btc::whole(1));
    }

    #[test]
    fn rejects_bad_granularity() {
        let s = scenario_schedule(10.0);
        assert!(to_tranche_program(&s, 0, 0).is_err());
        assert!(to_tranche_program(&s, 366, 0).is_err());
    }

    #[test]
    fn program_rejects_unordered_unlocks() {
        let t = |e| Tranche { unlock: TimelockCondition::Absolute(e), amount: Btc::whole(1) };
        assert!(TrancheProgram::new(vec![t(5), t(5)]).is_err());
        assert!(TrancheProgram::new(vec![t(5), t(3)]).is_err());
        assert!(TrancheProgram::new(vec![]).is_err());
    }
}
