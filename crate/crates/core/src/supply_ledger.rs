//! Monetary-base arithmetic: effective float, position shares, burn accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Btc;

/// Default reference parameters: 20.01M mined, 3.7M lost, 1.148M position,
/// 80,000 USD/BTC.
pub const DEFAULT_TOTAL_MINED: Btc = Btc::whole(20_010_000);
pub const DEFAULT_LOST_ESTIMATE: Btc = Btc::whole(3_700_000);
pub const DEFAULT_POSITION: Btc = Btc::whole(1_148_000);
pub const DEFAULT_REFERENCE_PRICE: f64 = 80_000.0;

/// State of the monetary base around one large position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLedger", deny_unknown_fields)]
pub struct SupplyLedger {
    total_mined: Btc,
    lost_estimate: Btc,
    position: Btc,
    /// USD per BTC.
    reference_price: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLedger {
    total_mined: Btc,
    lost_estimate: Btc,
    position: Btc,
    reference_price: f64,
}

impl TryFrom<RawLedger> for SupplyLedger {
    type Error = Error;
    fn try_from(r: RawLedger) -> Result<Self> {
        SupplyLedger::new(r.total_mined, r.lost_estimate, r.position, r.reference_price)
    }
}

impl Default for SupplyLedger {
    fn default() -> Self {
        SupplyLedger {
            total_mined: DEFAULT_TOTAL_MINED,
            lost_estimate: DEFAULT_LOST_ESTIMATE,
            position: DEFAULT_POSITION,
            reference_price: DEFAULT_REFERENCE_PRICE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareBasis {
    /// Share of everything ever mined.
    Nominal,
    /// Share of mined supply net of coins presumed lost.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BurnOutcome {
    pub burned: Btc,
    pub residual: Btc,
    /// USD at the ledger's reference price.
    pub residual_value: f64,
    pub ledger_after: SupplyLedger,
}

impl SupplyLedger {
    pub fn new(total_mined: Btc, lost_estimate: Btc, position: Btc, reference_price: f64) -> Result<Self> {
        if lost_estimate >= total_mined {
            return Err(Error::InvalidLedger(format!(
                "lost estimate {lost_estimate} must be below total mined {total_mined}"
            )));
        }
        if position > total_mined - lost_estimate {
            return Err(Error::InvalidLedger(format!(
                "position {position} exceeds effective float {}",
                total_mined - lost_estimate
            )));
        }
        if !(reference_price.is_finite() && reference_price > 0.0) {
            return Err(Error::InvalidLedger(format!("reference price must be positive, got {reference_price}")));
        }
        Ok(SupplyLedger { total_mined, lost_estimate, position, reference_price })
    }

    pub fn total_mined(&self) -> Btc {
        self.total_mined
    }

    pub fn lost_estimate(&self) -> Btc {
        self.lost_estimate
    }

    pub fn position(&self) -> Btc {
        self.position
    }

    pub fn reference_price(&self) -> f64 {
        self.reference_price
    }

    pub fn with_position(self, position: Btc) -> Result<Self> {
        SupplyLedger::new(self.total_mined, self.lost_estimate, position, self.reference_price)
    }

    pub fn with_lost_estimate(self, lost_estimate: Btc) -> Result<Self> {
        SupplyLedger::new(self.total_mined, lost_estimate, self.position, self.reference_price)
    }

    pub fn with_reference_price(self, reference_price: f64) -> Result<Self> {
        SupplyLedger::new(self.total_mined, self.lost_estimate, self.position, reference_price)
    }
}

/// Mined supply net of the lost-coins estimate.
pub fn effective_float(ledger: &SupplyLedger) -> Btc {
    ledger.total_mined - ledger.lost_estimate
}

/// Position as a fraction of nominal or effective supply.
pub fn position_share(ledger: &SupplyLedger, basis: ShareBasis) -> f64 {
    let denom = match basis {
        ShareBasis::Nominal => ledger.total_mined,
        ShareBasis::Effective => effective_float(ledger),
    };
    ledger.position.sats() as f64 / denom.sats() as f64
}

/// Position marked at the reference price, in USD.
pub fn gross_value(ledger: &SupplyLedger) -> f64 {
    ledger.position.as_btc() * ledger.reference_price
}

/// Burns all but `retention_fraction` of the position.
///
/// The residual is rounded to the nearest satoshi and the burned amount is
/// the exact complement, so `burned + residual == position` always holds.
/// Burned coins leave the mined total; the lost-coins estimate is untouched.
pub fn apply_burn(ledger: &SupplyLedger, retention_fraction: f64) -> Result<BurnOutcome> {
    if !(0.0..=1.0).contains(&retention_fraction) {
        return Err(Error::out_of_range("retention fraction", retention_fraction));
    }
    let position = ledger.position.sats();
    let residual = Btc::from_sats(((position as f64) * retention_fraction).round().min(position as f64) as u64);
    let burned = ledger.position - residual;
    let ledger_after = SupplyLedger {
        total_mined: ledger.total_mined - burned,
        lost_estimate: ledger.lost_estimate,
        position: residual,
        reference_price: ledger.reference_price,
    };
    Ok(BurnOutcome { burned, residual, residual_value: residual.as_btc() * ledger.reference_price, ledger_after })
}
