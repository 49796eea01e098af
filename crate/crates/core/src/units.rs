use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A bitcoin amount held as whole satoshis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Btc(u64);

impl Btc {
    pub const SATS_PER_BTC: u64 = 100_000_000;
    pub const ZERO: Btc = Btc(0);

    pub const fn from_sats(sats: u64) -> Self {
        Btc(sats)
    }

    pub const fn whole(btc: u64) -> Self {
        Btc(btc * Self::SATS_PER_BTC)
    }

    /// Converts a decimal BTC amount, rounding to the nearest satoshi.
    pub fn from_btc(btc: f64) -> Result<Self> {
        let sats = (btc * Self::SATS_PER_BTC as f64).round();
        if !sats.is_finite() || sats < 0.0 || sats > u64::MAX as f64 {
            return Err(Error::out_of_range("btc amount", btc));
        }
        Ok(Btc(sats as u64))
    }

    pub const fn sats(self) -> u64 {
        self.0
    }

    pub fn as_btc(self) -> f64 {
        self.0 as f64 / Self::SATS_PER_BTC as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_sub(self, rhs: Btc) -> Option<Btc> {
        self.0.checked_sub(rhs.0).map(Btc)
    }
}

impl Add for Btc {
    type Output = Btc;
    fn add(self, rhs: Btc) -> Btc {
        Btc(self.0 + rhs.0)
    }
}

impl Sub for Btc {
    type Output = Btc;
    fn sub(self, rhs: Btc) -> Btc {
        Btc(self.0 - rhs.0)
    }
}

impl std::iter::Sum for Btc {
    fn sum<I: Iterator<Item = Btc>>(iter: I) -> Btc {
        Btc(iter.map(|b| b.0).sum())
    }
}

impl fmt::Display for Btc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / Self::SATS_PER_BTC;
        let frac = self.0 % Self::SATS_PER_BTC;
        if frac == 0 {
            write!(f, "{whole}")
        } else {
            let s = format!("{whole}.{frac:08}");
            f.write_str(s.trim_end_matches('0'))
        }
    }
}

// Serialized as decimal BTC so configs and JSON stay human-readable.
impl Serialize for Btc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_btc())
    }
}

impl<'de> Deserialize<'de> for Btc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Btc::from_btc(v).map_err(serde::de::Error::custom)
    }
}

/// Rounds a fraction to a percentage with one decimal, half away from zero.
pub fn round_pct(fraction: f64) -> f64 {
    (fraction * 1000.0).round() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_trims_fraction() {
        assert_eq!(Btc::whole(11_480).to_string(), "11480");
        assert_eq!(Btc::from_sats(33_333_334).to_string(), "0.33333334");
        assert_eq!(Btc::from_sats(150_000_000).to_string(), "1.5");
    }

    #[test]
    fn from_btc_rejects_negative() {
        assert!(Btc::from_btc(-1.0).is_err());
        assert!(Btc::from_btc(f64::NAN).is_err());
        assert_eq!(Btc::from_btc(1.148e6).unwrap(), Btc::whole(1_148_000));
    }

    #[test]
    fn pct_rounds_half_away_from_zero() {
        assert_eq!(round_pct(-0.0441), -4.4);
        assert_eq!(round_pct(-0.09213), -9.2);
        assert_eq!(round_pct(0.00125), 0.1);
        assert_eq!(round_pct(-0.00125), -0.1);
        assert_eq!(round_pct(0.0015), 0.2);
    }
}
