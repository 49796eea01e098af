//! Constant-elasticity permanent impact, execution friction bands, and the
//! transient overshoot overlay.
//!
//! All impacts are signed fractions relative to the counterfactual price
//! path (-0.092 means 9.2 percent below). Friction bands are in percentage
//! points and are subtracted additively from the permanent component.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower and upper edge of the elasticity range used for sensitivity work.
pub const ELASTICITY_RANGE: (f64, f64) = (0.3, 1.5);

pub const DEFAULT_OVERSHOOT_MAGNITUDE: f64 = 0.125;
pub const DEFAULT_OVERSHOOT_HALF_LIFE: f64 = 7.0;

/// Highest daily participation rate the friction schedule accepts.
pub const MAX_PARTICIPATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ElasticityModel {
    epsilon: f64,
}

impl ElasticityModel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::out_of_range("elasticity", epsilon));
        }
        Ok(ElasticityModel { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn in_sensitivity_range(&self) -> bool {
        (ELASTICITY_RANGE.0..=ELASTICITY_RANGE.1).contains(&self.epsilon)
    }
}

impl TryFrom<f64> for ElasticityModel {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        ElasticityModel::new(v)
    }
}

impl From<ElasticityModel> for f64 {
    fn from(m: ElasticityModel) -> f64 {
        m.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionQuality {
    DisciplinedOtc,
    Mixed,
    PublicVenue,
}

impl ExecutionQuality {
    pub const ALL: [ExecutionQuality; 3] =
        [ExecutionQuality::DisciplinedOtc, ExecutionQuality::Mixed, ExecutionQuality::PublicVenue];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExecutionQuality::DisciplinedOtc => "disciplined-otc",
            ExecutionQuality::Mixed => "mixed",
            ExecutionQuality::PublicVenue => "public-venue",
        }
    }
}

impl fmt::Display for ExecutionQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExecutionQuality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
        match norm.as_str() {
            "disciplinedotc" | "otc" | "disciplined" => Ok(ExecutionQuality::DisciplinedOtc),
            "mixed" => Ok(ExecutionQuality::Mixed),
            "publicvenue" | "public" => Ok(ExecutionQuality::PublicVenue),
            _ => Err(Error::Unknown { kind: "execution quality", name: s.to_string() }),
        }
    }
}

/// Execution friction in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionBand {
    pub low: f64,
    pub high: f64,
    /// Set when the band comes from outside the calibrated schedule.
    #[serde(default)]
    pub extrapolated: bool,
}

impl FrictionBand {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) {
            return Err(Error::InvalidParameter(format!("friction band ({low}, {high})")));
        }
        Ok(FrictionBand { low, high, extrapolated: false })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    const fn fixed(low: f64, high: f64, extrapolated: bool) -> Self {
        FrictionBand { low, high, extrapolated }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactResult {
    pub permanent: f64,
    pub friction: FrictionBand,
    pub total_low: f64,
    pub total_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvershootParams {
    pub magnitude: f64,
    /// Days.
    pub half_life: f64,
}

impl OvershootParams {
    pub fn new(magnitude: f64, half_life: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&magnitude) {
            return Err(Error::out_of_range("overshoot magnitude", magnitude));
        }
        if !(half_life.is_finite() && half_life > 0.0) {
            return Err(Error::out_of_range("overshoot half-life", half_life));
        }
        Ok(OvershootParams { magnitude, half_life })
    }
}

impl Default for OvershootParams {
    fn default() -> Self {
        OvershootParams { magnitude: DEFAULT_OVERSHOOT_MAGNITUDE, half_life: DEFAULT_OVERSHOOT_HALF_LIFE }
    }
}

fn check_shift(supply_shift: f64) -> Result<()> {
    if !(supply_shift.is_finite() && supply_shift >= 0.0) {
        return Err(Error::out_of_range("supply shift", supply_shift));
    }
    Ok(())
}

/// `(1 + shift)^(-1/epsilon) - 1`: the price change when `supply_shift` of
/// the float is returned to a market with constant demand elasticity.
pub fn permanent_impact(supply_shift: f64, model: &ElasticityModel) -> Result<f64> {
    check_shift(supply_shift)?;
    // exp_m1/ln_1p keep precision for small shifts.
    Ok((-supply_shift.ln_1p() / model.epsilon).exp_m1())
}

/// First-order approximation `-shift/epsilon`.
pub fn small_shift_approx(supply_shift: f64, model: &ElasticityModel) -> Result<f64> {
    check_shift(supply_shift)?;
    Ok(-supply_shift / model.epsilon)
}

/// Friction band for a program of the given quality and daily participation.
///
/// Disciplined OTC execution is stepped by participation: up to 0.15 percent
/// costs 1-2pp, up to 0.25 percent 2-3pp, and above that it degrades to the
/// mixed band. The public-venue band (5-8pp) is extrapolated and flagged.
pub fn friction_band(quality: ExecutionQuality, participation: f64) -> Result<FrictionBand> {
    if !(0.0..=MAX_PARTICIPATION).contains(&participation) {
        return Err(Error::out_of_range("participation", participation));
    }
    Ok(match quality {
        ExecutionQuality::DisciplinedOtc if participation <= 0.0015 => FrictionBand::fixed(1.0, 2.0, false),
        ExecutionQuality::DisciplinedOtc if participation <= 0.0025 => FrictionBand::fixed(2.0, 3.0, false),
        ExecutionQuality::DisciplinedOtc => FrictionBand::fixed(3.0, 5.0, true),
        ExecutionQuality::Mixed => FrictionBand::fixed(3.0, 5.0, false),
        ExecutionQuality::PublicVenue => FrictionBand::fixed(5.0, 8.0, true),
    })
}

/// Adds the friction band to the permanent impact, in percentage points.
pub fn combine(permanent: f64, friction: FrictionBand) -> ImpactResult {
    ImpactResult {
        permanent,
        friction,
        total_low: permanent - friction.high / 100.0,
        total_high: permanent - friction.low / 100.0,
    }
}

/// Relative terminal price impact under an arbitrary demand-growth path.
///
/// Demand scales by `growth_path[t]` each period and clears
/// `supply = demand_scale * price^(-epsilon)`. The disposition path adds
/// `supply_shift` of the float linearly over `periods`; the counterfactual
/// holds supply fixed. Returns the terminal price ratio minus one, which
/// the log-linear form makes independent of the growth path.
pub fn relative_impact_with_growth(
    supply_shift: f64,
    model: &ElasticityModel,
    growth_path: &[f64],
    periods: usize,
) -> Result<f64> {
    check_shift(supply_shift)?;
    if periods > growth_path.len() {
        return Err(Error::InvalidParameter(format!(
            "growth path has {} multipliers, need {periods}",
            growth_path.len()
        )));
    }
    if let Some(bad) = growth_path.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::out_of_range("demand multiplier", *bad));
    }

    let eps = model.epsilon;
    let mut log_demand = 0.0;
    let mut log_price_cf = 0.0;
    let mut log_price_disp = 0.0;
    for (t, mult) in growth_path.iter().take(periods).enumerate() {
        log_demand += mult.ln();
        let released = supply_shift * (t + 1) as f64 / periods as f64;
        log_price_cf = log_demand / eps;
        log_price_disp = (log_demand - released.ln_1p()) / eps;
    }
    if periods == 0 {
        log_price_disp = -supply_shift.ln_1p() / eps;
    }
    Ok((log_price_disp - log_price_cf).exp_m1())
}

/// Price multiplier path `(day, multiplier)` for days `0..=horizon`.
///
/// `multiplier(t) = (1 + total) * (1 - magnitude * 2^(-t / half_life))`.
pub fn overshoot_path(mechanical_total: f64, params: &OvershootParams, horizon: u32) -> Result<Vec<(u32, f64)>> {
    let params = OvershootParams::new(params.magnitude, params.half_life)?;
    if horizon < 1 {
        return Err(Error::InvalidParameter("overshoot horizon must be at least one day".into()));
    }
    if !(mechanical_total.is_finite() && mechanical_total > -1.0) {
        return Err(Error::out_of_range("mechanical total", mechanical_total));
    }
    let base = 1.0 + mechanical_total;
    Ok((0..=horizon)
        .map(|day| {
            let transient = params.magnitude * (-(day as f64) / params.half_life).exp2();
            (day, base * (1.0 - transient))
        })
        .collect())
}
