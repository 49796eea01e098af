//! Named calibrations, empirical anchors and sensitivity sweeps.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact_model::{
    combine, friction_band, permanent_impact, ElasticityModel, ExecutionQuality, FrictionBand, OvershootParams,
};
use crate::liquidation_schedule::{build_uniform_schedule, Schedule, ScheduleParams, DEFAULT_TRADING_DAYS_PER_YEAR};
use crate::supply_ledger::{position_share, ShareBasis, SupplyLedger};
use crate::units::Btc;

/// Total bands whose upper edge is at or above this sit near the
/// institutional-auction anchor.
pub const NEAR_SILK_ROAD_UPPER: f64 = -0.08;
/// Total bands whose lower edge is at or below this sit near the
/// public-venue anchor.
pub const NEAR_GERMAN_LOWER: f64 = -0.15;

/// Accepted range for the public-venue to disciplined impact ratio.
pub const FRICTION_GAP_RANGE: (f64, f64) = (3.0, 5.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub elasticity: ElasticityModel,
    pub quality: ExecutionQuality,
    /// Years.
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overshoot: Option<OvershootParams>,
}

impl Scenario {
    pub fn new(name: &str, epsilon: f64, quality: ExecutionQuality, horizon: f64) -> Result<Self> {
        let s = Scenario {
            name: name.to_string(),
            elasticity: ElasticityModel::new(epsilon)?,
            quality,
            horizon,
            overshoot: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::InvalidParameter("scenario name is empty".into()));
        }
        if !(self.horizon.is_finite() && self.horizon >= 1.0) {
            return Err(Error::out_of_range("horizon (years)", self.horizon));
        }
        Ok(())
    }
}

/// Conservative, base and aggressive calibrations, named `A`, `B`, `C`.
pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        Scenario::new("A", 1.5, ExecutionQuality::DisciplinedOtc, 12.0).expect("valid"),
        Scenario::new("B", 0.7, ExecutionQuality::DisciplinedOtc, 10.0).expect("valid"),
        Scenario::new("C", 0.3, ExecutionQuality::Mixed, 5.0).expect("valid"),
    ]
}

/// Looks up a built-in scenario by name, case-insensitively.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Unknown { kind: "scenario", name: name.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorEvent {
    pub name: String,
    /// None when the episode was a series of tranches of varying size.
    pub amount: Option<Btc>,
    /// (low, high) signed fractions, when attributable.
    pub observed_impact: Option<(f64, f64)>,
    pub execution_class: ExecutionQuality,
    pub note: String,
}

impl AnchorEvent {
    pub fn midpoint(&self) -> Option<f64> {
        self.observed_impact.map(|(lo, hi)| 0.5 * (lo + hi))
    }
}

/// Historical sales used as context for classification.
pub fn builtin_anchors() -> Vec<AnchorEvent> {
    vec![
        AnchorEvent {
            name: "GermanBKA".into(),
            amount: Some(Btc::whole(50_000)),
            observed_impact: Some((-0.20, -0.15)),
            execution_class: ExecutionQuality::PublicVenue,
            note: "2024 weekly public tranches; decline over the episode".into(),
        },
        AnchorEvent {
            name: "SilkRoadAuctions".into(),
            amount: None,
            observed_impact: Some((-0.05, -0.02)),
            execution_class: ExecutionQuality::DisciplinedOtc,
            note: "per-tranche impact of less publicized auctions to institutional buyers".into(),
        },
        AnchorEvent {
            name: "MtGox".into(),
            amount: Some(Btc::whole(140_000)),
            observed_impact: None,
            execution_class: ExecutionQuality::PublicVenue,
            note: "creditor distribution, partial selling".into(),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnchorClass {
    NearSilkRoad,
    Between,
    NearGerman,
}

impl fmt::Display for AnchorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnchorClass::NearSilkRoad => "NearSilkRoad",
            AnchorClass::Between => "Between",
            AnchorClass::NearGerman => "NearGerman",
        })
    }
}

pub fn classify(total_low: f64, total_high: f64) -> AnchorClass {
    if total_high >= NEAR_SILK_ROAD_UPPER {
        AnchorClass::NearSilkRoad
    } else if total_low <= NEAR_GERMAN_LOWER {
        AnchorClass::NearGerman
    } else {
        AnchorClass::Between
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario_name: String,
    pub epsilon: f64,
    pub quality: ExecutionQuality,
    pub basis: ShareBasis,
    /// Fraction of the float returned to market.
    pub supply_shift: f64,
    pub schedule: Schedule,
    pub permanent: f64,
    pub friction: FrictionBand,
    pub total_low: f64,
    pub total_high: f64,
    pub anchor_class: AnchorClass,
    /// Day-zero multiplier of the overshoot overlay, when configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overshoot_trough: Option<f64>,
}

/// Runs a scenario on the effective-float basis.
pub fn run_scenario(scenario: &Scenario, ledger: &SupplyLedger, volume: f64) -> Result<ScenarioResult> {
    run_scenario_with_basis(scenario, ledger, volume, ShareBasis::Effective)
}

pub fn run_scenario_with_basis(
    scenario: &Scenario,
    ledger: &SupplyLedger,
    volume: f64,
    basis: ShareBasis,
) -> Result<ScenarioResult> {
    scenario.validate()?;
    let supply_shift = position_share(ledger, basis);
    let schedule = build_uniform_schedule(&ScheduleParams {
        position: ledger.position(),
        horizon: scenario.horizon,
        trading_days_per_year: DEFAULT_TRADING_DAYS_PER_YEAR,
        reference_daily_volume: volume,
        price: ledger.reference_price(),
    })?;
    let permanent = permanent_impact(supply_shift, &scenario.elasticity)?;
    let friction = friction_band(scenario.quality, schedule.participation)?;
    let impact = combine(permanent, friction);
    let overshoot_trough = scenario.overshoot.map(|o| (1.0 + impact.total_high) * (1.0 - o.magnitude));
    Ok(ScenarioResult {
        scenario_name: scenario.name.clone(),
        epsilon: scenario.elasticity.epsilon(),
        quality: scenario.quality,
        basis,
        supply_shift,
        schedule,
        permanent,
        friction,
        total_low: impact.total_low,
        total_high: impact.total_high,
        anchor_class: classify(impact.total_low, impact.total_high),
        overshoot_trough,
    })
}

/// Runs several scenarios, rejecting duplicate names.
pub fn run_scenarios(
    scenarios: &[Scenario],
    ledger: &SupplyLedger,
    volume: f64,
    basis: ShareBasis,
) -> Result<Vec<ScenarioResult>> {
    let mut names = HashSet::new();
    for s in scenarios {
        if !names.insert(s.name.as_str()) {
            return Err(Error::InvalidParameter(format!("duplicate scenario name {}", s.name)));
        }
    }
    scenarios.iter().map(|s| run_scenario_with_basis(s, ledger, volume, basis)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub epsilons: Vec<f64>,
    pub qualities: Vec<ExecutionQuality>,
    pub horizons: Vec<f64>,
    /// Permits elasticities outside the sensitivity range.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

impl Default for SweepGrid {
    /// Elasticities across the sensitivity range, the qualities the
    /// built-in scenarios use, and their horizons.
    fn default() -> Self {
        SweepGrid {
            epsilons: vec![0.3, 0.5, 0.7, 1.0, 1.5],
            qualities: vec![ExecutionQuality::DisciplinedOtc, ExecutionQuality::Mixed],
            horizons: vec![5.0, 10.0, 12.0],
            allow_out_of_range: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub epsilon: f64,
    pub quality: ExecutionQuality,
    pub horizon: f64,
    pub result: ScenarioResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    /// Sorted by (epsilon, quality, horizon).
    pub cells: Vec<SweepCell>,
    /// Smallest |total_high| over the grid.
    pub min_abs_total: f64,
    /// Largest |total_low| over the grid.
    pub max_abs_total: f64,
}

/// Evaluates every (epsilon, quality, horizon) combination.
pub fn sensitivity_sweep(grid: &SweepGrid, ledger: &SupplyLedger, volume: f64) -> Result<SweepReport> {
    sensitivity_sweep_with_basis(grid, ledger, volume, ShareBasis::Effective)
}

pub fn sensitivity_sweep_with_basis(
    grid: &SweepGrid,
    ledger: &SupplyLedger,
    volume: f64,
    basis: ShareBasis,
) -> Result<SweepReport> {
    if grid.epsilons.is_empty() {
        return Err(Error::EmptyGrid("elasticities"));
    }
    if grid.qualities.is_empty() {
        return Err(Error::EmptyGrid("execution qualities"));
    }
    if grid.horizons.is_empty() {
        return Err(Error::EmptyGrid("horizons"));
    }
    for &e in &grid.epsilons {
        let model = ElasticityModel::new(e)?;
        if !grid.allow_out_of_range && !model.in_sensitivity_range() {
            return Err(Error::out_of_range("elasticity (sweep; pass the override to allow)", e));
        }
    }

    let mut cells = Vec::with_capacity(grid.epsilons.len() * grid.qualities.len() * grid.horizons.len());
    for &epsilon in &grid.epsilons {
        for &quality in &grid.qualities {
            for &horizon in &grid.horizons {
                let name = format!("eps={epsilon}/{quality}/{horizon}y");
                let scenario = Scenario::new(&name, epsilon, quality, horizon)?;
                let result = run_scenario_with_basis(&scenario, ledger, volume, basis)?;
                cells.push(SweepCell { epsilon, quality, horizon, result });
            }
        }
    }
    cells.sort_by(|a, b| {
        a.epsilon.total_cmp(&b.epsilon).then(a.quality.cmp(&b.quality)).then(a.horizon.total_cmp(&b.horizon))
    });
    let min_abs_total = cells.iter().map(|c| c.result.total_high.abs()).fold(f64::INFINITY, f64::min);
    let max_abs_total = cells.iter().map(|c| c.result.total_low.abs()).fold(0.0, f64::max);
    Ok(SweepReport { cells, min_abs_total, max_abs_total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrictionGap {
    pub ratio: f64,
    pub in_range: bool,
}

/// Ratio of two impact magnitudes, flagged against the 3-5x range.
pub fn friction_gap(adverse: f64, disciplined: f64) -> Result<FrictionGap> {
    if disciplined == 0.0 || !disciplined.is_finite() || !adverse.is_finite() {
        return Err(Error::InvalidParameter("disciplined impact must be finite and nonzero".into()));
    }
    let ratio = (adverse / disciplined).abs();
    Ok(FrictionGap { ratio, in_range: (FRICTION_GAP_RANGE.0..=FRICTION_GAP_RANGE.1).contains(&ratio) })
}

/// Compares the worst execution class present against disciplined OTC.
///
/// Each class is measured by the midpoint of its anchors' observed impact
/// where one exists, otherwise by the midpoint friction of the results in
/// that class.
pub fn friction_gap_check(results: &[ScenarioResult], anchors: &[AnchorEvent]) -> Result<FrictionGap> {
    let magnitude = |class: ExecutionQuality| -> Option<f64> {
        let observed: Vec<f64> =
            anchors.iter().filter(|a| a.execution_class == class).filter_map(|a| a.midpoint()).collect();
        if !observed.is_empty() {
            return Some(observed.iter().map(|m| m.abs()).sum::<f64>() / observed.len() as f64);
        }
        let frictions: Vec<f64> =
            results.iter().filter(|r| r.quality == class).map(|r| r.friction.midpoint() / 100.0).collect();
        (!frictions.is_empty()).then(|| frictions.iter().sum::<f64>() / frictions.len() as f64)
    };
    let disciplined = magnitude(ExecutionQuality::DisciplinedOtc)
        .ok_or_else(|| Error::MissingClass("no disciplined-otc anchor or result".into()))?;
    let adverse = [ExecutionQuality::PublicVenue, ExecutionQuality::Mixed, ExecutionQuality::DisciplinedOtc]
        .into_iter()
        .find_map(magnitude)
        .expect("disciplined class present");
    friction_gap(adverse, disciplined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liquidation_schedule::DEFAULT_REFERENCE_DAILY_VOLUME as VOL;

    #[test]
    fn builtins() {
        let s = builtin_scenarios();
        assert_eq!(s[0].elasticity.epsilon(), 1.5);
        assert_eq!(s[1].horizon, 10.0);
        assert_eq!(s[2].quality, ExecutionQuality::Mixed);
        assert!(matches!(builtin_scenario("D"), Err(Error::Unknown { .. })));
        assert_eq!(builtin_scenario("b").unwrap().name, "B");
    }

    #[test]
    fn anchors() {
        let a = builtin_anchors();
        assert_eq!(a[0].amount, Some(Btc::whole(50_000)));
        assert_eq!(a[1].observed_impact, Some((-0.05, -0.02)));
        assert_eq!(a[2].amount, Some(Btc::whole(140_000)));
        assert_eq!(a[2].observed_impact, None);
    }

    #[test]
    fn scenario_bands() {
        let l = SupplyLedger::default();
        let expect = [("A", -0.0643336, -0.0543336), ("B", -0.1225990, -0.1125990), ("C", -0.2528656, -0.2328656)];
        for (name, lo, hi) in expect {
            let r = run_scenario(&builtin_scenario(name).unwrap(), &l, VOL).unwrap();
            assert!((r.total_low - lo).abs() < 1e-6, "{name}: {}", r.total_low);
            assert!((r.total_high - hi).abs() < 1e-6, "{name}: {}", r.total_high);
        }
    }

    #[test]
    fn classification() {
        let l = SupplyLedger::default();
        let classes: Vec<_> =
            builtin_scenarios().iter().map(|s| run_scenario(s, &l, VOL).unwrap().anchor_class).collect();
        assert_eq!(classes, vec![AnchorClass::NearSilkRoad, AnchorClass::Between, AnchorClass::NearGerman]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let b = builtin_scenario("B").unwrap();
        assert!(run_scenarios(&[b.clone(), b], &SupplyLedger::default(), VOL, ShareBasis::Effective).is_err());
    }

    #[test]
    fn single_cell_sweep_matches_run() {
        let l = SupplyLedger::default();
        let grid = SweepGrid {
            epsilons: vec![0.7],
            qualities: vec![ExecutionQuality::DisciplinedOtc],
            horizons: vec![10.0],
            allow_out_of_range: false,
        };
        let rep = sensitivity_sweep(&grid, &l, VOL).unwrap();
        let b = run_scenario(&builtin_scenario("B").unwrap(), &l, VOL).unwrap();
        assert_eq!(rep.cells.len(), 1);
        assert_eq!(rep.cells[0].result.total_low, b.total_low);
        assert_eq!(rep.cells[0].result.total_high, b.total_high);
    }

    #[test]
    fn sweep_guards() {
        let l = SupplyLedger::default();
        let mut grid = SweepGrid::default();
        grid.epsilons.push(2.0);
        assert!(sensitivity_sweep(&grid, &l, VOL).is_err());
        grid.allow_out_of_range = true;
        assert!(sensitivity_sweep(&grid, &l, VOL).is_ok());
        grid.horizons.clear();
        assert!(matches!(sensitivity_sweep(&grid, &l, VOL), Err(Error::EmptyGrid(_))));
    }

    #[test]
    fn friction_gap_examples() {
        let g = friction_gap_check(&[], &builtin_anchors()).unwrap();
        assert!((g.ratio - 5.0).abs() < 1e-12);
        assert!(g.in_range);

        let l = SupplyLedger::default();
        let b = run_scenario(&builtin_scenario("B").unwrap(), &l, VOL).unwrap();
        let g = friction_gap_check(&[b.clone(), b], &[]).unwrap();
        assert_eq!(g.ratio, 1.0);

        let g = friction_gap(4.0, 1.5).unwrap();
        assert!((g.ratio - 2.6667).abs() < 1e-4);
        assert!(!g.in_range);

        let c = run_scenario(&builtin_scenario("C").unwrap(), &l, VOL).unwrap();
        assert!(matches!(friction_gap_check(&[c], &[]), Err(Error::MissingClass(_))));
    }
}
