//! Holder preference sets, terminal dispositions, and how they line up.
//!
//! Marks are ordinal (consistent / weak / inconsistent). Nothing here is a
//! probability.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario_engine::ScenarioResult;
use crate::supply_ledger::{apply_burn, SupplyLedger};
use crate::units::Btc;

/// Largest bear-case magnitude accepted as "bounded".
pub const BEAR_BOUND_LIMIT: f64 = 0.26;

/// Upper limit on the retained share in a partial burn.
pub const MAX_BURN_RETENTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PreferenceSet {
    IdeologicalNonIntervention,
    PrivacyAboveAll,
    SatisficingHabit,
    KeyLossIncapacity,
    /// A group of holders that cannot agree; observably the same as key loss.
    GroupStalemate,
    MythPreservation,
    LegalCaution,
    Adversarial,
    PureWealthMax,
    /// A row supplied by configuration.
    Custom(String),
}

impl PreferenceSet {
    pub const BUILTIN: [PreferenceSet; 9] = [
        PreferenceSet::IdeologicalNonIntervention,
        PreferenceSet::PrivacyAboveAll,
        PreferenceSet::SatisficingHabit,
        PreferenceSet::KeyLossIncapacity,
        PreferenceSet::GroupStalemate,
        PreferenceSet::MythPreservation,
        PreferenceSet::LegalCaution,
        PreferenceSet::Adversarial,
        PreferenceSet::PureWealthMax,
    ];

    pub fn name(&self) -> &str {
        match self {
            PreferenceSet::IdeologicalNonIntervention => "IdeologicalNonIntervention",
            PreferenceSet::PrivacyAboveAll => "PrivacyAboveAll",
            PreferenceSet::SatisficingHabit => "SatisficingHabit",
            PreferenceSet::KeyLossIncapacity => "KeyLossIncapacity",
            PreferenceSet::GroupStalemate => "GroupStalemate",
            PreferenceSet::MythPreservation => "MythPreservation",
            PreferenceSet::LegalCaution => "LegalCaution",
            PreferenceSet::Adversarial => "Adversarial",
            PreferenceSet::PureWealthMax => "PureWealthMax",
            PreferenceSet::Custom(name) => name,
        }
    }
}

impl fmt::Display for PreferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PreferenceSet {
    type Err = Error;
    /// Built-in names match case-insensitively; anything else is a custom row.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidParameter("empty preference set name".into()));
        }
        Ok(PreferenceSet::BUILTIN
            .iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .cloned()
            .unwrap_or_else(|| PreferenceSet::Custom(s.to_string())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TerminalKind {
    DormancyNonRecovery,
    SilentBurn,
    AdversarialSwitch,
    PatientLiquidation,
}

impl TerminalKind {
    /// Declaration order, used to break ranking ties.
    pub const ALL: [TerminalKind; 4] = [
        TerminalKind::DormancyNonRecovery,
        TerminalKind::SilentBurn,
        TerminalKind::AdversarialSwitch,
        TerminalKind::PatientLiquidation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TerminalKind::DormancyNonRecovery => "DormancyNonRecovery",
            TerminalKind::SilentBurn => "SilentBurn",
            TerminalKind::AdversarialSwitch => "AdversarialSwitch",
            TerminalKind::PatientLiquidation => "PatientLiquidation",
        }
    }

    /// Whether the disposition returns the position to the float.
    pub fn returns_supply(&self) -> bool {
        matches!(self, TerminalKind::AdversarialSwitch | TerminalKind::PatientLiquidation)
    }
}

impl fmt::Display for TerminalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TerminalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        match norm.as_str() {
            "dormancynonrecovery" | "dormancy" => Ok(TerminalKind::DormancyNonRecovery),
            "silentburn" | "burn" => Ok(TerminalKind::SilentBurn),
            "adversarialswitch" | "adversarial" => Ok(TerminalKind::AdversarialSwitch),
            "patientliquidation" | "liquidation" => Ok(TerminalKind::PatientLiquidation),
            _ => Err(Error::Unknown { kind: "terminal state", name: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalState {
    pub kind: TerminalKind,
    /// Share of the position kept back from a burn; zero for other kinds.
    pub retention_fraction: f64,
}

impl TerminalState {
    pub fn new(kind: TerminalKind, retention_fraction: f64) -> Result<Self> {
        let ok = match kind {
            TerminalKind::SilentBurn => (0.0..=MAX_BURN_RETENTION).contains(&retention_fraction),
            _ => retention_fraction == 0.0,
        };
        if !ok {
            return Err(Error::out_of_range("retention fraction", retention_fraction));
        }
        Ok(TerminalState { kind, retention_fraction })
    }

    pub fn of(kind: TerminalKind) -> Self {
        TerminalState { kind, retention_fraction: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mark {
    Consistent,
    Weak,
    Inconsistent,
}

impl FromStr for Mark {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "consistent" | "c" => Ok(Mark::Consistent),
            "weak" | "w" => Ok(Mark::Weak),
            "inconsistent" | "i" | "-" => Ok(Mark::Inconsistent),
            _ => Err(Error::Unknown { kind: "consistency mark", name: s.to_string() }),
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Consistent => "Consistent",
            Mark::Weak => "Weak",
            Mark::Inconsistent => "Inconsistent",
        })
    }
}

/// Total map from (preference set, terminal kind) to a mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyMatrix {
    marks: BTreeMap<PreferenceSet, BTreeMap<TerminalKind, Mark>>,
}

impl ConsistencyMatrix {
    /// Every listed row, all marked inconsistent.
    pub fn with_rows<I: IntoIterator<Item = PreferenceSet>>(rows: I) -> Self {
        let blank: BTreeMap<_, _> = TerminalKind::ALL.iter().map(|k| (*k, Mark::Inconsistent)).collect();
        ConsistencyMatrix { marks: rows.into_iter().map(|r| (r, blank.clone())).collect() }
    }

    /// Builds a matrix from explicit entries, requiring every pair present.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PreferenceSet, TerminalKind, Mark)>,
    {
        let mut marks: BTreeMap<PreferenceSet, BTreeMap<TerminalKind, Mark>> = BTreeMap::new();
        for (pref, kind, mark) in entries {
            marks.entry(pref).or_default().insert(kind, mark);
        }
        for (pref, row) in &marks {
            if row.len() != TerminalKind::ALL.len() {
                return Err(Error::InvalidParameter(format!("row {pref} is missing terminal states")));
            }
        }
        Ok(ConsistencyMatrix { marks })
    }

    /// Sets a mark, adding the row (otherwise inconsistent) if it is new.
    pub fn set(&mut self, pref: PreferenceSet, kind: TerminalKind, mark: Mark) {
        self.marks
            .entry(pref)
            .or_insert_with(|| TerminalKind::ALL.iter().map(|k| (*k, Mark::Inconsistent)).collect())
            .insert(kind, mark);
    }

    pub fn get(&self, pref: &PreferenceSet, kind: TerminalKind) -> Option<Mark> {
        self.marks.get(pref).and_then(|row| row.get(&kind)).copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = &PreferenceSet> {
        self.marks.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PreferenceSet, TerminalKind, Mark)> {
        self.marks.iter().flat_map(|(p, row)| row.iter().map(move |(k, m)| (p, *k, *m)))
    }

    /// (consistent, weak) counts down one column.
    pub fn column_score(&self, kind: TerminalKind) -> (usize, usize) {
        self.marks.values().fold((0, 0), |(c, w), row| match row.get(&kind) {
            Some(Mark::Consistent) => (c + 1, w),
            Some(Mark::Weak) => (c, w + 1),
            _ => (c, w),
        })
    }
}

/// The built-in matrix.
///
/// Dormancy fits every preference set except the adversarial and wealth
/// maximizing ones. A burn fits ideology and myth preservation outright and,
/// through the retention variant, satisficing and legal caution weakly. The
/// adversarial switch and patient liquidation each fit only their own
/// motive, and only weakly, since the record argues against both.
pub fn consistency_matrix() -> ConsistencyMatrix {
    use Mark::*;
    use PreferenceSet::*;
    use TerminalKind::*;

    let mut m = ConsistencyMatrix::with_rows(PreferenceSet::BUILTIN);
    for pref in [
        IdeologicalNonIntervention,
        PrivacyAboveAll,
        MythPreservation,
        SatisficingHabit,
        KeyLossIncapacity,
        GroupStalemate,
        LegalCaution,
    ] {
        m.set(pref, DormancyNonRecovery, Consistent);
    }
    m.set(IdeologicalNonIntervention, SilentBurn, Consistent);
    m.set(MythPreservation, SilentBurn, Consistent);
    m.set(SatisficingHabit, SilentBurn, Weak);
    m.set(LegalCaution, SilentBurn, Weak);
    m.set(Adversarial, AdversarialSwitch, Weak);
    m.set(PureWealthMax, PatientLiquidation, Weak);
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ranking {
    pub order: Vec<TerminalKind>,
    /// (consistent, weak) per entry of `order`.
    pub scores: Vec<(usize, usize)>,
    /// Adjacent pairs whose scores tie; they stay in declaration order.
    pub ties: Vec<(TerminalKind, TerminalKind)>,
}

/// Orders terminal states by consistent marks, then weak marks, descending.
pub fn rank_terminal_states(matrix: &ConsistencyMatrix) -> Ranking {
    let mut scored: Vec<(TerminalKind, (usize, usize))> =
        TerminalKind::ALL.iter().map(|k| (*k, matrix.column_score(*k))).collect();
    // Stable sort keeps declaration order within ties.
    scored.sort_by_key(|s| std::cmp::Reverse(s.1));
    let ties = scored.windows(2).filter(|w| w[0].1 == w[1].1).map(|w| (w[0].0, w[1].0)).collect();
    Ranking { order: scored.iter().map(|(k, _)| *k).collect(), scores: scored.iter().map(|(_, s)| *s).collect(), ties }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarketSign {
    Bullish,
    Neutral,
    Bearish,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupplyEffect {
    pub state: TerminalKind,
    /// Signed change to effective float, in satoshis.
    pub delta_sats: i64,
    pub market_sign: MarketSign,
    /// Worst total price impact, for bearish effects.
    pub bound: Option<f64>,
}

impl SupplyEffect {
    pub fn delta_btc(&self) -> f64 {
        self.delta_sats as f64 / Btc::SATS_PER_BTC as f64
    }
}

/// Change to effective float implied by a terminal state.
///
/// `bear_bound` is the worst total impact from the scenario runs and is
/// attached to any disposition that returns coins to the market.
pub fn supply_effect(state: &TerminalState, ledger: &SupplyLedger, bear_bound: f64) -> Result<SupplyEffect> {
    let position = ledger.position().sats() as i64;
    let (delta_sats, market_sign, bound) = match state.kind {
        TerminalKind::DormancyNonRecovery => (-position, sign_of_removal(position), None),
        TerminalKind::SilentBurn => {
            let burned = apply_burn(ledger, state.retention_fraction)?.burned.sats() as i64;
            (-burned, sign_of_removal(burned), None)
        }
        TerminalKind::AdversarialSwitch | TerminalKind::PatientLiquidation => {
            if position == 0 {
                (0, MarketSign::Neutral, None)
            } else {
                (position, MarketSign::Bearish, Some(bear_bound))
            }
        }
    };
    Ok(SupplyEffect { state: state.kind, delta_sats, market_sign, bound })
}

fn sign_of_removal(sats: i64) -> MarketSign {
    if sats > 0 {
        MarketSign::Bullish
    } else {
        MarketSign::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub state: TerminalKind,
    pub scenario: String,
    pub total_low: f64,
    pub total_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BearCaseReport {
    pub ranking: Ranking,
    /// Supply effects in ranking order.
    pub effects: Vec<SupplyEffect>,
    pub worst_case: Option<WorstCase>,
    pub top_signs: Vec<(TerminalKind, MarketSign)>,
    pub bounded_downside: bool,
    pub non_bearish_plurality: bool,
    pub note: &'static str,
}

pub const LIQUIDATION_PLACEMENT_NOTE: &str =
    "PatientLiquidation is ranked last as a modeling extension so the wealth-maximizing path can be compared";

/// Combines the ranking, per-state supply effects and the worst scenario
/// band into a single summary.
pub fn bear_case_summary(
    matrix: &ConsistencyMatrix,
    ledger: &SupplyLedger,
    scenario_results: &[ScenarioResult],
) -> Result<BearCaseReport> {
    let worst = scenario_results
        .iter()
        .min_by(|a, b| a.total_low.total_cmp(&b.total_low))
        .ok_or(Error::EmptyGrid("scenario results"))?;
    let ranking = rank_terminal_states(matrix);
    let effects = ranking
        .order
        .iter()
        .map(|k| supply_effect(&TerminalState::of(*k), ledger, worst.total_low))
        .collect::<Result<Vec<_>>>()?;

    // Lowest-ranked bearish state.
    let worst_case = effects.iter().rev().find(|e| e.market_sign == MarketSign::Bearish).map(|e| WorstCase {
        state: e.state,
        scenario: worst.scenario_name.clone(),
        total_low: worst.total_low,
        total_high: worst.total_high,
    });
    let top_signs: Vec<_> = effects.iter().take(2).map(|e| (e.state, e.market_sign)).collect();
    let non_bearish_plurality = top_signs.iter().all(|(_, s)| *s != MarketSign::Bearish);
    let bounded_downside = worst_case.as_ref().is_none_or(|w| w.total_low.abs() <= BEAR_BOUND_LIMIT);

    Ok(BearCaseReport {
        ranking,
        effects,
        worst_case,
        top_signs,
        bounded_downside,
        non_bearish_plurality,
        note: LIQUIDATION_PLACEMENT_NOTE,
    })
}
