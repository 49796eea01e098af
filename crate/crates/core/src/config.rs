//! Run configuration: a line-oriented `key = value` format with `[section]`
//! headers, or the equivalent JSON.
//!
//! ```text
//! seed = 7
//! format = csv
//! volume = 15e9
//! scenarios = B, D
//!
//! [ledger]
//! lost_estimate = 3500000
//!
//! [scenario.D]
//! elasticity = 0.5
//! quality = mixed
//! horizon = 8
//!
//! [sweep]
//! epsilons = 0.3, 0.7, 1.5
//!
//! [decision]
//! LegalCaution.PatientLiquidation = weak
//! ```
//!
//! Unknown sections and keys are rejected. `#` starts a comment line.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decision_space::{consistency_matrix, ConsistencyMatrix, Mark, PreferenceSet, TerminalKind};
use crate::error::{Error, Result};
use crate::exec_frontier::ExecutionModel;
use crate::impact_model::{ElasticityModel, ExecutionQuality, OvershootParams};
use crate::liquidation_schedule::DEFAULT_REFERENCE_DAILY_VOLUME;
use crate::mechanism_sim::DmsAction;
use crate::scenario_engine::{builtin_scenarios, Scenario, SweepGrid};
use crate::supply_ledger::{ShareBasis, SupplyLedger};
use crate::units::Btc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "markdown" | "markdown-table" | "md" | "table" => Ok(OutputFormat::Markdown),
            _ => Err(Error::Unknown { kind: "output format", name: s.to_string() }),
        }
    }
}

impl OutputFormat {
    fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Markdown => "markdown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismParams {
    pub heartbeat_interval: u64,
    pub grace_missed: u32,
    pub action: DmsAction,
    pub threshold: usize,
    pub shares: usize,
    pub retention: f64,
    pub clock_horizon: u64,
    pub last_heartbeat: u64,
    pub tranches_per_year: u32,
}

impl Default for MechanismParams {
    fn default() -> Self {
        MechanismParams {
            heartbeat_interval: 30,
            grace_missed: 3,
            action: DmsAction::DestroyShards,
            threshold: 3,
            shares: 5,
            retention: 0.01,
            clock_horizon: 20 * 365,
            last_heartbeat: 10 * 365,
            tranches_per_year: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierParams {
    pub model: ExecutionModel,
    pub lambdas: Vec<f64>,
}

impl Default for FrontierParams {
    fn default() -> Self {
        FrontierParams { model: ExecutionModel::desk_default(), lambdas: vec![0.0, 1e-7, 1e-6, 1e-5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkOverride {
    pub preference: String,
    pub terminal: TerminalKind,
    pub mark: Mark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub format: OutputFormat,
    /// Reference daily spot volume, USD.
    pub volume: f64,
    pub basis: ShareBasis,
    pub ledger: SupplyLedger,
    /// Scenario names to run; empty means all built-in and inline ones.
    pub scenarios: Vec<String>,
    pub inline_scenarios: Vec<Scenario>,
    pub sweep: SweepGrid,
    pub mechanism: MechanismParams,
    pub frontier: FrontierParams,
    pub decision: Vec<MarkOverride>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            format: OutputFormat::default(),
            volume: DEFAULT_REFERENCE_DAILY_VOLUME,
            basis: ShareBasis::Effective,
            ledger: SupplyLedger::default(),
            scenarios: Vec::new(),
            inline_scenarios: Vec::new(),
            sweep: SweepGrid::default(),
            mechanism: MechanismParams::default(),
            frontier: FrontierParams::default(),
            decision: Vec::new(),
        }
    }
}

impl RunConfig {
    /// Accepts either the text format or JSON (detected by a leading `{`).
    pub fn load(input: &str) -> Result<Self> {
        if input.trim_start().starts_with('{') {
            Self::from_json(input)
        } else {
            Self::parse(input)
        }
    }

    pub fn from_json(input: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(input).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn parse(input: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut ledger = LedgerFields::from(&cfg.ledger);
        let mut section = Section::Top;
        let mut pending: Option<(usize, PendingScenario)> = None;

        for (idx, raw) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };

            if let Some(header) = line.strip_prefix('[') {
                let header =
                    header.strip_suffix(']').ok_or_else(|| perr(format!("unterminated header {line:?}")))?.trim();
                if let Some((at, p)) = pending.take() {
                    cfg.inline_scenarios.push(p.finish(at)?);
                }
                section = match header {
                    "ledger" => Section::Ledger,
                    "sweep" => Section::Sweep,
                    "mechanism" => Section::Mechanism,
                    "frontier" => Section::Frontier,
                    "decision" => Section::Decision,
                    h => match h.strip_prefix("scenario.") {
                        Some(name) if !name.trim().is_empty() => {
                            pending = Some((line_no, PendingScenario::new(name.trim())));
                            Section::Scenario
                        }
                        _ => return Err(perr(format!("unknown section [{h}]"))),
                    },
                };
                continue;
            }

            let (key, value) =
                line.split_once('=').ok_or_else(|| perr(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let unknown = || perr(format!("unknown key {key:?}"));

            match section {
                Section::Top => match key {
                    "seed" => cfg.seed = num(value, line_no)?,
                    "format" => cfg.format = value.parse().map_err(|e: Error| perr(e.to_string()))?,
                    "volume" => cfg.volume = num(value, line_no)?,
                    "basis" => {
                        cfg.basis = match value.to_lowercase().as_str() {
                            "effective" => ShareBasis::Effective,
                            "nominal" => ShareBasis::Nominal,
                            _ => return Err(perr(format!("unknown basis {value:?}"))),
                        }
                    }
                    "scenarios" => cfg.scenarios = list(value).map(str::to_string).collect(),
                    _ => return Err(unknown()),
                },
                Section::Ledger => match key {
                    "total_mined" => ledger.total_mined = num(value, line_no)?,
                    "lost_estimate" => ledger.lost_estimate = num(value, line_no)?,
                    "position" => ledger.position = num(value, line_no)?,
                    "reference_price" => ledger.reference_price = num(value, line_no)?,
                    _ => return Err(unknown()),
                },
                Section::Scenario => {
                    let p = &mut pending.as_mut().expect("scenario section").1;
                    match key {
                        "elasticity" => p.elasticity = Some(num(value, line_no)?),
                        "quality" => p.quality = Some(value.parse().map_err(|e: Error| perr(e.to_string()))?),
                        "horizon" => p.horizon = Some(num(value, line_no)?),
                        "overshoot_magnitude" => p.overshoot_magnitude = Some(num(value, line_no)?),
                        "overshoot_half_life" => p.overshoot_half_life = Some(num(value, line_no)?),
                        _ => return Err(unknown()),
                    }
                }
                Section::Sweep => match key {
                    "epsilons" => cfg.sweep.epsilons = list(value).map(|v| num(v, line_no)).collect::<Result<_>>()?,
                    "qualities" => {
                        cfg.sweep.qualities = list(value)
                            .map(|v| v.parse().map_err(|e: Error| perr(e.to_string())))
                            .collect::<Result<_>>()?
                    }
                    "horizons" => cfg.sweep.horizons = list(value).map(|v| num(v, line_no)).collect::<Result<_>>()?,
                    "allow_out_of_range" => cfg.sweep.allow_out_of_range = num(value, line_no)?,
                    _ => return Err(unknown()),
                },
                Section::Mechanism => {
                    let m = &mut cfg.mechanism;
                    match key {
                        "heartbeat_interval" => m.heartbeat_interval = num(value, line_no)?,
                        "grace_missed" => m.grace_missed = num(value, line_no)?,
                        "action" => m.action = value.parse().map_err(|e: Error| perr(e.to_string()))?,
                        "threshold" => m.threshold = num(value, line_no)?,
                        "shares" => m.shares = num(value, line_no)?,
                        "retention" => m.retention = num(value, line_no)?,
                        "clock_horizon" => m.clock_horizon = num(value, line_no)?,
                        "last_heartbeat" => m.last_heartbeat = num(value, line_no)?,
                        "tranches_per_year" => m.tranches_per_year = num(value, line_no)?,
                        _ => return Err(unknown()),
                    }
                }
                Section::Frontier => {
                    let f = &mut cfg.frontier;
                    match key {
                        "lambdas" => f.lambdas = list(value).map(|v| num(v, line_no)).collect::<Result<_>>()?,
                        "total_units" => f.model.total_units = num(value, line_no)?,
                        "periods" => f.model.periods = num(value, line_no)?,
                        "period_length" => f.model.period_length = num(value, line_no)?,
                        "volatility" => f.model.volatility = num(value, line_no)?,
                        "permanent_coeff" => f.model.permanent_coeff = num(value, line_no)?,
                        "temporary_coeff" => f.model.temporary_coeff = num(value, line_no)?,
                        "risk_aversion" => f.model.risk_aversion = num(value, line_no)?,
                        _ => return Err(unknown()),
                    }
                }
                Section::Decision => {
                    let (pref, term) = key
                        .rsplit_once('.')
                        .ok_or_else(|| perr(format!("expected Preference.Terminal, got {key:?}")))?;
                    let terminal: TerminalKind = term.parse().map_err(|e: Error| perr(e.to_string()))?;
                    let mark: Mark = value.parse().map_err(|e: Error| perr(e.to_string()))?;
                    pref.parse::<PreferenceSet>().map_err(|e| perr(e.to_string()))?;
                    cfg.decision.push(MarkOverride { preference: pref.trim().to_string(), terminal, mark });
                }
            }
        }
        if let Some((at, p)) = pending.take() {
            cfg.inline_scenarios.push(p.finish(at)?);
        }
        cfg.ledger = ledger.build()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volume.is_finite() && self.volume > 0.0) {
            return Err(Error::out_of_range("volume", self.volume));
        }
        let mut names = std::collections::HashSet::new();
        for s in &self.inline_scenarios {
            s.validate()?;
            if !names.insert(s.name.to_lowercase()) {
                return Err(Error::InvalidParameter(format!("duplicate scenario {}", s.name)));
            }
        }
        Ok(())
    }

    /// Resolves the scenario selection against inline definitions first,
    /// then the built-ins.
    pub fn selected_scenarios(&self) -> Result<Vec<Scenario>> {
        if self.scenarios.is_empty() {
            let mut all = builtin_scenarios();
            all.retain(|b| !self.inline_scenarios.iter().any(|s| s.name.eq_ignore_ascii_case(&b.name)));
            all.extend(self.inline_scenarios.iter().cloned());
            return Ok(all);
        }
        self.scenarios.iter().map(|name| self.scenario(name)).collect()
    }

    pub fn scenario(&self, name: &str) -> Result<Scenario> {
        if let Some(s) = self.inline_scenarios.iter().find(|s| s.name.eq_ignore_ascii_case(name)) {
            return Ok(s.clone());
        }
        crate::scenario_engine::builtin_scenario(name)
    }

    /// The built-in matrix with any `[decision]` overrides applied.
    pub fn decision_matrix(&self) -> Result<ConsistencyMatrix> {
        let mut m = consistency_matrix();
        for o in &self.decision {
            m.set(o.preference.parse()?, o.terminal, o.mark);
        }
        Ok(m)
    }

    /// Renders the configuration in the text format; `parse` reads it back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "format = {}", self.format.as_str());
        let _ = writeln!(out, "volume = {}", self.volume);
        let _ = writeln!(
            out,
            "basis = {}",
            match self.basis {
                ShareBasis::Effective => "effective",
                ShareBasis::Nominal => "nominal",
            }
        );
        if !self.scenarios.is_empty() {
            let _ = writeln!(out, "scenarios = {}", self.scenarios.join(", "));
        }
        let l = &self.ledger;
        let _ = writeln!(out, "\n[ledger]");
        let _ = writeln!(out, "total_mined = {}", l.total_mined());
        let _ = writeln!(out, "lost_estimate = {}", l.lost_estimate());
        let _ = writeln!(out, "position = {}", l.position());
        let _ = writeln!(out, "reference_price = {}", l.reference_price());
        for s in &self.inline_scenarios {
            let _ = writeln!(out, "\n[scenario.{}]", s.name);
            let _ = writeln!(out, "elasticity = {}", s.elasticity.epsilon());
            let _ = writeln!(out, "quality = {}", s.quality);
            let _ = writeln!(out, "horizon = {}", s.horizon);
            if let Some(o) = s.overshoot {
                let _ = writeln!(out, "overshoot_magnitude = {}", o.magnitude);
                let _ = writeln!(out, "overshoot_half_life = {}", o.half_life);
            }
        }
        let g = &self.sweep;
        let _ = writeln!(out, "\n[sweep]");
        let _ = writeln!(out, "epsilons = {}", join(&g.epsilons));
        let _ = writeln!(out, "qualities = {}", g.qualities.iter().map(|q| q.as_str()).collect::<Vec<_>>().join(", "));
        let _ = writeln!(out, "horizons = {}", join(&g.horizons));
        let _ = writeln!(out, "allow_out_of_range = {}", g.allow_out_of_range);
        let m = &self.mechanism;
        let _ = writeln!(out, "\n[mechanism]");
        let _ = writeln!(out, "heartbeat_interval = {}", m.heartbeat_interval);
        let _ = writeln!(out, "grace_missed = {}", m.grace_missed);
        let _ = writeln!(out, "action = {}", m.action);
        let _ = writeln!(out, "threshold = {}", m.threshold);
        let _ = writeln!(out, "shares = {}", m.shares);
        let _ = writeln!(out, "retention = {}", m.retention);
        let _ = writeln!(out, "clock_horizon = {}", m.clock_horizon);
        let _ = writeln!(out, "last_heartbeat = {}", m.last_heartbeat);
        let _ = writeln!(out, "tranches_per_year = {}", m.tranches_per_year);
        let f = &self.frontier;
        let _ = writeln!(out, "\n[frontier]");
        let _ = writeln!(out, "lambdas = {}", join(&f.lambdas));
        let _ = writeln!(out, "total_units = {}", f.model.total_units);
        let _ = writeln!(out, "periods = {}", f.model.periods);
        let _ = writeln!(out, "period_length = {}", f.model.period_length);
        let _ = writeln!(out, "volatility = {}", f.model.volatility);
        let _ = writeln!(out, "permanent_coeff = {}", f.model.permanent_coeff);
        let _ = writeln!(out, "temporary_coeff = {}", f.model.temporary_coeff);
        let _ = writeln!(out, "risk_aversion = {}", f.model.risk_aversion);
        if !self.decision.is_empty() {
            let _ = writeln!(out, "\n[decision]");
            for o in &self.decision {
                let _ = writeln!(out, "{}.{} = {}", o.preference, o.terminal, o.mark);
            }
        }
        out
    }
}

enum Section {
    Top,
    Ledger,
    Scenario,
    Sweep,
    Mechanism,
    Frontier,
    Decision,
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn num<T: std::str::FromStr>(value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse { line, msg: format!("invalid value {value:?}") })
}

struct LedgerFields {
    total_mined: f64,
    lost_estimate: f64,
    position: f64,
    reference_price: f64,
}

impl From<&SupplyLedger> for LedgerFields {
    fn from(l: &SupplyLedger) -> Self {
        LedgerFields {
            total_mined: l.total_mined().as_btc(),
            lost_estimate: l.lost_estimate().as_btc(),
            position: l.position().as_btc(),
            reference_price: l.reference_price(),
        }
    }
}

impl LedgerFields {
    fn build(&self) -> Result<SupplyLedger> {
        SupplyLedger::new(
            Btc::from_btc(self.total_mined)?,
            Btc::from_btc(self.lost_estimate)?,
            Btc::from_btc(self.position)?,
            self.reference_price,
        )
    }
}

struct PendingScenario {
    name: String,
    elasticity: Option<f64>,
    quality: Option<ExecutionQuality>,
    horizon: Option<f64>,
    overshoot_magnitude: Option<f64>,
    overshoot_half_life: Option<f64>,
}

impl PendingScenario {
    fn new(name: &str) -> Self {
        PendingScenario {
            name: name.to_string(),
            elasticity: None,
            quality: None,
            horizon: None,
            overshoot_magnitude: None,
            overshoot_half_life: None,
        }
    }

    fn finish(self, line: usize) -> Result<Scenario> {
        let missing = |k: &str| Error::Parse { line, msg: format!("scenario {} is missing {k}", self.name) };
        let overshoot = match (self.overshoot_magnitude, self.overshoot_half_life) {
            (None, None) => None,
            (m, h) => {
                let d = OvershootParams::default();
                Some(OvershootParams::new(m.unwrap_or(d.magnitude), h.unwrap_or(d.half_life))?)
            }
        };
        let s = Scenario {
            elasticity: ElasticityModel::new(self.elasticity.ok_or_else(|| missing("elasticity"))?)?,
            quality: self.quality.ok_or_else(|| missing("quality"))?,
            horizon: self.horizon.ok_or_else(|| missing("horizon"))?,
            overshoot,
            name: self.name,
        };
        s.validate()?;
        Ok(s)
    }
}
