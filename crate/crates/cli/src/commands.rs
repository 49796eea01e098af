use clap::{Args, Subcommand};
use overhang_core::config::RunConfig;
use overhang_core::decision_space::{bear_case_summary, supply_effect, TerminalKind, TerminalState};
use overhang_core::exec_frontier::{frontier, optimal_trajectory};
use overhang_core::impact_model::{
    combine, friction_band, permanent_impact, small_shift_approx, ElasticityModel, ExecutionQuality,
};
use overhang_core::liquidation_schedule::{
    build_uniform_schedule, participation_check, to_tranche_program, Schedule, ScheduleParams,
};
use overhang_core::mechanism_sim::{
    dms_step, reconstruct, simulate_disposition, split_seeded, DispositionInput, DmsAction, DmsConfig, DmsEvent,
    DmsState, Secret, Share,
};
use overhang_core::scenario_engine::{
    builtin_anchors, friction_gap_check, run_scenarios, sensitivity_sweep_with_basis, ScenarioResult, SweepGrid,
    NEAR_GERMAN_LOWER, NEAR_SILK_ROAD_UPPER,
};
use overhang_core::supply_ledger::position_share;
use overhang_core::{Btc, Error, Result};
use serde_json::{json, Value};

use crate::render::{Cell, Report, Table};
use crate::{Command, Global};

/// Literal share used by the reference impact table.
const TABLE_SHARE: f64 = 0.07;
const TABLE_EPSILONS: [f64; 3] = [1.5, 0.7, 0.3];

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

pub fn dispatch(cmd: &Command, global: &Global, cfg: &RunConfig) -> Result<Report> {
    match cmd {
        Command::Impact(a) => impact(a, cfg),
        Command::Scenario(a) => scenario(a, cfg),
        Command::Schedule(a) => schedule(a, cfg),
        Command::Frontier(a) => frontier_cmd(a, cfg),
        Command::DecisionMap => decision_map(cfg),
        Command::Mechanism { command } => mechanism(command, global, cfg),
        Command::Anchors => anchors(cfg),
    }
}

// ---------------------------------------------------------------- impact

#[derive(Args, Debug)]
pub struct ImpactArgs {
    /// Print the reference elasticity table instead of a single result.
    #[arg(long)]
    pub table: bool,
    /// Supply shift as a fraction of float (default: the ledger's share).
    #[arg(long, allow_negative_numbers = true)]
    pub share: Option<f64>,
    /// Price elasticity of demand.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.7)]
    pub epsilon: f64,
    /// Execution quality: disciplined-otc, mixed or public-venue.
    #[arg(long, default_value = "disciplined-otc")]
    pub quality: String,
    /// Daily participation rate as a fraction (default: from a schedule
    /// over --horizon years).
    #[arg(long, allow_negative_numbers = true)]
    pub participation: Option<f64>,
    /// Liquidation horizon in years, used when --participation is absent.
    #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
    pub horizon: f64,
}

fn impact(a: &ImpactArgs, cfg: &RunConfig) -> Result<Report> {
    let model = ElasticityModel::new(a.epsilon)?;
    if a.table {
        let share = a.share.unwrap_or(TABLE_SHARE);
        let mut t = Table::new(
            format!("Permanent impact of a {:.1}% supply shift", share * 100.0),
            &["epsilon", "permanent", "small_shift_approx"],
        );
        let mut rows = Vec::new();
        for eps in TABLE_EPSILONS {
            let m = ElasticityModel::new(eps)?;
            let p = permanent_impact(share, &m)?;
            let approx = small_shift_approx(share, &m)?;
            t.push(vec![Cell::Num(eps), Cell::Pct(p, 1), Cell::Pct(approx, 1)]);
            rows.push(json!({ "epsilon": eps, "permanent": p, "small_shift_approx": approx }));
        }
        return Ok(Report::new("impact", json!({ "share": share, "rows": rows })).table(t));
    }

    let share = a.share.unwrap_or_else(|| position_share(&cfg.ledger, cfg.basis));
    let quality: ExecutionQuality = a.quality.parse()?;
    let participation = match a.participation {
        Some(p) => p,
        None => schedule_for(cfg, cfg.ledger.position(), a.horizon)?.participation,
    };
    let permanent = permanent_impact(share, &model)?;
    let band = friction_band(quality, participation)?;
    let r = combine(permanent, band);

    let mut t = Table::new(
        "Impact",
        &["share", "epsilon", "quality", "participation", "permanent", "friction_pp", "total_low", "total_high"],
    );
    t.push(vec![
        Cell::Pct(share, 2),
        Cell::Num(a.epsilon),
        Cell::text(quality.as_str()),
        Cell::Pct(participation, 3),
        Cell::Pct(r.permanent, 1),
        Cell::text(format!("{}-{}", band.low, band.high)),
        Cell::Pct(r.total_low, 1),
        Cell::Pct(r.total_high, 1),
    ]);
    let mut rep = Report::new(
        "impact",
        json!({ "share": share, "epsilon": a.epsilon, "quality": quality, "participation": participation, "result": r }),
    )
    .table(t);
    if band.extrapolated {
        rep = rep.note("friction band extrapolated beyond the calibrated participation range");
    }
    if !model.in_sensitivity_range() {
        rep = rep.note("epsilon outside the 0.3-1.5 sensitivity range");
    }
    Ok(rep)
}

// ---------------------------------------------------------------- scenario

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// Scenario names (built-in A, B, C or defined in the config); `sweep`
    /// runs the sensitivity grid. Defaults to the configured selection.
    pub names: Vec<String>,
    /// Use the built-in sweep grid, ignoring any [sweep] section.
    #[arg(long)]
    pub default_grid: bool,
    /// Allow sweep elasticities outside 0.3-1.5.
    #[arg(long)]
    pub allow_out_of_range: bool,
}

fn scenario_row(r: &ScenarioResult) -> Vec<Cell> {
    vec![
        Cell::text(&r.scenario_name),
        Cell::Num(r.epsilon),
        Cell::text(r.quality.as_str()),
        Cell::Num(r.schedule.horizon),
        Cell::Pct(r.supply_shift, 2),
        Cell::Btc(r.schedule.annual_btc),
        Cell::Btc(r.schedule.daily_btc),
        Cell::Usd(r.schedule.daily_usd),
        Cell::Pct(r.schedule.participation, 3),
        Cell::Pct(r.permanent, 1),
        Cell::text(format!("{}-{}", r.friction.low, r.friction.high)),
        Cell::Pct(r.total_low, 1),
        Cell::Pct(r.total_high, 1),
        Cell::text(r.anchor_class.to_string()),
    ]
}

const SCENARIO_HEADERS: [&str; 14] = [
    "scenario",
    "epsilon",
    "quality",
    "horizon_years",
    "supply_shift",
    "annual",
    "daily",
    "daily_value",
    "participation",
    "permanent",
    "friction_pp",
    "total_low",
    "total_high",
    "anchor_class",
];

fn scenario(a: &ScenarioArgs, cfg: &RunConfig) -> Result<Report> {
    if a.names.first().is_some_and(|n| n.eq_ignore_ascii_case("sweep")) {
        if a.names.len() > 1 {
            return Err(Error::InvalidParameter("`scenario sweep` takes no further names".into()));
        }
        return sweep(a, cfg);
    }
    let scenarios = if a.names.is_empty() {
        cfg.selected_scenarios()?
    } else {
        a.names.iter().map(|n| cfg.scenario(n)).collect::<Result<Vec<_>>>()?
    };
    let results = run_scenarios(&scenarios, &cfg.ledger, cfg.volume, cfg.basis)?;

    let mut t = Table::new("Scenarios", &SCENARIO_HEADERS);
    let mut rep = Report::new("scenario", json!({ "results": to_value(&results) }));
    for r in &results {
        t.push(scenario_row(r));
        if let Some(trough) = r.overshoot_trough {
            rep = rep.note(format!("{}: overshoot trough {:.1}% of pre-event price", r.scenario_name, trough * 100.0));
        }
        if r.friction.extrapolated {
            rep = rep.note(format!("{}: friction band extrapolated", r.scenario_name));
        }
    }
    for r in &results {
        rep =
            rep.note(format!("{}: total {:.1}% to {:.1}%", r.scenario_name, r.total_high * 100.0, r.total_low * 100.0));
    }
    Ok(rep.table(t))
}

fn sweep(a: &ScenarioArgs, cfg: &RunConfig) -> Result<Report> {
    let mut grid = if a.default_grid { SweepGrid::default() } else { cfg.sweep.clone() };
    grid.allow_out_of_range |= a.allow_out_of_range;
    let rep = sensitivity_sweep_with_basis(&grid, &cfg.ledger, cfg.volume, cfg.basis)?;
    let mut t = Table::new("Sensitivity sweep", &SCENARIO_HEADERS);
    for c in &rep.cells {
        t.push(scenario_row(&c.result));
    }
    let mut bound = Table::new("Bound", &["cells", "min_abs_total", "max_abs_total"]);
    bound.push(vec![
        Cell::Int(rep.cells.len() as i64),
        Cell::Pct(rep.min_abs_total, 1),
        Cell::Pct(rep.max_abs_total, 1),
    ]);
    Ok(Report::new("scenario sweep", to_value(&rep))
        .table(t)
        .table(bound)
        .note(format!("worst-case |total| across the grid: {:.1}%", rep.max_abs_total * 100.0)))
}

// ---------------------------------------------------------------- schedule

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    /// Position in BTC (default: the ledger position).
    #[arg(long)]
    pub position: Option<f64>,
    /// Horizon in years.
    #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
    pub horizon: f64,
    /// Reference price in USD/BTC (default: the ledger price).
    #[arg(long)]
    pub price: Option<f64>,
    /// Tranches per year in the derived tranche program.
    #[arg(long)]
    pub tranches_per_year: Option<u32>,
    /// Epoch (day) of the first unlock.
    #[arg(long, default_value_t = 0)]
    pub start: u64,
    /// Daily volume range in USD for the participation check.
    #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
    pub volume_range: Option<Vec<f64>>,
}

fn schedule_for(cfg: &RunConfig, position: Btc, horizon: f64) -> Result<Schedule> {
    let mut p = ScheduleParams::new(position, horizon);
    p.price = cfg.ledger.reference_price();
    p.reference_daily_volume = cfg.volume;
    build_uniform_schedule(&p)
}

fn schedule(a: &ScheduleArgs, cfg: &RunConfig) -> Result<Report> {
    let position = match a.position {
        Some(b) => Btc::from_btc(b)?,
        None => cfg.ledger.position(),
    };
    let mut p = ScheduleParams::new(position, a.horizon);
    p.price = a.price.unwrap_or(cfg.ledger.reference_price());
    p.reference_daily_volume = cfg.volume;
    let s = build_uniform_schedule(&p)?;
    let g = a.tranches_per_year.unwrap_or(cfg.mechanism.tranches_per_year);
    let program = to_tranche_program(&s, g, a.start)?;

    let mut summary =
        Table::new("Schedule", &["position", "horizon_years", "annual", "daily", "daily_value", "participation"]);
    summary.push(vec![
        Cell::btc(s.position),
        Cell::Num(s.horizon),
        Cell::Btc(s.annual_btc),
        Cell::Btc(s.daily_btc),
        Cell::Usd(s.daily_usd),
        Cell::Pct(s.participation, 3),
    ]);
    let mut tranches = Table::new("Tranche program", &["tranche", "unlock_day", "amount"]);
    for (i, t) in program.tranches().iter().enumerate() {
        tranches.push(vec![Cell::Int(i as i64 + 1), Cell::Int(t.unlock.earliest_epoch(0) as i64), Cell::btc(t.amount)]);
    }
    let mut data = json!({ "schedule": s, "tranches": program });
    let mut rep = Report::new("schedule", Value::Null).table(summary);
    if let Some(range) = &a.volume_range {
        let (hi, lo) = participation_check(&s, (range[0], range[1]))?;
        let mut t = Table::new(
            "Participation range",
            &["volume_low", "volume_high", "participation_high", "participation_low"],
        );
        t.push(vec![Cell::Usd(range[0]), Cell::Usd(range[1]), Cell::Pct(hi, 3), Cell::Pct(lo, 3)]);
        rep = rep.table(t);
        data["participation_range"] = json!([hi, lo]);
    }
    rep.data = data;
    Ok(rep.table(tranches))
}

// ---------------------------------------------------------------- frontier

#[derive(Args, Debug)]
pub struct FrontierArgs {
    /// Risk-aversion values, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambdas: Option<Vec<f64>>,
    /// Units to liquidate.
    #[arg(long)]
    pub units: Option<f64>,
    /// Number of trading periods.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Period length.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Volatility per unit time.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Permanent impact coefficient.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Temporary impact coefficient.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
}

fn frontier_cmd(a: &FrontierArgs, cfg: &RunConfig) -> Result<Report> {
    let mut m = cfg.frontier.model;
    m.total_units = a.units.unwrap_or(m.total_units);
    m.periods = a.periods.unwrap_or(m.periods);
    m.period_length = a.tau.unwrap_or(m.period_length);
    m.volatility = a.sigma.unwrap_or(m.volatility);
    m.permanent_coeff = a.gamma.unwrap_or(m.permanent_coeff);
    m.temporary_coeff = a.eta.unwrap_or(m.temporary_coeff);
    let lambdas = a.lambdas.clone().unwrap_or_else(|| cfg.frontier.lambdas.clone());
    let points = frontier(&m, &lambdas)?;

    let mut summary = Table::new("Frontier", &["lambda", "kappa", "expected_cost", "variance", "std_dev"]);
    let mut paths = Table::new("Trajectories", &["lambda", "period", "holding", "trade"]);
    let mut trajectories = Vec::new();
    for (pt, &lambda) in points.iter().zip(&lambdas) {
        let model = m.with_risk_aversion(lambda);
        let t = optimal_trajectory(&model)?;
        summary.push(vec![
            Cell::Num(lambda),
            Cell::Num(model.kappa()),
            Cell::Num(pt.expected_cost),
            Cell::Num(pt.cost_variance),
            Cell::Num(pt.cost_variance.sqrt()),
        ]);
        let trades = t.trades();
        for (k, x) in t.holdings.iter().enumerate() {
            let trade = if k == 0 { Cell::text("") } else { Cell::Num(trades[k - 1]) };
            paths.push(vec![Cell::Num(lambda), Cell::Int(k as i64), Cell::Num(*x), trade]);
        }
        trajectories.push(json!({ "risk_aversion": lambda, "trajectory": t }));
    }
    Ok(Report::new("frontier", json!({ "model": m, "points": points, "trajectories": trajectories }))
        .table(summary)
        .table(paths))
}

// ---------------------------------------------------------------- decision map

fn decision_map(cfg: &RunConfig) -> Result<Report> {
    let matrix = cfg.decision_matrix()?;
    let results = run_scenarios(&cfg.selected_scenarios()?, &cfg.ledger, cfg.volume, cfg.basis)?;
    let mut rep = bear_case_summary(&matrix, &cfg.ledger, &results)?;
    // The summary scores a burn with nothing retained; show the configured retention.
    let burn = TerminalState::new(TerminalKind::SilentBurn, cfg.mechanism.retention)?;
    for e in rep.effects.iter_mut().filter(|e| e.state == TerminalKind::SilentBurn) {
        *e = supply_effect(&burn, &cfg.ledger, e.bound.unwrap_or_default())?;
    }

    let mut ranking = Table::new(
        "Terminal-state ranking",
        &["terminal", "rank", "consistent", "weak", "supply_delta", "market_sign", "bound"],
    );
    for (i, (kind, e)) in rep.ranking.order.iter().zip(&rep.effects).enumerate() {
        let (c, w) = rep.ranking.scores[i];
        ranking.push(vec![
            Cell::text(kind.name()),
            Cell::Int(i as i64 + 1),
            Cell::Int(c as i64),
            Cell::Int(w as i64),
            Cell::Btc(e.delta_btc()),
            Cell::text(format!("{:?}", e.market_sign)),
            e.bound.map_or(Cell::text(""), |b| Cell::Pct(b, 1)),
        ]);
    }

    let mut grid = Table::new(
        "Consistency matrix",
        &["preference", "DormancyNonRecovery", "SilentBurn", "AdversarialSwitch", "PatientLiquidation"],
    );
    let mut rows = Vec::new();
    for pref in matrix.rows() {
        let mut row = vec![Cell::text(pref.name())];
        let mut marks = serde_json::Map::new();
        for kind in TerminalKind::ALL {
            let mark = matrix.get(pref, kind).expect("complete rows");
            row.push(Cell::text(mark.to_string()));
            marks.insert(kind.name().to_string(), to_value(&mark));
        }
        grid.push(row);
        rows.push(json!({ "preference": pref.name(), "marks": marks }));
    }

    let mut out =
        Report::new("decision-map", json!({ "summary": to_value(&rep), "matrix": rows })).table(ranking).table(grid);
    for (a, b) in &rep.ranking.ties {
        out = out.note(format!("{} and {} tie on score; declaration order breaks the tie", a.name(), b.name()));
    }
    if let Some(w) = &rep.worst_case {
        out = out.note(format!(
            "worst case: {} under scenario {} at {:.1}% to {:.1}%",
            w.state.name(),
            w.scenario,
            w.total_high * 100.0,
            w.total_low * 100.0
        ));
    }
    Ok(out
        .note(format!("bounded downside: {}", rep.bounded_downside))
        .note(format!("top two states non-bearish: {}", rep.non_bearish_plurality))
        .note(rep.note))
}

// ---------------------------------------------------------------- mechanism

#[derive(Subcommand, Debug)]
pub enum MechanismCommand {
    /// Split a hex secret into threshold shares (seeded).
    Split {
        /// Secret bytes as hex, 1-64 bytes.
        #[arg(long)]
        secret: String,
        /// Shares required to reconstruct.
        #[arg(short = 'k', long)]
        threshold: Option<usize>,
        /// Shares issued.
        #[arg(short = 'n', long)]
        shares: Option<usize>,
    },
    /// Reconstruct a secret from `index:hex` shares.
    Reconstruct {
        #[arg(short = 'k', long)]
        threshold: Option<usize>,
        #[arg(required = true)]
        shares: Vec<String>,
    },
    /// Replay a terminal disposition over the epoch clock.
    Simulate(SimulateArgs),
    /// Step the dead-man's switch through a list of events.
    Dms {
        #[arg(long)]
        grace: Option<u32>,
        #[arg(long)]
        action: Option<String>,
        /// heartbeat, elapsed or destroy.
        events: Vec<String>,
    },
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// dormancy, burn, adversarial or liquidation.
    #[arg(long)]
    pub terminal: String,
    /// Switch action (default: the one the terminal state requires).
    #[arg(long)]
    pub action: Option<String>,
    /// Days between heartbeats.
    #[arg(long)]
    pub interval: Option<u64>,
    /// Missed intervals tolerated before the switch fires.
    #[arg(long)]
    pub grace: Option<u32>,
    /// Last simulated day, inclusive.
    #[arg(long)]
    pub clock_horizon: Option<u64>,
    /// Last day on which the holder sends a heartbeat.
    #[arg(long)]
    pub last_heartbeat: Option<u64>,
    /// Fraction retained by a silent burn.
    #[arg(long)]
    pub retention: Option<f64>,
    /// Liquidation horizon in years for the tranche program.
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Release an adversarial switch through the tranche program instead
    /// of all at once.
    #[arg(long)]
    pub tranched: bool,
    /// Print every log entry (the default prints a summary).
    #[arg(long)]
    pub full_log: bool,
}

fn canonical_action(kind: TerminalKind) -> DmsAction {
    match kind {
        TerminalKind::DormancyNonRecovery => DmsAction::DestroyShards,
        TerminalKind::SilentBurn => DmsAction::ExecuteBurn,
        TerminalKind::AdversarialSwitch => DmsAction::PublishShards,
        TerminalKind::PatientLiquidation => DmsAction::ExecuteBurn,
    }
}

fn parse_event(s: &str) -> Result<DmsEvent> {
    match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
        "heartbeat" | "h" => Ok(DmsEvent::Heartbeat),
        "elapsed" | "intervalelapsed" | "missed" | "e" => Ok(DmsEvent::IntervalElapsed),
        "destroy" | "keydestruction" | "d" => Ok(DmsEvent::KeyDestruction),
        _ => Err(Error::Unknown { kind: "switch event", name: s.to_string() }),
    }
}

fn mechanism(cmd: &MechanismCommand, global: &Global, cfg: &RunConfig) -> Result<Report> {
    let mp = &cfg.mechanism;
    match cmd {
        MechanismCommand::Split { secret, threshold, shares } => {
            let bytes = hex::decode(secret.trim()).map_err(|_| Error::InvalidParameter("secret must be hex".into()))?;
            let (k, n) = (threshold.unwrap_or(mp.threshold), shares.unwrap_or(mp.shares));
            let split = split_seeded(&Secret::new(bytes)?, k, n, cfg.seed)?;
            let mut t = Table::new(format!("{k}-of-{n} shares"), &["index", "share"]);
            for s in &split {
                t.push(vec![Cell::Int(i64::from(s.index)), Cell::text(s.to_string())]);
            }
            let lines: Vec<String> = split.iter().map(ToString::to_string).collect();
            Ok(Report::new("mechanism split", json!({ "threshold": k, "shares": lines })).table(t))
        }
        MechanismCommand::Reconstruct { threshold, shares } => {
            let parsed = shares.iter().map(|s| s.parse::<Share>()).collect::<Result<Vec<_>>>()?;
            let k = threshold.unwrap_or(mp.threshold);
            let secret = reconstruct(&parsed, k)?;
            let hex = hex::encode(secret.as_bytes());
            let mut t = Table::new("Secret", &["threshold", "secret_hex"]);
            t.push(vec![Cell::Int(k as i64), Cell::text(&hex)]);
            Ok(Report::new("mechanism reconstruct", json!({ "threshold": k, "secret_hex": hex })).table(t))
        }
        MechanismCommand::Simulate(a) => simulate(a, global, cfg),
        MechanismCommand::Dms { grace, action, events } => {
            let action = match action {
                Some(s) => s.parse()?,
                None => mp.action,
            };
            let config = DmsConfig::new(mp.heartbeat_interval, grace.unwrap_or(mp.grace_missed), action)?;
            let events = events.iter().map(|e| parse_event(e)).collect::<Result<Vec<_>>>()?;
            let mut state = DmsState::Armed;
            let mut t = Table::new("Switch trace", &["step", "event", "state"]);
            t.push(vec![Cell::Int(0), Cell::text(""), Cell::text(state.to_string())]);
            let mut trace = vec![json!({ "step": 0, "state": state })];
            for (i, e) in events.iter().enumerate() {
                state = dms_step(state, &config, *e)?;
                t.push(vec![Cell::Int(i as i64 + 1), Cell::text(e.to_string()), Cell::text(state.to_string())]);
                trace.push(json!({ "step": i + 1, "event": e, "state": state }));
            }
            Ok(Report::new("mechanism dms", json!({ "config": config, "trace": trace })).table(t))
        }
    }
}

fn simulate(a: &SimulateArgs, global: &Global, cfg: &RunConfig) -> Result<Report> {
    let mp = &cfg.mechanism;
    let kind: TerminalKind = a.terminal.parse()?;
    let action = match &a.action {
        Some(s) => s.parse()?,
        // An explicit config decides; otherwise use what the state needs.
        None if global.config.is_some() => mp.action,
        None => canonical_action(kind),
    };
    let config =
        DmsConfig::new(a.interval.unwrap_or(mp.heartbeat_interval), a.grace.unwrap_or(mp.grace_missed), action)?;
    let retention = a.retention.unwrap_or(mp.retention);
    let terminal =
        if kind == TerminalKind::SilentBurn { TerminalState::new(kind, retention)? } else { TerminalState::of(kind) };
    let position = cfg.ledger.position();

    let program = match kind {
        TerminalKind::PatientLiquidation => true,
        TerminalKind::AdversarialSwitch => a.tranched,
        _ => false,
    }
    .then(|| schedule_for(cfg, position, a.horizon).and_then(|s| to_tranche_program(&s, mp.tranches_per_year, 0)))
    .transpose()?;

    let log = simulate_disposition(&DispositionInput {
        terminal,
        config,
        tranche_program: program.as_ref(),
        clock_horizon: a.clock_horizon.unwrap_or(mp.clock_horizon),
        position,
        last_heartbeat: a.last_heartbeat.unwrap_or(mp.last_heartbeat),
    })?;

    let mut summary = Table::new(
        "Disposition",
        &["terminal", "action", "final_state", "releases", "released", "burned", "destroyed", "supply_delta"],
    );
    summary.push(vec![
        Cell::text(kind.name()),
        Cell::text(action.to_string()),
        Cell::text(log.final_state.to_string()),
        Cell::Int(log.count(overhang_core::mechanism_sim::LogEvent::Release) as i64),
        Cell::btc(log.released),
        Cell::btc(log.burned),
        Cell::btc(log.destroyed),
        Cell::Btc(log.supply_delta_sats() as f64 / Btc::SATS_PER_BTC as f64),
    ]);
    let mut events = Table::new("Event log", &["epoch", "event", "amount"]);
    let shown: Box<dyn Iterator<Item = _>> = if a.full_log {
        Box::new(log.entries.iter())
    } else {
        // Heartbeats dominate long runs; keep everything else.
        Box::new(log.entries.iter().filter(|e| e.event != overhang_core::mechanism_sim::LogEvent::Heartbeat))
    };
    for e in shown {
        events.push(vec![
            Cell::Int(e.epoch as i64),
            Cell::text(to_value(&e.event).as_str().unwrap_or_default()),
            Cell::Btc(e.amount),
        ]);
    }
    let data = json!({
        "terminal": terminal,
        "config": config,
        "final_state": log.final_state,
        "released": log.released,
        "burned": log.burned,
        "destroyed": log.destroyed,
        "supply_delta_sats": log.supply_delta_sats(),
        "entries": log.entries,
    });
    let mut rep = Report::new("mechanism simulate", data).table(summary).table(events);
    if !a.full_log {
        rep = rep.note("heartbeat entries omitted; pass --full-log to include them");
    }
    Ok(rep)
}

// ---------------------------------------------------------------- anchors

fn anchors(cfg: &RunConfig) -> Result<Report> {
    let list = builtin_anchors();
    let mut t =
        Table::new("Anchor events", &["anchor", "amount", "observed_low", "observed_high", "execution", "note"]);
    for a in &list {
        let (lo, hi) = match a.observed_impact {
            Some((lo, hi)) => (Cell::Pct(lo, 1), Cell::Pct(hi, 1)),
            None => (Cell::text(""), Cell::text("")),
        };
        t.push(vec![
            Cell::text(&a.name),
            a.amount.map_or(Cell::text(""), Cell::btc),
            lo,
            hi,
            Cell::text(a.execution_class.as_str()),
            Cell::text(&a.note),
        ]);
    }
    let results = run_scenarios(&cfg.selected_scenarios()?, &cfg.ledger, cfg.volume, cfg.basis)?;
    let gap = friction_gap_check(&results, &list)?;
    let mut g = Table::new("Friction gap", &["adverse_to_disciplined_ratio", "within_3x_to_5x"]);
    g.push(vec![Cell::Num((gap.ratio * 1e3).round() / 1e3), Cell::text(gap.in_range.to_string())]);
    Ok(Report::new("anchors", json!({ "anchors": list, "friction_gap": gap }))
        .table(t)
        .table(g)
        .note(format!(
            "classification: total band touching above {:.0}% is near the tranche-auction anchor; reaching below {:.0}% is near the single-venue anchor",
            NEAR_SILK_ROAD_UPPER * 100.0,
            NEAR_GERMAN_LOWER * 100.0
        )))
}
