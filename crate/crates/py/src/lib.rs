//! Python bindings. Results come back as plain dicts and lists mirroring the
//! core types' JSON form; errors map onto three exception classes that match
//! the CLI's exit-code contract.

use overhang_core::config::RunConfig;
use overhang_core::decision_space::{self as ds, TerminalKind, TerminalState};
use overhang_core::exec_frontier::{self as ef, ExecutionModel};
use overhang_core::impact_model::{self as im, ElasticityModel, ExecutionQuality, OvershootParams};
use overhang_core::liquidation_schedule::{self as ls, ScheduleParams};
use overhang_core::mechanism_sim::{self as ms, DmsConfig, DmsEvent, DmsState, Secret, Share, TimelockCondition};
use overhang_core::scenario_engine::{self as se, Scenario, SweepGrid};
use overhang_core::supply_ledger::{self as sl, ShareBasis};
use overhang_core::{Btc, Error};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use pythonize::{depythonize, pythonize};
use serde::Serialize;

create_exception!(overhang, OverhangError, PyException, "Base class for all overhang errors.");
create_exception!(overhang, ValidationError, OverhangError, "An input failed validation.");
create_exception!(overhang, UnknownEntityError, OverhangError, "A named scenario, quality or state does not exist.");
create_exception!(overhang, ComputationError, OverhangError, "A well-formed request could not be computed.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        3 => UnknownEntityError::new_err(msg),
        4 => ComputationError::new_err(msg),
        _ => ValidationError::new_err(msg),
    }
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for overhang_core::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn out<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    Ok(pythonize(py, value)?)
}

fn btc(amount: f64) -> PyResult<Btc> {
    Btc::from_btc(amount).or_raise()
}

fn basis(name: &str) -> PyResult<ShareBasis> {
    match name.to_ascii_lowercase().as_str() {
        "effective" => Ok(ShareBasis::Effective),
        "nominal" => Ok(ShareBasis::Nominal),
        _ => Err(UnknownEntityError::new_err(format!("unknown share basis: {name}"))),
    }
}

fn elasticity(epsilon: f64) -> PyResult<ElasticityModel> {
    ElasticityModel::new(epsilon).or_raise()
}

fn quality(name: &str) -> PyResult<ExecutionQuality> {
    name.parse().or_raise()
}

/// Coin counts for the supply-shock arithmetic. Amounts are BTC and are
/// held internally as whole satoshis.
#[pyclass(name = "SupplyLedger", module = "overhang", frozen)]
struct PyLedger(sl::SupplyLedger);

#[pymethods]
impl PyLedger {
    #[new]
    #[pyo3(signature = (total_mined = 20_010_000.0, lost_estimate = 3_700_000.0, position = 1_148_000.0, reference_price = 80_000.0))]
    fn new(total_mined: f64, lost_estimate: f64, position: f64, reference_price: f64) -> PyResult<Self> {
        sl::SupplyLedger::new(btc(total_mined)?, btc(lost_estimate)?, btc(position)?, reference_price)
            .map(PyLedger)
            .or_raise()
    }

    #[getter]
    fn total_mined(&self) -> f64 {
        self.0.total_mined().as_btc()
    }

    #[getter]
    fn lost_estimate(&self) -> f64 {
        self.0.lost_estimate().as_btc()
    }

    #[getter]
    fn position(&self) -> f64 {
        self.0.position().as_btc()
    }

    #[getter]
    fn reference_price(&self) -> f64 {
        self.0.reference_price()
    }

    fn effective_float(&self) -> f64 {
        sl::effective_float(&self.0).as_btc()
    }

    #[pyo3(signature = (basis = "effective"))]
    fn position_share(&self, basis: &str) -> PyResult<f64> {
        Ok(sl::position_share(&self.0, self::basis(basis)?))
    }

    fn gross_value(&self) -> f64 {
        sl::gross_value(&self.0)
    }

    /// Burns all but `retention` of the position. Returns burned, residual,
    /// residual_value and the ledger after the burn.
    fn apply_burn<'py>(&self, py: Python<'py>, retention: f64) -> PyResult<Bound<'py, PyAny>> {
        out(py, &sl::apply_burn(&self.0, retention).or_raise()?)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        out(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "SupplyLedger(total_mined={}, lost_estimate={}, position={}, reference_price={})",
            self.0.total_mined(),
            self.0.lost_estimate(),
            self.0.position(),
            self.0.reference_price()
        )
    }
}

fn ledger_or_default(ledger: Option<&Bound<'_, PyLedger>>) -> sl::SupplyLedger {
    ledger.map_or_else(sl::SupplyLedger::default, |l| l.get().0)
}

// ---------------------------------------------------------------- impact

#[pyfunction]
fn permanent_impact(shift: f64, epsilon: f64) -> PyResult<f64> {
    im::permanent_impact(shift, &elasticity(epsilon)?).or_raise()
}

#[pyfunction]
fn small_shift_approx(shift: f64, epsilon: f64) -> PyResult<f64> {
    im::small_shift_approx(shift, &elasticity(epsilon)?).or_raise()
}

/// Friction band in percentage points for an execution quality and daily
/// participation rate.
#[pyfunction]
fn friction_band<'py>(py: Python<'py>, quality: &str, participation: f64) -> PyResult<Bound<'py, PyAny>> {
    out(py, &im::friction_band(self::quality(quality)?, participation).or_raise()?)
}

#[pyfunction]
fn combine<'py>(py: Python<'py>, permanent: f64, low: f64, high: f64) -> PyResult<Bound<'py, PyAny>> {
    let band = im::FrictionBand::new(low, high).or_raise()?;
    out(py, &im::combine(permanent, band))
}

#[pyfunction]
fn relative_impact_with_growth(shift: f64, epsilon: f64, growth_path: Vec<f64>, periods: usize) -> PyResult<f64> {
    im::relative_impact_with_growth(shift, &elasticity(epsilon)?, &growth_path, periods).or_raise()
}

/// `(day, price multiplier)` pairs for a transient overshoot.
#[pyfunction]
#[pyo3(signature = (total, magnitude = im::DEFAULT_OVERSHOOT_MAGNITUDE, half_life = im::DEFAULT_OVERSHOOT_HALF_LIFE, horizon = 60))]
fn overshoot_path(total: f64, magnitude: f64, half_life: f64, horizon: u32) -> PyResult<Vec<(u32, f64)>> {
    im::overshoot_path(total, &OvershootParams::new(magnitude, half_life).or_raise()?, horizon).or_raise()
}

// ---------------------------------------------------------------- schedule

fn schedule_params(position: f64, horizon: f64, price: f64, volume: f64) -> PyResult<ScheduleParams> {
    let mut p = ScheduleParams::new(btc(position)?, horizon);
    p.price = price;
    p.reference_daily_volume = volume;
    Ok(p)
}

#[pyfunction]
#[pyo3(signature = (position = 1_148_000.0, horizon = 10.0, price = 80_000.0, volume = 15e9))]
fn build_uniform_schedule<'py>(
    py: Python<'py>,
    position: f64,
    horizon: f64,
    price: f64,
    volume: f64,
) -> PyResult<Bound<'py, PyAny>> {
    out(py, &ls::build_uniform_schedule(&schedule_params(position, horizon, price, volume)?).or_raise()?)
}

/// Tranches as `(unlock_day, amount_btc)` pairs.
#[pyfunction]
#[pyo3(signature = (position = 1_148_000.0, horizon = 10.0, granularity = 1, start = 0))]
fn tranche_program(position: f64, horizon: f64, granularity: u32, start: u64) -> PyResult<Vec<(u64, f64)>> {
    let s = ls::build_uniform_schedule(&schedule_params(position, horizon, 80_000.0, 15e9)?).or_raise()?;
    let prog = ls::to_tranche_program(&s, granularity, start).or_raise()?;
    Ok(prog.tranches().iter().map(|t| (t.unlock.earliest_epoch(0), t.amount.as_btc())).collect())
}

// ---------------------------------------------------------------- scenarios

#[pyfunction]
fn builtin_scenarios<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    out(py, &se::builtin_scenarios())
}

#[pyfunction]
fn builtin_anchors<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    out(py, &se::builtin_anchors())
}

/// Runs a built-in scenario by name, or a scenario given as a dict with
/// name, elasticity, quality, horizon and optional overshoot.
#[pyfunction]
#[pyo3(signature = (scenario, ledger = None, volume = 15e9, basis = "effective"))]
fn run_scenario<'py>(
    py: Python<'py>,
    scenario: &Bound<'py, PyAny>,
    ledger: Option<&Bound<'py, PyLedger>>,
    volume: f64,
    basis: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let s: Scenario = match scenario.extract::<String>() {
        Ok(name) => se::builtin_scenario(&name).or_raise()?,
        Err(_) => depythonize(scenario).map_err(|e| ValidationError::new_err(e.to_string()))?,
    };
    s.validate().or_raise()?;
    let r = se::run_scenario_with_basis(&s, &ledger_or_default(ledger), volume, self::basis(basis)?).or_raise()?;
    out(py, &r)
}

#[pyfunction]
#[pyo3(signature = (epsilons = None, qualities = None, horizons = None, ledger = None, volume = 15e9, allow_out_of_range = false))]
fn sensitivity_sweep<'py>(
    py: Python<'py>,
    epsilons: Option<Vec<f64>>,
    qualities: Option<Vec<String>>,
    horizons: Option<Vec<f64>>,
    ledger: Option<&Bound<'py, PyLedger>>,
    volume: f64,
    allow_out_of_range: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mut grid = SweepGrid::default();
    if let Some(e) = epsilons {
        grid.epsilons = e;
    }
    if let Some(q) = qualities {
        grid.qualities = q.iter().map(|s| quality(s)).collect::<PyResult<_>>()?;
    }
    if let Some(h) = horizons {
        grid.horizons = h;
    }
    grid.allow_out_of_range = allow_out_of_range;
    out(py, &se::sensitivity_sweep(&grid, &ledger_or_default(ledger), volume).or_raise()?)
}

// ---------------------------------------------------------------- frontier

fn model_from(model: Option<&Bound<'_, PyAny>>) -> PyResult<ExecutionModel> {
    match model {
        None => Ok(ExecutionModel::desk_default()),
        Some(m) => depythonize(m).map_err(|e| ValidationError::new_err(e.to_string())),
    }
}

/// The reference execution model as a dict; edit and pass back as `model`.
#[pyfunction]
fn desk_default_model<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    out(py, &ExecutionModel::desk_default())
}

#[pyfunction]
#[pyo3(signature = (risk_aversion = None, model = None))]
fn optimal_trajectory<'py>(
    py: Python<'py>,
    risk_aversion: Option<f64>,
    model: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut m = model_from(model)?;
    if let Some(l) = risk_aversion {
        m = m.with_risk_aversion(l);
    }
    out(py, &ef::optimal_trajectory(&m).or_raise()?)
}

#[pyfunction]
#[pyo3(signature = (holdings, model = None))]
fn cost_of(holdings: Vec<f64>, model: Option<&Bound<'_, PyAny>>) -> PyResult<(f64, f64)> {
    ef::cost_of(&holdings, &model_from(model)?).or_raise()
}

#[pyfunction]
#[pyo3(signature = (lambdas, model = None))]
fn frontier<'py>(py: Python<'py>, lambdas: Vec<f64>, model: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    out(py, &ef::frontier(&model_from(model)?, &lambdas).or_raise()?)
}

// ---------------------------------------------------------------- mechanisms

/// Splits `secret` into `n` shares, any `k` of which reconstruct it.
/// Shares are `index:hex` strings.
#[pyfunction]
#[pyo3(signature = (secret, k, n, seed = 0))]
fn split(secret: Vec<u8>, k: usize, n: usize, seed: u64) -> PyResult<Vec<String>> {
    let shares = ms::split_seeded(&Secret::new(secret).or_raise()?, k, n, seed).or_raise()?;
    Ok(shares.iter().map(ToString::to_string).collect())
}

#[pyfunction]
fn reconstruct<'py>(py: Python<'py>, shares: Vec<String>, k: usize) -> PyResult<Bound<'py, PyBytes>> {
    let parsed = shares.iter().map(|s| s.parse::<Share>()).collect::<overhang_core::Result<Vec<_>>>().or_raise()?;
    let secret = ms::reconstruct(&parsed, k).or_raise()?;
    Ok(PyBytes::new(py, secret.as_bytes()))
}

/// `kind` is "absolute" (spendable from epoch `value`) or "relative"
/// (spendable `value` epochs after confirmation).
#[pyfunction]
#[pyo3(signature = (kind, value, now, confirmed_at = 0))]
fn timelock_spendable(kind: &str, value: u64, now: u64, confirmed_at: u64) -> PyResult<bool> {
    let cond = match kind.to_ascii_lowercase().as_str() {
        "absolute" => TimelockCondition::Absolute(value),
        "relative" => TimelockCondition::Relative(value),
        _ => return Err(UnknownEntityError::new_err(format!("unknown timelock kind: {kind}"))),
    };
    Ok(ms::timelock_spendable(cond, now, confirmed_at))
}

fn dms_config(interval: u64, grace: u32, action: &str) -> PyResult<DmsConfig> {
    DmsConfig::new(interval, grace, action.parse().or_raise()?).or_raise()
}

/// Feeds events ("heartbeat", "interval-elapsed", "key-destruction") to a
/// freshly armed switch and returns the state after each one.
#[pyfunction]
#[pyo3(signature = (events, grace = 3, action = "destroy-shards", interval = 30))]
fn dms_run<'py>(
    py: Python<'py>,
    events: Vec<String>,
    grace: u32,
    action: &str,
    interval: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = dms_config(interval, grace, action)?;
    let mut state = DmsState::Armed;
    let mut trace = Vec::with_capacity(events.len());
    for e in &events {
        let ev: DmsEvent = pythonize::depythonize(&pyo3::types::PyString::new(py, e))
            .map_err(|_| UnknownEntityError::new_err(format!("unknown switch event: {e}")))?;
        state = ms::dms_step(state, &cfg, ev).or_raise()?;
        trace.push(state);
    }
    out(py, &trace)
}

fn terminal(kind: &str, retention: f64) -> PyResult<TerminalState> {
    let kind: TerminalKind = kind.parse().or_raise()?;
    if kind == TerminalKind::SilentBurn {
        TerminalState::new(kind, retention).or_raise()
    } else {
        Ok(TerminalState::of(kind))
    }
}

/// Replays a terminal disposition. `tranches_per_year` builds a tranche
/// program over `horizon` years for liquidating dispositions; pass 0 to
/// release an adversarial switch all at once.
#[pyfunction]
#[pyo3(signature = (
    terminal_state, action, ledger = None, interval = 30, grace = 3, clock_horizon = 7300,
    last_heartbeat = 3650, retention = 0.01, horizon = 10.0, tranches_per_year = 1
))]
#[allow(clippy::too_many_arguments)]
fn simulate_disposition<'py>(
    py: Python<'py>,
    terminal_state: &str,
    action: &str,
    ledger: Option<&Bound<'py, PyLedger>>,
    interval: u64,
    grace: u32,
    clock_horizon: u64,
    last_heartbeat: u64,
    retention: f64,
    horizon: f64,
    tranches_per_year: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let state = terminal(terminal_state, retention)?;
    let ledger = ledger_or_default(ledger);
    let liquidating = matches!(state.kind, TerminalKind::PatientLiquidation | TerminalKind::AdversarialSwitch);
    let program = if liquidating && tranches_per_year > 0 {
        let mut p = ScheduleParams::new(ledger.position(), horizon);
        p.price = ledger.reference_price();
        let s = ls::build_uniform_schedule(&p).or_raise()?;
        Some(ls::to_tranche_program(&s, tranches_per_year, 0).or_raise()?)
    } else {
        None
    };
    let log = ms::simulate_disposition(&ms::DispositionInput {
        terminal: state,
        config: dms_config(interval, grace, action)?,
        tranche_program: program.as_ref(),
        clock_horizon,
        position: ledger.position(),
        last_heartbeat,
    })
    .or_raise()?;

    #[derive(Serialize)]
    struct Log<'a> {
        entries: &'a [ms::LogEntry],
        final_state: DmsState,
        released: Btc,
        burned: Btc,
        destroyed: Btc,
        supply_delta_sats: i64,
    }
    out(
        py,
        &Log {
            entries: &log.entries,
            final_state: log.final_state,
            released: log.released,
            burned: log.burned,
            destroyed: log.destroyed,
            supply_delta_sats: log.supply_delta_sats(),
        },
    )
}

// ---------------------------------------------------------------- decision space

/// Terminal states best to worst under the built-in consistency matrix.
#[pyfunction]
fn rank_terminal_states() -> Vec<&'static str> {
    ds::rank_terminal_states(&ds::consistency_matrix()).order.iter().map(|k| k.name()).collect()
}

/// `{preference: {terminal: mark}}` for the built-in matrix.
#[pyfunction]
fn consistency_matrix<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let m = ds::consistency_matrix();
    let rows: std::collections::BTreeMap<String, std::collections::BTreeMap<&str, ds::Mark>> = m
        .rows()
        .map(|p| {
            (p.name().to_string(), TerminalKind::ALL.iter().filter_map(|k| Some((k.name(), m.get(p, *k)?))).collect())
        })
        .collect();
    out(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (terminal_state, retention = 0.0, ledger = None, bear_bound = -0.25))]
fn supply_effect<'py>(
    py: Python<'py>,
    terminal_state: &str,
    retention: f64,
    ledger: Option<&Bound<'py, PyLedger>>,
    bear_bound: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let state = terminal(terminal_state, retention)?;
    out(py, &ds::supply_effect(&state, &ledger_or_default(ledger), bear_bound).or_raise()?)
}

/// Ranking, supply effects and worst case over the built-in scenarios.
#[pyfunction]
#[pyo3(signature = (ledger = None, volume = 15e9))]
fn bear_case_summary<'py>(
    py: Python<'py>,
    ledger: Option<&Bound<'py, PyLedger>>,
    volume: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let ledger = ledger_or_default(ledger);
    let results = se::run_scenarios(&se::builtin_scenarios(), &ledger, volume, ShareBasis::Effective).or_raise()?;
    out(py, &ds::bear_case_summary(&ds::consistency_matrix(), &ledger, &results).or_raise()?)
}

/// Parses a run configuration (text or JSON) into a dict.
#[pyfunction]
fn load_config<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    out(py, &RunConfig::load(text).or_raise()?)
}

#[pymodule]
fn overhang(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("OverhangError", py.get_type::<OverhangError>())?;
    m.add("ValidationError", py.get_type::<ValidationError>())?;
    m.add("UnknownEntityError", py.get_type::<UnknownEntityError>())?;
    m.add("ComputationError", py.get_type::<ComputationError>())?;
    m.add_class::<PyLedger>()?;
    m.add_function(wrap_pyfunction!(permanent_impact, m)?)?;
    m.add_function(wrap_pyfunction!(small_shift_approx, m)?)?;
    m.add_function(wrap_pyfunction!(friction_band, m)?)?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(relative_impact_with_growth, m)?)?;
    m.add_function(wrap_pyfunction!(overshoot_path, m)?)?;
    m.add_function(wrap_pyfunction!(build_uniform_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(tranche_program, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_anchors, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(desk_default_model, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(cost_of, m)?)?;
    m.add_function(wrap_pyfunction!(frontier, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(timelock_spendable, m)?)?;
    m.add_function(wrap_pyfunction!(dms_run, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_disposition, m)?)?;
    m.add_function(wrap_pyfunction!(rank_terminal_states, m)?)?;
    m.add_function(wrap_pyfunction!(consistency_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(supply_effect, m)?)?;
    m.add_function(wrap_pyfunction!(bear_case_summary, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    Ok(())
}
