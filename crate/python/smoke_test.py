"""Smoke test for the `overhang` extension module.

Build and install it first, e.g.

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o target/wheels
    pip install --force-reinstall target/wheels/overhang-*.whl

then run `python python/smoke_test.py` (or `pytest python/`).
"""

import math

import overhang


def test_impact_table():
    rows = {eps: overhang.permanent_impact(0.07, eps) for eps in (1.5, 0.7, 0.3)}
    assert [round(v * 100, 1) for v in rows.values()] == [-4.4, -9.2, -20.2]
    for eps, v in rows.items():
        assert math.isclose(v, 1.07 ** (-1 / eps) - 1, rel_tol=1e-12)


def test_ledger_and_burn():
    ledger = overhang.SupplyLedger()
    assert ledger.position == 1_148_000
    assert ledger.position_share("effective") > ledger.position_share("nominal")
    burn = ledger.apply_burn(0.01)
    assert burn["burned"] == 1_136_520
    assert abs(burn["residual_value"] - 0.92e9) < 0.005e9


def test_scenarios_and_sweep():
    b = overhang.run_scenario("B")
    assert abs(b["total_low"] + 0.12) <= 0.006 and abs(b["total_high"] + 0.11) <= 0.006
    custom = overhang.run_scenario({"name": "D", "elasticity": 0.5, "quality": "mixed", "horizon": 8})
    assert custom["scenario_name"] == "D"
    sweep = overhang.sensitivity_sweep()
    assert sweep["max_abs_total"] <= 0.26 and sweep["min_abs_total"] >= 0.04


def test_schedule():
    s = overhang.build_uniform_schedule(horizon=10)
    assert s["annual_btc"] == 114_800
    assert round(s["participation"] * 100, 2) == 0.17
    tranches = overhang.tranche_program(horizon=5)
    assert sum(a for _, a in tranches) == 1_148_000


def test_frontier():
    model = overhang.desk_default_model()
    linear = overhang.optimal_trajectory(0.0, model)["holdings"]
    n = len(linear) - 1
    assert all(abs(x - model["total_units"] * (n - j) / n) < 1e-6 for j, x in enumerate(linear))
    points = overhang.frontier([0.0, 1e-6, 1e-5])
    assert points[0]["cost_variance"] > points[-1]["cost_variance"]


def test_sharing_and_switch():
    shares = overhang.split(b"dormant", 3, 5, seed=7)
    assert overhang.reconstruct(shares[2:], 3) == b"dormant"
    try:
        overhang.reconstruct(shares[:2], 3)
    except overhang.ComputationError:
        pass
    else:
        raise AssertionError("two shares should not reconstruct a 3-of-5 split")
    states = overhang.dms_run(["interval-elapsed"] * 3, grace=3, action="publish-shards")
    assert states[-1] == "triggered"
    assert overhang.timelock_spendable("relative", 10, now=15, confirmed_at=5)


def test_decision_space():
    assert overhang.rank_terminal_states() == [
        "DormancyNonRecovery",
        "SilentBurn",
        "AdversarialSwitch",
        "PatientLiquidation",
    ]
    log = overhang.simulate_disposition("dormancy", "destroy-shards")
    assert not any(e["event"] == "release" for e in log["entries"])
    summary = overhang.bear_case_summary()
    assert summary["non_bearish_plurality"]


def test_errors():
    for call, exc in [
        (lambda: overhang.permanent_impact(0.07, -1), overhang.ValidationError),
        (lambda: overhang.run_scenario("Z"), overhang.UnknownEntityError),
    ]:
        try:
            call()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok  {name}")
    print(f"{len(tests)} smoke tests passed")
