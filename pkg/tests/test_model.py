import math

import numpy as np
import pytest

from cehopt import model as m
from cehopt.catalog import TechnologyCatalog
from cehopt.errors import InfeasibleInstance, ModelSizeError
from cehopt.ingest import ScenarioSet
from cehopt.model import BuildOptions, build_problem, family_row_counts
from cehopt.presets import tiny_instance

from conftest import (
    make_bess,
    make_charger,
    make_economics,
    make_pv,
    make_scenario,
    make_session,
    make_wt,
)


def build(catalog, scenarios, econ=None, **opts):
    return build_problem(catalog, ScenarioSet(scenarios), econ or make_economics(),
                         BuildOptions(**opts))


def row_keys(problem, tag):
    return sorted(r.key for r in problem.rows_tagged(tag))


def test_session_start_windows(one_session_instance):
    # session parked slots 1..3 (3 slots), 300 kWh, 180 kW charger, 6 h slots:
    # 2 h of charging fits one slot, so starts 1..3 on both candidates
    catalog, scenarios, econ = one_session_instance
    problem, maps = build_problem(catalog, scenarios, econ)
    starts = [ref.index for ref in problem.variables if ref.kind == m.CHARGE_START]
    assert starts == [
        ("day", 0, "fast#1", 1), ("day", 0, "fast#1", 2), ("day", 0, "fast#1", 3),
        ("day", 0, "fast#2", 1), ("day", 0, "fast#2", 2), ("day", 0, "fast#2", 3),
    ]
    counts = family_row_counts(problem)
    assert counts["exactly_one_start"] == 1
    assert counts["charger_linking"] == 6
    # occupancy/charger power at covered slots only: slots 1..3 per candidate
    assert counts["occupancy"] == 6
    assert counts["charger_power"] == 6
    assert counts["symmetry_order"] == 1
    # copy #2 covering slot t needs copy #1 busy at t, for each start slot
    assert counts["symmetry_usage"] == 3


def test_multi_slot_session_window():
    # 3 parked slots, 2-slot charging task -> starts {1, 2}
    charger = make_charger(count=1)
    catalog = TechnologyCatalog(chargers=(charger,))
    scenario = make_scenario(
        n_slots=24, sessions=(make_session(arrival=5, departure=7, energy=300.0),))
    problem, maps = build(catalog, [scenario])
    starts = [ref.index[-1] for ref in problem.variables if ref.kind == m.CHARGE_START]
    assert starts == [1, 2]  # tau = ceil(300/180) = 2 h = 2 slots
    # tight window: tau equals the parked length -> exactly one start
    scenario = make_scenario(
        n_slots=24, sessions=(make_session(arrival=5, departure=6, energy=300.0),))
    problem, maps = build(catalog, [scenario])
    starts = [ref.index[-1] for ref in problem.variables if ref.kind == m.CHARGE_START]
    assert starts == [1]


def test_infeasible_session_raises():
    charger = make_charger(count=1)
    catalog = TechnologyCatalog(chargers=(charger,))
    scenario = make_scenario(
        n_slots=24, sessions=(make_session(arrival=5, departure=6, energy=900.0),))
    with pytest.raises(InfeasibleInstance):
        build(catalog, [scenario])


def test_bess_rows_match_recursion_values():
    bess = make_bess()
    catalog = TechnologyCatalog(bess=(bess,))
    scenario = make_scenario(n_slots=24)
    problem, maps = build(catalog, [scenario])

    init = problem.rows_tagged("soc_initial")[0]
    coefs = dict(zip(init.cols, init.coefs))
    assert coefs[maps.col(m.BESS_UNITS, "bat")] == pytest.approx(-290.0)

    # one hour at 100 kW with eta 0.95 from 290 kWh lands at 384.942 kWh
    rec = {r.key: r for r in problem.rows_tagged("soc_recursion")}
    row = rec[("day", "bat", 2)]
    c = dict(zip(row.cols, row.coefs))
    soc2 = maps.col(m.BESS_SOC, "day", "bat", 2)
    soc1 = maps.col(m.BESS_SOC, "day", "bat", 1)
    ch2 = maps.col(m.BESS_CHARGE, "day", "bat", 2)
    n_col = maps.col(m.BESS_UNITS, "bat")
    # E2 = E1 + 0.95*dt*ch - dt/0.95*dis - z*s*dt*n with dt = 1 h
    assert c[soc2] == 1.0
    assert c[soc1] == -1.0
    assert c[ch2] == pytest.approx(-0.95)
    assert c[n_col] == pytest.approx(1e-4 * 580.0)
    e2 = 290.0 + 0.95 * 100.0 * 1.0 - 1e-4 * 580.0 * 1.0  # n_b = 1
    assert e2 == pytest.approx(384.942)


def test_lossless_idle_battery_keeps_soc():
    bess = make_bess(self_dis=0.0, eff=1.0)
    catalog = TechnologyCatalog(bess=(bess,))
    scenario = make_scenario(n_slots=4)
    problem, maps = build(catalog, [scenario])
    row = {r.key: r for r in problem.rows_tagged("soc_recursion")}[("day", "bat", 3)]
    c = dict(zip(row.cols, row.coefs))
    n_col = maps.col(m.BESS_UNITS, "bat")
    assert c.get(n_col, 0.0) == 0.0  # no self-discharge term
    # idle flows: E3 = E2 exactly
    soc3 = maps.col(m.BESS_SOC, "day", "bat", 3)
    soc2 = maps.col(m.BESS_SOC, "day", "bat", 2)
    assert c[soc3] == 1.0 and c[soc2] == -1.0


def test_grid_bounds_are_column_bounds():
    catalog = TechnologyCatalog()
    scenario = make_scenario(n_slots=4, wdl=600.0, inj=800.0)
    problem, maps = build(catalog, [scenario])
    ref = problem.variables[maps.col(m.GRID_POWER, "day", 2)]
    assert ref.lower == -800.0
    assert ref.upper == 600.0
    counts = family_row_counts(problem)
    assert counts["price_relaxation_buy"] == 4
    assert counts["price_relaxation_sell"] == 4


def test_power_balance_coefficients():
    pv = make_pv()
    wt = make_wt()
    catalog = TechnologyCatalog(pv=(pv,), wt=(wt,))
    # rated wind at measurement height so that hub speed is above rated
    scenario = make_scenario(n_slots=4, irradiance=[0.0, 1.0, 0.5, 0.0],
                             wind=[13.0, 0.0, 0.0, 0.0])
    problem, maps = build(catalog, [scenario])
    rows = {r.key: r for r in problem.rows_tagged("power_balance")}
    npv = maps.col(m.PV_UNITS, "pv")
    nwt = maps.col(m.WT_UNITS, "wt")
    night = dict(zip(rows[("day", 1)].cols, rows[("day", 1)].coefs))
    noon = dict(zip(rows[("day", 2)].cols, rows[("day", 2)].coefs))
    assert night.get(npv, 0.0) == 0.0   # no irradiance at slot 1
    assert night[nwt] == pytest.approx(500.0)  # hub speed beyond rated
    assert noon[npv] == pytest.approx(0.516)
    assert noon.get(nwt, 0.0) == 0.0


def test_objective_charger_term():
    charger = make_charger(count=1)
    catalog = TechnologyCatalog(chargers=(charger,))
    scenario = make_scenario(n_slots=4, sessions=(make_session(),))
    problem, maps = build(catalog, [scenario])
    coef = problem.objective[maps.col(m.CHARGER_INSTALLED, "fast#1")]
    kappa = 0.11573972047114344
    assert coef == pytest.approx(kappa * 90_000.0 + 900.0, rel=1e-9)


def test_objective_weights_grid_cost_by_occurrence():
    catalog = TechnologyCatalog()
    a = make_scenario(sid="a", days=200, n_slots=4)
    b = make_scenario(sid="b", days=165, n_slots=4)
    problem, maps = build(catalog, [a, b])
    assert problem.objective[maps.col(m.GRID_COST, "a", 1)] == 200.0
    assert problem.objective[maps.col(m.GRID_COST, "b", 4)] == 165.0


def test_objective_degradation_term():
    bess = make_bess(deg=0.03)
    catalog = TechnologyCatalog(bess=(bess,))
    scenario = make_scenario(n_slots=4, days=365)
    problem, maps = build(catalog, [scenario])
    assert problem.objective[maps.col(m.BESS_CHARGE, "day", "bat", 2)] \
        == pytest.approx(365 * 0.03)
    assert problem.objective[maps.col(m.BESS_DISCHARGE, "day", "bat", 2)] \
        == pytest.approx(365 * 0.03)


def test_determinism_of_build():
    cat, scen, econ = tiny_instance(seed=5, n_scenarios=2, n_sessions=2)
    p1, m1 = build_problem(cat, scen, econ)
    p2, m2 = build_problem(cat, scen, econ)
    assert [v.key for v in p1.variables] == [v.key for v in p2.variables]
    assert [(r.cols, r.coefs, r.relation, r.rhs, r.tag) for r in p1.rows] \
        == [(r.cols, r.coefs, r.relation, r.rhs, r.tag) for r in p2.rows]
    assert p1.objective == p2.objective


def test_lint_passes_and_counts_close_form():
    rng = np.random.default_rng(9)
    for seed in range(4):
        cat, scen, econ = tiny_instance(seed=seed, n_scenarios=2, n_slots=6,
                                        n_sessions=int(rng.integers(0, 3)))
        problem, maps = build_problem(cat, scen, econ)
        problem.lint()
        counts = family_row_counts(problem)
        n_slots = scen.n_slots
        S = len(scen)
        B = len(cat.bess)
        x_cols = sum(1 for v in problem.variables if v.kind == m.CHARGE_START)
        sessions = sum(len(sc.sessions) for sc in scen)
        assert counts["charger_linking"] == x_cols
        assert counts["exactly_one_start"] == sessions
        assert counts["power_balance"] == S * n_slots
        assert counts["price_relaxation_buy"] == S * n_slots
        assert counts["soc_initial"] == S * B
        assert counts["soc_recursion"] == S * B * n_slots
        assert counts["soc_upper"] == S * B * n_slots
        assert counts["charge_cap"] == S * B * n_slots
        assert counts["exclusivity_charge"] == S * B * n_slots
        ncand = len(cat.candidate_chargers())
        per_type = {}
        for c in cat.candidate_chargers():
            per_type[c.type.id] = per_type.get(c.type.id, 0) + 1
        assert counts["symmetry_order"] == sum(v - 1 for v in per_type.values())
        # no row may mention one column twice (would be a hidden product)
        for row in problem.rows:
            assert len(set(row.cols)) == len(row.cols)


def test_model_size_cap():
    cat, scen, econ = tiny_instance(seed=0, n_sessions=1)
    with pytest.raises(ModelSizeError):
        build_problem(cat, scen, econ, BuildOptions(max_model_size=10))


def test_per_tech_bess_mode_flag():
    bess = make_bess()
    catalog = TechnologyCatalog(bess=(bess,))
    scenario = make_scenario(n_slots=4)
    shared, _ = build(catalog, [scenario])
    per_tech, _ = build(catalog, [scenario], per_tech_bess_mode=True)
    shared_modes = [v for v in shared.variables if v.kind == m.BESS_MODE]
    per_modes = [v for v in per_tech.variables if v.kind == m.BESS_MODE]
    assert len(shared_modes) == 4
    assert len(per_modes) == 4
    assert all(len(v.index) == 2 for v in shared_modes)   # (scenario, slot)
    assert all(len(v.index) == 3 for v in per_modes)      # (scenario, tech, slot)
