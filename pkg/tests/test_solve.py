import numpy as np
import pytest

from cehopt.catalog import TechnologyCatalog
from cehopt.errors import BackendUnavailable
from cehopt.ingest import ScenarioSet
from cehopt.model import build_problem
from cehopt.presets import tiny_instance, yearly_instance
from cehopt.solve import SolveOptions, Status, solve

from conftest import make_charger, make_economics, make_scenario, make_session


def test_zero_demand_instance_is_free():
    catalog = TechnologyCatalog(chargers=(make_charger(count=1),))
    problem, maps = build_problem(catalog, ScenarioSet([make_scenario(n_slots=4)]),
                                  make_economics())
    outcome = solve(problem)
    assert outcome.status is Status.OPTIMAL
    assert outcome.objective == pytest.approx(0.0, abs=1e-9)
    assert np.all(outcome.column_values == 0.0)


def test_infeasible_when_grid_cannot_carry_load():
    # one 180 kW session, 50 kW withdrawal limit, nothing else to generate from
    catalog = TechnologyCatalog(chargers=(make_charger(count=1),))
    scenario = make_scenario(n_slots=4, wdl=50.0, inj=50.0,
                             sessions=(make_session(energy=300.0),))
    problem, maps = build_problem(catalog, ScenarioSet([scenario]), make_economics())
    outcome = solve(problem)
    assert outcome.status is Status.INFEASIBLE
    assert outcome.column_values is None


def test_time_limit_status():
    cat, scen, econ = yearly_instance(seed=2)
    problem, maps = build_problem(cat, scen, econ)
    outcome = solve(problem, SolveOptions(time_limit_s=0.01))
    assert outcome.status in (Status.TIME_LIMIT, Status.FEASIBLE)


def test_unknown_backend():
    cat, scen, econ = tiny_instance(seed=0)
    problem, maps = build_problem(cat, scen, econ)
    with pytest.raises(BackendUnavailable):
        solve(problem, SolveOptions(backend_id="does-not-exist"))


def test_optimal_bound_consistency():
    cat, scen, econ = tiny_instance(seed=4, n_sessions=2)
    problem, maps = build_problem(cat, scen, econ)
    outcome = solve(problem)
    assert outcome.status is Status.OPTIMAL
    assert outcome.bound is not None
    tol = 1e-6 * max(1.0, abs(outcome.objective)) + 1e-7
    assert abs(outcome.objective - outcome.bound) <= tol


def test_integer_columns_are_integral():
    cat, scen, econ = tiny_instance(seed=6, n_sessions=2)
    problem, maps = build_problem(cat, scen, econ)
    outcome = solve(problem)
    for j, ref in enumerate(problem.variables):
        if ref.is_integral:
            assert outcome.column_values[j] == round(outcome.column_values[j])


def test_deterministic_repeat_solves():
    cat, scen, econ = tiny_instance(seed=8, n_sessions=2)
    problem, maps = build_problem(cat, scen, econ)
    a = solve(problem)
    b = solve(problem)
    assert a.objective == b.objective
    assert np.array_equal(a.column_values, b.column_values)
