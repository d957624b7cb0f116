import numpy as np
import pytest

from cehopt.errors import (
    CalendarMismatch,
    InvariantViolation,
    MissingFile,
    SchemaViolation,
    SessionWindowError,
)
from cehopt.ingest import (
    ChargingSession,
    DemandProfile,
    GridContract,
    MonthlyWeather,
    ScenarioSet,
    build_scenarios,
    count_month_days,
    load_inputs,
    write_inputs,
)
from cehopt.presets import tiny_instance, yearly_instance

from conftest import make_grid, make_scenario, make_session


def roundtrip(tmp_path, catalog, scenarios, econ):
    config = write_inputs(catalog, scenarios, econ, tmp_path)
    return load_inputs(config)


def test_roundtrip_is_bit_exact(tmp_path):
    catalog, scenarios, econ = tiny_instance(seed=3, n_scenarios=2, n_sessions=2)
    cat2, scen2, econ2 = roundtrip(tmp_path, catalog, scenarios, econ)
    assert cat2 == catalog
    assert scen2 == scenarios
    assert econ2.discount_rate == econ.discount_rate
    assert econ2.lifetimes_years == econ.lifetimes_years
    for sc, sc2 in zip(scenarios, scen2):
        assert np.array_equal(sc.irradiance_kw_m2, sc2.irradiance_kw_m2)
        assert np.array_equal(sc.grid.buy_price, sc2.grid.buy_price)
        assert sc.sessions == sc2.sessions


def test_case_study_shape_loads(tmp_path):
    catalog, scenarios, econ = yearly_instance(seed=1)
    cat2, scen2, econ2 = roundtrip(tmp_path, catalog, scenarios, econ)
    assert len(scen2) == 24
    assert scen2.n_slots == 24
    assert scen2.delta_t_h == 1.0
    assert scen2.total_days == 365
    assert scen2 == scenarios


def test_zero_sessions_everywhere_is_valid(tmp_path):
    catalog, scenarios, econ = tiny_instance(seed=0, n_sessions=0)
    cat2, scen2, _ = roundtrip(tmp_path, catalog, scenarios, econ)
    assert all(not sc.sessions for sc in scen2)


def test_missing_config_file():
    with pytest.raises(MissingFile):
        load_inputs("/nonexistent/config.yaml")


def test_missing_series_file(tmp_path):
    catalog, scenarios, econ = tiny_instance(seed=0)
    config = write_inputs(catalog, scenarios, econ, tmp_path)
    (tmp_path / "series" / "d0_irradiance.csv").unlink()
    with pytest.raises(MissingFile):
        load_inputs(config)


def test_schema_violation_names_location(tmp_path):
    catalog, scenarios, econ = tiny_instance(seed=0)
    config = write_inputs(catalog, scenarios, econ, tmp_path)
    text = config.read_text().replace("discount_rate", "discount")
    config.write_text(text)
    with pytest.raises(SchemaViolation, match="discount_rate"):
        load_inputs(config)


def test_equal_buy_sell_price_rejected_with_slot():
    with pytest.raises(InvariantViolation, match="slot 3"):
        make_grid(4, buy=[0.3, 0.3, 0.2, 0.3], sell=[0.1, 0.1, 0.2, 0.1])


def test_session_window_errors():
    with pytest.raises(SessionWindowError):
        make_session(arrival=3, departure=3)
    with pytest.raises(SessionWindowError):
        make_session(arrival=4, departure=2)
    with pytest.raises(SessionWindowError):
        # departs beyond the 4-slot day
        make_scenario(sessions=(make_session(arrival=2, departure=5),))


def test_negative_weather_rejected():
    with pytest.raises(InvariantViolation):
        make_scenario(irradiance=[0.1, -0.2, 0.1, 0.0])
    with pytest.raises(InvariantViolation):
        make_scenario(wind=[1.0, 2.0, -1.0, 0.0])


def test_day_length_invariant():
    with pytest.raises(InvariantViolation, match="24 h"):
        make_scenario(n_slots=5).__class__(
            id="bad", occurrence_days=365, delta_t_h=1.0,
            irradiance_kw_m2=np.zeros(5), wind_speed_ms=np.zeros(5),
            grid=make_grid(5))


def test_occurrence_factor_must_be_whole_days():
    with pytest.raises(InvariantViolation):
        make_scenario(days=1.5)
    with pytest.raises(InvariantViolation):
        make_scenario(days=-1)


def test_scenario_set_total_days():
    a = make_scenario(sid="a", days=200)
    b = make_scenario(sid="b", days=165)
    assert ScenarioSet([a, b]).total_days == 365
    with pytest.raises(InvariantViolation, match="sum to 360"):
        ScenarioSet([make_scenario(sid="a", days=200), make_scenario(sid="b", days=160)])


def test_scenario_set_leap_year_warns_not_errors(caplog):
    a = make_scenario(sid="a", days=200)
    b = make_scenario(sid="b", days=166)
    with caplog.at_level("WARNING"):
        sset = ScenarioSet([a, b], year_days=365)
    assert sset.total_days == 366
    assert any("366" in rec.message for rec in caplog.records)


def test_scenario_set_rejects_mixed_grids():
    a = make_scenario(sid="a", days=200, n_slots=4)
    b = make_scenario(sid="b", days=165, n_slots=6)
    with pytest.raises(InvariantViolation):
        ScenarioSet([a, b])


def test_sessions_without_chargers_rejected(tmp_path):
    catalog, scenarios, econ = tiny_instance(seed=0, n_sessions=1)
    assert any(sc.sessions for sc in scenarios)
    stripped = type(catalog)(pv=catalog.pv, wt=catalog.wt, bess=catalog.bess,
                             chargers=())
    config = write_inputs(stripped, scenarios, econ, tmp_path)
    with pytest.raises(InvariantViolation, match="charger"):
        load_inputs(config)


# calendar-paired builder


def _builder_inputs(n_demand=24, year=2024):
    weather = []
    demand = []
    for month in range(1, 13):
        weather.append(MonthlyWeather(
            month=month,
            irradiance_kw_m2=tuple(np.zeros(4)),
            wind_speed_ms=tuple(np.zeros(4)),
            grid=make_grid(4),
        ))
        for kind in ("weekday", "weekend"):
            demand.append(DemandProfile(month=month, day_kind=kind, sessions=()))
    return weather, demand[:n_demand]


def test_count_month_days_january_2024():
    weekdays, weekend = count_month_days(2024, 1)
    assert weekdays == 23
    assert weekend == 8


def test_build_scenarios_calendar_2024():
    weather, demand = _builder_inputs()
    sset = build_scenarios(weather, demand, delta_t_h=6.0, year=2024)
    assert len(sset) == 24
    assert sset.total_days == 366  # 2024 is a leap year
    jan_weekday = next(sc for sc in sset if sc.id == "2024-01-weekday")
    assert jan_weekday.occurrence_days == 23


def test_build_scenarios_non_leap_year_sums_365():
    weather, demand = _builder_inputs()
    sset = build_scenarios(weather, demand, delta_t_h=6.0, year=2025)
    assert sset.total_days == 365


def test_build_scenarios_accepts_zero_irradiance_month():
    weather, demand = _builder_inputs()
    sset = build_scenarios(weather, demand, delta_t_h=6.0, year=2024)
    assert all(np.all(sc.irradiance_kw_m2 == 0.0) for sc in sset)


def test_build_scenarios_coverage_check():
    weather, demand = _builder_inputs(n_demand=23)
    with pytest.raises(CalendarMismatch, match="missing"):
        build_scenarios(weather, demand, delta_t_h=6.0, year=2024)
    with pytest.raises(CalendarMismatch):
        build_scenarios(weather[:11], _builder_inputs()[1], delta_t_h=6.0, year=2024)
