import math

import numpy as np
import pytest

from cehopt.catalog import (
    capital_recovery_factor,
    charging_duration_slots,
    check_session_feasibility,
    duration_slots,
    effective_rate,
    pv_unit_power,
    scale_wind_speed,
    wt_unit_power,
)
from cehopt.errors import ConfigError, InfeasibleSession

from conftest import make_charger, make_pv, make_session, make_wt

# frozen against a 40-digit decimal evaluation of r(1+r)^L / ((1+r)^L - 1)
KAPPA_0275_10 = 0.11573972047114344
KAPPA_0275_20 = 0.065671730606068974


def test_pv_unit_power_case_study_values():
    pv = make_pv()
    assert pv_unit_power(pv, 1.0) == pytest.approx(0.516, abs=1e-12)
    assert pv_unit_power(pv, 0.0) == 0.0
    assert pv_unit_power(pv, 0.5) == pytest.approx(0.258, abs=1e-12)


def test_pv_unit_power_linear_in_irradiance():
    pv = make_pv()
    rng = np.random.default_rng(7)
    for _ in range(50):
        g = float(rng.uniform(0.0, 1.3))
        a = float(rng.uniform(0.0, 5.0))
        assert pv_unit_power(pv, a * g) == pytest.approx(a * pv_unit_power(pv, g),
                                                         rel=1e-12)


def test_pv_rejects_negative_irradiance():
    with pytest.raises(ConfigError):
        pv_unit_power(make_pv(), -0.1)


def test_scale_wind_speed_power_law():
    wt = make_wt()
    # 5 * 6^0.143
    assert scale_wind_speed(wt, 5.0) == pytest.approx(5.0 * 6.0**0.143, rel=1e-12)
    assert scale_wind_speed(wt, 0.0) == 0.0


def test_scale_wind_speed_identity_at_equal_heights():
    import dataclasses
    wt = dataclasses.replace(make_wt(), hub_height_m=10.0, measurement_height_m=10.0)
    assert scale_wind_speed(wt, 7.3) == pytest.approx(7.3, rel=1e-12)


def test_wt_power_rated_and_cut_in():
    wt = make_wt()
    assert wt_unit_power(wt, 13.0) == pytest.approx(500.0, rel=1e-12)
    assert wt_unit_power(wt, 2.9) == 0.0
    assert wt_unit_power(wt, 20.0) == pytest.approx(500.0)
    assert wt_unit_power(wt, 20.0001) == 0.0
    # cubic branch scales as (v / v_rated)^3
    assert wt_unit_power(wt, 6.5) == pytest.approx(500.0 * (6.5 / 13.0) ** 3, rel=1e-9)


def test_wt_power_continuous_at_rated_speed():
    wt = make_wt()
    eps = 1e-6
    assert abs(wt_unit_power(wt, 13.0 - eps) - wt_unit_power(wt, 13.0)) < 1e-3


def test_wt_power_never_exceeds_rated():
    wt = make_wt()
    rng = np.random.default_rng(3)
    for v in rng.uniform(0.0, 2.0 * wt.cut_out_ms, 200):
        assert wt_unit_power(wt, float(v)) <= wt.rated_power_kw + 1e-9


def test_capital_recovery_factor_values():
    assert capital_recovery_factor(0.0275, 10) == pytest.approx(KAPPA_0275_10, abs=1e-9)
    assert capital_recovery_factor(0.0275, 20) == pytest.approx(KAPPA_0275_20, abs=1e-9)


def test_capital_recovery_factor_limits_and_bounds():
    assert capital_recovery_factor(0.0275, 500) - 0.0275 < 1e-6
    rng = np.random.default_rng(11)
    for _ in range(100):
        r = float(rng.uniform(1e-4, 0.3))
        years = float(rng.uniform(1.0, 60.0))
        kappa = capital_recovery_factor(r, years)
        assert kappa > r
        assert kappa * years > 1.0


def test_capital_recovery_factor_rejects_degenerate_inputs():
    with pytest.raises(ConfigError):
        capital_recovery_factor(0.0, 10)
    with pytest.raises(ConfigError):
        capital_recovery_factor(0.05, 0.5)


def test_effective_rate_min_of_vehicle_and_charger():
    session = make_session(rate=400.0)
    assert effective_rate(session, make_charger(power=180.0)) == 180.0
    assert effective_rate(session, make_charger(power=360.0)) == 360.0
    assert effective_rate(make_session(rate=180.0), make_charger(power=180.0)) == 180.0


def test_charging_duration_slots():
    ch180 = make_charger(power=180.0)
    ch360 = make_charger(power=360.0)
    assert charging_duration_slots(make_session(energy=300.0), ch180, 1.0) == 2
    assert charging_duration_slots(make_session(energy=360.0), ch360, 1.0) == 1
    assert charging_duration_slots(make_session(energy=300.0), ch360, 1.0) == 1


def test_duration_slots_subhourly_and_coarse_grids():
    assert duration_slots(300.0, 180.0, 0.5) == 4     # 2 h in half-hour slots
    assert duration_slots(300.0, 180.0, 2.0) == 1     # 2 h in one 2 h slot
    # 2 h does not divide 0.75 h slots: rounded up once more
    assert duration_slots(300.0, 180.0, 0.75) == 3


def test_duration_non_increasing_in_charger_power():
    rng = np.random.default_rng(5)
    for _ in range(100):
        energy = float(rng.uniform(10.0, 900.0))
        p1 = float(rng.uniform(20.0, 400.0))
        p2 = p1 + float(rng.uniform(0.0, 300.0))
        assert duration_slots(energy, p2, 1.0) <= duration_slots(energy, p1, 1.0)


def test_check_session_feasibility():
    chargers = (make_charger(power=180.0), make_charger(id="u", power=360.0))
    ok = make_session(arrival=1, departure=2, energy=300.0)  # 1 slot on 360 kW
    check_session_feasibility(ok, chargers, 1.0, "s")
    too_big = make_session(arrival=1, departure=2, energy=900.0)  # needs 3 slots
    with pytest.raises(InfeasibleSession) as err:
        check_session_feasibility(too_big, chargers, 1.0, "s")
    assert err.value.vehicle_id == "v1"
