import numpy as np
import pytest

from cehopt.catalog import (
    BessTechnology,
    ChargerType,
    PvTechnology,
    TechnologyCatalog,
    WtTechnology,
)
from cehopt.ingest import ChargingSession, EconomicParams, GridContract, Scenario, ScenarioSet


def make_economics(**overrides):
    base = dict(
        discount_rate=0.0275,
        lifetimes_years={"pv": 20.0, "wt": 20.0, "bess": 15.0, "charger": 10.0},
        maintenance_fraction={"pv": 0.01, "wt": 0.01, "bess": 0.01, "charger": 0.01},
    )
    base.update(overrides)
    return EconomicParams(**base)


def make_grid(n_slots, wdl=1000.0, inj=1000.0, buy=0.30, sell=0.10):
    as_series = lambda v: np.full(n_slots, v, dtype=float) if np.isscalar(v) else np.asarray(v, dtype=float)
    return GridContract(
        withdrawal_limit_kw=as_series(wdl),
        injection_limit_kw=as_series(inj),
        buy_price=as_series(buy),
        sell_price=as_series(sell),
    )


def make_scenario(sid="day", n_slots=4, days=365, irradiance=0.0, wind=0.0,
                  sessions=(), **grid_kwargs):
    as_series = lambda v: np.full(n_slots, v, dtype=float) if np.isscalar(v) else np.asarray(v, dtype=float)
    return Scenario(
        id=sid,
        occurrence_days=days,
        delta_t_h=24.0 / n_slots,
        irradiance_kw_m2=as_series(irradiance),
        wind_speed_ms=as_series(wind),
        grid=make_grid(n_slots, **grid_kwargs),
        sessions=sessions,
    )


def make_charger(id="fast", power=180.0, invest=90_000.0, count=2, maint=900.0):
    return ChargerType(id=id, max_power_kw=power, invest_cost=invest,
                       maintenance_cost=maint, candidate_count=count,
                       lifetime_years=10.0)


def make_bess(id="bat", size=580.0, eff=0.95, self_dis=1e-4, p_max=300.0,
              n_max=100, invest=32_000.0, deg=0.03, soc=(0.1, 0.95, 0.5)):
    lo, hi, init = soc
    return BessTechnology(
        id=id, unit_size_kwh=size, charge_efficiency=eff, discharge_efficiency=eff,
        self_discharge_per_h=self_dis, soc_min_frac=lo, soc_max_frac=hi,
        soc_init_frac=init, max_charge_kw=p_max, max_discharge_kw=p_max,
        max_units=n_max, invest_cost=invest, maintenance_cost=0.01 * invest,
        degradation_cost_per_kw=deg, lifetime_years=15.0)


def make_pv(id="pv", eff=0.20, area=2.58, invest=495.0, max_units=10_000):
    return PvTechnology(id=id, efficiency=eff, area_m2=area, invest_cost=invest,
                        maintenance_cost=0.01 * invest, lifetime_years=20.0,
                        max_units=max_units)


def make_wt(id="wt", rated_kw=500.0, max_units=10):
    return WtTechnology(
        id=id, cut_in_ms=3.0, rated_speed_ms=13.0, cut_out_ms=20.0,
        rated_power_kw=rated_kw, swept_area_m2=1734.0, air_density_kg_m3=1.225,
        hub_height_m=60.0, measurement_height_m=10.0, shear_exponent=0.143,
        invest_cost=750_000.0, maintenance_cost=7_500.0, lifetime_years=20.0,
        max_units=max_units)


def make_session(vid="v1", arrival=1, departure=4, energy=300.0, rate=400.0):
    return ChargingSession(vehicle_id=vid, arrival_slot=arrival,
                           departure_slot=departure, energy_kwh=energy,
                           max_vehicle_rate_kw=rate)


@pytest.fixture
def demo_charger_types():
    fast = make_charger("dc180", 180.0, 90_000.0, count=6)
    ultra = make_charger("dc360", 360.0, 180_000.0, count=6, maint=1800.0)
    return fast, ultra


@pytest.fixture
def one_session_instance():
    """1 scenario x 4 slots, one session, two candidates of one type, no assets."""
    charger = make_charger(count=2)
    catalog = TechnologyCatalog(chargers=(charger,))
    scenario = make_scenario(sessions=(make_session(arrival=1, departure=3),))
    return catalog, ScenarioSet([scenario]), make_economics()
