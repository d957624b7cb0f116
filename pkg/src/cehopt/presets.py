"""Bundled example catalog and synthetic instance builders.

The demo catalog carries the medium-size hub technology and economic
parameters used throughout the documentation (550 W PV units, one 500 kW
turbine class, 580 kWh battery units, 180/360 kW charger types, 2.75%
discount rate). Weather, price and session data are synthesized here, since
no measured series ship with the package.

Synthetic sessions are generated schedule-first: a concrete feasible
schedule is drawn against the grid limits, then arrival/departure windows
are widened around it, so every generated instance is solvable.

Run ``python -m cehopt.presets OUT_DIR [--kind tiny|yearly] [--seed N]`` to
materialize a loadable config tree.
"""

from __future__ import annotations

import argparse
import math
from pathlib import Path

import numpy as np

from .catalog import (
    BessTechnology,
    ChargerType,
    PvTechnology,
    TechnologyCatalog,
    WtTechnology,
    charging_duration_slots,
)
from .ingest import (
    ChargingSession,
    DemandProfile,
    EconomicParams,
    GridContract,
    MonthlyWeather,
    Scenario,
    ScenarioSet,
    build_scenarios,
    write_inputs,
)


def demo_economics() -> EconomicParams:
    return EconomicParams(
        discount_rate=0.0275,
        lifetimes_years={"pv": 20.0, "wt": 20.0, "bess": 15.0, "charger": 10.0},
        maintenance_fraction={"pv": 0.01, "wt": 0.01, "bess": 0.01, "charger": 0.01},
    )


def demo_catalog(econ: EconomicParams | None = None) -> TechnologyCatalog:
    econ = econ or demo_economics()

    def maint(cls, invest):
        return econ.maintenance_cost(cls, invest)

    pv = PvTechnology(
        id="pv550", efficiency=0.20, area_m2=2.58, invest_cost=495.0,
        maintenance_cost=maint("pv", 495.0), lifetime_years=econ.lifetime("pv"),
        max_units=10_000)
    wt = WtTechnology(
        id="wt500", cut_in_ms=3.0, rated_speed_ms=13.0, cut_out_ms=20.0,
        rated_power_kw=500.0, swept_area_m2=1734.0, air_density_kg_m3=1.225,
        hub_height_m=60.0, measurement_height_m=10.0, shear_exponent=0.143,
        invest_cost=750_000.0, maintenance_cost=maint("wt", 750_000.0),
        lifetime_years=econ.lifetime("wt"), max_units=10)
    bess = BessTechnology(
        id="bess580", unit_size_kwh=580.0, charge_efficiency=0.95,
        discharge_efficiency=0.95, self_discharge_per_h=1e-4,
        soc_min_frac=0.1, soc_max_frac=0.95, soc_init_frac=0.5,
        max_charge_kw=300.0, max_discharge_kw=300.0, max_units=100,
        invest_cost=32_000.0, maintenance_cost=maint("bess", 32_000.0),
        degradation_cost_per_kw=0.03, lifetime_years=econ.lifetime("bess"))
    fast = ChargerType(
        id="dc180", max_power_kw=180.0, invest_cost=90_000.0,
        maintenance_cost=maint("charger", 90_000.0), candidate_count=6,
        lifetime_years=econ.lifetime("charger"))
    ultra = ChargerType(
        id="dc360", max_power_kw=360.0, invest_cost=180_000.0,
        maintenance_cost=maint("charger", 180_000.0), candidate_count=6,
        lifetime_years=econ.lifetime("charger"))
    return TechnologyCatalog(pv=(pv,), wt=(wt,), bess=(bess,), chargers=(fast, ultra))


def day_night_limits(n_slots: int, day_kw: float = 600.0,
                     night_kw: float = 800.0) -> np.ndarray:
    """Day limit for slots covering 08:00-20:00, night limit otherwise."""
    hours_per_slot = 24.0 / n_slots
    out = np.empty(n_slots)
    for t in range(n_slots):
        mid = (t + 0.5) * hours_per_slot
        out[t] = day_kw if 8.0 <= mid < 20.0 else night_kw
    return out


# ---------------------------------------------------------------------------
# schedule-first session generation


def _draw_sessions(rng, n_slots, delta_t, charger_types, limits_kw, target_count,
                   margin=0.8, max_concurrent_per_type=None):
    """Draw sessions around a concrete feasible schedule.

    Keeps a running per-slot power commitment below ``margin * limit`` and
    per-type concurrency below the candidate count, so importing the whole
    load on the witness schedule stays within the grid contract.
    """
    committed = np.zeros(n_slots)
    type_busy = {ct.id: np.zeros(n_slots, dtype=int) for ct in charger_types}
    sessions = []
    for k in range(target_count):
        for _ in range(30):  # retries per session
            ct = charger_types[rng.integers(len(charger_types))]
            dur_h = int(rng.integers(1, 4))
            tau = max(1, math.ceil(dur_h / delta_t))
            if tau > n_slots:
                continue
            start = int(rng.integers(1, n_slots - tau + 2))
            window = slice(start - 1, start - 1 + tau)
            cap = max_concurrent_per_type or ct.candidate_count
            if np.any(committed[window] + ct.max_power_kw > margin * limits_kw[window]):
                continue
            if np.any(type_busy[ct.id][window] + 1 > cap):
                continue
            committed[window] += ct.max_power_kw
            type_busy[ct.id][window] += 1
            arrival = max(1, start - int(rng.integers(0, 3)))
            departure = min(n_slots, start + tau - 1 + int(rng.integers(0, 3)))
            if departure <= arrival:  # single-slot visit: widen inside the day
                if arrival > 1:
                    arrival -= 1
                else:
                    departure = arrival + 1
            energy = ct.max_power_kw * dur_h * float(rng.uniform(0.75, 0.999))
            sessions.append(ChargingSession(
                vehicle_id=f"ev{k:03d}",
                arrival_slot=arrival,
                departure_slot=departure,
                energy_kwh=round(energy, 3),
                max_vehicle_rate_kw=400.0,
            ))
            break
    return tuple(sessions)


# ---------------------------------------------------------------------------
# tiny instances (unit tests, oracle cross-checks, CLI demo)


def tiny_catalog(rng=None, with_bess=True, n_charger_types=1,
                 candidates_per_type=2) -> TechnologyCatalog:
    rng = rng or np.random.default_rng(0)
    econ = demo_economics()
    # invest costs straddle break-even against typical grid prices so the
    # optimizer sometimes buys units and sometimes does not
    pv = PvTechnology(
        id="pv", efficiency=0.2, area_m2=float(rng.uniform(200.0, 600.0)),
        invest_cost=float(rng.uniform(30_000.0, 500_000.0)), maintenance_cost=10.0,
        lifetime_years=20.0, max_units=2)
    wt = WtTechnology(
        id="wt", cut_in_ms=3.0, rated_speed_ms=12.0, cut_out_ms=22.0,
        rated_power_kw=float(rng.uniform(80.0, 250.0)), swept_area_m2=600.0,
        air_density_kg_m3=1.225, hub_height_m=40.0, measurement_height_m=10.0,
        shear_exponent=0.143, invest_cost=float(rng.uniform(100_000.0, 3_000_000.0)),
        maintenance_cost=50.0, lifetime_years=20.0, max_units=2)
    bess = ()
    if with_bess:
        bess = (BessTechnology(
            id="bat", unit_size_kwh=float(rng.uniform(100.0, 400.0)),
            charge_efficiency=0.95, discharge_efficiency=0.95,
            self_discharge_per_h=1e-4, soc_min_frac=0.1, soc_max_frac=0.95,
            soc_init_frac=0.5, max_charge_kw=float(rng.uniform(50.0, 150.0)),
            max_discharge_kw=float(rng.uniform(50.0, 150.0)), max_units=2,
            invest_cost=float(rng.uniform(5_000.0, 200_000.0)), maintenance_cost=20.0,
            degradation_cost_per_kw=0.03, lifetime_years=15.0),)
    powers = [180.0, 360.0, 120.0]
    chargers = tuple(
        ChargerType(id=f"ch{i}", max_power_kw=powers[i % len(powers)],
                    invest_cost=float(rng.uniform(3000.0, 40_000.0)),
                    maintenance_cost=100.0, candidate_count=candidates_per_type,
                    lifetime_years=10.0)
        for i in range(n_charger_types))
    return TechnologyCatalog(pv=(pv,), wt=(wt,), bess=bess, chargers=chargers)


def _tiny_scenario(rng, sid, days, n_slots, catalog, n_sessions) -> Scenario:
    delta_t = 24.0 / n_slots
    total_charger_kw = sum(ct.max_power_kw * ct.candidate_count
                           for ct in catalog.chargers)
    total_bess_kw = sum(bt.max_charge_kw * bt.max_units for bt in catalog.bess)
    headroom = total_charger_kw + total_bess_kw + 100.0

    buy = rng.uniform(0.10, 0.40, n_slots)
    sell = buy - rng.uniform(0.02, 0.09, n_slots)
    grid = GridContract(
        withdrawal_limit_kw=np.full(n_slots, headroom),
        injection_limit_kw=np.full(n_slots, float(rng.uniform(0.0, headroom))),
        buy_price=buy,
        sell_price=sell,
    )
    irr = np.clip(rng.uniform(-0.2, 0.9, n_slots), 0.0, None)
    wind = np.clip(rng.uniform(0.0, 16.0, n_slots), 0.0, None)
    sessions = _draw_sessions(
        rng, n_slots, delta_t, catalog.chargers,
        np.full(n_slots, headroom), n_sessions, margin=0.95)
    return Scenario(id=sid, occurrence_days=days, delta_t_h=delta_t,
                    irradiance_kw_m2=irr, wind_speed_ms=wind, grid=grid,
                    sessions=sessions)


def tiny_instance(seed: int = 0, n_scenarios: int = 1, n_slots: int = 4,
                  n_sessions: int = 1, with_bess: bool = True,
                  n_charger_types: int = 1, candidates_per_type: int = 2):
    """Deterministic small instance: (catalog, scenarios, economics)."""
    rng = np.random.default_rng(seed)
    catalog = tiny_catalog(rng, with_bess=with_bess,
                           n_charger_types=n_charger_types,
                           candidates_per_type=candidates_per_type)
    splits = {1: (365,), 2: (200, 165), 3: (150, 115, 100)}[n_scenarios]
    scenarios = [
        _tiny_scenario(rng, f"d{k}", splits[k], n_slots, catalog, n_sessions)
        for k in range(n_scenarios)
    ]
    return catalog, ScenarioSet(scenarios), demo_economics()


def random_tiny_instance(seed: int):
    """Randomized instance inside the oracle-friendly size envelope."""
    rng = np.random.default_rng(seed)
    n_scenarios = int(rng.integers(1, 3))
    n_slots = int(rng.choice([4, 6]))
    n_sessions = int(rng.integers(0, 3))
    with_bess = bool(rng.random() < 0.6)
    two_types = bool(rng.random() < 0.4)
    return tiny_instance(
        seed=seed + 1,
        n_scenarios=n_scenarios,
        n_slots=n_slots,
        n_sessions=n_sessions,
        with_bess=with_bess,
        n_charger_types=2 if two_types else 1,
        candidates_per_type=1 if two_types else int(rng.integers(1, 3)),
    )


# ---------------------------------------------------------------------------
# yearly instance shaped like the documented case study


def _monthly_weather(rng, month, n_slots) -> tuple[np.ndarray, np.ndarray]:
    season = 0.5 - 0.5 * math.cos(2.0 * math.pi * (month - 1) / 12.0)  # 0 Jan, 1 Jul
    hours = (np.arange(n_slots) + 0.5) * (24.0 / n_slots)
    sun = np.maximum(0.0, np.sin(math.pi * (hours - 6.0) / 12.0))
    irr = (0.25 + 0.65 * season) * sun * rng.uniform(0.75, 1.0, n_slots)
    wind_mean = 6.5 - 1.5 * season  # windier winters
    wind = np.clip(rng.normal(wind_mean, 1.8, n_slots), 0.0, None)
    return np.round(irr, 5), np.round(wind, 4)


def _monthly_prices(rng, month, n_slots) -> tuple[np.ndarray, np.ndarray]:
    hours = (np.arange(n_slots) + 0.5) * (24.0 / n_slots)
    peak = ((7.0 <= hours) & (hours < 10.0)) | ((17.0 <= hours) & (hours < 21.0))
    base = 0.08 + 0.015 * math.cos(2.0 * math.pi * (month - 1) / 12.0)
    buy = base + 0.06 * peak + rng.uniform(0.0, 0.04, n_slots)
    sell = np.maximum(0.01, buy - 0.05)  # wholesale export pays much less
    return np.round(buy, 5), np.round(sell, 5)


def yearly_instance(seed: int = 0, year: int = 2025, sessions_weekday: int = 16,
                    sessions_weekend: int = 8):
    """24-scenario, 24-slot instance in the documented case-study shape."""
    rng = np.random.default_rng(seed)
    econ = demo_economics()
    catalog = demo_catalog(econ)
    n_slots = 24
    limits = day_night_limits(n_slots)

    weather = []
    demand = []
    for month in range(1, 13):
        irr, wind = _monthly_weather(rng, month, n_slots)
        buy, sell = _monthly_prices(rng, month, n_slots)
        grid = GridContract(withdrawal_limit_kw=limits.copy(),
                            injection_limit_kw=limits.copy(),
                            buy_price=buy, sell_price=sell)
        weather.append(MonthlyWeather(month=month, irradiance_kw_m2=tuple(irr),
                                      wind_speed_ms=tuple(wind), grid=grid))
        for kind, count in (("weekday", sessions_weekday), ("weekend", sessions_weekend)):
            sessions = _draw_sessions(rng, n_slots, 1.0, catalog.chargers, limits,
                                      count, margin=0.8)
            demand.append(DemandProfile(month=month, day_kind=kind, sessions=sessions))

    scenarios = build_scenarios(weather, demand, delta_t_h=1.0, year=year)
    return catalog, scenarios, econ


def write_demo_instance(out_dir, kind: str = "tiny", seed: int = 0) -> Path:
    """Materialize a loadable config tree; returns the config path.

    The yearly demo pins the end-of-day battery level to the starting level
    (`soc_day_neutral`); without it, the case-study battery price makes the
    day-boundary refill the dominant revenue stream.
    """
    if kind == "tiny":
        catalog, scenarios, econ = tiny_instance(seed=seed, n_sessions=2)
        options = None
    elif kind == "yearly":
        catalog, scenarios, econ = yearly_instance(seed=seed)
        options = {"soc_day_neutral": True}
    else:
        raise ValueError(f"unknown demo kind {kind!r}")
    return write_inputs(catalog, scenarios, econ, out_dir, model_options=options)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="write a demo instance config tree")
    parser.add_argument("out_dir")
    parser.add_argument("--kind", choices=("tiny", "yearly"), default="tiny")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    path = write_demo_instance(args.out_dir, kind=args.kind, seed=args.seed)
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
