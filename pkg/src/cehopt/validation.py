"""Independent re-validation of solved designs against the raw inputs.

Every constraint group of the sizing model is re-checked here from the
catalog, scenario data and the extracted solution alone; nothing is taken
from the solver or the assembled matrix. `validate_solution` returns the
full violation list so callers decide whether to raise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import catalog as cat
from .model import pv_unit_profile, wt_unit_profile

ABS_TOL = 1e-6

FAMILIES = (
    "pv_link",
    "wt_link",
    "soc_initial",
    "soc_recursion",
    "soc_terminal",
    "soc_bounds",
    "bess_power_caps",
    "bess_exclusivity",
    "charger_linking",
    "exactly_one_start",
    "occupancy",
    "charger_power",
    "symmetry_order",
    "symmetry_usage",
    "grid_bounds",
    "price_relaxation",
    "power_balance",
)


@dataclass(frozen=True)
class Violation:
    family: str
    scenario_id: str | None
    where: tuple
    message: str

    def __str__(self):
        sc = "" if self.scenario_id is None else f" scenario {self.scenario_id}"
        return f"[{self.family}]{sc} {self.where}: {self.message}"


def _tol(scale: float) -> float:
    return ABS_TOL * max(1.0, abs(scale))


def validate_solution(solution, catalog, scenarios,
                      per_tech_bess_mode: bool = False,
                      soc_day_neutral: bool = False) -> list[Violation]:
    """Re-check every constraint family; returns all violations found."""
    out: list[Violation] = []
    add = out.append
    cands = {c.id: c for c in catalog.candidate_chargers()}

    # design-only checks
    for ct in catalog.chargers:
        copies = sorted((c for c in cands.values() if c.type.id == ct.id),
                        key=lambda c: c.order)
        for prev, nxt in zip(copies, copies[1:]):
            if solution.chargers_installed.get(nxt.id, False) and \
                    not solution.chargers_installed.get(prev.id, False):
                add(Violation("symmetry_order", None, (ct.id, nxt.order),
                              f"copy {nxt.id} installed while {prev.id} is not"))

    for sc in scenarios:
        op = solution.operations[sc.id]
        dt = sc.delta_t_h
        n = sc.n_slots

        pv_expect = np.zeros(n)
        for p in catalog.pv:
            pv_expect += solution.pv_units.get(p.id, 0) * pv_unit_profile(p, sc)
        wt_expect = np.zeros(n)
        for w in catalog.wt:
            wt_expect += solution.wt_units.get(w.id, 0) * wt_unit_profile(w, sc)
        for t in range(n):
            if abs(op.pv_kw[t] - pv_expect[t]) > _tol(pv_expect[t]):
                add(Violation("pv_link", sc.id, (t + 1,),
                              f"pv power {op.pv_kw[t]} != {pv_expect[t]}"))
            if abs(op.wt_kw[t] - wt_expect[t]) > _tol(wt_expect[t]):
                add(Violation("wt_link", sc.id, (t + 1,),
                              f"wt power {op.wt_kw[t]} != {wt_expect[t]}"))

        _check_bess(add, solution, catalog, sc, op, per_tech_bess_mode,
                    soc_day_neutral)
        busy = _check_sessions(add, solution, catalog, sc, op, cands)
        _check_symmetry_usage(add, catalog, sc, cands, busy)
        _check_grid(add, sc, op)
        _check_balance(add, catalog, sc, op)
    return out


def _check_bess(add, solution, catalog, sc, op, per_tech_mode, soc_day_neutral):
    dt = sc.delta_t_h
    n = sc.n_slots
    for bt in catalog.bess:
        units = solution.bess_units.get(bt.id, 0)
        ch = op.bess_charge_kw[bt.id]
        dis = op.bess_discharge_kw[bt.id]
        soc = op.bess_soc_kwh[bt.id]
        cap = units * bt.unit_size_kwh

        init = cap * bt.soc_init_frac
        if abs(soc[0] - init) > _tol(init):
            add(Violation("soc_initial", sc.id, (bt.id,),
                          f"slot-1 SOC {soc[0]} != {init}"))
        if soc_day_neutral and soc[-1] < init - _tol(init):
            add(Violation("soc_terminal", sc.id, (bt.id,),
                          f"day ends at {soc[-1]} kWh, below the initial {init}"))
        prev = init  # slot 1 recurses against the initial level
        for t in range(n):
            expect = (prev
                      + bt.charge_efficiency * ch[t] * dt
                      - dis[t] / bt.discharge_efficiency * dt
                      - bt.self_discharge_per_h * units * bt.unit_size_kwh * dt)
            if abs(soc[t] - expect) > _tol(expect):
                add(Violation("soc_recursion", sc.id, (bt.id, t + 1),
                              f"SOC {soc[t]} != recursion value {expect}"))
            prev = soc[t]
        lo, hi = cap * bt.soc_min_frac, cap * bt.soc_max_frac
        for t in range(n):
            if soc[t] < lo - _tol(lo) or soc[t] > hi + _tol(hi):
                add(Violation("soc_bounds", sc.id, (bt.id, t + 1),
                              f"SOC {soc[t]} outside [{lo}, {hi}]"))
            max_ch = units * bt.max_charge_kw
            max_dis = units * bt.max_discharge_kw
            if ch[t] < -ABS_TOL or ch[t] > max_ch + _tol(max_ch):
                add(Violation("bess_power_caps", sc.id, (bt.id, t + 1),
                              f"charge {ch[t]} outside [0, {max_ch}]"))
            if dis[t] < -ABS_TOL or dis[t] > max_dis + _tol(max_dis):
                add(Violation("bess_power_caps", sc.id, (bt.id, t + 1),
                              f"discharge {dis[t]} outside [0, {max_dis}]"))

    if catalog.bess:
        keys = [bt.id for bt in catalog.bess]
        for t in range(n):
            if per_tech_mode:
                pairs = [(bid, op.bess_charge_kw[bid][t], op.bess_discharge_kw[bid][t])
                         for bid in keys]
            else:
                pairs = [("all", sum(op.bess_charge_kw[bid][t] for bid in keys),
                          sum(op.bess_discharge_kw[bid][t] for bid in keys))]
            for bid, total_ch, total_dis in pairs:
                if total_ch > ABS_TOL and total_dis > ABS_TOL:
                    add(Violation("bess_exclusivity", sc.id, (bid, t + 1),
                                  f"simultaneous charge {total_ch} and discharge "
                                  f"{total_dis}"))


def _check_sessions(add, solution, catalog, sc, op, cands):
    """Schedule checks; returns busy[(candidate_id, slot)] -> session count."""
    n = sc.n_slots
    by_session: dict[int, list] = {}
    busy: dict[tuple, int] = {}

    for a in op.assignments:
        by_session.setdefault(a.session_idx, []).append(a)

    for v_idx, session in enumerate(sc.sessions):
        assigned = by_session.pop(v_idx, [])
        if len(assigned) != 1:
            add(Violation("exactly_one_start", sc.id, (v_idx,),
                          f"session {session.vehicle_id!r} assigned {len(assigned)} "
                          f"time(s), expected exactly 1"))
            continue
        a = assigned[0]
        cand = cands.get(a.charger_id)
        if cand is None:
            add(Violation("charger_linking", sc.id, (v_idx,),
                          f"unknown charger {a.charger_id!r}"))
            continue
        if not solution.chargers_installed.get(a.charger_id, False):
            add(Violation("charger_linking", sc.id, (v_idx,),
                          f"session {session.vehicle_id!r} uses uninstalled "
                          f"charger {a.charger_id}"))
        tau = cat.charging_duration_slots(session, cand.type, sc.delta_t_h)
        rate = cat.effective_rate(session, cand.type)
        if a.duration_slots != tau:
            add(Violation("exactly_one_start", sc.id, (v_idx,),
                          f"duration {a.duration_slots} != required {tau} slots"))
        if abs(a.power_kw - rate) > _tol(rate):
            add(Violation("charger_power", sc.id, (v_idx,),
                          f"session power {a.power_kw} != effective rate {rate}"))
        if a.start_slot < session.arrival_slot or \
                a.start_slot + tau - 1 > session.departure_slot:
            add(Violation("exactly_one_start", sc.id, (v_idx,),
                          f"charging [{a.start_slot}, {a.start_slot + tau - 1}] leaves "
                          f"window [{session.arrival_slot}, {session.departure_slot}]"))
        for t in range(a.start_slot, min(a.start_slot + tau, n + 1)):
            busy[(a.charger_id, t)] = busy.get((a.charger_id, t), 0) + 1

    for v_idx in sorted(by_session):
        add(Violation("exactly_one_start", sc.id, (v_idx,),
                      "assignment for a session index that does not exist"))

    for (cid, t), count in sorted(busy.items()):
        if count > 1:
            add(Violation("occupancy", sc.id, (cid, t),
                          f"{count} sessions on one charger at slot {t}"))

    # reported charger power must equal the schedule-implied power
    implied = {cid: np.zeros(n) for cid in cands}
    for a in op.assignments:
        if a.charger_id not in implied:
            continue
        for t in range(a.start_slot, min(a.start_slot + a.duration_slots, n + 1)):
            implied[a.charger_id][t - 1] += a.power_kw
    for cid in sorted(cands):
        reported = op.charger_kw.get(cid, np.zeros(n))
        for t in range(n):
            if abs(reported[t] - implied[cid][t]) > _tol(implied[cid][t]):
                add(Violation("charger_power", sc.id, (cid, t + 1),
                              f"charger power {reported[t]} != scheduled "
                              f"{implied[cid][t]}"))
    return busy


def _check_symmetry_usage(add, catalog, sc, cands, busy):
    for ct in catalog.chargers:
        copies = sorted((c for c in cands.values() if c.type.id == ct.id),
                        key=lambda c: c.order)
        for prev, nxt in zip(copies, copies[1:]):
            for t in range(1, sc.n_slots + 1):
                if busy.get((nxt.id, t), 0) > 0 and busy.get((prev.id, t), 0) == 0:
                    add(Violation("symmetry_usage", sc.id, (nxt.id, t),
                                  f"{nxt.id} busy at slot {t} while {prev.id} idle"))


def _check_grid(add, sc, op):
    dt = sc.delta_t_h
    for t in range(sc.n_slots):
        g = op.grid_kw[t]
        wdl = sc.grid.withdrawal_limit_kw[t]
        inj = sc.grid.injection_limit_kw[t]
        if g > wdl + _tol(wdl) or g < -inj - _tol(inj):
            add(Violation("grid_bounds", sc.id, (t + 1,),
                          f"grid power {g} outside [-{inj}, {wdl}]"))
        buy_cost = dt * sc.grid.buy_price[t] * g
        sell_cost = dt * sc.grid.sell_price[t] * g
        c_el = op.grid_cost_eur[t]
        if c_el < buy_cost - _tol(buy_cost) or c_el < sell_cost - _tol(sell_cost):
            add(Violation("price_relaxation", sc.id, (t + 1,),
                          f"trading cost {c_el} below max({buy_cost}, {sell_cost})"))


def _check_balance(add, catalog, sc, op):
    n = sc.n_slots
    for t in range(n):
        supply = op.pv_kw[t] + op.wt_kw[t] + op.grid_kw[t]
        for bt in catalog.bess:
            supply += op.bess_discharge_kw[bt.id][t] - op.bess_charge_kw[bt.id][t]
        load = sum(series[t] for series in op.charger_kw.values())
        if abs(supply - load) > _tol(load):
            add(Violation("power_balance", sc.id, (t + 1,),
                          f"supply {supply} != charging load {load}"))


def check_relaxation_tightness(solution, scenarios) -> list[Violation]:
    """At an optimum the trading cost must sit exactly on the binding price row."""
    out = []
    for sc in scenarios:
        op = solution.operations[sc.id]
        for t in range(sc.n_slots):
            g = op.grid_kw[t]
            expect = max(sc.delta_t_h * sc.grid.buy_price[t] * g,
                         sc.delta_t_h * sc.grid.sell_price[t] * g)
            if abs(op.grid_cost_eur[t] - expect) > _tol(expect):
                out.append(Violation("price_relaxation", sc.id, (t + 1,),
                                     f"trading cost {op.grid_cost_eur[t]} not tight "
                                     f"against {expect}"))
    return out
