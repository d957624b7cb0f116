"""Solution extraction, cost/energy accounting and report files.

`extract_solution` decodes a solver outcome back into domain terms, then
re-validates every constraint family against the raw inputs; a solution
object that survives extraction is safe to report.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog as cat
from . import model as m
from .errors import IoError, ValidationFailure
from .solve import SolveOutcome
from .validation import Violation, check_relaxation_tightness, validate_solution

REL_TOL = 1e-6


@dataclass(frozen=True)
class SessionAssignment:
    scenario_id: str
    session_idx: int
    vehicle_id: str
    charger_id: str
    start_slot: int       # absolute, 1-based
    duration_slots: int
    power_kw: float


@dataclass
class ScenarioOperation:
    scenario_id: str
    grid_kw: np.ndarray
    grid_cost_eur: np.ndarray
    pv_kw: np.ndarray
    wt_kw: np.ndarray
    charger_kw: dict            # candidate id -> array
    bess_charge_kw: dict        # bess id -> array
    bess_discharge_kw: dict
    bess_soc_kwh: dict
    assignments: list = field(default_factory=list)

    def total_charging_kw(self) -> np.ndarray:
        total = np.zeros_like(self.grid_kw)
        for series in self.charger_kw.values():
            total = total + series
        return total


@dataclass(frozen=True)
class CostBreakdown:
    capex_annualized: float
    opex_grid: float
    opex_maintenance: float
    degradation: float

    @property
    def total(self) -> float:
        return (self.capex_annualized + self.opex_grid
                + self.opex_maintenance + self.degradation)

    @property
    def shares(self) -> dict:
        total = self.total
        parts = {
            "capex_annualized": self.capex_annualized,
            "opex_grid": self.opex_grid,
            "opex_maintenance": self.opex_maintenance,
            "degradation": self.degradation,
        }
        if total == 0.0:
            return {k: 0.0 for k in parts}
        return {k: v / total for k, v in parts.items()}


@dataclass
class HubSolution:
    pv_units: dict
    wt_units: dict
    bess_units: dict
    chargers_installed: dict
    operations: dict            # scenario id -> ScenarioOperation
    costs: CostBreakdown
    objective: float


@dataclass(frozen=True)
class EnergyBalance:
    """Occurrence-weighted annual energy by source and by use, in kWh.

    The battery term absorbs conversion losses, self-discharge and any net
    change of stored energy over the day, so production always equals
    consumption; the two sub-terms are also reported separately.
    """

    pv_kwh: float
    wt_kwh: float
    grid_import_kwh: float
    ev_charging_kwh: float
    grid_export_kwh: float
    battery_losses_kwh: float
    battery_conversion_kwh: float
    battery_net_soc_kwh: float

    @property
    def production_kwh(self) -> float:
        return self.pv_kwh + self.wt_kwh + self.grid_import_kwh

    @property
    def consumption_kwh(self) -> float:
        return self.ev_charging_kwh + self.grid_export_kwh + self.battery_losses_kwh

    @property
    def production_shares(self) -> dict:
        total = self.production_kwh
        parts = {"pv": self.pv_kwh, "wt": self.wt_kwh, "grid_import": self.grid_import_kwh}
        return {k: (v / total if total else 0.0) for k, v in parts.items()}

    @property
    def consumption_shares(self) -> dict:
        total = self.consumption_kwh
        parts = {"ev_charging": self.ev_charging_kwh, "grid_export": self.grid_export_kwh,
                 "battery_losses": self.battery_losses_kwh}
        return {k: (v / total if total else 0.0) for k, v in parts.items()}


def compute_cost_breakdown(solution_design, operations, catalog, scenarios,
                           econ) -> CostBreakdown:
    """Recompute the cost terms from raw decision values and catalog data."""
    pv_units, wt_units, bess_units, chargers = solution_design
    r = econ.discount_rate
    capex = 0.0
    maint = 0.0
    for p in catalog.pv:
        n = pv_units.get(p.id, 0)
        capex += n * cat.capital_recovery_factor(r, p.lifetime_years) * p.invest_cost
        maint += n * p.maintenance_cost
    for w in catalog.wt:
        n = wt_units.get(w.id, 0)
        capex += n * cat.capital_recovery_factor(r, w.lifetime_years) * w.invest_cost
        maint += n * w.maintenance_cost
    for bt in catalog.bess:
        n = bess_units.get(bt.id, 0)
        capex += n * cat.capital_recovery_factor(r, bt.lifetime_years) * bt.invest_cost
        maint += n * bt.maintenance_cost
    for c in catalog.candidate_chargers():
        if chargers.get(c.id, False):
            capex += cat.capital_recovery_factor(r, c.type.lifetime_years) * c.type.invest_cost
            maint += c.type.maintenance_cost

    opex_grid = 0.0
    degradation = 0.0
    for sc in scenarios:
        op = operations[sc.id]
        days = float(sc.occurrence_days)
        dt = sc.delta_t_h
        for t in range(sc.n_slots):
            g = op.grid_kw[t]
            opex_grid += days * max(dt * sc.grid.buy_price[t] * g,
                                    dt * sc.grid.sell_price[t] * g)
        for bt in catalog.bess:
            degradation += days * bt.degradation_cost_per_kw * float(
                np.sum(op.bess_charge_kw[bt.id]) + np.sum(op.bess_discharge_kw[bt.id]))
    return CostBreakdown(capex, opex_grid, maint, degradation)


def extract_solution(outcome: SolveOutcome, maps: m.IndexMaps, catalog, scenarios,
                     econ, per_tech_bess_mode: bool = False,
                     soc_day_neutral: bool = False,
                     check_tightness: bool | None = None) -> HubSolution:
    """Decode a solved column vector and re-validate it from the raw inputs.

    Raises ValidationFailure when any constraint family is violated (a
    solver or extraction defect, never a user-input problem).
    """
    if not outcome.has_solution:
        raise ValueError(f"outcome carries no solution (status {outcome.status})")
    x = outcome.column_values
    cands = {c.id: c for c in catalog.candidate_chargers()}

    pv_units = {p.id: int(round(x[maps.col(m.PV_UNITS, p.id)])) for p in catalog.pv}
    wt_units = {w.id: int(round(x[maps.col(m.WT_UNITS, w.id)])) for w in catalog.wt}
    bess_units = {b.id: int(round(x[maps.col(m.BESS_UNITS, b.id)])) for b in catalog.bess}
    chargers = {c: bool(round(x[maps.col(m.CHARGER_INSTALLED, c)])) for c in cands}

    operations = {}
    for sc in scenarios:
        n = sc.n_slots
        op = ScenarioOperation(
            scenario_id=sc.id,
            grid_kw=np.array([x[maps.col(m.GRID_POWER, sc.id, t)]
                              for t in range(1, n + 1)]),
            grid_cost_eur=np.array([x[maps.col(m.GRID_COST, sc.id, t)]
                                    for t in range(1, n + 1)]),
            pv_kw=sum((pv_units[p.id] * m.pv_unit_profile(p, sc) for p in catalog.pv),
                      np.zeros(n)),
            wt_kw=sum((wt_units[w.id] * m.wt_unit_profile(w, sc) for w in catalog.wt),
                      np.zeros(n)),
            charger_kw={}, bess_charge_kw={}, bess_discharge_kw={}, bess_soc_kwh={},
        )
        for cid in cands:
            series = np.zeros(n)
            for t in range(1, n + 1):
                col = maps.get(m.CHARGER_POWER, sc.id, cid, t)
                if col is not None:
                    series[t - 1] = x[col]
            op.charger_kw[cid] = series
        for bt in catalog.bess:
            op.bess_charge_kw[bt.id] = np.array(
                [x[maps.col(m.BESS_CHARGE, sc.id, bt.id, t)] for t in range(1, n + 1)])
            op.bess_discharge_kw[bt.id] = np.array(
                [x[maps.col(m.BESS_DISCHARGE, sc.id, bt.id, t)] for t in range(1, n + 1)])
            op.bess_soc_kwh[bt.id] = np.array(
                [x[maps.col(m.BESS_SOC, sc.id, bt.id, t)] for t in range(1, n + 1)])

        for v_idx, session in enumerate(sc.sessions):
            for cid, cand in cands.items():
                tau = cat.charging_duration_slots(session, cand.type, sc.delta_t_h)
                last_start = session.parked_slots - tau + 1
                for t_r in range(1, max(0, last_start) + 1):
                    col = maps.get(m.CHARGE_START, sc.id, v_idx, cid, t_r)
                    if col is not None and x[col] > 0.5:
                        op.assignments.append(SessionAssignment(
                            scenario_id=sc.id,
                            session_idx=v_idx,
                            vehicle_id=session.vehicle_id,
                            charger_id=cid,
                            start_slot=session.arrival_slot + t_r - 1,
                            duration_slots=tau,
                            power_kw=cat.effective_rate(session, cand.type),
                        ))
        operations[sc.id] = op

    costs = compute_cost_breakdown((pv_units, wt_units, bess_units, chargers),
                                   operations, catalog, scenarios, econ)
    solution = HubSolution(pv_units, wt_units, bess_units, chargers, operations,
                           costs, float(outcome.objective))

    violations = validate_solution(solution, catalog, scenarios,
                                   per_tech_bess_mode=per_tech_bess_mode,
                                   soc_day_neutral=soc_day_neutral)
    optimal = outcome.status.name == "OPTIMAL"
    if check_tightness is None:
        check_tightness = optimal
    if check_tightness:
        violations += check_relaxation_tightness(solution, scenarios)
    # at an optimum the recomputed cost matches the objective exactly; a
    # time-limited incumbent may only be cheaper (slack trading-cost columns)
    tol = REL_TOL * max(1.0, abs(solution.objective))
    diff = costs.total - solution.objective
    if diff > tol or (optimal and abs(diff) > tol):
        violations.append(Violation("cost_total", None, ("objective",),
                                    f"recomputed cost {costs.total} vs solver "
                                    f"objective {solution.objective}"))
    if violations:
        raise ValidationFailure(violations)
    return solution


def compute_energy_balance(solution: HubSolution, scenarios) -> EnergyBalance:
    """Occurrence-weighted annual energy accounting for a validated solution."""
    pv = wt = imp = exp = ev = absorbed = net_soc = 0.0
    for sc in scenarios:
        op = solution.operations[sc.id]
        days = float(sc.occurrence_days)
        dt = sc.delta_t_h
        pv += days * dt * float(np.sum(op.pv_kw))
        wt += days * dt * float(np.sum(op.wt_kw))
        imp += days * dt * float(np.sum(np.maximum(op.grid_kw, 0.0)))
        exp += days * dt * float(np.sum(np.maximum(-op.grid_kw, 0.0)))
        ev += days * dt * float(np.sum(op.total_charging_kw()))
        for bid, ch in op.bess_charge_kw.items():
            dis = op.bess_discharge_kw[bid]
            soc = op.bess_soc_kwh[bid]
            absorbed += days * dt * float(np.sum(ch) - np.sum(dis))
            net_soc += days * float(soc[-1] - soc[0])
    return EnergyBalance(
        pv_kwh=pv, wt_kwh=wt, grid_import_kwh=imp,
        ev_charging_kwh=ev, grid_export_kwh=exp,
        battery_losses_kwh=absorbed,
        battery_conversion_kwh=absorbed - net_soc,
        battery_net_soc_kwh=net_soc,
    )


def _fmt(x) -> str:
    return repr(float(x))


def render_reports(solution: HubSolution, balance: EnergyBalance, scenarios,
                   out_dir) -> dict[str, Path]:
    """Write the report file set; returns {name: path}.

    Files: grid_power.csv, charging_power.csv, bess_soc.csv, schedule.csv
    and summary.json. Grid series are re-checked against the contract
    limits on write.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from None
    paths = {}

    def open_csv(name, header):
        path = out_dir / name
        paths[name.removesuffix(".csv")] = path
        fh = path.open("w", newline="")
        writer = csv.writer(fh)
        writer.writerow(header)
        return fh, writer

    fh, w = open_csv("grid_power.csv",
                     ["scenario_id", "slot", "grid_kw", "withdrawal_limit_kw",
                      "injection_limit_kw"])
    with fh:
        for sc in scenarios:
            op = solution.operations[sc.id]
            for t in range(sc.n_slots):
                g = op.grid_kw[t]
                wdl = sc.grid.withdrawal_limit_kw[t]
                inj = sc.grid.injection_limit_kw[t]
                if g > wdl + 1e-6 or g < -inj - 1e-6:
                    raise ValidationFailure([f"grid power {g} beyond limits at "
                                             f"({sc.id}, slot {t + 1})"])
                w.writerow([sc.id, t + 1, _fmt(g), _fmt(wdl), _fmt(inj)])

    fh, w = open_csv("charging_power.csv", ["scenario_id", "slot", "charging_kw"])
    with fh:
        for sc in scenarios:
            total = solution.operations[sc.id].total_charging_kw()
            for t in range(sc.n_slots):
                w.writerow([sc.id, t + 1, _fmt(total[t])])

    fh, w = open_csv("bess_soc.csv", ["scenario_id", "bess_id", "slot", "soc_kwh"])
    with fh:
        for sc in scenarios:
            op = solution.operations[sc.id]
            for bid in sorted(op.bess_soc_kwh):
                for t in range(sc.n_slots):
                    w.writerow([sc.id, bid, t + 1, _fmt(op.bess_soc_kwh[bid][t])])

    fh, w = open_csv("schedule.csv",
                     ["vehicle_id", "scenario_id", "charger_id", "start_slot",
                      "duration_slots", "power_kw"])
    with fh:
        for sc in scenarios:
            for a in solution.operations[sc.id].assignments:
                w.writerow([a.vehicle_id, a.scenario_id, a.charger_id, a.start_slot,
                            a.duration_slots, _fmt(a.power_kw)])

    summary = {
        "design": {
            "pv_units": solution.pv_units,
            "wt_units": solution.wt_units,
            "bess_units": solution.bess_units,
            "chargers_installed": {k: int(v) for k, v in
                                   sorted(solution.chargers_installed.items())},
        },
        "costs_eur_per_year": {
            "capex_annualized": solution.costs.capex_annualized,
            "opex_grid": solution.costs.opex_grid,
            "opex_maintenance": solution.costs.opex_maintenance,
            "degradation": solution.costs.degradation,
            "total": solution.costs.total,
            "shares": solution.costs.shares,
        },
        "objective_eur_per_year": solution.objective,
        "energy_balance_kwh_per_year": {
            "production": {
                "pv": balance.pv_kwh,
                "wt": balance.wt_kwh,
                "grid_import": balance.grid_import_kwh,
                "total": balance.production_kwh,
                "shares": balance.production_shares,
            },
            "consumption": {
                "ev_charging": balance.ev_charging_kwh,
                "grid_export": balance.grid_export_kwh,
                "battery_losses": balance.battery_losses_kwh,
                "total": balance.consumption_kwh,
                "shares": balance.consumption_shares,
            },
            "battery_losses_split": {
                "conversion_and_self_discharge": balance.battery_conversion_kwh,
                "net_soc_change": balance.battery_net_soc_kwh,
            },
        },
    }
    path = out_dir / "summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths["summary"] = path
    return paths
