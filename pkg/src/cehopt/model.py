"""Assembly of the hub sizing MILP in a solver-agnostic sparse form.

Columns are registered once, in a deterministic order (design variables
first, then per-scenario operation variables); every constraint row carries
a provenance tag from :data:`ROW_TAGS` plus the indices it applies to, so a
solved instance can be audited row by row.

Slot numbers and relative start offsets are 1-based throughout, matching
the input data convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from . import catalog as cat
from .errors import InfeasibleInstance, ModelSizeError

INF = math.inf

CONTINUOUS = "continuous"
INTEGER = "integer"
BINARY = "binary"

# variable kinds
PV_UNITS = "pv_units"              # (pv_id,)
WT_UNITS = "wt_units"              # (wt_id,)
BESS_UNITS = "bess_units"          # (bess_id,)
CHARGER_INSTALLED = "charger_installed"  # (candidate_id,)
CHARGE_START = "charge_start"      # (scenario_id, session_idx, candidate_id, t_r)
BESS_MODE = "bess_mode"            # (scenario_id, t) or (scenario_id, bess_id, t)
BESS_CHARGE = "bess_charge_kw"     # (scenario_id, bess_id, t)
BESS_DISCHARGE = "bess_discharge_kw"
BESS_SOC = "bess_soc_kwh"
GRID_POWER = "grid_kw"             # (scenario_id, t)
GRID_COST = "grid_cost_eur"        # (scenario_id, t)
CHARGER_POWER = "charger_kw"       # (scenario_id, candidate_id, t)

ROW_TAGS = frozenset({
    "soc_initial",
    "soc_recursion",
    "soc_terminal",
    "soc_lower",
    "soc_upper",
    "charge_cap",
    "discharge_cap",
    "exclusivity_charge",
    "exclusivity_discharge",
    "charger_linking",
    "exactly_one_start",
    "occupancy",
    "charger_power",
    "symmetry_order",
    "symmetry_usage",
    "price_relaxation_buy",
    "price_relaxation_sell",
    "power_balance",
})

RELATIONS = ("<=", ">=", "=")


@dataclass(frozen=True)
class VariableRef:
    kind: str
    index: tuple
    lower: float
    upper: float
    integrality: str

    @property
    def key(self) -> tuple:
        return (self.kind, *self.index)

    @property
    def is_integral(self) -> bool:
        return self.integrality != CONTINUOUS


@dataclass(frozen=True)
class Row:
    cols: tuple
    coefs: tuple
    relation: str
    rhs: float
    tag: str
    key: tuple  # indices the row applies to, for audits and dumps

    def activity(self, values) -> float:
        return float(sum(c * values[j] for j, c in zip(self.cols, self.coefs)))


@dataclass(frozen=True)
class BuildOptions:
    """Assembly knobs; defaults match the documented model exactly."""

    max_model_size: int = 2_000_000   # cap on variables and on constraints
    per_tech_bess_mode: bool = False  # one charge/discharge flag per BESS tech
    # require each day to end at least as full as it started; off by default
    # because the base model carries no end-of-day condition, which lets the
    # optimizer cash in the day-boundary refill when batteries are cheap
    soc_day_neutral: bool = False


class IndexMaps:
    """Bidirectional (kind, indices) <-> column maps plus slot metadata."""

    def __init__(self, refs, delta_t_h, n_slots, scenario_ids, t_max_parked):
        self.refs = tuple(refs)
        self.key_to_col = {ref.key: j for j, ref in enumerate(self.refs)}
        self.delta_t_h = float(delta_t_h)
        self.n_slots = int(n_slots)
        self.scenario_ids = tuple(scenario_ids)
        self.t_max_parked = int(t_max_parked)
        if len(self.key_to_col) != len(self.refs):
            raise ValueError("duplicate variable keys")

    def col(self, kind, *index) -> int:
        return self.key_to_col[(kind, *index)]

    def get(self, kind, *index):
        return self.key_to_col.get((kind, *index))

    def cols_of_kind(self, kind):
        return [j for j, ref in enumerate(self.refs) if ref.kind == kind]

    def __len__(self):
        return len(self.refs)


class MilpProblem:
    """Sparse standard-form MILP: registered columns, tagged rows, min objective."""

    def __init__(self, refs, rows, objective, objective_constant=0.0):
        self.variables = tuple(refs)
        self.rows = tuple(rows)
        self.objective = dict(objective)
        self.objective_constant = float(objective_constant)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.rows)

    def rows_tagged(self, tag: str):
        return [r for r in self.rows if r.tag == tag]

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_variables)
        for j, coef in self.objective.items():
            c[j] = coef
        return c

    def bounds_arrays(self):
        lb = np.array([v.lower for v in self.variables])
        ub = np.array([v.upper for v in self.variables])
        return lb, ub

    def integrality_vector(self) -> np.ndarray:
        return np.array([1 if v.is_integral else 0 for v in self.variables])

    def constraint_matrix(self):
        """(A, row_lb, row_ub) with A sparse CSR, one row per constraint."""
        n_rows = len(self.rows)
        nnz = sum(len(r.cols) for r in self.rows)
        data = np.empty(nnz)
        ri = np.empty(nnz, dtype=np.int64)
        ci = np.empty(nnz, dtype=np.int64)
        lo = np.empty(n_rows)
        hi = np.empty(n_rows)
        k = 0
        for i, row in enumerate(self.rows):
            m = len(row.cols)
            ri[k:k + m] = i
            ci[k:k + m] = row.cols
            data[k:k + m] = row.coefs
            k += m
            if row.relation == "<=":
                lo[i], hi[i] = -INF, row.rhs
            elif row.relation == ">=":
                lo[i], hi[i] = row.rhs, INF
            else:
                lo[i], hi[i] = row.rhs, row.rhs
        A = sps.coo_matrix((data, (ri, ci)), shape=(n_rows, self.n_variables)).tocsr()
        return A, lo, hi

    def lint(self) -> None:
        """Structural audit: linear rows over registered columns, tags closed."""
        n = self.n_variables
        for i, row in enumerate(self.rows):
            if row.tag not in ROW_TAGS:
                raise ValueError(f"row {i}: unknown tag {row.tag!r}")
            if row.relation not in RELATIONS:
                raise ValueError(f"row {i}: bad relation {row.relation!r}")
            if len(row.cols) != len(set(row.cols)):
                raise ValueError(f"row {i}: repeated column (non-linear term?)")
            if not row.cols:
                raise ValueError(f"row {i}: empty row")
            for j, coef in zip(row.cols, row.coefs):
                if not 0 <= j < n:
                    raise ValueError(f"row {i}: unregistered column {j}")
                if not math.isfinite(coef):
                    raise ValueError(f"row {i}: non-finite coefficient")
            if not math.isfinite(row.rhs):
                raise ValueError(f"row {i}: non-finite rhs")
        for j, coef in self.objective.items():
            if not 0 <= j < n or not math.isfinite(coef):
                raise ValueError(f"objective: bad entry {j} -> {coef}")
        for j, ref in enumerate(self.variables):
            if ref.is_integral and not (math.isfinite(ref.lower) and math.isfinite(ref.upper)):
                raise ValueError(f"column {j} ({ref.key}): integer without finite bounds")


class ProblemBuilder:
    """Accumulates columns and rows; frozen into a MilpProblem at the end."""

    def __init__(self, options: BuildOptions):
        self.options = options
        self.refs: list[VariableRef] = []
        self.key_to_col: dict = {}
        self.rows: list[Row] = []
        self.objective: dict[int, float] = {}
        # x-coverage bookkeeping, filled by add_session_constraints:
        #   (scenario_id, candidate_id, t) -> [(session_idx, col, rate_kw)]
        self.cover_ct: dict = {}
        #   (scenario_id, session_idx, candidate_id, t) -> [col]
        self.cover_vct: dict = {}

    def add_var(self, kind, index, lower, upper, integrality) -> int:
        key = (kind, *index)
        if key in self.key_to_col:
            raise ValueError(f"duplicate variable {key}")
        col = len(self.refs)
        self.refs.append(VariableRef(kind, tuple(index), float(lower), float(upper),
                                     integrality))
        self.key_to_col[key] = col
        return col

    def col(self, kind, *index) -> int:
        return self.key_to_col[(kind, *index)]

    def add_row(self, cols, coefs, relation, rhs, tag, key) -> None:
        self.rows.append(Row(tuple(cols), tuple(float(c) for c in coefs),
                             relation, float(rhs), tag, tuple(key)))

    def add_objective(self, col, coef) -> None:
        self.objective[col] = self.objective.get(col, 0.0) + float(coef)


# ---------------------------------------------------------------------------
# renewable unit profiles (data coefficients on the design columns)


def pv_unit_profile(tech, scenario) -> np.ndarray:
    """Per-slot output of one PV unit [kW] in the scenario."""
    return tech.efficiency * tech.area_m2 * scenario.irradiance_kw_m2


def wt_unit_profile(tech, scenario) -> np.ndarray:
    """Per-slot output of one turbine [kW], measured speeds scaled to hub height."""
    out = np.empty(scenario.n_slots)
    for t in range(scenario.n_slots):
        hub = cat.scale_wind_speed(tech, float(scenario.wind_speed_ms[t]))
        out[t] = cat.wt_unit_power(tech, hub)
    return out


# ---------------------------------------------------------------------------
# sub-operations (one per constraint group)


def add_design_variables(b: ProblemBuilder, catalog) -> None:
    for p in catalog.pv:
        b.add_var(PV_UNITS, (p.id,), 0, p.max_units, INTEGER)
    for w in catalog.wt:
        b.add_var(WT_UNITS, (w.id,), 0, w.max_units, INTEGER)
    for bt in catalog.bess:
        b.add_var(BESS_UNITS, (bt.id,), 0, bt.max_units, INTEGER)
    for c in catalog.candidate_chargers():
        b.add_var(CHARGER_INSTALLED, (c.id,), 0, 1, BINARY)


def add_symmetry_order(b: ProblemBuilder, catalog) -> None:
    """Installation order within each charger type: copy j+1 needs copy j."""
    cands = catalog.candidate_chargers()
    for ct in catalog.chargers:
        copies = [c for c in cands if c.type.id == ct.id]
        for prev, nxt in zip(copies, copies[1:]):
            b.add_row(
                [b.col(CHARGER_INSTALLED, nxt.id), b.col(CHARGER_INSTALLED, prev.id)],
                [1.0, -1.0], "<=", 0.0, "symmetry_order", (ct.id, prev.order))


def add_session_constraints(b: ProblemBuilder, catalog, scenario) -> None:
    """Start-time variables and the five scheduling constraint groups."""
    sid = scenario.id
    n_slots = scenario.n_slots
    cands = catalog.candidate_chargers()

    for v_idx, session in enumerate(scenario.sessions):
        window = session.departure_slot - session.arrival_slot + 1
        start_cols = []
        for c in cands:
            tau = cat.charging_duration_slots(session, c.type, scenario.delta_t_h)
            last_start = window - tau + 1  # relative offsets 1..last_start
            if last_start < 1:
                continue
            rate = cat.effective_rate(session, c.type)
            q_col = b.col(CHARGER_INSTALLED, c.id)
            for t_r in range(1, last_start + 1):
                col = b.add_var(CHARGE_START, (sid, v_idx, c.id, t_r), 0, 1, BINARY)
                start_cols.append(col)
                b.add_row([col, q_col], [1.0, -1.0], "<=", 0.0,
                          "charger_linking", (sid, v_idx, c.id, t_r))
                # a feasible start always finishes by the departure slot
                start_abs = session.arrival_slot + t_r - 1
                for t in range(start_abs, start_abs + tau):
                    b.cover_ct.setdefault((sid, c.id, t), []).append((v_idx, col, rate))
                    b.cover_vct.setdefault((sid, v_idx, c.id, t), []).append(col)
        if not start_cols:
            raise InfeasibleInstance(
                f"session {session.vehicle_id!r} (#{v_idx}) in scenario {sid!r} has no "
                f"feasible start on any candidate charger")
        b.add_row(start_cols, [1.0] * len(start_cols), "=", 1.0,
                  "exactly_one_start", (sid, v_idx))

    # occupancy and charger power, from the coverage maps
    for c in cands:
        for t in range(1, n_slots + 1):
            covering = b.cover_ct.get((sid, c.id, t))
            if not covering:
                continue
            cols = [col for _, col, _ in covering]
            b.add_row(cols, [1.0] * len(cols), "<=", 1.0, "occupancy", (sid, c.id, t))
            p_col = b.add_var(CHARGER_POWER, (sid, c.id, t), 0, INF, CONTINUOUS)
            b.add_row([p_col] + cols, [1.0] + [-rate for _, _, rate in covering],
                      "=", 0.0, "charger_power", (sid, c.id, t))

    # usage order among copies of one type: copy j+1 serves some vehicle at t
    # only when copy j is serving one
    for ct in catalog.chargers:
        copies = [c for c in cands if c.type.id == ct.id]
        for prev, nxt in zip(copies, copies[1:]):
            for t in range(1, n_slots + 1):
                prev_cover = b.cover_ct.get((sid, prev.id, t), ())
                prev_cols = [col for _, col, _ in prev_cover]
                for v_idx in range(len(scenario.sessions)):
                    mine = b.cover_vct.get((sid, v_idx, nxt.id, t))
                    if not mine:
                        continue
                    cols = list(mine) + prev_cols
                    coefs = [1.0] * len(mine) + [-1.0] * len(prev_cols)
                    b.add_row(cols, coefs, "<=", 0.0, "symmetry_usage",
                              (sid, ct.id, prev.order, v_idx, t))


def add_bess_constraints(b: ProblemBuilder, catalog, scenario) -> None:
    """SOC recursion and bounds, power caps, and charge/discharge exclusivity.

    Every representative day starts from the same stored energy (the slot-1
    SOC is pinned to the initial fraction) and the recursion covers slot 1
    against that initial level, so no flow escapes the SOC bookkeeping.
    There is no end-of-day requirement: energy left in (or missing from)
    the battery at the last slot carries no cost across the day boundary.
    """
    if not catalog.bess:
        return
    sid = scenario.id
    dt = scenario.delta_t_h
    n_slots = scenario.n_slots
    per_tech = b.options.per_tech_bess_mode

    mode_cols = {}
    if per_tech:
        for bt in catalog.bess:
            for t in range(1, n_slots + 1):
                mode_cols[(bt.id, t)] = b.add_var(BESS_MODE, (sid, bt.id, t), 0, 1, BINARY)
    else:
        for t in range(1, n_slots + 1):
            shared = b.add_var(BESS_MODE, (sid, t), 0, 1, BINARY)
            for bt in catalog.bess:
                mode_cols[(bt.id, t)] = shared

    for bt in catalog.bess:
        n_col = b.col(BESS_UNITS, bt.id)
        ch, dis, soc = {}, {}, {}
        for t in range(1, n_slots + 1):
            ch[t] = b.add_var(BESS_CHARGE, (sid, bt.id, t), 0, INF, CONTINUOUS)
            dis[t] = b.add_var(BESS_DISCHARGE, (sid, bt.id, t), 0, INF, CONTINUOUS)
            soc[t] = b.add_var(BESS_SOC, (sid, bt.id, t), 0, INF, CONTINUOUS)

        b.add_row([soc[1], n_col], [1.0, -bt.unit_size_kwh * bt.soc_init_frac],
                  "=", 0.0, "soc_initial", (sid, bt.id))
        # slot 1 recurses against the initial level, which rides on n_b
        b.add_row(
            [soc[1], ch[1], dis[1], n_col],
            [1.0, -bt.charge_efficiency * dt, dt / bt.discharge_efficiency,
             bt.self_discharge_per_h * bt.unit_size_kwh * dt
             - bt.unit_size_kwh * bt.soc_init_frac],
            "=", 0.0, "soc_recursion", (sid, bt.id, 1))
        for t in range(2, n_slots + 1):
            b.add_row(
                [soc[t], soc[t - 1], ch[t], dis[t], n_col],
                [1.0, -1.0, -bt.charge_efficiency * dt, dt / bt.discharge_efficiency,
                 bt.self_discharge_per_h * bt.unit_size_kwh * dt],
                "=", 0.0, "soc_recursion", (sid, bt.id, t))
        if b.options.soc_day_neutral:
            b.add_row([soc[n_slots], n_col],
                      [1.0, -bt.unit_size_kwh * bt.soc_init_frac],
                      ">=", 0.0, "soc_terminal", (sid, bt.id))
        for t in range(1, n_slots + 1):
            b.add_row([soc[t], n_col], [1.0, -bt.unit_size_kwh * bt.soc_max_frac],
                      "<=", 0.0, "soc_upper", (sid, bt.id, t))
            b.add_row([soc[t], n_col], [1.0, -bt.unit_size_kwh * bt.soc_min_frac],
                      ">=", 0.0, "soc_lower", (sid, bt.id, t))
            b.add_row([ch[t], n_col], [1.0, -bt.max_charge_kw], "<=", 0.0,
                      "charge_cap", (sid, bt.id, t))
            b.add_row([dis[t], n_col], [1.0, -bt.max_discharge_kw], "<=", 0.0,
                      "discharge_cap", (sid, bt.id, t))
            big_c = bt.max_units * bt.max_charge_kw
            big_d = bt.max_units * bt.max_discharge_kw
            mode = mode_cols[(bt.id, t)]
            b.add_row([ch[t], mode], [1.0, -big_c], "<=", 0.0,
                      "exclusivity_charge", (sid, bt.id, t))
            b.add_row([dis[t], mode], [1.0, big_d], "<=", big_d,
                      "exclusivity_discharge", (sid, bt.id, t))


def add_grid_constraints(b: ProblemBuilder, scenario) -> None:
    """Grid power bounds (as column bounds) and the two trading-cost rows."""
    sid = scenario.id
    dt = scenario.delta_t_h
    grid = scenario.grid
    for t in range(1, scenario.n_slots + 1):
        g = b.add_var(GRID_POWER, (sid, t),
                      -float(grid.injection_limit_kw[t - 1]),
                      float(grid.withdrawal_limit_kw[t - 1]), CONTINUOUS)
        c_el = b.add_var(GRID_COST, (sid, t), -INF, INF, CONTINUOUS)
        b.add_row([c_el, g], [1.0, -dt * float(grid.buy_price[t - 1])], ">=", 0.0,
                  "price_relaxation_buy", (sid, t))
        b.add_row([c_el, g], [1.0, -dt * float(grid.sell_price[t - 1])], ">=", 0.0,
                  "price_relaxation_sell", (sid, t))


def add_power_balance(b: ProblemBuilder, catalog, scenario) -> None:
    """Generation plus grid and BESS discharge equals charging load plus BESS charge."""
    sid = scenario.id
    pv_profiles = [(b.col(PV_UNITS, p.id), pv_unit_profile(p, scenario)) for p in catalog.pv]
    wt_profiles = [(b.col(WT_UNITS, w.id), wt_unit_profile(w, scenario)) for w in catalog.wt]
    cands = catalog.candidate_chargers()
    for t in range(1, scenario.n_slots + 1):
        cols = [b.col(GRID_POWER, sid, t)]
        coefs = [1.0]
        for col, profile in pv_profiles:
            cols.append(col)
            coefs.append(float(profile[t - 1]))
        for col, profile in wt_profiles:
            cols.append(col)
            coefs.append(float(profile[t - 1]))
        for bt in catalog.bess:
            cols.append(b.col(BESS_DISCHARGE, sid, bt.id, t))
            coefs.append(1.0)
            cols.append(b.col(BESS_CHARGE, sid, bt.id, t))
            coefs.append(-1.0)
        for c in cands:
            p_col = b.key_to_col.get((CHARGER_POWER, sid, c.id, t))
            if p_col is not None:
                cols.append(p_col)
                coefs.append(-1.0)
        b.add_row(cols, coefs, "=", 0.0, "power_balance", (sid, t))


def build_objective(b: ProblemBuilder, catalog, scenarios, econ) -> None:
    """Annualized investment + maintenance + occurrence-weighted grid and wear cost."""
    r = econ.discount_rate
    for p in catalog.pv:
        kappa = cat.capital_recovery_factor(r, p.lifetime_years)
        b.add_objective(b.col(PV_UNITS, p.id), kappa * p.invest_cost + p.maintenance_cost)
    for w in catalog.wt:
        kappa = cat.capital_recovery_factor(r, w.lifetime_years)
        b.add_objective(b.col(WT_UNITS, w.id), kappa * w.invest_cost + w.maintenance_cost)
    for bt in catalog.bess:
        kappa = cat.capital_recovery_factor(r, bt.lifetime_years)
        b.add_objective(b.col(BESS_UNITS, bt.id),
                        kappa * bt.invest_cost + bt.maintenance_cost)
    for c in catalog.candidate_chargers():
        kappa = cat.capital_recovery_factor(r, c.type.lifetime_years)
        b.add_objective(b.col(CHARGER_INSTALLED, c.id),
                        kappa * c.type.invest_cost + c.type.maintenance_cost)
    for sc in scenarios:
        days = float(sc.occurrence_days)
        for t in range(1, sc.n_slots + 1):
            b.add_objective(b.col(GRID_COST, sc.id, t), days)
        for bt in catalog.bess:
            wear = days * bt.degradation_cost_per_kw
            if wear == 0.0:
                continue
            for t in range(1, sc.n_slots + 1):
                b.add_objective(b.col(BESS_CHARGE, sc.id, bt.id, t), wear)
                b.add_objective(b.col(BESS_DISCHARGE, sc.id, bt.id, t), wear)


def build_problem(catalog, scenarios, econ,
                  options: BuildOptions | None = None) -> tuple[MilpProblem, IndexMaps]:
    """Assemble the full sizing MILP for the given inputs.

    Raises InfeasibleInstance when a session fits no candidate charger, and
    ModelSizeError when the assembled size exceeds ``options.max_model_size``.
    """
    options = options or BuildOptions()
    b = ProblemBuilder(options)

    add_design_variables(b, catalog)
    add_symmetry_order(b, catalog)
    for sc in scenarios:
        add_session_constraints(b, catalog, sc)
        add_bess_constraints(b, catalog, sc)
        add_grid_constraints(b, sc)
        add_power_balance(b, catalog, sc)
    build_objective(b, catalog, scenarios, econ)

    if len(b.refs) > options.max_model_size or len(b.rows) > options.max_model_size:
        raise ModelSizeError(len(b.refs), len(b.rows), options.max_model_size)

    t_max_parked = max(
        (s.departure_slot - s.arrival_slot for sc in scenarios for s in sc.sessions),
        default=0)
    problem = MilpProblem(b.refs, b.rows, b.objective)
    maps = IndexMaps(b.refs, scenarios.delta_t_h, scenarios.n_slots,
                     [sc.id for sc in scenarios], t_max_parked)
    return problem, maps


def family_row_counts(problem: MilpProblem) -> dict[str, int]:
    """Row count per provenance tag (all tags present, possibly zero)."""
    counts = {tag: 0 for tag in sorted(ROW_TAGS)}
    for row in problem.rows:
        counts[row.tag] += 1
    return counts
