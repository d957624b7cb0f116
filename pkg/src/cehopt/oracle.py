"""Exhaustive reference solver for tiny instances.

Enumerates every integer/binary assignment in structured order (design
counts, charger selections, one start choice per session) and prices the
remaining continuous dispatch with the in-package simplex, never touching
the production MILP backend. Charge/discharge mode flags are first relaxed;
when the relaxed dispatch is not complementary the flags are enumerated
exhaustively, so the result stays exact.

Two structural facts keep the enumeration honest but affordable: scenarios
decouple once the design is fixed, and the dispatch subproblem depends on a
schedule only through its per-slot load, so charger-permuted schedules
collapse into one LP solve.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import model as m
from .errors import EnumerationTooLarge, NumericalFailure
from .simplex import solve_lp
from .solve import SolveOutcome, Status

POWER_TOL = 1e-6     # kW below which a flow counts as zero
FEAS_TOL = 1e-6
DESIGN_KINDS = (m.PV_UNITS, m.WT_UNITS, m.BESS_UNITS)


@dataclass(frozen=True)
class OracleCaps:
    max_binary_columns: int = 22
    max_design_domain: int = 4
    max_leaf_evaluations: int = 200_000


class _Vals:
    """Sparse value lookup treating missing columns as zero."""

    __slots__ = ("_m",)

    def __init__(self, mapping):
        self._m = mapping

    def __getitem__(self, j):
        return self._m.get(j, 0.0)


def _row_ok(row, values) -> bool:
    act = row.activity(values)
    if row.relation == "<=":
        return act <= row.rhs + FEAS_TOL
    if row.relation == ">=":
        return act >= row.rhs - FEAS_TOL
    return abs(act - row.rhs) <= FEAS_TOL


class _Structure:
    """Column and row classification for one assembled problem."""

    def __init__(self, problem: m.MilpProblem):
        self.problem = problem
        self.design_cols = []   # (col, lo, hi) integer unit counts
        self.q_cols = []        # candidate selection binaries
        self.x_groups = {}      # (sid, session_idx) -> [col]
        self.delta_cols = {}    # sid -> [col]
        self.cont_cols = {}     # sid -> [col], charger power excluded
        self.power_cols = {}    # sid -> [col] charger power (schedule-determined)
        self.scenario_ids = []
        q_by_candidate = {}

        for j, ref in enumerate(problem.variables):
            if ref.kind in DESIGN_KINDS:
                self.design_cols.append((j, int(ref.lower), int(ref.upper)))
            elif ref.kind == m.CHARGER_INSTALLED:
                self.q_cols.append(j)
                q_by_candidate[ref.index[0]] = j
            elif ref.kind == m.CHARGE_START:
                self._touch(ref.index[0])
                self.x_groups.setdefault((ref.index[0], ref.index[1]), []).append(j)
            elif ref.kind == m.BESS_MODE:
                self._touch(ref.index[0])
                self.delta_cols[ref.index[0]].append(j)
            elif ref.kind == m.CHARGER_POWER:
                self._touch(ref.index[0])
                self.power_cols[ref.index[0]].append(j)
            else:
                self._touch(ref.index[0])
                self.cont_cols[ref.index[0]].append(j)
        self._q_by_candidate = q_by_candidate

        design_like = {j for j, _, _ in self.design_cols} | set(self.q_cols)
        x_cols = {j for cols in self.x_groups.values() for j in cols}
        self.design_rows = []
        self.schedule_rows = {sid: [] for sid in self.scenario_ids}
        self.dispatch_rows = {sid: [] for sid in self.scenario_ids}
        # sid -> [(power_col, slot, {x_col: rate})]
        self.power_defs = {sid: [] for sid in self.scenario_ids}
        for row in problem.rows:
            support = set(row.cols)
            if support <= design_like:
                self.design_rows.append(row)
                continue
            sid = self._row_scenario(row)
            if row.tag == "charger_power":
                rates = {}
                p_col = None
                for j, coef in zip(row.cols, row.coefs):
                    if self.problem.variables[j].kind == m.CHARGER_POWER:
                        p_col = j
                    else:
                        rates[j] = -coef
                self.power_defs[sid].append((p_col, row.key[-1], rates))
            elif support <= design_like | x_cols:
                self.schedule_rows[sid].append(row)
            else:
                self.dispatch_rows[sid].append(row)

    def _touch(self, sid):
        if sid not in self.cont_cols:
            self.scenario_ids.append(sid)
            self.cont_cols[sid] = []
            self.delta_cols[sid] = []
            self.power_cols[sid] = []

    def _row_scenario(self, row):
        refs = self.problem.variables
        for j in row.cols:
            if refs[j].kind not in DESIGN_KINDS and refs[j].kind != m.CHARGER_INSTALLED:
                return refs[j].index[0]
        raise AssertionError("row has no operational column")

    def linked_q(self, x_col: int) -> int:
        """Column of the charger-installed binary a start variable links to."""
        return self._q_by_candidate[self.problem.variables[x_col].index[2]]

    def power_values(self, sid, chosen_x: set) -> tuple[dict, tuple]:
        """Charger power columns implied by a schedule, plus the load key."""
        values = {}
        load = {}
        for p_col, slot, rates in self.power_defs.get(sid, []):
            p = sum(rate for x_col, rate in rates.items() if x_col in chosen_x)
            values[p_col] = p
            if p:
                load[slot] = load.get(slot, 0.0) + p
        return values, tuple(sorted(load.items()))


def _grid_cost_floor(problem: m.MilpProblem) -> float:
    """Lower bound on the occurrence-weighted trading + wear cost of any dispatch."""
    refs = problem.variables
    buy, sell = {}, {}
    for row in problem.rows:
        if row.tag == "price_relaxation_buy":
            buy[row.key] = -row.coefs[1]
        elif row.tag == "price_relaxation_sell":
            sell[row.key] = -row.coefs[1]
    grid_bounds = {ref.index: (ref.lower, ref.upper)
                   for ref in refs if ref.kind == m.GRID_POWER}
    floor = 0.0
    for j, ref in enumerate(refs):
        if ref.kind != m.GRID_COST:
            continue
        weight = problem.objective.get(j, 0.0)
        lo, hi = grid_bounds[ref.index]
        a, s = buy[ref.index], sell[ref.index]
        cands = [lo, hi] + ([0.0] if lo < 0.0 < hi else [])
        floor += weight * min(max(a * g, s * g) for g in cands)
    return floor


class _Dispatcher:
    """Prices the continuous dispatch of one scenario for fixed integers."""

    def __init__(self, problem, struct, sid):
        self.problem = problem
        self.sid = sid
        self.local = list(struct.cont_cols.get(sid, []))
        self.delta = list(struct.delta_cols.get(sid, []))
        self.rows = struct.dispatch_rows.get(sid, [])
        self.memo = {}

    def price(self, fixed_values: dict) -> tuple | None:
        """(objective, {col: value}) for the best dispatch, or None if infeasible."""
        relaxed = self._solve(fixed_values, relax_delta=True)
        if relaxed is None:
            return None  # the mode relaxation is a superset of every mode pattern
        obj, values = relaxed
        if self._complementary(values):
            return obj, self._with_integral_delta(values)
        best = None
        for pattern in itertools.product((0.0, 1.0), repeat=len(self.delta)):
            fixed = dict(fixed_values)
            fixed.update(zip(self.delta, pattern))
            got = self._solve(fixed, relax_delta=False)
            if got is None:
                continue
            got_obj, got_values = got
            if best is None or got_obj < best[0] - 1e-12:
                merged = dict(got_values)
                merged.update(zip(self.delta, pattern))
                best = (got_obj, merged)
        return best

    def _solve(self, fixed_values, relax_delta):
        cols = self.local + self.delta if relax_delta else self.local
        n = len(cols)
        pos = {j: k for k, j in enumerate(cols)}

        a_rows = np.zeros((len(self.rows), n))
        rels = []
        rhs = np.empty(len(self.rows))
        for i, row in enumerate(self.rows):
            shift = 0.0
            for j, coef in zip(row.cols, row.coefs):
                k = pos.get(j)
                if k is not None:
                    a_rows[i, k] += coef
                else:
                    shift += coef * fixed_values[j]
            rels.append(row.relation)
            rhs[i] = row.rhs - shift

        # the matrix and bounds are scenario constants; everything the fixed
        # integers do to this LP lands in the right-hand side
        key = (relax_delta, rhs.tobytes())
        if key in self.memo:
            return self.memo[key]

        refs = self.problem.variables
        lo = np.array([refs[j].lower for j in cols])
        hi = np.array([refs[j].upper for j in cols])
        c = np.array([self.problem.objective.get(j, 0.0) for j in cols])

        res = solve_lp(c, a_rows, rels, rhs, lo, hi)
        if res.status == "infeasible":
            out = None
        elif res.status == "unbounded":
            raise NumericalFailure(f"dispatch LP unbounded in scenario {self.sid!r}")
        else:
            out = (res.objective, {j: float(res.x[pos[j]]) for j in cols})
        self.memo[key] = out
        return out

    def _complementary(self, values) -> bool:
        # aggregated per slot: valid for the shared mode flag, conservative
        # (never wrong, possibly stricter) for per-technology flags
        refs = self.problem.variables
        flows = {}
        for j in self.local:
            ref = refs[j]
            if ref.kind == m.BESS_CHARGE:
                flows.setdefault(ref.index[-1], [0.0, 0.0])[0] += values[j]
            elif ref.kind == m.BESS_DISCHARGE:
                flows.setdefault(ref.index[-1], [0.0, 0.0])[1] += values[j]
        return all(ch <= POWER_TOL or dis <= POWER_TOL for ch, dis in flows.values())

    def _with_integral_delta(self, values) -> dict:
        refs = self.problem.variables
        out = {j: values[j] for j in self.local}
        charging_slots = set()
        for j in self.local:
            if refs[j].kind == m.BESS_CHARGE and values[j] > POWER_TOL:
                charging_slots.add(refs[j].index[-1])
        for j in self.delta:
            out[j] = 1.0 if refs[j].index[-1] in charging_slots else 0.0
        return out


def oracle_solve(problem: m.MilpProblem, caps: OracleCaps | None = None) -> SolveOutcome:
    """Solve by structured exhaustive enumeration; exact on in-cap instances."""
    caps = caps or OracleCaps()
    t0 = time.perf_counter()
    struct = _Structure(problem)

    n_binaries = len(struct.q_cols) + sum(len(v) for v in struct.x_groups.values()) \
        + sum(len(v) for v in struct.delta_cols.values())
    if n_binaries > caps.max_binary_columns:
        raise EnumerationTooLarge(
            f"{n_binaries} binary columns exceed the cap {caps.max_binary_columns}",
            count=n_binaries)
    for j, lo, hi in struct.design_cols:
        if hi - lo + 1 > caps.max_design_domain:
            raise EnumerationTooLarge(
                f"design column {problem.variables[j].key} has domain {hi - lo + 1} "
                f"> cap {caps.max_design_domain}", count=hi - lo + 1)

    n_designs = math.prod(hi - lo + 1 for _, lo, hi in struct.design_cols)
    sched_total = 0
    for sid in struct.scenario_ids:
        groups = [cols for (s, _), cols in sorted(struct.x_groups.items()) if s == sid]
        sched_total += max(1, math.prod(len(g) for g in groups))
    leaves = n_designs * (2 ** len(struct.q_cols)) * max(1, sched_total)
    if leaves > caps.max_leaf_evaluations:
        raise EnumerationTooLarge(
            f"about {leaves} enumeration leaves exceed the cap "
            f"{caps.max_leaf_evaluations}", count=leaves)

    refs = problem.variables
    obj = problem.objective
    dispatchers = {sid: _Dispatcher(problem, struct, sid) for sid in struct.scenario_ids}
    op_floor = _grid_cost_floor(problem)

    # designs sorted by fixed objective contribution enable an early cut-off
    design_choices = []
    for combo in itertools.product(
            *(range(lo, hi + 1) for _, lo, hi in struct.design_cols)):
        cost = sum(obj.get(col, 0.0) * val
                   for (col, _, _), val in zip(struct.design_cols, combo))
        design_choices.append((cost, combo))
    design_choices.sort(key=lambda t: (t[0], t[1]))

    best_total = math.inf
    best_vector = None
    leaves_done = 0

    for q_pat in itertools.product((0.0, 1.0), repeat=len(struct.q_cols)):
        q_values = dict(zip(struct.q_cols, q_pat))
        if not all(_row_ok(row, _Vals(q_values)) for row in struct.design_rows):
            continue
        q_cost = sum(obj.get(j, 0.0) * v for j, v in q_values.items())

        # schedules compatible with this charger selection, per scenario,
        # deduplicated by per-slot load (dispatch only sees the load)
        schedules = {}
        feasible_q = True
        for sid in struct.scenario_ids:
            groups = [(key, cols) for key, cols in sorted(struct.x_groups.items())
                      if key[0] == sid]
            options = []
            for _, cols in groups:
                usable = [j for j in cols if q_values[struct.linked_q(j)] == 1.0]
                if not usable:
                    feasible_q = False
                    break
                options.append(usable)
            if not feasible_q:
                break
            all_x = [j for _, cols in groups for j in cols]
            by_load = {}
            for pick in (itertools.product(*options) if options else [()]):
                chosen = set(pick)
                x_values = {j: (1.0 if j in chosen else 0.0) for j in all_x}
                vals = _Vals({**q_values, **x_values})
                if not all(_row_ok(row, vals)
                           for row in struct.schedule_rows.get(sid, [])):
                    continue
                p_values, load_key = struct.power_values(sid, chosen)
                by_load.setdefault(load_key, (x_values, p_values))
            if not by_load:
                feasible_q = False
                break
            schedules[sid] = list(by_load.values())
        if not feasible_q:
            continue

        for design_cost, combo in design_choices:
            fixed_cost = design_cost + q_cost
            if fixed_cost + op_floor >= best_total - 1e-12:
                break
            design_values = {col: float(val)
                             for (col, _, _), val in zip(struct.design_cols, combo)}
            total = fixed_cost
            chosen_parts = []
            ok = True
            for sid in struct.scenario_ids:
                best_op = None
                for x_values, p_values in schedules[sid]:
                    leaves_done += 1
                    got = dispatchers[sid].price(
                        {**design_values, **q_values, **p_values})
                    if got is not None and (best_op is None or got[0] < best_op[0] - 1e-12):
                        best_op = (got[0], x_values, p_values, got[1])
                if best_op is None:
                    ok = False
                    break
                total += best_op[0]
                chosen_parts.append(best_op)
            if ok and total < best_total - 1e-12:
                best_total = total
                vec = np.zeros(len(refs))
                for part in (design_values, q_values):
                    for col, val in part.items():
                        vec[col] = val
                for _, x_values, p_values, cont_values in chosen_parts:
                    for group in (x_values, p_values, cont_values):
                        for col, val in group.items():
                            vec[col] = val
                best_vector = vec

    wall = time.perf_counter() - t0
    diagnostics = {"leaves": leaves_done, "binaries": n_binaries}
    if best_vector is None:
        return SolveOutcome(Status.INFEASIBLE, None, None, None, None, wall,
                            "oracle", diagnostics)

    # self-check: the assembled point must satisfy every row of the problem
    for row in problem.rows:
        if not _row_ok(row, best_vector):
            raise NumericalFailure(
                f"oracle produced an infeasible point; bad row {row.tag}{row.key}")
    recomputed = float(problem.objective_vector() @ best_vector) \
        + problem.objective_constant
    if abs(recomputed - best_total) > 1e-6 * max(1.0, abs(recomputed)):
        raise NumericalFailure("oracle objective bookkeeping mismatch")

    return SolveOutcome(Status.OPTIMAL, best_vector, recomputed, recomputed, 0.0,
                        wall, "oracle", diagnostics)
