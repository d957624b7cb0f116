"""Pluggable MILP solving.

Backends register under a string id; the default backend drives the HiGHS
branch-and-bound shipped with scipy. Statuses carry solver semantics only,
infeasible/unbounded are outcomes, not exceptions.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .errors import BackendUnavailable, NumericalFailure
from .model import MilpProblem

INTEGRALITY_TOL = 1e-6


class Status(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"       # incumbent found, optimality not proven
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIME_LIMIT = "time_limit"   # stopped with no incumbent


@dataclass(frozen=True)
class SolveOptions:
    relative_gap_tolerance: float = 1e-6
    time_limit_s: float = 3600.0
    thread_count_hint: int = 1
    seed: int = 0
    backend_id: str = "scipy"

    def __post_init__(self):
        if self.relative_gap_tolerance < 0.0:
            raise ValueError("gap tolerance must be >= 0")
        if self.time_limit_s <= 0.0:
            raise ValueError("time limit must be positive")


@dataclass(frozen=True)
class SolveOutcome:
    status: Status
    column_values: np.ndarray | None
    objective: float | None
    bound: float | None
    gap: float | None
    wall_time_s: float
    backend_id: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def has_solution(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE) \
            and self.column_values is not None


def _round_integers(problem: MilpProblem, x: np.ndarray) -> np.ndarray:
    """Round integer columns, refusing values further than the tolerance."""
    out = np.array(x, dtype=float)
    for j, ref in enumerate(problem.variables):
        if not ref.is_integral:
            continue
        rounded = round(out[j])
        if abs(out[j] - rounded) > 1e-5:
            raise NumericalFailure(
                f"column {ref.key} = {out[j]!r} is not integral within tolerance")
        out[j] = rounded
    return out


class ScipyMilpBackend:
    """HiGHS via scipy.optimize.milp. Deterministic for a fixed input."""

    id = "scipy"

    def solve(self, problem: MilpProblem, opts: SolveOptions) -> SolveOutcome:
        c = problem.objective_vector()
        lb, ub = problem.bounds_arrays()
        integrality = problem.integrality_vector()
        constraints = []
        if problem.n_constraints:
            A, row_lb, row_ub = problem.constraint_matrix()
            constraints.append(LinearConstraint(A, row_lb, row_ub))

        t0 = time.perf_counter()
        res = milp(
            c,
            constraints=constraints,
            integrality=integrality,
            bounds=Bounds(lb, ub),
            options={
                "time_limit": opts.time_limit_s,
                "mip_rel_gap": opts.relative_gap_tolerance,
                "presolve": True,
                "disp": False,
            },
        )
        wall = time.perf_counter() - t0

        diagnostics = {
            "message": res.message,
            "scipy_status": int(res.status),
            "node_count": int(getattr(res, "mip_node_count", 0) or 0),
        }
        bound = getattr(res, "mip_dual_bound", None)
        gap = getattr(res, "mip_gap", None)

        if res.status == 0:
            x = _round_integers(problem, res.x)
            objective = float(res.fun) + problem.objective_constant
            return SolveOutcome(Status.OPTIMAL, x, objective,
                                None if bound is None else float(bound) + problem.objective_constant,
                                0.0 if gap is None else float(gap),
                                wall, self.id, diagnostics)
        if res.status == 1:  # iteration / time limit
            if res.x is not None:
                x = _round_integers(problem, res.x)
                objective = float(res.fun) + problem.objective_constant
                return SolveOutcome(Status.FEASIBLE, x, objective,
                                    None if bound is None else float(bound) + problem.objective_constant,
                                    None if gap is None else float(gap),
                                    wall, self.id, diagnostics)
            return SolveOutcome(Status.TIME_LIMIT, None, None, None, None,
                                wall, self.id, diagnostics)
        if res.status == 2:
            return SolveOutcome(Status.INFEASIBLE, None, None, None, None,
                                wall, self.id, diagnostics)
        if res.status == 3:
            return SolveOutcome(Status.UNBOUNDED, None, None, None, None,
                                wall, self.id, diagnostics)
        raise NumericalFailure(f"backend reported: {res.message}")


_BACKENDS = {ScipyMilpBackend.id: ScipyMilpBackend}


def register_backend(backend_id: str, factory) -> None:
    _BACKENDS[backend_id] = factory


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(backend_id: str):
    try:
        factory = _BACKENDS[backend_id]
    except KeyError:
        raise BackendUnavailable(
            f"no backend {backend_id!r}; available: {', '.join(available_backends())}"
        ) from None
    return factory()


def solve(problem: MilpProblem, opts: SolveOptions | None = None) -> SolveOutcome:
    """Solve through the backend named in the options (default scipy/HiGHS)."""
    opts = opts or SolveOptions()
    outcome = get_backend(opts.backend_id).solve(problem, opts)
    if outcome.status is Status.OPTIMAL and outcome.bound is not None \
            and outcome.objective is not None:
        tol = max(opts.relative_gap_tolerance, 1e-9)
        slack = tol * max(1.0, abs(outcome.objective)) + 1e-7
        if abs(outcome.objective - outcome.bound) > slack:
            raise NumericalFailure(
                f"optimal status with gap {outcome.objective - outcome.bound!r} "
                f"beyond tolerance {slack!r}")
    return outcome
