"""Problem export for external-solver debugging.

Two formats: free-form MPS (columns carry sanitized semantic names so they
stay traceable in a third-party solver log) and a plain-text dump of every
row keyed by its provenance tag and indices.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

from .model import BINARY, CONTINUOUS, MilpProblem

_SANITIZE = re.compile(r"[^A-Za-z0-9]+")


def _name(prefix: str, i: int, parts) -> str:
    stem = _SANITIZE.sub("_", "_".join(str(p) for p in parts)).strip("_")
    name = f"{prefix}{i}_{stem}" if stem else f"{prefix}{i}"
    return name[:64]


def column_names(problem: MilpProblem) -> list[str]:
    return [_name("C", j, ref.key) for j, ref in enumerate(problem.variables)]


def row_names(problem: MilpProblem) -> list[str]:
    return [_name("R", i, (row.tag, *row.key)) for i, row in enumerate(problem.rows)]


def write_mps(problem: MilpProblem, path, name: str = "CEHOPT") -> Path:
    """Write the problem as free-form MPS (minimization, objective row COST)."""
    path = Path(path)
    cols = column_names(problem)
    rows = row_names(problem)
    rel_code = {"<=": "L", ">=": "G", "=": "E"}

    # column-major entries
    entries: list[list[tuple[str, float]]] = [[] for _ in problem.variables]
    for i, row in enumerate(problem.rows):
        for j, coef in zip(row.cols, row.coefs):
            entries[j].append((rows[i], coef))

    lines = [f"NAME {name}", "ROWS", " N COST"]
    for i, row in enumerate(problem.rows):
        lines.append(f" {rel_code[row.relation]} {rows[i]}")

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j, ref in enumerate(problem.variables):
        want_int = ref.is_integral
        if want_int != in_int:
            tag = "INTORG" if want_int else "INTEND"
            lines.append(f" MARKER{marker} 'MARKER' '{tag}'")
            marker += 1
            in_int = want_int
        # every column appears at least under COST so no column is orphaned
        lines.append(f" {cols[j]} COST {problem.objective.get(j, 0.0):.17g}")
        for rname, coef in entries[j]:
            lines.append(f" {cols[j]} {rname} {coef:.17g}")
    if in_int:
        lines.append(f" MARKER{marker} 'MARKER' 'INTEND'")

    lines.append("RHS")
    for i, row in enumerate(problem.rows):
        if row.rhs != 0.0:
            lines.append(f" RHS {rows[i]} {row.rhs:.17g}")
    if problem.objective_constant:
        # MPS convention: objective constant enters negated via the RHS
        lines.append(f" RHS COST {-problem.objective_constant:.17g}")

    lines.append("BOUNDS")
    for j, ref in enumerate(problem.variables):
        lo, hi = ref.lower, ref.upper
        if ref.integrality == BINARY and lo == 0.0 and hi == 1.0:
            lines.append(f" BV BND {cols[j]}")
            continue
        if ref.integrality != CONTINUOUS:
            lines.append(f" LI BND {cols[j]} {int(lo)}")
            lines.append(f" UI BND {cols[j]} {int(hi)}")
            continue
        if lo == -math.inf and hi == math.inf:
            lines.append(f" FR BND {cols[j]}")
            continue
        if lo == -math.inf:
            lines.append(f" MI BND {cols[j]}")
        elif lo != 0.0:
            lines.append(f" LO BND {cols[j]} {lo:.17g}")
        if hi != math.inf:
            lines.append(f" UP BND {cols[j]} {hi:.17g}")

    lines.append("ENDATA")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_constraint_dump(problem: MilpProblem, path) -> Path:
    """Write every row as `tag[indices]: linear expression REL rhs`, tag-sorted."""
    path = Path(path)
    cols = column_names(problem)
    order = sorted(range(len(problem.rows)), key=lambda i: (problem.rows[i].tag, i))
    lines = [f"variables {problem.n_variables} constraints {problem.n_constraints}"]
    for i in order:
        row = problem.rows[i]
        terms = " + ".join(f"{coef:g}*{cols[j]}" for j, coef in zip(row.cols, row.coefs))
        key = ",".join(str(k) for k in row.key)
        lines.append(f"{row.tag}[{key}]: {terms} {row.relation} {row.rhs:g}")
    path.write_text("\n".join(lines) + "\n")
    return path
