"""Command-line entry point: validate, size, crosscheck.

Exit codes
    validate    0 inputs valid, 2 schema/invariant problem, 3 session that
                fits no charger type
    size        0 optimal, 10 feasible (not proven optimal), 20 infeasible,
                30 stopped at the time limit without a solution
    crosscheck  0 backend and oracle agree, 40 objectives disagree,
                41 instance too large for the oracle
    any         1 unexpected backend/internal failure

`size` always leaves a run_manifest.json in the output directory, also on
failure paths, so a run can be reproduced from its artifacts.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .errors import (
    BackendUnavailable,
    CehoptError,
    EnumerationTooLarge,
    InfeasibleInstance,
    InfeasibleSession,
    NumericalFailure,
)
from .catalog import check_session_feasibility
from .export import write_constraint_dump, write_mps
from .ingest import load_inputs, load_model_options
from .model import BuildOptions, build_problem
from .oracle import OracleCaps, oracle_solve
from .report import compute_energy_balance, extract_solution, render_reports
from .solve import SolveOptions, Status, solve

STATUS_EXIT = {
    Status.OPTIMAL: 0,
    Status.FEASIBLE: 10,
    Status.INFEASIBLE: 20,
    Status.UNBOUNDED: 20,
    Status.TIME_LIMIT: 30,
}


def _solve_options(args) -> SolveOptions:
    return SolveOptions(
        relative_gap_tolerance=args.gap,
        time_limit_s=args.time_limit,
        seed=args.seed,
        backend_id=args.backend,
    )


def _versions() -> dict:
    import numpy
    import scipy
    return {
        "cehopt": __version__,
        "python": sys.version.split()[0],
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }


def _write_manifest(out_dir: Path, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, out_dir / "run_manifest.json")
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_validate(args) -> int:
    try:
        catalog, scenarios, econ = load_inputs(args.config)
    except CehoptError as exc:
        print(f"invalid inputs: {exc}", file=sys.stderr)
        return 2
    try:
        for sc in scenarios:
            for session in sc.sessions:
                check_session_feasibility(session, catalog.chargers, sc.delta_t_h, sc.id)
    except InfeasibleSession as exc:
        print(f"InfeasibleSession: {exc}", file=sys.stderr)
        return 3
    n_sessions = sum(len(sc.sessions) for sc in scenarios)
    print(f"inputs valid: {len(scenarios)} scenarios x {scenarios.n_slots} slots "
          f"({scenarios.delta_t_h} h), {n_sessions} sessions, "
          f"{scenarios.total_days} occurrence days")
    return 0


def cmd_size(args) -> int:
    out_dir = Path(args.out)
    started = datetime.datetime.now(datetime.timezone.utc)
    manifest = {
        "command": "size",
        "config": str(Path(args.config).resolve()),
        "output_dir": str(out_dir.resolve()),
        "backend": args.backend,
        "options": {
            "gap": args.gap,
            "time_limit_s": args.time_limit,
            "seed": args.seed,
            "export_model": bool(args.export_model),
        },
        "versions": _versions(),
        "started_at": started.isoformat(),
        "status": "failed",
        "objective": None,
    }
    code = 1
    try:
        catalog, scenarios, econ = load_inputs(args.config)
        model_options = load_model_options(args.config)
        manifest["model_options"] = model_options
        problem, maps = build_problem(catalog, scenarios, econ,
                                      BuildOptions(**model_options))
        if args.export_model:
            write_mps(problem, out_dir / "problem.mps")
            write_constraint_dump(problem, out_dir / "constraints.txt")
        outcome = solve(problem, _solve_options(args))
        manifest["status"] = outcome.status.value
        manifest["objective"] = outcome.objective
        manifest["solve_wall_s"] = outcome.wall_time_s
        code = STATUS_EXIT[outcome.status]
        if outcome.has_solution:
            solution = extract_solution(outcome, maps, catalog, scenarios, econ,
                                        **model_options)
            balance = compute_energy_balance(solution, scenarios)
            render_reports(solution, balance, scenarios, out_dir)
            print(f"{outcome.status.value}: total cost {solution.costs.total:.2f} "
                  f"EUR/yr; reports in {out_dir}")
        else:
            print(f"{outcome.status.value}: no solution reported", file=sys.stderr)
        return code
    except CehoptError as exc:
        manifest["status"] = "failed"
        manifest["error"] = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, (InfeasibleInstance, InfeasibleSession)):
            code = STATUS_EXIT[Status.INFEASIBLE]
            manifest["status"] = Status.INFEASIBLE.value
        elif isinstance(exc, BackendUnavailable):
            code = 1
        else:
            code = 2 if not isinstance(exc, NumericalFailure) else 1
        return code
    finally:
        manifest["finished_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        try:
            _write_manifest(out_dir, manifest)
        except OSError as exc:  # hard I/O loss only
            print(f"could not write manifest: {exc}", file=sys.stderr)


def cmd_crosscheck(args) -> int:
    try:
        catalog, scenarios, econ = load_inputs(args.config)
        model_options = load_model_options(args.config)
        problem, maps = build_problem(catalog, scenarios, econ,
                                      BuildOptions(**model_options))
    except CehoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    caps = OracleCaps()
    if args.oracle_caps:
        parts = [int(p) for p in args.oracle_caps.split(",")]
        fields = ("max_binary_columns", "max_design_domain", "max_leaf_evaluations")
        caps = OracleCaps(**dict(zip(fields, parts)))

    try:
        reference = oracle_solve(problem, caps)
    except EnumerationTooLarge as exc:
        print(f"EnumerationTooLarge: {exc}", file=sys.stderr)
        return 41
    outcome = solve(problem, _solve_options(args))

    if reference.status is not outcome.status:
        print(f"status mismatch: backend {outcome.status.value}, "
              f"oracle {reference.status.value}", file=sys.stderr)
        return 40
    if reference.status is not Status.OPTIMAL:
        print(f"both report {reference.status.value}; nothing to compare")
        return 0
    gap = abs(outcome.objective - reference.objective) \
        / max(1.0, abs(reference.objective))
    print(f"backend {outcome.objective:.9g} vs oracle {reference.objective:.9g} "
          f"(relative gap {gap:.3e})")
    if gap > 1e-6:
        print("objectives disagree beyond 1e-6", file=sys.stderr)
        return 40
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cehopt",
        description="co-design sizing and smart-charging scheduling for "
                    "charging energy hubs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=False):
        p.add_argument("--config", required=True, help="input config YAML")
        if with_out:
            p.add_argument("--out", required=True, help="report output directory")
        p.add_argument("--backend", default=os.environ.get("CEHOPT_BACKEND", "scipy"))
        p.add_argument("--gap", type=float, default=1e-6,
                       help="relative MIP gap tolerance")
        p.add_argument("--time-limit", type=float, default=3600.0, metavar="S")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate", help="check inputs and pre-solve feasibility")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("size", help="run the full sizing pipeline")
    common(p, with_out=True)
    p.add_argument("--export-model", action="store_true",
                   help="also write problem.mps and constraints.txt")
    p.set_defaults(func=cmd_size)

    p = sub.add_parser("crosscheck", help="compare backend against the oracle")
    common(p)
    p.add_argument("--oracle-caps", metavar="BIN,DOM,LEAVES",
                   help="binary, design-domain and leaf caps for the oracle")
    p.set_defaults(func=cmd_crosscheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BackendUnavailable, NumericalFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
