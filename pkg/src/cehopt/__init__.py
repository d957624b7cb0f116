"""Co-design sizing and smart-charging scheduling for charging energy hubs.

The pipeline: :func:`cehopt.ingest.load_inputs` reads and validates the
catalog, scenario and economic data; :func:`cehopt.model.build_problem`
assembles the sizing MILP; :func:`cehopt.solve.solve` runs a backend (or
:func:`cehopt.oracle.oracle_solve` enumerates a tiny instance exactly); and
:func:`cehopt.report.extract_solution` re-validates and reports the result.
"""

__version__ = "0.1.0"

from .catalog import (  # noqa: F401
    BessTechnology,
    ChargerType,
    PvTechnology,
    TechnologyCatalog,
    WtTechnology,
    capital_recovery_factor,
)
from .ingest import (  # noqa: F401
    ChargingSession,
    EconomicParams,
    GridContract,
    Scenario,
    ScenarioSet,
    load_inputs,
)
from .model import BuildOptions, MilpProblem, build_problem  # noqa: F401
from .oracle import OracleCaps, oracle_solve  # noqa: F401
from .report import HubSolution, compute_energy_balance, extract_solution  # noqa: F401
from .solve import SolveOptions, SolveOutcome, Status, solve  # noqa: F401
