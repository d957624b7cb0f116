"""Exception types shared across the package."""


class CehoptError(Exception):
    """Base class for all package errors."""


class MissingFile(CehoptError):
    """A referenced input file does not exist or is unreadable."""


class SchemaViolation(CehoptError):
    """An input document is malformed (missing/mistyped field)."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(message if location is None else f"{location}: {message}")


class InvariantViolation(CehoptError):
    """A validated numeric invariant does not hold for the loaded data."""


class SessionWindowError(InvariantViolation):
    """A charging session has an empty or inverted arrival/departure window."""


class CalendarMismatch(CehoptError):
    """Scenario builder inputs do not cover the 12 months x {weekday, weekend}."""


class ConfigError(CehoptError):
    """A parameter value is outside the supported domain."""


class InfeasibleSession(CehoptError):
    """A session cannot complete on any candidate charger inside its window."""

    def __init__(self, vehicle_id, scenario_id, min_duration_slots, window_slots):
        self.vehicle_id = vehicle_id
        self.scenario_id = scenario_id
        self.min_duration_slots = min_duration_slots
        self.window_slots = window_slots
        super().__init__(
            f"session {vehicle_id!r} in scenario {scenario_id!r} needs at least "
            f"{min_duration_slots} slot(s) on the fastest charger but is parked "
            f"for only {window_slots}"
        )


class InfeasibleInstance(CehoptError):
    """The instance is unsatisfiable before solving (empty start windows)."""


class ModelSizeError(CehoptError):
    """Assembled problem exceeds the configured size cap."""

    def __init__(self, n_variables, n_constraints, cap):
        self.n_variables = n_variables
        self.n_constraints = n_constraints
        self.cap = cap
        super().__init__(
            f"model has {n_variables} variables / {n_constraints} constraints, "
            f"cap is {cap}"
        )


class BackendUnavailable(CehoptError):
    """Requested solver backend is not registered or cannot be imported."""


class NumericalFailure(CehoptError):
    """Backend reported a numerical problem, or returned non-integral integers."""


class EnumerationTooLarge(CehoptError):
    """Oracle enumeration would exceed the configured caps."""

    def __init__(self, message, count=None):
        self.count = count
        super().__init__(message)


class ValidationFailure(CehoptError):
    """A solution violates a model constraint when re-checked from raw inputs."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:8])
        more = "" if len(self.violations) <= 8 else f" (+{len(self.violations) - 8} more)"
        super().__init__(f"{len(self.violations)} constraint violation(s): {lines}{more}")


class IoError(CehoptError):
    """Report files could not be written."""
