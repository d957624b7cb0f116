"""Technology unit models: PV and wind output, BESS parameters, charger types.

All power values are kW, energies kWh, durations hours, costs EUR. The
catalog holds one record per purchasable unit; design variables count how
many units of each record get installed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, InfeasibleSession

logger = logging.getLogger(__name__)

BETZ_LIMIT = 16.0 / 27.0


@dataclass(frozen=True)
class PvTechnology:
    """One PV unit: output = efficiency * area * irradiance."""

    id: str
    efficiency: float
    area_m2: float
    invest_cost: float
    maintenance_cost: float
    lifetime_years: float
    max_units: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ConfigError(f"PV {self.id!r}: efficiency must be in (0, 1]")
        if self.area_m2 <= 0.0:
            raise ConfigError(f"PV {self.id!r}: area must be positive")
        if self.invest_cost < 0.0 or self.maintenance_cost < 0.0:
            raise ConfigError(f"PV {self.id!r}: costs must be non-negative")
        if self.lifetime_years < 1.0:
            raise ConfigError(f"PV {self.id!r}: lifetime must be >= 1 year")
        if self.max_units < 0:
            raise ConfigError(f"PV {self.id!r}: max_units must be >= 0")


@dataclass(frozen=True)
class WtTechnology:
    """One wind turbine with a cut-in / cubic / rated / cut-out power curve.

    The efficiency coefficient is derived so that the cubic branch meets the
    rated power exactly at the rated speed, which keeps the curve continuous.
    """

    id: str
    cut_in_ms: float
    rated_speed_ms: float
    cut_out_ms: float
    rated_power_kw: float
    swept_area_m2: float
    air_density_kg_m3: float
    hub_height_m: float
    measurement_height_m: float
    shear_exponent: float
    invest_cost: float
    maintenance_cost: float
    lifetime_years: float
    max_units: int = 10

    def __post_init__(self):
        if not 0.0 < self.cut_in_ms < self.rated_speed_ms <= self.cut_out_ms:
            raise ConfigError(
                f"WT {self.id!r}: need 0 < cut_in < rated <= cut_out, got "
                f"{self.cut_in_ms}/{self.rated_speed_ms}/{self.cut_out_ms}"
            )
        if self.rated_power_kw <= 0.0:
            raise ConfigError(f"WT {self.id!r}: rated power must be positive")
        if self.swept_area_m2 <= 0.0 or self.air_density_kg_m3 <= 0.0:
            raise ConfigError(f"WT {self.id!r}: swept area and air density must be positive")
        if self.measurement_height_m <= 0.0 or self.hub_height_m <= 0.0:
            raise ConfigError(f"WT {self.id!r}: heights must be positive")
        if self.shear_exponent <= 0.0:
            raise ConfigError(f"WT {self.id!r}: shear exponent must be positive")
        if self.lifetime_years < 1.0:
            raise ConfigError(f"WT {self.id!r}: lifetime must be >= 1 year")
        c = self.efficiency_coefficient
        if not 0.0 < c <= 1.0:
            raise ConfigError(
                f"WT {self.id!r}: derived efficiency coefficient {c:.4f} outside (0, 1]"
            )
        if c > BETZ_LIMIT:
            logger.warning(
                "WT %r: efficiency coefficient %.4f exceeds the Betz limit %.4f; "
                "check rated power / swept area", self.id, c, BETZ_LIMIT,
            )

    @property
    def efficiency_coefficient(self) -> float:
        """Rated power divided by the kinetic power in the wind at rated speed."""
        rated_w = self.rated_power_kw * 1000.0
        kinetic_w = 0.5 * self.air_density_kg_m3 * self.swept_area_m2 * self.rated_speed_ms**3
        return rated_w / kinetic_w


@dataclass(frozen=True)
class BessTechnology:
    """One battery unit: size, efficiencies, SOC window, power limits, costs."""

    id: str
    unit_size_kwh: float
    charge_efficiency: float
    discharge_efficiency: float
    self_discharge_per_h: float
    soc_min_frac: float
    soc_max_frac: float
    soc_init_frac: float
    max_charge_kw: float
    max_discharge_kw: float
    max_units: int
    invest_cost: float
    maintenance_cost: float
    degradation_cost_per_kw: float
    lifetime_years: float

    def __post_init__(self):
        if not 0.0 <= self.soc_min_frac <= self.soc_init_frac <= self.soc_max_frac <= 1.0:
            raise ConfigError(
                f"BESS {self.id!r}: need 0 <= soc_min <= soc_init <= soc_max <= 1"
            )
        if not 0.0 < self.charge_efficiency <= 1.0:
            raise ConfigError(f"BESS {self.id!r}: charge efficiency must be in (0, 1]")
        if not 0.0 < self.discharge_efficiency <= 1.0:
            raise ConfigError(f"BESS {self.id!r}: discharge efficiency must be in (0, 1]")
        if self.self_discharge_per_h < 0.0:
            raise ConfigError(f"BESS {self.id!r}: self-discharge must be >= 0")
        if self.unit_size_kwh <= 0.0:
            raise ConfigError(f"BESS {self.id!r}: unit size must be positive")
        if self.max_charge_kw < 0.0 or self.max_discharge_kw < 0.0:
            raise ConfigError(f"BESS {self.id!r}: power limits must be >= 0")
        if self.max_units < 1:
            raise ConfigError(f"BESS {self.id!r}: max_units must be >= 1")
        if self.degradation_cost_per_kw < 0.0:
            raise ConfigError(f"BESS {self.id!r}: degradation cost must be >= 0")
        if self.lifetime_years < 1.0:
            raise ConfigError(f"BESS {self.id!r}: lifetime must be >= 1 year")


@dataclass(frozen=True)
class ChargerType:
    """One charger model; `candidate_count` copies enter the candidate set."""

    id: str
    max_power_kw: float
    invest_cost: float
    maintenance_cost: float
    candidate_count: int
    lifetime_years: float

    def __post_init__(self):
        if self.max_power_kw <= 0.0:
            raise ConfigError(f"charger {self.id!r}: max power must be positive")
        if self.candidate_count < 1:
            raise ConfigError(f"charger {self.id!r}: candidate_count must be >= 1")
        if self.lifetime_years < 1.0:
            raise ConfigError(f"charger {self.id!r}: lifetime must be >= 1 year")


@dataclass(frozen=True)
class CandidateCharger:
    """One installable charger slot: copy `order` (1-based) of its type."""

    id: str
    type: ChargerType
    order: int

    @property
    def max_power_kw(self) -> float:
        return self.type.max_power_kw


@dataclass(frozen=True)
class TechnologyCatalog:
    pv: tuple[PvTechnology, ...] = ()
    wt: tuple[WtTechnology, ...] = ()
    bess: tuple[BessTechnology, ...] = ()
    chargers: tuple[ChargerType, ...] = ()

    def candidate_chargers(self) -> tuple[CandidateCharger, ...]:
        """Expand charger types into the ordered candidate set (size sum of counts)."""
        out = []
        for ct in self.chargers:
            for j in range(1, ct.candidate_count + 1):
                out.append(CandidateCharger(id=f"{ct.id}#{j}", type=ct, order=j))
        return tuple(out)


def pv_unit_power(tech: PvTechnology, irradiance_kw_m2: float) -> float:
    """Output of one PV unit [kW] for a given plane-of-array irradiance [kW/m2]."""
    if irradiance_kw_m2 < 0.0:
        raise ConfigError("irradiance must be non-negative")
    return tech.efficiency * tech.area_m2 * irradiance_kw_m2


def scale_wind_speed(tech: WtTechnology, measured_ms: float) -> float:
    """Project a measured wind speed to hub height with the power-law profile."""
    if measured_ms < 0.0:
        raise ConfigError("wind speed must be non-negative")
    if tech.measurement_height_m <= 0.0:
        raise ConfigError(f"WT {tech.id!r}: measurement height must be positive")
    return measured_ms * (tech.hub_height_m / tech.measurement_height_m) ** tech.shear_exponent


def wt_unit_power(tech: WtTechnology, hub_speed_ms: float) -> float:
    """Output of one turbine [kW] at hub-height wind speed.

    Zero below cut-in and above cut-out, cubic between cut-in and rated,
    flat at rated power between rated and cut-out. The cubic and flat
    branches agree at the rated speed by construction of the efficiency
    coefficient; the rated speed itself is assigned to the flat branch.
    """
    v = hub_speed_ms
    if v < 0.0:
        raise ConfigError("wind speed must be non-negative")
    if v < tech.cut_in_ms or v > tech.cut_out_ms:
        return 0.0
    if v >= tech.rated_speed_ms:
        return tech.rated_power_kw
    c = tech.efficiency_coefficient
    return 0.5 * c * tech.air_density_kg_m3 * tech.swept_area_m2 * v**3 / 1000.0


def capital_recovery_factor(rate: float, lifetime_years: float) -> float:
    """Annualization factor r(1+r)^L / ((1+r)^L - 1) for an upfront investment."""
    if rate <= 0.0:
        raise ConfigError("discount rate must be positive (the factor degenerates at 0)")
    if lifetime_years < 1.0:
        raise ConfigError("lifetime must be at least one year")
    growth = (1.0 + rate) ** lifetime_years
    return rate * growth / (growth - 1.0)


def effective_rate(session, charger: ChargerType) -> float:
    """Actual charging rate [kW]: the lesser of vehicle and charger limits."""
    return min(session.max_vehicle_rate_kw, charger.max_power_kw)


def duration_slots(energy_kwh: float, rate_kw: float, delta_t_h: float) -> int:
    """Number of slots a constant-power delivery of `energy_kwh` occupies.

    Required hours are rounded up to a whole hour first, then converted to
    slots. When the slot width does not divide the rounded hour count the
    result is rounded up once more so the session always fits an integral
    number of slots (logged, since the session then over-delivers further).
    """
    if rate_kw <= 0.0:
        raise ConfigError("effective charging rate must be positive")
    if delta_t_h <= 0.0:
        raise ConfigError("slot width must be positive")
    hours = math.ceil(energy_kwh / rate_kw)
    slots = Fraction(hours) / Fraction(delta_t_h)
    if slots.denominator == 1:
        return max(1, int(slots))
    rounded = math.ceil(slots)
    logger.info(
        "charging duration %s h is not an integral number of %s h slots; "
        "rounding up to %d slots", hours, delta_t_h, rounded,
    )
    return max(1, rounded)


def charging_duration_slots(session, charger: ChargerType, delta_t_h: float) -> int:
    """Slots `session` occupies on `charger` at the effective constant rate."""
    return duration_slots(session.energy_kwh, effective_rate(session, charger), delta_t_h)


def session_duration_by_charger(session, chargers, delta_t_h: float) -> dict[str, int]:
    """Slots needed by `session` on each charger type, keyed by type id."""
    return {ct.id: charging_duration_slots(session, ct, delta_t_h) for ct in chargers}


def check_session_feasibility(session, chargers, delta_t_h: float, scenario_id: str) -> None:
    """Raise InfeasibleSession when no charger type can finish inside the window."""
    if not chargers:
        raise InfeasibleSession(session.vehicle_id, scenario_id, 1, 0)
    window = session.departure_slot - session.arrival_slot + 1
    durations = session_duration_by_charger(session, chargers, delta_t_h)
    best = min(durations.values())
    if best > window:
        raise InfeasibleSession(session.vehicle_id, scenario_id, best, window)
