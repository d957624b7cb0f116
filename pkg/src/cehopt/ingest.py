"""Input loading and validation.

The entry point is :func:`load_inputs`, which reads one YAML config and the
time-series / session CSV files it references (paths relative to the config)
and returns fully validated in-memory inputs. Units are fixed at kW, kWh,
hours and EUR everywhere; nothing is converted here.

Time-series files are two-column CSVs with a ``slot,value`` header and slots
numbered 1..T in order. Session files carry the columns
``vehicle_id,arrival_slot,departure_slot,energy_kwh,max_rate_kw``.
"""

from __future__ import annotations

import calendar
import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .catalog import (
    BessTechnology,
    ChargerType,
    PvTechnology,
    TechnologyCatalog,
    WtTechnology,
)
from .errors import (
    CalendarMismatch,
    InvariantViolation,
    MissingFile,
    SchemaViolation,
    SessionWindowError,
)

logger = logging.getLogger(__name__)

ASSET_CLASSES = ("pv", "wt", "bess", "charger")

HOURS_PER_DAY = 24.0
DAY_LENGTH_TOL = 1e-9

SESSION_COLUMNS = ("vehicle_id", "arrival_slot", "departure_slot", "energy_kwh", "max_rate_kw")


@dataclass(frozen=True)
class EconomicParams:
    """Discount rate plus per-asset-class lifetimes and maintenance rules.

    Maintenance is specified per asset class either as a fraction of the
    invest cost or as an absolute EUR/year figure; it is resolved to absolute
    per-unit costs when the catalog is assembled.
    """

    discount_rate: float
    lifetimes_years: dict[str, float]
    maintenance_fraction: dict[str, float] = field(default_factory=dict)
    maintenance_absolute: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.discount_rate <= 0.0:
            raise InvariantViolation("discount_rate must be > 0")
        for cls, years in self.lifetimes_years.items():
            if cls not in ASSET_CLASSES:
                raise SchemaViolation(f"unknown asset class {cls!r}", "economics.lifetimes_years")
            if years < 1.0:
                raise InvariantViolation(f"lifetime for {cls!r} must be >= 1 year")
        for name, table in (("fraction", self.maintenance_fraction),
                            ("absolute", self.maintenance_absolute)):
            for cls, value in table.items():
                if cls not in ASSET_CLASSES:
                    raise SchemaViolation(f"unknown asset class {cls!r}",
                                          f"economics.maintenance ({name})")
                if value < 0.0:
                    raise InvariantViolation(f"maintenance for {cls!r} must be >= 0")

    def lifetime(self, asset_class: str) -> float:
        try:
            return self.lifetimes_years[asset_class]
        except KeyError:
            raise SchemaViolation(f"no lifetime configured for {asset_class!r}",
                                  "economics.lifetimes_years") from None

    def maintenance_cost(self, asset_class: str, invest_cost: float) -> float:
        """Annual per-unit maintenance in EUR for a unit with the given invest cost."""
        if asset_class in self.maintenance_absolute:
            return self.maintenance_absolute[asset_class]
        return self.maintenance_fraction.get(asset_class, 0.0) * invest_cost


class GridContract:
    """Per-slot grid limits [kW] and prices [EUR/kWh] for one scenario."""

    __slots__ = ("withdrawal_limit_kw", "injection_limit_kw", "buy_price", "sell_price")

    def __init__(self, withdrawal_limit_kw, injection_limit_kw, buy_price, sell_price):
        self.withdrawal_limit_kw = np.asarray(withdrawal_limit_kw, dtype=float)
        self.injection_limit_kw = np.asarray(injection_limit_kw, dtype=float)
        self.buy_price = np.asarray(buy_price, dtype=float)
        self.sell_price = np.asarray(sell_price, dtype=float)
        n = len(self.withdrawal_limit_kw)
        for name in ("injection_limit_kw", "buy_price", "sell_price"):
            if len(getattr(self, name)) != n:
                raise InvariantViolation(f"grid series {name} has length "
                                         f"{len(getattr(self, name))}, expected {n}")
        if np.any(self.withdrawal_limit_kw < 0.0) or np.any(self.injection_limit_kw < 0.0):
            raise InvariantViolation("grid limits must be non-negative at every slot")
        bad = np.nonzero(self.buy_price <= self.sell_price)[0]
        if bad.size:
            slot = int(bad[0]) + 1
            raise InvariantViolation(
                f"buy price must exceed sell price at every slot; violated at slot {slot} "
                f"(buy={self.buy_price[bad[0]]}, sell={self.sell_price[bad[0]]})"
            )

    def __len__(self):
        return len(self.withdrawal_limit_kw)

    def __eq__(self, other):
        if not isinstance(other, GridContract):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in self.__slots__
        )

    def __repr__(self):
        return f"GridContract(slots={len(self)})"


@dataclass(frozen=True)
class ChargingSession:
    """One vehicle visit: window in 1-based inclusive slots, demand in kWh."""

    vehicle_id: str
    arrival_slot: int
    departure_slot: int
    energy_kwh: float
    max_vehicle_rate_kw: float

    def __post_init__(self):
        if self.arrival_slot < 1:
            raise SessionWindowError(
                f"session {self.vehicle_id!r}: arrival slot must be >= 1")
        if self.departure_slot <= self.arrival_slot:
            raise SessionWindowError(
                f"session {self.vehicle_id!r}: departure ({self.departure_slot}) must be "
                f"after arrival ({self.arrival_slot})")
        if self.energy_kwh <= 0.0:
            raise InvariantViolation(f"session {self.vehicle_id!r}: energy must be positive")
        if self.max_vehicle_rate_kw <= 0.0:
            raise InvariantViolation(f"session {self.vehicle_id!r}: max rate must be positive")

    @property
    def parked_slots(self) -> int:
        return self.departure_slot - self.arrival_slot + 1


class Scenario:
    """One representative day: weather, grid contract and charging sessions."""

    __slots__ = ("id", "occurrence_days", "delta_t_h", "irradiance_kw_m2",
                 "wind_speed_ms", "grid", "sessions")

    def __init__(self, id, occurrence_days, delta_t_h, irradiance_kw_m2,
                 wind_speed_ms, grid, sessions=()):
        self.id = str(id)
        self.occurrence_days = occurrence_days
        self.delta_t_h = float(delta_t_h)
        self.irradiance_kw_m2 = np.asarray(irradiance_kw_m2, dtype=float)
        self.wind_speed_ms = np.asarray(wind_speed_ms, dtype=float)
        self.grid = grid
        self.sessions = tuple(sessions)
        self._validate()

    def _validate(self):
        if self.occurrence_days < 0 or int(self.occurrence_days) != self.occurrence_days:
            raise InvariantViolation(
                f"scenario {self.id!r}: occurrence factor must be a non-negative whole "
                f"number of days, got {self.occurrence_days}")
        if self.delta_t_h <= 0.0:
            raise InvariantViolation(f"scenario {self.id!r}: delta_t must be positive")
        n = self.n_slots
        if n < 1:
            raise InvariantViolation(f"scenario {self.id!r}: empty irradiance series")
        if abs(n * self.delta_t_h - HOURS_PER_DAY) > DAY_LENGTH_TOL:
            raise InvariantViolation(
                f"scenario {self.id!r}: {n} slots x {self.delta_t_h} h = "
                f"{n * self.delta_t_h} h, expected 24 h")
        if len(self.wind_speed_ms) != n:
            raise InvariantViolation(
                f"scenario {self.id!r}: wind series length {len(self.wind_speed_ms)} != {n}")
        if len(self.grid) != n:
            raise InvariantViolation(
                f"scenario {self.id!r}: grid series length {len(self.grid)} != {n}")
        if np.any(self.irradiance_kw_m2 < 0.0):
            raise InvariantViolation(f"scenario {self.id!r}: negative irradiance")
        if np.any(self.wind_speed_ms < 0.0):
            raise InvariantViolation(f"scenario {self.id!r}: negative wind speed")
        for s in self.sessions:
            if s.departure_slot > n:
                raise SessionWindowError(
                    f"session {s.vehicle_id!r} in scenario {self.id!r} departs at slot "
                    f"{s.departure_slot}, beyond the {n}-slot day")

    @property
    def n_slots(self) -> int:
        return len(self.irradiance_kw_m2)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.id == other.id
            and self.occurrence_days == other.occurrence_days
            and self.delta_t_h == other.delta_t_h
            and np.array_equal(self.irradiance_kw_m2, other.irradiance_kw_m2)
            and np.array_equal(self.wind_speed_ms, other.wind_speed_ms)
            and self.grid == other.grid
            and self.sessions == other.sessions
        )

    def __repr__(self):
        return (f"Scenario({self.id!r}, days={self.occurrence_days}, "
                f"slots={self.n_slots}, sessions={len(self.sessions)})")


class ScenarioSet:
    """All representative days; they must share the slot grid."""

    __slots__ = ("scenarios", "year_days")

    def __init__(self, scenarios, year_days: int = 365):
        self.scenarios = tuple(scenarios)
        self.year_days = int(year_days)
        if not self.scenarios:
            raise InvariantViolation("scenario set is empty")
        if self.year_days not in (365, 366):
            raise InvariantViolation(f"year_days must be 365 or 366, got {self.year_days}")
        first = self.scenarios[0]
        ids = set()
        for sc in self.scenarios:
            if sc.id in ids:
                raise InvariantViolation(f"duplicate scenario id {sc.id!r}")
            ids.add(sc.id)
            if sc.delta_t_h != first.delta_t_h or sc.n_slots != first.n_slots:
                raise InvariantViolation(
                    f"scenario {sc.id!r} uses {sc.n_slots} x {sc.delta_t_h} h slots, "
                    f"but {first.id!r} uses {first.n_slots} x {first.delta_t_h} h")
        total = self.total_days
        if total != self.year_days:
            if total == 366 and self.year_days == 365:
                logger.warning(
                    "occurrence factors sum to 366 (leap year?) while year_days is 365")
            else:
                raise InvariantViolation(
                    f"occurrence factors sum to {total}, expected {self.year_days}")

    @property
    def total_days(self) -> int:
        return int(sum(sc.occurrence_days for sc in self.scenarios))

    @property
    def delta_t_h(self) -> float:
        return self.scenarios[0].delta_t_h

    @property
    def n_slots(self) -> int:
        return self.scenarios[0].n_slots

    def __iter__(self):
        return iter(self.scenarios)

    def __len__(self):
        return len(self.scenarios)

    def __eq__(self, other):
        if not isinstance(other, ScenarioSet):
            return NotImplemented
        return self.scenarios == other.scenarios and self.year_days == other.year_days


# ---------------------------------------------------------------------------
# config loading


def _require(mapping, key, location):
    if not isinstance(mapping, dict) or key not in mapping:
        raise SchemaViolation(f"missing field {key!r}", location)
    return mapping[key]


def _number(mapping, key, location, default=None):
    if default is not None and key not in mapping:
        return default
    value = _require(mapping, key, location)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"field {key!r} must be a number", location)
    return float(value)


def _integer(mapping, key, location, default=None):
    if default is not None and key not in mapping:
        return default
    value = _require(mapping, key, location)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(f"field {key!r} must be an integer", location)
    return value


def read_series(path: Path, name: str) -> np.ndarray:
    """Read a slot,value CSV; slots must run 1..T consecutively."""
    if not path.is_file():
        raise MissingFile(f"{name}: no such file {path}")
    values = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["slot", "value"]:
            raise SchemaViolation("expected header 'slot,value'", str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                slot = int(row[0])
                value = float(row[1])
            except (ValueError, IndexError):
                raise SchemaViolation(f"bad row at line {lineno}", str(path)) from None
            if slot != len(values) + 1:
                raise SchemaViolation(
                    f"slot numbers must be consecutive from 1; got {slot} at line {lineno}",
                    str(path))
            values.append(value)
    if not values:
        raise SchemaViolation("series is empty", str(path))
    return np.array(values, dtype=float)


def read_sessions(path: Path) -> tuple[ChargingSession, ...]:
    """Read a sessions CSV (may contain zero data rows)."""
    if not path.is_file():
        raise MissingFile(f"sessions: no such file {path}")
    out = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        got = tuple((reader.fieldnames or ()))
        if tuple(h.strip().lower() for h in got) != SESSION_COLUMNS:
            raise SchemaViolation(
                f"expected header {','.join(SESSION_COLUMNS)}, got {','.join(got)}",
                str(path))
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(ChargingSession(
                    vehicle_id=row["vehicle_id"].strip(),
                    arrival_slot=int(row["arrival_slot"]),
                    departure_slot=int(row["departure_slot"]),
                    energy_kwh=float(row["energy_kwh"]),
                    max_vehicle_rate_kw=float(row["max_rate_kw"]),
                ))
            except (TypeError, ValueError):
                raise SchemaViolation(f"bad session row at line {lineno}", str(path)) from None
    return tuple(out)


def _load_economics(doc) -> EconomicParams:
    eco = _require(doc, "economics", "config")
    loc = "config.economics"
    lifetimes = {str(k): float(v) for k, v in _require(eco, "lifetimes_years", loc).items()}
    maint = eco.get("maintenance", {})
    frac, absolute = {}, {}
    for cls, rule in maint.items():
        rloc = f"{loc}.maintenance.{cls}"
        if not isinstance(rule, dict):
            raise SchemaViolation("maintenance rule must be a mapping", rloc)
        if "fraction_of_invest" in rule:
            frac[str(cls)] = _number(rule, "fraction_of_invest", rloc)
        elif "absolute" in rule:
            absolute[str(cls)] = _number(rule, "absolute", rloc)
        else:
            raise SchemaViolation("need fraction_of_invest or absolute", rloc)
    return EconomicParams(
        discount_rate=_number(eco, "discount_rate", loc),
        lifetimes_years=lifetimes,
        maintenance_fraction=frac,
        maintenance_absolute=absolute,
    )


def _load_catalog(doc, econ: EconomicParams) -> TechnologyCatalog:
    tech = _require(doc, "technologies", "config")

    def lifetime(entry, cls):
        return float(entry.get("lifetime_years", econ.lifetime(cls)))

    def maintenance(entry, cls, invest):
        if "maintenance_cost" in entry:
            return float(entry["maintenance_cost"])
        return econ.maintenance_cost(cls, invest)

    pv = []
    for entry in tech.get("pv", []) or []:
        loc = f"config.technologies.pv[{entry.get('id', '?')}]"
        invest = _number(entry, "invest_cost", loc)
        pv.append(PvTechnology(
            id=str(_require(entry, "id", loc)),
            efficiency=_number(entry, "efficiency", loc),
            area_m2=_number(entry, "area_m2", loc),
            invest_cost=invest,
            maintenance_cost=maintenance(entry, "pv", invest),
            lifetime_years=lifetime(entry, "pv"),
            max_units=_integer(entry, "max_units", loc, default=10_000),
        ))
    wt = []
    for entry in tech.get("wt", []) or []:
        loc = f"config.technologies.wt[{entry.get('id', '?')}]"
        invest = _number(entry, "invest_cost", loc)
        wt.append(WtTechnology(
            id=str(_require(entry, "id", loc)),
            cut_in_ms=_number(entry, "cut_in_ms", loc),
            rated_speed_ms=_number(entry, "rated_speed_ms", loc),
            cut_out_ms=_number(entry, "cut_out_ms", loc),
            rated_power_kw=_number(entry, "rated_power_kw", loc),
            swept_area_m2=_number(entry, "swept_area_m2", loc),
            air_density_kg_m3=_number(entry, "air_density_kg_m3", loc),
            hub_height_m=_number(entry, "hub_height_m", loc),
            measurement_height_m=_number(entry, "measurement_height_m", loc),
            shear_exponent=_number(entry, "shear_exponent", loc),
            invest_cost=invest,
            maintenance_cost=maintenance(entry, "wt", invest),
            lifetime_years=lifetime(entry, "wt"),
            max_units=_integer(entry, "max_units", loc, default=10),
        ))
    bess = []
    for entry in tech.get("bess", []) or []:
        loc = f"config.technologies.bess[{entry.get('id', '?')}]"
        invest = _number(entry, "invest_cost", loc)
        bess.append(BessTechnology(
            id=str(_require(entry, "id", loc)),
            unit_size_kwh=_number(entry, "unit_size_kwh", loc),
            charge_efficiency=_number(entry, "charge_efficiency", loc),
            discharge_efficiency=_number(entry, "discharge_efficiency", loc),
            self_discharge_per_h=_number(entry, "self_discharge_per_h", loc, default=0.0),
            soc_min_frac=_number(entry, "soc_min_frac", loc),
            soc_max_frac=_number(entry, "soc_max_frac", loc),
            soc_init_frac=_number(entry, "soc_init_frac", loc),
            max_charge_kw=_number(entry, "max_charge_kw", loc),
            max_discharge_kw=_number(entry, "max_discharge_kw", loc),
            max_units=_integer(entry, "max_units", loc),
            invest_cost=invest,
            maintenance_cost=maintenance(entry, "bess", invest),
            degradation_cost_per_kw=_number(entry, "degradation_cost_per_kw", loc, default=0.0),
            lifetime_years=lifetime(entry, "bess"),
        ))
    chargers = []
    for entry in tech.get("chargers", []) or []:
        loc = f"config.technologies.chargers[{entry.get('id', '?')}]"
        invest = _number(entry, "invest_cost", loc)
        chargers.append(ChargerType(
            id=str(_require(entry, "id", loc)),
            max_power_kw=_number(entry, "max_power_kw", loc),
            invest_cost=invest,
            maintenance_cost=maintenance(entry, "charger", invest),
            candidate_count=_integer(entry, "candidate_count", loc),
            lifetime_years=lifetime(entry, "charger"),
        ))
    return TechnologyCatalog(pv=tuple(pv), wt=tuple(wt), bess=tuple(bess),
                             chargers=tuple(chargers))


def _load_scenario(entry, base: Path, delta_t_h: float) -> Scenario:
    sid = str(_require(entry, "id", "config.scenarios[]"))
    loc = f"config.scenarios[{sid}]"

    def series(key):
        rel = _require(entry, key, loc)
        return read_series(base / str(rel), f"{sid}.{key}")

    grid = GridContract(
        withdrawal_limit_kw=series("withdrawal_limit_file"),
        injection_limit_kw=series("injection_limit_file"),
        buy_price=series("buy_price_file"),
        sell_price=series("sell_price_file"),
    )
    sessions_rel = _require(entry, "sessions_file", loc)
    return Scenario(
        id=sid,
        occurrence_days=_integer(entry, "occurrence_days", loc),
        delta_t_h=delta_t_h,
        irradiance_kw_m2=series("irradiance_file"),
        wind_speed_ms=series("wind_speed_file"),
        grid=grid,
        sessions=read_sessions(base / str(sessions_rel)),
    )


def load_inputs(config_path) -> tuple[TechnologyCatalog, ScenarioSet, EconomicParams]:
    """Load and validate a full model input set from one YAML config file."""
    config_path = Path(config_path)
    if not config_path.is_file():
        raise MissingFile(f"config: no such file {config_path}")
    try:
        doc = yaml.safe_load(config_path.read_text())
    except yaml.YAMLError as exc:
        raise SchemaViolation(f"invalid YAML: {exc}", str(config_path)) from None
    if not isinstance(doc, dict):
        raise SchemaViolation("config root must be a mapping", str(config_path))

    base = config_path.parent
    econ = _load_economics(doc)
    cat = _load_catalog(doc, econ)
    delta_t = _number(doc, "delta_t_hours", "config")
    year_days = _integer(doc, "year_days", "config", default=365)

    entries = _require(doc, "scenarios", "config")
    if not isinstance(entries, list) or not entries:
        raise SchemaViolation("scenarios must be a non-empty list", "config")
    scenarios = [_load_scenario(e, base, delta_t) for e in entries]
    sset = ScenarioSet(scenarios, year_days=year_days)

    if not cat.chargers and any(sc.sessions for sc in sset):
        raise InvariantViolation("scenarios contain charging sessions but the catalog "
                                 "lists no charger types")
    return cat, sset, econ


MODEL_OPTION_KEYS = ("per_tech_bess_mode", "soc_day_neutral")


def load_model_options(config_path) -> dict:
    """Read the optional `model_options` block (assembly flags) of a config."""
    config_path = Path(config_path)
    if not config_path.is_file():
        raise MissingFile(f"config: no such file {config_path}")
    doc = yaml.safe_load(config_path.read_text())
    block = (doc or {}).get("model_options", {}) or {}
    out = {}
    for key, value in block.items():
        if key not in MODEL_OPTION_KEYS:
            raise SchemaViolation(f"unknown model option {key!r}", "config.model_options")
        if not isinstance(value, bool):
            raise SchemaViolation(f"model option {key!r} must be a boolean",
                                  "config.model_options")
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# calendar-paired scenario builder


@dataclass(frozen=True)
class MonthlyWeather:
    """Weather and grid contract shared by both day kinds of one month."""

    month: int
    irradiance_kw_m2: tuple
    wind_speed_ms: tuple
    grid: GridContract


@dataclass(frozen=True)
class DemandProfile:
    """Charging sessions for one (month, weekday/weekend) combination."""

    month: int
    day_kind: str  # "weekday" | "weekend"
    sessions: tuple


def count_month_days(year: int, month: int) -> tuple[int, int]:
    """(weekdays, weekend days) in the given month; holidays are not treated."""
    first_wd, n_days = calendar.monthrange(year, month)
    weekend = sum(1 for d in range(n_days) if (first_wd + d) % 7 >= 5)
    return n_days - weekend, weekend


def build_scenarios(monthly_weather, demand_profiles, delta_t_h: float,
                    year: int) -> ScenarioSet:
    """Pair monthly weather with weekday/weekend demand into 24 scenarios.

    Occurrence factors are the weekday / weekend-day counts of each month in
    the target year, so they sum to the year length (366 in leap years).
    """
    weather = {}
    for mw in monthly_weather:
        if mw.month in weather:
            raise CalendarMismatch(f"duplicate weather profile for month {mw.month}")
        weather[mw.month] = mw
    if sorted(weather) != list(range(1, 13)):
        raise CalendarMismatch(
            f"need weather for months 1..12, got {sorted(weather)}")

    demand = {}
    for dp in demand_profiles:
        if dp.day_kind not in ("weekday", "weekend"):
            raise CalendarMismatch(f"unknown day kind {dp.day_kind!r}")
        key = (dp.month, dp.day_kind)
        if key in demand:
            raise CalendarMismatch(f"duplicate demand profile for {key}")
        demand[key] = dp
    expected = {(m, k) for m in range(1, 13) for k in ("weekday", "weekend")}
    if set(demand) != expected:
        missing = sorted(expected - set(demand))
        raise CalendarMismatch(f"demand profiles must cover 12 months x 2 day kinds; "
                               f"missing {missing[:4]}{'...' if len(missing) > 4 else ''}")

    scenarios = []
    for month in range(1, 13):
        mw = weather[month]
        n_weekdays, n_weekend = count_month_days(year, month)
        for kind, days in (("weekday", n_weekdays), ("weekend", n_weekend)):
            scenarios.append(Scenario(
                id=f"{year}-{month:02d}-{kind}",
                occurrence_days=days,
                delta_t_h=delta_t_h,
                irradiance_kw_m2=mw.irradiance_kw_m2,
                wind_speed_ms=mw.wind_speed_ms,
                grid=mw.grid,
                sessions=demand[(month, kind)].sessions,
            ))
    year_days = 366 if calendar.isleap(year) else 365
    return ScenarioSet(scenarios, year_days=year_days)


# ---------------------------------------------------------------------------
# serialization (exact round trip)


def _fmt(x) -> str:
    # repr of a Python float round-trips bit-exactly through CSV text
    return repr(float(x))


def _write_series(path: Path, values) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "value"])
        for i, v in enumerate(values, start=1):
            writer.writerow([i, _fmt(v)])


def _tech_entries(catalog: TechnologyCatalog):
    f, i = float, int
    pv = [dict(id=p.id, efficiency=f(p.efficiency), area_m2=f(p.area_m2),
               invest_cost=f(p.invest_cost), maintenance_cost=f(p.maintenance_cost),
               lifetime_years=f(p.lifetime_years), max_units=i(p.max_units))
          for p in catalog.pv]
    wt = [dict(id=w.id, cut_in_ms=f(w.cut_in_ms), rated_speed_ms=f(w.rated_speed_ms),
               cut_out_ms=f(w.cut_out_ms), rated_power_kw=f(w.rated_power_kw),
               swept_area_m2=f(w.swept_area_m2), air_density_kg_m3=f(w.air_density_kg_m3),
               hub_height_m=f(w.hub_height_m), measurement_height_m=f(w.measurement_height_m),
               shear_exponent=f(w.shear_exponent), invest_cost=f(w.invest_cost),
               maintenance_cost=f(w.maintenance_cost), lifetime_years=f(w.lifetime_years),
               max_units=i(w.max_units))
          for w in catalog.wt]
    bess = [dict(id=b.id, unit_size_kwh=f(b.unit_size_kwh),
                 charge_efficiency=f(b.charge_efficiency),
                 discharge_efficiency=f(b.discharge_efficiency),
                 self_discharge_per_h=f(b.self_discharge_per_h),
                 soc_min_frac=f(b.soc_min_frac), soc_max_frac=f(b.soc_max_frac),
                 soc_init_frac=f(b.soc_init_frac), max_charge_kw=f(b.max_charge_kw),
                 max_discharge_kw=f(b.max_discharge_kw), max_units=i(b.max_units),
                 invest_cost=f(b.invest_cost), maintenance_cost=f(b.maintenance_cost),
                 degradation_cost_per_kw=f(b.degradation_cost_per_kw),
                 lifetime_years=f(b.lifetime_years))
            for b in catalog.bess]
    chargers = [dict(id=c.id, max_power_kw=f(c.max_power_kw), invest_cost=f(c.invest_cost),
                     maintenance_cost=f(c.maintenance_cost),
                     candidate_count=i(c.candidate_count), lifetime_years=f(c.lifetime_years))
                for c in catalog.chargers]
    return dict(pv=pv, wt=wt, bess=bess, chargers=chargers)


def write_inputs(catalog: TechnologyCatalog, scenarios: ScenarioSet,
                 econ: EconomicParams, out_dir, model_options: dict | None = None) -> Path:
    """Write a loadable config + CSV tree for the given inputs; returns config path."""
    out_dir = Path(out_dir)
    series_dir = out_dir / "series"
    sessions_dir = out_dir / "sessions"
    series_dir.mkdir(parents=True, exist_ok=True)
    sessions_dir.mkdir(parents=True, exist_ok=True)

    maintenance = {}
    for cls, v in econ.maintenance_fraction.items():
        maintenance[cls] = {"fraction_of_invest": float(v)}
    for cls, v in econ.maintenance_absolute.items():
        maintenance[cls] = {"absolute": float(v)}

    entries = []
    for sc in scenarios:
        files = {
            "irradiance_file": sc.irradiance_kw_m2,
            "wind_speed_file": sc.wind_speed_ms,
            "withdrawal_limit_file": sc.grid.withdrawal_limit_kw,
            "injection_limit_file": sc.grid.injection_limit_kw,
            "buy_price_file": sc.grid.buy_price,
            "sell_price_file": sc.grid.sell_price,
        }
        entry = {"id": sc.id, "occurrence_days": int(sc.occurrence_days)}
        for key, values in files.items():
            rel = f"series/{sc.id}_{key.removesuffix('_file')}.csv"
            _write_series(out_dir / rel, values)
            entry[key] = rel
        rel = f"sessions/{sc.id}.csv"
        with (out_dir / rel).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SESSION_COLUMNS)
            for s in sc.sessions:
                writer.writerow([s.vehicle_id, s.arrival_slot, s.departure_slot,
                                 _fmt(s.energy_kwh), _fmt(s.max_vehicle_rate_kw)])
        entry["sessions_file"] = rel
        entries.append(entry)

    doc = {
        "delta_t_hours": float(scenarios.delta_t_h),
        "year_days": int(scenarios.year_days),
        "economics": {
            "discount_rate": float(econ.discount_rate),
            "lifetimes_years": {k: float(v) for k, v in econ.lifetimes_years.items()},
            "maintenance": maintenance,
        },
        "technologies": _tech_entries(catalog),
        "scenarios": entries,
    }
    if model_options:
        doc["model_options"] = {k: bool(v) for k, v in model_options.items()}
    config_path = out_dir / "config.yaml"
    config_path.write_text(yaml.safe_dump(doc, sort_keys=True))
    return config_path
