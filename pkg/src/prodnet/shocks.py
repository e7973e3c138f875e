"""Compile lockdown scenarios into day-indexed shock schedules.

Day ``t`` of a schedule is the date ``calendar.sim_start + t``. All shock
arrays have shape ``(horizon, n_industries)``; other-final-demand factors
have shape ``(horizon, n_industries, n_categories)``.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CalendarOrder, ConfigError, ValidationError, ZeroPPI

SUPPLY_SCENARIOS = ("none", "s1", "s2", "s3", "s4", "s5", "s6", "custom")
IOTA = {"s2": 0.1, "s3": 0.4, "s4": 0.7}
DEFAULT_TRADE_CODES = ("G45", "G47")
DEFAULT_CATEGORY_SHOCKS = {
    "investment": 0.15,
    "export": 0.15,
    "government": 0.0,
    "inventory_change": 0.0,
}
# Categories whose shock follows the per-industry consumption preference shock.
EPS_D_CATEGORIES = ("npish",)

XI_PRE, XI_LOCKDOWN, XI_POST = 0, 1, 2


def _as_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"not an ISO-8601 date: {value!r}") from None


@dataclass(frozen=True)
class Calendar:
    sim_start: dt.date = dt.date(2020, 1, 1)
    lockdown_start: dt.date = dt.date(2020, 3, 23)
    lockdown_end: dt.date = dt.date(2020, 5, 13)
    trade_reopen: dt.date = dt.date(2020, 6, 15)
    # Non-trade S1 reopening; only the month is known, the first day is used.
    other_reopen: dt.date = dt.date(2020, 7, 1)
    demand_end: dt.date = dt.date(2020, 8, 11)
    sim_end: dt.date = dt.date(2020, 6, 30)

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            object.__setattr__(self, name, _as_date(getattr(self, name)))
        chain = [
            ("sim_start", "lockdown_start", False),
            ("lockdown_start", "lockdown_end", True),
            ("lockdown_end", "demand_end", False),
            ("lockdown_end", "trade_reopen", False),
            ("lockdown_end", "other_reopen", False),
            ("sim_start", "sim_end", False),
        ]
        for a, b, strict in chain:
            da, db = getattr(self, a), getattr(self, b)
            if db < da or (strict and db == da):
                raise CalendarOrder(f"CalendarOrder: {a} ({da}) must precede {b} ({db})")

    @classmethod
    def from_mapping(cls, data: Mapping | None) -> "Calendar":
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown calendar keys: {sorted(unknown)}")
        return cls(**data)

    def day(self, date) -> int:
        return (_as_date(date) - self.sim_start).days

    def date(self, t: int) -> dt.date:
        return self.sim_start + dt.timedelta(days=int(t))

    @property
    def horizon(self) -> int:
        """Days from sim_start to sim_end inclusive."""
        return self.day(self.sim_end) + 1

    def to_dict(self) -> dict:
        return {k: getattr(self, k).isoformat() for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class IndustryAttributes:
    industry_codes: tuple[str, ...]
    rli: np.ndarray
    ess: np.ndarray
    ppi: np.ndarray
    eps_d_lockdown: np.ndarray

    def __post_init__(self):
        n = len(self.industry_codes)
        object.__setattr__(self, "industry_codes", tuple(self.industry_codes))
        for name in ("rli", "ess", "ppi", "eps_d_lockdown"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValidationError(f"attribute {name} has shape {arr.shape}, expected {(n,)}")
            if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                raise ValidationError(f"attribute {name} must lie in [0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def reorder(self, codes: Sequence[str]) -> "IndustryAttributes":
        """Attributes aligned to ``codes``; every code must be present."""
        missing = [c for c in codes if c not in self.industry_codes]
        if missing:
            raise ValidationError(f"attributes missing for industries {missing}")
        idx = [self.industry_codes.index(c) for c in codes]
        return IndustryAttributes(
            tuple(codes), self.rli[idx], self.ess[idx], self.ppi[idx], self.eps_d_lockdown[idx]
        )


@dataclass(frozen=True)
class ShockSchedule:
    industry_codes: tuple[str, ...]
    fd_categories: tuple[str, ...]
    eps_s: np.ndarray
    eps_d: np.ndarray
    f_factor: np.ndarray
    xi_phase: np.ndarray
    calendar: Calendar
    scenario_id: str = "none"

    def __post_init__(self):
        t, n, k = self.horizon, len(self.industry_codes), len(self.fd_categories)
        shapes = {"eps_s": (t, n), "eps_d": (t, n), "f_factor": (t, n, k), "xi_phase": (t,)}
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name))
            if arr.shape != shape:
                raise ValidationError(f"schedule {name} has shape {arr.shape}, expected {shape}")
            if name != "xi_phase" and (np.any(arr < 0) or np.any(arr > 1)):
                raise ValidationError(f"schedule {name} must lie in [0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def horizon(self) -> int:
        return int(np.asarray(self.xi_phase).shape[0])

    def dates(self) -> list[dt.date]:
        return [self.calendar.date(t) for t in range(self.horizon)]

    def lockdown_start_index(self) -> int | None:
        idx = np.flatnonzero(self.xi_phase == XI_LOCKDOWN)
        return int(idx[0]) if len(idx) else None

    def truncated(self, horizon: int) -> "ShockSchedule":
        return ShockSchedule(
            self.industry_codes,
            self.fd_categories,
            self.eps_s[:horizon],
            self.eps_d[:horizon],
            self.f_factor[:horizon],
            self.xi_phase[:horizon],
            self.calendar,
            self.scenario_id,
        )


def _days(horizon: int) -> np.ndarray:
    return np.arange(horizon)[:, np.newaxis]


def _window(horizon, start, stop) -> np.ndarray:
    t = _days(horizon)
    return (t >= start) & (t < stop)


def supply_s1(
    attrs: IndustryAttributes,
    calendar: Calendar,
    horizon: int,
    trade_codes: Sequence[str] = DEFAULT_TRADE_CODES,
) -> np.ndarray:
    """(1 - RLI)(1 - ESS) from lockdown start; trade reopens first, the rest later."""
    level = (1.0 - attrs.rli) * (1.0 - attrs.ess)
    start = calendar.day(calendar.lockdown_start)
    is_trade = np.isin(attrs.industry_codes, list(trade_codes))
    stop = np.where(is_trade, calendar.day(calendar.trade_reopen), calendar.day(calendar.other_reopen))
    t = _days(horizon)
    active = (t >= start) & (t < stop[np.newaxis, :])
    return np.where(active, level[np.newaxis, :], 0.0)


def s234_level(attrs: IndustryAttributes, iota: float, remaining: float | np.ndarray = 1.0) -> np.ndarray:
    """Supply shock with the proximity index scaled down to ``remaining`` of its value."""
    ppi_max = float(np.max(attrs.ppi))
    if ppi_max <= 0:
        raise ZeroPPI("physical proximity index is zero for every industry")
    ppi_t = attrs.ppi * remaining
    return (1.0 - attrs.rli) * (1.0 - attrs.ess * (1.0 - iota * ppi_t / ppi_max))


def supply_s234(attrs: IndustryAttributes, iota: float, calendar: Calendar, horizon: int) -> np.ndarray:
    """Proximity-adjusted shock decaying linearly to the S1 level, zero from lockdown end."""
    if not 0 < iota <= 1:
        raise ConfigError(f"iota must lie in (0, 1], got {iota}")
    start = calendar.day(calendar.lockdown_start)
    stop = calendar.day(calendar.lockdown_end)
    t = np.arange(horizon, dtype=float)
    remaining = 1.0 - (t - start) / (stop - start)
    levels = s234_level(attrs, iota, remaining[:, np.newaxis])
    return np.where(_window(horizon, start, stop), levels, 0.0)


def supply_fixed(vector, calendar: Calendar, horizon: int) -> np.ndarray:
    """Constant shock vector over the lockdown window, zero outside."""
    vector = np.asarray(vector, dtype=float)
    if np.any(vector < 0) or np.any(vector > 1):
        raise ValidationError("supply shock vector must lie in [0, 1]")
    start = calendar.day(calendar.lockdown_start)
    stop = calendar.day(calendar.lockdown_end)
    return np.where(_window(horizon, start, stop), vector[np.newaxis, :], 0.0)


def demand_schedule(attrs: IndustryAttributes, calendar: Calendar, horizon: int) -> np.ndarray:
    """Preference shocks: constant in lockdown, linear fade to zero at demand_end."""
    start = calendar.day(calendar.lockdown_start)
    end = calendar.day(calendar.lockdown_end)
    fade_end = calendar.day(calendar.demand_end)
    t = np.arange(horizon, dtype=float)[:, np.newaxis]
    level = attrs.eps_d_lockdown[np.newaxis, :]
    if fade_end > end:
        fade = np.clip(1.0 - (t - end) / (fade_end - end), 0.0, 1.0)
    else:
        fade = np.zeros_like(t)
    out = np.where(t < end, level, level * fade)
    return np.where(t >= start, out, 0.0)


def other_final_demand_schedule(
    eps_d: np.ndarray,
    fd_categories: Sequence[str],
    calendar: Calendar,
    category_shocks: Mapping[str, float] | None = None,
    persist: bool = True,
) -> np.ndarray:
    """Multiplicative factors on other final demand, per day, industry and category.

    Categories in ``EPS_D_CATEGORIES`` follow the industry preference shocks;
    the others take a uniform shock from lockdown start (kept for the rest of
    the horizon when ``persist``).
    """
    shocks = dict(DEFAULT_CATEGORY_SHOCKS if category_shocks is None else category_shocks)
    # standard categories absent from the table are skipped
    unknown = set(shocks) - set(fd_categories) - set(DEFAULT_CATEGORY_SHOCKS)
    if unknown:
        raise ConfigError(f"shocks given for unknown final demand categories: {sorted(unknown)}")
    horizon, n = eps_d.shape
    start = calendar.day(calendar.lockdown_start)
    stop = horizon if persist else calendar.day(calendar.lockdown_end)
    active = _window(horizon, start, stop)[:, 0]
    out = np.ones((horizon, n, len(fd_categories)))
    for k, cat in enumerate(fd_categories):
        if cat in EPS_D_CATEGORIES and cat not in shocks:
            out[:, :, k] = 1.0 - eps_d
            continue
        level = float(shocks.get(cat, 0.0))
        if not 0 <= level <= 1:
            raise ConfigError(f"category shock for {cat} must lie in [0, 1]")
        out[active, :, k] = 1.0 - level
    return out


def xi_phases(calendar: Calendar, horizon: int) -> np.ndarray:
    """Permanent-income phase per day: pre, lockdown (end inclusive), post."""
    t = np.arange(horizon)
    start = calendar.day(calendar.lockdown_start)
    end = calendar.day(calendar.lockdown_end)
    return np.where(t < start, XI_PRE, np.where(t <= end, XI_LOCKDOWN, XI_POST)).astype(int)


def zero_schedule(
    industry_codes: Sequence[str],
    fd_categories: Sequence[str],
    horizon: int,
    calendar: Calendar | None = None,
) -> ShockSchedule:
    n, k = len(industry_codes), len(fd_categories)
    return ShockSchedule(
        tuple(industry_codes),
        tuple(fd_categories),
        np.zeros((horizon, n)),
        np.zeros((horizon, n)),
        np.ones((horizon, n, k)),
        np.full(horizon, XI_PRE),
        calendar or Calendar(),
        "none",
    )


@dataclass
class ScenarioSpec:
    """Declarative lockdown scenario."""

    supply: str = "s5"
    calendar: Calendar = field(default_factory=Calendar)
    trade_codes: tuple[str, ...] = DEFAULT_TRADE_CODES
    iota: float | None = None
    overrides: dict[str, float] = field(default_factory=dict)
    consumption_shocks: bool = True
    category_shocks: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_CATEGORY_SHOCKS))
    persist_other_shocks: bool = True
    unemployment_fear: bool = True

    def __post_init__(self):
        self.supply = str(self.supply).lower()
        if self.supply not in SUPPLY_SCENARIOS:
            raise ConfigError(f"unknown supply scenario {self.supply!r}; choose from {SUPPLY_SCENARIOS}")
        self.trade_codes = tuple(self.trade_codes)


def compile_schedule(
    spec: ScenarioSpec,
    attrs: IndustryAttributes,
    fd_categories: Sequence[str],
    horizon: int | None = None,
    supply_vector=None,
) -> ShockSchedule:
    """Build the full shock schedule of a scenario.

    ``supply_vector`` supplies the per-industry shocks of the fixed-vector
    scenarios (s5, s6, custom) in the order of ``attrs.industry_codes``.
    """
    cal = spec.calendar
    horizon = cal.horizon if horizon is None else int(horizon)
    n = len(attrs.industry_codes)
    sid = spec.supply
    if sid == "none":
        eps_s = np.zeros((horizon, n))
    elif sid == "s1":
        eps_s = supply_s1(attrs, cal, horizon, spec.trade_codes)
    elif sid in IOTA:
        eps_s = supply_s234(attrs, spec.iota if spec.iota is not None else IOTA[sid], cal, horizon)
    else:
        if supply_vector is None:
            raise ConfigError(f"scenario {sid} needs a supply shock vector")
        eps_s = supply_fixed(supply_vector, cal, horizon)

    if spec.overrides:
        eps_s = eps_s.copy()
        windows = supply_s1(
            IndustryAttributes(attrs.industry_codes, np.zeros(n), np.zeros(n), attrs.ppi, np.zeros(n)),
            cal,
            horizon,
            spec.trade_codes,
        ) if sid == "s1" else None
        start, stop = cal.day(cal.lockdown_start), cal.day(cal.lockdown_end)
        for code, value in spec.overrides.items():
            if code not in attrs.industry_codes:
                raise ConfigError(f"override for unknown industry {code!r}")
            i = attrs.industry_codes.index(code)
            active = windows[:, i] > 0 if windows is not None else _window(horizon, start, stop)[:, 0]
            eps_s[:, i] = np.where(active, float(value), 0.0)

    if spec.consumption_shocks:
        eps_d = demand_schedule(attrs, cal, horizon)
    else:
        eps_d = np.zeros((horizon, n))
    f_factor = other_final_demand_schedule(
        eps_d, fd_categories, cal, spec.category_shocks, spec.persist_other_shocks
    )
    xi_phase = xi_phases(cal, horizon) if spec.unemployment_fear else np.full(horizon, XI_PRE)
    return ShockSchedule(
        attrs.industry_codes, tuple(fd_categories), eps_s, eps_d, f_factor, xi_phase, cal, sid
    )
