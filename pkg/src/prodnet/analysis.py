"""Forecast errors, single-industry shock sweeps, log-log OLS and sensitivity grids."""

from __future__ import annotations

import datetime as dt
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dynamics import Params, Trajectory, run
from .economy import Economy, output_multipliers, technical_coefficients, upstreamness
from .errors import ConfigError, NonPositiveValue, PanelMismatch, RankDeficient
from .production import ProductionFunction
from .shocks import XI_PRE, Calendar, ShockSchedule

DEFAULT_MONTHS = ("2020-04", "2020-05", "2020-06")
BASE_MONTH = "2020-02"
DEFAULT_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))


# ------------------------------------------------------------------ panels

@dataclass(frozen=True)
class MonthlyPanel:
    """Output by industry and month as a percentage of the base month."""

    industry_codes: tuple[str, ...]
    months: tuple[str, ...]
    values: np.ndarray  # (N, M)
    source: str = "model"
    weights: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "industry_codes", tuple(self.industry_codes))
        object.__setattr__(self, "months", tuple(self.months))
        v = np.asarray(self.values, float)
        if v.shape != (len(self.industry_codes), len(self.months)):
            raise PanelMismatch(f"panel values have shape {v.shape}")
        bad = np.argwhere(~(np.isfinite(v) & (v > 0)))
        if len(bad):
            raise NonPositiveValue(self.months[bad[0][1]], int(bad[0][0]))
        object.__setattr__(self, "values", v)
        if self.weights is not None:
            w = np.asarray(self.weights, float)
            if w.shape != (len(self.industry_codes),) or np.any(w < 0) or w.sum() <= 0:
                raise PanelMismatch("panel weights must be non-negative, one per industry")
            object.__setattr__(self, "weights", w)

    def select(self, codes: Sequence[str], months: Sequence[str]) -> "MonthlyPanel":
        try:
            rows = [self.industry_codes.index(c) for c in codes]
            cols = [self.months.index(m) for m in months]
        except ValueError as exc:
            raise PanelMismatch(f"{self.source} panel lacks {exc}") from None
        w = None if self.weights is None else self.weights[rows]
        return MonthlyPanel(tuple(codes), tuple(months), self.values[np.ix_(rows, cols)], self.source, w)


def _month(d: dt.date) -> str:
    return f"{d.year:04d}-{d.month:02d}"


def monthly_panel_from_trajectory(
    traj: Trajectory,
    base_month: str = BASE_MONTH,
    weights=None,
) -> MonthlyPanel:
    """Calendar-month means of gross output, rebased to ``base_month`` = 100."""
    months = [_month(d) for d in traj.dates]
    labels = tuple(dict.fromkeys(months))
    if base_month not in labels:
        raise PanelMismatch(f"trajectory does not cover base month {base_month}")
    x = traj.x
    idx = np.array([labels.index(m) for m in months])
    means = np.stack([x[idx == k].mean(axis=0) for k in range(len(labels))], axis=1)
    base = means[:, labels.index(base_month)]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = 100.0 * means / base[:, np.newaxis]
    keep = base > 0
    codes = tuple(c for c, k in zip(traj.industry_codes, keep) if k)
    w = None if weights is None else np.asarray(weights, float)[keep]
    return MonthlyPanel(codes, labels, values[keep], "model", w)


def _aligned(model: MonthlyPanel, data: MonthlyPanel, months, weights):
    if set(model.industry_codes) != set(data.industry_codes):
        raise PanelMismatch(
            f"industry sets differ: only model {sorted(set(model.industry_codes) - set(data.industry_codes))}, "
            f"only data {sorted(set(data.industry_codes) - set(model.industry_codes))}"
        )
    codes = model.industry_codes
    months = tuple(months) if months is not None else DEFAULT_MONTHS
    m = model.select(codes, months)
    d = data.select(codes, months)
    if weights is None:
        weights = m.weights if m.weights is not None else d.weights
    if weights is None:
        w = np.full(len(codes), 1.0 / len(codes))
    elif isinstance(weights, Mapping):
        w = np.array([float(weights[c]) for c in codes])
    else:
        w = np.asarray(weights, float)
        if w.shape != (len(codes),):
            raise PanelMismatch("weights must have one entry per industry")
    if np.any(w < 0) or w.sum() <= 0:
        raise PanelMismatch("weights must be non-negative with positive sum")
    return m.values, d.values, w / w.sum()


def afe_sectoral(model: MonthlyPanel, data: MonthlyPanel, weights=None, months=None) -> float:
    """Output-weighted mean absolute gap in percentage points, averaged over months."""
    y_model, y_data, w = _aligned(model, data, months, weights)
    return float(np.mean(w @ np.abs(y_data - y_model)))


def afe_aggregate(model: MonthlyPanel, data: MonthlyPanel, weights=None, months=None) -> float:
    """Signed aggregate gap (data minus model) in percent of base aggregate output."""
    y_model, y_data, w = _aligned(model, data, months, weights)
    return float(np.mean(w @ (y_data - y_model)))


# ------------------------------------------------------------------ sweeps

@dataclass(frozen=True)
class SweepRecord:
    industry: str
    magnitude: float
    kind: str
    fraction: float
    level: float


@dataclass
class SweepResult:
    mode: str
    window_days: int
    records: list[SweepRecord] = field(default_factory=list)

    def fraction(self, industry: str, magnitude: float, kind) -> float:
        kind = ProductionFunction.parse(kind).value
        for r in self.records:
            if r.industry == industry and r.kind == kind and abs(r.magnitude - magnitude) < 1e-12:
                return r.fraction
        raise KeyError((industry, magnitude, kind))

    def table(self, kind, magnitude: float) -> dict[str, SweepRecord]:
        kind = ProductionFunction.parse(kind).value
        return {r.industry: r for r in self.records if r.kind == kind and abs(r.magnitude - magnitude) < 1e-12}


def single_shock_schedule(
    econ: Economy, industry: int, magnitude: float, mode: str, window_days: int, calendar: Calendar | None = None
) -> ShockSchedule:
    """Only industry ``industry`` is shocked, from day 1 through ``window_days``."""
    n, k = econ.n_industries, len(econ.fd_categories)
    horizon = window_days + 1
    eps_s = np.zeros((horizon, n))
    eps_d = np.zeros((horizon, n))
    f_factor = np.ones((horizon, n, k))
    if mode == "supply":
        eps_s[1:, industry] = magnitude
    elif mode == "demand":
        eps_d[1:, industry] = magnitude
        f_factor[1:, industry, :] = 1.0 - magnitude
    else:
        raise ConfigError(f"sweep mode must be 'supply' or 'demand', got {mode!r}")
    return ShockSchedule(
        econ.industry_codes, econ.fd_categories, eps_s, eps_d, f_factor,
        np.full(horizon, XI_PRE), calendar or Calendar(), f"single-{mode}",
    )


def _sweep_cell(args) -> SweepRecord:
    econ, params, kind, mode, j, mag, window = args
    sched = single_shock_schedule(econ, j, mag, mode, window)
    traj = run(econ, params, sched, kind)
    level = float(traj.x[window].sum())
    return SweepRecord(econ.industry_codes[j], float(mag), ProductionFunction.parse(kind).value,
                       level / float(econ.x0.sum()), level)


def _pool_map(fn: Callable, cells: list, jobs: int) -> list:
    if jobs is None or jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells, chunksize=max(1, len(cells) // (4 * jobs))))


def single_shock_sweep(
    econ: Economy,
    params: Params,
    kinds: ProductionFunction | str | Iterable = ProductionFunction.IHS2,
    mode: str = "supply",
    grid: Sequence[float] = DEFAULT_GRID,
    window_days: int = 30,
    industries: Sequence[str] | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Shock one industry at a time and record aggregate output after ``window_days``.

    Households expect no permanent income loss. Demand mode also sets the
    saving response to its maximum (``delta_s = 1``) and applies the shock to
    every final-demand category of the industry.
    """
    if isinstance(kinds, (str, ProductionFunction)):
        kinds = [kinds]
    kinds = [ProductionFunction.parse(k) for k in kinds]
    grid = [float(g) for g in grid]
    if any(not 0 <= g <= 1 for g in grid):
        raise ConfigError("shock magnitudes must lie in [0, 1]")
    if window_days < 1:
        raise ConfigError("window_days must be positive")
    if mode == "demand":
        params = params.with_overrides(delta_s=1.0)
    codes = list(econ.industry_codes) if industries is None else list(industries)
    cells = [
        (econ, params, k, mode, econ.index(c), g, window_days)
        for k in kinds for c in codes for g in grid
    ]
    records = _pool_map(_sweep_cell, cells, jobs)
    records.sort(key=lambda r: (r.kind, r.industry, r.magnitude))
    return SweepResult(mode, window_days, records)


# ------------------------------------------------------------------ OLS

@dataclass(frozen=True)
class OLSResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    r2: float
    adjusted_r2: float
    n_obs: int

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def se(self, name: str) -> float:
        return float(self.std_errors[self.names.index(name)])


def _log_checked(name: str, values) -> np.ndarray:
    v = np.asarray(values, float)
    bad = np.flatnonzero(~(v > 0))
    if len(bad):
        raise NonPositiveValue(name, int(bad[0]))
    return np.log(v)


def ols(y, x, names: Sequence[str]) -> OLSResult:
    """Least squares with classical standard errors; ``x`` already includes the constant."""
    y = np.asarray(y, float)
    x = np.asarray(x, float)
    n, p = x.shape
    if n < p:
        raise RankDeficient(f"{n} observations for {p} coefficients")
    if np.linalg.matrix_rank(x) < p:
        raise RankDeficient("regressor matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta
    ssr = float(resid @ resid)
    centered = y - y.mean()
    sst = float(centered @ centered)
    dof = n - p
    if dof > 0:
        cov = ssr / dof * np.linalg.inv(x.T @ x)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    else:
        se = np.full(p, np.nan)
    if p == 1 or sst <= 0:
        r2 = 0.0 if p == 1 or ssr > 0 else 1.0
    else:
        r2 = 1.0 - ssr / sst
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof if dof > 0 and p > 1 else r2
    return OLSResult(tuple(names), beta, se, float(r2), float(adj), n)


def ols_loglog(y, x_cols: Mapping[str, Sequence[float]] | None = None) -> OLSResult:
    """Regress ln y on a constant and ln of each named column."""
    ly = _log_checked("y", y)
    cols = [np.ones_like(ly)]
    names = ["const"]
    for name, values in (x_cols or {}).items():
        lx = _log_checked(name, values)
        if lx.shape != ly.shape:
            raise RankDeficient(f"column {name} has {lx.shape[0]} rows, response has {ly.shape[0]}")
        cols.append(lx)
        names.append(name)
    return ols(ly, np.column_stack(cols), names)


def industry_metrics(econ: Economy) -> dict[str, np.ndarray]:
    """Static network and size measures used as regressors."""
    tc = technical_coefficients(econ)
    return {
        "upstreamness": upstreamness(tc),
        "multiplier": output_multipliers(tc),
        "output": econ.x0,
        "final_demand": econ.c0 + econ.f0.sum(axis=1),
    }


def shock_regressions(
    sweep: SweepResult,
    econ: Economy,
    regressors: Sequence[str] = ("upstreamness", "multiplier", "output"),
) -> dict[tuple[str, float], OLSResult]:
    """Cross-industry regression of log aggregate output for each (kind, magnitude)."""
    metrics = industry_metrics(econ)
    unknown = set(regressors) - set(metrics)
    if unknown:
        raise ConfigError(f"unknown regressors {sorted(unknown)}; choose from {sorted(metrics)}")
    out = {}
    for kind, mag in sorted({(r.kind, r.magnitude) for r in sweep.records}):
        cells = sweep.table(kind, mag)
        idx = [econ.index(c) for c in cells]
        y = [cells[c].level for c in cells]
        out[(kind, mag)] = ols_loglog(y, {name: metrics[name][idx] for name in regressors})
    return out


# ------------------------------------------------------------------ sensitivity

def sensitivity_cells(
    axes: Mapping[str, Sequence],
    mode: str = "cartesian",
    base: Mapping | None = None,
    link_gamma: bool = False,
) -> list[dict]:
    """Parameter cells of a sweep, sorted by their key.

    ``cartesian`` crosses every axis; ``one_at_a_time`` varies one axis while
    the others keep their ``base`` value. ``link_gamma`` sets gamma_f to twice
    gamma_h in every cell.
    """
    axes = {k: list(v) for k, v in axes.items()}
    if any(len(v) == 0 for v in axes.values()):
        raise ConfigError("sweep axes must not be empty")
    if link_gamma and "gamma_f" in axes:
        raise ConfigError("gamma_f cannot be swept when linked to gamma_h")
    names = sorted(axes)
    if mode == "cartesian":
        cells = [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]
    elif mode == "one_at_a_time":
        base = dict(base or {})
        cells = []
        for name in names:
            for v in axes[name]:
                cell = {n: base[n] for n in names if n in base}
                cell[name] = v
                if cell not in cells:
                    cells.append(cell)
    else:
        raise ConfigError(f"sweep mode must be 'cartesian' or 'one_at_a_time', got {mode!r}")
    if link_gamma:
        for cell in cells:
            gh = cell.get("gamma_h", (base or {}).get("gamma_h", Params().gamma_h))
            cell["gamma_f"] = 2.0 * float(gh)
    return sorted(cells, key=cell_key)


def cell_key(cell: Mapping) -> tuple:
    def order(v):
        return (0, float(v), "") if isinstance(v, (int, float)) else (1, 0.0, str(v))

    return tuple((k, order(cell[k])) for k in sorted(cell))


NON_PARAM_AXES = ("kind",)


def _sensitivity_cell(args):
    econ, params, schedule, kind, cell = args
    overrides = {k: v for k, v in cell.items() if k not in NON_PARAM_AXES}
    p = params.with_overrides(**overrides)
    k = cell.get("kind", kind)
    traj = run(econ, p, schedule, k)
    return cell, traj.aggregate_output, traj.cd


def sensitivity_sweep(
    econ: Economy,
    params: Params,
    schedule: ShockSchedule,
    kind,
    axes: Mapping[str, Sequence],
    mode: str = "cartesian",
    link_gamma: bool = False,
    jobs: int = 1,
) -> list[tuple[dict, np.ndarray, np.ndarray]]:
    """Aggregate output and consumption trajectories for every cell of the grid.

    Axes name ``Params`` fields, or ``kind`` for the production function.
    """
    base = params.to_dict()
    cells = sensitivity_cells(axes, mode, base | {"kind": ProductionFunction.parse(kind).value}, link_gamma)
    for cell in cells:
        params.with_overrides(**{k: v for k, v in cell.items() if k not in NON_PARAM_AXES})
    return _pool_map(_sensitivity_cell, [(econ, params, schedule, kind, c) for c in cells], jobs)
