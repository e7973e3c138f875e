"""Static economy representation and calibration mathematics.

Flows are in currency units per day. Matrices follow the supplier-row,
user-column convention: ``z0[j, i]`` is the flow from industry ``j`` to ``i``.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateCode,
    EmptyInput,
    MarketClearingViolation,
    NegativeFlow,
    NoDataAnywhere,
    NonFiniteValue,
    NonPositiveTurnover,
    SingularSystem,
    UnmappedTarget,
    ValidationError,
    ZeroLaborIncome,
    ZeroWeightTarget,
)

logger = logging.getLogger(__name__)

FD_CATEGORIES = ("npish", "government", "investment", "export", "inventory_change")
RATING_LEVELS = (0.0, 0.5, 1.0)
DEFAULT_REL_TOL = 1e-6


@dataclass(frozen=True)
class CriticalityMatrix:
    """Input ratings: ``ratings[j, i]`` rates input ``j`` for industry ``i``."""

    ratings: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ratings, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise DimensionMismatch(f"ratings must be square, got shape {r.shape}")
        if not np.all(np.isin(r, RATING_LEVELS)):
            raise ValidationError("ratings must be exactly 0, 0.5 or 1")
        if not np.all(np.diag(r) == 1.0):
            raise ValidationError("diagonal ratings must equal 1")
        r.setflags(write=False)
        object.__setattr__(self, "ratings", r)

    @property
    def critical(self) -> np.ndarray:
        """Boolean mask of the critical sets V_i (column i)."""
        return self.ratings == 1.0

    @property
    def important(self) -> np.ndarray:
        """Boolean mask of the important sets U_i (column i)."""
        return self.ratings == 0.5

    @property
    def noncritical(self) -> np.ndarray:
        return self.ratings == 0.0

    @classmethod
    def all_critical(cls, n: int) -> "CriticalityMatrix":
        return cls(np.ones((n, n)))


@dataclass(frozen=True)
class Economy:
    industry_codes: tuple[str, ...]
    z0: np.ndarray
    c0: np.ndarray
    f0: np.ndarray
    l0: np.ndarray
    x0: np.ndarray
    inventory_targets: np.ndarray
    criticality: CriticalityMatrix
    fd_categories: tuple[str, ...] = FD_CATEGORIES

    def __post_init__(self):
        for name in ("z0", "c0", "f0", "l0", "x0", "inventory_targets"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "industry_codes", tuple(self.industry_codes))
        object.__setattr__(self, "fd_categories", tuple(self.fd_categories))

    @property
    def n_industries(self) -> int:
        return len(self.industry_codes)

    @property
    def total_final_demand(self) -> np.ndarray:
        return self.c0 + self.f0.sum(axis=1)

    def index(self, code: str) -> int:
        return self.industry_codes.index(code)

    def category_index(self, name: str) -> int:
        return self.fd_categories.index(name)


@dataclass(frozen=True)
class TechnicalCoefficients:
    a: np.ndarray
    b_alloc: np.ndarray


def _check_matrix(name, arr, shape):
    if arr.shape != shape:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} contains non-finite entries")


def validate_economy(
    industry_codes: Sequence[str],
    z0,
    c0,
    f0=None,
    l0=None,
    x0=None,
    inventory_targets=None,
    criticality: CriticalityMatrix | np.ndarray | None = None,
    fd_categories: Sequence[str] = FD_CATEGORIES,
    rel_tol: float = DEFAULT_REL_TOL,
) -> Economy:
    """Check a parsed IO table and build an :class:`Economy`.

    Missing ``x0`` is recomputed as row totals. Missing ``f0`` is zero, missing
    inventory targets default to one day, a missing criticality matrix to all
    inputs critical.
    """
    codes = [str(c) for c in industry_codes]
    n = len(codes)
    if n == 0:
        raise DimensionMismatch("economy has no industries")
    if len(set(codes)) != n:
        dupes = sorted({c for c in codes if codes.count(c) > 1})
        raise DuplicateCode(f"duplicate industry codes: {dupes}")
    k = len(fd_categories)

    z0 = np.asarray(z0, dtype=float)
    c0 = np.asarray(c0, dtype=float)
    f0 = np.zeros((n, k)) if f0 is None else np.asarray(f0, dtype=float)
    if f0.ndim == 1:
        f0 = f0.reshape(n, -1) if f0.size == n and k == 1 else f0
    l0 = np.zeros(n) if l0 is None else np.asarray(l0, dtype=float)
    _check_matrix("z0", z0, (n, n))
    _check_matrix("c0", c0, (n,))
    _check_matrix("f0", f0, (n, k))
    _check_matrix("l0", l0, (n,))

    for name, arr in (("z0", z0), ("c0", c0), ("f0", f0), ("l0", l0)):
        neg = np.argwhere(arr < 0)
        if len(neg):
            idx = tuple(neg[0])
            row = codes[idx[0]]
            col = codes[idx[1]] if name == "z0" else (fd_categories[idx[1]] if name == "f0" else name)
            raise NegativeFlow(row, col, float(arr[idx]))

    row_totals = z0.sum(axis=1) + c0 + f0.sum(axis=1)
    if x0 is None:
        x0 = row_totals.copy()
    else:
        x0 = np.asarray(x0, dtype=float)
        _check_matrix("x0", x0, (n,))
        if np.any(x0 < 0):
            i = int(np.argmax(x0 < 0))
            raise NegativeFlow(codes[i], "x", float(x0[i]))
        residual = x0 - row_totals
        bad = np.abs(residual) > rel_tol * np.abs(x0)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise MarketClearingViolation(codes[i], float(residual[i]))

    used = (z0.sum(axis=0) + z0.sum(axis=1) + c0 + f0.sum(axis=1)) > 0
    zero_x = used & (x0 <= 0)
    if np.any(zero_x):
        i = int(np.argmax(zero_x))
        raise ValidationError(f"industry {codes[i]} has flows but zero output")

    if inventory_targets is None:
        inventory_targets = np.ones(n)
    inventory_targets = np.asarray(inventory_targets, dtype=float)
    _check_matrix("inventory_targets", inventory_targets, (n,))
    if np.any(inventory_targets < 0):
        raise ValidationError("inventory targets must be non-negative")

    if criticality is None:
        criticality = CriticalityMatrix.all_critical(n)
    elif not isinstance(criticality, CriticalityMatrix):
        criticality = CriticalityMatrix(np.asarray(criticality, dtype=float))
    if criticality.ratings.shape != (n, n):
        raise DimensionMismatch(f"criticality has shape {criticality.ratings.shape}, expected {(n, n)}")

    return Economy(
        industry_codes=tuple(codes),
        z0=z0,
        c0=c0,
        f0=f0,
        l0=l0,
        x0=x0,
        inventory_targets=inventory_targets,
        criticality=criticality,
        fd_categories=tuple(fd_categories),
    )


def technical_coefficients(econ: Economy) -> TechnicalCoefficients:
    """A[j, i] = Z[j, i] / x[i] and B[i, j] = Z[i, j] / x[i]; zero where x = 0."""
    x = econ.x0
    safe = np.where(x > 0, x, 1.0)
    pos = (x > 0).astype(float)
    a = econ.z0 / safe[np.newaxis, :] * pos[np.newaxis, :]
    b = econ.z0 / safe[:, np.newaxis] * pos[:, np.newaxis]
    return TechnicalCoefficients(a=a, b_alloc=b)


def _solve_ones(m: np.ndarray, what: str) -> np.ndarray:
    n = m.shape[0]
    lhs = np.eye(n) - m
    if np.linalg.cond(lhs) > 1e12:
        raise SingularSystem(f"(I - {what}) is singular to working precision")
    return np.linalg.solve(lhs, np.ones(n))


def upstreamness(tc: TechnicalCoefficients) -> np.ndarray:
    """Row sums of the Ghosh inverse, u = (I - B)^-1 1."""
    return _solve_ones(tc.b_alloc, "B")


def output_multipliers(tc: TechnicalCoefficients) -> np.ndarray:
    """Column sums of the Leontief inverse, m = (I - A^T)^-1 1."""
    return _solve_ones(tc.a.T, "A^T")


def propensity_to_consume(econ: Economy) -> float:
    """Share of labor income spent on domestic final consumption."""
    total_l = float(econ.l0.sum())
    if total_l <= 0:
        raise ZeroLaborIncome("total labor compensation is zero")
    m = float(econ.c0.sum()) / total_l
    if m > 1:
        logger.warning("propensity to consume %.4f exceeds 1", m)
    return m


@dataclass
class SurveyRecord:
    industry: str
    year: int
    begin_stock: float | None
    end_stock: float | None
    turnover: float | None

    @property
    def missing(self) -> bool:
        vals = (self.begin_stock, self.end_stock, self.turnover)
        return any(v is None or (isinstance(v, float) and np.isnan(v)) for v in vals)


def inventory_targets_from_survey(
    records: Iterable[SurveyRecord],
    model_codes: Sequence[str],
    service_codes: Iterable[str] = (),
    decay: float = 0.95,
    mapping: Mapping[str, str] | None = None,
    ref_year: int | None = None,
) -> np.ndarray:
    """Days of input coverage per model industry from inventory survey data.

    Each year's ratio is ``365 * mean(begin, end) / turnover``; years are
    combined with weights ``decay ** (ref_year - year)``. Source industries are
    mapped to model industries through ``mapping`` (identity when omitted) and
    combined by mean turnover. Model industries without data get the plain
    mean over ``service_codes``.
    """
    records = list(records)
    years = [r.year for r in records if not r.missing]
    if not years:
        raise NoDataAnywhere("inventory survey contains no usable records")
    if ref_year is None:
        ref_year = max(years)

    num = defaultdict(float)
    den = defaultdict(float)
    turnover = defaultdict(list)
    for r in records:
        if r.missing:
            continue
        if r.turnover <= 0:
            raise NonPositiveTurnover(r.year, r.industry)
        ratio = 365.0 * 0.5 * (r.begin_stock + r.end_stock) / r.turnover
        w = decay ** (ref_year - r.year)
        num[r.industry] += w * ratio
        den[r.industry] += w
        turnover[r.industry].append(r.turnover)

    mapping = dict(mapping) if mapping is not None else {}
    agg_num = defaultdict(float)
    agg_den = defaultdict(float)
    for src in num:
        target = mapping.get(src, src)
        n_src = num[src] / den[src]
        w = float(np.mean(turnover[src]))
        agg_num[target] += w * n_src
        agg_den[target] += w

    known = {c: agg_num[c] / agg_den[c] for c in agg_num if agg_den[c] > 0}
    if not any(c in known for c in model_codes):
        raise NoDataAnywhere("no model industry has inventory data")
    services = [known[c] for c in service_codes if c in known]
    fill = float(np.mean(services)) if services else float(np.mean(list(known.values())))
    out = np.empty(len(model_codes))
    for k, code in enumerate(model_codes):
        out[k] = known.get(code, fill)
        if code not in known:
            logger.info("inventory target for %s imputed as %.3f", code, fill)
    return out


def aggregate_ratings(per_analyst: Sequence[np.ndarray]) -> CriticalityMatrix:
    """Combine analyst ratings (NaN = no answer) into one criticality matrix.

    Cell means of at least 2/3 round to 1, at most 1/3 to 0, anything in
    between to 0.5. Cells nobody rated become 0; the diagonal is always 1.
    """
    if len(per_analyst) == 0:
        raise EmptyInput("no rating matrices given")
    stack = np.stack([np.asarray(m, dtype=float) for m in per_analyst])
    finite = stack[np.isfinite(stack)]
    if not np.all(np.isin(finite, RATING_LEVELS)):
        raise ValidationError("ratings must be 0, 0.5, 1 or NA")
    counts = np.isfinite(stack).sum(axis=0)
    sums = np.nansum(stack, axis=0)
    mean = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    eps = 1e-12
    out = np.full(mean.shape, 0.5)
    out[mean >= 2.0 / 3.0 - eps] = 1.0
    out[mean <= 1.0 / 3.0 + eps] = 0.0
    out[counts == 0] = 0.0
    np.fill_diagonal(out, 1.0)
    return CriticalityMatrix(out)


def crosswalk_aggregate(
    values: Mapping[str, float],
    weights: Mapping[str, float],
    mapping: Iterable[tuple[str, str]],
    targets: Sequence[str] | None = None,
) -> dict[str, float]:
    """Weighted aggregation of a source-classification index onto targets.

    A source mapped to k targets contributes ``weight / k`` to each.
    """
    links = defaultdict(list)
    for src, tgt in mapping:
        if tgt not in links[src]:
            links[src].append(tgt)
    num = defaultdict(float)
    den = defaultdict(float)
    for src, tgts in links.items():
        if src not in values:
            continue
        w = float(weights.get(src, 0.0))
        if w < 0:
            raise ValidationError(f"negative weight for source {src!r}")
        share = w / len(tgts)
        for tgt in tgts:
            num[tgt] += share * float(values[src])
            den[tgt] += share
    if targets is None:
        targets = sorted(den)
    out = {}
    for tgt in targets:
        if tgt not in den:
            raise UnmappedTarget(tgt)
        if den[tgt] <= 0:
            raise ZeroWeightTarget(tgt)
        out[tgt] = num[tgt] / den[tgt]
    return out
