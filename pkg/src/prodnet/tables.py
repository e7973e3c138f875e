"""CSV readers and writers.

Writers format floats with ``repr`` so every file reads back bit-identical.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .economy import (
    CriticalityMatrix,
    Economy,
    SurveyRecord,
    aggregate_ratings,
    validate_economy,
)
from .errors import DimensionMismatch, ValidationError
from .shocks import IndustryAttributes

DAYS_PER_YEAR = 365.0
NA_TOKENS = {"", "na", "nan", "n/a", "null"}


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "unbounded" if value > 0 else "-unbounded"
        return repr(value)
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def parse_float(text: str) -> float:
    t = text.strip()
    if t.lower() in NA_TOKENS:
        return math.nan
    if t == "unbounded":
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise ValidationError(f"not a number: {text!r}") from None


def _read_rows(path) -> tuple[list[str], list[dict]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: missing header")
        header = [h.strip() for h in reader.fieldnames]
        rows = [{k.strip(): (v if v is not None else "") for k, v in row.items() if k is not None} for row in reader]
    return header, rows


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# ---------------------------------------------------------------- ingestion

def read_io_table(path, annual: bool = True, fd_categories: Sequence[str] | None = None) -> dict:
    """Parse ``io_table.csv`` into arrays (daily units).

    Layout: a code column, one column per user industry, ``c``, one column per
    other-final-demand category, ``l`` and optionally ``x``.
    """
    header, rows = _read_rows(path)
    code_col = header[0]
    codes = [r[code_col].strip() for r in rows]
    n = len(codes)
    user_cols = header[1 : 1 + n]
    if user_cols != codes:
        raise DimensionMismatch(
            f"{path}: user columns {user_cols} do not match supplier rows {codes}"
        )
    rest = header[1 + n :]
    if "c" not in rest or "l" not in rest:
        raise DimensionMismatch(f"{path}: columns 'c' and 'l' are required")
    cats = [h for h in rest if h not in ("c", "l", "x")]
    if fd_categories is not None and list(fd_categories) != cats:
        raise DimensionMismatch(f"{path}: final demand columns {cats}, expected {list(fd_categories)}")
    scale = 1.0 / DAYS_PER_YEAR if annual else 1.0

    def col(name):
        return np.array([parse_float(r[name]) for r in rows]) * scale

    z0 = np.array([[parse_float(r[u]) for u in user_cols] for r in rows]) * scale
    f0 = np.column_stack([col(c) for c in cats]) if cats else np.zeros((n, 0))
    return {
        "industry_codes": codes,
        "z0": z0,
        "c0": col("c"),
        "f0": f0,
        "l0": col("l"),
        "x0": col("x") if "x" in rest else None,
        "fd_categories": tuple(cats),
    }


def write_io_table(path, econ: Economy, annual: bool = True) -> None:
    scale = DAYS_PER_YEAR if annual else 1.0
    header = ["code", *econ.industry_codes, "c", *econ.fd_categories, "l", "x"]
    rows = []
    for i, code in enumerate(econ.industry_codes):
        rows.append(
            [code, *(econ.z0[i] * scale), econ.c0[i] * scale, *(econ.f0[i] * scale),
             econ.l0[i] * scale, econ.x0[i] * scale]
        )
    write_rows(path, header, rows)


def read_ratings(path, industry_codes: Sequence[str]) -> CriticalityMatrix:
    """Long-form ratings (input_code, industry_code, analyst_id, rating|NA)."""
    _, rows = _read_rows(path)
    idx = {c: k for k, c in enumerate(industry_codes)}
    n = len(industry_codes)
    per_analyst: dict[str, np.ndarray] = {}
    for r in rows:
        j, i = r["input_code"].strip(), r["industry_code"].strip()
        if j not in idx or i not in idx:
            raise ValidationError(f"rating for unknown industry pair ({j}, {i})")
        aid = r.get("analyst_id", "1").strip() or "1"
        mat = per_analyst.setdefault(aid, np.full((n, n), np.nan))
        mat[idx[j], idx[i]] = parse_float(r["rating"])
    return aggregate_ratings([per_analyst[k] for k in sorted(per_analyst)])


def write_ratings(path, criticality: CriticalityMatrix, industry_codes: Sequence[str], analyst_id="1") -> None:
    rows = []
    for j, jc in enumerate(industry_codes):
        for i, ic in enumerate(industry_codes):
            rows.append([jc, ic, analyst_id, criticality.ratings[j, i]])
    write_rows(path, ["input_code", "industry_code", "analyst_id", "rating"], rows)


def read_criticality_matrix(path, industry_codes: Sequence[str]) -> CriticalityMatrix:
    """Square matrix CSV, rows are inputs and columns industries."""
    header, rows = _read_rows(path)
    cols = header[1:]
    if cols != list(industry_codes) or [r[header[0]].strip() for r in rows] != list(industry_codes):
        raise DimensionMismatch(f"{path}: matrix labels do not match industry codes")
    return CriticalityMatrix(np.array([[parse_float(r[c]) for c in cols] for r in rows]))


def read_inventory_survey(path) -> list[SurveyRecord]:
    _, rows = _read_rows(path)

    def opt(v):
        x = parse_float(v)
        return None if math.isnan(x) else x

    return [
        SurveyRecord(
            industry=r["industry_code"].strip(),
            year=int(r["year"]),
            begin_stock=opt(r["begin_stock"]),
            end_stock=opt(r["end_stock"]),
            turnover=opt(r["turnover"]),
        )
        for r in rows
    ]


def read_crosswalk(path) -> list[tuple[str, str]]:
    _, rows = _read_rows(path)
    return [(r["source_code"].strip(), r["target_code"].strip()) for r in rows]


def read_weights(path) -> dict[str, float]:
    _, rows = _read_rows(path)
    return {r["source_code"].strip(): parse_float(r["weight"]) for r in rows}


def read_vector(path, industry_codes: Sequence[str], column: str) -> np.ndarray:
    """One value per industry from a CSV with an ``industry_code`` column."""
    _, rows = _read_rows(path)
    values = {r["industry_code"].strip(): parse_float(r[column]) for r in rows}
    missing = [c for c in industry_codes if c not in values]
    if missing:
        raise ValidationError(f"{path}: no {column!r} value for {missing}")
    return np.array([values[c] for c in industry_codes])


def read_attributes(path) -> IndustryAttributes:
    _, rows = _read_rows(path)
    return IndustryAttributes(
        industry_codes=[r["industry_code"].strip() for r in rows],
        rli=[parse_float(r["rli"]) for r in rows],
        ess=[parse_float(r["ess"]) for r in rows],
        ppi=[parse_float(r["ppi"]) for r in rows],
        eps_d_lockdown=[parse_float(r["eps_d"]) for r in rows],
    )


def load_economy(
    io_table,
    ratings=None,
    inventory_targets=None,
    annual: bool = True,
    rel_tol: float = 1e-6,
) -> Economy:
    """Read and validate an economy from its CSV inputs.

    ``inventory_targets`` is a path (``industry_code, n`` CSV), an array or None.
    """
    raw = read_io_table(io_table, annual=annual)
    codes = raw["industry_codes"]
    crit = None
    if ratings is not None:
        crit = read_ratings(ratings, codes)
    n = inventory_targets
    if isinstance(n, (str, Path)):
        n = read_vector(n, codes, "n")
    return validate_economy(
        codes, raw["z0"], raw["c0"], raw["f0"], raw["l0"], raw["x0"],
        inventory_targets=n, criticality=crit, fd_categories=raw["fd_categories"], rel_tol=rel_tol,
    )


# ---------------------------------------------------------------- outputs

TRAJECTORY_COLUMNS = ["day", "date", "industry_code", "x", "d", "c", "f", "l"]
AGGREGATE_COLUMNS = ["day", "date", "x", "d", "c", "f", "l", "cd", "l_eff", "xi"]


def write_trajectory(path, traj) -> None:
    rows = []
    x, d, c, f, l = traj.x, traj.d, traj.c, traj.f, traj.l
    for t, date in enumerate(traj.dates):
        for i, code in enumerate(traj.industry_codes):
            rows.append([t, date.isoformat(), code, x[t, i], d[t, i], c[t, i], f[t, i], l[t, i]])
    write_rows(path, TRAJECTORY_COLUMNS, rows)


def write_aggregates(path, traj) -> None:
    rows = []
    x, d, c, f, l = (a.sum(axis=1) for a in (traj.x, traj.d, traj.c, traj.f, traj.l))
    for t, date in enumerate(traj.dates):
        rows.append([t, date.isoformat(), x[t], d[t], c[t], f[t], l[t], traj.cd[t], traj.l_eff[t], traj.xi[t]])
    write_rows(path, AGGREGATE_COLUMNS, rows)


def read_trajectory(path) -> dict[str, np.ndarray]:
    """Per-industry trajectory CSV back into (T, N) arrays."""
    _, rows = _read_rows(path)
    codes = list(dict.fromkeys(r["industry_code"] for r in rows))
    days = sorted({int(r["day"]) for r in rows})
    n, t = len(codes), len(days)
    out = {k: np.zeros((t, n)) for k in ("x", "d", "c", "f", "l")}
    pos = {c: k for k, c in enumerate(codes)}
    for r in rows:
        ti, ii = int(r["day"]), pos[r["industry_code"]]
        for k in out:
            out[k][ti, ii] = parse_float(r[k])
    out["industry_codes"] = codes
    out["dates"] = [None] * t
    for r in rows:
        out["dates"][int(r["day"])] = r["date"]
    return out


def read_columns(path) -> dict[str, list[str]]:
    header, rows = _read_rows(path)
    return {h: [r[h] for r in rows] for h in header}


def write_panel(path, panel) -> None:
    rows = []
    for i, code in enumerate(panel.industry_codes):
        for k, month in enumerate(panel.months):
            w = panel.weights[i] if panel.weights is not None else ""
            rows.append([code, month, panel.values[i, k], w])
    write_rows(path, ["industry_code", "month", "value", "weight"], rows)


def read_panel(path, source: str = "empirical"):
    from .analysis import MonthlyPanel

    _, rows = _read_rows(path)
    codes = list(dict.fromkeys(r["industry_code"].strip() for r in rows))
    months = sorted({r["month"].strip() for r in rows})
    values = np.full((len(codes), len(months)), np.nan)
    weights = defaultdict(lambda: math.nan)
    for r in rows:
        i, k = codes.index(r["industry_code"].strip()), months.index(r["month"].strip())
        values[i, k] = parse_float(r["value"])
        if r.get("weight", "").strip():
            weights[r["industry_code"].strip()] = parse_float(r["weight"])
    if np.any(np.isnan(values)):
        raise ValidationError(f"{path}: panel has missing industry-month cells")
    w = np.array([weights[c] for c in codes])
    return MonthlyPanel(codes, months, values, source, None if np.any(np.isnan(w)) else w)
