"""Seeded synthetic five-industry economy used as the desk-scale fixture.

Construction:

1. technical coefficients with column sums in [0.25, 0.55], so the Leontief
   inverse exists and every industry has positive value added;
2. final demand y ~ U(200, 1000) per industry, gross output x = (I - A)^-1 y;
3. flows Z = A diag(x), y split over consumption and the five other categories;
4. labor compensation is 60% of value added;
5. all annual flows rounded to cents, then x recomputed as row totals so the
   table clears exactly.

Ratings, attributes, inventory targets and s5/s6 vectors are drawn from the
same generator. ``write_toy`` regenerates every file in ``data/toy``.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .economy import FD_CATEGORIES, CriticalityMatrix, Economy, validate_economy

TOY_CODES = ("A01", "C29", "D35", "G47", "I")
TOY_SEED = 20200323
LABOR_SHARE = 0.6


def data_dir() -> Path:
    return Path(str(resources.files("prodnet") / "data" / "toy"))


def config_path() -> Path:
    return data_dir() / "toy.yaml"


def generate(seed: int = TOY_SEED, codes=TOY_CODES) -> dict:
    """All toy inputs as plain arrays in annual units."""
    rng = np.random.default_rng(seed)
    n = len(codes)
    k = len(FD_CATEGORIES)

    raw = rng.uniform(0.0, 1.0, (n, n)) * (rng.uniform(size=(n, n)) > 0.2)
    np.fill_diagonal(raw, rng.uniform(0.3, 1.0, n))
    a = raw / raw.sum(axis=0) * rng.uniform(0.25, 0.55, n)
    y = rng.uniform(200.0, 1000.0, n)
    x = np.linalg.solve(np.eye(n) - a, y)
    z = np.round(a * x[np.newaxis, :], 2)

    split = rng.dirichlet(np.full(k + 1, 2.0), size=n)
    fd = np.round(y[:, np.newaxis] * split, 2)
    c, f = fd[:, 0], fd[:, 1:]
    x = np.round(z.sum(axis=1) + c + f.sum(axis=1), 2)
    l = np.round(LABOR_SHARE * (x - z.sum(axis=0)), 2)

    ratings = rng.choice([0.0, 0.5, 1.0], size=(n, n), p=[0.4, 0.3, 0.3])
    np.fill_diagonal(ratings, 1.0)

    attrs = {
        "rli": np.round(rng.uniform(0.05, 0.6, n), 3),
        "ess": np.round(np.where(rng.uniform(size=n) < 0.4, 1.0, rng.uniform(0.05, 0.9, n)), 3),
        "ppi": np.round(rng.uniform(0.3, 1.0, n), 3),
        "eps_d": np.round(rng.choice([0.0, 0.1, 0.4, 0.8], size=n), 3),
    }
    return {
        "industry_codes": tuple(codes),
        "z": z,
        "c": c,
        "f": f,
        "l": l,
        "x": x,
        "ratings": ratings,
        "inventory_targets": np.round(rng.uniform(5.0, 30.0, n), 1),
        "attributes": attrs,
        "s5": np.round(rng.uniform(0.0, 0.6, n), 3),
        "s6": np.round(rng.uniform(0.0, 0.8, n), 3),
    }


def toy_economy(seed: int = TOY_SEED) -> Economy:
    """The toy economy in daily units, built in memory."""
    g = generate(seed)
    return validate_economy(
        g["industry_codes"],
        g["z"] / 365.0,
        g["c"] / 365.0,
        g["f"] / 365.0,
        g["l"] / 365.0,
        g["x"] / 365.0,
        inventory_targets=g["inventory_targets"],
        criticality=CriticalityMatrix(g["ratings"]),
    )


# Scenario presets exercised by the bundled-scenario checks.
BUNDLED_SCENARIOS = {
    **{sid: {"supply": sid} for sid in ("s1", "s2", "s3", "s4", "s5", "s6")},
    "stress": {"supply": "s5", "overrides": {"D35": 0.7}},
}


def toy_attributes(seed: int = TOY_SEED):
    from .shocks import IndustryAttributes

    g = generate(seed)
    a = g["attributes"]
    return IndustryAttributes(g["industry_codes"], a["rli"], a["ess"], a["ppi"], a["eps_d"])


TOY_CONFIG = """\
# Bundled toy run. Paths are relative to this file.
economy:
  io_table: io_table.csv
  ratings: ratings.csv
  inventory_targets: inventory_targets.csv
attributes: attributes.csv
supply_vectors:
  s5: s5.csv
  s6: s6.csv
scenario:
  supply: s5
kind: ihs2
out: out
sweep:
  axes: {tau: [5, 10, 30]}
single_shock:
  mode: supply
  grid: [0.4, 0.8]
  kinds: [leontief, ihs2, linear]
  window_days: 30
scenarios:
  stress:
    supply: s5
    overrides: {D35: 0.7}
"""


def write_toy(directory: Path | None = None, seed: int = TOY_SEED) -> Path:
    from .tables import write_ratings, write_rows

    directory = Path(directory) if directory is not None else data_dir()
    directory.mkdir(parents=True, exist_ok=True)
    g = generate(seed)
    codes = g["industry_codes"]
    header = ["code", *codes, "c", *FD_CATEGORIES, "l", "x"]
    rows = [[code, *g["z"][i], g["c"][i], *g["f"][i], g["l"][i], g["x"][i]] for i, code in enumerate(codes)]
    write_rows(directory / "io_table.csv", header, rows)
    write_ratings(directory / "ratings.csv", CriticalityMatrix(g["ratings"]), codes)
    write_rows(directory / "inventory_targets.csv", ["industry_code", "n"], zip(codes, g["inventory_targets"]))
    a = g["attributes"]
    write_rows(
        directory / "attributes.csv",
        ["industry_code", "rli", "ess", "ppi", "eps_d"],
        zip(codes, a["rli"], a["ess"], a["ppi"], a["eps_d"]),
    )
    for s in ("s5", "s6"):
        write_rows(directory / f"{s}.csv", ["industry_code", "eps_s"], zip(codes, g[s]))
    (directory / "toy.yaml").write_text(TOY_CONFIG, encoding="utf-8")
    return directory
