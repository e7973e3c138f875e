"""Bundled UK shock fixtures (55 WIOD industries).

``table5_supply.csv`` and ``table6_demand.csv`` hold the published per-industry
supply and demand shocks in percent. Industry attributes (RLI, ESS, PPI) are
not published per industry, so ``uk_attributes.csv`` holds attributes implied
by the supply shocks:

* industries with ESS = 1 have S1 = 0 and S4 = 0.7 (1 - RLI) PPI / max PPI; we
  set PPI = 1 and read RLI off S4;
* the four partially essential industries take their published ESS, RLI from
  S1 = (1 - RLI)(1 - ESS) and PPI from S4.

These reproduce S1 exactly and S2-S4 up to the one-decimal rounding of the
source table. Only the products entering the shock formulas are meaningful.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .shocks import IOTA, IndustryAttributes

PUBLISHED_ESS = {"G45": 0.64, "G47": 0.71, "I": 0.05, "R_S": 0.07}
S4_IOTA = IOTA["s4"]


def data_dir() -> Path:
    return Path(str(resources.files("prodnet") / "data" / "uk"))


def _read(name: str) -> dict[str, list[str]]:
    from .tables import read_columns

    return read_columns(data_dir() / name)


def table5() -> dict:
    """Supply shocks as fractions, keyed by scenario, plus output shares."""
    cols = _read("table5_supply.csv")
    out = {"industry_codes": tuple(cols["industry_code"]), "sector": cols["sector"]}
    for k in ("x_share", "s1", "s2", "s3", "s4", "s5", "s6"):
        out[k] = np.array([float(v) for v in cols[k]]) / 100.0
    return out


def table6() -> dict:
    """Consumption and other-final-demand shocks as fractions."""
    cols = _read("table6_demand.csv")
    out = {"industry_codes": tuple(cols["industry_code"]), "sector": cols["sector"]}
    for k in ("c_share", "eps_d", "f_share", "f_shock"):
        out[k] = np.array([float(v) for v in cols[k]]) / 100.0
    return out


def implied_attributes() -> IndustryAttributes:
    t5, t6 = table5(), table6()
    codes = t5["industry_codes"]
    if t6["industry_codes"] != codes:
        raise ValueError("supply and demand fixtures list different industries")
    n = len(codes)
    ess = np.array([PUBLISHED_ESS.get(c, 1.0) for c in codes])
    rli = np.empty(n)
    ppi = np.empty(n)
    full = ess == 1.0
    rli[full] = 1.0 - t5["s4"][full] / S4_IOTA
    ppi[full] = 1.0
    part = ~full
    rli[part] = 1.0 - t5["s1"][part] / (1.0 - ess[part])
    ratio = t5["s4"][part] / (1.0 - rli[part])
    ppi[part] = (ratio - (1.0 - ess[part])) / (S4_IOTA * ess[part])
    return IndustryAttributes(codes, rli, ess, ppi, t6["eps_d"])


def attributes() -> IndustryAttributes:
    from .tables import read_attributes

    return read_attributes(data_dir() / "uk_attributes.csv")


def supply_vector(scenario: str) -> np.ndarray:
    scenario = scenario.lower()
    if scenario not in ("s5", "s6"):
        raise ValueError("only s5 and s6 ship as fixed vectors")
    return table5()[scenario]


def write_fixtures(directory: Path | None = None) -> None:
    """Regenerate the derived UK fixtures from the two source tables."""
    from .tables import write_rows

    directory = Path(directory) if directory is not None else data_dir()
    a = implied_attributes()
    write_rows(
        directory / "uk_attributes.csv",
        ["industry_code", "rli", "ess", "ppi", "eps_d"],
        zip(a.industry_codes, a.rli, a.ess, a.ppi, a.eps_d_lockdown),
    )
    for s in ("s5", "s6"):
        write_rows(directory / f"{s}.csv", ["industry_code", "eps_s"], zip(a.industry_codes, supply_vector(s)))
