"""Independent oracles and random-instance builders for the test suite."""

from __future__ import annotations

import numpy as np

from prodnet.economy import FD_CATEGORIES, CriticalityMatrix, validate_economy
from prodnet.shocks import XI_LOCKDOWN, XI_POST, XI_PRE, Calendar, ShockSchedule


def neumann_ones(m: np.ndarray, terms: int = 50) -> np.ndarray:
    """sum_{k < terms} M^k 1 by repeated multiplication."""
    v = np.ones(m.shape[0])
    total = v.copy()
    for _ in range(terms - 1):
        v = m @ v
        total += v
    return total


def normal_equations(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """OLS coefficients from (X'X) b = X'y via an explicit inverse."""
    return np.linalg.inv(x.T @ x) @ (x.T @ y)


def matrix_with_radius(rng, n: int, radius: float, density: float = 0.7) -> np.ndarray:
    m = rng.uniform(0.0, 1.0, (n, n)) * (rng.uniform(size=(n, n)) < density)
    m[0, 0] = max(m[0, 0], 0.1)
    rho = max(abs(np.linalg.eigvals(m)))
    return m * (radius / rho)


def random_economy(rng, n: int, n_days=(1.0, 30.0), max_colsum: float = 0.8, zero_prob: float = 0.3):
    """Valid economy in daily units, built from random coefficients and final demand."""
    k = len(FD_CATEGORIES)
    raw = rng.uniform(0.0, 1.0, (n, n)) * (rng.uniform(size=(n, n)) > zero_prob)
    colsum = raw.sum(axis=0)
    colsum[colsum == 0] = 1.0
    a = raw / colsum * rng.uniform(0.05, max_colsum, n)
    y = rng.uniform(1.0, 100.0, n)
    x = np.linalg.solve(np.eye(n) - a, y)
    z = a * x[np.newaxis, :]
    split = rng.dirichlet(np.ones(k + 1), size=n)
    fd = y[:, np.newaxis] * split
    c, f = fd[:, 0], fd[:, 1:]
    x = z.sum(axis=1) + c + f.sum(axis=1)
    l = rng.uniform(0.3, 0.9) * np.maximum(x - z.sum(axis=0), 0.0)
    ratings = rng.choice([0.0, 0.5, 1.0], size=(n, n))
    np.fill_diagonal(ratings, 1.0)
    codes = [f"I{i:02d}" for i in range(n)]
    return validate_economy(
        codes, z, c, f, l, x,
        inventory_targets=rng.uniform(*n_days, n),
        criticality=CriticalityMatrix(ratings),
    )


def random_schedule(rng, econ, horizon: int, supply=True, demand=True, other=True) -> ShockSchedule:
    """Piecewise-constant random shocks switched on from a random start day."""
    n, k = econ.n_industries, len(econ.fd_categories)
    start = int(rng.integers(0, max(1, horizon // 2)))
    stop = int(rng.integers(start + 1, horizon + 1))
    active = (np.arange(horizon) >= start) & (np.arange(horizon) < stop)
    eps_s = np.zeros((horizon, n))
    eps_d = np.zeros((horizon, n))
    f_factor = np.ones((horizon, n, k))
    if supply:
        eps_s[active] = rng.uniform(0.0, 1.0, n) * (rng.uniform(size=n) < 0.6)
    if demand:
        eps_d[active] = rng.uniform(0.0, 0.95, n) * (rng.uniform(size=n) < 0.6)
    if other:
        f_factor[active] = rng.uniform(0.3, 1.0, (n, k))
    phase = np.where(np.arange(horizon) < start, XI_PRE, np.where(active, XI_LOCKDOWN, XI_POST))
    return ShockSchedule(econ.industry_codes, econ.fd_categories, eps_s, eps_d, f_factor, phase, Calendar(), "random")


def bundled_schedule(name: str, horizon: int | None = None) -> ShockSchedule:
    """Compiled toy schedule for one of the bundled scenario presets."""
    from prodnet import toy
    from prodnet.shocks import ScenarioSpec, compile_schedule

    spec = ScenarioSpec(**toy.BUNDLED_SCENARIOS[name])
    g = toy.generate()
    vector = g[spec.supply] if spec.supply in ("s5", "s6") else None
    return compile_schedule(spec, toy.toy_attributes(), FD_CATEGORIES, horizon, vector)
