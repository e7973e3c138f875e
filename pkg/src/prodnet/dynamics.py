"""Daily simulation of the production network.

Each day runs, in order: labor adjustment, demand formation (intermediate
orders, household and other final demand), production, proportional
rationing, and inventory updating.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from .economy import Economy, TechnicalCoefficients, propensity_to_consume, technical_coefficients
from .errors import AllGoodsShocked, ConfigError, NonPositiveIncome, ZeroConsumption
from .production import (
    InputState,
    ProductionFunction,
    capacity,
    constraint_terms,
    input_sets,
    input_usage,
    realized_output,
)
from .shocks import XI_LOCKDOWN, XI_POST, XI_PRE, ShockSchedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Params:
    tau: float = 10.0
    gamma_h: float = 1.0 / 30.0
    gamma_f: float = 1.0 / 15.0
    rho: float = 0.99
    m: float | None = None  # None: computed from the economy
    delta_s: float = 0.5
    b: float = 0.8
    l_share_recovery: float = 0.5

    def __post_init__(self):
        checks = [
            ("tau", self.tau >= 1),
            ("gamma_h", 0 <= self.gamma_h <= 1),
            ("gamma_f", 0 <= self.gamma_f <= 1),
            ("rho", 0 <= self.rho < 1),
            ("m", self.m is None or 0 < self.m <= 1),
            ("delta_s", 0 <= self.delta_s <= 1),
            ("b", 0 <= self.b <= 1),
            ("l_share_recovery", 0 <= self.l_share_recovery <= 1),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigError(f"parameter {name}={getattr(self, name)!r} out of range")

    def with_overrides(self, **kw) -> "Params":
        unknown = set(kw) - set(self.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown parameters: {sorted(unknown)}")
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SimState:
    day: int
    s: np.ndarray
    l: np.ndarray
    d_prev: np.ndarray
    cd_prev: float
    xi: float
    theta0: np.ndarray
    # yesterday's min(x^inp, d) and x^cap, used for hiring and firing
    target_prev: np.ndarray
    xcap_prev: np.ndarray


@dataclass(frozen=True)
class DayRecord:
    day: int
    x: np.ndarray
    d: np.ndarray
    orders: np.ndarray
    c: np.ndarray
    f: np.ndarray
    z_deliv: np.ndarray
    l_comp: np.ndarray
    l_eff: float
    cd: float
    xi: float
    xcap: np.ndarray
    xinp: np.ndarray
    s: np.ndarray
    xinp_binding: np.ndarray
    nc_binding: np.ndarray


@dataclass(frozen=True)
class SimContext:
    """Quantities fixed for the whole run."""

    econ: Economy
    params: Params
    kind: ProductionFunction
    tc: TechnicalCoefficients
    m: float
    l_tilde0: float
    xi_lockdown: float
    binding: np.ndarray
    sets: object

    @property
    def n(self) -> int:
        return self.econ.n_industries


def lockdown_xi(econ: Economy, eps_s_start) -> float:
    """One minus half the relative labor income lost to first-order supply shocks."""
    l0 = econ.l0
    total = float(l0.sum())
    lost = float(np.dot(np.asarray(eps_s_start, float), l0))
    return 1.0 - 0.5 * lost / total


def prepare(econ: Economy, params: Params, kind, schedule: ShockSchedule | None = None) -> SimContext:
    kind = ProductionFunction.parse(kind)
    tc = technical_coefficients(econ)
    m = propensity_to_consume(econ) if params.m is None else float(params.m)
    if params.m is not None and abs(m * econ.l0.sum() - econ.c0.sum()) > 1e-9 * econ.c0.sum():
        logger.warning("m=%.4f is inconsistent with the table; the steady state is not a fixed point", m)
    xi_l = 1.0
    if schedule is not None:
        start = schedule.lockdown_start_index()
        if start is not None:
            xi_l = lockdown_xi(econ, schedule.eps_s[start])
    sets = input_sets(kind, tc.a, econ.criticality)
    return SimContext(
        econ=econ,
        params=params,
        kind=kind,
        tc=tc,
        m=m,
        l_tilde0=float(econ.l0.sum()),
        xi_lockdown=xi_l,
        binding=sets.binding,
        sets=sets,
    )


def init_steady_state(econ: Economy, params: Params | None = None) -> SimState:
    total_c = float(econ.c0.sum())
    if total_c <= 0:
        raise ZeroConsumption("household consumption sums to zero")
    s = econ.inventory_targets[np.newaxis, :] * econ.z0
    x0 = econ.x0.copy()
    return SimState(
        day=0,
        s=s,
        l=econ.l0.copy(),
        d_prev=x0.copy(),
        cd_prev=total_c,
        xi=1.0,
        theta0=econ.c0 / total_c,
        target_prev=x0.copy(),
        xcap_prev=x0.copy(),
    )


def intermediate_orders(state: SimState, econ: Economy, params: Params, a: np.ndarray | None = None) -> np.ndarray:
    """O[j, i]: orders of industry i to supplier j, never negative."""
    if a is None:
        a = technical_coefficients(econ).a
    target = econ.inventory_targets[np.newaxis, :] * econ.z0
    orders = a * state.d_prev[np.newaxis, :] + (target - state.s) / params.tau
    return np.maximum(orders, 0.0)


def preference_shares(theta0, eps_d, delta_s: float) -> tuple[np.ndarray, float]:
    """Renormalized preference shares and the aggregate saving shock."""
    theta_bar = np.asarray(theta0, float) * (1.0 - np.asarray(eps_d, float))
    total = float(theta_bar.sum())
    if total <= 0:
        raise AllGoodsShocked("every consumed good is fully shocked")
    return theta_bar / total, delta_s * (1.0 - total)


def consumption_demand(
    cd_prev: float,
    theta0,
    eps_d,
    l_tilde: float,
    l_tilde_p: float,
    params: Params,
    m: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Aggregate and per-good household consumption demand.

    Returns ``(cd_total, cd_vector, theta)``.
    """
    if l_tilde <= 0 or l_tilde_p <= 0:
        raise NonPositiveIncome(f"income must be positive (current {l_tilde}, permanent {l_tilde_p})")
    theta, agg_eps = preference_shares(theta0, eps_d, params.delta_s)
    rho = params.rho
    log_c = (
        rho * np.log(cd_prev)
        + 0.5 * (1 - rho) * np.log(m * l_tilde)
        + 0.5 * (1 - rho) * np.log(m * l_tilde_p)
    )
    cd_total = (1.0 - agg_eps) * float(np.exp(log_c))
    return cd_total, theta * cd_total, theta


def effective_income(l, l_tilde0: float, b: float) -> float:
    """Labor income topped up by benefits replacing a share b of lost income."""
    return b * l_tilde0 + (1.0 - b) * float(np.sum(l))


def permanent_income(xi_prev: float, phase: int, xi_lockdown: float, params: Params) -> float:
    """Next value of the permanent-income factor xi."""
    if phase == XI_PRE:
        return 1.0
    if phase == XI_LOCKDOWN:
        return xi_lockdown
    if phase == XI_POST:
        rho = params.rho
        nu = -(1.0 - rho) * (1.0 - xi_lockdown) * params.l_share_recovery
        return 1.0 - rho + rho * xi_prev + nu
    raise ValueError(f"unknown permanent-income phase {phase}")


def ration_and_deliver(x, d, orders, cd, fd):
    """Proportional rationing of output across all customers.

    Returns ``(z_deliv, c, f)`` where ``z_deliv[j, i]`` is the delivery from
    supplier ``j`` to industry ``i``.
    """
    x = np.asarray(x, float)
    d = np.asarray(d, float)
    scale = np.divide(x, d, out=np.ones_like(x), where=d > 0)
    z_deliv = orders * scale[:, np.newaxis]
    c = cd * scale
    f = fd * scale[:, np.newaxis] if np.ndim(fd) == 2 else fd * scale
    _absorb_residual(x, z_deliv, c, f)
    return z_deliv, c, f


def _absorb_residual(x, z_deliv, c, f) -> None:
    """Give each supplier's rounding residual to its largest customer.

    After this the exact sum of deliveries is within one ulp of ``x``.
    """
    f2 = f if f.ndim == 2 else f[:, np.newaxis]
    for j in np.flatnonzero(x > 0):
        row = [*z_deliv[j].tolist(), float(c[j]), *f2[j].tolist()]
        resid = float(x[j]) - math.fsum(row)
        if resid == 0.0:
            continue
        k = int(np.argmax(row))
        n_z = z_deliv.shape[1]
        if k < n_z:
            z_deliv[j, k] = max(z_deliv[j, k] + resid, 0.0)
        elif k == n_z:
            c[j] = max(c[j] + resid, 0.0)
        else:
            f2[j, k - n_z - 1] = max(f2[j, k - n_z - 1] + resid, 0.0)


def update_inventories(s, z_deliv, usage) -> np.ndarray:
    return np.maximum(s + z_deliv - usage, 0.0)


def update_labor(state: SimState, econ: Economy, params: Params, eps_s_today) -> np.ndarray:
    """Hire or fire towards yesterday's needs, then cap at the labor available today."""
    x0 = econ.x0
    l0 = econ.l0
    ratio = np.divide(l0, x0, out=np.zeros_like(l0), where=x0 > 0)
    delta = ratio * (state.target_prev - state.xcap_prev)
    gamma = np.where(delta >= 0, params.gamma_h, params.gamma_f)
    l_new = state.l + gamma * delta
    l_max = (1.0 - np.asarray(eps_s_today, float)) * l0
    return np.clip(l_new, 0.0, l_max)


def step(state: SimState, ctx: SimContext, schedule: ShockSchedule) -> tuple[SimState, DayRecord]:
    econ, params = ctx.econ, ctx.params
    t = state.day
    a = ctx.tc.a

    l = update_labor(state, econ, params, schedule.eps_s[t])

    orders = intermediate_orders(state, econ, params, a)
    xi = permanent_income(state.xi, int(schedule.xi_phase[t]), ctx.xi_lockdown, params)
    l_eff = effective_income(l, ctx.l_tilde0, params.b)
    cd_total, cd, _ = consumption_demand(
        state.cd_prev, state.theta0, schedule.eps_d[t], l_eff, xi * ctx.l_tilde0, params, ctx.m
    )
    fd = econ.f0 * schedule.f_factor[t]
    d = orders.sum(axis=1) + cd + fd.sum(axis=1)

    xcap = capacity(l, econ.l0, econ.x0)
    inputs = InputState(state.s, a, econ.criticality, econ.x0)
    terms = constraint_terms(ctx.kind, inputs, ctx.sets)
    nc_term = terms.pop("noncritical", None)
    xinp_main = np.minimum.reduce(list(terms.values()))
    xinp = xinp_main if nc_term is None else np.minimum(xinp_main, nc_term)
    x = realized_output(d, xcap, xinp)

    z_deliv, c, f = ration_and_deliver(x, d, orders, cd, fd)
    usage = input_usage(x, inputs, ctx.binding)
    s_new = update_inventories(state.s, z_deliv, usage)

    demand_cap = np.minimum(xcap, d)
    xinp_binding = xinp < demand_cap
    if nc_term is None:
        nc_binding = np.zeros(ctx.n, dtype=bool)
    else:
        nc_binding = nc_term < np.minimum(xinp_main, demand_cap)

    new_state = SimState(
        day=t + 1,
        s=s_new,
        l=l,
        d_prev=d,
        cd_prev=cd_total,
        xi=xi,
        theta0=state.theta0,
        target_prev=np.minimum(xinp, d),
        xcap_prev=xcap,
    )
    record = DayRecord(
        day=t,
        x=x,
        d=d,
        orders=orders,
        c=c,
        f=f,
        z_deliv=z_deliv,
        l_comp=l,
        l_eff=l_eff,
        cd=cd_total,
        xi=xi,
        xcap=xcap,
        xinp=xinp,
        s=s_new,
        xinp_binding=xinp_binding,
        nc_binding=nc_binding,
    )
    return new_state, record


@dataclass
class Trajectory:
    industry_codes: tuple[str, ...]
    fd_categories: tuple[str, ...]
    dates: list
    records: list[DayRecord]
    kind: ProductionFunction
    params: Params
    m: float
    xi_lockdown: float
    scenario_id: str = "none"
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def _stack(self, name) -> np.ndarray:
        return np.stack([getattr(r, name) for r in self.records])

    @cached_property
    def x(self) -> np.ndarray:
        return self._stack("x")

    @cached_property
    def d(self) -> np.ndarray:
        return self._stack("d")

    @cached_property
    def c(self) -> np.ndarray:
        return self._stack("c")

    @cached_property
    def f(self) -> np.ndarray:
        """Other final deliveries summed over categories, shape (T, N)."""
        return self._stack("f").sum(axis=2)

    @cached_property
    def l(self) -> np.ndarray:
        return self._stack("l_comp")

    @cached_property
    def xi(self) -> np.ndarray:
        return np.array([r.xi for r in self.records])

    @cached_property
    def cd(self) -> np.ndarray:
        return np.array([r.cd for r in self.records])

    @cached_property
    def l_eff(self) -> np.ndarray:
        return np.array([r.l_eff for r in self.records])

    @property
    def aggregate_output(self) -> np.ndarray:
        return self.x.sum(axis=1)

    @property
    def xinp_binding_days(self) -> int:
        return int(sum(bool(r.xinp_binding.any()) for r in self.records))

    @property
    def nc_binding_days(self) -> int:
        return int(sum(bool(r.nc_binding.any()) for r in self.records))


def run(
    econ: Economy,
    params: Params,
    schedule: ShockSchedule,
    kind,
    horizon_days: int | None = None,
) -> Trajectory:
    """Simulate ``horizon_days`` days (default: the schedule length) from the steady state."""
    horizon = schedule.horizon if horizon_days is None else int(horizon_days)
    if horizon < 1:
        raise ConfigError("horizon must be at least one day")
    if horizon > schedule.horizon:
        raise ConfigError(f"horizon {horizon} exceeds schedule length {schedule.horizon}")
    if tuple(schedule.industry_codes) != tuple(econ.industry_codes):
        raise ConfigError("schedule and economy industry codes differ")
    if tuple(schedule.fd_categories) != tuple(econ.fd_categories):
        raise ConfigError("schedule and economy final demand categories differ")
    ctx = prepare(econ, params, kind, schedule)
    state = init_steady_state(econ, params)
    records = []
    for _ in range(horizon):
        state, rec = step(state, ctx, schedule)
        records.append(rec)
    return Trajectory(
        industry_codes=econ.industry_codes,
        fd_categories=econ.fd_categories,
        dates=[schedule.calendar.date(t) for t in range(horizon)],
        records=records,
        kind=ctx.kind,
        params=params,
        m=ctx.m,
        xi_lockdown=ctx.xi_lockdown,
        scenario_id=schedule.scenario_id,
    )
