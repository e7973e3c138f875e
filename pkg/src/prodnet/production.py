"""Productive capacity and input-constrained output."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .economy import CriticalityMatrix, TechnicalCoefficients
from .errors import ConfigError, CriticalOverdraw, NegativeLabor

# Unconstrained x^inp. Exact under min(); never written to output files.
UNBOUNDED = math.inf

# Technical coefficients below this count as absent inputs.
A_ZERO_TOL = 1e-12
OVERDRAW_TOL = 1e-9


class ProductionFunction(str, Enum):
    LEONTIEF = "leontief"
    IHS1 = "ihs1"
    IHS2 = "ihs2"
    IHS3 = "ihs3"
    LINEAR = "linear"
    CES_LEONTIEF = "ces_leontief"
    CES_IHS13_STRICT = "ces_ihs13_strict"
    CES_IHS13_LOOSE = "ces_ihs13_loose"
    CES_IHS2 = "ces_ihs2"

    @classmethod
    def parse(cls, name: "str | ProductionFunction") -> "ProductionFunction":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown production function {name!r}; choose from {choices}") from None

    @property
    def is_ces_limit(self) -> bool:
        return self.value.startswith("ces_")


MAIN_KINDS = (
    ProductionFunction.LEONTIEF,
    ProductionFunction.IHS1,
    ProductionFunction.IHS2,
    ProductionFunction.IHS3,
    ProductionFunction.LINEAR,
)

CES_COUNTERPARTS = {
    ProductionFunction.IHS1: ProductionFunction.CES_IHS13_STRICT,
    ProductionFunction.IHS3: ProductionFunction.CES_IHS13_LOOSE,
    ProductionFunction.IHS2: ProductionFunction.CES_IHS2,
    ProductionFunction.LEONTIEF: ProductionFunction.CES_LEONTIEF,
}


@dataclass(frozen=True)
class InputState:
    s: np.ndarray
    a: np.ndarray
    criticality: CriticalityMatrix
    xcap0: np.ndarray

    @classmethod
    def from_coefficients(cls, s, tc: TechnicalCoefficients, criticality, xcap0):
        return cls(np.asarray(s, float), tc.a, criticality, np.asarray(xcap0, float))


@dataclass(frozen=True)
class InputSets:
    """Boolean masks (input j, industry i) for one production function."""

    binding: np.ndarray
    half: np.ndarray | None = None
    linear_nc: np.ndarray | None = None
    linear_all: bool = False


def input_sets(kind: ProductionFunction, a: np.ndarray, criticality: CriticalityMatrix) -> InputSets:
    """Masks of which inputs enter each term of the x^inp formula."""
    kind = ProductionFunction.parse(kind)
    present = a > A_ZERO_TOL
    crit = criticality.critical & present
    imp = criticality.important & present
    nonc = criticality.noncritical & present
    if kind in (ProductionFunction.LEONTIEF, ProductionFunction.CES_LEONTIEF):
        return InputSets(binding=present)
    if kind is ProductionFunction.IHS1:
        return InputSets(binding=crit | imp)
    if kind is ProductionFunction.IHS2:
        return InputSets(binding=crit, half=imp)
    if kind is ProductionFunction.IHS3:
        return InputSets(binding=crit)
    if kind is ProductionFunction.LINEAR:
        return InputSets(binding=np.zeros_like(present), linear_all=True)
    if kind is ProductionFunction.CES_IHS13_STRICT:
        return InputSets(binding=crit | imp, linear_nc=nonc)
    if kind is ProductionFunction.CES_IHS13_LOOSE:
        return InputSets(binding=crit, linear_nc=imp | nonc)
    if kind is ProductionFunction.CES_IHS2:
        return InputSets(binding=crit, half=imp, linear_nc=nonc)
    raise ConfigError(f"unhandled production function {kind}")


def capacity(l, l0, x0) -> np.ndarray:
    """Labor-constrained capacity; industries without labor keep x0."""
    l = np.asarray(l, float)
    l0 = np.asarray(l0, float)
    x0 = np.asarray(x0, float)
    if np.any(l < 0):
        raise NegativeLabor(f"negative labor in industries {np.flatnonzero(l < 0).tolist()}")
    has_labor = l0 > 0
    ratio = np.divide(l, l0, out=np.ones_like(l), where=has_labor)
    return ratio * x0


def _min_ratio(s, a, mask):
    ratio = np.divide(s, a, out=np.full(s.shape, UNBOUNDED), where=mask)
    return ratio.min(axis=0)


def _linear_term(s, a, mask):
    a_sum = np.where(mask, a, 0.0).sum(axis=0)
    s_sum = np.where(mask, s, 0.0).sum(axis=0)
    return np.divide(s_sum, a_sum, out=np.full(a_sum.shape, UNBOUNDED), where=a_sum > 0)


def constraint_terms(kind, st: InputState, sets: InputSets | None = None) -> dict[str, np.ndarray]:
    """The separate min-arguments of x^inp, keyed by term name."""
    kind = ProductionFunction.parse(kind)
    if sets is None:
        sets = input_sets(kind, st.a, st.criticality)
    s, a = st.s, st.a
    terms = {}
    if sets.linear_all:
        terms["linear"] = _linear_term(s, a, a > 0)
        return terms
    terms["binding"] = _min_ratio(s, a, sets.binding)
    if sets.half is not None:
        terms["half"] = 0.5 * (_min_ratio(s, a, sets.half) + st.xcap0)
    if sets.linear_nc is not None:
        terms["noncritical"] = _linear_term(s, a, sets.linear_nc)
    return terms


def input_constrained_output(kind, st: InputState, sets: InputSets | None = None) -> np.ndarray:
    """x^inp for every industry; ``UNBOUNDED`` where no input constrains."""
    terms = constraint_terms(kind, st, sets)
    return np.minimum.reduce(list(terms.values()))


def realized_output(d, xcap, xinp) -> np.ndarray:
    return np.maximum(np.minimum(np.minimum(xcap, xinp), d), 0.0)


def input_usage(x, st: InputState, binding: np.ndarray | None = None) -> np.ndarray:
    """Inputs consumed producing ``x``.

    Inputs in ``binding`` (those entering x^inp through a hard minimum) are used
    in full and overdrawing them raises :class:`CriticalOverdraw`. All other
    inputs are used up to the available stock.
    """
    x = np.asarray(x, float)
    need = st.a * x[np.newaxis, :]
    if binding is not None:
        over = binding & (need > st.s + OVERDRAW_TOL * np.maximum(1.0, need))
        if np.any(over):
            j, i = np.argwhere(over)[0]
            raise CriticalOverdraw(int(j), int(i), float(need[j, i]), float(st.s[j, i]))
    return np.minimum(need, st.s)
