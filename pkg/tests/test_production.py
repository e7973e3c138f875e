import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodnet.economy import CriticalityMatrix
from prodnet.errors import ConfigError, CriticalOverdraw, NegativeLabor
from prodnet.production import (
    CES_COUNTERPARTS,
    MAIN_KINDS,
    UNBOUNDED,
    InputState,
    ProductionFunction,
    capacity,
    constraint_terms,
    input_constrained_output,
    input_sets,
    input_usage,
    realized_output,
)

PF = ProductionFunction


def one_industry(s, ratings, xcap0=100.0, a=None):
    """Industry 0 uses inputs 1..k; column 0 holds the interesting stocks."""
    k = len(s)
    n = k + 1
    a_mat = np.zeros((n, n))
    a_mat[1:, 0] = 1.0 if a is None else a
    s_mat = np.zeros((n, n))
    s_mat[1:, 0] = s
    r = np.ones((n, n))
    r[1:, 0] = ratings
    return InputState(s_mat, a_mat, CriticalityMatrix(r), np.full(n, xcap0))


def test_parse():
    assert PF.parse("IHS2") is PF.IHS2
    assert PF.parse(PF.LINEAR) is PF.LINEAR
    with pytest.raises(ConfigError):
        PF.parse("cobb_douglas")


def test_leontief_and_linear_reference():
    st_ = one_industry([50.0, 80.0], [1.0, 0.0])
    assert input_constrained_output(PF.LEONTIEF, st_)[0] == 50.0
    assert input_constrained_output(PF.LINEAR, st_)[0] == 65.0


def test_important_input_depleted():
    st_ = one_industry([0.0, 500.0], [0.5, 1.0])
    assert input_constrained_output(PF.IHS2, st_)[0] == 50.0
    assert input_constrained_output(PF.IHS1, st_)[0] == 0.0
    assert input_constrained_output(PF.IHS3, st_)[0] == 500.0


def test_no_inputs_is_unbounded():
    st_ = one_industry([], [])
    for kind in PF:
        assert input_constrained_output(kind, st_)[0] == UNBOUNDED
    # unbounded never survives the outer minimum
    assert realized_output([3.0], [5.0], [UNBOUNDED])[0] == 3.0


def test_noncritical_terms_of_ces_limits():
    st_ = one_industry([100.0, 2.0, 4.0], [1.0, 0.0, 0.0], a=[1.0, 1.0, 1.0])
    terms = constraint_terms(PF.CES_IHS2, st_)
    assert terms["noncritical"][0] == pytest.approx(3.0)
    assert input_constrained_output(PF.CES_IHS2, st_)[0] == pytest.approx(3.0)
    assert input_constrained_output(PF.IHS2, st_)[0] == 100.0


def test_input_sets_shape():
    a = np.array([[0.1, 0.2], [0.0, 0.3]])
    cm = CriticalityMatrix(np.array([[1.0, 0.5], [0.0, 1.0]]))
    sets = input_sets(PF.IHS3, a, cm)
    assert sets.binding.tolist() == [[True, False], [False, True]]
    assert input_sets(PF.LINEAR, a, cm).linear_all


def test_capacity():
    np.testing.assert_allclose(capacity([5.0, 0.0], [10.0, 0.0], [100.0, 7.0]), [50.0, 7.0])
    with pytest.raises(NegativeLabor):
        capacity([-1.0], [1.0], [1.0])


def test_usage_examples():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    cm = CriticalityMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
    st_ = InputState(np.array([[0.0, 3.0], [0.0, 0.0]]), a, cm, np.ones(2))
    assert input_usage([0.0, 5.0], st_)[0, 1] == 3.0
    crit = InputState(np.array([[0.0, 5.0], [0.0, 0.0]]), a, CriticalityMatrix(np.ones((2, 2))), np.ones(2))
    assert input_usage([0.0, 4.0], crit, binding=a > 0)[0, 1] == 4.0
    with pytest.raises(CriticalOverdraw):
        input_usage([0.0, 6.0], crit, binding=a > 0)


def random_state(rng, n):
    a = rng.uniform(0, 0.3, (n, n)) * (rng.uniform(size=(n, n)) < 0.7)
    r = rng.choice([0.0, 0.5, 1.0], size=(n, n))
    np.fill_diagonal(r, 1.0)
    s = a * rng.uniform(0, 50, (n, n))
    return InputState(s, a, CriticalityMatrix(r), rng.uniform(1, 40, n))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_ordering_and_ces_bounds(n, seed):
    st_ = random_state(np.random.default_rng(seed), n)
    out = {k: input_constrained_output(k, st_) for k in PF}
    cap = np.minimum  # the important-input term can exceed the capacity cap
    assert np.all(out[PF.LEONTIEF] <= out[PF.IHS3])
    assert np.all(cap(out[PF.IHS1], st_.xcap0) <= cap(out[PF.IHS2], st_.xcap0) + 1e-12)
    assert np.all(out[PF.IHS2] <= out[PF.IHS3])
    assert np.all(out[PF.LEONTIEF] <= out[PF.LINEAR] * (1 + 1e-12))
    for main, ces in CES_COUNTERPARTS.items():
        assert np.all(out[ces] <= out[main])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_usage_never_exceeds_stock(n, seed):
    rng = np.random.default_rng(seed)
    st_ = random_state(rng, n)
    for kind in MAIN_KINDS:
        xinp = input_constrained_output(kind, st_)
        x = realized_output(rng.uniform(0, 60, n), st_.xcap0, xinp)
        sets = input_sets(kind, st_.a, st_.criticality)
        used = input_usage(x, st_, sets.binding)
        assert np.all(used <= st_.s + 1e-12)
        assert np.all(used >= 0)
