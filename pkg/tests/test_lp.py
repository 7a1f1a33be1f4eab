import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from repstack.lp import LPNumericalError, lp_solve, simplex_max, vertex_enumeration_max


def test_unconstrained_simplex_picks_best_vertex():
    r = lp_solve([1.0, 3.0, 2.0], [])
    assert r.optimal and r.value == pytest.approx(3.0) and np.allclose(r.x, [0, 1, 0])


def test_halfspace_cuts_off_vertex():
    # x1 <= 0.4 written as -x1 >= -0.4
    r = lp_solve([0.0, 1.0], [(np.array([0.0, -1.0]), -0.4)])
    assert r.value == pytest.approx(0.4) and np.allclose(r.x, [0.6, 0.4])


def test_infeasible():
    r = lp_solve([1.0, 1.0], [(np.array([1.0, 0.0]), 0.7), (np.array([0.0, 1.0]), 0.7)])
    assert r.status == "infeasible" and not r.optimal


def test_degenerate_and_redundant_constraints():
    hs = [(np.array([1.0, -1.0, 0.0]), 0.0)] * 3 + [(np.array([1.0, 1.0, 1.0]), 1.0)]
    r = lp_solve([0.0, 1.0, 0.0], hs)
    assert r.optimal and r.value == pytest.approx(0.5)


def test_unbounded_region_is_rejected():
    with pytest.raises(LPNumericalError):
        simplex_max(np.array([1.0, 0.0]), np.zeros((0, 2)), np.zeros(0), np.array([[0.0, 1.0]]), np.array([1.0]))


@given(st.integers(0, 2**31))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 5))
    hs = [(rng.normal(size=N), 0.3 * rng.normal()) for _ in range(int(rng.integers(0, 6)))]
    c = rng.normal(size=N)
    a, b = lp_solve(c, hs), vertex_enumeration_max(c, hs)
    assert a.status == b.status
    if a.optimal:
        assert a.value == pytest.approx(b.value, abs=1e-9)
        assert np.all(a.x >= -1e-9) and a.x.sum() == pytest.approx(1.0)
        assert all(n @ a.x >= o - 1e-8 for n, o in hs)
