import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from repstack.game import GameInstance, appendix_c_game

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def gameC():
    return appendix_c_game()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def simplex_points(n):
    """Hypothesis strategy for points on the n-simplex (with faces)."""
    return arrays(float, n, elements=st.floats(0, 1)).filter(lambda v: v.sum() > 1e-6).map(lambda v: v / v.sum())


@st.composite
def games(draw, max_dim=4, max_K=3):
    N = draw(st.integers(1, max_dim))
    M = draw(st.integers(1, max_dim))
    K = draw(st.integers(1, max_K))
    seed = draw(st.integers(0, 2**31))
    eta = draw(st.floats(0.1, 10))
    r = np.random.default_rng(seed)
    return GameInstance(r.uniform(0, 3, size=(N, M)), r.normal(size=(K, N, M)), eta)
