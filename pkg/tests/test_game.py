import json
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from repstack.game import (
    GameError,
    GameInstance,
    best_response,
    check_simplex,
    leader_payoff,
    quantal_response,
    quantal_response_gradient,
    random_game,
    response_matrix,
    weighted_objective,
)

from .conftest import games, simplex_points


def identity_game(eta=1.0):
    return GameInstance(np.eye(2), [np.eye(2)], eta)


def test_qr_closed_form_example():
    y = quantal_response(identity_game(), 0, [1.0, 0.0])
    e = np.e
    np.testing.assert_allclose(y, [e / (e + 1), 1 / (e + 1)], rtol=0, atol=1e-12)
    np.testing.assert_allclose(y, [0.731059, 0.268941], atol=1e-6)


def test_qr_identical_columns_is_uniform(rng):
    col = rng.normal(size=(3, 1))
    g = GameInstance(rng.uniform(size=(3, 4)), [np.repeat(col, 4, axis=1)], 3.0)
    np.testing.assert_allclose(quantal_response(g, 0, rng.dirichlet(np.ones(3))), np.full(4, 0.25), atol=1e-15)


def test_qr_vanishing_eta_is_uniform(rng):
    g = GameInstance(rng.uniform(size=(3, 5)), rng.normal(size=(2, 3, 5)) * 100, 1e-12)
    np.testing.assert_allclose(quantal_response(g, 1, rng.dirichlet(np.ones(3))), np.full(5, 0.2), atol=1e-9)


def test_qr_survives_huge_eta():
    g = GameInstance(np.eye(2), [np.eye(2)], 1e6)
    y = quantal_response(g, 0, [0.6, 0.4])
    assert np.all(np.isfinite(y)) and y[0] == pytest.approx(1.0)


@given(games(), st.data())
def test_qr_is_interior_probability(g, data):
    x = data.draw(simplex_points(g.N))
    k = data.draw(st.integers(0, g.K - 1))
    y = quantal_response(g, k, x)
    assert abs(y.sum() - 1) <= 1e-9
    if g.eta * np.ptp(x @ g.V[k]) < 500:
        assert np.all(y > 0)


@given(games(max_dim=5), st.data())
def test_qr_lipschitz(g, data):
    x = data.draw(simplex_points(g.N))
    z = data.draw(simplex_points(g.N))
    for k in range(g.K):
        lhs = np.abs(quantal_response(g, k, x) - quantal_response(g, k, z)).sum()
        assert lhs <= 2 * g.eta * g.V_norm1 * np.abs(x - z).max() + 1e-12


def test_qr_approaches_best_response(rng):
    checked = 0
    while checked < 50:
        g = random_game(3, 4, 1, 1e4, int(rng.integers(1 << 30)))
        x = rng.dirichlet(np.ones(3))
        s = np.sort(x @ g.V[0])
        if s[-1] - s[-2] < 0.1:
            continue
        i, _ = best_response(g, 0, x)
        assert quantal_response(g, 0, x)[i] >= 1 - 1e-3
        checked += 1


def logit(V, eta, x):
    e = np.exp(eta * (x @ V) - np.max(eta * (x @ V)))
    return e / e.sum()


def test_gradient_zero_for_identical_columns(rng):
    g = GameInstance(rng.uniform(size=(3, 3)), [np.repeat(rng.normal(size=(3, 1)), 3, axis=1)], 2.0)
    assert np.abs(quantal_response_gradient(g, 0, rng.dirichlet(np.ones(3)))).max() <= 1e-14


def test_gradient_row_norm_bound():
    g = identity_game()
    x = np.array([0.5, 0.5])
    J = quantal_response_gradient(g, 0, x)
    y = quantal_response(g, 0, x)
    # independent evaluation of eta * y_i * (V_i - V y) with V = I, y = (1/2, 1/2)
    np.testing.assert_allclose(J, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-15)
    assert np.all(np.abs(J).sum(axis=1) <= 2 * g.eta * g.V_norm1 * y + 1e-15)


def test_gradient_matches_central_differences(rng):
    h = 1e-6
    for _ in range(100):
        g = random_game(4, 3, 2, float(rng.uniform(0.1, 5)), int(rng.integers(1 << 30)))
        x = rng.dirichlet(np.full(4, 4.0))
        J = quantal_response_gradient(g, 1, x)
        fd = np.column_stack([(logit(g.V[1], g.eta, x + h * e) - logit(g.V[1], g.eta, x - h * e)) / (2 * h)
                              for e in np.eye(4)])
        assert np.abs(fd - J).max() <= 1e-5 * max(np.abs(J).max(), 1e-3)


def test_best_response_identity_basis():
    g = GameInstance(np.ones((3, 3)), [np.eye(3)], 1.0)
    for j in range(3):
        i, y = best_response(g, 0, np.eye(3)[j])
        assert i == j and y[j] == 1.0


def test_best_response_tie_goes_to_smallest_index():
    V = np.array([[0.0, 2.0, 1.0, 2.0], [0.0, 2.0, 1.0, 2.0]])
    g = GameInstance(np.ones((2, 4)), [V], 1.0)
    assert best_response(g, 0, [0.3, 0.7])[0] == 1


def test_best_response_matches_column_scan(rng):
    for _ in range(300):
        g = random_game(3, 5, 2, 1.0, int(rng.integers(1 << 30)))
        x = rng.dirichlet(np.ones(3))
        k = int(rng.integers(2))
        vals = [sum(x[n] * g.V[k][n, i] for n in range(3)) for i in range(5)]
        assert best_response(g, k, x)[0] == max(range(5), key=lambda i: (vals[i], -i))


def test_response_matrix_single_type(rng):
    g = random_game(3, 4, 1, 2.0, 5)
    x = rng.dirichlet(np.ones(3))
    np.testing.assert_allclose(response_matrix(g, x, "qr")[:, 0], quantal_response(g, 0, x), rtol=0, atol=1e-15)
    np.testing.assert_array_equal(response_matrix(g, x, "br")[:, 0], best_response(g, 0, x)[1])


def test_response_matrix_equal_types_equal_columns(rng):
    V = rng.normal(size=(3, 3))
    g = GameInstance(np.ones((3, 3)), [V, V, V], 1.5)
    Y = response_matrix(g, rng.dirichlet(np.ones(3)), "qr")
    assert np.all(Y == Y[:, :1])


def test_response_matrix_appendix_c_br(gameC, rng):
    negI = -np.eye(3)
    for _ in range(20):
        x = rng.dirichlet(np.ones(3))
        Y = response_matrix(gameC, x, "br")
        assert Y.shape == (3, 6)
        for k, perm in enumerate(permutations(range(3))):
            # action i pays -x[perm[i]]: the follower picks the column hitting the smallest coordinate
            expected = int(np.argmax([negI[:, perm[i]] @ x for i in range(3)]))
            assert Y[:, k].tolist() == np.eye(3)[expected].tolist()
        assert {tuple(c) for c in Y.T} == {tuple(e) for e in np.eye(3)}


def test_leader_payoff_examples(gameC, rng):
    U = rng.uniform(size=(3, 4))
    g = GameInstance(U, [np.zeros((3, 4))], 1.0)
    assert leader_payoff(g, np.eye(3)[2], np.eye(4)[1]) == U[2, 1]
    assert leader_payoff(g, np.full(3, 1 / 3), np.full(4, 0.25)) == pytest.approx(U.sum() / 12, abs=1e-15)
    assert leader_payoff(gameC, [1, 0, 0], [1, 0, 0]) == 3.0


@given(games(), st.data())
def test_leader_payoff_in_range(g, data):
    v = leader_payoff(g, data.draw(simplex_points(g.N)), data.draw(simplex_points(g.M)))
    assert -1e-12 <= v <= g.U_bar + 1e-12


def test_weighted_objective(rng):
    g = random_game(3, 3, 3, 2.0, 9)
    x = rng.dirichlet(np.ones(3))
    assert weighted_objective(g, x, np.zeros(3), "qr") == 0.0
    w = rng.uniform(size=3)
    for mode in ("qr", "br"):
        ys = [quantal_response(g, k, x) if mode == "qr" else best_response(g, k, x)[1] for k in range(3)]
        terms = sum(w[k] * sum(x[i] * g.U[i, j] * ys[k][j] for i in range(3) for j in range(3)) for k in range(3))
        assert weighted_objective(g, x, w, mode) == pytest.approx(terms, abs=1e-12)
        assert weighted_objective(g, x, np.eye(3)[1], mode) == pytest.approx(leader_payoff(g, x, ys[1]), abs=1e-14)


def test_derived_constants(gameC):
    assert gameC.U_bar == 3.0
    assert gameC.U_norm1 == 7.0  # largest column sum of U
    assert gameC.V_norm1 == 1.0
    assert gameC.lipschitz_qr == 4.0
    Lu, Lu2 = gameC.leader_lipschitz(np.ones(6))
    assert (Lu, Lu2) == (5 * 6 * 7, 4 * 7 * 6)


@pytest.mark.parametrize("bad", [
    dict(U=[[-1.0, 0.0]], V=[[[0.0, 0.0]]], eta=1.0),
    dict(U=[[1.0, 0.0]], V=[[[0.0, 0.0, 1.0]]], eta=1.0),
    dict(U=[[1.0, 0.0]], V=[[[0.0, 0.0]]], eta=0.0),
    dict(U=[[1.0, 0.0]], V=[], eta=1.0),
])
def test_invalid_games(bad):
    with pytest.raises(GameError):
        GameInstance(**bad)


def test_input_validation(gameC):
    with pytest.raises(GameError):
        quantal_response(gameC, 6, [1, 0, 0])
    with pytest.raises(GameError):
        quantal_response(gameC, -1, [1, 0, 0])
    with pytest.raises(GameError):
        best_response(gameC, 0, [0.5, 0.6, 0.0])
    with pytest.raises(GameError):
        response_matrix(gameC, [1, 0, 0], "nash")
    np.testing.assert_allclose(check_simplex([0.5, 0.5 + 5e-10]).sum(), 1.0, atol=1e-15)


def test_json_round_trip(tmp_path, gameC):
    p = tmp_path / "g.json"
    gameC.save(p)
    doc = json.loads(p.read_text())
    assert set(doc) == {"U", "V", "eta"}
    g2 = GameInstance.load(p)
    assert np.array_equal(g2.U, gameC.U) and np.array_equal(g2.V, gameC.V) and g2.eta == 2.0
    p.write_text('{"U": [[1, 2]], "V": [[[1, 2, 3]]], "eta": 1}')
    with pytest.raises(GameError):
        GameInstance.load(p)
