"""Stackelberg game data, follower response models and leader utilities.

Follower types are 0-indexed throughout. A leader strategy ``x`` lives on the
N-simplex, a follower response ``y`` on the M-simplex. Follower behaviour is
either quantal (logit, ``"qr"``) or best response (``"br"``, ties broken
towards the smallest action index).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SIMPLEX_TOL = 1e-9
TIE_TOL = 1e-12
MODES = ("qr", "br")


class GameError(ValueError):
    """Invalid game data or invalid arguments to a game operation."""


def check_simplex(p, dim: int | None = None, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate a probability vector, renormalizing away rounding noise.

    Entries may be negative or the sum off by at most ``tol``; anything
    worse raises :class:`GameError`.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise GameError(f"simplex point must be a vector, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise GameError(f"expected simplex point of length {dim}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise GameError("simplex point has non-finite entries")
    if p.min() < -tol or abs(p.sum() - 1.0) > tol:
        raise GameError(f"not a probability vector (min={p.min():.3g}, sum={p.sum():.12g})")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def check_weights(g, dim: int | None = None) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or (dim is not None and g.shape[0] != dim):
        raise GameError(f"type weights must be a vector of length {dim}")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise GameError("type weights must be finite and nonnegative")
    return g


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise GameError(f"unknown response mode {mode!r}; expected one of {MODES}")
    return mode


def induced_norm1(A: np.ndarray) -> float:
    """Induced 1-norm: the largest absolute column sum."""
    return float(np.abs(A).sum(axis=0).max())


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Leader payoffs ``U`` (N x M), follower payoffs ``V`` (K x N x M), logit rate ``eta``."""

    U: np.ndarray
    V: np.ndarray
    eta: float

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        V = np.array(self.V, dtype=float)
        if U.ndim != 2 or U.size == 0:
            raise GameError("U must be a non-empty 2-d matrix")
        if V.ndim == 2:
            V = V[None]
        if V.ndim != 3 or V.shape[0] < 1 or V.shape[1:] != U.shape:
            raise GameError(f"every V^k must have shape {U.shape}; got V of shape {V.shape}")
        if not (np.all(np.isfinite(U)) and np.all(np.isfinite(V))):
            raise GameError("payoffs must be finite")
        if np.any(U < 0):
            raise GameError("leader payoffs U must be nonnegative")
        eta = float(self.eta)
        if not (eta > 0 and np.isfinite(eta)):
            raise GameError("eta must be a positive finite number")
        U.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "eta", eta)

    @property
    def N(self) -> int:
        return self.U.shape[0]

    @property
    def M(self) -> int:
        return self.U.shape[1]

    @property
    def K(self) -> int:
        return self.V.shape[0]

    @property
    def U_bar(self) -> float:
        return float(np.abs(self.U).max())

    @property
    def U_norm1(self) -> float:
        return induced_norm1(self.U)

    @property
    def V_norm1(self) -> float:
        """max_k of the induced 1-norm of V^k."""
        return max(induced_norm1(Vk) for Vk in self.V)

    @property
    def lipschitz_qr(self) -> float:
        """Lipschitz constant of every quantal response map, 1-norm out / inf-norm in."""
        return 2.0 * self.eta * self.V_norm1

    def leader_lipschitz(self, g) -> tuple[float, float]:
        """Return (L_u, L_u') for the weighted leader utility with weights ``g``."""
        g1 = float(np.abs(np.asarray(g, dtype=float)).sum())
        L = self.lipschitz_qr
        return (1.0 + L) * g1 * self.U_norm1, L * self.U_norm1 * g1

    def check_type(self, k) -> int:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 0 <= k < self.K:
            raise GameError(f"type index must be an integer in [0, {self.K}), got {k!r}")
        return int(k)

    def to_dict(self) -> dict:
        return {"U": self.U.tolist(), "V": self.V.tolist(), "eta": self.eta}

    @classmethod
    def from_dict(cls, d: dict) -> "GameInstance":
        missing = {"U", "V", "eta"} - set(d)
        if missing:
            raise GameError(f"game document missing keys: {sorted(missing)}")
        return cls(U=d["U"], V=d["V"], eta=d["eta"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "GameInstance":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise GameError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise GameError(f"{path}: expected a JSON object")
        return cls.from_dict(doc)


def _softmax_rows(s: np.ndarray) -> np.ndarray:
    s = s - s.max(axis=-1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=-1, keepdims=True)


def quantal_response(game: GameInstance, k: int, x) -> np.ndarray:
    """Logit response of type ``k``: y_i proportional to exp(eta * <V_i^k, x>)."""
    k = game.check_type(k)
    x = check_simplex(x, game.N)
    return _softmax_rows(game.eta * (x @ game.V[k]))


def quantal_response_gradient(game: GameInstance, k: int, x) -> np.ndarray:
    """Jacobian of the logit response, shape (M, N).

    Row i is eta * y_i * (V_i - V y)^T with V_i the i-th column of V^k.
    """
    k = game.check_type(k)
    x = check_simplex(x, game.N)
    Vk = game.V[k]
    y = _softmax_rows(game.eta * (x @ Vk))
    Vy = Vk @ y
    return game.eta * y[:, None] * (Vk.T - Vy[None, :])


def _argmax_first(scores: np.ndarray) -> np.ndarray:
    """Index of the maximum along the last axis, smallest index among near-ties."""
    top = scores.max(axis=-1, keepdims=True)
    tied = scores >= top - TIE_TOL * (1.0 + np.abs(top))
    return tied.argmax(axis=-1)


def best_response(game: GameInstance, k: int, x) -> tuple[int, np.ndarray]:
    """Pure best response of type ``k`` as (action index, basis vector)."""
    k = game.check_type(k)
    x = check_simplex(x, game.N)
    i = int(_argmax_first(x @ game.V[k]))
    y = np.zeros(game.M)
    y[i] = 1.0
    return i, y


def response_matrix(game: GameInstance, x, mode: str) -> np.ndarray:
    """Stack the K type responses column-wise into an M x K matrix."""
    check_mode(mode)
    x = check_simplex(x, game.N)
    return batch_responses(game, x[None], mode)[0].T


def batch_responses(game: GameInstance, X: np.ndarray, mode: str) -> np.ndarray:
    """Responses at many leader strategies at once.

    ``X`` has shape (P, N); the result has shape (P, K, M). No simplex
    validation is done here.
    """
    scores = np.einsum("pn,knm->pkm", X, game.V)
    if mode == "qr":
        return _softmax_rows(game.eta * scores)
    idx = _argmax_first(scores)
    out = np.zeros(scores.shape)
    np.put_along_axis(out, idx[..., None], 1.0, axis=-1)
    return out


def type_payoffs(game: GameInstance, X: np.ndarray, mode: str, Z: np.ndarray | None = None) -> np.ndarray:
    """Leader payoff x^T U y^k(z) for every row of ``X`` and every type.

    Followers respond to ``Z`` (defaults to ``X``). Shape (P, K).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Z = X if Z is None else np.atleast_2d(np.asarray(Z, dtype=float))
    Y = batch_responses(game, Z, mode)
    return np.einsum("pn,nm,pkm->pk", X, game.U, Y)


def leader_payoff(game: GameInstance, x, y) -> float:
    """Bilinear leader payoff x^T U y."""
    x = check_simplex(x, game.N)
    y = check_simplex(y, game.M)
    return float(x @ game.U @ y)


def weighted_objective(game: GameInstance, x, weights, mode: str) -> float:
    """sum_k weights_k * x^T U y^k(x)."""
    check_mode(mode)
    x = check_simplex(x, game.N)
    w = check_weights(weights, game.K)
    return float(type_payoffs(game, x[None], mode)[0] @ w)


def appendix_c_game(eta: float = 2.0) -> GameInstance:
    """The worst-case-leaning instance used in the reported experiments.

    Follower payoffs are the 6 column permutations of -I_3, in lexicographic
    permutation order.
    """
    from itertools import permutations

    U = np.array([[3.0, 2.0, 1.0], [2.0, 3.0, 1.0], [1.0, 2.0, 3.0]])
    negI = -np.eye(3)
    V = np.array([negI[:, list(p)] for p in permutations(range(3))])
    return GameInstance(U, V, eta)


def random_game(N: int, M: int, K: int, eta: float, seed: int) -> GameInstance:
    """U uniform on [0, 1), V^k standard normal."""
    rng = np.random.default_rng(seed)
    return GameInstance(rng.uniform(size=(N, M)), rng.normal(size=(K, N, M)), eta)
