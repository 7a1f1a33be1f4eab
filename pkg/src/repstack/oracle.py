"""Approximate commitment oracles.

Both oracles maximize

    F(x) = sum_k w_k x^T U y^k(x) + <tilt, x>    over the N-simplex.

Best-responding followers: enumerate follower action profiles, solve one LP
per profile over its best-response polytope, then pull the winner into the
polytope interior so every follower's response is unique.

Quantal-responding followers: deterministic multistart projected gradient
ascent seeded from a simplicial grid.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .game import GameInstance, _argmax_first, _softmax_rows, check_mode, check_weights, type_payoffs
from .lp import simplex_max

PROFILE_CAP = 10**6
INTERIOR_TOL = 1e-9
CONST_TOL = 1e-12
QR_RESOLUTION = 1 / 20
QR_MAX_ITER = 500
QR_STEP_TOL = 1e-8
QR_MAX_N = 8


class OracleError(RuntimeError):
    pass


class ProfileCapError(OracleError):
    pass


@dataclass
class OracleRequest:
    game: GameInstance
    weights: np.ndarray
    mode: str
    epsilon: float
    tilt: np.ndarray | None = None

    def __post_init__(self):
        check_mode(self.mode)
        self.weights = check_weights(self.weights, self.game.K)
        if self.tilt is not None:
            self.tilt = np.asarray(self.tilt, dtype=float)
            if self.tilt.shape != (self.game.N,) or not np.all(np.isfinite(self.tilt)):
                raise ValueError(f"tilt must be a finite vector of length {self.game.N}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def tilt_vec(self) -> np.ndarray:
        return np.zeros(self.game.N) if self.tilt is None else self.tilt


@dataclass
class OracleResult:
    x_star: np.ndarray
    value: float
    certificate: str  # "enumeration-complete" | "search-budget-exhausted"
    profile: tuple[int, ...] | None = None


def objective_values(game: GameInstance, X, weights, mode: str, tilt=None) -> np.ndarray:
    """F at every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    vals = type_payoffs(game, X, mode) @ np.asarray(weights, dtype=float)
    if tilt is not None:
        vals = vals + X @ np.asarray(tilt, dtype=float)
    return vals


def evaluate(req: OracleRequest, x) -> float:
    return float(objective_values(req.game, x, req.weights, req.mode, req.tilt)[0])


# ---------------------------------------------------------------------------
# best-response polytopes


@dataclass
class Profile:
    actions: tuple[int, ...]
    normals: np.ndarray  # rows d with <d, x> >= 0, unit centered norm
    center: np.ndarray  # a point with every kept constraint strictly slack
    margin: float
    canonical: bool  # no type picks an action permanently tied with a lower index


@dataclass
class FeasibleProfiles:
    profiles: list[Profile] = field(default_factory=list)

    @property
    def actions(self) -> set[tuple[int, ...]]:
        return {p.actions for p in self.profiles}

    def __len__(self) -> int:
        return len(self.profiles)


_feasible_cache: "weakref.WeakKeyDictionary[GameInstance, tuple[int, FeasibleProfiles]]" = weakref.WeakKeyDictionary()


def _action_constraints(Vk: np.ndarray, i: int):
    """Constraints making action i a best response, or None if it never can be.

    Returns (rows, tied_lower): the non-trivial normalized rows and whether a
    lower-indexed action is tied with i at every leader strategy.
    """
    rows = []
    tied_lower = False
    for j in range(Vk.shape[1]):
        if j == i:
            continue
        d = Vk[:, i] - Vk[:, j]
        centered = d - d.mean()
        scale = max(1.0, float(np.abs(d).max()))
        if np.abs(centered).max() <= CONST_TOL * scale:
            # <d, x> is the same constant everywhere on the simplex
            c = float(d.mean())
            if c < -CONST_TOL * scale:
                return None
            if c <= CONST_TOL * scale and j < i:
                tied_lower = True
            continue
        rows.append(d / np.linalg.norm(centered))
    return rows, tied_lower


def _interior(normals: np.ndarray, N: int) -> tuple[float, np.ndarray]:
    """Largest common slack s and the point attaining it (s capped at 1)."""
    if normals.shape[0] == 0:
        return 1.0, np.full(N, 1.0 / N)
    m = normals.shape[0]
    c = np.zeros(N + 1)
    c[-1] = 1.0
    A_eq = np.zeros((1, N + 1))
    A_eq[0, :N] = 1.0
    A_ge = np.zeros((m + 1, N + 1))
    A_ge[:m, :N] = normals
    A_ge[:m, -1] = -1.0
    A_ge[m, -1] = -1.0
    b_ge = np.zeros(m + 1)
    b_ge[m] = -1.0
    res = simplex_max(c, A_eq, [1.0], A_ge, b_ge)
    if not res.optimal:
        return -1.0, np.full(N, 1.0 / N)
    x = res.x[:N]
    return float(res.x[-1]), x / x.sum()


def precompute_feasible_profiles(game: GameInstance, cap: int = PROFILE_CAP) -> FeasibleProfiles:
    """Action profiles whose best-response polytope has a nonempty interior.

    Permanent ties (two actions with equal payoff at every leader strategy)
    do not count against the interior. Depends only on ``V``; cached per game.
    """
    if game.M**game.K > cap:
        raise ProfileCapError(f"M^K = {game.M}^{game.K} exceeds the profile cap {cap}")
    hit = _feasible_cache.get(game)
    if hit is not None and hit[0] == cap:
        return hit[1]

    per_type = []
    for k in range(game.K):
        opts = []
        for i in range(game.M):
            cons = _action_constraints(game.V[k], i)
            if cons is not None:
                opts.append((i, cons[0], cons[1]))
        per_type.append(opts)

    out = FeasibleProfiles()
    N = game.N

    def extend(k, actions, rows, canonical):
        normals = np.array(rows).reshape(-1, N)
        margin, center = _interior(normals, N)
        if margin <= INTERIOR_TOL:
            return
        if k == game.K:
            out.profiles.append(Profile(tuple(actions), normals, center, margin, canonical))
            return
        for i, new_rows, tied_lower in per_type[k]:
            extend(k + 1, actions + [i], rows + new_rows, canonical and not tied_lower)

    extend(0, [], [], True)
    _feasible_cache[game] = (cap, out)
    return out


def br_oracle(req: OracleRequest, cap: int = PROFILE_CAP) -> OracleResult:
    """epsilon-optimal commitment against best-responding followers."""
    if req.mode != "br":
        raise ValueError("br_oracle needs mode='br'")
    game = req.game
    w = req.weights
    tilt = req.tilt_vec
    N = game.N
    feasible = precompute_feasible_profiles(game, cap)
    A_eq = np.ones((1, N))

    best_val, best_x, best_p = -math.inf, None, None
    for prof in feasible.profiles:
        if not prof.canonical:
            continue
        coef = game.U[:, prof.actions] @ w + tilt
        if prof.normals.shape[0]:
            res = simplex_max(coef, A_eq, [1.0], prof.normals, np.zeros(prof.normals.shape[0]))
        else:
            res = simplex_max(coef, A_eq, [1.0])
        if not res.optimal:
            continue
        if res.value > best_val:
            best_val, best_x, best_p = res.value, res.x / res.x.sum(), prof
    if best_p is None:
        raise OracleError("no feasible follower profile; best-response polytopes must cover the simplex")

    # interior shift: move at most delta (1-norm) towards the profile's center
    scale = float(np.abs(w).sum()) * game.U_bar + float(np.abs(tilt).max(initial=0.0))
    delta = req.epsilon / scale if scale > 0 else math.inf
    gap = float(np.abs(best_p.center - best_x).sum())
    lam = 1.0 if gap <= delta else delta / gap
    x = best_x + lam * (best_p.center - best_x)
    x = np.clip(x, 0.0, None)
    x /= x.sum()

    scores = np.einsum("n,knm->km", x, game.V)
    got = tuple(int(i) for i in _argmax_first(scores))
    if got != best_p.actions:
        raise OracleError(f"interior shift failed to isolate profile {best_p.actions}, responses {got}")
    value = float(objective_values(game, x, w, "br", req.tilt)[0])
    return OracleResult(x, value, "enumeration-complete", best_p.actions)


# ---------------------------------------------------------------------------
# simplex geometry


@lru_cache(maxsize=32)
def _grid(N: int, n: int) -> np.ndarray:
    pts = []
    for bars in combinations(range(n + N - 1), N - 1):
        edges = (-1,) + bars + (n + N - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(N)])
    g = np.array(pts, dtype=float) / n
    g.setflags(write=False)
    return g


def simplex_grid(N: int, step: float) -> np.ndarray:
    """All points of the simplex with coordinates on multiples of ``step``."""
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step must be 1/n for an integer n, got {step}")
    return _grid(N, n)


def project_simplex(Y: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    Y = np.atleast_2d(Y)
    n = Y.shape[1]
    u = -np.sort(-Y, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ks = np.arange(1, n + 1)
    cond = u - css / ks > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(Y.shape[0]), rho] / (rho + 1)
    return np.maximum(Y - theta[:, None], 0.0)


def _permanent_ties(game: GameInstance) -> np.ndarray:
    """perm[k, i, j]: actions i and j of type k pay the same at every leader strategy."""
    D = game.V[:, :, :, None] - game.V[:, :, None, :]  # (K, N, M, M)
    scale = np.maximum(1.0, np.abs(D).max(axis=1))
    return np.abs(D).max(axis=1) <= CONST_TOL * scale


def untied_mask(game: GameInstance, X: np.ndarray, gap: float = 1e-9) -> np.ndarray:
    """Rows of ``X`` at which every follower type has a unique best response.

    Actions that are tied at every leader strategy are not counted as ties.
    """
    scores = np.einsum("pn,knm->pkm", X, game.V)
    chosen = _argmax_first(scores)
    top = np.take_along_axis(scores, chosen[..., None], axis=-1)
    perm = _permanent_ties(game)  # (K, M, M)
    exempt = np.take_along_axis(perm[None], chosen[..., None, None], axis=2)[:, :, 0, :]
    exempt = exempt | (np.arange(game.M) == chosen[..., None])
    return np.all((top - scores > gap) | exempt, axis=(1, 2))


def grid_oracle(game: GameInstance, weights, mode: str, step: float, tilt=None,
                untied_only: bool = True) -> tuple[np.ndarray, float]:
    """Exact maximization of F over a simplicial grid (reference oracle).

    For best responses the objective is only meaningful where responses are
    unique, so by default grid points with a tied follower are skipped.
    """
    X = simplex_grid(game.N, step)
    if mode == "br" and untied_only:
        X = X[untied_mask(game, X)]
        if len(X) == 0:
            raise OracleError("every grid point has a tied follower; refine the grid")
    vals = objective_values(game, X, weights, mode, tilt)
    i = int(np.argmax(vals))
    return X[i].copy(), float(vals[i])


# ---------------------------------------------------------------------------
# quantal response oracle


def qr_objective_and_grad(game: GameInstance, X: np.ndarray, w: np.ndarray, tilt: np.ndarray):
    """F and its gradient at every row of ``X`` for quantal responses."""
    P, N = X.shape
    K, _, M = game.V.shape
    eta = game.eta
    Vflat = game.V.transpose(1, 0, 2).reshape(N, K * M)
    Y = _softmax_rows(eta * (X @ Vflat).reshape(P, K, M))
    UX = X @ game.U  # (P, M)
    pay = np.einsum("pm,pkm->pk", UX, Y)
    F = pay @ w + X @ tilt
    # d/dx x^T U y^k(x) = U y^k + J_k^T U^T x,  J_k^T u = eta (V^k (y*u) - (V^k y)(y.u))
    wY = Y * w[None, :, None]
    Uy = (wY.sum(axis=1)) @ game.U.T
    VT = game.V.transpose(0, 2, 1).reshape(K * M, N)
    Vyu = (wY * UX[:, None, :]).reshape(P, K * M) @ VT
    Vy_pay = (Y * (w[None, :] * pay)[:, :, None]).reshape(P, K * M) @ VT
    grad = Uy + eta * (Vyu - Vy_pay) + tilt
    return F, grad


def projected_ascent(game, X0, w, tilt, max_iter=QR_MAX_ITER, step_tol=QR_STEP_TOL):
    """Monotone projected gradient ascent from every row of ``X0`` at once.

    Each start keeps its own step size: doubled after an accepted step,
    quartered after a rejected one. A start stops once its proposed move is
    shorter than ``step_tol`` (inf-norm). Returns (X, F, converged).
    """
    X = np.array(X0, dtype=float)
    F, G = qr_objective_and_grad(game, X, w, tilt)
    alpha = 0.25 / np.maximum(np.abs(G).max(axis=1), 1e-12)
    active = np.ones(len(X), dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        x, g, a = X[idx], G[idx], alpha[idx]
        trial = project_simplex(x + a[:, None] * g)
        move = np.abs(trial - x).max(axis=1)
        done = move < step_tol
        active[idx[done]] = False
        keep = ~done
        idx, trial, x = idx[keep], trial[keep], x[keep]
        if idx.size == 0:
            break
        Ft, Gt = qr_objective_and_grad(game, trial, w, tilt)
        ok = Ft >= F[idx]
        acc = idx[ok]
        X[acc], F[acc], G[acc] = trial[ok], Ft[ok], Gt[ok]
        alpha[acc] *= 2.0
        alpha[idx[~ok]] *= 0.25
    return X, F, ~active


def qr_oracle(req: OracleRequest, resolution: float = QR_RESOLUTION, max_iter: int = QR_MAX_ITER,
              step_tol: float = QR_STEP_TOL, max_N: int = QR_MAX_N) -> OracleResult:
    """Best point of a grid-seeded multistart projected gradient ascent."""
    if req.mode != "qr":
        raise ValueError("qr_oracle needs mode='qr'")
    game = req.game
    if game.N > max_N:
        raise OracleError(f"N = {game.N} exceeds the grid-search cap {max_N}")
    X0 = simplex_grid(game.N, resolution)
    X, F, converged = projected_ascent(game, X0, req.weights, req.tilt_vec, max_iter, step_tol)
    i = int(np.argmax(F))
    x = X[i] / X[i].sum()
    value = evaluate(req, x)
    cert = "enumeration-complete" if converged[i] else "search-budget-exhausted"
    return OracleResult(x, value, cert)


def solve(req: OracleRequest, **kw) -> OracleResult:
    return br_oracle(req, **kw) if req.mode == "br" else qr_oracle(req, **kw)
