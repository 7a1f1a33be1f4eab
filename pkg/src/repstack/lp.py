"""Dense two-phase simplex method with Bland's rule.

Sized for the commitment LPs: a handful of variables and a few dozen rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

PIVOT_TOL = 1e-12
FEAS_TOL = 1e-9
INFEAS_TOL = 1e-7


class LPNumericalError(RuntimeError):
    """The simplex iterations could not certify optimality or infeasibility."""


@dataclass
class LPResult:
    status: str  # "optimal" or "infeasible"
    x: np.ndarray | None = None
    value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, basis: list[int], r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _iterate(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> None:
    """Maximize the objective stored as the last row (reduced costs negated)."""
    m = T.shape[0] - 1
    for _ in range(max_iter):
        obj = T[-1, :ncols]
        entering = np.flatnonzero(obj < -PIVOT_TOL)
        if entering.size == 0:
            return
        c = int(entering[0])
        col = T[:m, c]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise LPNumericalError("LP is unbounded in a bounded feasible region")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        cand = rows[ratios <= best + PIVOT_TOL * (1.0 + abs(best))]
        r = int(min(cand, key=lambda i: basis[i]))
        _pivot(T, basis, r, c)
    raise LPNumericalError(f"simplex did not terminate within {max_iter} pivots")


def simplex_max(c, A_eq=None, b_eq=None, A_ge=None, b_ge=None, max_iter: int | None = None) -> LPResult:
    """maximize c.v  s.t.  A_eq v = b_eq,  A_ge v >= b_ge,  v >= 0."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    A_ge = np.zeros((0, n)) if A_ge is None else np.atleast_2d(np.asarray(A_ge, dtype=float)).reshape(-1, n)
    b_ge = np.zeros(0) if b_ge is None else np.asarray(b_ge, dtype=float).ravel()
    m_eq, m_ge = A_eq.shape[0], A_ge.shape[0]
    m = m_eq + m_ge
    nvar = n + m_ge  # structural + surplus

    A = np.zeros((m, nvar))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ge
    A[m_eq:, n:] = -np.eye(m_ge)
    b = np.concatenate([b_eq, b_ge])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    scale = max(1.0, float(np.abs(b).max(initial=0.0)), float(np.abs(A).max(initial=0.0)))
    if max_iter is None:
        max_iter = 50 * (m + nvar + 10)

    # phase 1: artificial for every row, maximize -sum(artificials)
    T = np.zeros((m + 1, nvar + m + 1))
    T[:m, :nvar] = A
    T[:m, nvar : nvar + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :nvar] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(nvar, nvar + m))
    _iterate(T, basis, nvar + m, max_iter)
    residual = -T[-1, -1]
    if residual > INFEAS_TOL * scale:
        return LPResult("infeasible")
    if residual > FEAS_TOL * scale:
        raise LPNumericalError(f"phase-1 residual {residual:.3g} is neither clearly zero nor clearly positive")

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= nvar:
            cols = np.flatnonzero(np.abs(T[r, :nvar]) > 1e-9)
            if cols.size == 0:
                continue
            _pivot(T, basis, r, int(cols[0]))
        keep.append(r)
    T2 = np.zeros((len(keep) + 1, nvar + 1))
    T2[:-1, :nvar] = T[keep, :nvar]
    T2[:-1, -1] = T[keep, -1]
    basis = [basis[r] for r in keep]

    # phase 2
    cost = np.zeros(nvar)
    cost[:n] = c
    T2[-1, :nvar] = -cost
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            T2[-1] += cost[j] * T2[r]
    _iterate(T2, basis, nvar, max_iter)
    v = np.zeros(nvar)
    for r, j in enumerate(basis):
        v[j] = T2[r, -1]
    x = np.clip(v[:n], 0.0, None)
    return LPResult("optimal", x, float(c @ x))


def lp_solve(objective, halfspaces=()) -> LPResult:
    """Maximize <objective, x> over the simplex cut by <normal, x> >= offset halfspaces.

    On success ``x`` is a vertex of the feasible polytope.
    """
    objective = np.asarray(objective, dtype=float)
    N = objective.shape[0]
    if halfspaces:
        normals = np.array([h[0] for h in halfspaces], dtype=float).reshape(-1, N)
        offsets = np.array([h[1] for h in halfspaces], dtype=float)
    else:
        normals, offsets = None, None
    res = simplex_max(objective, np.ones((1, N)), [1.0], normals, offsets)
    if res.optimal:
        res.x = res.x / res.x.sum()
        res.value = float(objective @ res.x)
    return res


def vertex_enumeration_max(objective, halfspaces=()) -> LPResult:
    """Brute-force LP reference: evaluate every basic feasible point of the same problem."""
    objective = np.asarray(objective, dtype=float)
    N = objective.shape[0]
    rows = [(np.eye(N)[i], 0.0) for i in range(N)] + [(np.asarray(a, float), float(b)) for a, b in halfspaces]
    best = None
    for subset in combinations(range(len(rows)), N - 1):
        A = np.vstack([np.ones(N)] + [rows[i][0] for i in subset])
        rhs = np.array([1.0] + [rows[i][1] for i in subset])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, rhs)
        if all(a @ x >= b - 1e-9 for a, b in rows):
            val = float(objective @ x)
            if best is None or val > best.value:
                best = LPResult("optimal", x, val)
    return best or LPResult("infeasible")
