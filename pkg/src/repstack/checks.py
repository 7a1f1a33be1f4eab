"""Randomized property suites behind ``repstack check``.

Each suite returns ``(passed, detail)``. Sample sizes are kept small enough
for the whole set to finish in well under a minute.
"""
from __future__ import annotations

import numpy as np

from . import oracle
from .game import (
    GameInstance,
    appendix_c_game,
    best_response,
    quantal_response,
    quantal_response_gradient,
    random_game,
    type_payoffs,
)
from .learner import LearnerConfig, PerturbationSpec
from .lp import lp_solve, vertex_enumeration_max
from .memory import MemoryModel, batch_reputation, new_reputation, theta_curve, theta_finite_exact, update_reputation
from .sim import AdversarySpec, RunConfig, realized_payoffs, regret_curve, replay, run_episode


def _random_instance(rng, N=None, M=None, K=None, eta=None) -> GameInstance:
    N = N or int(rng.integers(2, 6))
    M = M or int(rng.integers(2, 6))
    K = K or int(rng.integers(1, 4))
    eta = eta or float(rng.uniform(0.1, 10))
    return random_game(N, M, K, eta, int(rng.integers(2**31)))


def qr_lipschitz(rng, draws=2000):
    worst = -np.inf
    for _ in range(draws):
        g = _random_instance(rng)
        x, z = rng.dirichlet(np.ones(g.N), size=2)
        k = int(rng.integers(g.K))
        lhs = np.abs(quantal_response(g, k, x) - quantal_response(g, k, z)).sum()
        rhs = 2 * g.eta * g.V_norm1 * np.abs(x - z).max()
        worst = max(worst, lhs - rhs)
    return worst <= 1e-12, f"max violation {worst:.3g}"


def leader_lipschitz(rng, draws=1000):
    worst = -np.inf
    for _ in range(draws):
        g = _random_instance(rng)
        x, z = rng.dirichlet(np.ones(g.N), size=2)
        w = rng.uniform(size=g.K)
        Lu, Lu2 = g.leader_lipschitz(w)
        d = np.abs(x - z).max()
        fx = type_payoffs(g, x[None], "qr")[0] @ w
        fz = type_payoffs(g, z[None], "qr")[0] @ w
        mixed = type_payoffs(g, x[None], "qr", z[None])[0] @ w
        worst = max(worst, abs(fx - fz) - Lu * d, abs(fx - mixed) - Lu2 * d)
    return worst <= 1e-12, f"max violation {worst:.3g}"


def qr_gradient(rng, draws=200, h=1e-6):
    worst = 0.0
    for _ in range(draws):
        g = _random_instance(rng)
        x = rng.dirichlet(np.ones(g.N) * 3)
        k = int(rng.integers(g.K))
        J = quantal_response_gradient(g, k, x)
        eta_s = g.eta * (x @ g.V[k])
        for j in range(g.N):
            e = np.zeros(g.N)
            e[j] = h
            # logit as a function on R^N, evaluated off the simplex
            yp = np.exp(g.eta * ((x + e) @ g.V[k]) - eta_s.max())
            ym = np.exp(g.eta * ((x - e) @ g.V[k]) - eta_s.max())
            fd = (yp / yp.sum() - ym / ym.sum()) / (2 * h)
            worst = max(worst, np.abs(fd - J[:, j]).max() / max(np.abs(J[:, j]).max(), 1e-3))
    return worst <= 1e-5, f"max relative error {worst:.3g}"


def br_bruteforce(rng, draws=500):
    bad = 0
    for _ in range(draws):
        g = _random_instance(rng)
        x = rng.dirichlet(np.ones(g.N))
        k = int(rng.integers(g.K))
        vals = [x @ g.V[k][:, i] for i in range(g.M)]
        bad += best_response(g, k, x)[0] != int(np.argmax(vals))
    return bad == 0, f"{bad} mismatches"


def memory_incremental(rng, H=60):
    worst = 0.0
    for model in (MemoryModel("finite", B=7), MemoryModel("discounted", gamma=0.8),
                  MemoryModel("custom", weights=(1.0, 0.5, 0.25, 2.0))):
        xs = rng.dirichlet(np.ones(3), size=H)
        st = new_reputation(3)
        inc = np.array([update_reputation(st, model, x).z.copy() for x in xs])
        worst = max(worst, np.abs(inc - batch_reputation(model, xs)).max())
    return worst <= 1e-10, f"max deviation {worst:.3g}"


def theta_finite(rng):
    bad = [(B, H) for H in range(1, 120) for B in range(1, H + 1)
           if theta_curve(MemoryModel("finite", B=B), H)[-1] != theta_finite_exact(B, H)]
    return not bad, f"{len(bad)} mismatches"


def lp_vertices(rng, draws=300):
    worst = 0.0
    for _ in range(draws):
        N = int(rng.integers(2, 4))
        hs = [(rng.normal(size=N), 0.3 * rng.normal()) for _ in range(int(rng.integers(0, 5)))]
        c = rng.normal(size=N)
        a, b = lp_solve(c, hs), vertex_enumeration_max(c, hs)
        if a.status != b.status:
            return False, f"status {a.status} vs {b.status}"
        if a.optimal:
            worst = max(worst, abs(a.value - b.value))
    return worst <= 1e-9, f"max value gap {worst:.3g}"


def br_oracle_grid(rng, draws=25):
    worst = -np.inf
    for _ in range(draws):
        g = _random_instance(rng, N=3, M=3, K=int(rng.integers(1, 3)))
        w = rng.uniform(0, 5, size=g.K)
        req = oracle.OracleRequest(g, w, "br", 1e-3)
        res = oracle.br_oracle(req)
        _, gv = oracle.grid_oracle(g, w, "br", 0.02)
        worst = max(worst, gv - res.value - req.epsilon)
        prof = tuple(best_response(g, k, res.x_star)[0] for k in range(g.K))
        if prof != res.profile:
            return False, f"profile {res.profile} but responses {prof}"
    return worst <= 1e-9, f"max shortfall beyond eps {worst:.3g}"


def qr_oracle_grid(rng, draws=10):
    worst = -np.inf
    for _ in range(draws):
        g = _random_instance(rng, N=3, M=3, K=int(rng.integers(1, 3)), eta=float(rng.uniform(0.5, 5)))
        w = rng.uniform(0, 5, size=g.K)
        req = oracle.OracleRequest(g, w, "qr", 1e-3)
        a, b = oracle.qr_oracle(req), oracle.qr_oracle(req)
        if not np.array_equal(a.x_star, b.x_star):
            return False, "non-deterministic result"
        _, gv = oracle.grid_oracle(g, w, "qr", 0.02)
        worst = max(worst, gv - a.value - req.epsilon)
    return worst <= 1e-9, f"max shortfall beyond eps {worst:.3g}"


def perturbation_means(rng, n=200_000):
    worst = 0.0
    for kind in ("uniform", "exponential"):
        spec = PerturbationSpec(kind, 0.37, 5)
        worst = max(worst, abs(spec.draw(rng, n).mean() * spec.nu - 1.0))
    return worst <= 0.01, f"max relative mean error {worst:.3g}"


def episode_consistency(rng):
    g = appendix_c_game()
    cfg = RunConfig(LearnerConfig("ftpl-memory", "qr"), AdversarySpec("stoc"), MemoryModel("finite", B=1), 15)
    ld = run_episode(g, cfg, int(rng.integers(1000)))
    pay = realized_payoffs(g, ld.xs, ld.zs, ld.types, "qr")
    _, memless = replay(g, ld.xs, ld.types, MemoryModel(), "qr")
    ok = (np.array_equal(pay, ld.payoffs) and np.array_equal(memless, ld.payoffs)
          and np.array_equal(regret_curve(ld), ld.benchmark - np.cumsum(ld.payoffs))
          and np.all(np.diff(ld.bound) >= 0))
    return ok, "payoff recomputation, memoryless degeneracy, bound monotonicity"


SUITES = {
    "qr-lipschitz": qr_lipschitz,
    "leader-lipschitz": leader_lipschitz,
    "qr-gradient": qr_gradient,
    "br-bruteforce": br_bruteforce,
    "memory-incremental": memory_incremental,
    "theta-finite": theta_finite,
    "lp-vertices": lp_vertices,
    "br-oracle-grid": br_oracle_grid,
    "qr-oracle-grid": qr_oracle_grid,
    "perturbation-means": perturbation_means,
    "episode-consistency": episode_consistency,
}


def run_all(seed: int = 0, report=print) -> tuple[int, int]:
    passed = failed = 0
    for name, fn in SUITES.items():
        ok, detail = fn(np.random.default_rng([seed, len(name)]))
        report(f"{'PASS' if ok else 'FAIL'}  {name:<22} {detail}")
        passed += bool(ok)
        failed += not ok
    return passed, failed
