"""Experiment harness: adversaries, the round loop, regret accounting and batches."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle
from .game import GameInstance, type_payoffs
from .learner import LearnerConfig, new_learner, next_commitment, observe
from .memory import MemoryModel, new_reputation, theta_curve, theta_H, update_reputation

LEARNER_STREAM = 0
ADVERSARY_STREAM = 1


class EpisodeError(RuntimeError):
    pass


@dataclass(frozen=True)
class AdversarySpec:
    """Oblivious follower-type sequence: ``stoc``, ``cyc`` (period L) or ``fixed``.

    Types are 0-indexed. ``cyc`` plays type (t // L) mod K at round t = 1..H.
    """

    kind: str = "stoc"
    L: int = 5
    sequence: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("stoc", "cyc", "fixed"):
            raise ValueError(f"unknown adversary {self.kind!r}")
        if self.kind == "cyc" and (not isinstance(self.L, int) or self.L < 1):
            raise ValueError("cyclic adversary needs a positive integer period")
        if self.kind == "fixed" and not self.sequence:
            raise ValueError("fixed adversary needs a non-empty sequence")

    @classmethod
    def parse(cls, text: str) -> "AdversarySpec":
        """``stoc``, ``cyc:L`` or ``fixed:k1,k2,...``."""
        head, _, arg = text.strip().partition(":")
        try:
            if head == "stoc" and not arg:
                return cls("stoc")
            if head == "cyc":
                return cls("cyc", L=int(arg) if arg else 5)
            if head == "fixed":
                return cls("fixed", sequence=tuple(int(k) for k in arg.split(",")))
        except ValueError as exc:
            raise ValueError(f"bad adversary spec {text!r}: {exc}") from exc
        raise ValueError(f"bad adversary spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "cyc":
            return f"cyc:{self.L}"
        if self.kind == "fixed":
            return "fixed:" + ",".join(map(str, self.sequence))
        return "stoc"

    def types(self, K: int, H: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "stoc":
            return rng.integers(0, K, size=H)
        if self.kind == "cyc":
            t = np.arange(1, H + 1)
            return (t // self.L) % K
        if len(self.sequence) < H:
            raise ValueError(f"fixed sequence has {len(self.sequence)} entries, horizon is {H}")
        seq = np.array(self.sequence[:H])
        if seq.min() < 0 or seq.max() >= K:
            raise ValueError(f"fixed sequence types must lie in [0, {K})")
        return seq


@dataclass
class RunConfig:
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    memory: MemoryModel = field(default_factory=MemoryModel)
    H: int = 200
    theta: float | None = None  # upper bound used in the nu schedule; default theta_H

    def __post_init__(self):
        if not isinstance(self.H, int) or self.H < 1:
            raise ValueError("horizon must be a positive integer")
        if not self.memory.is_memoryless and not self.learner.with_memory:
            raise ValueError("followers with memory require the ftpl-memory learner")
        if self.theta is not None and self.theta < 0:
            raise ValueError("theta must be nonnegative")

    @property
    def mode(self) -> str:
        return self.learner.response

    @property
    def epsilon(self) -> float:
        return self.learner.resolve_epsilon(self.H)

    def resolved_theta(self) -> float:
        if self.theta is not None:
            return self.theta
        return 0.0 if self.memory.is_memoryless else theta_H(self.memory, self.H)

    def resolved_nu(self, game: GameInstance) -> float:
        return self.learner.resolve_nu(game, self.H, self.resolved_theta())


@dataclass
class RunLedger:
    seed: int
    xs: np.ndarray  # (H, N) commitments
    zs: np.ndarray  # (H, N) reputations the followers responded to
    types: np.ndarray  # (H,) follower types
    payoffs: np.ndarray  # (H,) realized leader payoffs
    benchmark: np.ndarray  # (H,) best static value against the prefix G^t
    bound: np.ndarray  # (H,) regret bound at horizon t

    @property
    def H(self) -> int:
        return len(self.payoffs)

    @property
    def regret(self) -> np.ndarray:
        return regret_curve(self)


def realized_payoffs(game: GameInstance, xs, zs, types, mode: str) -> np.ndarray:
    """x^t U y^{g^t}(z^t) for every round."""
    xs = np.asarray(xs, dtype=float)
    zs = np.asarray(zs, dtype=float)
    pay = type_payoffs(game, xs, mode, zs)
    return pay[np.arange(len(xs)), np.asarray(types)]


def replay(game: GameInstance, xs, types, memory: MemoryModel, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Reputations and payoffs of a fixed commitment sequence under ``memory``."""
    rep = new_reputation(game.N)
    zs = np.empty_like(np.asarray(xs, dtype=float))
    for t, x in enumerate(xs):
        zs[t] = update_reputation(rep, memory, x).z
    return zs, realized_payoffs(game, xs, zs, types, mode)


def best_in_hindsight(game: GameInstance, G, mode: str, epsilon: float | None = None) -> tuple[np.ndarray, float]:
    """Best static commitment against the type counts ``G``.

    The oracle tolerance defaults to 1e-4 * U_bar * sum(G).
    """
    G = np.asarray(G, dtype=float)
    total = float(G.sum())
    if total == 0.0:
        return np.full(game.N, 1.0 / game.N), 0.0
    eps = epsilon if epsilon is not None else 1e-4 * game.U_bar * total
    res = oracle.solve(oracle.OracleRequest(game, G, mode, eps))
    return res.x_star, res.value


def regret_curve(ledger: RunLedger) -> np.ndarray:
    """Prefix regret: benchmark on G^t minus payoff collected up to t."""
    return ledger.benchmark - np.cumsum(ledger.payoffs)


def bound_curve(game: GameInstance, cfg: RunConfig, t) -> np.ndarray:
    """Expected-regret bound of the configured learner evaluated at horizon(s) ``t``.

    Memoryless learner: 2 U_bar sqrt(K t) + eps (t + 1).
    Learner with memory: 10 N ||U||_1 (1 + L) sqrt(2 N (t + Theta_t)) + eps (13 t + 1).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    eps = cfg.epsilon
    if not cfg.learner.with_memory:
        return 2.0 * game.U_bar * np.sqrt(game.K * t) + eps * (t + 1.0)
    ti = t.astype(int)
    curve = theta_curve(cfg.memory, max(int(ti.max()), 1))
    theta = np.where(ti >= 1, curve[np.maximum(ti, 1) - 1], 0.0)
    N, L = game.N, game.lipschitz_qr
    return 10.0 * N * game.U_norm1 * (1.0 + L) * np.sqrt(2.0 * N * (t + theta)) + eps * (13.0 * t + 1.0)


def _prefix_benchmarks(game: GameInstance, types: np.ndarray, mode: str, cache: dict) -> np.ndarray:
    G = np.zeros(game.K)
    out = np.empty(len(types))
    for t, k in enumerate(types):
        G[k] += 1.0
        key = (mode, G.tobytes())
        if key not in cache:
            cache[key] = best_in_hindsight(game, G, mode)[1]
        out[t] = cache[key]
    return out


def run_episode(game: GameInstance, cfg: RunConfig, seed: int = 0, bench_cache: dict | None = None,
                types: np.ndarray | None = None) -> RunLedger:
    """Play H rounds of the configured learner against the adversary.

    ``types`` overrides the adversary's sequence.
    """
    learner_rng = np.random.default_rng([seed, LEARNER_STREAM])
    adv_rng = np.random.default_rng([seed, ADVERSARY_STREAM])
    H, N = cfg.H, game.N
    if types is None:
        types = cfg.adversary.types(game.K, H, adv_rng)
    types = np.asarray(types, dtype=int)
    state = new_learner(game, cfg.learner, H, learner_rng, cfg.resolved_theta())
    rep = new_reputation(N)
    xs = np.empty((H, N))
    zs = np.empty((H, N))
    for t in range(H):
        try:
            x = next_commitment(state)
        except (oracle.OracleError, ArithmeticError, RuntimeError) as exc:
            raise EpisodeError(f"round {t + 1}: {exc}") from exc
        xs[t] = x
        zs[t] = update_reputation(rep, cfg.memory, x).z
        observe(state, int(types[t]))
    payoffs = realized_payoffs(game, xs, zs, types, cfg.mode)
    cache = {} if bench_cache is None else bench_cache
    bench = _prefix_benchmarks(game, types, cfg.mode, cache)
    bound = bound_curve(game, cfg, np.arange(1, H + 1))
    return RunLedger(seed, xs, zs, types, payoffs, bench, bound)


@dataclass
class BatchResult:
    seeds: list[int]
    ledgers: list[RunLedger]
    mean_regret: np.ndarray
    std_regret: np.ndarray
    bound: np.ndarray

    @property
    def S(self) -> int:
        return len(self.ledgers)


def aggregate(ledgers: list[RunLedger]) -> BatchResult:
    R = np.array([regret_curve(ld) for ld in ledgers])
    std = R.std(axis=0, ddof=1) if len(ledgers) > 1 else np.zeros(R.shape[1])
    return BatchResult([ld.seed for ld in ledgers], ledgers, R.mean(axis=0), std, ledgers[0].bound.copy())


def _episode_task(args):
    game, cfg, seed = args
    return run_episode(game, cfg, seed)


def run_batch(game: GameInstance, cfg: RunConfig, S: int, base_seed: int = 0, threads: int = 1,
              progress=None) -> BatchResult:
    """S independent episodes; run r uses seed base_seed + r."""
    if S < 1:
        raise ValueError("need at least one iteration")
    seeds = [base_seed + r for r in range(S)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            ledgers = list(pool.map(_episode_task, [(game, cfg, s) for s in seeds]))
    else:
        cache: dict = {}
        ledgers = []
        for s in seeds:
            ledgers.append(run_episode(game, cfg, s, cache))
            if progress is not None:
                progress(len(ledgers), S)
    return aggregate(ledgers)


def stability_diagnostic(ledgers: list[RunLedger], h: int = 1) -> float:
    """Average ||x^{t+h} - x^t||_1 over rounds and runs."""
    diffs = [np.abs(ld.xs[h:] - ld.xs[:-h]).sum(axis=1).mean() for ld in ledgers if ld.H > h]
    return float(np.mean(diffs)) if diffs else math.nan


# ---------------------------------------------------------------------------
# artifacts


def _fmt(v: float) -> str:
    return repr(float(v))


def write_batch_csv(path, batch: BatchResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "mean_regret", "std_regret", "bound"])
        for t in range(len(batch.mean_regret)):
            w.writerow([t + 1, _fmt(batch.mean_regret[t]), _fmt(batch.std_regret[t]), _fmt(batch.bound[t])])


def write_run_csv(path, ledger: RunLedger) -> None:
    N = ledger.xs.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{i}" for i in range(N)] + [f"z{i}" for i in range(N)] + ["g", "payoff"])
        for t in range(ledger.H):
            w.writerow([t + 1] + [_fmt(v) for v in ledger.xs[t]] + [_fmt(v) for v in ledger.zs[t]]
                       + [int(ledger.types[t]), _fmt(ledger.payoffs[t])])


def read_run_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(xs, zs, types, payoffs) from a per-run CSV."""
    rows = list(csv.reader(open(path)))
    head, body = rows[0], np.array(rows[1:], dtype=float)
    N = sum(1 for h in head if h.startswith("x"))
    return body[:, 1 : 1 + N], body[:, 1 + N : 1 + 2 * N], body[:, -2].astype(int), body[:, -1]


def plot_svg(path, batch: BatchResult, title: str = "") -> None:
    """Mean prefix regret with a one-sigma band against the bound curve."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = np.arange(1, len(batch.mean_regret) + 1)
    with matplotlib.rc_context({"svg.hashsalt": "repstack", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(t, batch.mean_regret, label=f"mean prefix regret (S={batch.S})")
        ax.fill_between(t, batch.mean_regret - batch.std_regret, batch.mean_regret + batch.std_regret, alpha=0.3)
        ax.plot(t, batch.bound, "--", label="regret bound")
        ax.set_xlabel("t")
        ax.set_ylabel("regret")
        ax.set_yscale("symlog", linthresh=1.0)
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_outputs(out_dir, name: str, batch: BatchResult, per_run: bool = True) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{name}.csv", out / f"{name}.svg"]
    write_batch_csv(paths[0], batch)
    plot_svg(paths[1], batch, name)
    if per_run:
        run_dir = out / f"{name}_runs"
        run_dir.mkdir(exist_ok=True)
        for ld in batch.ledgers:
            p = run_dir / f"run_{ld.seed}.csv"
            write_run_csv(p, ld)
            paths.append(p)
    return paths
