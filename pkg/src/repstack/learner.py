"""Follow-The-Perturbed-Leader learners for the repeated game.

``ftpl-memoryless`` perturbs the cumulative type counts with a uniform box
vector and calls the oracle on the weights G + sigma. ``ftpl-memory`` keeps
the weights at G and adds an exponential linear tilt <sigma, x>. In both the
perturbation is drawn once and held for the whole horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .game import GameInstance, check_mode

ALGORITHMS = ("ftpl-memoryless", "ftpl-memory")


def nu_memoryless(K: int, H: int) -> float:
    """sqrt(K / H)."""
    if K < 1 or H < 1:
        raise ValueError("K and H must be positive")
    return math.sqrt(K / H)


def nu_memory(game: GameInstance, H: int, theta: float) -> float:
    """1 / (||U||_1 (1 + L) sqrt(50 N (theta + H))).

    ``theta`` may be any upper bound on the memory drag of the follower model.
    """
    if theta < 0 or H < 1:
        raise ValueError("theta must be nonnegative and H positive")
    L = game.lipschitz_qr
    return 1.0 / (game.U_norm1 * (1.0 + L) * math.sqrt(50.0 * game.N * (theta + H)))


@dataclass(frozen=True)
class PerturbationSpec:
    kind: str  # "uniform": U[0, 2/nu]^dim, "exponential": Exp(rate nu)^dim
    nu: float
    dim: int

    def __post_init__(self):
        if self.kind not in ("uniform", "exponential"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if not self.nu > 0 or self.dim < 1:
            raise ValueError("nu must be positive and dim at least 1")

    @property
    def mean(self) -> float:
        return 1.0 / self.nu

    def draw(self, rng: np.random.Generator, size=None) -> np.ndarray:
        shape = (self.dim,) if size is None else (size, self.dim)
        if self.kind == "uniform":
            return rng.uniform(0.0, 2.0 / self.nu, size=shape)
        return rng.exponential(1.0 / self.nu, size=shape)


@dataclass
class LearnerConfig:
    algorithm: str = "ftpl-memoryless"
    response: str = "br"
    epsilon: float | None = None  # default 1/sqrt(H)
    nu: float | None = None  # default from the regret-optimal schedule

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        check_mode(self.response)
        if self.algorithm == "ftpl-memory" and self.response != "qr":
            raise ValueError("ftpl-memory is defined for quantal-responding followers only")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.nu is not None and not self.nu > 0:
            raise ValueError("nu must be positive")

    @property
    def with_memory(self) -> bool:
        return self.algorithm == "ftpl-memory"

    def resolve_epsilon(self, H: int) -> float:
        return self.epsilon if self.epsilon is not None else 1.0 / math.sqrt(H)

    def resolve_nu(self, game: GameInstance, H: int, theta: float = 0.0) -> float:
        if self.nu is not None:
            return self.nu
        if self.with_memory:
            return nu_memory(game, H, theta)
        return nu_memoryless(game.K, H)

    def perturbation(self, game: GameInstance, H: int, theta: float = 0.0) -> PerturbationSpec:
        nu = self.resolve_nu(game, H, theta)
        if self.with_memory:
            return PerturbationSpec("exponential", nu, game.N)
        return PerturbationSpec("uniform", nu, game.K)


@dataclass
class LearnerState:
    game: GameInstance
    sigma: np.ndarray
    epsilon: float
    mode: str
    with_memory: bool
    G: np.ndarray = field(default=None)
    t: int = 1  # index of the next round to play

    def __post_init__(self):
        if self.G is None:
            self.G = np.zeros(self.game.K)


def new_learner(game: GameInstance, config: LearnerConfig, H: int, rng: np.random.Generator,
                theta: float = 0.0) -> LearnerState:
    spec = config.perturbation(game, H, theta)
    return LearnerState(game, spec.draw(rng), config.resolve_epsilon(H), config.response, config.with_memory)


def commitment_request(state: LearnerState) -> oracle.OracleRequest:
    if state.with_memory:
        return oracle.OracleRequest(state.game, state.G.copy(), state.mode, state.epsilon, tilt=state.sigma)
    return oracle.OracleRequest(state.game, state.G + state.sigma, state.mode, state.epsilon)


def next_commitment(state: LearnerState, solve=oracle.solve) -> np.ndarray:
    """One oracle call on the perturbed cumulative objective."""
    return solve(commitment_request(state)).x_star


def observe(state: LearnerState, k: int) -> LearnerState:
    """Record a type-``k`` follower: G <- G + e_k."""
    k = state.game.check_type(k)
    state.G[k] += 1.0
    state.t += 1
    return state
