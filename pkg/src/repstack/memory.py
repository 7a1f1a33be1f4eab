"""Follower memory: reputation averaging of past leader commitments.

A memory model is a nonnegative weight sequence a_0, a_1, ... The reputation
after round t is z^t = (1/b_t) * sum_{tau<=t} a_{t-tau} x^tau with
b_t = sum_{tau<=t} a_{t-tau}.
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

CUSTOM_CUTOFF = 1e-15


@dataclass(frozen=True)
class MemoryModel:
    """One of ``memoryless``, ``finite`` (window B), ``discounted`` (gamma) or ``custom``."""

    kind: str = "memoryless"
    B: int | None = None
    gamma: float | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "memoryless":
            return
        if self.kind == "finite":
            if not isinstance(self.B, int) or self.B < 1:
                raise ValueError(f"finite memory needs a positive integer window, got {self.B!r}")
        elif self.kind == "discounted":
            if self.gamma is None or not 0.0 < self.gamma < 1.0:
                raise ValueError(f"discount factor must lie in (0, 1), got {self.gamma!r}")
        elif self.kind == "custom":
            w = tuple(float(a) for a in (self.weights or ()))
            if not w or w[0] <= 0 or any(a < 0 or not math.isfinite(a) for a in w):
                raise ValueError("custom weights need a_0 > 0 and finite nonnegative entries")
            cut = next((s for s, a in enumerate(w) if a < CUSTOM_CUTOFF), len(w))
            if cut < len(w) and any(a > 0 for a in w[cut:]):
                warnings.warn(f"custom memory weights truncated at index {cut} (a_s < {CUSTOM_CUTOFF:g})")
            object.__setattr__(self, "weights", w[:cut])
        else:
            raise ValueError(f"unknown memory kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "MemoryModel":
        """Parse ``none``, ``fm:B``, ``dm:gamma`` or ``custom:a0,a1,...``."""
        text = text.strip()
        head, _, arg = text.partition(":")
        head = head.lower()
        try:
            if head in ("none", "memoryless") and not arg:
                return cls()
            if head == "fm":
                return cls("finite", B=int(arg))
            if head == "dm":
                return cls("discounted", gamma=float(arg))
            if head == "custom":
                return cls("custom", weights=tuple(float(a) for a in arg.split(",")))
        except ValueError as exc:
            raise ValueError(f"bad memory spec {text!r}: {exc}") from exc
        raise ValueError(f"bad memory spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"fm:{self.B}"
        if self.kind == "discounted":
            return f"dm:{self.gamma:g}"
        if self.kind == "custom":
            return "custom:" + ",".join(f"{a:g}" for a in self.weights)
        return "none"

    @property
    def is_memoryless(self) -> bool:
        return self.kind == "memoryless"

    def weight(self, s: int) -> float:
        """a_s. The memoryless model is the window B=1."""
        if self.kind == "memoryless":
            return 1.0 if s == 0 else 0.0
        if self.kind == "finite":
            return 1.0 if s < self.B else 0.0
        if self.kind == "discounted":
            return self.gamma**s
        return self.weights[s] if s < len(self.weights) else 0.0

    def weight_array(self, n: int) -> np.ndarray:
        return np.array([self.weight(s) for s in range(n)])


@dataclass
class ReputationState:
    """Running reputation z^t with the accumulators needed to update it."""

    N: int
    t: int = 0
    z: np.ndarray | None = None
    total: np.ndarray | None = None  # discounted: weighted sum of commitments
    norm: float = 0.0  # discounted: b_t
    history: deque = field(default_factory=deque)


def new_reputation(N: int) -> ReputationState:
    return ReputationState(N=N)


def update_reputation(state: ReputationState, model: MemoryModel, x) -> ReputationState:
    """Fold commitment ``x`` into the reputation. Mutates and returns ``state``."""
    x = np.asarray(x, dtype=float)
    state.t += 1
    if model.kind == "discounted":
        if state.total is None:
            state.total = np.zeros(state.N)
        state.total = model.gamma * state.total + x
        state.norm = model.gamma * state.norm + 1.0
        state.z = state.total / state.norm
    elif model.kind == "memoryless":
        state.z = x.copy()
    else:
        window = model.B if model.kind == "finite" else len(model.weights)
        state.history.appendleft(x)
        while len(state.history) > window:
            state.history.pop()
        a = model.weight_array(len(state.history))
        state.z = (a @ np.array(state.history)) / a.sum()
    return state


def batch_reputation(model: MemoryModel, xs) -> np.ndarray:
    """Reputation after every round straight from the definition. Shape (H, N)."""
    xs = np.asarray(xs, dtype=float)
    H = xs.shape[0]
    a = model.weight_array(H)
    out = np.empty_like(xs)
    for t in range(1, H + 1):
        w = a[t - np.arange(1, t + 1)]  # a_{t-tau}, tau = 1..t
        out[t - 1] = w @ xs[:t] / w.sum()
    return out


def theta_curve(model: MemoryModel, H: int) -> np.ndarray:
    """[theta_1, ..., theta_H] where theta_t = sum_{t'<=t} (1/b_t') sum_tau a_{t'-tau} (t'-tau)."""
    a = model.weight_array(H)
    lags = np.arange(H, dtype=float)
    return np.cumsum(np.cumsum(a * lags) / np.cumsum(a))


def theta_H(model: MemoryModel, H: int) -> float:
    """sum_{t<=H} (1/b_t) sum_{tau<=t} a_{t-tau} (t - tau), summed directly."""
    if H < 1:
        raise ValueError("horizon must be at least 1")
    return float(theta_curve(model, H)[-1])


def theta_finite_closed_form(B: int, H: int) -> float:
    """(B-1)(H-B+2)/4.

    Kept for comparison only: it agrees with :func:`theta_H` just for B = 1
    and for B = H = 2. See :func:`theta_finite_exact`.
    """
    return (B - 1) * (H - B + 2) / 4


def theta_finite_exact(B: int, H: int) -> float:
    """theta_H for a window of B equal weights, 1 <= B <= H: (B-1)(2H-B)/4."""
    return (B - 1) * (2 * H - B) / 4


def theta_discounted_upper(gamma: float, H: int) -> float:
    """Upper bound on theta_H for a_s = gamma^s."""
    g = gamma
    return g / (1 - g) * (H + ((H + 1) * g**H * (1 - g) + 1 - g ** (H + 1)) / (1 - g) ** 2)
