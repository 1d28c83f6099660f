"""Model parameters, spin configurations, and Gibbs class weights for the
Ising model on the complete graph with the interaction rescaled by 1/n.

Everything downstream (kernels, spectra, electrical networks, simulation)
consumes the three primitives defined here: single-site update probabilities,
the normalized magnetization, and log-domain class weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SUBCRITICAL = "subcritical"
CRITICAL_WINDOW = "critical-window"
SUPERCRITICAL = "supercritical"


class DomainError(ValueError):
    """An argument is outside an operation's valid domain."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


@dataclass(frozen=True)
class ModelParams:
    """Site count and inverse temperature; delta = |1 - beta| is derived.

    The regime tag compares delta^2 * n against window_threshold and is purely
    descriptive: changing the threshold relabels runs but never changes a
    numeric output.
    """

    n: int
    beta: float
    window_threshold: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "window_threshold", float(self.window_threshold))
        if self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise DomainError(f"beta must be a finite real >= 0, got {self.beta}")
        if self.window_threshold <= 0:
            raise DomainError("window_threshold must be positive")

    @property
    def delta(self) -> float:
        return abs(1.0 - self.beta)

    @property
    def regime(self) -> str:
        if self.delta * self.delta * self.n <= self.window_threshold:
            return CRITICAL_WINDOW
        return SUBCRITICAL if self.beta < 1.0 else SUPERCRITICAL


def update_probabilities(s, beta: float):
    """Heat-bath probabilities (p_plus, p_minus) of writing a +1 (resp. -1)
    spin when the mean spin over the other sites is s.

    p_plus = (1 + tanh(beta*s)) / 2 and p_minus = 1 - p_plus exactly.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > 1.0):
        raise DomainError("mean spin must lie in [-1, 1]")
    p_plus = 0.5 * (1.0 + np.tanh(beta * s_arr))
    p_minus = 1.0 - p_plus
    if np.ndim(s) == 0:
        return float(p_plus), float(p_minus)
    return p_plus, p_minus


@dataclass
class SpinConfiguration:
    """A full +-1 configuration with a cached count of +1 spins."""

    spins: np.ndarray
    plus_count: int

    @classmethod
    def from_spins(cls, spins) -> "SpinConfiguration":
        arr = np.asarray(spins, dtype=np.int8)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainError("need a 1-d configuration with at least 2 sites")
        if not np.all(np.abs(arr) == 1):
            raise DomainError("spins must be +-1")
        return cls(spins=arr.copy(), plus_count=int((arr == 1).sum()))

    @classmethod
    def all_plus(cls, n: int) -> "SpinConfiguration":
        return cls(spins=np.ones(n, dtype=np.int8), plus_count=n)

    @classmethod
    def all_minus(cls, n: int) -> "SpinConfiguration":
        return cls(spins=-np.ones(n, dtype=np.int8), plus_count=0)

    @classmethod
    def with_magnetization(cls, n: int, s: float) -> "SpinConfiguration":
        """Deterministic configuration whose magnetization is nearest to s."""
        k = int(round(n * (1.0 + s) / 2.0))
        k = min(max(k, 0), n)
        spins = -np.ones(n, dtype=np.int8)
        spins[:k] = 1
        return cls(spins=spins, plus_count=k)

    @property
    def n(self) -> int:
        return self.spins.size

    def recount(self) -> int:
        return int((self.spins == 1).sum())

    def set_spin(self, i: int, value: int) -> None:
        old = int(self.spins[i])
        if old != value:
            self.spins[i] = value
            self.plus_count += (value - old) // 2

    def copy(self) -> "SpinConfiguration":
        return SpinConfiguration(spins=self.spins.copy(), plus_count=self.plus_count)


def magnetization(config: SpinConfiguration) -> float:
    """Normalized magnetization (2*plus_count - n) / n, from the cache."""
    return (2 * config.plus_count - config.n) / config.n


@lru_cache(maxsize=8)
def _log_factorials(n: int) -> np.ndarray:
    lf = np.zeros(n + 1)
    if n >= 1:
        lf[1:] = np.cumsum(np.log(np.arange(1, n + 1, dtype=float)))
    lf.setflags(write=False)
    return lf


def gibbs_log_weights(params: ModelParams) -> np.ndarray:
    """Log stationary class weights over k = number of +1 spins, k = 0..n.

    The pairwise spin sum of a configuration with k plus spins equals
    ((2k - n)^2 - n) / 2, so the class weight is
    C(n, k) * exp(beta * (2k - n)^2 / (2n)) up to a constant factor.
    Log-binomials come from accumulated log-factorials; no overflow up to
    n ~ 1e6.
    """
    n = params.n
    lf = _log_factorials(n)
    k = np.arange(n + 1)
    log_binom = lf[n] - lf[k] - lf[n - k]
    m = (2 * k - n).astype(float)
    return log_binom + params.beta * m * m / (2.0 * n)


def gibbs_log_weight(k: int, params: ModelParams) -> float:
    """Single log class weight; raises on out-of-range k."""
    if not 0 <= k <= params.n:
        raise DomainError(f"k must lie in 0..{params.n}, got {k}")
    return float(gibbs_log_weights(params)[k])
