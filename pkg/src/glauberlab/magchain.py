"""The magnetization birth-and-death chain of the single-site heat-bath
dynamics, free and censored, with exact stationary laws, total-variation
curves, mixing times, absorption probabilities and stationary moments.

States are indexed by the number of +1 spins; state k has magnetization
s_k = (2k - n)/n.  The censored variant restricts to s >= 0 (n even) or
s >= 1/n (n odd) by re-routing the single move that would turn the
magnetization negative, which is the exact image chain of flipping all
spins whenever the magnetization drops below zero.

All stationary-law arithmetic is in the log domain; class weights reach
exp(Theta(n)) and would overflow otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .model import (
    ConsistencyError,
    DomainError,
    ModelParams,
    SUBCRITICAL,
    gibbs_log_weights,
)
from .serialize import csv_text, read_csv_columns

FREE = "free"
CENSORED = "censored"

# distribution vectors are renormalized this often to cancel rounding drift
RENORM_EVERY = 1 << 16

DEFAULT_STEP_CAP = 10**9


@dataclass(frozen=True)
class MagChain:
    """Birth-and-death kernel (p up, q down, h hold) over the magnetization.

    k_offset maps chain index j to the spin count k = k_offset + j of the
    underlying configuration class.  Immutable after construction; safe to
    share across tasks.
    """

    params: ModelParams
    kind: str
    k_offset: int
    p: np.ndarray
    q: np.ndarray
    h: np.ndarray
    states: np.ndarray

    @property
    def n_states(self) -> int:
        return self.states.size

    @property
    def ref_index(self) -> int:
        """Index of the state playing the role of zero magnetization.

        For the free chain this is s = 0 (n even) or s = +1/n (n odd); the
        censored chain starts there, at index 0.
        """
        if self.kind == CENSORED:
            return 0
        return (self.params.n + 1) // 2 - self.k_offset

    def state_index(self, s: float) -> int:
        """Index of the chain state nearest to magnetization s (ties go up)."""
        pos = int(np.searchsorted(self.states, s))
        if pos == 0:
            return 0
        if pos >= self.n_states:
            return self.n_states - 1
        below, above = self.states[pos - 1], self.states[pos]
        return pos if (above - s) <= (s - below) else pos - 1

    def top_index(self) -> int:
        return self.n_states - 1


def build_kernel(params: ModelParams) -> MagChain:
    """Exact free-chain kernel, evaluated per state.

    p_k = ((1 - s_k)/2) * p_plus(s_k + 1/n), q_k = ((1 + s_k)/2) *
    p_minus(s_k - 1/n).  The tanh arguments are formed from integer
    numerators so that the spin-flip symmetry p_k = q_{n-k} holds bit-exactly.
    """
    n = params.n
    k = np.arange(n + 1, dtype=float)
    up_arg = params.beta * (2.0 * k + 1.0 - n) / n
    dn_arg = params.beta * (2.0 * k - 1.0 - n) / n
    p = ((n - k) / n) * 0.5 * (1.0 + np.tanh(up_arg))
    q = (k / n) * 0.5 * (1.0 - np.tanh(dn_arg))
    h = 1.0 - p - q
    states = (2.0 * k - n) / n
    for arr in (p, q, h, states):
        arr.setflags(write=False)
    return MagChain(params=params, kind=FREE, k_offset=0, p=p, q=q, h=h, states=states)


def build_censored_kernel(params: ModelParams) -> MagChain:
    """Image chain of the dynamics that flips all spins on negative
    magnetization.

    n even: the 0 -> -2/n move is re-routed to 0 -> +2/n.
    n odd: the 1/n -> -1/n move is folded into holding, since the flip of
    -1/n is +1/n itself.
    """
    free = build_kernel(params)
    n = params.n
    k0 = (n + 1) // 2
    p = free.p[k0:].copy()
    q = free.q[k0:].copy()
    h = free.h[k0:].copy()
    if n % 2 == 0:
        p[0] = free.p[k0] + free.q[k0]
    else:
        h[0] = free.h[k0] + free.q[k0]
    q[0] = 0.0
    states = free.states[k0:].copy()
    for arr in (p, q, h, states):
        arr.setflags(write=False)
    return MagChain(params=params, kind=CENSORED, k_offset=k0, p=p, q=q, h=h, states=states)


# ---------------------------------------------------------------------------
# distributions


@dataclass
class ProbVector:
    """A distribution over chain states, kept in the log domain.

    log_p is normalized (logsumexp == 0 up to rounding); states carries the
    magnetization labels when known.
    """

    log_p: np.ndarray
    states: Optional[np.ndarray] = None

    @classmethod
    def from_log_weights(cls, log_w, states=None) -> "ProbVector":
        log_w = np.asarray(log_w, dtype=float)
        return cls(log_p=log_w - logsumexp(log_w), states=states)

    @classmethod
    def from_probabilities(cls, probs, states=None) -> "ProbVector":
        probs = np.asarray(probs, dtype=float)
        if np.any(probs < 0):
            raise DomainError("probabilities must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls.from_log_weights(np.log(probs), states=states)

    @classmethod
    def point_mass(cls, index: int, size: int, states=None) -> "ProbVector":
        log_w = np.full(size, -np.inf)
        log_w[index] = 0.0
        return cls(log_p=log_w, states=states)

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_p)

    def check(self, tol: float = 1e-12) -> None:
        total = float(self.probabilities.sum())
        if abs(total - 1.0) > tol:
            raise ConsistencyError(f"probabilities sum to {total}, off by {total - 1.0}")

    def to_csv(self, dest=None) -> Optional[str]:
        labels = self.states if self.states is not None else np.arange(self.log_p.size)
        rows = zip((float(x) for x in labels), (float(v) for v in self.probabilities))
        text = csv_text(["state", "value"], rows)
        if dest is None:
            return text
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return None

    @staticmethod
    def read_csv(src) -> tuple[np.ndarray, np.ndarray]:
        cols = read_csv_columns(src)
        return (
            np.array([float(x) for x in cols["state"]]),
            np.array([float(x) for x in cols["value"]]),
        )

    def to_json_dict(self) -> dict:
        labels = self.states if self.states is not None else np.arange(self.log_p.size)
        return {
            "state": [float(x) for x in labels],
            "value": [float(v) for v in self.probabilities],
        }


@dataclass
class TvSeries:
    """Ordered (t, d(t)) pairs of total-variation distance to stationarity."""

    times: np.ndarray
    values: np.ndarray

    def check(self, tol: float = 1e-12) -> None:
        if np.any(np.diff(self.values) > tol):
            raise ConsistencyError("total-variation curve is not non-increasing")
        if np.any(self.values < -tol) or np.any(self.values > 1 + tol):
            raise ConsistencyError("total-variation values outside [0, 1]")

    def crossing(self, eps: float) -> Optional[int]:
        """First recorded time with d(t) <= eps, None if never reached."""
        hit = np.nonzero(self.values <= eps)[0]
        return int(self.times[hit[0]]) if hit.size else None

    def to_csv(self, dest=None) -> Optional[str]:
        rows = zip((int(t) for t in self.times), (float(v) for v in self.values))
        text = csv_text(["t", "value"], rows)
        if dest is None:
            return text
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return None

    @staticmethod
    def read_csv(src) -> tuple[np.ndarray, np.ndarray]:
        cols = read_csv_columns(src)
        return (
            np.array([int(x) for x in cols["t"]]),
            np.array([float(x) for x in cols["value"]]),
        )

    def to_json_dict(self) -> dict:
        return {
            "t": [int(t) for t in self.times],
            "value": [float(v) for v in self.values],
        }


StartSpec = Union[ProbVector, int, np.ndarray]


def _start_distribution(chain: MagChain, start: StartSpec) -> np.ndarray:
    if isinstance(start, ProbVector):
        return start.probabilities.copy()
    if isinstance(start, (int, np.integer)):
        dist = np.zeros(chain.n_states)
        dist[int(start)] = 1.0
        return dist
    dist = np.asarray(start, dtype=float).copy()
    if dist.size != chain.n_states:
        raise DomainError("start distribution has wrong length")
    return dist


class _KernelIterator:
    """Pushes a distribution through the tridiagonal kernel, reusing buffers.

    Optionally zeroes a set of absorbing states after every step, which turns
    the iteration into the sub-stochastic evolution used for hitting tails.
    """

    def __init__(self, chain: MagChain, dist: np.ndarray, absorbing: Optional[np.ndarray] = None):
        self.p, self.q, self.h = chain.p, chain.q, chain.h
        self.dist = dist
        self._buf = np.empty_like(dist)
        self._tmp = np.empty(dist.size - 1)
        self._absorbing = absorbing
        self.t = 0

    def advance(self, steps: int) -> np.ndarray:
        cur, nxt, tmp = self.dist, self._buf, self._tmp
        p, q, h = self.p, self.q, self.h
        absorbing = self._absorbing
        for _ in range(steps):
            np.multiply(cur, h, out=nxt)
            np.multiply(cur[:-1], p[:-1], out=tmp)
            nxt[1:] += tmp
            np.multiply(cur[1:], q[1:], out=tmp)
            nxt[:-1] += tmp
            if absorbing is not None:
                nxt[absorbing] = 0.0
            cur, nxt = nxt, cur
            self.t += 1
            if absorbing is None and self.t % RENORM_EVERY == 0:
                cur /= cur.sum()
        self.dist, self._buf = cur, nxt
        return cur


def _evolve(chain: MagChain, dist: np.ndarray, steps: int) -> np.ndarray:
    """Apply the kernel `steps` times (O(n) per step); returns the new vector."""
    it = _KernelIterator(chain, dist)
    return it.advance(steps) if steps > 0 else dist


def tv_distance(dist: np.ndarray, pi: np.ndarray) -> float:
    """(1/2) * sum |dist - pi| in the linear domain."""
    return 0.5 * float(np.abs(dist - pi).sum())


def tv_curve(
    chain: MagChain,
    start: StartSpec,
    t_max: int,
    record_every: int = 1,
    pi: Optional[ProbVector] = None,
) -> TvSeries:
    """Exact d(t) = TV(law at t, pi) for t = 0, record_every, ..., t_max."""
    if t_max < 0:
        raise DomainError("t_max must be >= 0")
    pi_arr = (pi if pi is not None else stationary(chain)).probabilities
    it = _KernelIterator(chain, _start_distribution(chain, start))
    times = [0]
    values = [tv_distance(it.dist, pi_arr)]
    while it.t < t_max:
        hop = min(record_every, t_max - it.t)
        dist = it.advance(hop)
        times.append(it.t)
        values.append(tv_distance(dist, pi_arr))
    return TvSeries(times=np.array(times), values=np.array(values))


@dataclass
class MixingResult:
    """Smallest t with d(t) <= eps; lower_bound_only marks a cap exhaustion."""

    steps: int
    lower_bound_only: bool = False


def mixing_time(
    chain: MagChain,
    start: StartSpec,
    eps: float,
    cap: int = DEFAULT_STEP_CAP,
    pi: Optional[ProbVector] = None,
) -> MixingResult:
    """min{t : d(t) <= eps} by doubling then bisection on the exact curve.

    Only the distribution at the bracket's low end is cached (a fixed memory
    budget of two state vectors); curve values inside the bracket are
    recomputed by iterating forward from that cache.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if cap < 1:
        raise DomainError("cap must be >= 1")
    pi_arr = (pi if pi is not None else stationary(chain)).probabilities
    it = _KernelIterator(chain, _start_distribution(chain, start))
    if tv_distance(it.dist, pi_arr) <= eps:
        return MixingResult(0)
    t_lo = 0
    dist_lo = it.dist.copy()
    t_hi = 1
    while True:
        dist = it.advance(t_hi - it.t)
        if tv_distance(dist, pi_arr) <= eps:
            break
        if t_hi >= cap:
            return MixingResult(cap, lower_bound_only=True)
        t_lo = t_hi
        dist_lo[:] = dist
        t_hi = min(2 * t_hi, cap)
    while t_hi - t_lo > 1:
        mid = (t_lo + t_hi) // 2
        probe = _evolve(chain, dist_lo.copy(), mid - t_lo)
        if tv_distance(probe, pi_arr) <= eps:
            t_hi = mid
        else:
            t_lo = mid
            dist_lo[:] = probe
    return MixingResult(t_hi)


def tv_crossings(
    chain: MagChain,
    start: StartSpec,
    eps_list: Sequence[float],
    cap: int = DEFAULT_STEP_CAP,
    pi: Optional[ProbVector] = None,
) -> dict[float, Optional[int]]:
    """First crossing times of several thresholds in one forward pass.

    Values agree with mixing_time on the same exact curve; None marks cap
    exhaustion for that threshold.
    """
    pi_arr = (pi if pi is not None else stationary(chain)).probabilities
    it = _KernelIterator(chain, _start_distribution(chain, start))
    pending = sorted(set(float(e) for e in eps_list), reverse=True)
    out: dict[float, Optional[int]] = {}
    d = tv_distance(it.dist, pi_arr)
    while pending and d <= pending[0]:
        out[pending.pop(0)] = it.t
    while pending and it.t < cap:
        d = tv_distance(it.advance(1), pi_arr)
        while pending and d <= pending[0]:
            out[pending.pop(0)] = it.t
    for eps in pending:
        out[eps] = None
    return out


# ---------------------------------------------------------------------------
# stationary law

_LONGDOUBLE_OK = np.finfo(np.longdouble).eps < 1e-18


def _prefix_log_weights(incr: np.ndarray) -> np.ndarray:
    """[0, cumsum(incr)] with the accumulation error pinned near one ulp of
    the running value.

    A plain float64 cumsum drifts by ~sqrt(N) ulps, which is visible against
    the 1e-10 route-agreement gate by N ~ 1e5; extended precision (or Kahan
    where the platform lacks a wider float) removes that drift.
    """
    out = np.empty(incr.size + 1)
    out[0] = 0.0
    if _LONGDOUBLE_OK:
        out[1:] = np.cumsum(incr.astype(np.longdouble)).astype(float)
        return out
    total = 0.0
    comp = 0.0
    for j, x in enumerate(incr):
        y = x - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[j + 1] = total
    return out


def _gibbs_route_log(chain: MagChain) -> np.ndarray:
    """Normalized Gibbs class weights along the chain's states.

    Algebraically this is gibbs_log_weights (folded for the censored chain:
    every state above the reflection boundary also carries the mass of its
    mirror image, except the self-mirrored s = 0 state for n even), but it is
    accumulated through the exactly-cancelled per-edge increments
    log((n - k)/(k + 1)) + 2 beta (2k + 1 - n)/n so that the comparison with
    the detailed-balance route is not polluted by log-factorial rounding.
    """
    n = chain.params.n
    beta = chain.params.beta
    k = chain.k_offset + np.arange(chain.n_states - 1, dtype=float)
    incr = np.log((n - k) / (k + 1.0)) + 2.0 * beta * (2.0 * k + 1.0 - n) / n
    if chain.kind == CENSORED and n % 2 == 0:
        incr = incr.copy()
        incr[0] += math.log(2.0)
    return _prefix_log_weights(incr)


def stationary(chain: MagChain, check_tol: float = 1e-10, return_deviation: bool = False):
    """Stationary law via the detailed-balance product, cross-checked against
    the Gibbs class weights.

    Route (a): log pi(k+1) = log pi(k) + log p_k - log q_{k+1}, normalized.
    Route (b): Gibbs class weights (folded for the censored chain), normalized.
    Raises ConsistencyError when the two routes disagree beyond check_tol in
    the log domain (that signals a kernel bug); returns route (a).
    """
    incr_a = np.log(chain.p[:-1]) - np.log(chain.q[1:])
    log_pi = _prefix_log_weights(incr_a)
    log_pi -= logsumexp(log_pi)
    log_gibbs = _gibbs_route_log(chain)
    log_gibbs = log_gibbs - logsumexp(log_gibbs)
    deviation = float(np.max(np.abs(log_pi - log_gibbs)))
    if deviation > check_tol:
        raise ConsistencyError(
            f"stationary routes disagree: max |log pi_a - log pi_b| = {deviation:.3e}"
        )
    pv = ProbVector(log_p=log_pi, states=chain.states.copy())
    if return_deviation:
        return pv, deviation
    return pv


# ---------------------------------------------------------------------------
# absorption at the center, quantiles, moments


def _absorbing_indices(chain: MagChain) -> np.ndarray:
    n = chain.params.n
    k = chain.k_offset + np.arange(chain.n_states)
    return np.nonzero(np.abs(2 * k - n) <= 1)[0]


def survival_curve(chain: MagChain, ts: Sequence[int]) -> np.ndarray:
    """P_1(tau_0 > t) for each requested t, where tau_0 is the first time the
    magnetization satisfies |s| <= 1/n; computed by exact iteration with the
    center states made absorbing, started from s = 1.
    """
    if chain.kind != FREE:
        raise DomainError("tau_0 survival is defined for the free chain")
    ts = [int(t) for t in ts]
    if ts and min(ts) < 0:
        raise DomainError("times must be >= 0")
    absorbing = _absorbing_indices(chain)
    dist = np.zeros(chain.n_states)
    dist[chain.top_index()] = 1.0
    it = _KernelIterator(chain, dist, absorbing=absorbing)
    out = {}
    for target in sorted(set(ts)):
        if target > it.t:
            it.advance(target - it.t)
        out[target] = float(it.dist.sum())
    return np.array([out[t] for t in ts])


def survival_tau0(chain: MagChain, t: int) -> float:
    """P_1(tau_0 > t); see survival_curve."""
    return float(survival_curve(chain, [t])[0])


def t_n(gamma: float, params: ModelParams) -> int:
    """Reference hitting-time scale for tau_0, by regime.

    Outside the critical window (beta < 1 with delta^2 n large) this is
    (n / 2 delta) log(delta^2 n) + (gamma + 3) n / delta; inside the window
    (either sign of delta = 1 - beta) it is
    (200 + 6 gamma (1 + 6 sqrt(delta^2 n))) n^{3/2}.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    n = params.n
    delta_signed = 1.0 - params.beta
    if params.regime == SUBCRITICAL and delta_signed > 0:
        d = delta_signed
        t = (n / (2 * d)) * math.log(d * d * n) + (gamma + 3.0) * n / d
    else:
        t = (200.0 + 6.0 * gamma * (1.0 + 6.0 * math.sqrt(delta_signed**2 * n))) * n**1.5
    return int(math.ceil(t))


def quantile_state(pi: ProbVector, alpha: float) -> int:
    """Smallest index i with pi({0..i}) >= alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    cum = np.cumsum(pi.probabilities)
    return int(np.searchsorted(cum, alpha, side="left"))


def stationary_moment(pi: ProbVector, r: float) -> float:
    """E |S|^r under pi (state labels required)."""
    if r < 1:
        raise DomainError("moment order must be >= 1")
    if pi.states is None:
        raise DomainError("ProbVector carries no state labels")
    return float(np.sum(pi.probabilities * np.abs(pi.states) ** r))


def stationary_mean(pi: ProbVector) -> float:
    if pi.states is None:
        raise DomainError("ProbVector carries no state labels")
    return float(np.sum(pi.probabilities * pi.states))


def stationary_variance(pi: ProbVector) -> float:
    """Exact var_pi(S)."""
    mean = stationary_mean(pi)
    second = float(np.sum(pi.probabilities * pi.states**2))
    return second - mean * mean


def drift_identity_gap(chain: MagChain) -> float:
    """Max over states of |sum_s' P(s,s') s' - ((1 - 1/n) s + phi(s) - psi(s))|.

    phi and psi are evaluated from their definitions
    phi(s) = (1/2n)[tanh(beta(s + 1/n)) + tanh(beta(s - 1/n))],
    psi(s) = (s/2n)[tanh(beta(s + 1/n)) - tanh(beta(s - 1/n))],
    independently of the kernel arrays.
    """
    if chain.kind != FREE:
        raise DomainError("the drift identity refers to the free chain")
    n = chain.params.n
    beta = chain.params.beta
    s = chain.states
    two_over_n = 2.0 / n
    lhs = (s + two_over_n) * chain.p + s * chain.h + (s - two_over_n) * chain.q
    t_up = np.tanh(beta * (s + 1.0 / n))
    t_dn = np.tanh(beta * (s - 1.0 / n))
    phi = (t_up + t_dn) / (2.0 * n)
    psi = s * (t_up - t_dn) / (2.0 * n)
    rhs = (1.0 - 1.0 / n) * s + phi - psi
    return float(np.max(np.abs(lhs - rhs)))


def local_maxima(pi: ProbVector) -> list[int]:
    """Indices of strict local maxima of the stationary profile."""
    p = pi.probabilities
    out = []
    for i in range(p.size):
        left_ok = i == 0 or p[i] > p[i - 1]
        right_ok = i == p.size - 1 or p[i] > p[i + 1]
        if left_ok and right_ok:
            out.append(i)
    return out
