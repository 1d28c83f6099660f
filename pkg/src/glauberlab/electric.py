"""Electrical-network view of the magnetization chain: log-domain edge
resistances and conductances, exact expected hitting times via the
birth-and-death ladder recurrence, commute times by both the recurrence and
the network identity, the positive root zeta of tanh(beta x) = x, and the
supercritical time scale

    t_exp = (n / delta) * exp((n/2) * int_0^zeta log((1 + g)/(1 - g)) dx),

with g(x) = (tanh(beta x) - x) / (1 - x tanh(beta x)).

Everything lives in the log domain: the central edge conductance reaches
exp(Theta(n)) and overflows linear float64 by n of a few hundred.  The exact
ladder recurrence is the authoritative value everywhere; network formulas are
cross-checks and diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .magchain import MagChain, ProbVector, stationary
from .model import ConsistencyError, DomainError, ModelParams

LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class ElectricalNetwork:
    """Log-domain edge resistances/conductances, self-loop conductances and
    vertex weights of the chain seen as a network.

    Edge j joins states j and j+1; the reference edge (conductance 1) is the
    one leaving the state that plays the role of zero magnetization.  Vertex
    weight w(x) = (c_{x-} + c_x) / (p_x + q_x) reproduces the chain exactly;
    the self-loop c'_x = h_x (c_{x-} + c_x) / (p_x + q_x) accounts for the
    holding probability.
    """

    log_r: np.ndarray
    log_c: np.ndarray
    log_c_loop: np.ndarray
    log_c_S: float
    log_w: np.ndarray
    log_w_total: float
    ref_state: int

    @property
    def n_edges(self) -> int:
        return self.log_c.size


def network(chain: MagChain) -> ElectricalNetwork:
    """Build the network for an irreducible chain.

    Conductances follow the telescoping products c_x / c_{x - 2/n} = p_x / q_x
    outward from the reference edge; the negative side then matches the
    positive side by the spin-flip symmetry of the free kernel.
    """
    m = chain.n_states
    if m < 2:
        raise DomainError("need at least two states")
    p_int, q_int = chain.p[1:-1], chain.q[1:-1]
    if np.any(p_int <= 0.0) or np.any(q_int <= 0.0):
        raise ConsistencyError("zero transition probability on an interior edge")
    # log(c_{e_j} / c_{e_{j-1}}) = log p_j - log q_j across interior state j
    incr = np.log(p_int) - np.log(q_int)
    ref = chain.ref_index
    ref_edge = min(ref, m - 2)
    log_c = np.zeros(m - 1)
    log_c[ref_edge:] = np.concatenate(([0.0], np.cumsum(incr[ref_edge:])))
    log_c[:ref_edge] = -np.cumsum(incr[:ref_edge][::-1])[::-1]
    log_r = -log_c
    # vertex weights and self-loops; boundary states see a single edge
    log_c_pad = np.concatenate(([-np.inf], log_c, [-np.inf]))
    log_sum_adjacent = np.logaddexp(log_c_pad[:-1], log_c_pad[1:])
    log_pq = np.log(chain.p + chain.q)
    log_w = log_sum_adjacent - log_pq
    with np.errstate(divide="ignore"):
        log_c_loop = np.log(chain.h) - log_pq + log_sum_adjacent
    log_c_S = float(np.logaddexp(logsumexp(log_c), logsumexp(log_c_loop)))
    log_w_total = float(logsumexp(log_w))
    for arr in (log_r, log_c, log_c_loop, log_w):
        arr.setflags(write=False)
    return ElectricalNetwork(
        log_r=log_r,
        log_c=log_c,
        log_c_loop=log_c_loop,
        log_c_S=log_c_S,
        log_w=log_w,
        log_w_total=log_w_total,
        ref_state=ref,
    )


def effective_resistance(net: ElectricalNetwork, x: int, y: int) -> float:
    """log R(x <-> y) = log sum of edge resistances between states x < y."""
    if not 0 <= x < y <= net.n_edges:
        raise DomainError("need state indices with x < y inside the chain")
    return float(logsumexp(net.log_r[x:y]))


@dataclass
class HittingReport:
    """Expected hitting time, log-domain and linear when representable."""

    source: int
    target: int
    source_state: float
    target_state: float
    log_expected: float
    expected: Optional[float]
    method: str

    def to_json_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "source_state": self.source_state,
            "target_state": self.target_state,
            "log_expected": self.log_expected,
            "expected": self.expected,
            "method": self.method,
        }


def _linear(log_value: float) -> Optional[float]:
    return math.exp(log_value) if log_value < LOG_FLOAT_MAX else None


def _log_hitting(chain: MagChain, log_pi: np.ndarray, x: int, y: int) -> float:
    """log E_x tau_y via the ladder recurrence.

    Moving up (x < y): E_k tau_{k+1} = (sum_{j <= k} pi_j) / (pi_k p_k);
    moving down uses the mirrored identity with the upper tail and q_k.
    """
    with np.errstate(divide="ignore"):
        if x < y:
            cum = np.logaddexp.accumulate(log_pi)
            terms = cum[x:y] - log_pi[x:y] - np.log(chain.p[x:y])
        else:
            rev = np.logaddexp.accumulate(log_pi[::-1])[::-1]
            terms = rev[y + 1 : x + 1] - log_pi[y + 1 : x + 1] - np.log(chain.q[y + 1 : x + 1])
    if np.any(np.isinf(terms)):
        raise DomainError("hitting time through a blocked edge")
    return float(logsumexp(terms))


def hitting_time(chain: MagChain, x: int, y: int, pi: Optional[ProbVector] = None) -> HittingReport:
    """Exact expected hitting time from state x to state y (indices)."""
    if x == y:
        raise DomainError("source and target coincide")
    log_pi = (pi if pi is not None else stationary(chain)).log_p
    log_e = _log_hitting(chain, log_pi, x, y)
    return HittingReport(
        source=x,
        target=y,
        source_state=float(chain.states[x]),
        target_state=float(chain.states[y]),
        log_expected=log_e,
        expected=_linear(log_e),
        method="recurrence",
    )


@dataclass
class CommuteReport:
    """Commute time by the exact recurrence and by network formulas.

    log_network uses the exact vertex-weight identity W_total * R(x <-> y);
    log_doubled_loops is the variant 2 c_S R(x <-> y) whose total weight
    counts every self-loop twice.  ratio_* = exp(log_* - log_recurrence).
    """

    x: int
    y: int
    log_recurrence: float
    log_network: float
    log_doubled_loops: float
    expected: Optional[float]
    ratio_network: float
    ratio_doubled_loops: float

    def to_json_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "log_recurrence": self.log_recurrence,
            "log_network": self.log_network,
            "log_doubled_loops": self.log_doubled_loops,
            "expected": self.expected,
            "ratio_network": self.ratio_network,
            "ratio_doubled_loops": self.ratio_doubled_loops,
            "methods": ["recurrence", "network"],
        }


def commute_time(
    chain: MagChain,
    x: int,
    y: int,
    net: Optional[ElectricalNetwork] = None,
    pi: Optional[ProbVector] = None,
) -> CommuteReport:
    """E_x tau_y + E_y tau_x, authoritative by the ladder recurrence, with the
    network identity evaluated as a cross-check."""
    if x == y:
        raise DomainError("source and target coincide")
    lo, hi = (x, y) if x < y else (y, x)
    pi = pi if pi is not None else stationary(chain)
    net = net if net is not None else network(chain)
    log_rec = float(
        np.logaddexp(
            _log_hitting(chain, pi.log_p, lo, hi), _log_hitting(chain, pi.log_p, hi, lo)
        )
    )
    log_reff = effective_resistance(net, lo, hi)
    log_net = net.log_w_total + log_reff
    log_doubled = math.log(2.0) + net.log_c_S + log_reff
    return CommuteReport(
        x=x,
        y=y,
        log_recurrence=log_rec,
        log_network=log_net,
        log_doubled_loops=log_doubled,
        expected=_linear(log_rec),
        ratio_network=math.exp(log_net - log_rec),
        ratio_doubled_loops=math.exp(log_doubled - log_rec),
    )


# ---------------------------------------------------------------------------
# zeta and the supercritical time scale


def zeta(beta: float, tol: float = 1e-12) -> float:
    """Unique positive root of tanh(beta x) = x, by bisection on [tol, 1].

    Requires beta > 1; below that tanh(beta x) < x for all x > 0.
    """
    if not beta > 1.0:
        raise DomainError("no positive root: requires beta > 1")
    lo, hi = tol, 1.0
    f = lambda x: math.tanh(beta * x) - x
    if f(lo) <= 0.0:
        raise DomainError("bracket failed at the lower end; beta too close to 1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def g_eval(x, beta: float):
    """g(x) = (tanh(beta x) - x) / (1 - x tanh(beta x)) on [0, 1)."""
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.0) | (x_arr >= 1.0)):
        raise DomainError("g is evaluated on [0, 1)")
    t = np.tanh(beta * x_arr)
    val = (t - x_arr) / (1.0 - x_arr * t)
    return float(val) if np.ndim(x) == 0 else val


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = 1e-10,
    max_halvings: int = 24,
) -> float:
    """Composite Simpson with interval halving under Richardson control.

    Stops when |S_{2m} - S_m| <= 15 rtol max(|S_{2m}|, tiny); f must accept
    vector arguments.
    """
    if b <= a:
        if b == a:
            return 0.0
        raise DomainError("need a <= b")
    m = 2
    xs = np.linspace(a, b, m + 1)
    fx = f(xs)
    h = (b - a) / m
    s = h / 3.0 * (fx[0] + 4.0 * fx[1] + fx[2])
    for _ in range(max_halvings):
        mids = 0.5 * (xs[:-1] + xs[1:])
        f_mid = f(mids)
        merged = np.empty(2 * m + 1)
        merged[0::2] = fx
        merged[1::2] = f_mid
        m *= 2
        xs = np.linspace(a, b, m + 1)
        fx = merged
        h = (b - a) / m
        s_new = h / 3.0 * (fx[0] + fx[-1] + 4.0 * fx[1:-1:2].sum() + 2.0 * fx[2:-1:2].sum())
        if abs(s_new - s) <= 15.0 * rtol * max(abs(s_new), 1e-300):
            return float(s_new)
        s = s_new
    raise ConsistencyError("quadrature did not converge within the halving budget")


@dataclass
class TexpResult:
    """The supercritical mixing scale, log-domain and linear when finite."""

    zeta: float
    integral: float
    log_value: float
    value: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "zeta": self.zeta,
            "integral": self.integral,
            "log_value": self.log_value,
            "value": self.value,
        }


def t_exp(params: ModelParams, rtol: float = 1e-10) -> TexpResult:
    """(n / delta) exp((n / 2) * int_0^zeta log((1 + g) / (1 - g)) dx)."""
    if not params.beta > 1.0:
        raise DomainError("the exponential scale requires beta > 1")
    z = zeta(params.beta)

    def integrand(x: np.ndarray) -> np.ndarray:
        g = g_eval(np.minimum(x, 1.0 - 1e-15), params.beta)
        return np.log1p(g) - np.log1p(-g)

    integral = adaptive_simpson(integrand, 0.0, z, rtol=rtol)
    log_value = math.log(params.n) - math.log(params.delta) + 0.5 * params.n * integral
    return TexpResult(zeta=z, integral=integral, log_value=log_value, value=_linear(log_value))
