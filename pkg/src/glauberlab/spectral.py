"""Spectral gaps: Sturm-bisection eigensolves of the symmetrized
magnetization chain, and exact treatment of the full 2^n-state dynamics at
tiny n (dense solve, or deflated power iteration at n = 11, 12).

Symmetrization uses A(x, y) = sqrt(P(x, y) P(y, x)) off the diagonal, which
equals P(x, y) sqrt(pi(x) / pi(y)) by detailed balance but never forms the
stationary ratios, so it cannot under- or overflow deep in the supercritical
regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.special import logsumexp

from .magchain import MagChain, ProbVector, TvSeries, stationary, tv_distance
from .model import ConsistencyError, DomainError, ModelParams

FULL_DENSE_MAX_N = 10
FULL_MAX_N = 12
POWER_MAX_ITER = 10**6
POWER_RESIDUAL = 1e-9


@dataclass
class SpectralReport:
    """Gap report with the method used and an eigenpair residual.

    gap = 1 - lambda_second where lambda_second is the second-largest
    (signed) eigenvalue; second_dominates records whether
    |lambda_min| <= lambda_second, i.e. whether the gap is attained by the
    largest nontrivial eigenvalue.  Violations are reported, not asserted.
    """

    gap: float
    lambda_second: float
    lambda_min: float
    method: str
    residual: float
    n_states: int
    top_eigenvalue: float
    second_dominates: bool

    def to_json_dict(self) -> dict:
        return {
            "gap": self.gap,
            "lambda_second": self.lambda_second,
            "lambda_min": self.lambda_min,
            "method": self.method,
            "residual": self.residual,
            "n_states": self.n_states,
            "top_eigenvalue": self.top_eigenvalue,
            "second_dominates": self.second_dominates,
        }


def symmetrized_tridiagonal(chain: MagChain) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the symmetrized kernel."""
    diag = chain.h.copy()
    off = np.sqrt(chain.p[:-1] * chain.q[1:])
    return diag, off


def _tridiag_residual(diag, off, vec, lam) -> float:
    y = diag * vec
    y[:-1] += off * vec[1:]
    y[1:] += off * vec[:-1]
    return float(np.max(np.abs(y - lam * vec)))


def chain_gap(chain: MagChain, residual_tol: float = 1e-8) -> SpectralReport:
    """Spectral gap of the magnetization chain.

    Full spectrum of the symmetric tridiagonal matrix by Sturm-sequence
    bisection (LAPACK stebz), eigenvectors of the reported pairs by inverse
    iteration (stein); the residual certifies the reported eigenvalues.
    """
    diag, off = symmetrized_tridiagonal(chain)
    m = diag.size
    w = scipy.linalg.eigvalsh_tridiagonal(diag, off, lapack_driver="stebz")
    top, lam1, lam_min = float(w[-1]), float(w[-2]), float(w[0])
    w_top, v_top = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(m - 2, m - 1)
    )
    w_bot, v_bot = scipy.linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    residual = max(
        _tridiag_residual(diag, off, v_top[:, 1], w_top[1]),
        _tridiag_residual(diag, off, v_top[:, 0], w_top[0]),
        _tridiag_residual(diag, off, v_bot[:, 0], w_bot[0]),
    )
    gap = 1.0 - lam1
    if residual > residual_tol:
        raise ConsistencyError(f"eigenpair residual {residual:.3e} above {residual_tol:.1e}")
    if not 0.0 < gap <= 1.0 + 1e-12:
        raise ConsistencyError(f"gap {gap:.3e} not resolvable in float64")
    return SpectralReport(
        gap=gap,
        lambda_second=lam1,
        lambda_min=lam_min,
        method="tridiagonal-bisection",
        residual=residual,
        n_states=m,
        top_eigenvalue=top,
        second_dominates=abs(lam_min) <= lam1 + 1e-12,
    )


def second_eigenvector(chain: MagChain) -> np.ndarray:
    """Eigenfunction of the second-largest eigenvalue, in chain coordinates.

    The symmetrized eigenvector v relates to the eigenfunction f of the
    kernel by f = v / sqrt(pi).
    """
    diag, off = symmetrized_tridiagonal(chain)
    m = diag.size
    _, v = scipy.linalg.eigh_tridiagonal(diag, off, select="i", select_range=(m - 2, m - 2))
    log_pi = stationary(chain).log_p
    return v[:, 0] * np.exp(-0.5 * (log_pi - np.max(log_pi)))


# ---------------------------------------------------------------------------
# full 2^n dynamics


def _config_plus_counts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    k = np.zeros(idx.size, dtype=np.int64)
    for i in range(n):
        k += (idx >> i) & 1
    return k


def _site_update_probs(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """a_up[k]: prob of writing +1 on a minus site of a k-plus configuration;
    a_keep[k]: prob of writing +1 on a plus site."""
    n = params.n
    k = np.arange(n + 1, dtype=float)
    a_up = 0.5 * (1.0 + np.tanh(params.beta * (2.0 * k + 1.0 - n) / n))
    a_keep = 0.5 * (1.0 + np.tanh(params.beta * (2.0 * k - 1.0 - n) / n))
    return a_up, a_keep


def full_kernel(params: ModelParams, symmetrized: bool = False) -> scipy.sparse.csr_matrix:
    """Exact heat-bath kernel on {-1, +1}^n as a sparse matrix (n + 1 nonzeros
    per row); bit i of the row index set means spin +1 at site i."""
    n = params.n
    if n > FULL_MAX_N:
        raise DomainError(f"full kernel limited to n <= {FULL_MAX_N}")
    N = 1 << n
    idx = np.arange(N, dtype=np.int64)
    k = _config_plus_counts(n)
    a_up, a_keep = _site_update_probs(params)
    # diagonal: chosen site keeps its spin
    diag = (k * a_keep[k] + (n - k) * (1.0 - a_up[k])) / n
    rows = [idx]
    cols = [idx]
    data = [diag]
    for i in range(n):
        bit = ((idx >> i) & 1).astype(bool)
        target = idx ^ (1 << i)
        if symmetrized:
            # sqrt(P(x,y) P(y,x)) for the flip edge; both orientations emitted
            val = np.where(
                bit,
                np.sqrt((1.0 - a_keep[k]) * a_up[np.maximum(k - 1, 0)]),
                np.sqrt(a_up[k] * (1.0 - a_keep[np.minimum(k + 1, n)])),
            ) / n
        else:
            val = np.where(bit, 1.0 - a_keep[k], a_up[k]) / n
        rows.append(idx)
        cols.append(target)
        data.append(val)
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
    )
    return mat.tocsr()


def full_stationary_log(params: ModelParams) -> np.ndarray:
    """Per-configuration log stationary weights, normalized."""
    n = params.n
    k = _config_plus_counts(n)
    m = (2 * k - n).astype(float)
    log_w = params.beta * m * m / (2.0 * n)
    return log_w - logsumexp(log_w)


def _power_iteration(op_apply, size: int, rng: np.random.Generator,
                     max_iter: int = POWER_MAX_ITER, tol: float = POWER_RESIDUAL):
    """Dominant eigenpair of a symmetric operator, residual-controlled."""
    x = rng.standard_normal(size)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = op_apply(x)
        lam = float(x @ y)
        res = float(np.linalg.norm(y - lam * x))
        if res <= tol:
            return lam, x, res
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x, 0.0
        x = y / norm
    raise ConsistencyError(f"power iteration did not reach residual {tol:.1e}")


def full_dynamics_gap(params: ModelParams, residual_tol: float = 1e-8) -> SpectralReport:
    """Spectral gap of the exact 2^n-state dynamics.

    Dense eigensolve for n <= 10; for n = 11, 12 a power iteration on
    (A + I)/2 with the known top pair (eigenvalue 1, vector sqrt(mu))
    deflated, plus one on (I - A)/2 for the most negative eigenvalue.
    """
    n = params.n
    if n > FULL_MAX_N:
        raise DomainError(f"full dynamics limited to n <= {FULL_MAX_N}")
    A = full_kernel(params, symmetrized=True)
    N = A.shape[0]
    if n <= FULL_DENSE_MAX_N:
        dense = A.toarray()
        w = np.linalg.eigvalsh(dense)
        top, lam1, lam_min = float(w[-1]), float(w[-2]), float(w[0])
        w2, v2 = scipy.linalg.eigh(dense, subset_by_index=[N - 2, N - 1])
        w0, v0 = scipy.linalg.eigh(dense, subset_by_index=[0, 0])
        residual = max(
            float(np.max(np.abs(dense @ v2[:, 0] - w2[0] * v2[:, 0]))),
            float(np.max(np.abs(dense @ v0[:, 0] - w0[0] * v0[:, 0]))),
        )
        method = "dense"
    else:
        sqrt_mu = np.exp(0.5 * full_stationary_log(params))
        sqrt_mu /= np.linalg.norm(sqrt_mu)
        rng = np.random.default_rng(0)

        def apply_top(x):
            x = x - (sqrt_mu @ x) * sqrt_mu
            y = 0.5 * (A @ x + x)
            return y - (sqrt_mu @ y) * sqrt_mu

        theta, v, res1 = _power_iteration(apply_top, N, rng)
        lam1 = 2.0 * theta - 1.0

        def apply_bottom(x):
            return 0.5 * (x - A @ x)

        theta_b, vb, res2 = _power_iteration(apply_bottom, N, rng)
        lam_min = 1.0 - 2.0 * theta_b
        top = 1.0
        residual = 2.0 * max(res1, res2)
        method = "power-iteration"
    gap = 1.0 - lam1
    if residual > residual_tol:
        raise ConsistencyError(f"eigenpair residual {residual:.3e} above {residual_tol:.1e}")
    return SpectralReport(
        gap=gap,
        lambda_second=lam1,
        lambda_min=lam_min,
        method=method,
        residual=residual,
        n_states=N,
        top_eigenvalue=top,
        second_dominates=abs(lam_min) <= lam1 + 1e-12,
    )


def full_tv_from_allplus(params: ModelParams, t_max: int) -> TvSeries:
    """Exact worst-start total variation of the full dynamics started from the
    all-plus configuration, by iterating the 2^n distribution."""
    if params.n > FULL_DENSE_MAX_N:
        raise DomainError(f"full iteration limited to n <= {FULL_DENSE_MAX_N}")
    P = full_kernel(params, symmetrized=False)
    PT = P.T.tocsr()
    mu = np.exp(full_stationary_log(params))
    N = P.shape[0]
    dist = np.zeros(N)
    dist[N - 1] = 1.0  # all bits set: the all-plus configuration
    times = [0]
    values = [tv_distance(dist, mu)]
    for t in range(1, t_max + 1):
        dist = PT @ dist
        times.append(t)
        values.append(tv_distance(dist, mu))
    return TvSeries(times=np.array(times), values=np.array(values))


def dirichlet_quotient(chain: MagChain, f: np.ndarray, pi: ProbVector | None = None) -> float:
    """Dirichlet form over variance, E(f) / Var_pi(f), an upper bound for the
    gap for any non-constant f and equal to it at the second eigenvector."""
    f = np.asarray(f, dtype=float)
    if f.size != chain.n_states:
        raise DomainError("f must be defined on the chain states")
    pi_arr = (pi if pi is not None else stationary(chain)).probabilities
    mean = float(np.sum(pi_arr * f))
    fc = f - mean
    var = float(np.sum(pi_arr * fc * fc))
    scale = max(1.0, float(np.max(np.abs(f))))
    if var <= (1e-14 * scale) ** 2:
        raise DomainError("f is constant (zero variance under pi) after centering")
    diffs = f[1:] - f[:-1]
    energy = float(np.sum(pi_arr[:-1] * chain.p[:-1] * diffs * diffs))
    return energy / var
