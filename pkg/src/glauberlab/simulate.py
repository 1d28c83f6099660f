"""Full-configuration Monte Carlo heat-bath dynamics: single states, the
grand monotone coupling driven by one shared (site, uniform) pair per step,
the censored variant (logical global flip on negative magnetization), and
replicated estimators for hitting and coalescence times.

Randomness protocol: every step consumes exactly one uniform site index and
then one uniform in [0, 1], in that order, from the replicate's own
generator.  Replicate r of a run with master seed m is seeded from
SeedSequence(m, spawn_key=(r,)), so results are bit-exact reproducible and
independent of how replicates are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .magchain import TvSeries
from .model import DomainError, ModelParams, SpinConfiguration, magnetization

DEFAULT_STEP_CAP = 10**9

QUANTILE_PROBS = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)


def _replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _replicate_seed_id(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1)[0])


@dataclass
class SimState:
    """One running instance of the dynamics.

    Confined to a single task; the flipped flag realizes the censored global
    spin flip in O(1), so config.spins stores the physical array and the
    observed spin at site i is sign * spins[i] with sign = -1 when flipped.
    """

    config: SpinConfiguration
    params: ModelParams
    rng: Optional[np.random.Generator]
    stream_id: int = 0
    steps: int = 0
    flipped: bool = False
    last_site: Optional[int] = None

    @property
    def sign(self) -> int:
        return -1 if self.flipped else 1

    def observed_magnetization(self) -> float:
        return self.sign * magnetization(self.config)

    def observed_spins(self) -> np.ndarray:
        return self.sign * self.config.spins


def new_state(
    params: ModelParams,
    start: str | float = "all-plus",
    master_seed: int = 0,
    stream_id: int = 0,
) -> SimState:
    config = _start_config(params.n, start)
    return SimState(
        config=config,
        params=params,
        rng=_replicate_rng(master_seed, stream_id),
        stream_id=stream_id,
    )


def _start_config(n: int, start: str | float) -> SpinConfiguration:
    if start == "all-plus":
        return SpinConfiguration.all_plus(n)
    if start == "all-minus":
        return SpinConfiguration.all_minus(n)
    if isinstance(start, str):
        raise DomainError(f"unknown start {start!r}")
    return SpinConfiguration.with_magnetization(n, float(start))


def _update(state: SimState, i: int, u: float) -> None:
    """Write the heat-bath spin at site i given uniform u, in observed terms."""
    n = state.params.n
    spins = state.config.spins
    sign = state.sign
    cur = sign * int(spins[i])
    m_obs = sign * (2 * state.config.plus_count - n)
    p_plus = 0.5 * (1.0 + math.tanh(state.params.beta * (m_obs - cur) / n))
    new = 1 if u <= p_plus else -1
    if new != cur:
        state.config.set_spin(i, sign * new)


def step(state: SimState, rng: Optional[np.random.Generator] = None) -> SimState:
    """One free heat-bath step: uniform site, then the update uniform."""
    rng = rng if rng is not None else state.rng
    i = int(rng.integers(state.params.n))
    u = float(rng.random())
    _update(state, i, u)
    state.last_site = i
    state.steps += 1
    return state


def censored_step(state: SimState, rng: Optional[np.random.Generator] = None) -> SimState:
    """One heat-bath step followed by a logical global flip if the observed
    magnetization went negative."""
    step(state, rng)
    if state.observed_magnetization() < 0:
        state.flipped = not state.flipped
    return state


@dataclass
class CouplingEnsemble:
    """States advanced with one shared (site, uniform) pair per step.

    Monotonicity of the update rule preserves any coordinate-wise order
    between members that holds initially, and coalesced members stay equal.
    Free dynamics only.
    """

    members: list[SimState]
    rng: np.random.Generator


def coupling_ensemble(
    params: ModelParams, starts: Sequence[str | float], master_seed: int = 0
) -> CouplingEnsemble:
    members = [
        SimState(config=_start_config(params.n, s), params=params, rng=None, stream_id=j)
        for j, s in enumerate(starts)
    ]
    return CouplingEnsemble(members=members, rng=_replicate_rng(master_seed, 0))


def coupled_step(ensemble: CouplingEnsemble, assert_order: bool = False) -> CouplingEnsemble:
    n = ensemble.members[0].params.n
    i = int(ensemble.rng.integers(n))
    u = float(ensemble.rng.random())
    for state in ensemble.members:
        _update(state, i, u)
        state.last_site = i
        state.steps += 1
    if assert_order:
        for a, b in zip(ensemble.members, ensemble.members[1:]):
            if not (
                np.all(a.config.spins >= b.config.spins)
                or np.all(b.config.spins >= a.config.spins)
            ):
                raise AssertionError("coordinate-wise order violated under the grand coupling")
    return ensemble


# ---------------------------------------------------------------------------
# targets and replicated estimators


@dataclass(frozen=True)
class HittingTarget:
    """Magnetization target set; kind in {'abs_le', 'le', 'ge'}."""

    kind: str
    value: float

    def bounds(self, n: int) -> tuple[int, int]:
        """Inclusive integer bounds on n*S; 1e-9 slack absorbs decimal fuzz."""
        if self.kind == "abs_le":
            hi = int(math.floor(self.value * n + 1e-9))
            return -hi, hi
        if self.kind == "le":
            return -n, int(math.floor(self.value * n + 1e-9))
        if self.kind == "ge":
            return int(math.ceil(self.value * n - 1e-9)), n
        raise DomainError(f"unknown target kind {self.kind!r}")

    def label(self) -> str:
        op = {"abs_le": "|S|<=", "le": "S<=", "ge": "S>="}[self.kind]
        return f"{op}{self.value:g}"


@dataclass
class TrialSummary:
    """Replicated estimate with reproducibility metadata.

    With capped > 0 the mean is a lower bound; with every replicate capped
    the estimate is invalid.
    """

    reps: int
    mean: float
    se: float
    quantiles: dict[str, float]
    master_seed: int
    seeds: list[int]
    capped: int
    valid: bool
    cap: int
    samples: Optional[np.ndarray] = None

    @classmethod
    def from_samples(
        cls,
        samples: np.ndarray,
        hit_flags: np.ndarray,
        master_seed: int,
        cap: int,
        keep_samples: bool = True,
    ) -> "TrialSummary":
        reps = samples.size
        capped = int((~hit_flags).sum())
        mean = float(samples.mean())
        se = float(samples.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        quantiles = {
            f"q{int(100 * p):02d}": float(np.quantile(samples, p)) for p in QUANTILE_PROBS
        }
        return cls(
            reps=reps,
            mean=mean,
            se=se,
            quantiles=quantiles,
            master_seed=master_seed,
            seeds=[_replicate_seed_id(master_seed, r) for r in range(reps)],
            capped=capped,
            valid=capped < reps,
            cap=cap,
            samples=samples if keep_samples else None,
        )

    def to_json_dict(self, include_samples: bool = False) -> dict:
        out = {
            "reps": self.reps,
            "mean": self.mean,
            "se": self.se,
            "quantiles": self.quantiles,
            "master_seed": self.master_seed,
            "seeds": self.seeds,
            "capped": self.capped,
            "valid": self.valid,
            "cap": self.cap,
        }
        if include_samples and self.samples is not None:
            out["samples"] = [int(x) for x in self.samples]
        return out

    def samples_to_csv(self, dest) -> None:
        from .serialize import write_csv

        if self.samples is None:
            raise DomainError("samples were not kept")
        write_csv(dest, ["replicate", "steps"], list(enumerate(int(x) for x in self.samples)))


def _run_hitting(
    n: int,
    beta: float,
    k_start: int,
    censored: bool,
    m_lo: int,
    m_hi: int,
    cap: int,
    rng: np.random.Generator,
) -> tuple[int, bool]:
    """Tight replicate loop; consumes randomness exactly like step()."""
    spins = np.full(n, -1, dtype=np.int8)
    spins[:k_start] = 1
    m_phys = 2 * k_start - n
    sign = 1
    if m_lo <= m_phys <= m_hi:
        return 0, True
    tanh = math.tanh
    integers = rng.integers
    random = rng.random
    steps = 0
    while steps < cap:
        i = int(integers(n))
        u = float(random())
        cur = sign * int(spins[i])
        p_plus = 0.5 * (1.0 + tanh(beta * (sign * m_phys - cur) / n))
        new = 1 if u <= p_plus else -1
        if new != cur:
            spins[i] = sign * new
            m_phys += sign * (new - cur)
        steps += 1
        m_obs = sign * m_phys
        if censored and m_obs < 0:
            sign = -sign
            m_obs = -m_obs
        if m_lo <= m_obs <= m_hi:
            return steps, True
    return cap, False


def _hitting_worker(args) -> tuple[int, int, bool]:
    (n, beta, k_start, censored, m_lo, m_hi, cap, master_seed, r) = args
    steps, hit = _run_hitting(
        n, beta, k_start, censored, m_lo, m_hi, cap, _replicate_rng(master_seed, r)
    )
    return r, steps, hit


def _run_coalescence(n: int, beta: float, cap: int, rng: np.random.Generator) -> tuple[int, bool]:
    """Grand coupling of the all-plus and all-minus starts; the pair is
    ordered, so equal magnetizations mean equal configurations."""
    top = np.ones(n, dtype=np.int8)
    bot = -np.ones(n, dtype=np.int8)
    m_top, m_bot = n, -n
    tanh = math.tanh
    integers = rng.integers
    random = rng.random
    steps = 0
    while steps < cap:
        i = int(integers(n))
        u = float(random())
        cur = int(top[i])
        p_plus = 0.5 * (1.0 + tanh(beta * (m_top - cur) / n))
        new = 1 if u <= p_plus else -1
        if new != cur:
            top[i] = new
            m_top += new - cur
        cur = int(bot[i])
        p_plus = 0.5 * (1.0 + tanh(beta * (m_bot - cur) / n))
        new = 1 if u <= p_plus else -1
        if new != cur:
            bot[i] = new
            m_bot += new - cur
        steps += 1
        if m_top == m_bot:
            return steps, True
    return cap, False


def _coalescence_worker(args) -> tuple[int, int, bool]:
    (n, beta, cap, master_seed, r) = args
    steps, hit = _run_coalescence(n, beta, cap, _replicate_rng(master_seed, r))
    return r, steps, hit


def _map_ordered(worker, jobs: list, workers: int) -> list:
    """Run jobs (each tagged with its replicate index) and return results in
    replicate order regardless of scheduling."""
    if workers <= 1:
        results = [worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, jobs))
    return sorted(results, key=lambda item: item[0])


def estimate_hitting(
    params: ModelParams,
    start: str | float,
    target: HittingTarget,
    reps: int,
    master_seed: int,
    cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
    censored: bool = False,
) -> TrialSummary:
    """Replicated hitting-time estimate from independent streams."""
    if reps < 2:
        raise DomainError("need at least two replicates")
    k_start = _start_config(params.n, start).plus_count
    m_lo, m_hi = target.bounds(params.n)
    jobs = [
        (params.n, params.beta, k_start, censored, m_lo, m_hi, cap, master_seed, r)
        for r in range(reps)
    ]
    results = _map_ordered(_hitting_worker, jobs, workers)
    samples = np.array([steps for _, steps, _ in results], dtype=np.int64)
    hits = np.array([hit for _, _, hit in results], dtype=bool)
    return TrialSummary.from_samples(samples, hits, master_seed, cap)


def estimate_coalescence(
    params: ModelParams,
    reps: int,
    master_seed: int,
    cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
) -> tuple[TrialSummary, TvSeries]:
    """Grand-coupling coalescence times from the extreme starts, plus the
    induced upper-bound curve P(coalescence > t) for the worst-start total
    variation of the full dynamics."""
    if reps < 2:
        raise DomainError("need at least two replicates")
    jobs = [(params.n, params.beta, cap, master_seed, r) for r in range(reps)]
    results = _map_ordered(_coalescence_worker, jobs, workers)
    samples = np.array([steps for _, steps, _ in results], dtype=np.int64)
    hits = np.array([hit for _, _, hit in results], dtype=bool)
    summary = TrialSummary.from_samples(samples, hits, master_seed, cap)
    times = np.concatenate(([0], np.unique(samples)))
    values = np.array([(samples > t).mean() for t in times])
    return summary, TvSeries(times=times, values=values)


def one_step_move_counts(state: SimState, n_samples: int) -> dict[int, int]:
    """Empirical one-step move counts of the plus count from a fixed state.

    Exercises the real step() path; the flipped site (if any) is restored
    after each draw so all samples come from the same kernel row.
    """
    counts = {-1: 0, 0: 0, 1: 0}
    for _ in range(n_samples):
        before = state.config.plus_count
        step(state)
        delta = state.config.plus_count - before
        counts[delta] += 1
        if delta:
            state.config.set_spin(state.last_site, -1 if delta > 0 else 1)
    return counts


def one_step_censored_move_counts(state: SimState, n_samples: int) -> dict[int, int]:
    """Empirical one-step move counts of the observed magnetization (in units
    of 2/n) for the censored dynamics, from a fixed state."""
    n = state.params.n
    counts = {-1: 0, 0: 0, 1: 0}
    base_flipped = state.flipped
    m0 = state.sign * (2 * state.config.plus_count - n)
    for _ in range(n_samples):
        before = state.config.plus_count
        censored_step(state)
        m_obs = state.sign * (2 * state.config.plus_count - n)
        counts[(m_obs - m0) // 2] += 1
        delta = state.config.plus_count - before
        if delta:
            state.config.set_spin(state.last_site, -1 if delta > 0 else 1)
        state.flipped = base_flipped
    return counts
