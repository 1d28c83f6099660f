"""Acceptance suite: every release gate as an executable check.

Each check pins its grid and tolerance here; nothing is deferred to later
calibration.  Exact-identity checks assert equalities to floating tolerance;
trend checks compare ratios across an n-grid (the underlying scaling laws are
asymptotic, so no absolute constant is asserted at fixed n).

verify() runs a selection and writes one pass/fail line per check.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import chi2

from . import electric as el
from . import magchain as mc
from . import simulate as sim
from . import spectral as sp
from .harness import RunReport, _env_stamp, _verdict, limit_law_distance
from .model import ConsistencyError, ModelParams


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float
    records: list[dict] = field(default_factory=list)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name} ({self.seconds:.1f}s): {self.detail}"


def _result(name: str, t0: float, passed: bool, detail: str, records=None) -> CheckResult:
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0, records or [])


# ---------------------------------------------------------------------------


def check_allplus_equivalence() -> CheckResult:
    """Full-dynamics TV from all-plus equals the magnetization-chain TV at
    every step, on n in {4, 6, 8, 10} x beta in {0.5, 1.0, 1.3}."""
    t0 = time.perf_counter()
    worst = 0.0
    for n in (4, 6, 8, 10):
        for beta in (0.5, 1.0, 1.3):
            params = ModelParams(n, beta)
            t_max = int(5 * n * math.log(n))
            full = sp.full_tv_from_allplus(params, t_max)
            chain = mc.build_kernel(params)
            mag = mc.tv_curve(chain, chain.top_index(), t_max)
            worst = max(worst, float(np.max(np.abs(full.values - mag.values))))
    return _result(
        "allplus-equivalence", t0, worst <= 1e-12, f"max |TV_full - TV_mag| = {worst:.2e} (<= 1e-12)"
    )


def check_gap_equality() -> CheckResult:
    """Spectral gap of the 2^n dynamics equals the magnetization-chain gap."""
    t0 = time.perf_counter()
    worst = 0.0
    for n in (4, 6, 8, 10):
        for beta in (0.5, 1.0, 1.3):
            params = ModelParams(n, beta)
            g_full = sp.full_dynamics_gap(params)
            g_mag = sp.chain_gap(mc.build_kernel(params))
            worst = max(worst, abs(g_full.gap - g_mag.gap))
    return _result(
        "gap-equality", t0, worst <= 1e-8, f"max |gap_full - gap_mag| = {worst:.2e} (<= 1e-8)"
    )


def check_stationary_crosscheck() -> CheckResult:
    """Detailed-balance route vs Gibbs route for the stationary law, up to
    n = 1e5 across beta in [0, 1.5]."""
    t0 = time.perf_counter()
    worst = 0.0
    failed = []
    for n in (10, 100, 1000, 10_000, 100_000):
        for beta in (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5):
            try:
                _, dev = mc.stationary(
                    mc.build_kernel(ModelParams(n, beta)), return_deviation=True
                )
                worst = max(worst, dev)
            except ConsistencyError as exc:
                failed.append((n, beta, str(exc)))
    passed = not failed and worst <= 1e-10
    detail = f"max log-domain deviation = {worst:.2e} (<= 1e-10)"
    if failed:
        detail += f"; failures: {failed}"
    return _result("stationary-crosscheck", t0, passed, detail)


def check_drift_identity() -> CheckResult:
    """One-step conditional-mean identity, exact per state to 1e-14."""
    t0 = time.perf_counter()
    worst = 0.0
    for n in (10, 100, 1000):
        for beta in (0.5, 0.9, 1.0, 1.3):
            worst = max(worst, mc.drift_identity_gap(mc.build_kernel(ModelParams(n, beta))))
    return _result(
        "drift-identity", t0, worst <= 1e-14, f"max per-state deviation = {worst:.2e} (<= 1e-14)"
    )


def check_commute_oracle() -> CheckResult:
    """Ladder recurrence vs vertex-weight network identity for commute times,
    and the path decomposition E_zeta tau_{-zeta} = C_{0, zeta}."""
    t0 = time.perf_counter()
    worst_net = 0.0
    worst_path = 0.0
    for n in (20, 60, 100, 140, 200):
        for beta in (1.1, 1.2, 1.3, 1.5):
            params = ModelParams(n, beta)
            chain = mc.build_kernel(params)
            pi = mc.stationary(chain)
            net = el.network(chain)
            z = el.zeta(beta)
            i0, iz, imz = chain.ref_index, chain.state_index(z), chain.state_index(-z)
            com = el.commute_time(chain, i0, iz, net=net, pi=pi)
            worst_net = max(worst_net, abs(math.log(com.ratio_network)))
            h = el.hitting_time(chain, iz, imz, pi=pi)
            worst_path = max(worst_path, abs(h.log_expected - com.log_recurrence))
    passed = worst_net <= 1e-9 and worst_path <= 1e-10
    return _result(
        "commute-oracle",
        t0,
        passed,
        f"max |log(network/recurrence)| = {worst_net:.2e} (<= 1e-9); "
        f"max |log E_z tau_-z - log C_0z| = {worst_path:.2e} (<= 1e-10)",
    )


def check_cutoff_trend() -> CheckResult:
    """Subcritical cutoff location, window and gap at beta = 0.8,
    n in {500, 2000, 8000}."""
    t0 = time.perf_counter()
    beta = 0.8
    locs, wins, gaps, records = [], [], [], []
    for n in (500, 2000, 8000):
        params = ModelParams(n, beta)
        chain = mc.build_kernel(params)
        pi = mc.stationary(chain)
        cr = mc.tv_crossings(chain, chain.top_index(), [0.9, 0.75, 0.25, 0.1], pi=pi)
        d = params.delta
        point = (n / (2 * d)) * math.log(d * d * n)
        locs.append(cr[0.25] / point)
        wins.append((cr[0.1] - cr[0.9]) * d / n)
        gaps.append(sp.chain_gap(chain).gap * n / d)
        records.append({"n": n, "crossings": {f"{e:g}": t for e, t in cr.items()}})
    band = 0.7 <= locs[-1] <= 1.3
    approach = all(abs(b - 1) < abs(a - 1) for a, b in zip(locs, locs[1:]))
    window_ok = max(wins) / min(wins) <= 2.0
    gap_ok = 0.8 <= gaps[-1] <= 1.25
    passed = band and approach and window_ok and gap_ok
    detail = (
        f"location ratios {[f'{v:.4f}' for v in locs]} (band at n=8000: {band}, "
        f"approach to 1: {approach}); window*delta/n {[f'{v:.4f}' for v in wins]} "
        f"(factor {max(wins)/min(wins):.3f} <= 2: {window_ok}); gap*n/delta at n=8000 = "
        f"{gaps[-1]:.4f} (in [0.8, 1.25]: {gap_ok})"
    )
    return _result("cutoff-trend", t0, passed, detail, records)


def check_critical_scaling() -> CheckResult:
    """Mixing and gap scaling at beta = 1 over n in {256, 512, 1024, 2048}."""
    t0 = time.perf_counter()
    tms, gps, gtm = [], [], []
    for n in (256, 512, 1024, 2048):
        params = ModelParams(n, 1.0)
        chain = mc.build_kernel(params)
        pi = mc.stationary(chain)
        tq = mc.tv_crossings(chain, chain.top_index(), [0.25], pi=pi)[0.25]
        gap = sp.chain_gap(chain).gap
        tms.append(tq / n**1.5)
        gps.append(gap * n**1.5)
        gtm.append(gap * tq)
    rt = [b / a for a, b in zip(tms, tms[1:])]
    rg = [b / a for a, b in zip(gps, gps[1:])]
    ok_t = all(0.75 <= r <= 1.33 for r in rt)
    ok_g = all(0.75 <= r <= 1.33 for r in rg)
    ok_band = max(gtm) / min(gtm) <= 1.5
    passed = ok_t and ok_g and ok_band
    detail = (
        f"t_mix/n^1.5 successive ratios {[f'{r:.4f}' for r in rt]} (ok: {ok_t}); "
        f"gap*n^1.5 successive ratios {[f'{r:.4f}' for r in rg]} (ok: {ok_g}); "
        f"gap*t_mix factor {max(gtm)/min(gtm):.3f} (<= 1.5: {ok_band})"
    )
    return _result("critical-scaling", t0, passed, detail)


def check_limit_law() -> CheckResult:
    """Rescaled stationary law against the quartic limiting density."""
    t0 = time.perf_counter()
    d256 = limit_law_distance(256, 0.0)
    d4096 = limit_law_distance(4096, 0.0)
    passed = d4096 < 0.15 and d4096 < d256
    return _result(
        "limit-law", t0, passed, f"L1(n=256) = {d256:.4f}, L1(n=4096) = {d4096:.4f} (< 0.15 and decreasing)"
    )


def check_supercritical_order() -> CheckResult:
    """Hitting time from all-plus to -zeta against the exponential scale at
    beta = 1.3, plus the small-delta exponent."""
    t0 = time.perf_counter()
    beta = 1.3
    rats = []
    for n in (40, 80, 160):
        params = ModelParams(n, beta)
        chain = mc.build_kernel(params)
        z = el.zeta(beta)
        h = el.hitting_time(chain, chain.top_index(), chain.state_index(-z))
        tx = el.t_exp(params)
        rats.append(math.exp(h.log_expected - tx.log_value))
    band = max(rats) / min(rats)
    tx = el.t_exp(ModelParams(100, 1.05))
    exponent_ratio = (0.5 * tx.integral) / (0.75 * 0.05**2)
    passed = band <= 3.0 and 0.85 <= exponent_ratio <= 1.15
    detail = (
        f"E_1 tau_-zeta / t_exp = {[f'{r:.3f}' for r in rats]} (factor {band:.3f} <= 3); "
        f"small-delta exponent ratio = {exponent_ratio:.4f} (in [0.85, 1.15])"
    )
    return _result("supercritical-order", t0, passed, detail)


def check_tau0_tail() -> CheckResult:
    """Exact survival of tau_0 at the reference times, beta=0.9, n=1000."""
    t0 = time.perf_counter()
    params = ModelParams(1000, 0.9)
    chain = mc.build_kernel(params)
    gammas = (1.0, 4.0, 16.0)
    ts = [mc.t_n(g, params) for g in gammas]
    sv = mc.survival_curve(chain, ts)
    decreasing = all(b < a for a, b in zip(sv, sv[1:]))
    bounded = all(s <= 3.0 / math.sqrt(g) for s, g in zip(sv, gammas))
    passed = decreasing and bounded
    detail = "; ".join(
        f"gamma={g:g}: P(tau_0 > {t}) = {s:.5f} (<= {3/math.sqrt(g):.3f})"
        for g, t, s in zip(gammas, ts, sv)
    )
    return _result("tau0-tail", t0, passed, detail)


def check_monte_carlo() -> CheckResult:
    """Sampler validity: one-step chi-square against exact kernel rows,
    hitting means within 3 SE of the ladder oracle, and bit-exact rerun
    reproducibility under different worker counts."""
    t0 = time.perf_counter()
    parts = []
    ok = True

    # free one-step law, n=50, beta=0.9, mixed fixed configuration
    params = ModelParams(50, 0.9)
    state = sim.new_state(params, 0.2, master_seed=1234)
    k = state.config.plus_count
    chain = mc.build_kernel(params)
    counts = sim.one_step_move_counts(state, 10**6)
    obs = np.array([counts[-1], counts[0], counts[1]], dtype=float)
    probs = np.array([chain.q[k], chain.h[k], chain.p[k]])
    stat = float(((obs - probs * obs.sum()) ** 2 / (probs * obs.sum())).sum())
    p_free = float(chi2.sf(stat, df=2))
    ok &= p_free > 0.001
    parts.append(f"free chi-square p = {p_free:.4f}")

    # censored one-step law at the reflecting boundary, n=30, beta=1.4
    params_c = ModelParams(30, 1.4)
    state_c = sim.new_state(params_c, 0.0, master_seed=99)
    cchain = mc.build_censored_kernel(params_c)
    counts_c = sim.one_step_censored_move_counts(state_c, 10**6)
    obs_c = np.array([counts_c[0], counts_c[1]], dtype=float)
    probs_c = np.array([cchain.h[0], cchain.p[0]])
    ok &= counts_c[-1] == 0
    stat_c = float(((obs_c - probs_c * obs_c.sum()) ** 2 / (probs_c * obs_c.sum())).sum())
    p_cens = float(chi2.sf(stat_c, df=1))
    ok &= p_cens > 0.001
    parts.append(f"censored chi-square p = {p_cens:.4f}")

    # hitting means vs the exact ladder values
    params = ModelParams(100, 0.9)
    chain = mc.build_kernel(params)
    trial = sim.estimate_hitting(
        params, "all-plus", sim.HittingTarget("abs_le", 1.0 / params.n), reps=200, master_seed=7
    )
    exact = el.hitting_time(chain, chain.top_index(), chain.state_index(0.0)).expected
    z1 = abs(trial.mean - exact) / trial.se
    ok &= trial.valid and z1 <= 3.0
    parts.append(f"tau_0 z-score = {z1:.2f}")

    params = ModelParams(40, 1.3)
    chain = mc.build_kernel(params)
    zeta_state = float(chain.states[chain.state_index(-el.zeta(1.3))])
    trial2 = sim.estimate_hitting(
        params, "all-plus", sim.HittingTarget("le", zeta_state), reps=200, master_seed=11
    )
    exact2 = el.hitting_time(chain, chain.top_index(), chain.state_index(-el.zeta(1.3))).expected
    z2 = abs(trial2.mean - exact2) / trial2.se
    ok &= trial2.valid and z2 <= 3.0
    parts.append(f"tau_-zeta z-score = {z2:.2f}")

    # reproducibility across worker counts
    a = sim.estimate_hitting(
        params, "all-plus", sim.HittingTarget("le", zeta_state), reps=24, master_seed=5, workers=1
    )
    b = sim.estimate_hitting(
        params, "all-plus", sim.HittingTarget("le", zeta_state), reps=24, master_seed=5, workers=3
    )
    same = bool(np.array_equal(a.samples, b.samples)) and a.mean == b.mean and a.seeds == b.seeds
    ok &= same
    parts.append(f"worker-count reproducibility: {same}")

    return _result("monte-carlo", t0, bool(ok), "; ".join(parts))


def check_censored_trend() -> CheckResult:
    """Censored worst-case mixing against the cutoff scale and the gap order,
    beta = 1.3, n in {1000, 4000}.

    The worst-case distance is the maximum over the two extreme starts,
    verified exactly against all starts at small n.
    """
    t0 = time.perf_counter()
    beta = 1.3
    rats, gaps, records = [], [], []
    for n in (1000, 4000):
        params = ModelParams(n, beta)
        chain = mc.build_censored_kernel(params)
        pi = mc.stationary(chain)
        t_top = mc.tv_crossings(chain, chain.top_index(), [0.25], pi=pi)[0.25]
        t_bot = mc.tv_crossings(chain, 0, [0.25], pi=pi)[0.25]
        t_worst = max(t_top, t_bot)
        d = params.delta
        z = el.zeta(beta)
        const = 0.5 + 1.0 / (2.0 * (z * z * beta / d - 1.0))
        tn = const * (n / d) * math.log(d * d * n)
        rats.append(t_worst / tn)
        gaps.append(sp.chain_gap(chain).gap * n / d)
        records.append({"n": n, "t_mix_allplus": t_top, "t_mix_bottom": t_bot, "t_n": tn})
    band = all(0.4 <= r <= 2.5 for r in rats)
    approach = abs(rats[-1] - 1.0) < abs(rats[0] - 1.0)
    gap_ok = all(0.1 <= g <= 10.0 for g in gaps)
    passed = band and approach and gap_ok
    detail = (
        f"worst-start t_mix/t_n = {[f'{r:.4f}' for r in rats]} (band: {band}, closer to 1 at "
        f"larger n: {approach}); gap*n/delta = {[f'{g:.4f}' for g in gaps]} (in [0.1, 10]: {gap_ok})"
    )
    return _result("censored-trend", t0, passed, detail, records)


# ---------------------------------------------------------------------------

CRITERIA: dict[str, Callable[[], CheckResult]] = {
    "allplus-equivalence": check_allplus_equivalence,
    "gap-equality": check_gap_equality,
    "stationary-crosscheck": check_stationary_crosscheck,
    "drift-identity": check_drift_identity,
    "commute-oracle": check_commute_oracle,
    "cutoff-trend": check_cutoff_trend,
    "critical-scaling": check_critical_scaling,
    "limit-law": check_limit_law,
    "supercritical-order": check_supercritical_order,
    "tau0-tail": check_tau0_tail,
    "monte-carlo": check_monte_carlo,
    "censored-trend": check_censored_trend,
}

# the fast suite: every exact oracle-equivalence check
FAST_SUITE = (
    "allplus-equivalence",
    "gap-equality",
    "stationary-crosscheck",
    "drift-identity",
    "commute-oracle",
)


def verify(selectors: Optional[list[str]] = None, stream=None, seed: int = 0) -> RunReport:
    """Run acceptance checks; empty selection runs the fast suite.

    Prints one pass/fail line per check to the stream and returns a report
    whose verdict list mirrors those lines.
    """
    stream = stream if stream is not None else sys.stdout
    names = list(selectors) if selectors else list(FAST_SUITE)
    if names == ["all"]:
        names = list(CRITERIA)
    unknown = [x for x in names if x not in CRITERIA]
    if unknown:
        raise mc.DomainError(f"unknown acceptance suites: {unknown}; known: {list(CRITERIA)}")
    verdicts = []
    records = []
    for name in names:
        result = CRITERIA[name]()
        print(result.line(), file=stream)
        verdicts.append(_verdict(name, result.passed, result.detail))
        records.append(
            {"check": name, "passed": result.passed, "timing_s": result.seconds}
        )
    return RunReport("verify", records, verdicts, _env_stamp(seed))
