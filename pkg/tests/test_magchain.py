import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glauberlab import magchain as mc
from glauberlab.model import ConsistencyError, DomainError, ModelParams

from test_model import brute_class_probs


def dense_kernel(chain: mc.MagChain) -> np.ndarray:
    m = chain.n_states
    T = np.zeros((m, m))
    for j in range(m):
        T[j, j] = chain.h[j]
        if j + 1 < m:
            T[j, j + 1] = chain.p[j]
        if j > 0:
            T[j, j - 1] = chain.q[j]
    return T


KERNEL_GRID = [(n, beta) for n in (2, 5, 10, 101, 2000) for beta in (0.0, 0.5, 0.9, 1.0, 1.2, 1.5)]


class TestFreeKernel:
    @pytest.mark.parametrize("n,beta", KERNEL_GRID)
    def test_invariants(self, n, beta):
        chain = mc.build_kernel(ModelParams(n, beta))
        assert np.max(np.abs(chain.p + chain.q + chain.h - 1.0)) <= 1e-14
        assert chain.q[0] == 0.0 and chain.p[-1] == 0.0
        # spin-flip symmetry, bit-exact by construction
        assert np.array_equal(chain.p, chain.q[::-1])
        # holding bounds
        assert np.all(chain.h >= 0.5 - 2.0 * beta / n - 1e-15)
        assert np.all(chain.h <= 0.5 * (1.0 + math.tanh(beta)) + 1e-15)
        # monotone-kernel condition
        assert np.all(chain.p[:-1] + chain.q[1:] <= 1.0 + 1e-14)

    def test_two_site_infinite_temperature(self):
        chain = mc.build_kernel(ModelParams(2, 0.0))
        j = chain.state_index(0.0)
        assert (chain.p[j], chain.q[j], chain.h[j]) == (0.25, 0.25, 0.5)

    def test_boundary_up_probability_vanishes(self):
        for n, beta in ((5, 0.3), (40, 1.4)):
            chain = mc.build_kernel(ModelParams(n, beta))
            assert chain.p[chain.top_index()] == 0.0

    @pytest.mark.parametrize("n", [10, 100, 1000])
    @pytest.mark.parametrize("beta", [0.5, 0.9, 1.0, 1.3])
    def test_drift_identity(self, n, beta):
        chain = mc.build_kernel(ModelParams(n, beta))
        assert mc.drift_identity_gap(chain) <= 1e-14

    def test_state_index_rounding(self):
        chain = mc.build_kernel(ModelParams(10, 1.0))
        assert chain.state_index(1.0) == 10
        assert chain.state_index(-1.0) == 0
        assert chain.state_index(0.09) == 5  # nearest is 0.0 at index 5
        assert chain.state_index(0.11) == 6


class TestCensoredKernel:
    @pytest.mark.parametrize("n,beta", [(6, 1.5), (7, 1.2), (10, 0.8), (11, 1.4), (100, 1.3)])
    def test_rows_sum_to_one(self, n, beta):
        chain = mc.build_censored_kernel(ModelParams(n, beta))
        assert np.max(np.abs(chain.p + chain.q + chain.h - 1.0)) <= 1e-14
        assert chain.q[0] == 0.0

    def test_even_boundary_reroutes_down_move(self):
        n, beta = 8, 1.1
        free = mc.build_kernel(ModelParams(n, beta))
        cens = mc.build_censored_kernel(ModelParams(n, beta))
        k0 = n // 2
        assert cens.p[0] == free.p[k0] + free.q[k0]
        assert cens.h[0] == free.h[k0]

    def test_odd_boundary_folds_into_holding(self):
        n, beta = 9, 1.1
        free = mc.build_kernel(ModelParams(n, beta))
        cens = mc.build_censored_kernel(ModelParams(n, beta))
        k0 = (n + 1) // 2
        assert cens.h[0] == free.h[k0] + free.q[k0]
        assert cens.p[0] == free.p[k0]

    @pytest.mark.parametrize("n,beta", [(6, 1.5), (7, 1.2), (11, 1.4)])
    def test_stationary_matches_power_iteration(self, n, beta):
        chain = mc.build_censored_kernel(ModelParams(n, beta))
        T = dense_kernel(chain)
        dist = np.full(chain.n_states, 1.0 / chain.n_states)
        for _ in range(100_000):
            dist = dist @ T
        pi = mc.stationary(chain)
        assert np.max(np.abs(dist - pi.probabilities)) < 1e-10


class TestStationary:
    def test_beta_zero_binomial(self):
        pi = mc.stationary(mc.build_kernel(ModelParams(8, 0.0)))
        expected = np.array([math.comb(8, k) for k in range(9)]) / 2.0**8
        assert np.max(np.abs(pi.probabilities - expected)) < 1e-14

    @pytest.mark.parametrize("n,beta", [(7, 0.9), (10, 1.2), (301, 1.0)])
    def test_symmetry(self, n, beta):
        pi = mc.stationary(mc.build_kernel(ModelParams(n, beta))).probabilities
        assert np.max(np.abs(pi - pi[::-1])) < 1e-13

    def test_two_site_critical(self):
        pi = mc.stationary(mc.build_kernel(ModelParams(2, 1.0))).probabilities
        assert abs(pi[0] - 0.3655292893150025) < 1e-12
        assert abs(pi[1] - 0.26894142136999516) < 1e-12

    @pytest.mark.parametrize("n", [4, 6, 9])
    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 1.5])
    def test_brute_force(self, n, beta):
        pi = mc.stationary(mc.build_kernel(ModelParams(n, beta))).probabilities
        assert np.max(np.abs(pi - brute_class_probs(n, beta))) < 1e-12

    @pytest.mark.parametrize("kind", ["free", "censored"])
    def test_detailed_balance(self, kind):
        for n, beta in ((50, 0.8), (101, 1.3), (2000, 1.5)):
            build = mc.build_kernel if kind == "free" else mc.build_censored_kernel
            chain = build(ModelParams(n, beta))
            log_pi = mc.stationary(chain).log_p
            lhs = log_pi[:-1] + np.log(chain.p[:-1])
            rhs = log_pi[1:] + np.log(chain.q[1:])
            assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_dual_route_deviation_large_n(self):
        _, dev = mc.stationary(
            mc.build_kernel(ModelParams(100_000, 1.25)), return_deviation=True
        )
        assert dev <= 1e-10

    def test_route_mismatch_raises(self):
        chain = mc.build_kernel(ModelParams(20, 0.7))
        broken = mc.MagChain(
            params=chain.params, kind=chain.kind, k_offset=0,
            p=chain.p * 1.001, q=chain.q, h=chain.h, states=chain.states,
        )
        with pytest.raises(ConsistencyError):
            mc.stationary(broken)


class TestTvCurveAndMixing:
    def test_initial_distance_from_top(self):
        chain = mc.build_kernel(ModelParams(30, 0.7))
        pi = mc.stationary(chain)
        series = mc.tv_curve(chain, chain.top_index(), 5, pi=pi)
        assert abs(series.values[0] - (1.0 - pi.probabilities[-1])) < 1e-14

    @pytest.mark.parametrize("n,beta,kind", [(60, 0.8, "free"), (61, 1.2, "free"), (80, 1.3, "censored")])
    def test_non_increasing(self, n, beta, kind):
        build = mc.build_kernel if kind == "free" else mc.build_censored_kernel
        chain = build(ModelParams(n, beta))
        series = mc.tv_curve(chain, chain.top_index(), 800)
        series.check()

    def test_matches_dense_matrix_power(self):
        chain = mc.build_kernel(ModelParams(25, 1.1))
        pi = mc.stationary(chain)
        T = dense_kernel(chain)
        dist = np.zeros(chain.n_states)
        dist[-1] = 1.0
        series = mc.tv_curve(chain, chain.top_index(), 60, pi=pi)
        for t in range(61):
            assert abs(series.values[t] - 0.5 * np.abs(dist - pi.probabilities).sum()) < 1e-13
            dist = dist @ T

    def test_shoulder_location_example(self):
        # d at the reference time sits mid-transition (frozen from the exact curve)
        params = ModelParams(200, 0.8)
        chain = mc.build_kernel(params)
        t_ref = int((params.n / (2 * params.delta)) * math.log(params.delta**2 * params.n))
        series = mc.tv_curve(chain, chain.top_index(), t_ref)
        assert 0.05 < series.values[-1] < 0.95

    def test_mixing_time_trivial_and_monotone(self):
        chain = mc.build_kernel(ModelParams(40, 0.9))
        pi = mc.stationary(chain)
        d0 = mc.tv_distance(mc._start_distribution(chain, chain.top_index()), pi.probabilities)
        assert mc.mixing_time(chain, chain.top_index(), 0.5 * (d0 + 1.0), pi=pi).steps == 0
        t_strict = mc.mixing_time(chain, chain.top_index(), 0.1, pi=pi)
        t_loose = mc.mixing_time(chain, chain.top_index(), 0.4, pi=pi)
        assert t_strict.steps >= t_loose.steps

    def test_mixing_time_crossing_is_exact(self):
        chain = mc.build_kernel(ModelParams(150, 0.85))
        pi = mc.stationary(chain)
        res = mc.mixing_time(chain, chain.top_index(), 0.25, pi=pi)
        series = mc.tv_curve(chain, chain.top_index(), res.steps, pi=pi)
        assert series.values[-1] <= 0.25 < series.values[-2]

    def test_mixing_time_agrees_with_crossings(self):
        chain = mc.build_censored_kernel(ModelParams(120, 1.3))
        pi = mc.stationary(chain)
        for eps in (0.5, 0.25, 0.1):
            a = mc.mixing_time(chain, 0, eps, pi=pi).steps
            b = mc.tv_crossings(chain, 0, [eps], pi=pi)[eps]
            assert a == b

    def test_subcritical_location_example(self):
        # frozen value of the exact doubling/bisection search at n=1000, beta=0.8;
        # the reference scale (n/2 delta) log(delta^2 n) = 9222 sits one window
        # below it at this size
        chain = mc.build_kernel(ModelParams(1000, 0.8))
        res = mc.mixing_time(chain, chain.top_index(), 0.25)
        assert not res.lower_bound_only
        assert res.steps == 14011

    def test_cap_returns_lower_bound_marker(self):
        chain = mc.build_kernel(ModelParams(400, 1.3))
        res = mc.mixing_time(chain, chain.top_index(), 0.1, cap=500)
        assert res.lower_bound_only and res.steps == 500

    def test_domain_errors(self):
        chain = mc.build_kernel(ModelParams(10, 0.5))
        with pytest.raises(DomainError):
            mc.mixing_time(chain, 0, 0.0)
        with pytest.raises(DomainError):
            mc.tv_curve(chain, 0, -1)


class TestSurvival:
    def test_start_not_absorbed(self):
        chain = mc.build_kernel(ModelParams(12, 0.9))
        assert mc.survival_tau0(chain, 0) == 1.0

    def test_non_increasing(self):
        chain = mc.build_kernel(ModelParams(100, 0.9))
        sv = mc.survival_curve(chain, [0, 5, 50, 500, 2000])
        assert np.all(np.diff(sv) <= 1e-15)

    def test_absorbing_set_by_parity(self):
        even = mc.build_kernel(ModelParams(10, 0.5))
        odd = mc.build_kernel(ModelParams(11, 0.5))
        assert list(mc._absorbing_indices(even)) == [5]
        assert list(mc._absorbing_indices(odd)) == [5, 6]

    def test_survival_tail_ordering(self):
        params = ModelParams(1000, 0.9)
        chain = mc.build_kernel(params)
        ts = [mc.t_n(g, params) for g in (1.0, 4.0, 16.0)]
        sv = mc.survival_curve(chain, ts)
        assert sv[2] < sv[1] < sv[0]
        assert sv[2] <= 0.75

    def test_requested_order_is_preserved(self):
        chain = mc.build_kernel(ModelParams(60, 0.9))
        fwd = mc.survival_curve(chain, [10, 200, 700])
        rev = mc.survival_curve(chain, [700, 10, 200])
        assert np.array_equal(fwd, rev[[1, 2, 0]])

    def test_censored_chain_rejected(self):
        with pytest.raises(DomainError):
            mc.survival_tau0(mc.build_censored_kernel(ModelParams(10, 1.2)), 5)


class TestTn:
    def test_branches(self):
        sub = ModelParams(1000, 0.9)
        assert mc.t_n(1.0, sub) == math.ceil(5000 * math.log(10.0) + 4e4)
        crit = ModelParams(1000, 1.0)
        assert mc.t_n(1.0, crit) == math.ceil((200 + 6) * 1000**1.5)
        # supercritical side of the window: same critical branch, delta signed
        near = ModelParams(400, 1.02)
        d2n = (1.0 - 1.02) ** 2 * 400
        expect = (200 + 6 * 2.0 * (1 + 6 * math.sqrt(d2n))) * 400**1.5
        assert mc.t_n(2.0, near) == math.ceil(expect)

    def test_gamma_positive(self):
        with pytest.raises(DomainError):
            mc.t_n(0.0, ModelParams(100, 0.9))


class TestQuantileAndMoments:
    def test_quantile_bottom_state(self):
        pi = mc.stationary(mc.build_kernel(ModelParams(16, 0.5)))
        assert mc.quantile_state(pi, 1e-12) == 0

    @given(alphas=st.lists(st.floats(0.01, 0.99), min_size=2, max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_quantile_monotone(self, alphas):
        pi = mc.stationary(mc.build_kernel(ModelParams(30, 1.1)))
        alphas = sorted(alphas)
        idx = [mc.quantile_state(pi, a) for a in alphas]
        assert all(b >= a for a, b in zip(idx, idx[1:]))

    def test_quantile_median_straddles_center(self):
        chain = mc.build_kernel(ModelParams(20, 0.9))
        pi = mc.stationary(chain)
        center = chain.state_index(0.0)
        q_half = mc.quantile_state(pi, 0.5)
        assert q_half <= center
        assert mc.quantile_state(pi, 0.5 + pi.probabilities[center]) >= center

    def test_mean_zero_by_symmetry(self):
        pi = mc.stationary(mc.build_kernel(ModelParams(64, 1.2)))
        assert abs(mc.stationary_mean(pi)) < 1e-14

    @pytest.mark.parametrize("n", [50, 500])
    @pytest.mark.parametrize("beta", [0.0, 0.5, 0.9, 1.0])
    def test_variance_lower_bound(self, n, beta):
        # positive spin correlation; equality at beta = 0, so allow one ulp
        pi = mc.stationary(mc.build_kernel(ModelParams(n, beta)))
        assert mc.stationary_variance(pi) >= 1.0 / n - 1e-15

    def test_fourth_moment_bound(self):
        params = ModelParams(500, 0.5)
        pi = mc.stationary(mc.build_kernel(params))
        s2 = mc.stationary_moment(pi, 2)
        s4 = mc.stationary_moment(pi, 4)
        assert s4 <= (3.0 + 4.0 / params.n) * s2 / (params.n * params.delta)

    def test_moment_domain(self):
        pi = mc.stationary(mc.build_kernel(ModelParams(10, 0.5)))
        with pytest.raises(DomainError):
            mc.stationary_moment(pi, 0.5)


class TestSupercriticalProfile:
    @pytest.mark.parametrize("n,beta", [(500, 1.2), (223, 1.3), (90, 1.5), (2000, 1.1)])
    def test_bimodal_modes_near_zeta(self, n, beta):
        from glauberlab.electric import zeta

        params = ModelParams(n, beta)
        assert params.delta**2 * n >= 20 - 1e-9
        chain = mc.build_kernel(params)
        pi = mc.stationary(chain)
        modes = mc.local_maxima(pi)
        assert len(modes) == 2
        z = zeta(beta)
        for i in modes:
            assert min(abs(chain.states[i] - z), abs(chain.states[i] + z)) <= 4.0 / n + 1e-12

    @pytest.mark.parametrize("n,beta", [(200, 1.1), (500, 1.2), (300, 1.3), (150, 1.5)])
    def test_upper_well_mass(self, n, beta):
        from glauberlab.electric import zeta

        chain = mc.build_kernel(ModelParams(n, beta))
        pi = mc.stationary(chain)
        assert pi.probabilities[chain.state_index(zeta(beta)) :].sum() >= 0.05

    @pytest.mark.parametrize("n,beta", [(60, 1.3), (61, 1.2)])
    def test_censored_worst_start_is_an_extreme(self, n, beta):
        # the worst-case distance of the censored chain is attained by one of
        # the two extreme starts at every time (the bottom start dominates
        # late); this backs the worst-case mixing measurement
        chain = mc.build_censored_kernel(ModelParams(n, beta))
        pi = mc.stationary(chain)
        t_max = 4 * n
        curves = np.array(
            [mc.tv_curve(chain, i, t_max, record_every=5, pi=pi).values
             for i in range(chain.n_states)]
        )
        extremes = np.maximum(curves[0], curves[-1])
        assert np.max(curves.max(axis=0) - extremes) <= 1e-12


class TestSerialization:
    def test_probvector_csv_roundtrip(self):
        pi = mc.stationary(mc.build_kernel(ModelParams(40, 1.2)))
        text = pi.to_csv()
        states, values = mc.ProbVector.read_csv(io.StringIO(text))
        assert np.array_equal(states, pi.states)
        assert np.array_equal(values, pi.probabilities)

    def test_tvseries_csv_roundtrip(self):
        chain = mc.build_kernel(ModelParams(30, 0.8))
        series = mc.tv_curve(chain, chain.top_index(), 20)
        times, values = mc.TvSeries.read_csv(io.StringIO(series.to_csv()))
        assert np.array_equal(times, series.times)
        assert np.array_equal(values, series.values)

    def test_json_dict_roundtrip(self):
        import json

        pi = mc.stationary(mc.build_kernel(ModelParams(12, 0.9)))
        blob = json.loads(json.dumps(pi.to_json_dict()))
        assert np.array_equal(np.array(blob["value"]), pi.probabilities)

    def test_point_mass_and_check(self):
        pv = mc.ProbVector.point_mass(2, 5)
        pv.check()
        assert pv.probabilities[2] == 1.0
        with pytest.raises(DomainError):
            mc.ProbVector.from_probabilities([-0.1, 1.1])
