import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stopsum.errors import BudgetError, ValidationError
from stopsum.lattice import (
    LatticePmf,
    PowerLawSpec,
    TruncationPolicy,
    build_power_law,
    convolve,
    self_convolve,
)
from stopsum.stopsum import (
    StopPolicy,
    StoppedSumResult,
    ratio_curve,
    stopped_max_pmf,
    stopped_sum_pmf,
)


def horner_mixture(x, n, top):
    """Reference evaluation of sum_k P(N=k) X^(*k) on [0, top], done naively."""
    K = n.support_max
    out = np.zeros(top + 1)
    power = np.zeros(top + 1)
    power[0] = 1.0
    for k in range(0, K + 1):
        w = n.at(k)
        if w:
            out += w * power
        nxt = np.convolve(power, np.concatenate(
            [np.zeros(x.offset), x.probs]))[: top + 1]
        power = np.zeros(top + 1)
        power[: len(nxt)] = nxt
    return out


def geom_n(p, kmax):
    k = np.arange(kmax + 1)
    w = (1 - p) * p**k
    return LatticePmf.from_probs(0, w, tail_right=float(p ** (kmax + 1)))


class TestStoppedSum:
    def test_n_zero_point_mass(self):
        x = LatticePmf.uniform(1, 2)
        r = stopped_sum_pmf(x, LatticePmf.point(0), StopPolicy())
        assert r.pmf.at(0) == 1.0
        assert r.truncation_error == 0.0
        assert r.window_error == 0.0

    def test_n_fixed_equals_self_convolve(self):
        x = LatticePmf.uniform(1, 2)
        r = stopped_sum_pmf(x, LatticePmf.point(5), StopPolicy())
        ref = self_convolve(x, 5)
        assert r.pmf.offset == ref.offset
        assert np.array_equal(r.pmf.probs, ref.probs)

    def test_x_unit_recovers_n(self):
        x = LatticePmf.point(1)
        n = geom_n(0.5, 20)
        r = stopped_sum_pmf(x, n, StopPolicy())
        for k in range(0, 21):
            assert r.pmf.at(k) == pytest.approx(n.at(k), abs=1e-16)
        assert r.truncation_error == pytest.approx(n.tail_right)

    def test_small_k_matches_naive_horner(self):
        x = LatticePmf.from_probs(1, [0.5, 0.3, 0.2])
        n = geom_n(0.6, 30)
        r = stopped_sum_pmf(x, n, StopPolicy())
        ref = horner_mixture(x, n, r.pmf.support_max)
        got = np.zeros_like(ref)
        got[r.pmf.offset:] = r.pmf.probs
        np.testing.assert_allclose(got, ref, atol=1e-14)

    def test_bsgs_matches_naive_horner(self):
        # cutoff above 64 forces the block path
        x = LatticePmf.from_probs(1, [0.7, 0.2, 0.1])
        n = geom_n(0.85, 200)
        r = stopped_sum_pmf(x, n, StopPolicy(window=120))
        ref = horner_mixture(x, n, 120)
        got = np.zeros(121)
        got[r.pmf.offset: r.pmf.support_max + 1] = r.pmf.probs
        np.testing.assert_allclose(got, ref, atol=5e-14)

    def test_bsgs_equals_forced_direct(self):
        x = LatticePmf.from_probs(1, [0.4, 0.35, 0.25])
        n = geom_n(0.8, 150)
        fast = stopped_sum_pmf(x, n, StopPolicy(window=100))
        slow = stopped_sum_pmf(x, n, StopPolicy(window=100, force_direct=True))
        assert fast.pmf.offset == slow.pmf.offset
        np.testing.assert_allclose(fast.pmf.probs, slow.pmf.probs, atol=1e-14)

    def test_window_termination_is_exact(self):
        # X >= 1, so only the first `top` summands can land inside the window:
        # the windowed run must agree with an untruncated-N full computation
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.5, 400)
        win = stopped_sum_pmf(x, n, StopPolicy(window=12))
        assert win.window_error == 0.0
        assert win.n_cutoff <= 13
        full = stopped_sum_pmf(x, n, StopPolicy())
        for t in range(0, 13):
            assert win.pmf.at(t) == pytest.approx(full.pmf.at(t), abs=1e-15)

    def test_mass_accounting(self):
        x = LatticePmf.uniform(1, 3)
        n = geom_n(0.7, 80)
        r = stopped_sum_pmf(x, n, StopPolicy(window=40))
        p = r.pmf
        assert p.mass() + p.tail_mass == pytest.approx(1.0, abs=1e-12)
        assert p.tail_right >= r.truncation_error - 1e-15

    def test_truncation_error_lower_bound(self):
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.5, 100)
        r = stopped_sum_pmf(x, n, StopPolicy(n_max=10))
        beyond = float(np.sum(n.probs[11:])) + n.tail_right
        assert r.truncation_error >= beyond - 1e-16
        assert r.n_cutoff == 10

    def test_refinement_monotone(self):
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.9, 500)
        lo = stopped_sum_pmf(x, n, StopPolicy(n_max=20, window=60))
        hi = stopped_sum_pmf(x, n, StopPolicy(n_max=60, window=60))
        for t in range(0, 61):
            assert hi.pmf.at(t) >= lo.pmf.at(t) - 1e-18
        assert hi.truncation_error <= lo.truncation_error

    def test_tail_target_resolves_cutoff(self):
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.5, 300)
        r = stopped_sum_pmf(x, n, StopPolicy(tail_target=1e-9))
        assert r.truncation_error <= 1e-9
        assert r.n_cutoff < 300

    def test_unreachable_tail_target_raises(self):
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.5, 10)  # tail beyond 10 is ~1e-3, cannot go below that
        with pytest.raises(BudgetError):
            stopped_sum_pmf(x, n, StopPolicy(tail_target=1e-12))

    def test_negative_x_support_rejected(self):
        x = LatticePmf.uniform(-1, 1)
        with pytest.raises(ValidationError):
            stopped_sum_pmf(x, LatticePmf.point(2), StopPolicy())

    @given(
        seed=st.integers(0, 5000),
        xlen=st.integers(1, 4),
        xoff=st.integers(0, 2),
        klen=st.integers(1, 6),
    )
    @settings(max_examples=40, deadline=None)
    def test_direct_expectation_small_cases(self, seed, xlen, xoff, klen):
        rng = np.random.default_rng(seed)
        xv = rng.random(xlen) + 1e-3
        x = LatticePmf.from_probs(xoff, xv / xv.sum())
        nv = rng.random(klen) + 1e-3
        n = LatticePmf.from_probs(0, nv / nv.sum())
        r = stopped_sum_pmf(x, n, StopPolicy())
        # brute force: sum_k P(N=k) * k-fold convolution
        top = r.pmf.support_max
        ref = np.zeros(top + 1)
        for k in range(klen):
            w = n.at(k)
            pk = self_convolve(x, k)
            for t, v in zip(pk.support_values(), pk.probs):
                if 0 <= t <= top:
                    ref[t] += w * v
        got = np.zeros(top + 1)
        got[r.pmf.offset:] = r.pmf.probs
        np.testing.assert_allclose(got, ref, atol=1e-13)
        assert r.pmf.mass() + r.pmf.tail_mass == pytest.approx(1.0, abs=1e-12)


class TestStoppedMax:
    def test_fixed_two_uniform(self):
        x = LatticePmf.uniform(1, 2)
        r = stopped_max_pmf(x, LatticePmf.point(2), StopPolicy())
        assert r.pmf.at(2) == pytest.approx(0.75, abs=1e-15)
        assert r.pmf.at(1) == pytest.approx(0.25, abs=1e-15)

    def test_empty_max_is_zero(self):
        x = LatticePmf.uniform(1, 2)
        n = LatticePmf.from_probs(0, [0.3, 0.0, 0.7])
        r = stopped_max_pmf(x, n, StopPolicy())
        assert r.pmf.at(0) == pytest.approx(0.3, abs=1e-15)
        assert r.pmf.at(2) == pytest.approx(0.7 * (1 - 0.25), abs=1e-15)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        xv = rng.random(4) + 0.1
        x = LatticePmf.from_probs(1, xv / xv.sum())
        nv = rng.random(5) + 0.1
        n = LatticePmf.from_probs(0, nv / nv.sum())
        r = stopped_max_pmf(x, n, StopPolicy())
        cdf_x = np.cumsum(np.concatenate([[0.0], xv / xv.sum()]))
        for t in range(0, 5):
            want = sum(n.at(k) * cdf_x[min(t, 4)] ** k for k in range(5))
            got = sum(r.pmf.at(s) for s in range(0, t + 1))
            assert got == pytest.approx(want, abs=1e-13)

    def test_mass_accounting_with_truncation(self):
        x = LatticePmf.uniform(1, 5)
        n = geom_n(0.6, 50)
        r = stopped_max_pmf(x, n, StopPolicy(n_max=12, window=4))
        p = r.pmf
        assert p.mass() + p.tail_mass == pytest.approx(1.0, abs=1e-12)
        assert r.truncation_error >= float(np.sum(n.probs[13:]))


class TestRatioCurve:
    def test_perfect_predictor(self):
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.5, 200)
        r = stopped_sum_pmf(x, n, StopPolicy(window=30))
        assert r.window_error == 0.0
        grid = [5, 10, 20]
        rows = ratio_curve(r, lambda t: r.pmf.at(t), grid)
        assert [row["t"] for row in rows] == grid
        for row in rows:
            assert row["ratio"] == pytest.approx(1.0, abs=1e-15)
            assert row["error_budget"] == 0.0

    def test_budget_violation_raises(self):
        # X charges 0, so the window can never terminate the series and the
        # truncated tail mass stays as an honest window error
        x = LatticePmf.from_probs(0, [0.5, 0.5])
        n = geom_n(0.9, 40)
        r = stopped_sum_pmf(x, n, StopPolicy(window=30))
        assert r.window_error > 0.0
        with pytest.raises(BudgetError):
            ratio_curve(r, lambda t: 1e-30, [5, 10])

    def test_nonpositive_predictor_rejected(self):
        x = LatticePmf.uniform(1, 2)
        n = geom_n(0.5, 100)
        r = stopped_sum_pmf(x, n, StopPolicy(window=20))
        with pytest.raises(ValidationError):
            ratio_curve(r, lambda t: 0.0, [5])


class TestPowerLawIntegration:
    def test_heavy_tail_inflates_stopped_tail(self):
        xspec = PowerLawSpec(alpha=2.5)
        x = build_power_law(xspec, TruncationPolicy(t_max=2000))
        nspec = PowerLawSpec(alpha=3.5)
        n = build_power_law(nspec, TruncationPolicy(t_max=500))
        n = LatticePmf.from_probs(n.offset, n.probs, tail_right=n.tail_right,
                                  spec=n.spec)
        r = stopped_sum_pmf(x, n, StopPolicy(window=400))
        p = r.pmf
        assert p.mass() + p.tail_mass == pytest.approx(1.0, abs=1e-11)
        # stopped-sum tail beyond the window dominates the one-step tail
        one = sum(x.at(t) for t in range(401, 2001)) + x.tail_right
        assert p.tail_right > one
