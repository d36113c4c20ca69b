import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from stopsum.asym import (
    FLAGS,
    PREDICTORS,
    RegimeInput,
    RegimeReport,
    StableLaw,
    auto_flags,
    predict,
    predict_subcritical,
    sample_stable,
    select_regime,
    stable_cf,
    stable_density,
    stable_density_grid,
    stable_frac_moment,
    stable_frac_moment_exact,
)
from stopsum.errors import BudgetError, DivergentMomentError, ValidationError
from stopsum.lattice import (
    LatticePmf,
    PowerLawSpec,
    TruncationPolicy,
    build_power_law,
)
from stopsum.stopsum import StopPolicy, stopped_sum_pmf


def levy_pdf(z, c):
    """Closed-form one-sided 1/2-stable density, the classical oracle."""
    return math.sqrt(c / (2 * math.pi)) * z**-1.5 * math.exp(-c / (2 * z))


class TestRegimeInput:
    def test_unknown_flag_rejected(self):
        with pytest.raises(ValidationError, match="unknown flags"):
            RegimeInput(alpha=2.5, flags={"EN_finit"})

    def test_alpha_at_most_one_rejected(self):
        with pytest.raises(ValidationError):
            RegimeInput(alpha=1.0)

    def test_gamma_at_most_one_rejected(self):
        with pytest.raises(ValidationError):
            RegimeInput(alpha=2.5, gamma=0.9)

    def test_bad_mu_sign_rejected(self):
        with pytest.raises(ValidationError):
            RegimeInput(alpha=2.5, mu_sign="plus")

    def test_flag_vocabulary_size(self):
        assert len(FLAGS) == 14
        assert "N_moment_1+tau" in FLAGS
        assert "N_moment_1+alpha" in FLAGS


class TestSelectRegime:
    def test_big_jump_example(self):
        r = select_regime(RegimeInput(alpha=2.5, gamma=4.0, flags={"x_nonneg"}))
        assert r.theorem == "Theorem 1(i)"
        assert r.predictor == "single-big-jump"
        assert r.quote == "For γ>α and γ>2 we have"

    def test_dominates_example(self):
        r = select_regime(
            RegimeInput(alpha=4.0, gamma=2.5, mu_sign="positive", flags={"x_nonneg"})
        )
        assert r.theorem == "Theorem 1(ii)"
        assert r.predictor == "stopping-dominates"

    def test_subcritical_example(self):
        r = select_regime(RegimeInput(alpha=1.5, gamma=1.5))
        assert r.theorem == "Theorem 1(iv)"
        assert r.predictor == "subcritical-stable"

    def test_empty_report_lists_unmet(self):
        r = select_regime(RegimeInput(alpha=2.2, gamma=1.5, mu_sign="negative"))
        assert r.empty
        assert r.theorem is None and r.predictor is None
        tags = {tag for tag, _ in r.unmet}
        assert "Theorem 1(i)" in tags and "Theorem 2(iii)" in tags
        by_tag = dict(r.unmet)
        assert "x_nonneg" in by_tag["Theorem 1(i)"]

    def test_alternates_do_not_repeat_primary(self):
        x = PowerLawSpec(alpha=2.5)
        n = PowerLawSpec(alpha=4.0)
        r = select_regime(
            RegimeInput(alpha=2.5, gamma=4.0, mu_sign="positive",
                        flags=auto_flags(x, n))
        )
        assert r.theorem == "Theorem 1(i)"
        seen = {(r.theorem, r.predictor)}
        for alt in r.alternates:
            key = (dict(alt)["theorem"], dict(alt)["predictor"])
            assert key not in seen
            seen.add(key)

    def test_report_serializes(self):
        import json

        r = select_regime(RegimeInput(alpha=1.5, gamma=1.5))
        blob = json.loads(r.to_json())
        assert blob["theorem"] == "Theorem 1(iv)"
        assert blob["predictor"] == "subcritical-stable"
        assert isinstance(blob["unmet"], list)

    def test_combined_needs_en(self):
        base = dict(alpha=3.5, gamma=3.5, mu_sign="positive")
        partial = select_regime(RegimeInput(flags={"x_nonneg"}, **base))
        assert partial.theorem != "Theorem 1(iii)"
        full = select_regime(
            RegimeInput(flags={"x_nonneg", "EN_finite"}, **base)
        )
        assert full.theorem == "Theorem 1(iii)"
        assert full.predictor == "combined"

    @given(
        alpha=st.floats(1.05, 6.0, allow_nan=False),
        gamma=st.one_of(st.none(), st.floats(1.05, 8.0, allow_nan=False)),
        mu=st.sampled_from(["negative", "zero", "positive"]),
        base=st.frozensets(st.sampled_from(sorted(FLAGS)), max_size=6),
        extra=st.frozensets(st.sampled_from(sorted(FLAGS)), max_size=4),
    )
    @settings(max_examples=200, deadline=None)
    def test_adding_flags_is_monotone(self, alpha, gamma, mu, base, extra):
        lo = select_regime(RegimeInput(alpha, gamma, mu, base))
        hi = select_regime(RegimeInput(alpha, gamma, mu, base | extra))

        def matched(rep):
            out = set()
            if rep.theorem is not None:
                out.add((rep.theorem, rep.predictor))
            for alt in rep.alternates:
                d = dict(alt)
                out.add((d["theorem"], d["predictor"]))
            return out

        assert matched(lo) <= matched(hi)

    def test_pure_function(self):
        inp = RegimeInput(alpha=2.5, gamma=4.0, flags={"x_nonneg"})
        assert select_regime(inp) == select_regime(inp)


class TestAutoFlags:
    def test_one_sided_pure_power_pair(self):
        x = PowerLawSpec(alpha=2.5)
        n = PowerLawSpec(alpha=4.0)
        fl = auto_flags(x, n)
        assert fl == frozenset(
            {
                "XI_25_1",
                "X_L1_const",
                "x_nonneg",
                "left_tail_O",
                "left_tail_limit",
                "N_regularity",
                "EN_finite",
                "N_moment_1+tau",
                "EN_log_moment",
                "N_small_vs_X",
                "N_tail_small",
            }
        )

    def test_log_factor_drops_constant_flag(self):
        x = PowerLawSpec(alpha=2.5, sv_family=(1.0, 1.0))
        assert "X_L1_const" not in auto_flags(x)
        assert "XI_25_1" in auto_flags(x)

    def test_two_sided_light_alpha_lacks_left_tail(self):
        x = PowerLawSpec(alpha=2.5, side="two-sided", a=0.2, b=0.2)
        fl = auto_flags(x)
        assert "x_nonneg" not in fl
        assert "left_tail_O" not in fl

    def test_two_sided_heavy_alpha_has_left_tail(self):
        x = PowerLawSpec(alpha=3.5, side="two-sided", a=0.2, b=0.2)
        fl = auto_flags(x)
        assert "left_tail_O" in fl and "left_tail_limit" in fl

    def test_alpha_three_remainder(self):
        assert "alpha3_remainder" in auto_flags(PowerLawSpec(alpha=3.0))
        assert "alpha3_remainder" not in auto_flags(
            PowerLawSpec(alpha=3.0, sv_family=(1.0, 0.5))
        )

    def test_moment_flags_follow_gamma(self):
        x = PowerLawSpec(alpha=2.5)
        light = auto_flags(x, PowerLawSpec(alpha=1.8))
        assert "EN_finite" not in light
        assert "X_small_vs_N" in light
        heavy = auto_flags(x, PowerLawSpec(alpha=4.6))
        assert "N_moment_1+alpha" in heavy

    def test_comparison_flags_vs_selection(self):
        x = PowerLawSpec(alpha=4.0)
        n = PowerLawSpec(alpha=2.5)
        fl = auto_flags(x, n)
        r = select_regime(
            RegimeInput(alpha=4.0, gamma=2.5, mu_sign="positive", flags=fl)
        )
        assert r.theorem == "Theorem 1(ii)"

    def test_needs_analytic_law(self):
        with pytest.raises(ValidationError):
            auto_flags(LatticePmf.uniform(1, 3))


class TestStableCf:
    def test_at_zero(self):
        assert stable_cf(1.5, 0.0) == 1.0

    def test_frozen_modulus_and_phase(self):
        # exp{Gamma(0.5) * (i sin(pi/4) - cos(pi/4))}: both parts sqrt(pi/2)
        v = stable_cf(1.5, 1.0)
        assert abs(v) == pytest.approx(math.exp(-math.sqrt(math.pi / 2)), abs=1e-15)
        assert math.atan2(v.imag, v.real) == pytest.approx(
            math.sqrt(math.pi / 2), abs=1e-15
        )
        assert abs(v) == pytest.approx(0.2855568522987141, abs=1e-15)

    def test_conjugate_symmetry(self):
        for lam in (2.0, 0.7, 31.0):
            left = stable_cf(1.3, -lam)
            right = stable_cf(1.3, lam)
            assert left == pytest.approx(right.conjugate(), abs=1e-15)

    def test_modulus_bounded_on_grid(self):
        lam = np.linspace(-80.0, 80.0, 10_000)
        for alpha in (1.2, 1.5, 1.9):
            vals = np.abs(StableLaw(alpha - 1.0, alpha - 1.0).cf(lam))
            assert np.all(vals <= 1.0 + 1e-12)
            scalar = np.array([abs(stable_cf(alpha, x)) for x in lam[::500]])
            assert np.all(scalar <= 1.0 + 1e-12)

    def test_alpha_range_enforced(self):
        with pytest.raises(ValidationError):
            stable_cf(2.5, 1.0)
        with pytest.raises(ValidationError):
            stable_cf(1.0, 1.0)

    def test_law_matches_cf_helper(self):
        law = StableLaw(0.5, 0.5)
        for lam in (-3.0, 0.25, 11.0):
            assert law.cf(lam) == pytest.approx(stable_cf(1.5, lam), abs=1e-15)


class TestStableLaw:
    def test_index_range(self):
        with pytest.raises(ValidationError):
            StableLaw(1.0, 1.0)
        with pytest.raises(ValidationError):
            StableLaw(2.0, 1.0)
        with pytest.raises(ValidationError):
            StableLaw(0.5, 0.0)

    def test_laplace_coefficient(self):
        # d = (a/index) Gamma(1-index); unit anchor at scale = index
        assert StableLaw(0.5, 0.5).d == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert StableLaw(0.5, 1.0).d == pytest.approx(
            2 * math.sqrt(math.pi), rel=1e-15
        )


class TestStableDensity:
    def test_levy_oracle(self):
        # StableLaw(1/2, 1/2) has Laplace exponent sqrt(pi) s^{1/2}; the
        # matching Levy scale is c = pi/2 since sqrt(2c) = sqrt(pi)
        law = StableLaw(0.5, 0.5)
        for z in (0.05, 0.1, 0.3, 1.0, 2.0, 7.5, 20.0, 50.0):
            assert stable_density(law, z) == pytest.approx(
                levy_pdf(z, math.pi / 2), abs=1e-8
            )

    def test_levy_frozen_point(self):
        assert stable_density(StableLaw(0.5, 0.5), 1.0) == pytest.approx(
            0.22796906388299812, abs=1e-10
        )

    def test_scipy_one_sided_oracle(self):
        law = StableLaw(0.5, 1.0)
        sp = stats.levy_stable(0.5, 1.0, scale=law._decay ** (1.0 / 0.5))
        for z in (0.5, 1.0, 3.0, 15.0, 40.0):
            assert stable_density(law, z) == pytest.approx(sp.pdf(z), abs=5e-8)

    def test_scipy_two_sided_oracle(self):
        law = StableLaw(1.5, 1.0)
        sp = stats.levy_stable(1.5, 1.0, scale=law._decay ** (1.0 / 1.5))
        for z in (-20.0, -2.0, -0.5, 0.0, 0.5, 2.0, 10.0, 50.0):
            assert stable_density(law, z) == pytest.approx(sp.pdf(z), abs=5e-8)

    def test_one_sided_vanishes_left_of_origin(self):
        law = StableLaw(0.7, 1.0)
        assert stable_density(law, 0.0) == 0.0
        assert stable_density(law, -3.0) == 0.0

    def test_integrates_to_one(self):
        law = StableLaw(0.5, 0.5)
        val, _ = integrate.quad(lambda z: stable_density(law, z), 0, np.inf, limit=300)
        assert val == pytest.approx(1.0, abs=1e-6)
        law2 = StableLaw(1.5, 1.0)
        val2, _ = integrate.quad(
            lambda z: stable_density(law2, z), -np.inf, np.inf, limit=300
        )
        assert val2 == pytest.approx(1.0, abs=1e-6)

    def test_nonnegative_up_to_noise(self):
        for law in (StableLaw(0.5, 0.5), StableLaw(1.5, 1.0), StableLaw(0.8, 2.0)):
            zs = np.linspace(-30.0, 50.0, 641)
            vals = stable_density_grid(law, zs)
            assert np.all(vals >= -1e-9)

    def test_grid_matches_pointwise(self):
        law = StableLaw(1.5, 1.0)
        zs = np.linspace(-25.0, 25.0, 201)
        grid = stable_density_grid(law, zs)
        point = np.array([stable_density(law, z) for z in zs])
        assert np.max(np.abs(grid - point)) < 1e-9

    def test_grid_preserves_shape(self):
        law = StableLaw(0.5, 0.5)
        zs = np.array([[0.5, 1.0], [2.0, 4.0]])
        out = stable_density_grid(law, zs)
        assert out.shape == zs.shape


class TestFracMoment:
    def test_zeroth_moment_is_one(self):
        for law in (StableLaw(0.5, 0.5), StableLaw(0.8, 0.8), StableLaw(0.3, 0.7)):
            assert stable_frac_moment(law, 0.0) == pytest.approx(1.0, abs=1e-6)

    def test_mellin_frozen_values(self):
        # d^{s/index} Gamma(1 - s/index) / Gamma(1 - s)
        assert stable_frac_moment(StableLaw(0.5, 0.5), 0.25) == pytest.approx(
            1.9256555648928348, rel=1e-9
        )
        assert stable_frac_moment(StableLaw(0.8, 0.8), 0.4) == pytest.approx(
            2.550177580279332, rel=1e-9
        )
        assert stable_frac_moment(StableLaw(0.5, 1.0), 0.1) == pytest.approx(
            1.4032428273366202, rel=1e-9
        )

    def test_quadrature_route_tracks_closed_form(self):
        for idx, a in ((0.5, 0.5), (0.8, 1.3), (0.3, 0.7)):
            law = StableLaw(idx, a)
            for s in (0.0, 0.3 * idx, 0.8 * idx):
                assert stable_frac_moment(law, s) == pytest.approx(
                    stable_frac_moment_exact(law, s), rel=1e-8
                )

    def test_monotone_in_s_toward_divergence(self):
        law = StableLaw(0.5, 0.5)
        assert stable_frac_moment(law, 0.45) > stable_frac_moment(law, 0.25)

    def test_divergent_moment_raises(self):
        law = StableLaw(0.5, 0.5)
        with pytest.raises(DivergentMomentError):
            stable_frac_moment(law, 0.5)
        with pytest.raises(DivergentMomentError):
            stable_frac_moment(law, 0.7)

    def test_two_sided_law_rejected(self):
        with pytest.raises(ValidationError):
            stable_frac_moment(StableLaw(1.5, 1.0), 0.25)

    def test_negative_order_rejected(self):
        with pytest.raises(ValidationError):
            stable_frac_moment(StableLaw(0.5, 0.5), -0.1)

    def test_monte_carlo_normalized_sums(self):
        # E (S_n / n^{1/index})^s over draws of the actual lattice law must
        # match the quadrature moment of the limit: ties the local constant
        # of the pmf to the stable scale end-to-end
        from scipy.special import zeta as hzeta

        spec = PowerLawSpec(alpha=1.5)
        eff_a = spec.effective_a
        T = 1 << 20
        cdf = np.cumsum(eff_a * np.arange(1, T + 1, dtype=float) ** -1.5)
        head_mass = cdf[-1]

        def draw_x(count, rng):
            u = rng.random(count)
            out = np.empty(count)
            head = u < head_mass
            out[head] = np.searchsorted(cdf, u[head]) + 1
            ut = u[~head]
            if ut.size:
                target = (1.0 - ut) / eff_a
                lo = np.full(ut.shape, float(T))
                hi = np.full(ut.shape, 1e18)
                for _ in range(60):
                    mid = np.sqrt(lo * hi)
                    ok = hzeta(1.5, mid + 1.0) <= target
                    hi[ok] = mid[ok]
                    lo[~ok] = mid[~ok]
                out[~head] = np.ceil(hi)
            return out

        s, n_sum, m = 0.25, 10_000, 1024
        rng = np.random.default_rng(np.random.Philox([2024, 8]))
        draws = draw_x(m * n_sum, rng).reshape(m, n_sum)
        vals = (draws.sum(axis=1) / float(n_sum) ** 2.0) ** s
        est = float(np.mean(vals))
        se = float(np.std(vals, ddof=1)) / math.sqrt(m)
        ref = stable_frac_moment(StableLaw(0.5, eff_a), s)
        assert abs(est - ref) < 3.0 * se


class TestSampler:
    def test_ks_against_levy(self):
        law = StableLaw(0.5, 0.5)
        rng = np.random.default_rng(np.random.Philox(777))
        x = sample_stable(law, 100_000, rng)
        ks = stats.kstest(x, stats.levy(scale=math.pi / 2).cdf)
        assert ks.pvalue > 1e-3

    def test_moment_three_sigma(self):
        # 2s < index keeps the variance of Z^s finite
        law = StableLaw(0.5, 0.5)
        rng = np.random.default_rng(np.random.Philox(12345))
        x = sample_stable(law, 200_000, rng) ** 0.2
        est, se = np.mean(x), np.std(x, ddof=1) / math.sqrt(len(x))
        assert abs(est - stable_frac_moment_exact(law, 0.2)) < 3.0 * se

    def test_positive_support(self):
        rng = np.random.default_rng(np.random.Philox(5))
        assert np.all(sample_stable(StableLaw(0.9, 1.0), 10_000, rng) > 0)

    def test_two_sided_rejected(self):
        rng = np.random.default_rng(np.random.Philox(5))
        with pytest.raises(ValidationError):
            sample_stable(StableLaw(1.5, 1.0), 10, rng)


class TestPredict:
    def setup_method(self):
        self.x = build_power_law(
            PowerLawSpec(alpha=2.5), TruncationPolicy(t_max=4000)
        )
        self.n = build_power_law(
            PowerLawSpec(alpha=4.0), TruncationPolicy(t_max=4000)
        )

    def test_big_jump_is_product(self):
        v = predict("single-big-jump", 100, x=self.x, EN=2.0)
        assert v == pytest.approx(2.0 * self.x.at(100), rel=1e-15)

    def test_big_jump_linear_in_en(self):
        v1 = predict("single-big-jump", 250, x=self.x, EN=1.0)
        v3 = predict("single-big-jump", 250, x=self.x, EN=3.0)
        assert v3 == pytest.approx(3.0 * v1, rel=1e-15)

    def test_dominates_floor_arithmetic(self):
        v = predict("stopping-dominates", 100, n=self.n, mu=2.0)
        assert v == pytest.approx(self.n.at(50) / 2.0, rel=1e-15)
        v2 = predict("stopping-dominates", 101, n=self.n, mu=2.0)
        assert v2 == pytest.approx(self.n.at(50) / 2.0, rel=1e-15)

    def test_combined_is_sum_of_parts(self):
        t, mu, EN = 1000, 1.4, 1.25
        big = predict("single-big-jump", t, x=self.x, EN=EN)
        dom = predict("stopping-dominates", t, n=self.n, mu=mu)
        both = predict("combined", t, x=self.x, n=self.n, mu=mu, EN=EN)
        assert both == pytest.approx(big + dom, rel=1e-15)

    def test_dominates_ignores_x(self):
        other_x = build_power_law(
            PowerLawSpec(alpha=9.0), TruncationPolicy(t_max=500)
        )
        v1 = predict("stopping-dominates", 300, n=self.n, x=self.x, mu=1.5)
        v2 = predict("stopping-dominates", 300, n=self.n, x=other_x, mu=1.5)
        assert v1 == v2

    def test_accepts_regime_report(self):
        rep = select_regime(RegimeInput(alpha=2.5, gamma=4.0, flags={"x_nonneg"}))
        v = predict(rep, 100, x=self.x, EN=2.0)
        assert v == pytest.approx(2.0 * self.x.at(100), rel=1e-15)

    def test_beyond_window_raises_budget(self):
        with pytest.raises(BudgetError, match="retained window"):
            predict("single-big-jump", 5000, x=self.x, EN=2.0)

    def test_analytic_spec_has_no_window_limit(self):
        spec = PowerLawSpec(alpha=2.5)
        v = predict("single-big-jump", 10**7, x=spec, EN=2.0)
        assert v == pytest.approx(2.0 * spec.pmf_value(10**7), rel=1e-15)

    def test_empty_report_rejected(self):
        empty = select_regime(RegimeInput(alpha=2.2, gamma=1.5, mu_sign="negative"))
        with pytest.raises(ValidationError, match="empty report"):
            predict(empty, 100, x=self.x, EN=1.0)

    def test_dominates_needs_positive_mu(self):
        with pytest.raises(ValidationError):
            predict("stopping-dominates", 100, n=self.n, mu=0.0)


class TestPredictSubcritical:
    def test_t_power_exponent(self):
        # alpha = gamma = 1.5 gives t^{-1-(alpha-1)(gamma-1)} = t^{-1.25}
        lo = predict_subcritical(500, 1.5, 1.5, a=1.0)
        hi = predict_subcritical(2000, 1.5, 1.5, a=1.0)
        assert hi / lo == pytest.approx(4.0**-1.25, rel=1e-12)

    def test_unit_constants_reduction(self):
        # L2 = 1, a = 1: (alpha-1) E Z^k t^{-1-k} with Z the unit-scale law
        t, alpha, gamma = 1000, 1.5, 1.5
        kappa = (alpha - 1.0) * (gamma - 1.0)
        expected = (
            (alpha - 1.0)
            * stable_frac_moment(StableLaw(alpha - 1.0, 1.0), kappa)
            * float(t) ** (-1.0 - kappa)
        )
        assert predict_subcritical(t, alpha, gamma, a=1.0) == pytest.approx(
            expected, rel=1e-12
        )

    def test_log_factor_enters_at_power_of_t(self):
        v_plain = predict_subcritical(900, 1.5, 1.5, a=1.0)
        v_log = predict_subcritical(900, 1.5, 1.5, a=1.0, l2_const=1.0, l2_rho=1.0)
        assert v_log / v_plain == pytest.approx(
            math.log(900.0**0.5 + math.e), rel=1e-12
        )

    def test_exact_oracle_ratio_improves(self):
        # the scale adjudication: the derived (a/(alpha-1))^{1/(alpha-1)}
        # stable scale makes exact/predictor approach 1 from below
        x = build_power_law(
            PowerLawSpec(alpha=1.5, a=0.1, normalization="given-constant"),
            TruncationPolicy(t_max=2100),
        )
        n = build_power_law(PowerLawSpec(alpha=1.5), TruncationPolicy(t_max=2500))
        res = stopped_sum_pmf(x, n, policy=StopPolicy(n_max=2000, window=2050))
        a_loc = x.spec.effective_a * x.spec.C
        l2 = n.spec.effective_a * n.spec.C
        devs = []
        for t in (200, 2000):
            ratio = res.pmf.at(t) / predict_subcritical(
                t, 1.5, 1.5, a=a_loc, l2_const=l2
            )
            devs.append(abs(ratio - 1.0))
        assert devs[1] < devs[0]
        assert devs[1] < 0.06

    def test_range_validation(self):
        with pytest.raises(ValidationError):
            predict_subcritical(100, 2.5, 1.5, a=1.0)
        with pytest.raises(ValidationError):
            predict_subcritical(100, 1.5, 2.5, a=1.0)
        with pytest.raises(ValidationError):
            predict_subcritical(100, 1.5, 1.5, a=0.0)
        with pytest.raises(ValidationError):
            predict_subcritical(0, 1.5, 1.5, a=1.0)

    def test_predict_delegates_with_spec_constants(self):
        xs = PowerLawSpec(alpha=1.5, a=0.1, normalization="given-constant")
        ns = PowerLawSpec(alpha=1.5)
        rep = select_regime(RegimeInput(alpha=1.5, gamma=1.5))
        v = predict(rep, 1200, x=xs, n=ns)
        direct = predict_subcritical(
            1200,
            1.5,
            1.5,
            a=xs.effective_a * xs.C,
            l2_const=ns.effective_a * ns.C,
            l2_rho=0.0,
        )
        assert v == pytest.approx(direct, rel=1e-15)

    def test_log_varying_x_rejected(self):
        xs = PowerLawSpec(alpha=1.5, sv_family=(1.0, 0.5))
        ns = PowerLawSpec(alpha=1.5)
        with pytest.raises(ValidationError, match="constant slowly varying"):
            predict("subcritical-stable", 100, x=xs, n=ns)
