import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from wtcrobust.core import (CensoredWeibull, Gamma, HuberizedModel, Mixture, TruncatedWeibull,
                            Weibull, contaminated_weibull, dist_cdf, dist_quantile, dist_sample,
                            find_t0, h_eval, h_prime, h_second, h_star_inverse, h_tilde_inverse,
                            increasing_branch_inverse, substream)
from wtcrobust.errors import DomainError

c0s = st.floats(min_value=0.05, max_value=5.0)


def bisect(f, lo, hi, tol=1e-14):
    """Plain bisection, used as an independent oracle."""
    flo = f(lo)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestH:
    def test_known_values(self):
        assert h_eval(1.0, 0.7) == -1.0
        assert h_eval(math.e, 2.0) == pytest.approx(2.0 * math.e - 2.0, rel=1e-15)

    def test_vectorised(self):
        t = np.array([0.5, 1.0, 3.0])
        np.testing.assert_allclose(h_eval(t, 1.5), [(1.5 * x - 1) * math.log(x) - 1 for x in t])

    @pytest.mark.parametrize("t", [0.0, -1.0, float("nan")])
    def test_domain(self, t):
        with pytest.raises(DomainError):
            h_eval(t, 1.0)

    def test_bad_c0(self):
        with pytest.raises(DomainError):
            h_eval(2.0, 0.0)

    @given(c0=c0s, t=st.floats(min_value=0.05, max_value=50.0))
    def test_derivatives_match_finite_differences(self, c0, t):
        eps = 1e-6 * t
        fd1 = (h_eval(t + eps, c0) - h_eval(t - eps, c0)) / (2 * eps)
        fd2 = (h_prime(t + eps, c0) - h_prime(t - eps, c0)) / (2 * eps)
        assert h_prime(t, c0) == pytest.approx(fd1, rel=1e-6, abs=1e-6)
        assert h_second(t, c0) == pytest.approx(fd2, rel=1e-6, abs=1e-6)

    def test_convexity_at_random_points(self):
        rng = np.random.default_rng(1)
        t = rng.uniform(1e-3, 100.0, 1000)
        c0 = rng.uniform(0.01, 10.0, 1000)
        assert np.all(h_second(t, c0) > 0)


class TestT0:
    @pytest.mark.parametrize("c0", [1.0, 1.5, 2.0, 10.0])
    def test_boundary_minimum(self, c0):
        assert find_t0(c0) == 1.0

    @given(c0=st.floats(min_value=0.01, max_value=0.999))
    def test_stationary(self, c0):
        t0 = find_t0(c0)
        assert t0 > 1.0
        assert abs(h_prime(t0, c0)) < 1e-10

    @pytest.mark.parametrize("c0", [0.1, 0.5, 0.9])
    def test_against_bisection(self, c0):
        oracle = bisect(lambda t: c0 * (math.log(t) + 1) - 1 / t, 1.0, 100.0)
        assert find_t0(c0) == pytest.approx(oracle, abs=1e-12)

    @pytest.mark.parametrize("c0", [0.3, 1.0, 3.0])
    def test_is_argmin_on_grid(self, c0):
        grid = np.linspace(1.0, 20.0, 20001)
        t0 = find_t0(c0)
        assert h_eval(t0, c0) <= h_eval(grid, c0).min() + 1e-12


class TestInverses:
    @given(c0=c0s, y=st.floats(min_value=-0.999, max_value=1e4))
    def test_tilde_round_trip(self, c0, y):
        t = h_tilde_inverse(y, c0)
        assert t >= 1.0
        assert h_eval(t, c0) == pytest.approx(y, abs=1e-10, rel=1e-12)

    def test_tilde_at_minus_one(self):
        assert h_tilde_inverse(-1.0, 0.5) == 1.0
        assert h_tilde_inverse(-1.0, 2.0) == 1.0

    def test_tilde_domain(self):
        with pytest.raises(DomainError):
            h_tilde_inverse(-1.0001, 1.0)

    def test_tilde_is_generalised_inverse(self):
        # inf{t >= 1 : h(t) >= y} checked on a fine grid
        c0, y = 0.5, -0.5
        grid = np.linspace(1.0, 10.0, 900001)
        first = grid[np.argmax(h_eval(grid, c0) >= y)]
        assert h_tilde_inverse(y, c0) == pytest.approx(first, abs=2e-5)

    @given(c0=c0s, d0=st.floats(0.2, 2.0), y=st.floats(min_value=0.0, max_value=1e3))
    def test_star_round_trip(self, c0, d0, y):
        model = HuberizedModel(c0, d0, d0 + 1.0)
        yy = model.h_t0 + y
        t = h_star_inverse(yy, model)
        assert t >= model.t0
        assert h_eval(t, c0) == pytest.approx(yy, abs=1e-10, rel=1e-12)

    def test_star_domain(self):
        model = HuberizedModel(0.5, 1.0, 2.0)
        with pytest.raises(DomainError):
            h_star_inverse(model.h_t0 - 1e-3, model)

    def test_increasing_branch_clamps(self):
        assert increasing_branch_inverse(-5.0, 0.5) == find_t0(0.5)


class TestHuberizedModel:
    def test_derived_constants(self):
        m = HuberizedModel(0.5, 0.8, 1.7)
        assert m.x0 == pytest.approx(find_t0(0.5) ** (1 / 0.8), rel=1e-15)
        assert m.v0 == pytest.approx(h_eval(m.x0**1.7, 0.5), rel=1e-14)

    def test_c0_ge_one(self):
        m = HuberizedModel(1.0, 1.0, 2.0)
        assert (m.t0, m.x0, m.v0) == (1.0, 1.0, -1.0)

    def test_invalid(self):
        with pytest.raises(DomainError):
            HuberizedModel(1.0, 2.0, 1.0)


class TestSubstream:
    def test_reproducible_and_order_free(self):
        a = substream(7, 3, 1).random(5)
        substream(7, 9).random(100)
        b = substream(7, 3, 1).random(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys(self):
        assert not np.array_equal(substream(7, 1).random(4), substream(7, 2).random(4))
        assert not np.array_equal(substream(7, 1).random(4), substream(8, 1).random(4))


def _ks_distance(x, cdf):
    x = np.sort(x)
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return max(upper.max(), lower.max())


MODELS = [
    Weibull(1.0, 1.0),
    Weibull(0.5, 2.0),
    TruncatedWeibull(2.0, 1.5),
    Gamma(2.0, 0.5),
    Gamma(0.5, 3.0),
    contaminated_weibull(0.3, 1.0, 1.0, 2.0, 0.5),
]


class TestDistributions:
    @pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
    def test_sampling_matches_cdf(self, model):
        x = dist_sample(model, substream(11), 100_000)
        assert _ks_distance(x, lambda t: dist_cdf(model, t)) < 0.01

    def test_censored_sampling_matches_cdf(self):
        model = CensoredWeibull(1.0, 1.5, 0.8)
        x = np.sort(model.sample(substream(3), 100_000))
        grid = np.quantile(x, np.linspace(0.001, 0.999, 400))
        ecdf = np.searchsorted(x, grid, side="right") / x.size
        assert np.max(np.abs(ecdf - model.cdf(grid))) < 0.01

    def test_censored_atom(self):
        model = CensoredWeibull(1.0, 1.5, 0.8)
        n = 100_000
        x = model.sample(substream(5), n)
        p = Weibull(1.0, 1.5).cdf(0.8)
        frac = np.mean(x == 0.8)
        assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / n)
        assert model.atom == pytest.approx(p)
        assert np.all(x >= 0.8)

    def test_truncated_support(self):
        x = TruncatedWeibull(1.0, 2.0).sample(substream(1), 1000)
        assert np.all(x >= 1.0)

    def test_truncated_power_is_shifted_exponential(self):
        # X**alpha given X >= 1 is 1 + Exp(c0)
        x = TruncatedWeibull(1.5, 0.7).sample(substream(2), 50_000)
        res = stats.kstest(x**0.7 - 1.0, stats.expon(scale=1 / 1.5).cdf)
        assert res.pvalue > 1e-3

    def test_gamma_parameterisation(self):
        g = Gamma.from_scale(0.5, 0.5)
        assert g.rate == 2.0
        assert g.cdf(1.3) == pytest.approx(stats.gamma(0.5, scale=0.5).cdf(1.3), rel=1e-12)
        x = g.sample(substream(4), 200_000)
        assert x.mean() == pytest.approx(0.25, rel=0.02)

    def test_gamma_exponential_special_case_is_weibull(self):
        xs = np.linspace(0.01, 8, 50)
        np.testing.assert_allclose(Gamma(1.0, 1.0).cdf(xs), Weibull(1.0, 1.0).cdf(xs), rtol=1e-12)

    def test_mixture_cdf(self):
        m = contaminated_weibull(0.25, 1.0, 2.0, 2.0, 0.5)
        xs = np.linspace(0.05, 4, 9)
        expect = 0.75 * Weibull(1.0, 2.0).cdf(xs) + 0.25 * Gamma(2.0, 0.5).cdf(xs)
        np.testing.assert_allclose(m.cdf(xs), expect, rtol=1e-14)
        sf = 0.75 * Weibull(1.0, 2.0).sf(xs) + 0.25 * Gamma(2.0, 0.5).sf(xs)
        np.testing.assert_allclose(m.sf(xs), sf, rtol=1e-13)

    def test_mixture_extremes(self):
        w = Weibull(1.0, 1.0)
        g = Gamma(2.0, 0.5)
        assert Mixture(0.0, w, g).cdf(1.2) == pytest.approx(w.cdf(1.2))
        assert Mixture(1.0, w, g).cdf(1.2) == pytest.approx(g.cdf(1.2))

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
    @pytest.mark.parametrize("p", [0.01, 0.3, 0.5, 0.9, 0.999])
    def test_quantile_round_trip(self, model, p):
        assert dist_cdf(model, dist_quantile(model, p)) == pytest.approx(p, abs=1e-9)

    def test_weibull_closed_forms(self):
        w = Weibull(2.0, 1.5)
        assert w.sf(1.3) == pytest.approx(math.exp(-2.0 * 1.3**1.5))
        assert w.pdf(1.3) == pytest.approx(2.0 * 1.5 * 1.3**0.5 * math.exp(-2.0 * 1.3**1.5))

    @pytest.mark.parametrize("bad", [
        lambda: Weibull(0.0, 1.0),
        lambda: Weibull(1.0, -1.0),
        lambda: Gamma(1.0, 0.0),
        lambda: Mixture(1.5, Weibull(1, 1), Gamma(1, 1)),
    ])
    def test_invalid_parameters(self, bad):
        with pytest.raises(DomainError):
            bad()
