import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rarecert.errors import DomainError
from rarecert.specfun import (
    log_binomial_coefficient,
    log_gamma,
    log_normal_cdf,
    normal_cdf,
    normal_quantile,
    normal_sf,
    reg_inc_beta,
    reg_inc_beta_inv,
)


def binomial_upper_tail(a, b, x):
    """P(Bin(a + b - 1, x) >= a) in exact rational arithmetic, for integer a, b."""
    n = a + b - 1
    xf = Fraction(x)
    total = sum(math.comb(n, j) * xf**j * (1 - xf) ** (n - j) for j in range(a, n + 1))
    return float(total)


class TestNormalCdf:
    def test_median(self):
        assert normal_cdf(0.0) == 0.5

    def test_far_right_tail(self):
        assert normal_cdf(40.0) >= 1.0 - 1e-300

    def test_known_quantile_point(self):
        # mpmath at 50 digits: 0.97500000002688156...
        assert abs(normal_cdf(1.959963985) - 0.975) <= 1e-9
        assert abs(normal_cdf(1.959963985) - 0.9750000000268815623) <= 1e-15

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            normal_cdf(float("nan"))

    @given(st.floats(min_value=-38.0, max_value=38.0))
    def test_reflection(self, x):
        assert abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-14

    def test_monotone_on_grid(self):
        xs = np.linspace(-40, 10, 20001)
        values = [normal_cdf(x) for x in xs]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_sf_matches_reflected_cdf(self):
        for x in (-3.0, 0.5, 8.0, 30.0):
            assert normal_sf(x) == normal_cdf(-x)

    @pytest.mark.parametrize("x, expected", [
        # ln Phi(x) from mpmath (50 digits)
        (-40.0, -804.60844201375378817),
        (-100.0, -5005.5242086942050886),
        (-1e5, -5000000012.4318639983),
    ])
    def test_log_cdf_deep_tail(self, x, expected):
        np.testing.assert_allclose(log_normal_cdf(x), expected, rtol=1e-14)


class TestNormalQuantile:
    def test_median(self):
        assert normal_quantile(0.5) == 0.0

    def test_975(self):
        assert abs(normal_quantile(0.975) - 1.959964) <= 1e-6
        np.testing.assert_allclose(normal_quantile(0.975), 1.9599639845400542355, rtol=1e-15)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            normal_quantile(q)

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_symmetry(self, q):
        # snap q so that 1 - q is exact; otherwise the rounding of 1 - q alone moves z by ~1e-11
        q = 1.0 - (1.0 - q)
        assert abs(normal_quantile(q) + normal_quantile(1.0 - q)) <= 1e-12 * max(1.0, abs(normal_quantile(q)))

    def test_roundtrip_grid(self):
        qs = np.concatenate([np.linspace(1e-6, 1 - 1e-6, 2001), np.logspace(-6, -1, 200)])
        worst = max(abs(normal_cdf(normal_quantile(q)) - q) for q in qs)
        assert worst <= 1e-12

    def test_extreme_tail_roundtrip_relative(self):
        # absolute error is meaningless down here; check relative error on the log scale
        for q in np.logspace(-300, -6, 300):
            z = normal_quantile(q)
            assert abs(math.expm1(log_normal_cdf(z) - math.log(q))) <= 1e-12

    def test_strictly_increasing(self):
        qs = np.logspace(-300, math.log10(0.5), 500)
        zs = [normal_quantile(q) for q in qs]
        assert all(a < b for a, b in zip(zs, zs[1:]))


class TestLogGamma:
    def test_one_and_two(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0

    def test_recurrence_at_ten_and_a_half(self):
        # Gamma(10.5) = 9.5 * 8.5 * ... * 0.5 * Gamma(0.5), Gamma(0.5) = sqrt(pi)
        expected = math.fsum(math.log(k + 0.5) for k in range(10)) + 0.5 * math.log(math.pi)
        np.testing.assert_allclose(log_gamma(10.5), expected, rtol=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)

    @pytest.mark.parametrize("n, k", [(10, 3), (1000, 7), (10**8, 200), (5 * 10**6, 5)])
    def test_log_binomial_coefficient(self, n, k):
        np.testing.assert_allclose(log_binomial_coefficient(n, k), math.log(math.comb(n, k)),
                                   rtol=1e-13, atol=1e-12)


class TestRegIncBeta:
    def test_a_equals_one_closed_form(self):
        for b in (0.5, 3.0, 250.0):
            for x in (0.01, 0.3, 0.9):
                np.testing.assert_allclose(reg_inc_beta(x, 1.0, b), 1 - (1 - x) ** b, rtol=1e-13)

    @pytest.mark.parametrize("a", [0.5, 3.0, 40.0, 1e5])
    def test_symmetric_midpoint(self, a):
        np.testing.assert_allclose(reg_inc_beta(0.5, a, a), 0.5, rtol=1e-13)

    def test_binomial_identity_small(self):
        expected = binomial_upper_tail(4, 7, 0.3)
        np.testing.assert_allclose(reg_inc_beta(0.3, 4, 7), expected, rtol=1e-13)

    def test_endpoints(self):
        assert reg_inc_beta(0.0, 2.0, 3.0) == 0.0
        assert reg_inc_beta(1.0, 2.0, 3.0) == 1.0

    @pytest.mark.parametrize("x, a, b", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2),
                                         (float("nan"), 1, 1)])
    def test_domain(self, x, a, b):
        with pytest.raises(DomainError):
            reg_inc_beta(x, a, b)

    def test_integer_parameter_grid(self):
        xs = np.round(np.linspace(0.01, 0.99, 25), 4)
        worst = 0.0
        for a in range(1, 31, 3):
            for b in range(1, 31, 4):
                for x in xs:
                    worst = max(worst, abs(reg_inc_beta(float(x), a, b) - binomial_upper_tail(a, b, float(x))))
        assert worst <= 1e-10

    @pytest.mark.parametrize("a, b, x, expected", [
        # frozen from an mpmath (40 digit) binomial-tail oracle at the same double x
        (6, 4999995, 2.3e-06, 0.97227418472935079885),
        (5, 4999996, 3.2e-07, 0.023682256878926355809),
        (201, 99999800, 2.3e-06, 0.97603026984884141707),
        (1000000, 2333334, 0.3, 0.5001589424088616954),
        (1000000, 2333334, 0.2995, 0.023170029146590617428),
        (30, 30999971, 1e-06, 0.59534789012030056641),
        (2.5, 7.5, 0.2, 0.40123869824719163411),
        (0.5, 0.5, 0.1, 0.20483276469913345754),
    ])
    def test_large_parameters(self, a, b, x, expected):
        np.testing.assert_allclose(reg_inc_beta(x, a, b), expected, rtol=1e-12)

    @pytest.mark.parametrize("a, b", [(2, 3), (5, 5e6), (0.7, 12.0), (200, 1e8)])
    def test_monotone_in_x(self, a, b):
        mean = a / (a + b)
        xs = np.linspace(mean / 20, min(0.999, mean * 4), 2000)
        vals = [reg_inc_beta(float(x), a, b) for x in xs]
        assert all(u <= v for u, v in zip(vals, vals[1:]))
        assert vals[0] < vals[-1]


class TestRegIncBetaInv:
    @pytest.mark.parametrize("a", [0.5, 2.0, 17.0, 3e4])
    def test_symmetric_median(self, a):
        np.testing.assert_allclose(reg_inc_beta_inv(0.5, a, a), 0.5, rtol=1e-12)

    @pytest.mark.parametrize("q, b, expected", [
        # 1 - (1 - q)^(1/b) from mpmath (40 digits)
        (0.025, 100.0, 0.0002531460329774206480662299),
        (0.975, 7.0, 0.409616397225003384777552),
        (0.5, 1e6, 6.931469403334938544155665e-07),
    ])
    def test_a_equals_one(self, q, b, expected):
        np.testing.assert_allclose(reg_inc_beta_inv(q, 1.0, b), expected, rtol=1e-13)

    def test_resolution_limited_root(self):
        # x sits 1.9e-7 below 1; neighbouring doubles move I by more than 1e-12
        x = reg_inc_beta_inv(0.984375, 59.0, 0.375)
        assert abs(reg_inc_beta(x, 59.0, 0.375) - 0.984375) <= 1e-10
        assert reg_inc_beta(math.nextafter(x, 0.0), 59.0, 0.375) <= 0.984375 <= \
            reg_inc_beta(math.nextafter(x, 1.0), 59.0, 0.375)

    @pytest.mark.parametrize("q", [0.0, 1.0, float("nan")])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            reg_inc_beta_inv(q, 2.0, 3.0)

    @settings(max_examples=150, deadline=None)
    @given(q=st.floats(min_value=1e-6, max_value=1 - 1e-6),
           a=st.floats(min_value=0.3, max_value=500.0),
           b=st.floats(min_value=0.3, max_value=1e7))
    def test_roundtrip(self, q, a, b):
        x = reg_inc_beta_inv(q, a, b)
        assert abs(reg_inc_beta(x, a, b) - q) <= 1e-10

    def test_roundtrip_grid(self):
        for a in (1.5, 5, 101, 2e3):
            for b in (2, 50, 5e6):
                for q in (0.005, 0.025, 0.5, 0.975, 0.995):
                    x = reg_inc_beta_inv(q, a, b)
                    assert abs(reg_inc_beta(x, a, b) - q) <= 1e-12
