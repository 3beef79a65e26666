import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphari.core_math import (
    AlphaParams,
    DomainError,
    alpha_mean,
    fused_h_qexp,
    h_alpha,
    h_alpha_inv,
    q_exp,
    q_of_alpha,
)

ALPHAS = (-6.0, -3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0)


class TestAlphaParams:
    def test_q_relation(self):
        for a in ALPHAS:
            assert AlphaParams(a).q == (3 + a) / 2 == q_of_alpha(a)

    @pytest.mark.parametrize("kappa", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_bad_kappa(self, kappa):
        with pytest.raises(ValueError):
            AlphaParams(0.0, kappa)

    def test_rejects_nonfinite_alpha(self):
        with pytest.raises(ValueError):
            AlphaParams(math.inf)


class TestQExp:
    @pytest.mark.parametrize("q", [-1.0, 0.5, 1.0, 2.0, 3.0])
    def test_at_zero(self, q):
        assert q_exp(0.0, q) == 1.0

    def test_example_values(self):
        assert q_exp(-1.5, 3.0) == pytest.approx(0.5, abs=1e-15)
        assert q_exp(0.5, 3.0) == math.inf
        assert q_exp(-10.0, 0.5) == 0.0

    def test_boundary_is_exact(self):
        # base 1 + (1 - q) x is exactly zero at x = 1/(q - 1)
        assert q_exp(1.0, 2.0) == math.inf
        assert q_exp(np.nextafter(1.0, 0.0), 2.0) > 1e15
        assert q_exp(-2.0, 0.5) == 0.0
        assert q_exp(np.nextafter(-2.0, 0.0), 0.5) > 0.0

    def test_classical_exponential(self):
        x = np.linspace(-5, 5, 101)
        np.testing.assert_allclose(q_exp(x, 1.0), np.exp(x), rtol=4e-16)

    @pytest.mark.parametrize("q", [1 - 1e-4, 1 + 1e-4])
    def test_continuity_in_q(self, q):
        x = np.linspace(-4, 4, 161)
        assert np.all(np.abs(q_exp(x, q) - np.exp(x)) <= 1e-3 * (1 + np.exp(x)))
        # out to |x| = 5 the deviation is the analytic second-order term
        # exp(x) * (1 - q) * x^2 / 2, which reaches 1.25e-3 * exp(x) at the ends
        x = np.linspace(-5, 5, 201)
        c = 1.0 - q
        np.testing.assert_allclose(q_exp(x, q) / np.exp(x), np.exp(-c * x * x / 2 + c * c * x ** 3 / 3),
                                   rtol=1e-9)

    def test_array_shape_and_scalar_type(self):
        assert isinstance(q_exp(0.3, 2.0), float)
        assert q_exp(np.zeros((2, 3)), 2.0).shape == (2, 3)


class TestHAlpha:
    def test_examples(self):
        assert h_alpha(4.0, -1.0) == 4.0
        assert h_alpha(4.0, 3.0) == pytest.approx(0.25)
        assert h_alpha(1.0, 1.0) == 0.0

    def test_inverse_examples(self):
        assert h_alpha_inv(4.0, -1.0) == 4.0
        assert h_alpha_inv(0.25, 3.0) == pytest.approx(4.0)
        assert h_alpha_inv(0.0, 1.0) == 1.0

    @pytest.mark.parametrize("alpha", [1.0, 3.0])
    def test_zero_is_domain_error(self, alpha):
        with pytest.raises(DomainError):
            h_alpha(0.0, alpha)

    def test_extended_opt_in(self):
        assert h_alpha(0.0, 1.0, extended=True) == -math.inf
        assert h_alpha(0.0, 3.0, extended=True) == math.inf
        assert h_alpha(0.0, 0.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            h_alpha(-1.0, 0.0)
        with pytest.raises(DomainError):
            h_alpha_inv(-1.0, 0.0)

    @pytest.mark.parametrize("alpha", ALPHAS + (-50.0, 50.0))
    def test_round_trip(self, alpha):
        t = np.geomspace(1e-3, 1e6, 400)
        back = h_alpha_inv(h_alpha(t, alpha), alpha)
        np.testing.assert_allclose(back, t, rtol=1e-12 if abs(alpha) < 10 else 5e-11)


class TestFused:
    def test_example_values(self):
        assert fused_h_qexp(-1.5, 3.0) == pytest.approx(2.0, abs=1e-15)
        assert fused_h_qexp(0.5, 3.0) == 0.0

    def test_at_zero(self):
        for a in ALPHAS:
            assert fused_h_qexp(0.0, a) == (0.0 if a == 1.0 else 1.0)

    def test_alpha_one_pole(self):
        assert fused_h_qexp(1.0, 1.0) == math.inf
        assert fused_h_qexp(2.0, 1.0) == math.inf

    def test_matches_composition(self):
        rng = np.random.default_rng(0)
        for a in ALPHAS + (-2.5, 0.3, 2.0):
            x = rng.uniform(-4, 4, 500)
            inner = q_exp(x, q_of_alpha(a))
            ok = np.isfinite(inner) & (inner > 0)
            direct = h_alpha(inner[ok], a)
            fused = fused_h_qexp(x[ok], a)
            fin = np.isfinite(direct)
            np.testing.assert_allclose(fused[fin], direct[fin], rtol=1e-10, atol=1e-300)


class TestAlphaMean:
    def test_examples(self):
        assert alpha_mean([1.0, 2.0], [0.2, 0.8], -1.0) == pytest.approx(1.8, abs=1e-15)
        assert alpha_mean([0.5, 1.0], [0.2, 0.8], 3.0) == pytest.approx(5 / 6, abs=1e-15)
        # log-sum by hand: exp(0.2 log 1 + 0.8 log 2)
        assert alpha_mean([1.0, 2.0], [0.2, 0.8], 1.0) == pytest.approx(2 ** 0.8, rel=1e-15)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_constant_vector(self, alpha):
        assert alpha_mean([0.7] * 4, [0.1, 0.2, 0.3, 0.4], alpha) == pytest.approx(0.7, rel=1e-13)

    def test_zero_component(self):
        with pytest.raises(DomainError):
            alpha_mean([0.0, 1.0], [0.5, 0.5], 1.0)
        assert alpha_mean([0.0, 1.0], [0.5, 0.5], 0.0) == pytest.approx(0.25)
        assert alpha_mean([0.0, 1.0], [0.5, 0.5], -3.0) == pytest.approx(0.5 ** 0.5)

    def test_bad_prior(self):
        with pytest.raises(DomainError):
            alpha_mean([1.0, 1.0], [0.5, 0.6], 0.0)
        with pytest.raises(DomainError):
            alpha_mean([1.0, 1.0], [0.0, 1.0], 0.0)

    def test_columnwise(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = alpha_mean(x, [0.25, 0.75], -1.0, axis=0)
        np.testing.assert_allclose(out, [2.5, 3.5])

    def test_limits(self):
        x = np.array([0.2, 0.5, 0.9])
        pi = np.array([0.3, 0.3, 0.4])
        # the gap to the extreme is at most x_ext * (1 - pi_ext ** (2 / |1 - alpha|))
        for a, ext, w in ((-50.0, 0.9, 0.4), (50.0, 0.2, 0.3)):
            r = abs(1.0 - a) / 2.0
            assert abs(alpha_mean(x, pi, a) - ext) <= max(ext * (1 - w ** (1 / r)), ext * (w ** (-1 / r) - 1))
        assert abs(alpha_mean(x, pi, -2000.0) - x.max()) < 1e-2
        assert abs(alpha_mean(x, pi, 2000.0) - x.min()) < 1e-2
        np.testing.assert_allclose(alpha_mean(x, pi, -50.0), 0.9 * (0.4 + 0.3 * (5 / 9) ** 25.5
                                                                    + 0.3 * (2 / 9) ** 25.5) ** (1 / 25.5))

    def test_no_overflow_at_large_alpha(self):
        x = np.array([1e-200, 1e-100])
        for a in (-50.0, 50.0):
            v = alpha_mean(x, [0.5, 0.5], a)
            assert np.isfinite(v) and 1e-200 <= v <= 1e-100 * (1 + 1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(1e-6, 1e3), min_size=2, max_size=5),
           st.floats(-8, 8), st.floats(0, 4))
    def test_bounds_and_monotonicity(self, xs, a, da):
        x = np.array(xs)
        pi = np.full(x.size, 1.0 / x.size)
        lo = alpha_mean(x, pi, a + da)
        hi = alpha_mean(x, pi, a)
        tol = 1e-12 * x.max()
        assert x.min() - tol <= lo <= x.max() + tol
        assert x.min() - tol <= hi <= x.max() + tol
        assert lo <= hi * (1 + 1e-12) + tol
