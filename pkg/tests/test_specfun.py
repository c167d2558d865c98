import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from irslink.specfun import (JParams, bessel_k, cal_i, cal_j, cal_j_between,
                             gamma_lower, gamma_upper, gaussian_q, log_gaussian_q)


class TestGammaPair:
    def test_exponential_case(self):
        assert gamma_upper(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_half_at_zero(self):
        assert gamma_upper(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_against_quadrature(self):
        val, _ = quad(lambda t: t**1.5 * math.exp(-t), 1.3, np.inf)
        assert gamma_upper(2.5, 1.3) == pytest.approx(val, rel=1e-10)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            gamma_upper(0.0, 1.0)
        with pytest.raises(ValueError):
            gamma_lower(-1.0, 1.0)

    @given(q=st.floats(0.25, 50.0), z=st.floats(0.0, 200.0))
    @settings(max_examples=200, deadline=None)
    def test_partition_identity(self, q, z):
        total = gamma_upper(q, z) + gamma_lower(q, z)
        assert total == pytest.approx(float(gamma_fn(q)), rel=1e-12)


class TestGaussianQ:
    def test_symmetry_at_zero(self):
        assert gaussian_q(0.0) == pytest.approx(0.5, abs=1e-16)

    def test_lower_tail_saturates(self):
        assert gaussian_q(-30.0) == pytest.approx(1.0, abs=1e-15)

    def test_five_percent_point(self):
        # oracle: complementary-error-function quadrature
        val, _ = quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 1.6449, np.inf)
        assert gaussian_q(1.6449) == pytest.approx(val, rel=1e-10)
        assert gaussian_q(1.6449) == pytest.approx(0.05, abs=1e-4)

    def test_complement(self):
        for x in np.linspace(-4, 4, 17):
            assert gaussian_q(x) + gaussian_q(-x) == pytest.approx(1.0, abs=1e-14)

    def test_strictly_decreasing(self):
        xs = np.linspace(-8, 8, 200)
        vals = gaussian_q(xs)
        assert np.all(np.diff(vals) < 0)

    def test_log_tail(self):
        assert log_gaussian_q(10.0) == pytest.approx(math.log(gaussian_q(10.0)), rel=1e-10)
        assert np.isfinite(log_gaussian_q(60.0))


class TestBesselK:
    def test_half_order_closed_form(self):
        # K_{1/2}(x) = sqrt(pi/(2x)) e^-x
        assert bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4.0) * math.exp(-2.0),
                                                   rel=1e-12)

    def test_integral_representation(self):
        # K_0(x) = int_0^inf exp(-x cosh t) dt
        val, _ = quad(lambda t: math.exp(-1.0 * math.cosh(t)), 0, 30)
        assert bessel_k(0.0, 1.0) == pytest.approx(val, rel=1e-9)
        assert bessel_k(0.0, 1.0) == pytest.approx(0.421024, abs=1e-6)

    def test_order_symmetry(self):
        for x in (0.3, 1.0, 4.2):
            assert bessel_k(-1.5, x) == pytest.approx(float(bessel_k(1.5, x)), rel=1e-14)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            bessel_k(1.0, 0.0)

    def test_decreasing_and_log_convex(self):
        xs = np.linspace(0.1, 6.0, 120)
        for nu in (0.0, 1.0, 2.5):
            vals = np.asarray(bessel_k(nu, xs))
            assert np.all(np.diff(vals) < 0)
            assert np.all(np.diff(np.log(vals), 2) > -1e-12)


class TestCalI:
    def test_half_gaussian(self):
        assert cal_i(0, 0.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)

    def test_linear_weight(self):
        assert cal_i(1, 0.0) == pytest.approx(0.5, rel=1e-14)

    def test_negative_start_quadrature(self):
        val, _ = quad(lambda t: t * t * math.exp(-t * t), -1.1, np.inf)
        assert cal_i(2, -1.1) == pytest.approx(val, rel=1e-10)

    @pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 5])
    def test_continuous_at_origin(self, k):
        eps = 1e-12
        assert cal_i(k, -eps) == pytest.approx(cal_i(k, eps), abs=1e-10)

    def test_full_gaussian_limit(self):
        assert cal_i(0, -40.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_rejects_negative_order(self):
        with pytest.raises(ValueError):
            cal_i(-1, 0.0)


def _j_quad(k, z, p):
    q = (k + 1) / 2.0
    val, _ = quad(lambda t: t ** (p.m_tilde_v - k) * math.exp(-p.delta * t * t)
                  * gamma_upper(q, t * t), z, np.inf, limit=300)
    return val


class TestJParams:
    def test_invariants(self):
        p = JParams.from_delta(3, 2.0)
        assert p.scale == pytest.approx(3.0)
        with pytest.raises(ValueError):
            JParams(m_tilde_v=-1, delta=1.0, scale=2.0)
        with pytest.raises(ValueError):
            JParams(m_tilde_v=1, delta=0.0, scale=1.0)   # scale must exceed 1
        with pytest.raises(ValueError):
            JParams(m_tilde_v=1, delta=0.5, scale=2.0)   # delta != scale - 1


class TestCalJ:
    def test_basic_quadrature_value(self):
        # k=0, m_tilde=1, delta=1: int_0^inf t e^{-t^2} Gamma(1/2, t^2) dt
        p = JParams.from_delta(1, 1.0)
        expected = _j_quad(0, 0.0, p)
        assert cal_j(0, 0.0, p) == pytest.approx(expected, rel=1e-8)

    def test_even_closed_form_agrees(self):
        # even k with integer index: closed form vs quadrature to 1e-8
        s2a = 1.9  # scale = 2*sigma2*a
        p = JParams.from_delta(3, s2a - 1.0)  # m_v = 2
        closed = cal_j(2, 0.7, p)
        ref = cal_j(2, 0.7, p, force_quadrature=True)
        assert closed == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("m_tilde", [0, 1, 3, 4, 5])
    @pytest.mark.parametrize("delta", [0.4, 3.0, 14.0])
    def test_closed_forms_match_quadrature(self, m_tilde, delta):
        p = JParams.from_delta(m_tilde, delta)
        for k in range(m_tilde + 1):
            for z in (0.0, 0.35, 1.1):
                ref = cal_j(k, z, p, force_quadrature=True)
                val = cal_j(k, z, p)
                assert val == pytest.approx(ref, rel=2e-8, abs=1e-13), (k, z)

    def test_tail_vanishes(self):
        p = JParams.from_delta(4, 2.5)
        k = p.m_tilde_v
        z = 10.0 / math.sqrt(p.delta)
        bound = (math.exp(-p.delta * z * z) * gamma_fn((k + 1) / 2.0)
                 / (2 * p.delta * z * z)) * 2.0
        assert cal_j(k, z, p) <= bound

    def test_k_exceeding_degree_rejected(self):
        p = JParams.from_delta(2, 1.0)
        with pytest.raises(ValueError):
            cal_j(3, 0.0, p)

    def test_between_matches_difference(self):
        p = JParams.from_delta(3, 5.0)
        for k in range(4):
            diff = cal_j(k, 0.2, p) - cal_j(k, 0.9, p)
            assert cal_j_between(k, 0.2, 0.9, p) == pytest.approx(diff, rel=1e-9)
            ref = cal_j_between(k, 0.2, 0.9, p, force_quadrature=True)
            assert cal_j_between(k, 0.2, 0.9, p) == pytest.approx(ref, rel=1e-8)

    def test_half_integer_shape_falls_back(self):
        # m_tilde even (half-odd-integer shape): even k has no closed form,
        # cal_j must silently use quadrature and still match the integral
        p = JParams.from_delta(4, 2.0)  # m_v = 2.5
        for k in (0, 2, 4):
            assert cal_j(k, 0.5, p) == pytest.approx(_j_quad(k, 0.5, p), rel=1e-8)
