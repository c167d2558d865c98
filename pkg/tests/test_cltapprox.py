import math

import numpy as np
import pytest

from irslink.channel import LinkParams, SystemConfig
from irslink.cltapprox import (TruncatedNormal, gamma_ratio_t, quantized_w_stats,
                               truncated_normal_sample, w_mean_var, w_moment, w_stats)
from irslink.montecarlo import chunk_rng


def unit_config(n, m_g, m_h, eta=1.0, kappa_g=None, kappa_h=None):
    """Homogeneous config with chosen per-leg spreads (kappa defaults to 1)."""
    zg = (kappa_g if kappa_g is not None else 1.0) / m_g
    zh = (kappa_h if kappa_h is not None else 1.0) / m_h
    return SystemConfig(n_elements=n, eta=eta, v=LinkParams(1.0, 1.0),
                        g=LinkParams(m_g, zg), h=LinkParams(m_h, zh))


def reflected_sums(cfg, trials, seed=0):
    rng = chunk_rng(seed, 0)
    total = np.zeros(trials)
    step = max(1, 10**7 // max(cfg.n_elements, 1))
    for start in range(0, trials, step):
        count = min(step, trials - start)
        g = np.sqrt(rng.gamma(cfg.g.m, np.broadcast_to(cfg.zeta_g, (count, cfg.n_elements))))
        h = np.sqrt(rng.gamma(cfg.h.m, np.broadcast_to(cfg.zeta_h, (count, cfg.n_elements))))
        total[start:start + count] = (g * h * cfg.eta).sum(axis=1)
    return total


class TestWStats:
    def test_rayleigh_sixteen_elements(self):
        tn = w_stats(unit_config(16, 1.0, 1.0))
        assert tn.mu_bar == pytest.approx(4.0 * math.pi, rel=1e-12)
        assert tn.sigma2_bar == pytest.approx(16.0 - math.pi**2, rel=1e-12)

    def test_single_product_mean_against_mc(self):
        cfg = unit_config(1, 2.0, 3.0, eta=0.8, kappa_g=1.5, kappa_h=0.7)
        tn = w_stats(cfg)
        samples = reflected_sums(cfg, 10**6)
        se = samples.std() / math.sqrt(samples.size)
        assert abs(samples.mean() - tn.mu_bar) < 4 * se

    def test_xi_decreases_to_one(self):
        xis = [w_stats(unit_config(n, 1.0, 2.0)).xi for n in (1, 2, 4, 8, 16, 32)]
        assert all(b < a for a, b in zip(xis, xis[1:]))
        assert xis[-1] == pytest.approx(1.0, abs=1e-9)
        assert all(x >= 1.0 for x in xis)

    @pytest.mark.slow
    @pytest.mark.parametrize("m_g,m_h", [(1.0, 1.0), (3.0, 4.0)])
    @pytest.mark.parametrize("n", [16, 64, 256])
    def test_matches_monte_carlo_one_percent(self, m_g, m_h, n):
        cfg = unit_config(n, m_g, m_h, eta=0.9)
        tn = w_stats(cfg)
        samples = reflected_sums(cfg, 10**6, seed=n + int(m_g))
        assert samples.mean() == pytest.approx(tn.mu_bar, rel=0.01)
        assert samples.var() == pytest.approx(tn.sigma2_bar, rel=0.01)

    def test_variance_doubles_with_elements(self):
        s1 = w_stats(unit_config(8, 2.0, 3.0)).sigma2_bar
        s2 = w_stats(unit_config(16, 2.0, 3.0)).sigma2_bar
        assert s2 == pytest.approx(2.0 * s1, rel=1e-12)

    def test_heterogeneous_sums(self):
        zg = np.array([0.5, 1.0, 2.0])
        cfg = SystemConfig(n_elements=3, eta=np.array([0.5, 0.9, 1.0]),
                           v=LinkParams(1, 1), g=LinkParams(2, 1), h=LinkParams(3, 1),
                           zeta_g=zg)
        tn = w_stats(cfg)
        t = gamma_ratio_t(2.0, 3.0, 0.5)
        kg, kh = 2.0 * zg, 3.0
        expect_mu = np.sum(cfg.eta * np.sqrt(kg * kh / 6.0)) * t
        assert tn.mu_bar == pytest.approx(expect_mu, rel=1e-12)


class TestWMeanVar:
    def test_half_normal_mean(self):
        mu, var = w_mean_var(TruncatedNormal(mu_bar=0.0, sigma2_bar=1.0))
        assert mu == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-12)
        assert var == pytest.approx(1.0 - 2.0 / math.pi, rel=1e-12)

    def test_deep_truncation_is_identity(self):
        tn = TruncatedNormal(mu_bar=9.0, sigma2_bar=1.0)  # z_bar = -9
        mu, var = w_mean_var(tn)
        assert abs(mu - tn.mu_bar) < 1e-12
        assert abs(var - tn.sigma2_bar) < 1e-12

    def test_against_rejection_sampler(self):
        tn = TruncatedNormal(mu_bar=2.0, sigma2_bar=1.0)
        draws = truncated_normal_sample(tn, np.random.default_rng(5), 10**6)
        mu, var = w_mean_var(tn)
        assert draws.mean() == pytest.approx(mu, rel=0.003)
        assert draws.var() == pytest.approx(var, rel=0.01)


class TestWMoment:
    def test_first_moment_matches_mean(self):
        tn = TruncatedNormal(mu_bar=1.3, sigma2_bar=0.49)
        mu, _ = w_mean_var(tn)
        assert w_moment(tn, 1) == pytest.approx(mu, abs=1e-12)

    def test_second_moment_matches_variance_identity(self):
        tn = TruncatedNormal(mu_bar=0.4, sigma2_bar=2.25)
        mu, var = w_mean_var(tn)
        assert w_moment(tn, 2) == pytest.approx(mu * mu + var, abs=1e-12)

    def test_fourth_moment_against_sampler(self):
        tn = TruncatedNormal(mu_bar=5.0, sigma2_bar=2.0)
        draws = truncated_normal_sample(tn, np.random.default_rng(17), 2 * 10**6)
        m4 = (draws**4).mean()
        se = (draws**4).std() / math.sqrt(draws.size)
        assert abs(w_moment(tn, 4) - m4) < 3 * se

    def test_domain(self):
        tn = TruncatedNormal(mu_bar=1.0, sigma2_bar=1.0)
        for bad in (0, 5, -1):
            with pytest.raises(ValueError):
                w_moment(tn, bad)


class TestQuantizedStats:
    def test_many_bits_recovers_unquantized(self):
        cfg = unit_config(24, 3.0, 4.0, eta=0.9)
        tn = w_stats(cfg)
        qs = quantized_w_stats(cfg, 40)
        assert qs.real_part.mu_bar == pytest.approx(tn.mu_bar, rel=1e-12)
        assert qs.real_part.sigma2_bar == pytest.approx(tn.sigma2_bar, rel=1e-9)
        assert qs.imag_part.sigma2_bar == pytest.approx(0.0, abs=1e-12)

    def test_single_bit_mean(self):
        cfg = unit_config(8, 1.0, 1.0)
        tn = w_stats(cfg)
        qs = quantized_w_stats(cfg, 1)
        assert qs.real_part.mu_bar == pytest.approx(2.0 * tn.mu_bar / math.pi, rel=1e-12)

    def test_four_bit_mean_ratio(self):
        cfg = unit_config(8, 2.0, 3.0)
        qs = quantized_w_stats(cfg, 4)
        ratio = qs.real_part.mu_bar / w_stats(cfg).mu_bar
        assert ratio == pytest.approx(math.sin(math.pi / 16) / (math.pi / 16), rel=1e-12)
        assert ratio == pytest.approx(0.99359, abs=1e-5)

    def test_imaginary_part_shape(self):
        qs = quantized_w_stats(unit_config(8, 1.0, 2.0), 2)
        assert qs.imag_part.mu_bar == 0.0
        assert qs.imag_part.xi == pytest.approx(2.0, rel=1e-12)
        assert qs.tau == pytest.approx(math.pi / 4.0)

    @pytest.mark.parametrize("bits", [1, 2, 3, 4, 6, 8])
    def test_variance_split_conserves_power(self, bits):
        cfg = unit_config(32, 3.0, 4.0, eta=0.9)
        qs = quantized_w_stats(cfg, bits)
        total = qs.real_part.sigma2_bar + qs.imag_part.sigma2_bar + qs.mean_sq_sum
        assert total == pytest.approx(qs.power_budget, rel=1e-12)
        assert qs.power_budget == pytest.approx(float(np.sum(cfg.eta**2 * 1.0 * 1.0)), rel=1e-12)
        assert qs.real_part.sigma2_bar > 0
        assert qs.imag_part.sigma2_bar > 0

    @pytest.mark.parametrize("bits", [1, 2, 4])
    def test_single_element_literal_identity(self, bits):
        # with one element the squared-mean sum is exactly mu_R^2
        cfg = unit_config(1, 2.0, 3.0, eta=0.7)
        qs = quantized_w_stats(cfg, bits)
        total = (qs.real_part.sigma2_bar + qs.real_part.mu_bar**2
                 + qs.imag_part.sigma2_bar)
        assert total == pytest.approx(qs.power_budget, rel=1e-12)

    def test_moments_against_mc(self):
        cfg = unit_config(16, 1.0, 2.0, eta=0.9)
        bits = 2
        qs = quantized_w_stats(cfg, bits)
        rng = np.random.default_rng(23)
        trials = 10**6
        g = np.sqrt(rng.gamma(cfg.g.m, cfg.zeta_g[0], (trials, 16)))
        h = np.sqrt(rng.gamma(cfg.h.m, cfg.zeta_h[0], (trials, 16)))
        eps = rng.uniform(-qs.tau, qs.tau, (trials, 16))
        prod = g * h * 0.9
        w_re = (prod * np.cos(eps)).sum(axis=1)
        w_im = (prod * np.sin(eps)).sum(axis=1)
        assert w_re.mean() == pytest.approx(qs.real_part.mu_bar, rel=0.005)
        assert w_re.var() == pytest.approx(qs.real_part.sigma2_bar, rel=0.01)
        assert w_im.var() == pytest.approx(qs.imag_part.sigma2_bar, rel=0.01)

    def test_rejects_zero_bits(self):
        with pytest.raises(ValueError):
            quantized_w_stats(unit_config(4, 1.0, 1.0), 0)
