"""Closed-form link performance metrics.

Outage probability and its high-SNR asymptote (diversity order, array and
coding gains), Jensen rate bounds and their large-array limit under the
1/N^2 power-scaling law, the single-point upper bound on the average symbol
error rate, and the rate bounds under quantized reflection phases.

Every asymptotic constant is assembled in log space: the outage-floor
constant grows like a Gamma-function power of the element count and
overflows float64 well below the element counts of interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sc

from .channel import SystemConfig
from .cltapprox import (QuantizedWStats, TruncatedNormal, gamma_ratio_t,
                        quantized_w_stats, w_mean_var, w_moment, w_stats)
from .errors import ConfigError
from .snrdist import SnrCdfParams, snr_cdf
from .specfun import log_gaussian_q

__all__ = [
    "AsymptoticResult",
    "RateBounds",
    "outage_probability",
    "asymptotic_outage",
    "rate_bounds",
    "asymptotic_rate",
    "ser_upper_bound",
    "asymptotic_ser",
    "quantized_rate_bounds",
]


def outage_probability(gamma_th: float, p: SnrCdfParams, method: str = "closed") -> float:
    """P(optimized SNR <= gamma_th), via the closed-form SNR CDF."""
    if gamma_th <= 0:
        raise ValueError("gamma_th must be positive")
    return float(snr_cdf(gamma_th, p, method=method))


@dataclass(frozen=True)
class AsymptoticResult:
    """Diversity order plus the gain constants of the high-SNR floor.

    ``omega_op`` can overflow float64 for large element counts; the exact
    natural log is kept alongside and is what the evaluators use.
    """

    g_d: float
    log_omega_op: float
    o_c: float
    g_c: float

    @property
    def omega_op(self) -> float:
        try:
            return math.exp(self.log_omega_op)
        except OverflowError:
            return math.inf


def _log_omega_op(cfg: SystemConfig) -> tuple[float, float]:
    """(log Omega_op, G_d) for the outage floor Omega_op*(g_th/g_bar)^G_d."""
    m_g, m_h = cfg.g.m, cfg.h.m
    if m_g == m_h:
        raise ConfigError(
            "asymptotic gain constants need m_g != m_h (equal shapes hit a "
            "Gamma pole); the diversity order is still m_v + m*N -- estimate "
            "the slope via Monte-Carlo instead")
    m_a, m_b = min(m_g, m_h), max(m_g, m_h)
    if 2.0 * m_b - 2.0 * m_a - 1.0 <= 0:
        raise ConfigError(
            f"asymptotic constants undefined for m_b - m_a <= 1/2 "
            f"(got m_a={m_a}, m_b={m_b})")
    m_v, kappa_v = cfg.v.m, cfg.v.kappa
    n = cfg.n_elements
    g_d = m_v + m_a * n

    # Direct-link density coefficient near the origin.
    log_total = (math.log(2.0) + sc.gammaln(2.0 * m_v) + m_v * math.log(m_v)
                 - sc.gammaln(m_v) - m_v * math.log(kappa_v))
    # Per-element coefficient of the product-amplitude transform tail.
    kgkh = cfg.kappa_g * cfg.kappa_h
    k_min = kgkh  # kappa product is symmetric in which leg is weaker
    m_c = 0.5 * (m_a + m_b)
    for eta, kk in zip(cfg.eta, k_min):
        log_psi = (math.log(4.0) + m_c * math.log(m_a * m_b)
                   - m_c * math.log(eta * eta * kk)
                   - sc.gammaln(m_a) - sc.gammaln(m_b))
        tau = 2.0 * math.sqrt(m_a * m_b / (kk * eta * eta))
        log_total += (0.5 * math.log(math.pi) + log_psi
                      + (m_a - m_b) * math.log(2.0 * tau)
                      + sc.gammaln(2.0 * m_a) + sc.gammaln(2.0 * m_b - 2.0 * m_a)
                      - sc.gammaln(m_b - m_a + 0.5))
    log_total -= sc.gammaln(2.0 * g_d + 1.0)
    return log_total, g_d


def asymptotic_outage(cfg: SystemConfig, gamma_th: float
                      ) -> tuple[AsymptoticResult, Callable[[float], float]]:
    """High-SNR outage floor; returns the constants and an evaluator in gamma_bar."""
    if gamma_th <= 0:
        raise ValueError("gamma_th must be positive")
    log_om, g_d = _log_omega_op(cfg)
    o_c = math.exp(-math.log(gamma_th) - log_om / g_d)
    g_c = _coding_gain(cfg, log_om, g_d)
    result = AsymptoticResult(g_d=g_d, log_omega_op=log_om, o_c=o_c, g_c=g_c)

    def evaluator(gamma_bar: float) -> float:
        return math.exp(log_om + g_d * (math.log(gamma_th) - math.log(gamma_bar)))

    return result, evaluator


def _coding_gain(cfg: SystemConfig, log_om: float, g_d: float) -> float:
    alpha, beta = cfg.modulation.alpha, cfg.modulation.beta
    log_gc = math.log(beta) - (math.log(alpha) + (g_d - 1.0) * math.log(2.0)
                               + log_om + sc.gammaln(g_d + 0.5)
                               - 0.5 * math.log(math.pi)) / g_d
    return math.exp(log_gc)


def asymptotic_ser(cfg: SystemConfig
                   ) -> tuple[AsymptoticResult, Callable[[float], float]]:
    """High-SNR average-SER floor (G_c * gamma_bar)^-G_d with shared G_d."""
    log_om, g_d = _log_omega_op(cfg)
    g_c = _coding_gain(cfg, log_om, g_d)
    # Array gain is threshold-specific; report it at unit threshold.
    o_c = math.exp(-log_om / g_d)
    result = AsymptoticResult(g_d=g_d, log_omega_op=log_om, o_c=o_c, g_c=g_c)
    log_gc = math.log(g_c)

    def evaluator(gamma_bar: float) -> float:
        return math.exp(-g_d * (log_gc + math.log(gamma_bar)))

    return result, evaluator


@dataclass(frozen=True)
class RateBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError(f"rate bounds out of order: {self.lower} > {self.upper}")


def _direct_moment(cfg: SystemConfig, alpha: int) -> float:
    m, kappa = cfg.v.m, cfg.v.kappa
    return math.exp(sc.gammaln(m + alpha / 2.0) - sc.gammaln(m)) * (kappa / m) ** (alpha / 2.0)


def _jensen_bounds(cfg: SystemConfig, e_w: list[float]) -> RateBounds:
    """Rate bounds from the first four moments of the reflected sum.

    ``e_w[j]`` must hold E[W^j] for j = 0..4 of whatever reflected-sum model
    is in force (continuous or quantized phases).
    """
    e_v = [1.0] + [_direct_moment(cfg, j) for j in (1, 2, 3, 4)]
    gb = cfg.gamma_bar
    mean_snr = gb * (e_v[2] + 2.0 * e_v[1] * e_w[1] + e_w[2])
    mean_sq = gb * gb * sum(math.comb(4, j) * e_v[j] * e_w[4 - j] for j in range(5))
    lower = math.log2(1.0 + mean_snr**3 / mean_sq)
    upper = math.log2(1.0 + mean_snr)
    return RateBounds(lower=lower, upper=upper)


def rate_bounds(cfg: SystemConfig) -> RateBounds:
    """Jensen lower/upper bounds on the average achievable rate."""
    tn = w_stats(cfg)
    mu_w, s2_w = w_mean_var(tn)
    e_w = [1.0, mu_w, mu_w**2 + s2_w, w_moment(tn, 3), w_moment(tn, 4)]
    return _jensen_bounds(cfg, e_w)


def asymptotic_rate(cfg: SystemConfig, energy_scaled_snr: float) -> float:
    """Large-array rate limit under transmit power scaled down by N^2.

    ``energy_scaled_snr`` is the element-count-free SNR gamma_bar * N^2 held
    fixed along the scaling; the limit depends only on per-element leg
    statistics and requires a homogeneous surface.
    """
    if energy_scaled_snr < 0:
        raise ValueError("energy_scaled_snr must be nonnegative")
    if cfg.n_elements and (np.ptp(cfg.eta) or np.ptp(cfg.zeta_g) or np.ptp(cfg.zeta_h)):
        raise ConfigError("asymptotic rate assumes homogeneous elements")
    eta = float(cfg.eta[0]) if cfg.n_elements else 0.9
    kg = float(cfg.kappa_g[0]) if cfg.n_elements else cfg.g.kappa
    kh = float(cfg.kappa_h[0]) if cfg.n_elements else cfg.h.kappa
    t = gamma_ratio_t(cfg.g.m, cfg.h.m, 0.5)
    mu_inf_sq = eta**2 * kg * kh * t * t / (cfg.g.m * cfg.h.m)
    return math.log2(1.0 + energy_scaled_snr * mu_inf_sq)


def _ser_log_objective(theta: float, cfg: SystemConfig, tn: TruncatedNormal) -> float:
    """Log of the single-angle integrand whose maximum gives the SER bound."""
    beta_gb = cfg.modulation.beta * cfg.gamma_bar
    m_v, kappa_v = cfg.v.m, cfg.v.kappa
    s2 = tn.sigma2_bar
    u1 = m_v / kappa_v + beta_gb / (2.0 * math.sin(theta) ** 2)
    z1 = 0.5 / s2 + beta_gb / (2.0 * math.cos(theta) ** 2)
    z2 = tn.mu_bar / (2.0 * s2)
    return (z2 * z2 / z1 - m_v * math.log(u1) - 0.5 * math.log(z1)
            + float(log_gaussian_q(-z2 * math.sqrt(2.0 / z1))))


def _maximize_objective(fun, lo: float, hi: float, grid: int = 2048,
                        tol: float = 1e-10) -> float:
    """Grid scan then golden-section refinement of a smooth 1-D maximum."""
    xs = np.linspace(lo, hi, grid)
    vals = np.array([fun(x) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise ArithmeticError("SER bound objective is not finite on the scan grid")
    i = int(np.argmax(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, grid - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def ser_upper_bound(cfg: SystemConfig) -> float:
    """Single-point upper bound on the average symbol error rate.

    Bounds the exact half-axis angular integral of the SER by the peak of
    its integrand; exact at zero SNR where the bound equals alpha/2.
    """
    tn = w_stats(cfg)
    eps = 1e-9
    theta_u = _maximize_objective(lambda t: _ser_log_objective(t, cfg, tn),
                                  eps, math.pi / 2.0 - eps)
    s2 = tn.sigma2_bar
    log_bound = (math.log(cfg.modulation.alpha / 2.0) + math.log(tn.xi)
                 + cfg.v.m * math.log(cfg.v.m / cfg.v.kappa)
                 - 0.5 * math.log(2.0 * s2)
                 - tn.mu_bar**2 / (2.0 * s2)
                 + _ser_log_objective(theta_u, cfg, tn))
    return min(math.exp(log_bound), 1.0)


def _quantized_moments(qs: QuantizedWStats, variant: str) -> tuple[list[float], list[float]]:
    """Raw moments (orders 0..4) of the real part and even moments of the
    imaginary part under the selected evaluation variant."""
    re, im = qs.real_part, qs.imag_part
    if variant == "exact":
        mu_r, s2_r = w_mean_var(re)
        e_r = [1.0, mu_r, mu_r**2 + s2_r, w_moment(re, 3), w_moment(re, 4)]
    elif variant == "large_n":
        # Truncation ignored: plain normal moments.
        mu, s2 = re.mu_bar, re.sigma2_bar
        e_r = [1.0, mu, mu**2 + s2, mu**3 + 3.0 * mu * s2,
               mu**4 + 6.0 * mu**2 * s2 + 3.0 * s2**2]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    s2_i = im.sigma2_bar
    e_i = [1.0, 0.0, s2_i, 0.0, 3.0 * s2_i**2]
    return e_r, e_i


def quantized_rate_bounds(cfg: SystemConfig, bits: int,
                          variant: str = "exact") -> RateBounds:
    """Jensen rate bounds under b-bit phase quantization.

    ``variant="exact"`` keeps the truncated-normal moments of the real
    part; ``variant="large_n"`` drops the truncation corrections, the
    simplification appropriate when the element count is large.
    """
    qs = quantized_w_stats(cfg, bits)
    e_r, e_i = _quantized_moments(qs, variant)
    e_v = [1.0] + [_direct_moment(cfg, j) for j in (1, 2, 3, 4)]
    gb = cfg.gamma_bar

    # snr/gb = (v + W_R)^2 + W_I^2 with all three factors independent.
    e_vr2 = e_v[2] + 2.0 * e_v[1] * e_r[1] + e_r[2]
    mean_snr = gb * (e_vr2 + e_i[2])
    e_vr4 = sum(math.comb(4, j) * e_v[j] * e_r[4 - j] for j in range(5))
    mean_sq = gb * gb * (e_vr4 + 2.0 * e_vr2 * e_i[2] + e_i[4])
    lower = math.log2(1.0 + mean_snr**3 / mean_sq)
    upper = math.log2(1.0 + mean_snr)
    return RateBounds(lower=lower, upper=upper)
