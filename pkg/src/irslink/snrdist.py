"""Distribution of the phase-optimized received SNR.

Co-phasing every reflected element with the direct channel turns the
received envelope into R = v + W, the direct amplitude plus the truncated
normal reflected sum, and the SNR into gamma_bar * R^2.  This module holds:

* the co-phasing rule and the resulting maximum SNR,
* the closed-form envelope PDF of R (piecewise around the reflected mean),
* the piecewise envelope/SNR CDF assembled from ``cal_i`` / ``cal_j``,
* the change-of-variables SNR PDF,
* the exact PDF of a single scaled amplitude product, used as the N = 1
  oracle for the truncated-normal approximation.

The closed-form CDF is only available when the direct-link shape is a
multiple of 1/2 (so the binomial expansion has an integer degree); other
shapes raise :class:`UnsupportedShapeError` and must be estimated by
Monte-Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc
from scipy.integrate import quad

from .channel import LinkParams, SystemConfig
from .cltapprox import TruncatedNormal, w_stats
from .errors import NumericalConsistencyError, UnsupportedShapeError
from .specfun import JParams, cal_i, cal_j, cal_j_between, gamma_upper

__all__ = [
    "SnrCdfParams",
    "ProductPdfParams",
    "optimal_phases",
    "optimal_snr",
    "envelope_pdf",
    "envelope_cdf",
    "snr_cdf",
    "snr_pdf",
    "product_pdf",
]

# Numerical slack on CDF values: clamp within it, error beyond it.
_CDF_ERROR = 1e-6


def optimal_phases(phi_v: float, phi_g, phi_h):
    """Per-element reflection phases that co-phase everything with the direct path."""
    phi_g = np.asarray(phi_g, dtype=float)
    phi_h = np.asarray(phi_h, dtype=float)
    if phi_g.shape != phi_h.shape:
        raise ValueError("phase vectors must have equal length")
    theta = phi_v - (phi_h + phi_g)
    # wrap into (-pi, pi]
    return -np.mod(-theta + math.pi, 2.0 * math.pi) + math.pi


def optimal_snr(v_amp: float, g_amp, h_amp, eta, gamma_bar: float) -> float:
    """Maximum received SNR under co-phasing: gamma_bar*(v + sum eta*g*h)^2."""
    g_amp = np.atleast_1d(np.asarray(g_amp, dtype=float))
    h_amp = np.atleast_1d(np.asarray(h_amp, dtype=float))
    eta = np.broadcast_to(np.asarray(eta, dtype=float), g_amp.shape)
    if g_amp.shape != h_amp.shape:
        raise ValueError("amplitude vectors must have equal length")
    if gamma_bar <= 0:
        raise ValueError("gamma_bar must be positive")
    return float(gamma_bar * (v_amp + np.sum(eta * g_amp * h_amp)) ** 2)


@dataclass(frozen=True)
class SnrCdfParams:
    """Derived constants of the closed-form SNR distribution."""

    m_v: float
    kappa_v: float
    tn: TruncatedNormal
    gamma_bar: float

    def __post_init__(self):
        if abs(2.0 * self.m_v - round(2.0 * self.m_v)) > 1e-12:
            raise UnsupportedShapeError(
                f"closed-form SNR distribution needs 2*m_v integer, got m_v={self.m_v}; "
                "use the Monte-Carlo path for other shapes")
        if self.gamma_bar <= 0:
            raise ValueError("gamma_bar must be positive")

    @classmethod
    def from_config(cls, cfg: SystemConfig, tn: TruncatedNormal | None = None) -> "SnrCdfParams":
        return cls(m_v=cfg.v.m, kappa_v=cfg.v.kappa,
                   tn=tn if tn is not None else w_stats(cfg),
                   gamma_bar=cfg.gamma_bar)

    @property
    def m_tilde_v(self) -> int:
        return int(round(2.0 * self.m_v - 1.0))

    @property
    def a(self) -> float:
        return self.m_v / self.kappa_v + 0.5 / self.tn.sigma2_bar

    @property
    def delta(self) -> float:
        return 2.0 * self.tn.sigma2_bar * self.a - 1.0

    @property
    def log_lam(self) -> float:
        tn = self.tn
        return (self.m_v * math.log(self.m_v) + math.log(tn.xi)
                - sc.gammaln(self.m_v) - self.m_v * math.log(self.kappa_v)
                - self.m_v * math.log(self.a) - 0.5 * math.log(2.0 * math.pi * tn.sigma2_bar))

    @property
    def lam(self) -> float:
        return math.exp(self.log_lam)

    @property
    def j_params(self) -> JParams:
        return JParams.from_delta(self.m_tilde_v, self.delta)

    def standardized(self, r: float) -> float:
        """(r - mu_bar) / (2 sigma2_bar sqrt(a)), the CDF/PDF argument scale."""
        return (r - self.tn.mu_bar) / (2.0 * self.tn.sigma2_bar * math.sqrt(self.a))


def envelope_pdf(r, p: SnrCdfParams):
    """Closed-form PDF of the received envelope R = v + W."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    mtv = p.m_tilde_v
    for idx in np.ndindex(r.shape):
        ri = r[idx]
        if ri <= 0:
            continue
        z = p.standardized(ri)
        total = 0.0
        for k in range(mtv + 1):
            total += math.comb(mtv, k) * z ** (mtv - k) * cal_i(k, -z)
        out[idx] = 2.0 * math.exp(p.log_lam - p.delta * z * z) * total
    return out if out.shape else float(out)


def _cdf_below_mean(r: float, p: SnrCdfParams) -> float:
    # Integrate the standardized envelope density from r up to the
    # reflected mean: each k-term is a finite-interval tail difference.
    mtv = p.m_tilde_v
    jp = p.j_params
    z_r = -p.standardized(r)          # in (0, z_0]
    z_0 = -p.standardized(0.0)
    total = 0.0
    for k in range(mtv + 1):
        total += (math.comb(mtv, k) * (-1.0) ** (mtv - k)
                  * cal_j_between(k, z_r, z_0, jp))
    scale = 2.0 * math.sqrt(p.a) * p.tn.sigma2_bar
    return math.exp(p.log_lam) * scale * total


def _cdf_above_mean(r: float, p: SnrCdfParams) -> float:
    # One minus the upper tail; the even-k boundary term integrates the
    # complete-gamma part of the density, the cal_j term the rest.
    mtv = p.m_tilde_v
    jp = p.j_params
    z = p.standardized(r)
    total = 0.0
    for k in range(mtv + 1):
        if k % 2 == 0:
            q = (mtv - k + 1) / 2.0
            boundary = (sc.gamma((k + 1) / 2.0) * p.delta ** (-q)
                        * gamma_upper(q, p.delta * z * z))
        else:
            boundary = 0.0
        total += math.comb(mtv, k) * (boundary - (-1.0) ** k * cal_j(k, z, jp))
    scale = 2.0 * math.sqrt(p.a) * p.tn.sigma2_bar
    return 1.0 - math.exp(p.log_lam) * scale * total


def _envelope_cdf_quadrature(r: float, p: SnrCdfParams) -> float:
    mu = p.tn.mu_bar
    f = lambda t: envelope_pdf(t, p)
    if r <= mu:
        val, _ = quad(f, 0.0, r, epsabs=1e-12, epsrel=1e-10, limit=300)
        return val
    head, _ = quad(f, 0.0, mu, epsabs=1e-12, epsrel=1e-10, limit=300)
    tail, _ = quad(f, mu, r, epsabs=1e-12, epsrel=1e-10, limit=300)
    return head + tail


def _check_probability(raw: float, where: str) -> float:
    if raw < -_CDF_ERROR or raw > 1.0 + _CDF_ERROR or math.isnan(raw):
        raise NumericalConsistencyError(
            f"{where} evaluated to {raw!r}, outside [0,1] beyond the 1e-6 slack")
    return min(max(raw, 0.0), 1.0)


def envelope_cdf(r, p: SnrCdfParams, method: str = "closed"):
    """CDF of the envelope; ``method`` picks the cal_j path ("closed") or
    direct quadrature of the closed-form PDF ("quadrature")."""
    if method not in ("closed", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    mu = p.tn.mu_bar
    for idx in np.ndindex(r.shape):
        ri = r[idx]
        if ri <= 0:
            continue
        if method == "quadrature":
            raw = _envelope_cdf_quadrature(ri, p)
        elif ri <= mu:
            raw = _cdf_below_mean(ri, p)
        else:
            raw = _cdf_above_mean(ri, p)
        out[idx] = _check_probability(raw, "envelope_cdf")
    return out if out.shape else float(out)


def snr_cdf(y, p: SnrCdfParams, method: str = "closed"):
    """CDF of the optimized SNR at threshold(s) y."""
    y = np.asarray(y, dtype=float)
    r = np.sqrt(np.maximum(y, 0.0) / p.gamma_bar)
    return envelope_cdf(r, p, method=method)


def snr_pdf(y, p: SnrCdfParams):
    """PDF of the optimized SNR: envelope density carried through r = sqrt(y/gb)."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("snr_pdf requires y > 0")
    r = np.sqrt(y / p.gamma_bar)
    val = envelope_pdf(r, p) / (2.0 * np.sqrt(y * p.gamma_bar))
    return val if val.shape else float(val)


@dataclass(frozen=True)
class ProductPdfParams:
    """Exact distribution of one scaled product eta * g * h."""

    g: LinkParams
    h: LinkParams
    eta: float = 1.0

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")

    @property
    def tau_n(self) -> float:
        return 2.0 * math.sqrt(self.g.m * self.h.m / (self.g.kappa * self.h.kappa * self.eta**2))

    @property
    def log_psi(self) -> float:
        mc = 0.5 * (self.g.m + self.h.m)
        return (math.log(4.0) + mc * math.log(self.g.m * self.h.m)
                - mc * math.log(self.eta**2 * self.g.kappa * self.h.kappa)
                - sc.gammaln(self.g.m) - sc.gammaln(self.h.m))


def product_pdf(w, p: ProductPdfParams):
    """PDF of the product of two independent Nakagami amplitudes times eta."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("product_pdf requires w > 0")
    order = p.g.m - p.h.m
    val = (np.exp(p.log_psi + (p.g.m + p.h.m - 1.0) * np.log(w))
           * sc.kv(order, w * p.tau_n))
    return val if val.shape else float(val)
