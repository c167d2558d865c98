"""Numerically robust special functions and custom Gaussian-tail integrals.

Everything downstream (envelope/SNR distributions, rate and error-rate
metrics) is assembled from the functions here:

* incomplete-gamma pair ``gamma_upper`` / ``gamma_lower``,
* the Gaussian tail probability ``gaussian_q`` (and its stable log),
* the modified Bessel function of the second kind ``bessel_k``,
* ``cal_i(k, x)``  = integral of t^k exp(-t^2) over [x, inf),
* ``cal_j(k, z)``  = integral of t^(mt-k) exp(-Delta t^2) Gamma((k+1)/2, t^2)
  over [z, inf), parameterized by :class:`JParams`.

``cal_j`` carries two evaluation paths.  The reference path is adaptive
Gauss-Kronrod quadrature of the defining integral (abs tol 1e-12, rel tol
1e-10, semi-infinite range mapped internally).  The fast path uses the
closed forms obtained by expanding the incomplete gamma factor (odd k) or
integrating by parts (even k); it is enabled only when every factorial and
summation index it needs is a nonnegative integer, and it is validated
against the quadrature path in the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc
from scipy.integrate import quad

__all__ = [
    "JParams",
    "gamma_upper",
    "gamma_lower",
    "gaussian_q",
    "log_gaussian_q",
    "bessel_k",
    "cal_i",
    "cal_j",
    "cal_j_between",
]

# Quadrature tolerances used for every reference-path integral.
_QUAD_EPSABS = 1e-12
_QUAD_EPSREL = 1e-10


@dataclass(frozen=True)
class JParams:
    """Fixed parameters of the tail integral family ``cal_j``.

    ``m_tilde_v`` is the polynomial degree budget (2*m_v - 1 of the
    direct-link shape), ``scale`` the total Gaussian decay rate, and
    ``delta = scale - 1`` the decay rate left after splitting off the
    incomplete-gamma factor.  ``scale > 1`` is required so that ``delta``
    stays positive.
    """

    m_tilde_v: int
    delta: float
    scale: float

    def __post_init__(self):
        if self.m_tilde_v < 0 or self.m_tilde_v != int(self.m_tilde_v):
            raise ValueError(f"m_tilde_v must be a nonnegative integer, got {self.m_tilde_v}")
        if not self.scale > 1.0:
            raise ValueError(f"scale must exceed 1, got {self.scale}")
        if not math.isclose(self.delta, self.scale - 1.0, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("delta must equal scale - 1")

    @classmethod
    def from_delta(cls, m_tilde_v: int, delta: float) -> "JParams":
        return cls(m_tilde_v=m_tilde_v, delta=delta, scale=delta + 1.0)


def gamma_upper(q: float, z: float) -> float:
    """Upper incomplete gamma integral over [z, inf) of t^(q-1) e^-t."""
    if q <= 0:
        raise ValueError(f"gamma_upper requires q > 0, got q={q}")
    if z < 0:
        raise ValueError(f"gamma_upper requires z >= 0, got z={z}")
    return float(sc.gammaincc(q, z) * sc.gamma(q))


def gamma_lower(q: float, z: float) -> float:
    """Lower incomplete gamma integral over [0, z]."""
    if q <= 0:
        raise ValueError(f"gamma_lower requires q > 0, got q={q}")
    if z < 0:
        raise ValueError(f"gamma_lower requires z >= 0, got z={z}")
    return float(sc.gammainc(q, z) * sc.gamma(q))


def gaussian_q(x):
    """Standard normal tail probability P(Z > x)."""
    return 0.5 * sc.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def log_gaussian_q(x):
    """log of ``gaussian_q``, stable far into both tails."""
    return sc.log_ndtr(-np.asarray(x, dtype=float))


def bessel_k(nu: float, x: float):
    """Modified Bessel function of the second kind; symmetric in nu."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_k requires x > 0")
    return sc.kv(nu, x)


def cal_i(k: int, x: float) -> float:
    """Gaussian-weighted monomial tail: integral of t^k e^{-t^2}, t in [x, inf).

    For x >= 0 this is half an upper incomplete gamma; for x < 0 the part
    left of the origin folds back with sign (-1)^k through the lower
    incomplete gamma, so both branches match continuously at x = 0.
    """
    if k < 0 or k != int(k):
        raise ValueError(f"cal_i requires integer k >= 0, got {k}")
    k = int(k)
    q = (k + 1) / 2.0
    if x >= 0:
        return 0.5 * gamma_upper(q, x * x)
    return 0.5 * sc.gamma(q) + 0.5 * (-1.0) ** k * gamma_lower(q, x * x)


def _cal_j_integrand(t, k, p: JParams):
    q = (k + 1) / 2.0
    return t ** (p.m_tilde_v - k) * np.exp(-p.delta * t * t) * sc.gammaincc(q, t * t) * sc.gamma(q)


def _cal_j_quad(k: int, lo: float, hi: float, p: JParams) -> float:
    val, _ = quad(_cal_j_integrand, lo, hi, args=(k, p),
                  epsabs=_QUAD_EPSABS, epsrel=_QUAD_EPSREL, limit=300)
    return val


def _cal_j_odd(k: int, z: float, p: JParams) -> float:
    # Expand Gamma((k+1)/2, t^2) as a finite exponential sum; needs
    # (k+1)/2 to be a positive integer, i.e. odd k.
    d_o = (k + 1) // 2
    d_e = (p.m_tilde_v - k + 1) / 2.0  # may be half-integer; only an exponent
    total = 0.0
    for i in range(d_o):
        total += gamma_upper(d_e + i, p.scale * z * z) / (math.factorial(i) * p.scale ** (d_e + i))
    return math.factorial(d_o - 1) / 2.0 * total


def _cal_j_even(k: int, z: float, p: JParams) -> float:
    # Integration by parts against the antiderivative of t^(mt-k) e^{-d t^2};
    # needs (mt - k + 1)/2 to be a positive integer.
    d_e = (p.m_tilde_v - k + 1) // 2
    kp = (k + 1) / 2.0
    total = 0.0
    for j in range(d_e):
        boundary = z ** (2 * j) * math.exp(-p.delta * z * z) * gamma_upper(kp, z * z)
        tail = gamma_upper(kp + j, p.scale * z * z) / p.scale ** (kp + j)
        total += (boundary - tail) / (p.delta ** (d_e - j) * math.factorial(j))
    return math.factorial(d_e - 1) / 2.0 * total


def _closed_form_available(k: int, z: float, p: JParams) -> bool:
    if z < 0:
        return False
    if k % 2 == 1:
        return True
    return (p.m_tilde_v - k + 1) % 2 == 0 and (p.m_tilde_v - k + 1) // 2 >= 1


def cal_j(k: int, z: float, p: JParams, force_quadrature: bool = False) -> float:
    """Tail integral of t^(mt-k) e^{-delta t^2} Gamma((k+1)/2, t^2) on [z, inf).

    Uses the closed form when its index conditions hold, otherwise falls
    back to quadrature; never raises on an index mismatch.
    """
    if k < 0 or k != int(k):
        raise ValueError(f"cal_j requires integer k >= 0, got {k}")
    k = int(k)
    if k > p.m_tilde_v:
        raise ValueError(f"cal_j requires k <= m_tilde_v, got k={k} > {p.m_tilde_v}")
    if not force_quadrature and _closed_form_available(k, z, p):
        return _cal_j_odd(k, z, p) if k % 2 == 1 else _cal_j_even(k, z, p)
    return _cal_j_quad(k, z, np.inf, p)


def cal_j_between(k: int, z_lo: float, z_hi: float, p: JParams,
                  force_quadrature: bool = False) -> float:
    """``cal_j(k, z_lo) - cal_j(k, z_hi)`` evaluated without cancellation.

    The closed forms difference accurately; the quadrature fallback
    integrates the finite interval [z_lo, z_hi] directly instead of
    subtracting two semi-infinite tails.
    """
    if z_hi < z_lo:
        raise ValueError("cal_j_between requires z_lo <= z_hi")
    if not force_quadrature and _closed_form_available(k, z_lo, p):
        f = _cal_j_odd if k % 2 == 1 else _cal_j_even
        return f(k, z_lo, p) - f(k, z_hi, p)
    return _cal_j_quad(k, z_lo, z_hi, p)
