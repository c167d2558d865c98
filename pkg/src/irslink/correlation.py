"""Spatially correlated surface channels and the two phase-control schemes.

The surface is a planar grid of elements; arrival and departure angles are
Gaussian around their means in both azimuth and elevation, which yields
separable correlation: a Kronecker product of an azimuth factor and an
elevation factor, each with unit diagonal.  Channels are correlated by
multiplying i.i.d. vectors with the Hermitian square roots.

Scheme-2 co-phases against the correlated entries (the phases the
correlation square roots contribute included), achieving the per-element
modulus sum; Scheme-1 reuses the phases of the uncorrelated draws and pays
the misalignment penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SystemConfig, nakagami_sample
from .montecarlo import Estimate, SimPlan, _mean_estimate, chunk_rng

__all__ = [
    "AngleSpread",
    "CorrelationConfig",
    "CorrelationMatrices",
    "corr_matrix_azimuth",
    "corr_matrix_elevation",
    "build_correlation",
    "correlated_snr",
    "simulate_scheme_rates",
]

_EIG_CLIP = -1e-10


@dataclass(frozen=True)
class AngleSpread:
    """Mean and standard deviation (radians) of azimuth/elevation angles."""

    mean_az: float
    std_az: float
    mean_el: float
    std_el: float

    def __post_init__(self):
        if self.std_az < 0 or self.std_el < 0:
            raise ValueError("angle spreads must be nonnegative")


@dataclass(frozen=True)
class CorrelationConfig:
    """Element grid plus angle statistics for arrivals (aoa) and departures (aod).

    Spacings are in wavelength multiples.
    """

    n_az: int
    n_el: int
    d_az: float
    d_el: float
    aoa: AngleSpread
    aod: AngleSpread

    def __post_init__(self):
        if self.n_az < 1 or self.n_el < 1:
            raise ValueError("grid dimensions must be positive")
        if self.d_az <= 0 or self.d_el <= 0:
            raise ValueError("element spacings must be positive")

    @property
    def n_total(self) -> int:
        return self.n_az * self.n_el

    @classmethod
    def square_surface(cls, n_elements: int, side_m: float, wavelength_m: float,
                       aoa: AngleSpread, aod: AngleSpread) -> "CorrelationConfig":
        """Squarest n_az x n_el tiling (n_az >= n_el) of a side x side surface."""
        n_el = int(math.isqrt(n_elements))
        while n_elements % n_el:
            n_el -= 1
        n_az = n_elements // n_el
        return cls(n_az=n_az, n_el=n_el,
                   d_az=side_m / n_az / wavelength_m,
                   d_el=side_m / n_el / wavelength_m,
                   aoa=aoa, aod=aod)


def corr_matrix_elevation(cfg: CorrelationConfig, spread: AngleSpread) -> np.ndarray:
    """Elevation factor: linear phase ramp damped by the angular spread."""
    n = cfg.n_el
    psi, delta = spread.mean_el, spread.std_el
    diff = np.arange(n)[None, :] - np.arange(n)[None, :].T  # y - x
    c = 2.0 * math.pi * cfg.d_el * diff
    return np.exp(1j * c * math.cos(psi)) * np.exp(-0.5 * (delta * c) ** 2 * math.sin(psi) ** 2)


def corr_matrix_azimuth(cfg: CorrelationConfig, spread: AngleSpread) -> np.ndarray:
    """Azimuth factor: joint Gaussian smearing over both angle spreads."""
    n = cfg.n_az
    omega, nu = spread.mean_az, spread.std_az
    psi, delta = spread.mean_el, spread.std_el
    diff = np.arange(n)[None, :] - np.arange(n)[None, :].T  # t - r
    u = 2.0 * math.pi * cfg.d_az * diff
    a1 = u * math.sin(psi)
    a2 = delta * u * math.cos(psi)
    a3 = (a2 * nu * math.sin(omega)) ** 2 + 1.0
    damp = np.exp(-(a2**2 * math.cos(omega) ** 2 + (a1 * nu) ** 2 * math.sin(omega) ** 2)
                  / (2.0 * a3))
    return a3 ** (-0.5) * damp * np.exp(1j * a1 * math.cos(omega) / a3)


@dataclass(frozen=True)
class CorrelationMatrices:
    r_a: np.ndarray
    r_d: np.ndarray
    r_a_sqrt: np.ndarray
    r_d_sqrt: np.ndarray


def _hermitian_sqrt(r: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(r)
    if np.min(vals) < _EIG_CLIP * max(1.0, float(np.max(np.abs(vals)))):
        raise ValueError(f"correlation matrix is not PSD: min eigenvalue {np.min(vals):.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def build_correlation(cfg: CorrelationConfig) -> CorrelationMatrices:
    """Kronecker-assembled correlation matrices and their Hermitian roots."""
    r_a = np.kron(corr_matrix_azimuth(cfg, cfg.aoa), corr_matrix_elevation(cfg, cfg.aoa))
    r_d = np.kron(corr_matrix_azimuth(cfg, cfg.aod), corr_matrix_elevation(cfg, cfg.aod))
    return CorrelationMatrices(r_a=r_a, r_d=r_d,
                               r_a_sqrt=_hermitian_sqrt(r_a),
                               r_d_sqrt=_hermitian_sqrt(r_d))


def correlated_snr(v_amp: float, phi_v: float, g_vec: np.ndarray, h_vec: np.ndarray,
                   matrices: CorrelationMatrices, scheme: int,
                   eta: np.ndarray, gamma_bar: float) -> float:
    """Received SNR of one realization under the chosen phase-control scheme.

    ``g_vec`` / ``h_vec`` are i.i.d. complex draws; correlation enters
    through the square-root matrices.  Scheme 2 cancels the full correlated
    phases; scheme 1 only the phases of the uncorrelated draws.
    """
    if g_vec.shape != h_vec.shape:
        raise ValueError("channel vectors must have equal length")
    g_t = g_vec @ matrices.r_d_sqrt          # row convention: g~^T = g^T R_D^(1/2)
    h_t = matrices.r_a_sqrt @ h_vec
    if scheme == 2:
        theta = phi_v - (np.angle(g_t) + np.angle(h_t))
    elif scheme == 1:
        theta = phi_v - (np.angle(g_vec) + np.angle(h_vec))
    else:
        raise ValueError("scheme must be 1 or 2")
    reflected = np.sum(g_t * eta * np.exp(1j * theta) * h_t)
    return float(gamma_bar * np.abs(v_amp * np.exp(1j * phi_v) + reflected) ** 2)


def _complex_nakagami(m: float, zeta, rng: np.random.Generator, shape) -> np.ndarray:
    amp = nakagami_sample(m, np.broadcast_to(zeta, shape), rng)
    phase = rng.uniform(-math.pi, math.pi, shape)
    return amp * np.exp(1j * phase)


def simulate_scheme_rates(cfg: SystemConfig, corr: CorrelationConfig,
                          plan: SimPlan) -> dict[int, Estimate]:
    """Average achievable rate of both schemes over shared channel draws."""
    if corr.n_total != cfg.n_elements:
        raise ValueError("correlation grid size must match n_elements")
    mats = build_correlation(corr)
    n = cfg.n_elements
    rates = {1: [], 2: []}
    size = max(256, (1 << 20) // max(n, 1))
    for index, start in enumerate(range(0, plan.trials, size)):
        count = min(size, plan.trials - start)
        rng = chunk_rng(plan.seed, index)
        v = nakagami_sample(cfg.v.m, cfg.v.zeta, rng, count)
        phi_v = rng.uniform(-math.pi, math.pi, count)
        g = _complex_nakagami(cfg.g.m, cfg.zeta_g, rng, (count, n))
        h = _complex_nakagami(cfg.h.m, cfg.zeta_h, rng, (count, n))
        g_t = g @ mats.r_d_sqrt
        h_t = h @ mats.r_a_sqrt.T            # rows h^T -> (R_A^(1/2) h)^T
        # scheme 2: perfect co-phasing of the correlated entries
        refl2 = np.abs(g_t * h_t) @ cfg.eta
        snr2 = cfg.gamma_bar * (v + refl2) ** 2
        # scheme 1: phases from the uncorrelated draws
        theta = phi_v[:, None] - (np.angle(g) + np.angle(h))
        refl1 = ((g_t * h_t * np.exp(1j * theta)) @ cfg.eta)
        snr1 = cfg.gamma_bar * np.abs(v * np.exp(1j * phi_v) + refl1) ** 2
        rates[1].append(np.log2(1.0 + snr1))
        rates[2].append(np.log2(1.0 + snr2))
    return {s: _mean_estimate(np.concatenate(parts)) for s, parts in rates.items()}
