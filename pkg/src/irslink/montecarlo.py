"""Monte-Carlo oracle: exact-SNR simulation and plug-in metric estimators.

Sampling is organized in fixed-size chunks whose random streams are derived
from (seed, chunk index) through counter-based generators, so results are
bit-identical for any worker count and chunks can run on a thread pool.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import SystemConfig
from .specfun import gaussian_q

__all__ = [
    "SimPlan",
    "CurveResult",
    "Estimate",
    "chunk_rng",
    "simulate_snr_samples",
    "empirical_cdf",
    "empirical_outage",
    "empirical_rate",
    "empirical_ber",
    "fit_loglog_slope",
]

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SimPlan:
    """How to run one simulation: size, reproducibility, parallelism."""

    trials: int
    seed: int = 0
    workers: int = 1
    quantization_bits: int | None = None
    correlation: object | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.quantization_bits is not None and self.quantization_bits < 1:
            raise ValueError("quantization_bits must be >= 1 when set")


@dataclass
class CurveResult:
    """One metric curve over a sweep axis, with 95% confidence bands."""

    x: np.ndarray
    y: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.ci_low = np.asarray(self.ci_low, dtype=float)
        self.ci_high = np.asarray(self.ci_high, dtype=float)
        n = self.x.size
        if not (self.y.size == self.ci_low.size == self.ci_high.size == n):
            raise ValueError("curve vectors must have equal length")


@dataclass(frozen=True)
class Estimate:
    """Scalar plug-in estimate with a 95% confidence interval."""

    value: float
    ci_low: float
    ci_high: float


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """Counter-based generator for one chunk, independent of scheduling."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_size(n_elements: int) -> int:
    # keep per-chunk scratch arrays around 32 MB regardless of N
    return max(1024, (1 << 22) // max(n_elements, 1))


def _simulate_chunk(cfg: SystemConfig, plan: SimPlan, index: int, count: int) -> np.ndarray:
    rng = chunk_rng(plan.seed, index)
    n = cfg.n_elements
    v = np.sqrt(rng.gamma(cfg.v.m, cfg.v.zeta, count))
    if n == 0:
        return cfg.gamma_bar * v**2
    g = np.sqrt(rng.gamma(cfg.g.m, np.broadcast_to(cfg.zeta_g, (count, n))))
    h = np.sqrt(rng.gamma(cfg.h.m, np.broadcast_to(cfg.zeta_h, (count, n))))
    prod = g * h * cfg.eta
    if plan.quantization_bits is None:
        return cfg.gamma_bar * (v + prod.sum(axis=1)) ** 2
    tau = math.pi / 2**plan.quantization_bits
    eps = rng.uniform(-tau, tau, (count, n))
    w_re = (prod * np.cos(eps)).sum(axis=1)
    w_im = (prod * np.sin(eps)).sum(axis=1)
    return cfg.gamma_bar * ((v + w_re) ** 2 + w_im**2)


def simulate_snr_samples(cfg: SystemConfig, plan: SimPlan) -> np.ndarray:
    """Exact optimized-SNR samples (optionally with quantized phases).

    Every trial draws fresh leg amplitudes; with quantization set, each
    element additionally gets a phase error uniform on [-tau, tau).
    """
    size = _chunk_size(cfg.n_elements)
    bounds = [(i, min(size, plan.trials - start))
              for i, start in enumerate(range(0, plan.trials, size))]
    if plan.workers == 1 or len(bounds) == 1:
        parts = [_simulate_chunk(cfg, plan, i, c) for i, c in bounds]
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            futures = [pool.submit(_simulate_chunk, cfg, plan, i, c) for i, c in bounds]
            parts = [f.result() for f in futures]
    return np.concatenate(parts)


def empirical_cdf(samples: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Right-continuous step CDF of the sample set."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical_cdf requires a nonempty sample")
    sorted_s = np.sort(samples)

    def cdf(x):
        return np.searchsorted(sorted_s, np.asarray(x, dtype=float), side="right") / sorted_s.size

    return cdf


def _mean_estimate(values: np.ndarray) -> Estimate:
    n = values.size
    mean = float(values.mean())
    half = _Z95 * float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return Estimate(mean, mean - half, mean + half)


def empirical_outage(samples: np.ndarray, gamma_th: float) -> Estimate:
    """Proportion of trials below threshold, with a binomial 95% CI."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical_outage requires a nonempty sample")
    n = samples.size
    p = float(np.count_nonzero(samples <= gamma_th)) / n
    half = _Z95 * math.sqrt(max(p * (1.0 - p), 0.0) / n)
    return Estimate(p, max(p - half, 0.0), min(p + half, 1.0))


def empirical_rate(samples: np.ndarray) -> Estimate:
    """Mean spectral efficiency log2(1 + snr) over the trials."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical_rate requires a nonempty sample")
    return _mean_estimate(np.log2(1.0 + samples))


def empirical_ber(samples: np.ndarray, alpha: float, beta: float) -> Estimate:
    """Mean conditional symbol error alpha*Q(sqrt(beta*snr)) over the trials."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical_ber requires a nonempty sample")
    return _mean_estimate(alpha * gaussian_q(np.sqrt(beta * samples)))


def fit_loglog_slope(curve: CurveResult, window: tuple[float, float]) -> float:
    """Least-squares slope of log10(y) against gamma_bar_dB / 10.

    The window is an inclusive x-range (same units as curve.x, i.e. dB);
    at least three strictly positive points must fall inside it.
    """
    lo, hi = window
    mask = (curve.x >= lo) & (curve.x <= hi)
    if np.count_nonzero(mask) < 3:
        raise ValueError("slope window must contain at least 3 points")
    y = curve.y[mask]
    if np.any(y <= 0):
        raise ValueError("slope fit requires positive y values in the window")
    slope, _ = np.polyfit(curve.x[mask] / 10.0, np.log10(y), 1)
    return float(slope)
