"""Streaming sufficient statistics and sampling primitives.

Sampling functions take an :class:`~gauss_ts.rng.RngStream` and advance its
counter by one per variate, whatever the rejection sampler consumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from ._jit import HAS_NUMBA, njit
from .errors import DomainError
from .rng import RngStream
from .special_fn import student_t_sf

__all__ = [
    "SufficientStats",
    "update",
    "merge",
    "from_samples",
    "sample_normal",
    "sample_chi2",
    "sample_gamma",
    "sample_student_t",
    "sample_uniform",
    "student_t_sf",
    "student_t_cdf",
]


@dataclass(frozen=True)
class SufficientStats:
    """Count, sample mean and centered sum of squares of one arm's rewards."""

    n: int = 0
    mean: float = 0.0
    ssq: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("n must be non-negative")
        if self.ssq < 0.0:
            raise DomainError("ssq must be non-negative")
        if self.n <= 1 and self.ssq != 0.0:
            raise DomainError("ssq must be 0 when n <= 1")

    @property
    def variance(self) -> float:
        """Maximum-likelihood variance ssq / n (nan for n = 0)."""
        return self.ssq / self.n if self.n else math.nan


@njit
def welford_step(n, mean, ssq, x):
    """One Welford update; the mean is updated before ssq (fixed order)."""
    n1 = n + 1
    delta = x - mean
    new_mean = mean + delta / n1
    new_ssq = ssq + delta * (x - new_mean)
    return n1, new_mean, new_ssq


def update(stats: SufficientStats, x: float) -> SufficientStats:
    n, mean, ssq = welford_step(stats.n, stats.mean, stats.ssq, float(x))
    return SufficientStats(int(n), float(mean), float(ssq))


def merge(a: SufficientStats, b: SufficientStats) -> SufficientStats:
    """Statistics of the union of two disjoint sample sets (Chan et al.)."""
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * b.n / n
    ssq = a.ssq + b.ssq + delta * delta * a.n * b.n / n
    return SufficientStats(n, mean, ssq)


def from_samples(xs) -> SufficientStats:
    stats = SufficientStats()
    for x in xs:
        stats = update(stats, x)
    return stats


# -- sampling -------------------------------------------------------------------

@njit
def _normal_block(key, start, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = _rng.normal_at(key, np.uint64(start + i), np.uint64(0))
    return out


@njit
def _gamma_block(key, start, size, shape):
    out = np.empty(size)
    for i in range(size):
        out[i] = _rng.gamma_at(key, np.uint64(start + i), shape, np.uint64(0))
    return out


@njit
def _student_t_block(key, start, size, dof):
    out = np.empty(size)
    for i in range(size):
        out[i] = _rng.student_t_at(key, np.uint64(start + i), dof)
    return out


def _draw(rng: RngStream, size, numba_block, numpy_fn, *params):
    count = 1 if size is None else int(np.prod(size))
    start = rng.counter
    rng.counter += count
    if HAS_NUMBA:
        out = numba_block(np.uint64(rng.key), start, count, *params)
    else:
        idx = np.arange(start, start + count, dtype=np.uint64)
        out = numpy_fn(np.uint64(rng.key), idx, *params)
    if np.isnan(out).any():
        raise RuntimeError("gamma sampler exhausted its attempt budget")
    if size is None:
        return float(out[0])
    return out.reshape(size)


@njit
def _uniform_block(key, start, size):
    out = np.empty(size)
    for i in range(size):
        out[i] = _rng.uniform_at(key, np.uint64(start + i), np.uint64(0))
    return out


def sample_uniform(rng: RngStream, size=None):
    """Uniform draw(s) on the open interval (0, 1)."""
    return _draw(rng, size, _uniform_block, lambda k, j: _rng.uniform_np(k, j, 0))


def sample_normal(rng: RngStream, mu: float, sigma2: float, size=None):
    """Draw(s) from N(mu, sigma2) by Box-Muller."""
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    z = _draw(rng, size, _normal_block, lambda k, j: _rng.normal_np(k, j, 0))
    return mu + math.sqrt(sigma2) * z


def sample_gamma(rng: RngStream, shape: float, size=None):
    if not shape > 0.0:
        raise DomainError(f"shape must be > 0, got {shape}")
    return _draw(
        rng, size, _gamma_block, lambda k, j, a: _rng.gamma_np(k, j, a, 0), float(shape)
    )


def sample_chi2(rng: RngStream, dof: float, size=None):
    """Chi-squared draw(s) with real-valued ``dof``: 2 * Gamma(dof / 2)."""
    if not dof > 0.0:
        raise DomainError(f"dof must be > 0, got {dof}")
    return 2.0 * sample_gamma(rng, 0.5 * dof, size)


def sample_student_t(rng: RngStream, dof: float, size=None):
    """Z / sqrt(W / dof) with Z ~ N(0,1), W ~ chi2(dof) from the same draw index."""
    if not dof > 0.0:
        raise DomainError(f"dof must be > 0, got {dof}")
    return _draw(rng, size, _student_t_block, _rng.student_t_np, float(dof))


def student_t_cdf(x, dof: float):
    return student_t_sf(-np.asarray(x, dtype=np.float64) if np.ndim(x) else -float(x), dof)
