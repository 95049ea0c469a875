"""Numerical verification suites for the inequalities the regret analysis uses.

Each suite returns a list of :class:`Check` rows; ``passed`` is False on any
violated inequality and ``point`` names the grid point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .. import rng as _rng
from .._jit import HAS_NUMBA, njit
from ..posterior import PriorAlpha, derive_n0, posterior_tail, sample_posterior_mean, tail_bounds
from ..rng import RngStream, stream_key
from ..special_fn import gamma_ratio, gamma_ratio_bounds
from ..stats_core import SufficientStats
from ..theory import ldp_mean_bound, ldp_var_bound

SUITES = ("lemma1", "lemma2", "lemma3", "posterior")

# stream ids reserved for the Monte Carlo suites
_LDP_STREAM = 0x1D9
_POSTERIOR_STREAM = 0x9057

LDP_SAMPLE_SIZES = (2, 5, 10, 30)
LDP_MEAN_GAPS = (0.25, 0.5, 1.0, 2.0)
LDP_VAR_RATIOS = (1.2, 1.5, 2.0, 4.0)
TAIL_ALPHAS = (-1.0, -0.5, -0.1)
TAIL_GAPS = (0.1, 0.5, 1.0, 2.0, 4.0)
QUAD_ABS_TOL = 1e-10
KS_CRITICAL = 1.95

# (n, alpha, mean, ssq); the second has dof 2.5
POSTERIOR_CASES = (
    (10, -0.5, 0.0, 9.0),
    (4, -0.25, 1.5, 2.0),
    (30, -1.0, -2.0, 50.0),
)


@dataclass(frozen=True)
class Check:
    suite: str
    point: str
    observed: float
    bound: float
    margin: float
    passed: bool


# -- gamma-function ratio ---------------------------------------------------------

def lemma1(points: int = 996) -> list[Check]:
    """e^{-2/3} <= Gamma(z+1/2)/Gamma(z) <= e^{1/6} sqrt(z) for z = 0.5 + 0.1k."""
    out = []
    for k in range(points):
        z = 0.5 + 0.1 * k
        r = gamma_ratio(z)
        b = gamma_ratio_bounds(z)
        margin = min(r - b.lower, b.upper - r)
        nearest = b.lower if r - b.lower < b.upper - r else b.upper
        out.append(Check("lemma1", f"z={z:.1f}", r, nearest, margin, margin >= 0.0))
    return out


# -- large deviations of mean and variance ----------------------------------------

@njit(cache=True)
def _mean_ssq_numba(key, n, trials):
    means = np.empty(trials)
    ssqs = np.empty(trials)
    for j in range(trials):
        mean = 0.0
        ssq = 0.0
        for k in range(n):
            x = _rng.normal_at(key, np.uint64(j * n + k), np.uint64(0))
            delta = x - mean
            mean = mean + delta / (k + 1)
            ssq = ssq + delta * (x - mean)
        means[j] = mean
        ssqs[j] = ssq
    return means, ssqs


def _mean_ssq_numpy(key, n, trials, chunk=100_000):
    means = np.empty(trials)
    ssqs = np.empty(trials)
    for lo in range(0, trials, chunk):
        hi = min(trials, lo + chunk)
        base = np.arange(lo, hi, dtype=np.uint64) * np.uint64(n)
        mean = np.zeros(hi - lo)
        ssq = np.zeros(hi - lo)
        for k in range(n):
            x = _rng.normal_np(np.uint64(key), base + np.uint64(k), 0)
            delta = x - mean
            mean = mean + delta / (k + 1)
            ssq = ssq + delta * (x - mean)
        means[lo:hi] = mean
        ssqs[lo:hi] = ssq
    return means, ssqs


def standard_normal_stats(seed: int, n: int, trials: int):
    """Sample mean and centered sum of squares of ``trials`` N(0,1) samples of size n."""
    key = np.uint64(_rng.substream_key(np.uint64(stream_key(seed, _LDP_STREAM)), np.uint64(n)))
    if HAS_NUMBA:
        return _mean_ssq_numba(key, n, trials)
    return _mean_ssq_numpy(key, n, trials)


def _exceedance_check(point, hits, trials, bound, divisor):
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    limit = bound / divisor + 3.0 * se
    return Check("lemma2", point, p, bound / divisor, limit - p, p <= limit)


def lemma2(seed: int = 1, trials: int = 1_000_000, bound_divisor: float = 1.0) -> list[Check]:
    """Monte Carlo exceedance frequencies against the mean and variance bounds.

    ``bound_divisor`` > 1 shrinks every bound; it exists as a negative control.
    """
    out = []
    for n in LDP_SAMPLE_SIZES:
        means, ssqs = standard_normal_stats(seed, n, trials)
        for d in LDP_MEAN_GAPS:
            hits = int(np.count_nonzero(means >= d))
            out.append(
                _exceedance_check(f"mean n={n} delta={d}", hits, trials, ldp_mean_bound(n, d, 1.0), bound_divisor)
            )
        for r in LDP_VAR_RATIOS:
            hits = int(np.count_nonzero(ssqs >= n * r))
            out.append(
                _exceedance_check(f"var n={n} ratio={r}", hits, trials, ldp_var_bound(n, r, 1.0), bound_divisor)
            )
    return out


# -- posterior tail sandwich --------------------------------------------------------

def quadrature_tail(n: int, alpha: float, gap: float) -> tuple[float, float]:
    """Posterior mass above a standardized gap, integrating the unnormalized
    kernel (1 + x^2)^(-n/2 - alpha) and its normalizer by adaptive quadrature.

    Returns (tail, absolute error estimate).
    """
    power = 0.5 * n + alpha

    def kernel(x):
        return math.exp(-power * math.log1p(x * x))

    tail, e_tail = integrate.quad(kernel, gap, math.inf, epsabs=1e-14, epsrel=1e-13, limit=500)
    head, e_head = integrate.quad(kernel, 0.0, gap, epsabs=1e-14, epsrel=1e-13, limit=500)
    half = head + tail
    p = 0.5 * tail / half
    err = 0.5 * (e_tail + p * 2.0 * (e_tail + e_head)) / half
    return p, err


def lemma3(ns=None, alphas=TAIL_ALPHAS, gaps=TAIL_GAPS) -> list[Check]:
    """lower <= quadrature tail <= upper on the (n, alpha, gap) grid."""
    out = []
    for alpha in alphas:
        n_grid = ns if ns is not None else range(derive_n0(alpha), 51, 3)
        prior = PriorAlpha(alpha)
        for n in n_grid:
            # ssq = n makes sqrt(ssq / n) = 1, so mu equals the standardized gap
            stats = SufficientStats(n, 0.0, float(n))
            for g in gaps:
                p, err = quadrature_tail(n, alpha, g)
                b = tail_bounds(stats, prior, g)
                margin = min(p - b.lower, b.upper - p)
                nearest = b.lower if p - b.lower < b.upper - p else b.upper
                ok = margin >= 0.0 and err <= QUAD_ABS_TOL
                out.append(Check("lemma3", f"n={n} alpha={alpha} gap={g}", p, nearest, margin, ok))
    return out


# -- posterior sampler --------------------------------------------------------------

def ks_statistic(draws: np.ndarray, cdf) -> float:
    x = np.sort(draws)
    f = cdf(x)
    m = x.size
    upper = np.arange(1, m + 1) / m - f
    lower = f - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def posterior(seed: int = 1, draws: int = 100_000, cases=POSTERIOR_CASES) -> list[Check]:
    """KS distance between posterior-mean draws and the exact posterior CDF."""
    out = []
    crit = KS_CRITICAL / math.sqrt(draws)
    for c, (n, alpha, mean, ssq) in enumerate(cases):
        stats = SufficientStats(n, mean, ssq)
        prior = PriorAlpha(alpha)
        rng = RngStream(seed, _POSTERIOR_STREAM + c)
        x = sample_posterior_mean(rng, stats, prior, size=draws)
        d = ks_statistic(x, lambda v: 1.0 - posterior_tail(stats, prior, v))
        point = f"n={n} alpha={alpha} mean={mean} ssq={ssq} dof={prior.dof(n)}"
        out.append(Check("posterior", point, d, crit, crit - d, d < crit))
    return out


def run_suite(name: str, seed: int = 1, trials: int = 1_000_000, bound_divisor: float = 1.0):
    if name == "lemma1":
        return lemma1()
    if name == "lemma2":
        return lemma2(seed, trials, bound_divisor)
    if name == "lemma3":
        return lemma3()
    if name == "posterior":
        return posterior(seed)
    if name == "all":
        return [c for s in SUITES for c in run_suite(s, seed, trials, bound_divisor)]
    raise ValueError(f"unknown suite {name!r}")
