"""Posterior of an arm's mean under the prior pi(mu, sigma^2) ~ (sigma^2)^(-1-alpha).

Given n observations with sample mean x and centered sum of squares v, the
standardized mean sqrt(n (n + 2 alpha - 1) / v) (mu - x) is Student-t with
n + 2 alpha - 1 degrees of freedom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DegenerateVarianceError, InsufficientDataError, PreconditionError
from .rng import RngStream
from .special_fn import student_t_sf
from .stats_core import SufficientStats, sample_student_t

DEGENERATE_SSQ_RTOL = 1e-12


def derive_n0(alpha: float) -> int:
    """Number of forced initial pulls per arm, max(2, 3 - ceil(2 alpha))."""
    return max(2, 3 - math.ceil(2.0 * alpha))


@dataclass(frozen=True)
class PriorAlpha:
    alpha: float
    n0: int = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha}")
        object.__setattr__(self, "n0", derive_n0(self.alpha))

    def dof(self, n: int) -> float:
        return n + 2.0 * self.alpha - 1.0


@dataclass(frozen=True)
class PosteriorTailBounds:
    lower: float
    upper: float
    a_n_alpha: float
    log_lower: float
    log_upper: float


def a_n_alpha(n: int, alpha: float) -> float:
    return 1.0 / (2.0 * math.exp(1.0 / 6.0) * math.sqrt(math.pi * (0.5 * n + alpha)))


def degenerate_ssq_threshold(n: int, mean: float) -> float:
    return DEGENERATE_SSQ_RTOL * max(1.0, n * mean * mean)


def _check(stats: SufficientStats, prior: PriorAlpha) -> None:
    if stats.n < prior.n0:
        raise InsufficientDataError(
            f"insufficient data: posterior needs n >= n0={prior.n0}, got n={stats.n}"
        )
    if stats.ssq < degenerate_ssq_threshold(stats.n, stats.mean):
        raise DegenerateVarianceError(
            f"degenerate variance: ssq={stats.ssq!r} below threshold for n={stats.n}"
        )


def posterior_scale(stats: SufficientStats, prior: PriorAlpha) -> float:
    """Scale mapping a standard t draw onto the posterior of the mean."""
    return math.sqrt(stats.ssq / (stats.n * prior.dof(stats.n)))


def sample_posterior_mean(
    rng: RngStream, stats: SufficientStats, prior: PriorAlpha, size=None
):
    """Draw mu-tilde = mean + sqrt(ssq / (n * dof)) * T, T ~ t(dof)."""
    _check(stats, prior)
    t = sample_student_t(rng, prior.dof(stats.n), size)
    return stats.mean + posterior_scale(stats, prior) * t


def posterior_tail(stats: SufficientStats, prior: PriorAlpha, mu):
    """Posterior probability that the arm's mean is at least ``mu``."""
    _check(stats, prior)
    return student_t_sf((mu - stats.mean) / posterior_scale(stats, prior), prior.dof(stats.n))


def tail_bounds(stats: SufficientStats, prior: PriorAlpha, mu: float) -> PosteriorTailBounds:
    """Closed-form lower/upper bounds on :func:`posterior_tail` for mu > mean.

    lower = A_{n,alpha} (1 + q)^{-(n-1)/2 - alpha}
    upper = sqrt(ssq) / (mu - mean) * (1 + q)^{-n/2 - alpha + 1}
    with q = n (mu - mean)^2 / ssq.  Evaluated in log space.
    """
    _check(stats, prior)
    gap = mu - stats.mean
    if not gap > 0.0:
        raise PreconditionError(f"tail bounds need mu > mean, got mu={mu}, mean={stats.mean}")
    n, alpha = stats.n, prior.alpha
    log1p_q = math.log1p(n * gap * gap / stats.ssq)
    a = a_n_alpha(n, alpha)
    log_lower = math.log(a) - (0.5 * (n - 1) + alpha) * log1p_q
    log_upper = 0.5 * math.log(stats.ssq) - math.log(gap) + (1.0 - 0.5 * n - alpha) * log1p_q
    return PosteriorTailBounds(
        lower=math.exp(log_lower),
        upper=math.exp(log_upper) if log_upper < 700.0 else math.inf,
        a_n_alpha=a,
        log_lower=log_lower,
        log_upper=log_upper,
    )
