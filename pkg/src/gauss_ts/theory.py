"""Closed-form quantities for Gaussian bandits with unknown variance.

Everything here is deterministic arithmetic: divergence-based regret
coefficients, large-deviation bounds and their rate function, the finite-time
regret bound for conservative priors (alpha < 0) and the C_T growth
diagnostic for optimistic priors (alpha >= 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .bandit import Environment
from .errors import AlphaInfeasibleError, DomainError, EpsilonInfeasibleError
from .posterior import a_n_alpha, derive_n0
from .special_fn import ln_beta


def d_inf(delta: float, sigma2: float) -> float:
    """Minimal KL divergence from N(mu_i, sigma2) to any normal with mean
    ``delta`` higher: 0.5 * log(1 + delta^2 / sigma2)."""
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    if delta < 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    return 0.5 * math.log1p(delta * delta / sigma2)


def h(x: float) -> float:
    """(x - 1 - log x) / 2, written to stay accurate near x = 1."""
    if not x > 0.0:
        raise DomainError(f"h requires x > 0, got {x}")
    u = x - 1.0
    return 0.5 * (u - math.log1p(u))


def _one_minus_exp_neg(x: float) -> float:
    return -math.expm1(-x)


def ldp_mean_bound(n: int, delta: float, sigma2: float) -> float:
    """Upper bound exp(-n delta^2 / (2 sigma2)) on P[sample mean >= mu + delta]."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not delta > 0.0:
        raise DomainError(f"delta must be > 0, got {delta}")
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    return math.exp(-n * delta * delta / (2.0 * sigma2))


def ldp_var_bound(n: int, sigma2_thresh: float, sigma2: float) -> float:
    """Upper bound exp(-n h(thresh / sigma2)) on P[ssq >= n * thresh]."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    if not sigma2_thresh > sigma2:
        raise DomainError(
            f"threshold variance must exceed the true variance, got {sigma2_thresh} <= {sigma2}"
        )
    return math.exp(-n * h(sigma2_thresh / sigma2))


@dataclass(frozen=True)
class RateValue:
    """Value of the rate function; ``infinite`` marks the infeasible region."""

    value: float
    infinite: bool = False

    def __float__(self) -> float:
        return math.inf if self.infinite else float(self.value)

    def __lt__(self, other: "RateValue") -> bool:
        return float(self) < float(other)


INFEASIBLE = RateValue(math.nan, infinite=True)


def ldp_rate_function(z1: float, z2: float, mu: float, sigma2: float) -> RateValue:
    """Legendre transform of the cumulant generating function of (X, X^2)
    for X ~ N(mu, sigma2), evaluated at (z1, z2)."""
    z1, z2, mu, sigma2 = float(z1), float(z2), float(mu), float(sigma2)
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    spread = z2 - z1 * z1
    if spread <= 0.0:
        return INFEASIBLE
    return RateValue(h(spread / sigma2) + (z1 - mu) ** 2 / (2.0 * sigma2))


@dataclass(frozen=True)
class BoundReport:
    coefficients: dict[int, float]  # arm index -> gap / d_inf(gap, sigma2)
    total_logT_coefficient: float
    finite_time_bound: float | None = None


def lower_bound_coefficient(env: Environment) -> BoundReport:
    """sum over suboptimal arms of gap / d_inf(gap, sigma2): the asymptotic
    lower bound on E[Regret(T)] / log T."""
    env.require_unique_optimum()
    coefs = {}
    for i, (gap, arm) in enumerate(zip(env.gaps, env.arms)):
        if gap > 0.0:
            coefs[i] = float(gap) / d_inf(float(gap), arm.sigma2)
    return BoundReport(coefs, math.fsum(coefs.values()))


def beta_half_neg_alpha(alpha: float) -> float:
    """B(1/2, -alpha); finite only for alpha < 0."""
    if not alpha < 0.0:
        raise AlphaInfeasibleError(
            f"alpha infeasible: B(1/2, -alpha) is undefined for alpha={alpha} >= 0"
        )
    return math.exp(ln_beta(0.5, -alpha))


@dataclass(frozen=True)
class Lemma5Terms:
    """Additive pieces of the finite-time bound, in normalized units.

    ``per_arm[i]`` holds the five summands multiplying gap_i (log-T term
    first); ``max_gap_terms`` holds the four summands multiplying the largest
    gap.  ``scale`` converts normalized regret back to reward units.
    """

    per_arm: dict[int, tuple[float, ...]]
    gaps: dict[int, float]
    max_gap_terms: tuple[float, ...]
    max_gap: float
    scale: float

    @property
    def total(self) -> float:
        parts = [self.gaps[i] * math.fsum(t) for i, t in self.per_arm.items()]
        parts.append(self.max_gap * math.fsum(self.max_gap_terms))
        return self.scale * math.fsum(parts)


def normalize(env: Environment) -> tuple[Environment, float]:
    """Map the unique optimal arm to (0, 1); returns the image and the scale."""
    best = env.require_unique_optimum()
    opt = env.arms[best]
    scale = math.sqrt(opt.sigma2)
    return env.transformed(opt.mu, scale), scale


def lemma5_terms(env: Environment, alpha: float, epsilon: float, T: int) -> Lemma5Terms:
    """Term-by-term finite-time regret bound for alpha < 0.

    Two renderings of the bound exist for the first largest-gap summand:
    1/(1 - e^{-eps^2/8}) and 1/(1 - e^{-eps^2/2}).  The itemized form with
    eps^2/8 is used here; it is the larger of the two, so the bound stays
    valid under either reading.
    """
    if not alpha < 0.0:
        raise AlphaInfeasibleError(
            f"alpha infeasible: the finite-time bound needs alpha < 0, got {alpha}"
        )
    if T < 2:
        raise DomainError(f"T must be >= 2, got {T}")
    norm, scale = normalize(env)
    gaps = {i: float(g) for i, g in enumerate(norm.gaps) if g > 0.0}
    min_gap = min(gaps.values())
    if not 0.0 < epsilon < min_gap / 2.0:
        raise EpsilonInfeasibleError(
            f"epsilon infeasible: need 0 < epsilon < {min_gap / 2.0} (normalized units), "
            f"got {epsilon}"
        )
    log_t = math.log(T)
    eps = float(epsilon)
    per_arm = {}
    for i, gap in gaps.items():
        s2 = norm.arms[i].sigma2
        per_arm[i] = (
            log_t / d_inf(gap - 2.0 * eps, s2 + eps),
            2.0 - 2.0 * alpha,
            math.sqrt(s2 + eps) / (gap - 2.0 * eps),
            1.0 / _one_minus_exp_neg(eps * eps / (2.0 * s2)),
            1.0 / _one_minus_exp_neg(h(1.0 + eps / s2)),
        )
    log_q = math.log1p(eps * eps / 8.0)
    max_gap_terms = (
        1.0 / _one_minus_exp_neg(eps * eps / 8.0),
        1.0 / _one_minus_exp_neg(h(2.0)),
        beta_half_neg_alpha(alpha) / _one_minus_exp_neg(eps * eps / 2.0) ** 2,
        (2.0 * math.sqrt(2.0) / eps)
        * math.exp((1.0 - alpha) * log_q)
        / _one_minus_exp_neg(0.5 * log_q),
    )
    return Lemma5Terms(per_arm, gaps, max_gap_terms, max(gaps.values()), scale)


def lemma5_upper_bound(env: Environment, alpha: float, epsilon: float, T: int) -> float:
    """Finite-time upper bound on E[Regret(T)] of Thompson sampling, alpha < 0.

    The environment is normalized internally so that the optimal arm is
    N(0, 1); ``epsilon`` is read in those normalized units and the result is
    returned in the original reward units.
    """
    return lemma5_terms(env, alpha, epsilon, T).total


def lemma5_limit_coefficient(env: Environment, epsilon: float) -> float:
    """lim_{T->inf} bound / log T, in original reward units."""
    norm, scale = normalize(env)
    return scale * math.fsum(
        float(g) / d_inf(float(g) - 2.0 * epsilon, norm.arms[i].sigma2 + epsilon)
        for i, g in enumerate(norm.gaps)
        if g > 0.0
    )


def theorem2_ct(n: int, alpha: float, T: int) -> float:
    """C_T = (A_{n,alpha} T / log 2)^(1 / ((n-1)/2 + alpha)) - 1.

    Polynomial in T; may be negative for small T (returned as is).
    """
    if alpha < 0.0:
        raise DomainError(f"theorem2_ct needs alpha >= 0, got {alpha}")
    if n < derive_n0(alpha):
        raise DomainError(f"n must be >= n0={derive_n0(alpha)}, got {n}")
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    power = 1.0 / (0.5 * (n - 1) + alpha)
    return math.expm1(power * (math.log(a_n_alpha(n, alpha)) + math.log(T) - math.log(math.log(2.0))))
