"""Gaussian bandit environments, Thompson sampling and regret traces."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels, _kernels_numpy
from ._jit import resolve_backend
from .errors import (
    DegenerateEnvironmentError,
    DegenerateVarianceError,
    DomainError,
    PreconditionError,
)
from .posterior import PriorAlpha, sample_posterior_mean
from .rng import RngStream, stream_key
from .stats_core import SufficientStats, sample_uniform

TIE_BREAKS = ("uniform_random", "lowest_index")


@dataclass(frozen=True)
class ArmParams:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise DomainError(f"arm mean must be finite, got {self.mu}")
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2)):
            raise DomainError(f"arm variance must be > 0, got {self.sigma2}")


@dataclass(frozen=True)
class Environment:
    arms: tuple[ArmParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise DomainError("an environment needs at least two arms")

    @classmethod
    def from_params(cls, mus: Sequence[float], sigma2s: Sequence[float]) -> "Environment":
        if len(mus) != len(sigma2s):
            raise DomainError("mus and sigma2s must have equal length")
        return cls(tuple(ArmParams(float(m), float(s)) for m, s in zip(mus, sigma2s)))

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def mus(self) -> np.ndarray:
        return np.array([a.mu for a in self.arms])

    @property
    def sigma2s(self) -> np.ndarray:
        return np.array([a.sigma2 for a in self.arms])

    @property
    def mu_star(self) -> float:
        return max(a.mu for a in self.arms)

    @property
    def gaps(self) -> np.ndarray:
        return self.mu_star - self.mus

    @property
    def optimal_arms(self) -> list[int]:
        return [i for i, a in enumerate(self.arms) if a.mu == self.mu_star]

    def require_unique_optimum(self) -> int:
        best = self.optimal_arms
        if len(best) != 1:
            raise DegenerateEnvironmentError(
                f"degenerate: {len(best)} optimal arms, a unique optimum is required"
            )
        return best[0]

    def transformed(self, shift: float, scale: float) -> "Environment":
        """Image under the reward map x -> (x - shift) / scale."""
        if not scale > 0.0:
            raise DomainError("scale must be positive")
        return Environment(
            tuple(ArmParams((a.mu - shift) / scale, a.sigma2 / scale**2) for a in self.arms)
        )


@dataclass(frozen=True)
class PolicySpec:
    """Thompson sampling, optionally with some arms' means given beforehand.

    ``known`` maps arm index to the fixed value used in place of a posterior
    draw; those arms are skipped during the forced initial pulls.
    """

    prior: PriorAlpha
    known: Mapping[int, float] = field(default_factory=dict)
    tie_break: str = "uniform_random"

    def __post_init__(self):
        object.__setattr__(self, "known", {int(k): float(v) for k, v in dict(self.known).items()})
        if self.tie_break not in TIE_BREAKS:
            raise DomainError(f"tie_break must be one of {TIE_BREAKS}, got {self.tie_break!r}")
        for k, v in self.known.items():
            if k < 0 or not math.isfinite(v):
                raise DomainError(f"known arm {k} must have a finite value and index >= 0")

    @classmethod
    def thompson(cls, alpha: float, known=None, tie_break="uniform_random") -> "PolicySpec":
        return cls(PriorAlpha(alpha), known or {}, tie_break)

    @property
    def kind(self) -> str:
        return "thompson_with_known_arms" if self.known else "thompson"

    def check_against(self, env: Environment) -> None:
        for k in self.known:
            if k >= env.K:
                raise DomainError(f"known arm index {k} out of range for K={env.K}")
        if len(self.known) >= env.K:
            raise DomainError("known arms may not cover every arm")

    def known_arrays(self, K: int) -> tuple[np.ndarray, np.ndarray]:
        mask = np.zeros(K, dtype=np.bool_)
        vals = np.zeros(K)
        for k, v in self.known.items():
            mask[k] = True
            vals[k] = v
        return mask, vals

    def init_rounds(self, K: int) -> int:
        return (K - len(self.known)) * self.prior.n0


@dataclass
class RegretTrace:
    horizon: int
    chosen: np.ndarray
    cum_regret: np.ndarray
    pulls: np.ndarray

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1])


def aggregate(values) -> tuple[float, float]:
    """Mean and standard error with exactly rounded sums (order independent)."""
    values = [float(v) for v in values]
    r = len(values)
    mean = math.fsum(values) / r
    if r < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (r - 1)
    return mean, math.sqrt(var / r)


@dataclass
class ReplicationResult:
    checkpoints: np.ndarray
    regret: np.ndarray  # (reps, checkpoints)
    pulls: np.ndarray  # (reps, K)
    mean: np.ndarray = field(init=False)
    stderr: np.ndarray = field(init=False)

    def __post_init__(self):
        stats = [aggregate(self.regret[:, c]) for c in range(self.checkpoints.size)]
        self.mean = np.array([m for m, _ in stats])
        self.stderr = np.array([s for _, s in stats])

    @property
    def reps(self) -> int:
        return self.regret.shape[0]

    @property
    def finals(self) -> np.ndarray:
        return self.regret[:, -1]


def checkpoint_grid(horizon: int, per_decade: int = 8) -> np.ndarray:
    """floor(10^(k/per_decade)) for k >= 0, deduplicated, >= 2, plus ``horizon``."""
    points = set()
    k = 0
    while True:
        v = math.floor(10.0 ** (k / per_decade) + 1e-9)
        if v > horizon:
            break
        if v >= 2:
            points.add(v)
        k += 1
    points.add(int(horizon))
    return np.array(sorted(points), dtype=np.int64)


# -- single step (reference, pure python) ----------------------------------------

def step_thompson(
    state: Sequence[SufficientStats], spec: PolicySpec, rng: RngStream
) -> int:
    """Sample a mean for every arm and return the index of the largest.

    Known arms contribute their fixed value; ties are broken per
    ``spec.tie_break``.
    """
    values = []
    for i, stats in enumerate(state):
        if i in spec.known:
            values.append(spec.known[i])
        else:
            values.append(sample_posterior_mean(rng, stats, spec.prior))
    best = max(values)
    tied = [i for i, v in enumerate(values) if v == best]
    if len(tied) == 1 or spec.tie_break == "lowest_index":
        return tied[0]
    u = sample_uniform(rng)
    return tied[int(u * len(tied))]


# -- episodes ----------------------------------------------------------------------

def _prepare(env: Environment, spec: PolicySpec, horizon: int):
    spec.check_against(env)
    horizon = int(horizon)
    need = spec.init_rounds(env.K)
    if horizon < need:
        raise PreconditionError(
            f"horizon too small: {horizon} < {need} forced initial pulls"
        )
    known, known_vals = spec.known_arrays(env.K)
    return dict(
        mus=np.ascontiguousarray(env.mus),
        sigmas=np.sqrt(env.sigma2s),
        gaps=np.ascontiguousarray(env.gaps),
        known=known,
        known_vals=known_vals,
        alpha=float(spec.prior.alpha),
        n0=int(spec.prior.n0),
        tie_uniform=spec.tie_break == "uniform_random",
        horizon=horizon,
    )


def _raise_status(status: int, rep: int) -> None:
    if status == _kernels.ERR_DEGENERATE:
        raise DegenerateVarianceError(f"degenerate variance in replication {rep}")
    if status == _kernels.ERR_SAMPLER:
        raise RuntimeError(f"gamma sampler exhausted its attempts in replication {rep}")


def run_episode(
    env: Environment,
    spec: PolicySpec,
    horizon: int,
    rng: RngStream,
    backend: str | None = None,
) -> RegretTrace:
    """One episode keyed by ``rng``; replication r of
    :func:`run_replications` equals ``run_episode(..., RngStream(seed, r))``."""
    args = _prepare(env, spec, horizon)
    backend = resolve_backend(backend)
    T = args["horizon"]
    no_ckpt = np.empty(0, dtype=np.int64)
    if backend == "numba":
        chosen = np.empty(T, dtype=np.int64)
        cum = np.empty(T)
        pulls = np.empty(env.K, dtype=np.int64)
        status = _kernels.episode(
            np.uint64(rng.key), *args.values(), no_ckpt, np.empty(0), pulls, True, chosen, cum
        )
        _raise_status(status, rng.stream_id)
    else:
        chosen = np.empty((1, T), dtype=np.int64)
        cum = np.empty((1, T))
        pulls = np.empty((1, env.K), dtype=np.int64)
        status, _ = _kernels_numpy.replications(
            np.array([rng.key], dtype=np.uint64), *args.values(), no_ckpt,
            np.empty((1, 0)), pulls, chosen, cum,
        )
        _raise_status(status, rng.stream_id)
        chosen, cum, pulls = chosen[0], cum[0], pulls[0]
    return RegretTrace(T, chosen, cum, pulls)


def replication_keys(base_seed: int, reps: int, start: int = 0) -> np.ndarray:
    return np.array([stream_key(base_seed, r) for r in range(start, start + reps)], dtype=np.uint64)


def run_replications(
    env: Environment,
    spec: PolicySpec,
    horizon: int,
    reps: int,
    base_seed: int,
    checkpoints=None,
    jobs: int = 1,
    backend: str | None = None,
) -> ReplicationResult:
    """Independent episodes r = 0..reps-1, each keyed by ``RngStream(base_seed, r)``.

    Work is split into ``jobs`` contiguous chunks run on a thread pool (the
    compiled kernel releases the GIL).  Output does not depend on ``jobs``.
    """
    if reps < 1:
        raise DomainError("reps must be >= 1")
    args = _prepare(env, spec, horizon)
    backend = resolve_backend(backend)
    if checkpoints is None:
        checkpoints = checkpoint_grid(args["horizon"])
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    if checkpoints.size == 0 or np.any(np.diff(checkpoints) <= 0):
        raise DomainError("checkpoints must be non-empty and strictly increasing")
    if checkpoints[0] < 1 or checkpoints[-1] > args["horizon"]:
        raise DomainError("checkpoints must lie in [1, horizon]")

    keys = replication_keys(base_seed, reps)
    regret = np.zeros((reps, checkpoints.size))
    pulls = np.zeros((reps, env.K), dtype=np.int64)
    kernel = _kernels.replications if backend == "numba" else _kernels_numpy.replications

    def run_chunk(bounds):
        lo, hi = bounds
        status, r = kernel(keys[lo:hi], *args.values(), checkpoints, regret[lo:hi], pulls[lo:hi])
        return status, (lo + r if r >= 0 else r)

    jobs = max(1, min(int(jobs), reps))
    edges = np.linspace(0, reps, jobs + 1).astype(int)
    chunks = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    if len(chunks) == 1:
        outcomes = [run_chunk(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            outcomes = list(pool.map(run_chunk, chunks))
    for status, r in outcomes:
        _raise_status(status, r)
    return ReplicationResult(checkpoints, regret, pulls)
