"""Thompson sampling for Gaussian bandits with unknown variances.

Submodules: ``special_fn`` (log-gamma, incomplete beta, Student-t tail),
``stats_core`` (sufficient statistics, samplers), ``posterior`` (posterior of
an arm's mean under the prior (sigma^2)^(-1-alpha)), ``bandit`` (environments,
policy, replications), ``theory`` (closed-form bounds) and ``harness`` (CLI).
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("gauss-ts")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from ._jit import HAS_NUMBA, default_backend
from .bandit import (
    ArmParams,
    Environment,
    PolicySpec,
    RegretTrace,
    ReplicationResult,
    checkpoint_grid,
    run_episode,
    run_replications,
)
from .posterior import PriorAlpha, derive_n0, posterior_tail, sample_posterior_mean, tail_bounds
from .rng import RngStream
from .stats_core import SufficientStats

__all__ = [
    "HAS_NUMBA",
    "default_backend",
    "ArmParams",
    "Environment",
    "PolicySpec",
    "RegretTrace",
    "ReplicationResult",
    "checkpoint_grid",
    "run_episode",
    "run_replications",
    "PriorAlpha",
    "derive_n0",
    "posterior_tail",
    "sample_posterior_mean",
    "tail_bounds",
    "RngStream",
    "SufficientStats",
]
