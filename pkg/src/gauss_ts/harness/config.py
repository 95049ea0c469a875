"""Experiment spec files (TOML), validated fail-closed.

Schema::

    name = "two_arms"            # required, non-empty
    horizon = 100000             # required, >= 1
    reps = 1000                  # required, >= 1
    seed = 7                     # required, 0 <= seed < 2**64
    checkpoints = [10, 100]      # optional, strictly increasing, <= horizon;
                                 # default: 8 log-spaced points per decade

    [env]
    mu = [0.0, -1.0]             # required, >= 2 arms
    sigma2 = [1.0, 1.0]          # required, same length, all > 0

    [policy]
    alpha = -0.5                 # required
    tie_break = "uniform_random" # optional: "uniform_random" | "lowest_index"
    [policy.known]               # optional: arm index -> fixed mean
    "1" = -0.5

    [bounds]
    epsilon = 0.1                # optional: adds the finite-time bound column

    [output]
    dir = "results"              # optional; --out and GAUSS_TS_OUT take priority

Unknown keys anywhere are errors.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..bandit import TIE_BREAKS, Environment, PolicySpec, checkpoint_grid
from ..errors import ConfigError, GaussTSError
from ..theory import normalize

_TOP_KEYS = {"name", "horizon", "reps", "seed", "checkpoints", "env", "policy", "bounds", "output"}
_SECTION_KEYS = {
    "env": {"mu", "sigma2"},
    "policy": {"alpha", "tie_break", "known"},
    "bounds": {"epsilon"},
    "output": {"dir"},
}
_REQUIRED = ("name", "horizon", "reps", "seed", "env", "policy")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    env: Environment
    policy: PolicySpec
    horizon: int
    reps: int
    seed: int
    checkpoints: tuple[int, ...]
    epsilon: float | None = None
    out_dir: str | None = None

    def outputs(self, out_dir: Path) -> dict[str, Path]:
        return {
            "summary": out_dir / f"{self.name}.csv",
            "reps": out_dir / f"{self.name}_reps.csv",
            "manifest": out_dir / f"{self.name}.manifest.json",
        }

    def to_dict(self) -> dict:
        """Fully resolved spec; feeding it back to :func:`spec_from_dict` is lossless."""
        d = {
            "name": self.name,
            "horizon": self.horizon,
            "reps": self.reps,
            "seed": self.seed,
            "checkpoints": list(self.checkpoints),
            "env": {
                "mu": [a.mu for a in self.env.arms],
                "sigma2": [a.sigma2 for a in self.env.arms],
            },
            "policy": {
                "alpha": self.policy.prior.alpha,
                "tie_break": self.policy.tie_break,
                "known": {str(k): v for k, v in sorted(self.policy.known.items())},
            },
        }
        if self.epsilon is not None:
            d["bounds"] = {"epsilon": self.epsilon}
        if self.out_dir is not None:
            d["output"] = {"dir": self.out_dir}
        return d


def _int(value, field, minimum=None, maximum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{field} must be ≥ {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{field} must be ≤ {maximum}, got {value}")
    return value


def _real(value, field) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{field} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{field} must be finite, got {value}")
    return value


def _reals(value, field) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{field} must be a list of numbers")
    return [_real(v, f"{field}[{i}]") for i, v in enumerate(value)]


def _table(raw, field) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{field} must be a table")
    unknown = set(raw) - _SECTION_KEYS[field]
    if unknown:
        raise ConfigError(f"unknown key {field}.{sorted(unknown)[0]}")
    return raw


def spec_from_dict(raw: dict) -> ExperimentSpec:
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key {sorted(unknown)[0]}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key}")

    name = raw["name"]
    if not isinstance(name, str) or not name.strip():
        raise ConfigError("name must be a non-empty string")
    if any(c in name for c in "/\\") or name in {".", ".."}:
        raise ConfigError(f"name must be usable as a file name, got {name!r}")
    horizon = _int(raw["horizon"], "horizon", 1)
    reps = _int(raw["reps"], "reps", 1)
    seed = _int(raw["seed"], "seed", 0, 2**64 - 1)

    env_raw = _table(raw["env"], "env")
    for key in ("mu", "sigma2"):
        if key not in env_raw:
            raise ConfigError(f"missing required key env.{key}")
    mus = _reals(env_raw["mu"], "env.mu")
    sigma2s = _reals(env_raw["sigma2"], "env.sigma2")
    if len(mus) < 2:
        raise ConfigError("env.mu needs at least two arms")
    if len(mus) != len(sigma2s):
        raise ConfigError("env.sigma2 must have the same length as env.mu")
    for i, s in enumerate(sigma2s):
        if not s > 0.0:
            raise ConfigError(f"env.sigma2[{i}] must be > 0, got {s}")
    env = Environment.from_params(mus, sigma2s)

    pol_raw = _table(raw["policy"], "policy")
    if "alpha" not in pol_raw:
        raise ConfigError("missing required key policy.alpha")
    alpha = _real(pol_raw["alpha"], "policy.alpha")
    tie_break = pol_raw.get("tie_break", "uniform_random")
    if tie_break not in TIE_BREAKS:
        raise ConfigError(f"policy.tie_break must be one of {TIE_BREAKS}, got {tie_break!r}")
    known_raw = pol_raw.get("known", {})
    if not isinstance(known_raw, dict):
        raise ConfigError("policy.known must be a table of arm index -> mean")
    known = {}
    for k, v in known_raw.items():
        try:
            idx = int(k)
        except ValueError:
            raise ConfigError(f"policy.known key {k!r} is not an arm index") from None
        if not 0 <= idx < env.K:
            raise ConfigError(f"policy.known key {k!r} out of range for {env.K} arms")
        known[idx] = _real(v, f"policy.known.{k}")
    if len(known) >= env.K:
        raise ConfigError("policy.known may not cover every arm")
    policy = PolicySpec.thompson(alpha, known, tie_break)
    if horizon < policy.init_rounds(env.K):
        raise ConfigError(
            f"horizon must be ≥ {policy.init_rounds(env.K)} (forced initial pulls), got {horizon}"
        )

    if "checkpoints" in raw:
        cps = raw["checkpoints"]
        if not isinstance(cps, list) or not cps:
            raise ConfigError("checkpoints must be a non-empty list of integers")
        cps = [_int(c, f"checkpoints[{i}]", 1, horizon) for i, c in enumerate(cps)]
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigError("checkpoints must be strictly increasing")
        checkpoints = tuple(cps)
    else:
        checkpoints = tuple(int(c) for c in checkpoint_grid(horizon))

    epsilon = None
    if "bounds" in raw:
        b_raw = _table(raw["bounds"], "bounds")
        if "epsilon" in b_raw:
            epsilon = _real(b_raw["epsilon"], "bounds.epsilon")
            if known:
                raise ConfigError("bounds.epsilon is not defined for policies with known arms")
            if not alpha < 0.0:
                raise ConfigError("bounds.epsilon requires policy.alpha < 0")
            try:
                norm, _ = normalize(env)
            except GaussTSError as exc:
                raise ConfigError(f"bounds.epsilon: {exc}") from None
            half_gap = min(g for g in norm.gaps if g > 0.0) / 2.0
            if not 0.0 < epsilon < half_gap:
                raise ConfigError(
                    f"bounds.epsilon must lie in (0, {half_gap!r}) in normalized units, got {epsilon}"
                )

    out_dir = None
    if "output" in raw:
        o_raw = _table(raw["output"], "output")
        if "dir" in o_raw:
            if not isinstance(o_raw["dir"], str) or not o_raw["dir"]:
                raise ConfigError("output.dir must be a non-empty string")
            out_dir = o_raw["dir"]

    return ExperimentSpec(name, env, policy, horizon, reps, seed, checkpoints, epsilon, out_dir)


def load_spec(path) -> ExperimentSpec:
    """Read a TOML spec, or the ``spec`` entry of a run manifest (``.json``)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read spec file {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict) or "spec" not in doc:
            raise ConfigError(f"{path}: manifest has no 'spec' entry")
        return spec_from_dict(doc["spec"])
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    return spec_from_dict(raw)
