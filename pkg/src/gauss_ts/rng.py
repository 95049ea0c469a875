"""Counter-based random streams.

Every variate is a pure function of ``(key, index, lane)``:

* ``key``   -- 64-bit stream key derived from ``(seed, stream_id)``,
* ``index`` -- the draw number inside the stream (one per variate),
* ``lane``  -- the uniform number consumed *within* that draw.

Rejection samplers walk along lanes, so draw ``j`` never depends on how many
uniforms draw ``j - 1`` consumed.  This makes streams trivially splittable,
lets the numpy path vectorise rejection loops, and keeps the numba and
numpy backends on the same sequence of uniforms.

The mixing function is the SplitMix64 finalizer applied twice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .errors import DomainError

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_LANE_MUL = U64(0xD1B54A32D192ED03)
_SEED_SALT = U64(0x243F6A8885A308D3)
_SUB_MUL = U64(0xA0761D6478BD642F)
_M1 = U64(0xBF58476D1CE4E5B9)
_M2 = U64(0x94D049BB133111EB)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_S11 = U64(11)
_ONE = U64(1)
_TWO_M53 = 2.0 ** -53
_HALF_ULP = 0.5 * 2.0 ** -53
_TWO_PI = 2.0 * math.pi

# Marsaglia-Tsang accepts with probability > 0.95 for every shape >= 1, so
# exhausting this many attempts has probability below 1e-1000.
MAX_ATTEMPTS = 1000
_LANES_PER_ATTEMPT = 3

_U64_MASK = (1 << 64) - 1


# -- hashing (shared source: scalars under numba, arrays under numpy) -------

def _mix64_py(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


_mix64 = njit(_mix64_py)


@njit
def uniform_at(key, index, lane):
    """Uniform on the open interval (0, 1)."""
    z = _mix64(key ^ (index * _GOLDEN))
    z = _mix64(z + (lane + _ONE) * _LANE_MUL)
    return (z >> _S11) * _TWO_M53 + _HALF_ULP


# -- key derivation ----------------------------------------------------------

def _mix64_int(z: int) -> int:
    z &= _U64_MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64_MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64_MASK
    return z ^ (z >> 31)


def _check_u64(value: int, name: str) -> int:
    value = int(value)
    if not 0 <= value <= _U64_MASK:
        raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return value


def stream_key(seed: int, stream_id: int) -> int:
    """Key for stream ``stream_id`` of ``seed``.  Injective in ``stream_id``."""
    seed = _check_u64(seed, "seed")
    stream_id = _check_u64(stream_id, "stream_id")
    base = _mix64_int(seed ^ int(_SEED_SALT))
    return _mix64_int(base ^ ((stream_id * int(_GOLDEN)) & _U64_MASK))


@njit
def substream_key(key, idx):
    """Child key ``idx`` of ``key`` (injective in ``idx`` for fixed key)."""
    return _mix64(key ^ ((idx + _ONE) * _SUB_MUL))


def substream_keys_np(keys: np.ndarray, idx: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=U64)
    with np.errstate(over="ignore"):
        return _mix64_py(keys ^ ((U64(idx) + _ONE) * _SUB_MUL))


# -- scalar samplers (numba path) --------------------------------------------

@njit
def normal_at(key, index, lane):
    u1 = uniform_at(key, index, lane)
    u2 = uniform_at(key, index, lane + _ONE)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit
def gamma_at(key, index, shape, lane):
    """Gamma(shape, 1) by Marsaglia-Tsang with squeeze; shape < 1 via the
    U^(1/a) boost.  Returns nan if every attempt is rejected."""
    boost = 1.0
    if shape < 1.0:
        u = uniform_at(key, index, lane)
        lane = lane + _ONE
        boost = u ** (1.0 / shape)
        shape = shape + 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    for _ in range(MAX_ATTEMPTS):
        x = normal_at(key, index, lane)
        v = 1.0 + c * x
        if v > 0.0:
            v = v * v * v
            u = uniform_at(key, index, lane + U64(2))
            x2 = x * x
            if u < 1.0 - 0.0331 * x2 * x2:
                return d * v * boost
            if math.log(u) < 0.5 * x2 + d - d * v + d * math.log(v):
                return d * v * boost
        lane = lane + U64(_LANES_PER_ATTEMPT)
    return np.nan


@njit
def student_t_at(key, index, dof):
    z = normal_at(key, index, U64(0))
    w = 2.0 * gamma_at(key, index, 0.5 * dof, U64(2))
    return z / math.sqrt(w / dof)


# -- vectorised samplers (numpy path) ------------------------------------------

def _as_u64(a) -> np.ndarray:
    return np.asarray(a).astype(U64, copy=False)


def uniform_np(key, index, lane) -> np.ndarray:
    # uint64 wrap-around is the point; only 0-d inputs would warn
    with np.errstate(over="ignore"):
        z = _mix64_py(_as_u64(key) ^ (_as_u64(index) * _GOLDEN))
        z = _mix64_py(z + (_as_u64(lane) + _ONE) * _LANE_MUL)
    return (z >> _S11) * _TWO_M53 + _HALF_ULP


def normal_np(key, index, lane) -> np.ndarray:
    key, index, lane = np.broadcast_arrays(_as_u64(key), _as_u64(index), _as_u64(lane))
    u1 = uniform_np(key, index, lane)
    u2 = uniform_np(key, index, lane + _ONE)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def gamma_np(key, index, shape, lane) -> np.ndarray:
    key, index, shape, lane = np.broadcast_arrays(
        _as_u64(key), _as_u64(index), np.asarray(shape, dtype=np.float64), _as_u64(lane)
    )
    key = key.ravel()
    index = index.ravel()
    shape = shape.ravel().copy()
    lane = lane.ravel().copy()
    out = np.full(shape.shape, np.nan)
    boost = np.ones_like(shape)

    small = shape < 1.0
    if small.any():
        u = uniform_np(key[small], index[small], lane[small])
        boost[small] = u ** (1.0 / shape[small])
        lane[small] += _ONE
        shape[small] += 1.0
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)

    pending = np.arange(shape.size)
    for _ in range(MAX_ATTEMPTS):
        if pending.size == 0:
            break
        k, j, ln = key[pending], index[pending], lane[pending]
        x = normal_np(k, j, ln)
        v = 1.0 + c[pending] * x
        ok = v > 0.0
        v3 = np.where(ok, v, 1.0) ** 3
        u = uniform_np(k, j, ln + U64(2))
        dp = d[pending]
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        with np.errstate(divide="ignore", invalid="ignore"):
            full = np.log(u) < 0.5 * x2 + dp - dp * v3 + dp * np.log(v3)
        accept = ok & (squeeze | full)
        done = pending[accept]
        out[done] = dp[accept] * v3[accept] * boost[done]
        lane[pending] += U64(_LANES_PER_ATTEMPT)
        pending = pending[~accept]
    return out


def student_t_np(key, index, dof) -> np.ndarray:
    key, index, dof = np.broadcast_arrays(
        _as_u64(key), _as_u64(index), np.asarray(dof, dtype=np.float64)
    )
    z = normal_np(key, index, U64(0))
    w = 2.0 * gamma_np(key, index, 0.5 * dof, U64(2)).reshape(z.shape)
    return z / np.sqrt(w / dof)


# -- stream object -------------------------------------------------------------

@dataclass
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    ``counter`` is the index of the next draw.  Streams are cheap; give
    each worker its own instead of sharing one.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0
    key: int = field(init=False, repr=False)

    def __post_init__(self):
        self.key = stream_key(self.seed, self.stream_id)
        if self.counter < 0:
            raise DomainError("counter must be non-negative")

    def take(self, size: int) -> np.ndarray:
        """Reserve ``size`` consecutive draw indices and return them."""
        idx = np.arange(self.counter, self.counter + size, dtype=U64)
        self.counter += size
        return idx

    def take_one(self) -> int:
        j = self.counter
        self.counter += 1
        return j

    def copy(self) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.counter)
