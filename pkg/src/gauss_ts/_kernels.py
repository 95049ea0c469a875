"""Compiled Thompson-sampling episode loop (numba path).

Substream layout inside one replication key (shared with the numpy path):

    2*i      reward draws of arm i   (draw index = pulls of arm i so far)
    2*i + 1  posterior draws of arm i (draw index = posterior samples so far)
    2*K      tie-break uniforms       (draw index = ties resolved so far)
"""
from __future__ import annotations

import math

import numpy as np

from ._jit import njit
from .rng import normal_at, student_t_at, substream_key, uniform_at

DEGENERATE_SSQ_RTOL = 1e-12

# status codes returned by the kernels
OK = 0
ERR_DEGENERATE = 1
ERR_SAMPLER = 2


@njit(cache=True)
def regret_from_counts(gaps, counts):
    """sum_i gaps[i] * counts[i], accumulated in index order."""
    acc = 0.0
    for i in range(gaps.size):
        acc += gaps[i] * counts[i]
    return acc


@njit(cache=True, nogil=True)
def episode(
    key,
    mus,
    sigmas,
    gaps,
    known,
    known_vals,
    alpha,
    n0,
    tie_uniform,
    horizon,
    checkpoints,
    ckpt_out,
    pulls_out,
    record,
    chosen_out,
    cum_out,
):
    K = mus.size
    n = np.zeros(K, dtype=np.int64)
    mean = np.zeros(K)
    ssq = np.zeros(K)
    vals = np.zeros(K)
    reward_keys = np.empty(K, dtype=np.uint64)
    post_keys = np.empty(K, dtype=np.uint64)
    post_ctr = np.zeros(K, dtype=np.uint64)
    for i in range(K):
        reward_keys[i] = substream_key(key, np.uint64(2 * i))
        post_keys[i] = substream_key(key, np.uint64(2 * i + 1))
    tie_key = substream_key(key, np.uint64(2 * K))
    tie_ctr = np.uint64(0)

    unknown = np.empty(K, dtype=np.int64)
    n_unknown = 0
    for i in range(K):
        if not known[i]:
            unknown[n_unknown] = i
            n_unknown += 1
    init_rounds = n_unknown * n0

    ci = 0
    n_ckpt = checkpoints.size
    for t in range(horizon):
        if t < init_rounds:
            arm = unknown[t % n_unknown]
        else:
            best = -np.inf
            arm = -1
            nties = 0
            for i in range(K):
                if known[i]:
                    v = known_vals[i]
                else:
                    if ssq[i] < DEGENERATE_SSQ_RTOL * max(1.0, n[i] * mean[i] * mean[i]):
                        return ERR_DEGENERATE
                    dof = n[i] + 2.0 * alpha - 1.0
                    draw = student_t_at(post_keys[i], post_ctr[i], dof)
                    post_ctr[i] += np.uint64(1)
                    if math.isnan(draw):
                        return ERR_SAMPLER
                    v = mean[i] + math.sqrt(ssq[i] / (n[i] * dof)) * draw
                vals[i] = v
                if v > best:
                    best = v
                    arm = i
                    nties = 1
                elif v == best:
                    nties += 1
            if nties > 1 and tie_uniform:
                u = uniform_at(tie_key, tie_ctr, np.uint64(0))
                tie_ctr += np.uint64(1)
                pick = int(u * nties)
                seen = 0
                for i in range(K):
                    if vals[i] == best:
                        if seen == pick:
                            arm = i
                            break
                        seen += 1

        x = mus[arm] + sigmas[arm] * normal_at(reward_keys[arm], np.uint64(n[arm]), np.uint64(0))
        n1 = n[arm] + 1
        delta = x - mean[arm]
        mean[arm] = mean[arm] + delta / n1
        ssq[arm] = ssq[arm] + delta * (x - mean[arm])
        n[arm] = n1

        if record:
            chosen_out[t] = arm
            cum_out[t] = regret_from_counts(gaps, n)
        if ci < n_ckpt and checkpoints[ci] == t + 1:
            ckpt_out[ci] = regret_from_counts(gaps, n)
            ci += 1

    for i in range(K):
        pulls_out[i] = n[i]
    return OK


@njit(cache=True, nogil=True)
def replications(
    keys,
    mus,
    sigmas,
    gaps,
    known,
    known_vals,
    alpha,
    n0,
    tie_uniform,
    horizon,
    checkpoints,
    ckpt_out,
    pulls_out,
):
    """Run one episode per key; returns (status, index of failing replication)."""
    dummy_i = np.empty(0, dtype=np.int64)
    dummy_f = np.empty(0)
    for r in range(keys.size):
        status = episode(
            keys[r],
            mus,
            sigmas,
            gaps,
            known,
            known_vals,
            alpha,
            n0,
            tie_uniform,
            horizon,
            checkpoints,
            ckpt_out[r],
            pulls_out[r],
            False,
            dummy_i,
            dummy_f,
        )
        if status != OK:
            return status, r
    return OK, -1
