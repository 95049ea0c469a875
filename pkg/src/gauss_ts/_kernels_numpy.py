"""Pure-numpy episode loop, vectorised across replications.

Runs all replications in lock-step over rounds and follows the same
substream layout and draw indexing as :mod:`gauss_ts._kernels`, so both
backends consume identical uniforms.  Results agree with the compiled path
up to libm rounding differences, which never flip a decision in practice.
"""
from __future__ import annotations

import numpy as np

from .rng import normal_np, student_t_np, substream_keys_np, uniform_np
from ._kernels import DEGENERATE_SSQ_RTOL, ERR_DEGENERATE, ERR_SAMPLER, OK


def _regret_from_counts(gaps, counts):
    acc = np.zeros(counts.shape[0])
    for i in range(gaps.size):
        acc = acc + gaps[i] * counts[:, i]
    return acc


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
    chosen_out=None,
    cum_out=None,
):
    R = keys.size
    K = mus.size
    rows = np.arange(R)
    n = np.zeros((R, K), dtype=np.int64)
    mean = np.zeros((R, K))
    ssq = np.zeros((R, K))
    reward_keys = np.stack([substream_keys_np(keys, 2 * i) for i in range(K)], axis=1)
    post_keys = np.stack([substream_keys_np(keys, 2 * i + 1) for i in range(K)], axis=1)
    tie_keys = substream_keys_np(keys, 2 * K)
    tie_ctr = np.zeros(R, dtype=np.uint64)
    post_ctr = np.zeros((R, K), dtype=np.uint64)

    unknown = np.flatnonzero(~known)
    known_idx = np.flatnonzero(known)
    init_rounds = unknown.size * n0
    vals = np.empty((R, K))
    vals[:, known_idx] = known_vals[known_idx]
    ci = 0

    for t in range(horizon):
        if t < init_rounds:
            arm = np.full(R, unknown[t % unknown.size])
        else:
            nu, mu_hat, ss = n[:, unknown], mean[:, unknown], ssq[:, unknown]
            bad = (ss < DEGENERATE_SSQ_RTOL * np.maximum(1.0, nu * mu_hat * mu_hat)).any(axis=1)
            if bad.any():
                return ERR_DEGENERATE, int(np.flatnonzero(bad)[0])
            dof = nu + 2.0 * alpha - 1.0
            draw = student_t_np(post_keys[:, unknown], post_ctr[:, unknown], dof)
            post_ctr[:, unknown] += np.uint64(1)
            if np.isnan(draw).any():
                return ERR_SAMPLER, int(np.flatnonzero(np.isnan(draw).any(axis=1))[0])
            vals[:, unknown] = mu_hat + np.sqrt(ss / (nu * dof)) * draw
            best = vals.max(axis=1)
            at_best = vals == best[:, None]
            arm = np.argmax(at_best, axis=1)
            if tie_uniform:
                nties = at_best.sum(axis=1)
                tied = np.flatnonzero(nties > 1)
                if tied.size:
                    u = uniform_np(tie_keys[tied], tie_ctr[tied], 0)
                    tie_ctr[tied] += np.uint64(1)
                    pick = (u * nties[tied]).astype(np.int64)
                    rank = np.cumsum(at_best[tied], axis=1) - 1
                    arm[tied] = np.argmax(at_best[tied] & (rank == pick[:, None]), axis=1)

        counts = n[rows, arm]
        x = mus[arm] + sigmas[arm] * normal_np(reward_keys[rows, arm], counts, 0)
        n1 = counts + 1
        m = mean[rows, arm]
        delta = x - m
        new_mean = m + delta / n1
        ssq[rows, arm] = ssq[rows, arm] + delta * (x - new_mean)
        mean[rows, arm] = new_mean
        n[rows, arm] = n1

        if chosen_out is not None:
            chosen_out[:, t] = arm
            cum_out[:, t] = _regret_from_counts(gaps, n)
        if ci < checkpoints.size and checkpoints[ci] == t + 1:
            ckpt_out[:, ci] = _regret_from_counts(gaps, n)
            ci += 1

    pulls_out[:] = n
    return OK, -1
