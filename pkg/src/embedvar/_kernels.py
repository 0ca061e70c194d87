"""Numba-compiled inner loops for skip-gram training.

Everything here operates on flat numpy arrays prepared by embedvar.sgns.
The RNG is the same SplitMix64 update as embedvar.rng; bounded draws use
plain modulo reduction (bias below 2**-40 for every bound used here, which
is irrelevant for SGD sampling but must be kept identical across
reimplementations for bit reproducibility).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, nogil=True, inline="always")
def _next_u64(state):
    state[0] += _GAMMA
    z = state[0]
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


@njit(cache=True, nogil=True, inline="always")
def _next_float(state):
    return np.float64(_next_u64(state) >> _U64(11)) * _INV53


@njit(cache=True, nogil=True)
def fill_uniform(mat, bound, seed):
    """Fill mat in row-major order with uniforms in [-bound, bound)."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = _U64(seed)
    rows, cols = mat.shape
    for i in range(rows):
        for j in range(cols):
            mat[i, j] = np.float32((2.0 * _next_float(state) - 1.0) * bound)


@njit(cache=True, nogil=True)
def build_negative_table(probs, size):
    """Discretize a probability vector into a word-id sampling table."""
    table = np.empty(size, dtype=np.int32)
    pos = 0
    cum = 0.0
    for w in range(probs.shape[0]):
        cum += probs[w]
        end = np.int64(round(cum * size))
        if end > size:
            end = size
        while pos < end:
            table[pos] = w
            pos += 1
    while pos < size:
        table[pos] = probs.shape[0] - 1
        pos += 1
    return table


@njit(cache=True, nogil=True, inline="always")
def _softplus(x):
    if x > 0.0:
        return x + np.log1p(np.exp(-x))
    return np.log1p(np.exp(x))


@njit(cache=True, nogil=True)
def train_chunk(
    tokens,
    line_offsets,
    line_start,
    line_stop,
    in_mat,
    out_mat,
    sub_idx,
    sub_off,
    neg_table,
    keep_prob,
    window,
    negatives,
    lr0,
    total_tokens,
    progress,
    state,
    max_line_len,
):
    """One pass over lines [line_start, line_stop) with SGD updates.

    Per line: subsample tokens, then for each kept position draw a window
    radius in [1, window] and train one positive plus `negatives` sampled
    pairs per context. The learning rate decays linearly with the shared
    token progress counter and is refreshed once per line. Negative draws
    that collide with the context word are resampled (at most 100 tries).

    Returns (loss_sum, pair_count, first_bad_step); first_bad_step is -1
    unless a non-finite score was encountered, in which case it is the
    0-based index of the offending pair update and training stopped there.
    """
    dim = in_mat.shape[1]
    table_size = _U64(neg_table.shape[0])
    window_u = _U64(window)
    kept = np.empty(max_line_len, dtype=np.int32)
    hidden = np.empty(dim, dtype=np.float32)
    grad_hidden = np.empty(dim, dtype=np.float32)
    loss_sum = 0.0
    pair_count = np.int64(0)

    for li in range(line_start, line_stop):
        lo_tok = line_offsets[li]
        hi_tok = line_offsets[li + 1]
        lr = lr0 * (1.0 - np.float64(progress[0]) / total_tokens)
        if lr < 0.0:
            lr = 0.0
        n_kept = 0
        for t in range(lo_tok, hi_tok):
            w = tokens[t]
            progress[0] += 1
            if _next_float(state) < keep_prob[w]:
                kept[n_kept] = w
                n_kept += 1
        for pos in range(n_kept):
            center = kept[pos]
            radius = np.int64(_next_u64(state) % window_u) + 1
            s_lo = sub_off[center]
            s_hi = sub_off[center + 1]
            inv_rows = 1.0 / np.float64(s_hi - s_lo)
            ctx_lo = pos - radius
            if ctx_lo < 0:
                ctx_lo = 0
            ctx_hi = pos + radius
            if ctx_hi > n_kept - 1:
                ctx_hi = n_kept - 1
            for q in range(ctx_lo, ctx_hi + 1):
                if q == pos:
                    continue
                context = kept[q]
                for d in range(dim):
                    hidden[d] = 0.0
                for s in range(s_lo, s_hi):
                    row = sub_idx[s]
                    for d in range(dim):
                        hidden[d] += in_mat[row, d]
                for d in range(dim):
                    hidden[d] *= np.float32(inv_rows)
                    grad_hidden[d] = 0.0
                for sample in range(negatives + 1):
                    if sample == 0:
                        target = context
                        label = 1.0
                    else:
                        target = neg_table[np.int64(_next_u64(state) % table_size)]
                        tries = 0
                        while target == context and tries < 100:
                            target = neg_table[np.int64(_next_u64(state) % table_size)]
                            tries += 1
                        label = 0.0
                    score = 0.0
                    for d in range(dim):
                        score += np.float64(hidden[d]) * np.float64(out_mat[target, d])
                    if not np.isfinite(score):
                        return loss_sum, pair_count, pair_count
                    if score > 0.0:
                        sig = 1.0 / (1.0 + np.exp(-score))
                    else:
                        es = np.exp(score)
                        sig = es / (1.0 + es)
                    if label > 0.5:
                        loss_sum += _softplus(-score)
                    else:
                        loss_sum += _softplus(score)
                    g = np.float32((sig - label) * lr)
                    for d in range(dim):
                        grad_hidden[d] += g * out_mat[target, d]
                        out_mat[target, d] -= g * hidden[d]
                scale = np.float32(inv_rows)
                for s in range(s_lo, s_hi):
                    row = sub_idx[s]
                    for d in range(dim):
                        in_mat[row, d] -= grad_hidden[d] * scale
                pair_count += 1
    return loss_sum, pair_count, np.int64(-1)
