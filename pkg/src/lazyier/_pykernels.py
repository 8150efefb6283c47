"""Numpy fallback for the edge-chain kernel.

Vectorised over edges, sequential in time. Each edge runs its own SplitMix64
stream seeded by a hash of ``(seed, i, j)``; outputs are bit-identical to the
compiled kernel.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 1.0 / 9007199254740992.0


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _unit(state):
    return (_mix(state) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def edge_keys(seed, rows, cols):
    seed_mix = _mix(np.array([seed], dtype=np.uint64) + GOLDEN)
    ij = (rows.astype(np.uint64) << np.uint64(32)) | cols.astype(np.uint64)
    return _mix(seed_mix ^ _mix(ij))


def edge_chain(seed, rows, cols, p_pre, p_post, alpha, T, tau):
    m = rows.shape[0]
    out = np.zeros((T, m), dtype=np.uint8)
    if m == 0:
        return out
    state = edge_keys(seed, rows, cols)
    state += GOLDEN
    x = _unit(state) < p_pre
    out[0] = x
    for t in range(1, T):
        p = p_pre if t < tau else p_post
        state += GOLDEN
        refresh = np.flatnonzero(_unit(state) >= alpha)
        s = state[refresh] + GOLDEN
        state[refresh] = s
        x[refresh] = _unit(s) < p[refresh]
        out[t] = x
    return out
