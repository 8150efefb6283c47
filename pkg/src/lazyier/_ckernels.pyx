# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled edge-chain kernel. Must stay bit-identical to ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TO_UNIT = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _next(uint64_t* state) nogil:
    state[0] += GOLDEN
    return <double>(_mix(state[0]) >> 11) * TO_UNIT


def edge_chain(uint64_t seed, const int64_t[::1] rows, const int64_t[::1] cols,
               const double[::1] p_pre, const double[::1] p_post,
               double alpha, int T, int tau):
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t e
    cdef int t
    cdef uint64_t seed_mix = _mix(seed + GOLDEN)
    cdef const double[::1] p
    cdef uint64_t s1
    cdef uint8_t r, fresh
    out = np.zeros((T, m), dtype=np.uint8)
    cdef uint8_t[:, ::1] states = out
    state_arr = np.empty(m, dtype=np.uint64)
    cdef uint64_t[::1] state = state_arr
    # layer-major so each row of ``out`` is written contiguously
    with nogil:
        for e in range(m):
            state[e] = _mix(seed_mix ^ _mix((<uint64_t>rows[e] << 32) | <uint64_t>cols[e]))
            states[0, e] = 1 if _next(&state[e]) < p_pre[e] else 0
    for t in range(1, T):
        # t is 0-based, so this layer is epoch t + 1
        p = p_pre if t < tau else p_post
        with nogil:
            for e in range(m):
                # branch-free: the refresh draw is always computed but the
                # stream only advances past it when the edge refreshes
                s1 = state[e] + GOLDEN
                r = (<double>(_mix(s1) >> 11) * TO_UNIT) >= alpha
                fresh = (<double>(_mix(s1 + GOLDEN) >> 11) * TO_UNIT) < p[e]
                states[t, e] = (r & fresh) | ((1 - r) & states[t - 1, e])
                state[e] = s1 + r * GOLDEN
    return out
