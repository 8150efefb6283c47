"""Lazy IER network sequences.

Three generators live here:

* :func:`simulate` runs the Markov recursion directly. Each unordered pair
  ``(i, j)`` owns a SplitMix64 stream keyed by ``(seed, i, j)``. At every step
  the stick/refresh coin is drawn first and the Bernoulli refresh value only
  when refreshing, so output does not depend on how edges are batched.
* :func:`renewal_simulate` builds the same law from i.i.d. geometric holding
  times and Bernoulli refreshes. It uses numpy's generator and shares no code
  with the direct path, so the two can check each other.
* :func:`simulate_piecewise` switches the refresh distribution after ``tau``.

:func:`edge_moments` and :func:`edge_sum_distribution` give exact moments
and the exact law of one edge's aggregated count.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import kernels
from .graph_model import MeanMatrix

MAX_DENSE_N = 2048
MAX_ORACLE_T = 64


class ProcessError(ValueError):
    pass


@dataclass(frozen=True)
class LazyProcessParams:
    P: MeanMatrix
    alpha: float
    T: int

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ProcessError(f"alpha must lie in [0, 1), got {self.alpha}")
        if int(self.T) != self.T or self.T < 1:
            raise ProcessError(f"T must be a positive integer, got {self.T}")


@dataclass(frozen=True)
class NetworkSequence:
    """T symmetric binary layers on n vertices.

    Layer ``t`` (0-based in Python) is stored as a sorted ``(k, 2)`` array of
    0-based pairs ``(i, j)`` with ``i <= j``.
    """

    n: int
    layers: Tuple[np.ndarray, ...]
    alpha: float = float("nan")
    seed: int = -1
    model: str = ""

    def __post_init__(self):
        layers = []
        for E in self.layers:
            E = np.array(E, dtype=np.int64).reshape(-1, 2)
            if E.size:
                if E.min() < 0 or E.max() >= self.n:
                    raise ProcessError("edge endpoint out of range")
                if np.any(E[:, 0] > E[:, 1]):
                    raise ProcessError("edges must be stored with i <= j")
                order = np.lexsort((E[:, 1], E[:, 0]))
                E = E[order]
                if np.any(np.all(E[1:] == E[:-1], axis=1)):
                    raise ProcessError("duplicate edge in a layer")
            E.setflags(write=False)
            layers.append(E)
        object.__setattr__(self, "layers", tuple(layers))

    @property
    def T(self) -> int:
        return len(self.layers)

    def dense_layer(self, t: int) -> np.ndarray:
        """Adjacency matrix of layer ``t`` (0-based)."""
        self._check_dense()
        A = np.zeros((self.n, self.n), dtype=np.int64)
        E = self.layers[t]
        A[E[:, 0], E[:, 1]] = 1
        A[E[:, 1], E[:, 0]] = 1
        return A

    def dense_layers(self) -> np.ndarray:
        """``(T, n, n)`` stack of adjacency matrices."""
        self._check_dense()
        out = np.zeros((self.T, self.n, self.n), dtype=np.int64)
        for t, E in enumerate(self.layers):
            out[t, E[:, 0], E[:, 1]] = 1
            out[t, E[:, 1], E[:, 0]] = 1
        return out

    def edge_counts(self) -> np.ndarray:
        """Upper-triangular aggregated counts as a flat ``n*n`` vector (row-major)."""
        flat = [E[:, 0] * self.n + E[:, 1] for E in self.layers]
        flat = np.concatenate(flat) if flat else np.zeros(0, dtype=np.int64)
        return np.bincount(flat, minlength=self.n * self.n)

    def _check_dense(self):
        if self.n > MAX_DENSE_N:
            raise ProcessError(f"dense materialisation limited to n <= {MAX_DENSE_N}")

    def __eq__(self, other):
        if not isinstance(other, NetworkSequence):
            return NotImplemented
        return (
            self.n == other.n
            and self.T == other.T
            and all(np.array_equal(a, b) for a, b in zip(self.layers, other.layers))
        )

    __hash__ = None


@dataclass(frozen=True)
class EdgeMoments:
    mean: float
    variance: float
    lag_cov: Tuple[float, ...]


@dataclass(frozen=True)
class RenewalTrace:
    """Renewal structure of every pair, stored in CSR form.

    Pair ``e = (pairs[e, 0], pairs[e, 1])`` has renewal epochs
    ``renewal_times[offsets[e]:offsets[e + 1]]`` (those ``<= T``) and refresh
    draws ``refresh_indicators[offsets[e] + e : offsets[e + 1] + e + 1]``; the
    first refresh draw is the initial state at epoch 0.
    """

    T: int
    pairs: np.ndarray
    offsets: np.ndarray
    renewal_times: np.ndarray
    refresh_indicators: np.ndarray

    @property
    def renewal_count(self) -> np.ndarray:
        return np.diff(self.offsets)

    def times(self, e: int) -> np.ndarray:
        return self.renewal_times[self.offsets[e] : self.offsets[e + 1]]

    def indicators(self, e: int) -> np.ndarray:
        return self.refresh_indicators[self.offsets[e] + e : self.offsets[e + 1] + e + 1]


def _active_pairs(P: np.ndarray, Q: np.ndarray = None):
    rows, cols = np.triu_indices(P.shape[0])
    p = P[rows, cols]
    q = p if Q is None else Q[rows, cols]
    keep = (p > 0) | (q > 0)
    return rows[keep], cols[keep], p[keep], q[keep]


def _to_sequence(n, rows, cols, states, alpha, seed, model) -> NetworkSequence:
    pairs = np.column_stack([rows, cols]).astype(np.int64)
    layers = tuple(pairs[np.flatnonzero(s)] for s in states)
    return NetworkSequence(n=n, layers=layers, alpha=float(alpha), seed=int(seed), model=model)


def simulate(params: LazyProcessParams, seed: int, backend: str = None) -> NetworkSequence:
    P = params.P.entries
    rows, cols, p, _ = _active_pairs(P)
    states = kernels.edge_chain(seed, rows, cols, p, p, params.alpha, params.T, params.T, backend=backend)
    return _to_sequence(params.P.n, rows, cols, states, params.alpha, seed, params.P.model_tag)


def simulate_piecewise(
    pre: LazyProcessParams, Q: MeanMatrix, tau: int, seed: int, backend: str = None
) -> NetworkSequence:
    """Layers ``1..tau`` refresh from ``pre.P``, layers ``tau+1..T`` from ``Q``.

    At epoch ``tau + 1`` an edge keeps ``A^(tau)`` with probability alpha,
    otherwise it draws from Bernoulli(Q). Sticking carries the pre-change
    state across, so the mean is ``Q + alpha**(t - tau) * (P - Q)`` for
    ``t > tau``.
    """
    if Q.n != pre.P.n:
        raise ProcessError(f"P and Q sizes differ: {pre.P.n} vs {Q.n}")
    if not 1 <= tau <= pre.T - 1:
        raise ProcessError(f"tau must lie in [1, T-1] = [1, {pre.T - 1}], got {tau}")
    rows, cols, p, q = _active_pairs(pre.P.entries, Q.entries)
    states = kernels.edge_chain(seed, rows, cols, p, q, pre.alpha, pre.T, tau, backend=backend)
    return _to_sequence(pre.P.n, rows, cols, states, pre.alpha, seed, f"piecewise(tau={tau})")


def renewal_simulate(params: LazyProcessParams, seed: int) -> Tuple[NetworkSequence, RenewalTrace]:
    """Renewal construction over epochs ``0..T``; epochs ``1..T`` are returned.

    Renewal epochs are partial sums of Geometric(1 - alpha) gaps on {1, 2, ...};
    the state is refreshed from Bernoulli(p) at epoch 0 and at each renewal.
    The renewal count by epoch ``T`` is then Binomial(T, 1 - alpha).
    """
    n, T, alpha = params.P.n, int(params.T), params.alpha
    rows, cols = np.triu_indices(n)
    p = params.P.entries[rows, cols]
    m = rows.size
    rng = np.random.default_rng(seed)
    gaps = rng.geometric(1.0 - alpha, size=(m, T))
    S = np.cumsum(gaps, axis=1)
    refresh = rng.random((m, T + 1)) < p[:, None]

    within = S <= T
    counts = within.sum(axis=1)
    states = np.empty((T, m), dtype=np.uint8)
    for s in range(1, T + 1):
        k = (S <= s).sum(axis=1)
        states[s - 1] = refresh[np.arange(m), k]

    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    times = S[within]  # row-major, so grouped by pair and increasing
    ind_mask = np.concatenate([np.ones((m, 1), dtype=bool), within], axis=1)
    trace = RenewalTrace(
        T=T,
        pairs=np.column_stack([rows, cols]).astype(np.int64),
        offsets=offsets,
        renewal_times=times.astype(np.int64),
        refresh_indicators=refresh[ind_mask].astype(np.uint8),
    )
    seq = _to_sequence(n, rows, cols, states, alpha, seed, params.P.model_tag + "+renewal")
    return seq, trace


def edge_moments(p: float, alpha: float, T: int) -> EdgeMoments:
    """Exact mean, variance and lag covariances of ``a = sum_t A^(t)`` for one edge."""
    _check_edge_args(p, alpha, T)
    v = p * (1.0 - p)
    h = np.arange(1, T)
    lag = v * alpha**h
    variance = T * v + 2.0 * float(np.sum((T - h) * lag))
    return EdgeMoments(mean=T * p, variance=variance, lag_cov=tuple(float(x) for x in lag))


def edge_sum_distribution(p: float, alpha: float, T: int) -> np.ndarray:
    """Exact law of ``a = sum_t A^(t)`` on ``{0, ..., T}`` by forward recursion."""
    _check_edge_args(p, alpha, T)
    if T > MAX_ORACLE_T:
        raise ProcessError(f"oracle limited to T <= {MAX_ORACLE_T}, got {T}")
    # f[x, s]: probability of current state x with running sum s
    f = np.zeros((2, T + 1))
    f[0, 0] = 1.0 - p
    f[1, 1] = p
    stay0 = alpha + (1.0 - alpha) * (1.0 - p)
    stay1 = alpha + (1.0 - alpha) * p
    for _ in range(1, T):
        g = np.zeros_like(f)
        g[0] = stay0 * f[0] + (1.0 - stay1) * f[1]
        g[1, 1:] = (1.0 - stay0) * f[0, :-1] + stay1 * f[1, :-1]
        f = g
    return f.sum(axis=0)


def _check_edge_args(p, alpha, T):
    if not 0.0 <= p <= 1.0:
        raise ProcessError(f"p must lie in [0, 1], got {p}")
    if not 0.0 <= alpha < 1.0:
        raise ProcessError(f"alpha must lie in [0, 1), got {alpha}")
    if int(T) != T or T < 1:
        raise ProcessError(f"T must be a positive integer, got {T}")
