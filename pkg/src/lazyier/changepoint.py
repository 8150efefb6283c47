"""Single-changepoint CUSUM estimation for network sequences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_model import MeanMatrix
from .lazy_process import NetworkSequence
from .spectral import DEFAULT_TOL, operator_norm


@dataclass(frozen=True)
class ChangepointSpec:
    P: MeanMatrix
    Q: MeanMatrix
    tau: int
    xi: float = 0.5
    Lambda: int = 1

    def __post_init__(self):
        if self.P.n != self.Q.n:
            raise ValueError("P and Q must have the same size")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")
        if self.Lambda < 1:
            raise ValueError("Lambda must be >= 1")

    def kappa(self, T: int) -> int:
        return min(self.tau, T - self.tau)

    def validate(self, T: int):
        if not 1 <= self.tau <= T - 1:
            raise ValueError(f"tau must lie in [1, {T - 1}], got {self.tau}")
        if self.Lambda > self.kappa(T):
            raise ValueError(f"Lambda={self.Lambda} exceeds kappa={self.kappa(T)}")


@dataclass(frozen=True)
class CusumProfile:
    t: np.ndarray
    values: np.ndarray
    argmax: int
    tie_count: int


def _weight(t, T, xi):
    return ((t / T) * (1.0 - t / T)) ** xi


class _Partials:
    """Cumulative layer sums so each split costs one subtraction."""

    def __init__(self, seq: NetworkSequence):
        self.T = seq.T
        self.cum = np.cumsum(seq.dense_layers(), axis=0, dtype=np.float64)

    def difference(self, t):
        total = self.cum[-1]
        head = self.cum[t - 1]
        return head / t - (total - head) / (self.T - t)


def cusum_statistic(seq: NetworkSequence, t: int, xi: float, tol: float = DEFAULT_TOL) -> float:
    T = seq.T
    if not 1 <= t <= T - 1:
        raise ValueError(f"t must lie in [1, {T - 1}], got {t}")
    return _weight(t, T, xi) * operator_norm(_Partials(seq).difference(t), tol=tol)


def estimate_changepoint(seq: NetworkSequence, Lambda: int, xi: float, tol: float = DEFAULT_TOL) -> CusumProfile:
    """Evaluate the CUSUM profile on ``[Lambda, T - Lambda]``; ties go to the smallest t."""
    T = seq.T
    if Lambda < 1 or Lambda > T - Lambda:
        raise ValueError(f"need 1 <= Lambda <= T - Lambda, got Lambda={Lambda}, T={T}")
    parts = _Partials(seq)
    ts = np.arange(Lambda, T - Lambda + 1)
    values = np.array([_weight(t, T, xi) * operator_norm(parts.difference(t), tol=tol) for t in ts])
    top = values.max()
    hits = np.flatnonzero(values == top)
    return CusumProfile(t=ts, values=values, argmax=int(ts[hits[0]]), tie_count=int(hits.size))


def population_cusum(spec: ChangepointSpec, T: int, t: int, norm_diff: float = None) -> float:
    """Noise-free profile value at ``t``.

    ``norm_diff`` caches ``||P - Q||`` across calls.
    """
    if not 1 <= t <= T - 1:
        raise ValueError(f"t must lie in [1, {T - 1}], got {t}")
    spec.validate(T)
    if norm_diff is None:
        norm_diff = operator_norm(spec.P.entries - spec.Q.entries)
    xi, tau = spec.xi, spec.tau
    if t <= tau:
        return t**xi / (T - t) ** (1.0 - xi) * (T - tau) / T ** (2.0 * xi) * norm_diff
    return (T - t) ** xi / t ** (1.0 - xi) * tau / T ** (2.0 * xi) * norm_diff


def build_perturbed_mean(P: MeanMatrix, delta_e: int, delta_p: float, seed: int) -> MeanMatrix:
    """Raise ``delta_e`` distinct off-diagonal pairs by ``delta_p``, clipped at 1."""
    n = P.n
    n_pairs = n * (n - 1) // 2
    if not 0 <= delta_e <= n_pairs:
        raise ValueError(f"delta_e must lie in [0, {n_pairs}], got {delta_e}")
    rows, cols = np.triu_indices(n, 1)
    pick = np.random.default_rng(seed).choice(n_pairs, size=delta_e, replace=False)
    Q = np.array(P.entries)
    i, j = rows[pick], cols[pick]
    Q[i, j] = np.minimum(Q[i, j] + delta_p, 1.0)
    Q[j, i] = Q[i, j]
    return MeanMatrix(Q, P.model_tag)
