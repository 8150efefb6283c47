"""Mean matrices for lazy IER processes: block models, the logistic graphon, explicit arrays."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

MODEL_TAGS = ("sbm", "graphon", "explicit")


class ModelError(ValueError):
    """Raised when a mean-matrix specification is invalid."""


@dataclass(frozen=True)
class MeanMatrix:
    """Symmetric matrix of edge probabilities.

    ``entries`` is copied and made read-only on construction.
    """

    entries: np.ndarray
    model_tag: str = "explicit"

    def __post_init__(self):
        P = np.array(self.entries, dtype=np.float64, copy=True)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ModelError(f"mean matrix must be square, got shape {P.shape}")
        if not np.array_equal(P, P.T):
            raise ModelError("mean matrix must be symmetric")
        if P.size and (np.isnan(P).any() or P.min() < 0.0 or P.max() > 1.0):
            raise ModelError("mean matrix entries must lie in [0, 1]")
        if self.model_tag not in MODEL_TAGS:
            raise ModelError(f"unknown model tag {self.model_tag!r}")
        P.setflags(write=False)
        object.__setattr__(self, "entries", P)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MeanMatrix):
            return NotImplemented
        return self.model_tag == other.model_tag and np.array_equal(self.entries, other.entries)

    __hash__ = None


@dataclass(frozen=True)
class DegreeStats:
    d_min: float
    d_max: float
    d_avg: float


@dataclass(frozen=True)
class SbmSpec:
    n: int
    community_sizes: Sequence[int]
    B: np.ndarray
    allow_self_loops: bool = True
    permutation_seed: Optional[int] = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.community_sizes)
        B = np.array(self.B, dtype=np.float64, copy=True)
        if any(s <= 0 for s in sizes):
            raise ModelError("community sizes must be positive")
        if sum(sizes) != self.n:
            raise ModelError(f"community sizes sum to {sum(sizes)}, expected n={self.n}")
        K = len(sizes)
        if B.shape != (K, K):
            raise ModelError(f"B must be {K}x{K}, got {B.shape}")
        if np.isnan(B).any() or B.min() < 0.0 or B.max() > 1.0:
            raise ModelError("B entries must lie in [0, 1]")
        if not np.array_equal(B, B.T):
            raise ModelError("B must be symmetric")
        object.__setattr__(self, "community_sizes", sizes)
        object.__setattr__(self, "B", B)

    @property
    def K(self) -> int:
        return len(self.community_sizes)

    def labels(self) -> np.ndarray:
        """0-based community of each vertex (contiguous blocks, optionally shuffled)."""
        z = np.repeat(np.arange(self.K), self.community_sizes)
        if self.permutation_seed is not None:
            z = np.random.default_rng(self.permutation_seed).permutation(z)
        return z

    def membership(self) -> np.ndarray:
        """n x K binary membership matrix Z."""
        Z = np.zeros((self.n, self.K), dtype=np.int64)
        Z[np.arange(self.n), self.labels()] = 1
        return Z

    @classmethod
    def two_block(cls, n: int, a: float, b: float, **kwargs) -> "SbmSpec":
        """Two equal communities with intra probability a/n and inter probability b/n."""
        if n % 2:
            raise ModelError("two_block needs even n")
        B = np.array([[a, b], [b, a]], dtype=np.float64) / n
        return cls(n=n, community_sizes=[n // 2, n // 2], B=B, **kwargs)


@dataclass(frozen=True)
class GraphonSpec:
    n: int
    k_scale: float
    allow_self_loops: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be positive")
        if not self.k_scale >= 1.0:
            raise ModelError(f"k_scale must be >= 1, got {self.k_scale}")


def build_sbm_mean(spec: SbmSpec) -> MeanMatrix:
    """Return ``P = Z B Z^T``."""
    z = spec.labels()
    P = spec.B[np.ix_(z, z)]
    if not spec.allow_self_loops:
        np.fill_diagonal(P, 0.0)
    return MeanMatrix(P, "sbm")


def logistic_graphon(x: np.ndarray, y: np.ndarray, k_scale: float) -> np.ndarray:
    return 1.0 / (k_scale * (1.0 + np.exp(-x - y)))


def graphon_mean_from_latent(U: np.ndarray, k_scale: float, allow_self_loops: bool = True) -> MeanMatrix:
    """Mean matrix ``p_ij = W(U_i, U_j)`` for given latent positions."""
    U = np.asarray(U, dtype=np.float64)
    P = logistic_graphon(U[:, None], U[None, :], k_scale)
    # exp is evaluated elementwise, so P == P.T bit for bit; enforce anyway.
    P = np.triu(P) + np.triu(P, 1).T
    if not allow_self_loops:
        np.fill_diagonal(P, 0.0)
    return MeanMatrix(P, "graphon")


def sample_graphon_mean(spec: GraphonSpec, seed: int) -> MeanMatrix:
    U = np.random.default_rng(seed).uniform(0.0, 1.0, size=spec.n)
    return graphon_mean_from_latent(U, spec.k_scale, spec.allow_self_loops)


def degree_stats(P: MeanMatrix) -> DegreeStats:
    rows = P.entries.sum(axis=1)
    if rows.size == 0:
        return DegreeStats(0.0, 0.0, 0.0)
    # clamp so d_min <= d_avg <= d_max survives rounding in the mean
    d_min, d_max = float(rows.min()), float(rows.max())
    d_avg = min(max(float(rows.mean()), d_min), d_max)
    return DegreeStats(d_min, d_max, d_avg)
