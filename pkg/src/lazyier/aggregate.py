"""Aggregated adjacency, degrees and normalised Laplacian, sample and population."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_model import MeanMatrix
from .lazy_process import NetworkSequence


class ZeroDegreeError(ValueError):
    def __init__(self, vertices):
        self.vertices = [int(v) for v in vertices]
        super().__init__(f"zero aggregated degree at vertices {self.vertices}")


@dataclass(frozen=True)
class AggregateView:
    A: np.ndarray
    degrees: np.ndarray
    L: np.ndarray
    pop_A: np.ndarray
    pop_degrees: np.ndarray
    pop_L: np.ndarray


def aggregate_adjacency(seq: NetworkSequence):
    """Return ``(A, degrees)`` with ``A = sum_t A^(t)`` (int64).

    A self-loop adds one to its vertex degree.
    """
    seq._check_dense()
    U = seq.edge_counts().reshape(seq.n, seq.n)
    A = U + U.T
    A[np.diag_indices(seq.n)] = np.diagonal(U)
    return A, A.sum(axis=1)


def _normalised(A, degrees):
    degrees = np.asarray(degrees, dtype=np.float64)
    zero = np.flatnonzero(degrees <= 0)
    if zero.size:
        raise ZeroDegreeError(zero)
    s = 1.0 / np.sqrt(degrees)
    return s[:, None] * np.asarray(A, dtype=np.float64) * s[None, :]


def aggregate_laplacian(A, degrees) -> np.ndarray:
    """``L = I - D^{-1/2} A D^{-1/2}``."""
    return np.eye(len(degrees)) - _normalised(A, degrees)


def normalized_adjacency(A, degrees) -> np.ndarray:
    """``I - L``, the matrix the Laplacian embedding uses."""
    return _normalised(A, degrees)


def population_aggregates(P: MeanMatrix, T: int):
    """Return ``(pop_A, pop_degrees, pop_L)`` for T layers with mean P."""
    pop_A = T * P.entries
    pop_degrees = T * P.entries.sum(axis=1)
    return pop_A, pop_degrees, aggregate_laplacian(pop_A, pop_degrees)


def aggregate_view(seq: NetworkSequence, P: MeanMatrix) -> AggregateView:
    A, d = aggregate_adjacency(seq)
    pop_A, pop_d, pop_L = population_aggregates(P, seq.T)
    return AggregateView(A, d, aggregate_laplacian(A, d), pop_A, pop_d, pop_L)
