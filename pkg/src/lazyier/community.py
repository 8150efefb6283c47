"""Spectral community estimation on aggregated matrices."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .aggregate import aggregate_adjacency, normalized_adjacency
from .lazy_process import NetworkSequence
from .spectral import DEFAULT_TOL, top_k_eigenpairs

MODES = ("adjacency", "laplacian")
BRUTE_FORCE_MAX_K = 8


@dataclass(frozen=True)
class CommunitySpec:
    Z: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.Z)
        if Z.ndim != 2 or np.any((Z != 0) & (Z != 1)) or np.any(Z.sum(axis=1) != 1):
            raise ValueError("Z must be binary with exactly one 1 per row")
        if np.asarray(self.B).shape != (Z.shape[1], Z.shape[1]):
            raise ValueError("B must be K x K")

    @property
    def labels(self) -> np.ndarray:
        """1-based community labels."""
        return np.argmax(self.Z, axis=1) + 1


@dataclass(frozen=True)
class ClusteringResult:
    labels: np.ndarray  # 1-based
    kmeans_objective: float
    restarts_used: int
    K: int

    @property
    def Z_hat(self) -> np.ndarray:
        return membership_matrix(self.labels, self.K)


def membership_matrix(labels, K: int) -> np.ndarray:
    """n x K binary matrix from 1-based labels."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 1 or labels.max() > K):
        raise ValueError(f"labels must lie in [1, {K}]")
    Z = np.zeros((labels.size, K), dtype=np.int64)
    Z[np.arange(labels.size), labels - 1] = 1
    return Z


def spectral_embed(M, K: int, mode: str = "adjacency", degrees=None, normalize_rows: bool = False,
                   tol: float = DEFAULT_TOL) -> np.ndarray:
    """Rows of the top-K eigenvectors (by ``|lambda|``).

    For ``mode="laplacian"`` the eigenvectors are those of
    ``I - L = D^{-1/2} M D^{-1/2}``, which needs ``degrees``.
    """
    if mode == "laplacian":
        if degrees is None:
            degrees = np.asarray(M).sum(axis=1)
        M = normalized_adjacency(M, degrees)
    elif mode != "adjacency":
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    X = top_k_eigenpairs(M, K, tol=tol).vectors
    if normalize_rows:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = X / np.where(norms > 0, norms, 1.0)
    return X


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _kmeanspp(X, K, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = _sq_dists(X, np.array(centers))[:, 0]
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(X[idx])
        d2 = np.minimum(d2, _sq_dists(X, X[idx][None, :])[:, 0])
    return np.array(centers, dtype=np.float64)


def _lloyd(X, C, max_iter):
    K = C.shape[0]
    labels = None
    for _ in range(max_iter):
        D = _sq_dists(X, C)
        new = np.argmin(D, axis=1)
        counts = np.bincount(new, minlength=K)
        for k in np.flatnonzero(counts == 0):
            # reseed an empty cluster at the point worst served by its centre;
            # if every point sits on its centre there is nothing to split
            served = D[np.arange(len(new)), new]
            far = int(np.argmax(served))
            if served[far] <= 0.0:
                break
            new[far] = k
            D[far] = 0.0
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        C = np.array([X[labels == k].mean(axis=0) if np.any(labels == k) else C[k] for k in range(K)])
    objective = float(((X - C[labels]) ** 2).sum())
    return labels, objective


def _canonical(labels):
    """Relabel 0-based clusters by order of first appearance, returned 1-based."""
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(labels.max() + 1, dtype=np.int64)
    remap[np.unique(labels)[order]] = np.arange(order.size)
    return remap[labels] + 1


def approx_kmeans(X, K: int, restarts: int = 20, seed: int = 0, max_iter: int = 100) -> ClusteringResult:
    """k-means++ seeding plus Lloyd iterations, best of ``restarts``.

    Restart ``r`` draws from its own stream ``SeedSequence([seed, r])``; ties in
    the objective go to the lowest restart index.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if not 1 <= K <= X.shape[0]:
        raise ValueError(f"K must lie in [1, {X.shape[0]}]")
    best_labels, best_obj = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        labels, obj = _lloyd(X, _kmeanspp(X, K, rng), max_iter)
        if obj < best_obj:
            best_labels, best_obj = labels, obj
    return ClusteringResult(labels=_canonical(best_labels), kmeans_objective=best_obj, restarts_used=restarts,
                            K=K)


def _best_matching(C):
    """Maximum of ``sum_a C[a, sigma(a)]`` over permutations sigma."""
    K = C.shape[0]
    if K <= BRUTE_FORCE_MAX_K:
        perms = np.array(list(itertools.permutations(range(K))), dtype=np.int64).reshape(-1, K)
        return int(C[np.arange(K), perms].sum(axis=1).max())
    r, c = linear_sum_assignment(C, maximize=True)
    return int(C[r, c].sum())


def misclustering_error(Z_hat, Z) -> float:
    """``min over permutations Pi of ||Z_hat - Z Pi||_F^2 / n``."""
    Z_hat = np.asarray(Z_hat, dtype=np.int64)
    Z = np.asarray(Z, dtype=np.int64)
    if Z_hat.shape != Z.shape or Z.ndim != 2:
        raise ValueError(f"shape mismatch: {Z_hat.shape} vs {Z.shape}")
    n = Z.shape[0]
    # ||Z_hat - Z Pi||^2 = ||Z_hat||^2 + ||Z||^2 - 2 <Z_hat, Z Pi>
    C = Z_hat.T @ Z
    sq = int((Z_hat**2).sum() + (Z**2).sum()) - 2 * _best_matching(C)
    return sq / n


def estimate_communities(seq: NetworkSequence, K: int, mode: str = "adjacency", restarts: int = 20,
                         seed: int = 0, normalize_rows: bool = False) -> ClusteringResult:
    A, degrees = aggregate_adjacency(seq)
    X = spectral_embed(A, K, mode=mode, degrees=degrees, normalize_rows=normalize_rows)
    return approx_kmeans(X, K, restarts=restarts, seed=seed)
