"""Independent reference computations used by the tests.

Nothing here calls the code paths it is used to check; the package is
imported only for its container type.
"""
import itertools

import numpy as np

from lazyier.lazy_process import NetworkSequence


def path_law(p, alpha, T):
    """Enumerate all 2**T edge paths; return (paths, probabilities)."""
    paths = np.array(list(itertools.product((0, 1), repeat=T)), dtype=np.int64)
    probs = np.where(paths[:, 0] == 1, p, 1 - p).astype(float)
    for t in range(1, T):
        prev, cur = paths[:, t - 1], paths[:, t]
        fresh = np.where(cur == 1, p, 1 - p)
        probs *= alpha * (cur == prev) + (1 - alpha) * fresh
    return paths, probs


def path_sum_moments(p, alpha, T):
    paths, probs = path_law(p, alpha, T)
    s = paths.sum(axis=1)
    mean = float((probs * s).sum())
    return mean, float((probs * (s - mean) ** 2).sum())


def path_sum_distribution(p, alpha, T):
    paths, probs = path_law(p, alpha, T)
    return np.bincount(paths.sum(axis=1), weights=probs, minlength=T + 1)


def brute_force_me(Z_hat, Z):
    """min over permutation matrices Pi of ||Z_hat - Z Pi||_F^2 / n, fully explicit."""
    n, K = Z.shape
    best = None
    for perm in itertools.permutations(range(K)):
        Pi = np.eye(K, dtype=np.int64)[list(perm)]
        val = int(((Z_hat - Z @ Pi) ** 2).sum())
        best = val if best is None else min(best, val)
    return best / n


def brute_force_kmeans(X, K):
    """Exact minimum within-cluster sum of squares over all labellings (tiny n)."""
    n = X.shape[0]
    best = np.inf
    for labels in itertools.product(range(K), repeat=n - 1):
        lab = np.array((0,) + labels)
        obj = 0.0
        for k in range(K):
            pts = X[lab == k]
            if len(pts):
                obj += ((pts - pts.mean(axis=0)) ** 2).sum()
        best = min(best, obj)
    return best


def seq_from_dense(stack):
    stack = np.asarray(stack)
    n = stack.shape[1]
    layers = []
    for D in stack:
        i, j = np.nonzero(np.triu(D))
        layers.append(np.column_stack([i, j]).astype(np.int64))
    return NetworkSequence(n=n, layers=tuple(layers))
