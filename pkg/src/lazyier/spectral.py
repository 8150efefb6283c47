"""Extreme eigenpairs of symmetric matrices.

Lanczos with full reorthogonalisation. When the Krylov space becomes
invariant the iteration restarts from a fresh random vector orthogonal to the
basis, so repeated and zero eigenvalues are still reached. The tridiagonal
problem is then block diagonal and the usual residual estimate
``|beta_m * s_mi|`` stays exact.

A single Krylov space holds one direction per eigenspace, so exact
multiplicities are only resolved through those restarts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

DEFAULT_TOL = 1e-10
DENSE_THRESHOLD = 64


class NonConvergence(RuntimeError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


def _as_operator(M):
    if sp.issparse(M):
        M = sp.csr_array(M, dtype=np.float64)
    else:
        M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def _fix_signs(V):
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _lanczos(M, K, tol, seed, maxiter):
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    V = np.zeros((n, n + 1))
    a = np.zeros(n)
    b = np.zeros(n)
    v = rng.standard_normal(n)
    V[:, 0] = v / np.linalg.norm(v)
    scale = 0.0
    m = 0  # basis size
    next_check = K
    best = None
    for it in range(maxiter):
        w = M @ V[:, m]
        a[m] = V[:, m] @ w
        Vm = V[:, : m + 1]
        for _ in range(2):
            w -= Vm @ (Vm.T @ w)
        beta = np.linalg.norm(w)
        m += 1
        scale = max(scale, abs(a[m - 1]), beta)
        invariant = beta <= 1e-13 * max(scale, 1e-300)
        if invariant:
            beta = 0.0
        b[m - 1] = beta

        if m >= K and (m >= next_check or invariant or m == n):
            theta, S = eigh_tridiagonal(a[:m], b[: m - 1])
            order = np.argsort(-np.abs(theta), kind="stable")[:K]
            res = np.abs(beta * S[m - 1, order])
            top = np.abs(theta[order[0]])
            best = (theta[order], res)
            # an invariant block has exact Ritz pairs but may be missing
            # copies of a repeated eigenvalue, so keep restarting
            if m == n or (not invariant and np.all(res <= tol * max(top, 1e-300))):
                X = V[:, :m] @ S[:, order]
                return theta[order], X
            next_check = m + max(1, m // 8)

        if m == n:
            break
        if invariant:
            w = rng.standard_normal(n)
            for _ in range(2):
                w -= V[:, :m] @ (V[:, :m].T @ w)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            V[:, m] = w / nw
        else:
            V[:, m] = w / beta
    raise NonConvergence(f"Lanczos did not converge within {maxiter} iterations", bracket=best)


def top_k_eigenpairs(M, K: int, tol: float = DEFAULT_TOL, seed: int = 0) -> EigenResult:
    """The K eigenpairs of largest ``|lambda|``, ordered by descending ``|lambda|``.

    Ties in ``|lambda|`` keep the order the solver found them in.
    """
    M = _as_operator(M)
    n = M.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K must lie in [1, {n}], got {K}")
    values, X = _lanczos(M, K, tol, seed, maxiter=10 * n)
    X, _ = np.linalg.qr(X)
    # Rayleigh quotients on the re-orthonormalised vectors
    MX = M @ X
    values = np.einsum("ij,ij->j", X, MX)
    order = np.argsort(-np.abs(values), kind="stable")
    values, X, MX = values[order], X[:, order], MX[:, order]
    X = _fix_signs(X)
    MX = M @ X
    residuals = np.linalg.norm(MX - X * values, axis=0)
    return EigenResult(values=values, vectors=X, residuals=residuals)


def operator_norm(M, tol: float = DEFAULT_TOL, dense_threshold: int = DENSE_THRESHOLD, seed: int = 0) -> float:
    """``max |lambda_i(M)|`` of a symmetric matrix."""
    M = _as_operator(M)
    if M.shape[0] == 0:
        return 0.0
    if M.shape[0] <= dense_threshold:
        dense = M.toarray() if sp.issparse(M) else M
        return float(np.max(np.abs(np.linalg.eigvalsh(dense))))
    values, _ = _lanczos(M, 1, tol, seed, maxiter=10 * M.shape[0])
    return float(abs(values[0]))


def dense_eigenpairs(M, K: int = None) -> EigenResult:
    """Dense reference solution, ordered like :func:`top_k_eigenpairs`."""
    M = _as_operator(M)
    dense = M.toarray() if sp.issparse(M) else M
    w, U = np.linalg.eigh(dense)
    order = np.argsort(-np.abs(w), kind="stable")[: K or len(w)]
    w, U = w[order], _fix_signs(U[:, order])
    residuals = np.linalg.norm(dense @ U - U * w, axis=0)
    return EigenResult(values=w, vectors=U, residuals=residuals)
