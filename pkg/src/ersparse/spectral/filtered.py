"""Chebyshev-filtered subspace iteration for many top eigenvalues.

Each sweep applies a Chebyshev polynomial that is small on
``[lower, cut]`` and large above ``cut`` to a block of vectors, then does a
Rayleigh-Ritz step.  Converged leading Ritz pairs are locked and projected
out of later sweeps.  The polynomial degree is capped so that the ratio
between the largest active eigenvalue and the cut stays below
``max_amplification``; this keeps the filtered block well enough
conditioned for a Gram-matrix based Rayleigh-Ritz step, which is several
times cheaper than a Householder QR of a tall block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg.blas import daxpy

from .lanczos import lanczos_top


@dataclass
class FilteredResult:
    values: np.ndarray
    residuals: np.ndarray
    sweeps: int
    matvecs: int
    converged: bool


def spectral_interval(apply, n, rng, tol=1e-8):
    """Bounds ``lower <= lambda_min`` and ``upper >= lambda_max`` with a small margin."""
    top = lanczos_top(apply, n, 1, tol, 4000, rng)
    bot = lanczos_top(lambda v: -apply(v), n, 1, tol, 4000, rng)
    hi = top.values[0] + top.residuals[0] * max(1.0, abs(top.values[0]))
    lo = -bot.values[0] - bot.residuals[0] * max(1.0, abs(bot.values[0]))
    margin = 1e-2 * max(hi - lo, 1e-12)
    return lo - margin, hi + margin, top.matvecs + bot.matvecs


def _chebyshev_filter(apply, X, degree, lower, cut, top):
    """Scaled Chebyshev recurrence: damp ``[lower, cut]``, normalise to 1 at ``top``."""
    e = 0.5 * (cut - lower)
    c = 0.5 * (cut + lower)
    sigma = e / (top - c)
    tau = 2.0 / sigma
    X = np.ascontiguousarray(X)
    tmp = np.empty_like(X)
    Y = apply(X)
    Y -= np.multiply(X, c, out=tmp)
    Y *= sigma / e
    for _ in range(2, degree + 1):
        sigma_new = 1.0 / (tau - sigma)
        Z = apply(Y)
        Z -= np.multiply(Y, c, out=tmp)
        Z *= 2.0 * sigma_new / e
        Z -= np.multiply(X, sigma * sigma_new, out=tmp)
        X, Y, sigma = Y, Z, sigma_new
    return Y


def _sparse_chebyshev_filter(M, X, degree, lower, cut, top):
    """Same recurrence for a sparse matrix ``M``, with the shift and the step
    scale folded into the matrix entries: one product and one axpy per step."""
    e = 0.5 * (cut - lower)
    c = 0.5 * (cut + lower)
    sigma = e / (top - c)
    tau = 2.0 / sigma
    B = (M - c * sparse.identity(M.shape[0], format="csr")).tocsr()
    base = B.data.copy()
    X = np.ascontiguousarray(X)
    np.multiply(base, sigma / e, out=B.data)
    Y = B @ X
    for _ in range(2, degree + 1):
        sigma_new = 1.0 / (tau - sigma)
        np.multiply(base, 2.0 * sigma_new / e, out=B.data)
        Z = np.ascontiguousarray(B @ Y)
        daxpy(X.ravel(), Z.ravel(), a=-sigma * sigma_new)
        X, Y, sigma = Y, Z, sigma_new
    return Y


def _degree(lower, cut, top, max_amplification, lo=2, hi=60):
    x = (top - 0.5 * (cut + lower)) / (0.5 * (cut - lower))
    if x <= 1.0:
        return hi
    return int(min(hi, max(lo, math.acosh(max_amplification) / math.acosh(x))))


def _project_out(X, L):
    if L.shape[1]:
        for _ in range(2):
            X -= L @ (L.T @ X)
    return X


def chebyshev_largest(apply, n, k, tol=1e-8, max_sweeps=80, rng=None, extra=None,
                      chunk=64, max_amplification=1e6, bounds=None, max_matvec=None, matrix=None):
    """Largest ``k`` eigenvalues of a symmetric operator (with multiplicity).

    ``matrix``, a sparse matrix equal to the operator, enables a faster filter.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    k = min(k, n)
    b = min(n, k + (extra if extra is not None else max(40, k // 5)))
    matvecs = 0
    if bounds is None:
        lower, upper, mv = spectral_interval(apply, n, rng)
        matvecs += mv
    else:
        lower, upper = bounds
    margin = 1e-2 * (upper - lower)

    def apply_cols(X):
        out = np.empty_like(X)
        for s in range(0, X.shape[1], chunk):
            out[:, s:s + chunk] = apply(X[:, s:s + chunk])
        return out

    X = rng.standard_normal((n, b))
    locked_vecs = np.zeros((n, 0))
    locked_vals, locked_res = [], []
    cut = 0.5 * (lower + upper)
    top = upper
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        deg = _degree(lower, cut, top, max_amplification)
        for s in range(0, X.shape[1], chunk):
            if matrix is None:
                X[:, s:s + chunk] = _chebyshev_filter(apply, X[:, s:s + chunk], deg, lower, cut, top)
            else:
                X[:, s:s + chunk] = _sparse_chebyshev_filter(matrix, X[:, s:s + chunk], deg,
                                                             lower, cut, top)
        matvecs += deg * X.shape[1]
        X = _project_out(X, locked_vecs)
        X /= np.maximum(np.linalg.norm(X, axis=0), 1e-300)
        # Rayleigh-Ritz in the Gram metric
        G = X.T @ X
        H = np.empty_like(G)
        for s in range(0, X.shape[1], chunk):
            H[:, s:s + chunk] = X.T @ apply(X[:, s:s + chunk])
        matvecs += X.shape[1]
        gs, U = np.linalg.eigh(0.5 * (G + G.T))
        keep = gs > gs[-1] * 1e-13
        W = U[:, keep] / np.sqrt(gs[keep])
        theta, S = np.linalg.eigh(W.T @ (0.5 * (H + H.T)) @ W)
        theta, S = theta[::-1], S[:, ::-1]
        X = X @ (W @ S)
        X /= np.linalg.norm(X, axis=0)
        need = k - len(locked_vals)
        m = min(need, X.shape[1])
        R = apply_cols(X[:, :m]) - X[:, :m] * theta[:m]
        matvecs += m
        res = np.linalg.norm(R, axis=0) / np.maximum(1.0, np.abs(theta[:m]))
        del R
        nconv = int(np.argmin(np.append(res <= tol, False)))
        if nconv:
            locked_vecs = np.hstack([locked_vecs, X[:, :nconv]])
            locked_vals.extend(theta[:nconv])
            locked_res.extend(res[:nconv])
            X, theta, res = X[:, nconv:], theta[nconv:], res[nconv:]
        if len(locked_vals) >= k:
            converged = True
            break
        if max_matvec is not None and matvecs >= max_matvec:
            break
        target = b - len(locked_vals)
        if X.shape[1] < target:
            fill = _project_out(rng.standard_normal((n, target - X.shape[1])), locked_vecs)
            X = np.hstack([X, fill])
        cut = theta[-1] if theta.size else cut
        top = min(upper, theta[0] + margin) if theta.size else upper
        if top <= cut:
            top = cut + margin
    if not converged:
        # report the best current approximations for the unlocked part
        need = k - len(locked_vals)
        locked_vals.extend(theta[:need])
        locked_res.extend(res[:need])
    vals = np.asarray(locked_vals)
    resid = np.asarray(locked_res)
    order = np.argsort(-vals, kind="stable")
    return FilteredResult(vals[order][:k], resid[order][:k], sweeps, matvecs, converged)
