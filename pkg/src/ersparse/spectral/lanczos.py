"""Thick-restart Lanczos with full reorthogonalisation.

A single Krylov run from one start vector only ever sees one direction per
eigenspace, and adjacency matrices of sparse graphs have many exactly
repeated eigenvalues (identical small components, stars of equal degree).
:func:`lanczos_largest` therefore confirms each answer with fresh random
starts in the orthogonal complement of what it has already found, and keeps
going until such a run finds nothing above the current ``k``-th value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LanczosResult:
    values: np.ndarray      # nonincreasing
    vectors: np.ndarray     # n x len(values), orthonormal
    residuals: np.ndarray   # ||M x - theta x|| / max(1, |theta|)
    matvecs: int
    converged: bool


def _project_out(w, bases):
    for _ in range(2):
        for B in bases:
            if B.shape[1]:
                w -= B @ (B.T @ w)
    return w


def _random_unit(rng, n, bases):
    for _ in range(5):
        v = _project_out(rng.standard_normal(n), bases)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8 * np.sqrt(n):
            return v / nrm
    return None


def residual_norms(apply, values, vectors):
    if vectors.shape[1] == 0:
        return np.zeros(0)
    R = apply(vectors) - vectors * values[None, :]
    return np.linalg.norm(R, axis=0) / np.maximum(1.0, np.abs(values))


def lanczos_top(apply, n, k, tol, max_matvec, rng, locked=None, krylov_dim=None):
    """Largest ``k`` eigenpairs of ``apply`` on the complement of ``locked``."""
    locked = np.zeros((n, 0)) if locked is None else locked
    avail = n - locked.shape[1]
    k = min(k, avail)
    empty = LanczosResult(np.zeros(0), np.zeros((n, 0)), np.zeros(0), 0, True)
    if k <= 0:
        return empty
    m = min(avail, krylov_dim or max(4 * k, 60))
    V = np.zeros((n, m + 1))
    H = np.zeros((m + 1, m + 1))
    v0 = _random_unit(rng, n, [locked])
    if v0 is None:
        return empty
    V[:, 0] = v0
    j0 = 0
    matvecs = 0
    while True:
        mm = m
        beta = 0.0
        for j in range(j0, m):
            w = apply(V[:, j])
            matvecs += 1
            Vj = V[:, :j + 1]
            h = Vj.T @ w
            w -= Vj @ h
            h2 = Vj.T @ w
            w -= Vj @ h2
            h += h2
            if locked.shape[1]:
                w = _project_out(w, [locked])
            H[:j + 1, j] = h
            H[j, :j + 1] = h
            beta = np.linalg.norm(w)
            scale = max(1.0, np.abs(h).max())
            if j + 1 == avail:
                mm, beta = j + 1, 0.0
                break
            if beta <= 1e-12 * scale:
                # invariant subspace: continue with a fresh direction
                nxt = _random_unit(rng, n, [locked, V[:, :j + 1]])
                if nxt is None:
                    mm, beta = j + 1, 0.0
                    break
                V[:, j + 1] = nxt
                H[j + 1, j] = H[j, j + 1] = 0.0
                beta = 0.0
            else:
                V[:, j + 1] = w / beta
                H[j + 1, j] = H[j, j + 1] = beta
        T = H[:mm, :mm]
        theta, Y = np.linalg.eigh(0.5 * (T + T.T))
        theta, Y = theta[::-1], Y[:, ::-1]
        # coupling of the Ritz vectors to the next basis vector
        coupling = beta * Y[mm - 1, :] if mm < avail else np.zeros(mm)
        res = np.abs(coupling) / np.maximum(1.0, np.abs(theta))
        done = bool(np.all(res[:k] <= tol)) or mm >= avail
        if done or matvecs >= max_matvec:
            X = V[:, :mm] @ Y[:, :k]
            vals = theta[:k].copy()
            true_res = residual_norms(apply, vals, X)
            return LanczosResult(vals, X, true_res, matvecs + k,
                                 bool(done and np.all(true_res <= max(tol, 1e-13) * 10)))
        keep = min(mm - 1, max(k + 10, (mm + k) // 2))
        V[:, :keep] = V[:, :mm] @ Y[:, :keep]
        V[:, keep] = V[:, mm]
        V[:, keep + 1:] = 0.0
        H[:] = 0.0
        H[np.arange(keep), np.arange(keep)] = theta[:keep]
        H[keep, :keep] = H[:keep, keep] = coupling[:keep]
        j0 = keep


def lanczos_largest(apply, n, k, tol=1e-10, max_matvec=None, rng=None, krylov_dim=None):
    """Largest ``k`` eigenvalues counted with multiplicity.

    After the first run every further run starts from a random vector
    orthogonal to all eigenvectors found so far; any Ritz value it converges
    to above the current ``k``-th value is a missed copy and is merged in.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    k = min(k, n)
    if max_matvec is None:
        max_matvec = max(2000, 40 * max(4 * k, 60))
    first = lanczos_top(apply, n, k, tol, max_matvec, rng, krylov_dim=krylov_dim)
    vals, vecs, res = first.values, first.vectors, first.residuals
    matvecs, converged = first.matvecs, first.converged
    while converged and vecs.shape[1] < n and vals.size:
        fresh = lanczos_top(apply, n, k, tol, max_matvec, rng, locked=vecs,
                            krylov_dim=krylov_dim)
        matvecs += fresh.matvecs
        if fresh.values.size == 0:
            break
        if not fresh.converged:
            converged = False
            break
        kth = vals[min(k, vals.size) - 1]
        slack = 10 * tol * max(1.0, abs(kth))
        new = fresh.values > kth + slack
        if not new.any():
            break
        vals = np.concatenate([vals, fresh.values[new]])
        vecs = np.hstack([vecs, fresh.vectors[:, new]])
        res = np.concatenate([res, fresh.residuals[new]])
        order = np.argsort(-vals, kind="stable")
        vals, vecs, res = vals[order], vecs[:, order], res[order]
    return LanczosResult(vals[:k], vecs[:, :k], res[:k], matvecs, converged)
