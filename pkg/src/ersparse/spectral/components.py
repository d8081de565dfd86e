"""Exact extreme spectra through the connected components of a sparse graph.

Below the giant-component transition every component is small, so the
adjacency spectrum is the union of small dense spectra.  The centered
operator of a homogeneous model is a rank-one change of a block-diagonal
matrix,

    A - E[A] = (A + c I) - p 1 1^T,   c = p without loops, c = 0 with loops,

so its eigenvalues are the roots of a secular equation whose poles are the
component eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

EPS = np.finfo(float).eps
# entries per batched dense eigenproblem
_BATCH_ENTRIES = 4_000_000


@dataclass
class ComponentSpectra:
    """Spectra of all components up to ``limit`` vertices.

    ``values``, ``column_sums`` and ``residuals`` are flat and aligned: one
    entry per eigenpair of a small component.  ``large`` lists the vertex
    sets of components that were too big to diagonalise.
    """

    values: np.ndarray
    column_sums: np.ndarray
    residuals: np.ndarray
    large: list


def component_labels(graph):
    return csgraph.connected_components(graph.adjacency, directed=False)


def component_spectra(graph, limit=4000, shift=0.0) -> ComponentSpectra:
    """Diagonalise every component with at most ``limit`` vertices.

    Components of equal size are stacked and diagonalised in one batched call.
    The eigenvalues are those of ``A_c + shift I``.
    """
    ncomp, labels = component_labels(graph)
    sizes = np.bincount(labels, minlength=ncomp)
    order = np.argsort(labels, kind="stable")
    starts = np.concatenate([[0], np.cumsum(sizes)])
    local = np.empty(graph.n, dtype=np.int64)
    local[order] = np.arange(graph.n) - np.repeat(starts[:-1], sizes)

    edges = graph.edges
    ecomp = labels[edges[:, 0]]
    eorder = np.argsort(ecomp, kind="stable")
    edges, ecomp = edges[eorder], ecomp[eorder]
    ebounds = np.searchsorted(ecomp, np.arange(ncomp + 1))

    vals, sums, res = [], [], []
    large = []
    comp_by_size = np.argsort(sizes, kind="stable")
    size_sorted = sizes[comp_by_size]
    for s in np.unique(sizes):
        lo, hi = np.searchsorted(size_sorted, [s, s + 1])
        comps = comp_by_size[lo:hi]
        if s > limit:
            large.extend(order[starts[c]:starts[c + 1]].copy() for c in comps)
            continue
        per = max(1, _BATCH_ENTRIES // (s * s))
        for b in range(0, comps.size, per):
            chunk = comps[b:b + per]
            M = np.zeros((chunk.size, s, s))
            idx = _edge_indices(ebounds, chunk)
            pos = np.empty(ncomp, dtype=np.int64)
            pos[chunk] = np.arange(chunk.size)
            e = edges[idx]
            bi = pos[ecomp[idx]]
            li, lj = local[e[:, 0]], local[e[:, 1]]
            M[bi, li, lj] = 1.0
            M[bi, lj, li] = 1.0
            if shift:
                M[:, np.arange(s), np.arange(s)] += shift
            w, Q = np.linalg.eigh(M)
            R = M @ Q - Q * w[:, None, :]
            vals.append(w.ravel())
            sums.append(Q.sum(axis=1).ravel())
            res.append((np.linalg.norm(R, axis=1) / np.maximum(1.0, np.abs(w))).ravel())
    cat = lambda xs: np.concatenate(xs) if xs else np.zeros(0)
    return ComponentSpectra(cat(vals), cat(sums), cat(res), large)


def _edge_indices(ebounds, chunk):
    lo, hi = ebounds[chunk], ebounds[chunk + 1]
    counts = hi - lo
    return np.repeat(lo - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts) \
        + np.arange(counts.sum())


@dataclass
class SecularRoots:
    values: np.ndarray
    residuals: np.ndarray


def _secular_roots(poles, w, p, which):
    """Roots of ``1 - p sum_j w_j / (poles_j - mu)`` with index in ``which``.

    ``poles`` is strictly decreasing, ``w > 0``.  Root ``i`` lies in
    ``(poles[i+1], poles[i])``, the last one in ``(poles[-1] - p sum(w), poles[-1])``.
    Solved by vectorised bisection in ``tau = poles[i] - mu``, where the
    secular function is increasing and differences to the poles are formed
    without cancellation.
    """
    r = poles.size
    which = np.asarray(which, dtype=np.int64)
    if which.size == 0:
        return SecularRoots(np.zeros(0), np.zeros(0))
    total = w.sum()
    znorm = np.sqrt(total)
    out_mu = np.empty(which.size)
    out_res = np.empty(which.size)
    chunk = max(1, min(64, 4_000_000 // max(r, 1)))
    for s in range(0, which.size, chunk):
        idx = which[s:s + chunk]
        width = np.where(idx < r - 1, poles[idx] - poles[np.minimum(idx + 1, r - 1)],
                         p * total)
        lo = np.zeros(idx.size)
        hi = width.copy()
        diffs = poles[None, :] - poles[idx, None]
        scale = np.maximum(1.0, np.abs(poles[idx]))
        for _ in range(200):
            tau = 0.5 * (lo + hi)
            g = 1.0 - p * (w[None, :] / (diffs + tau[:, None])).sum(axis=1)
            neg = g < 0
            lo = np.where(neg, tau, lo)
            hi = np.where(neg, hi, tau)
            if np.all(hi - lo <= 4 * EPS * scale):
                break
        tau = 0.5 * (lo + hi)
        den = diffs + tau[:, None]
        g = 1.0 - p * (w[None, :] / den).sum(axis=1)
        unorm = np.sqrt((w[None, :] / den ** 2).sum(axis=1))
        mu = poles[idx] - tau
        out_mu[s:s + idx.size] = mu
        out_res[s:s + idx.size] = np.abs(g) * znorm / unorm / np.maximum(1.0, np.abs(mu))
    return SecularRoots(out_mu, out_res)


def rank_one_downdate_extremes(diag, z, p, num_top, num_bottom, base_residuals=None,
                               group_tol=1e-11, deflate_tol=1e-12):
    """Extreme eigenvalues of ``diag(diag) - p z z^T`` for ``p >= 0``.

    Returns ``(top_values, top_residuals, bottom_values, bottom_residuals)``
    with the top nonincreasing and the bottom nondecreasing.  Poles closer
    than ``group_tol`` (relative) are merged and entries of ``z`` below
    ``deflate_tol * ||z||`` are dropped; both perturb eigenvalues by at most
    that much.
    """
    n = diag.size
    base = np.zeros(n) if base_residuals is None else base_residuals
    order = np.argsort(-diag, kind="stable")
    D, zz, base = diag[order], z[order], base[order]
    znorm = np.linalg.norm(zz)
    if p == 0 or znorm == 0:
        return _split_extremes(D, base, np.zeros(0), np.zeros(0), num_top, num_bottom)
    small = np.abs(zz) <= deflate_tol * znorm
    kept = np.flatnonzero(~small)
    Dk = D[kept]
    # group consecutive nearly equal poles
    new_group = np.ones(kept.size, dtype=bool)
    new_group[1:] = (Dk[:-1] - Dk[1:]) > group_tol * np.maximum(1.0, np.abs(Dk[1:]))
    starts = np.flatnonzero(new_group)
    w = np.add.reduceat(zz[kept] ** 2, starts)
    poles = D[kept[starts]]
    # one member per group becomes a pole; the others stay eigenvalues
    stay = np.ones(n, dtype=bool)
    stay[kept[starts]] = False
    spread = np.zeros(n)
    gid = np.cumsum(new_group) - 1
    spread[kept] = np.abs(Dk - poles[gid])
    deflated_vals = D[stay]
    # dropped couplings perturb by at most p |z_j| ||z||; merged poles by their spread
    coupling = np.where(small, p * np.abs(zz) * znorm, 0.0)
    deflated_res = (base + spread + coupling)[stay] / np.maximum(1.0, np.abs(D[stay]))
    r = poles.size
    top_idx = np.arange(min(num_top, r))
    bot_idx = np.arange(max(0, r - num_bottom), r)
    roots = _secular_roots(poles, w, p, np.union1d(top_idx, bot_idx))
    return _split_extremes(deflated_vals, deflated_res, roots.values, roots.residuals,
                           num_top, num_bottom)


def _split_extremes(vals_a, res_a, vals_b, res_b, num_top, num_bottom):
    vals = np.concatenate([vals_a, vals_b])
    res = np.concatenate([res_a, res_b])
    order = np.argsort(-vals, kind="stable")
    vals, res = vals[order], res[order]
    nb = min(num_bottom, vals.size)
    return (vals[:num_top].copy(), res[:num_top].copy(),
            vals[vals.size - nb:][::-1].copy(), res[vals.size - nb:][::-1].copy())


def centered_homogeneous_extremes(graph, model, num_top, num_bottom, limit=4000):
    """Extreme eigenvalues of ``A - E[A]`` for a homogeneous model.

    Returns ``None`` when some component exceeds ``limit`` vertices.
    """
    shift = 0.0 if model.allow_loops else model.p
    spectra = component_spectra(graph, limit=limit, shift=shift)
    if spectra.large:
        return None
    return rank_one_downdate_extremes(spectra.values, spectra.column_sums, model.p,
                                      num_top, num_bottom, spectra.residuals)
