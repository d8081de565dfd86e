"""Extreme eigenvalues of a :class:`SymmetricOperator` with residual certificates.

Routes (``method``):

``lanczos``     thick-restart Lanczos with full reorthogonalisation and
                fresh deflated restarts to recover multiplicities.
``block``       Chebyshev-filtered subspace iteration; used automatically
                when more than ``batch_size`` eigenvalues are requested on
                one side.
``components``  exact route for graph operators: dense spectra of the
                connected components, a secular equation for the rank-one
                centering of homogeneous models, and an iterative solver
                only for components above the dense limit.
``dense``       full dense eigendecomposition.
``auto``        ``components`` when the operator carries a graph and the
                structure allows it, otherwise ``lanczos`` or ``block``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from ..errors import CapacityError, DomainError
from .components import centered_homogeneous_extremes, component_spectra
from .filtered import chebyshev_largest
from .lanczos import lanczos_largest, residual_norms
from .operators import DENSE_SPECTRUM_LIMIT, SymmetricOperator

METHODS = ("auto", "lanczos", "block", "components", "dense")
COMPONENT_LIMIT = 4000
REPORT_COLUMNS = ["rank", "eigenvalue", "residual", "side"]


@dataclass
class SpectralReport:
    """Top values nonincreasing, bottom values nondecreasing.

    Residuals are ``||M v - lambda v|| / max(1, |lambda|)``.  ``iterations``
    counts operator applications (one per column of a block).
    """

    top_values: np.ndarray
    top_residuals: np.ndarray
    bottom_values: np.ndarray
    bottom_residuals: np.ndarray
    iterations: int
    converged: bool
    seed: int
    method: str
    tol: float

    @property
    def top(self):
        return list(zip(self.top_values.tolist(), self.top_residuals.tolist()))

    @property
    def bottom(self):
        return list(zip(self.bottom_values.tolist(), self.bottom_residuals.tolist()))

    def norm(self):
        """``max(lambda_1, -lambda_n)`` from the computed extremes."""
        cands = []
        if self.top_values.size:
            cands.append(self.top_values[0])
        if self.bottom_values.size:
            cands.append(-self.bottom_values[0])
        return float(max(cands)) if cands else 0.0

    def rows(self):
        out = [(i + 1, v, r, "top") for i, (v, r) in enumerate(self.top)]
        out += [(i + 1, v, r, "bottom") for i, (v, r) in enumerate(self.bottom)]
        return out

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for rank, v, r, side in self.rows():
            w.writerow([rank, f"{v:.12g}", f"{r:.3e}", side])


@dataclass
class _Side:
    values: np.ndarray
    residuals: np.ndarray
    matvecs: int
    converged: bool


def _empty_side():
    return _Side(np.zeros(0), np.zeros(0), 0, True)


def _iterative_top(apply, n, k, tol, max_iter, rng, batch_size, matrix=None):
    """Largest ``k`` eigenvalues of a symmetric map on ``R^n``.

    ``matrix`` is an optional sparse matrix equal to the map.
    """
    if k == 0:
        return _empty_side()
    if n <= 64:
        M = apply(np.eye(n))
        w, Q = np.linalg.eigh(0.5 * (M + M.T))
        w, Q = w[::-1][:k], Q[:, ::-1][:, :k]
        return _Side(w.copy(), residual_norms(apply, w, Q), n, True)
    if k <= batch_size:
        r = lanczos_largest(apply, n, k, tol=tol, max_matvec=max_iter, rng=rng)
        return _Side(r.values, r.residuals, r.matvecs, r.converged)
    r = chebyshev_largest(apply, n, k, tol=tol, rng=rng, max_matvec=max_iter, matrix=matrix,
                          chunk=64 if matrix is None else 32)
    return _Side(r.values, r.residuals, r.matvecs, r.converged)


def _dense_side(op, k, largest):
    M = op.to_dense()
    w, Q = np.linalg.eigh(0.5 * (M + M.T))
    if largest:
        w, Q = w[::-1], Q[:, ::-1]
    w, Q = w[:k].copy(), Q[:, :k]
    return _Side(w, residual_norms(op.apply, w, Q), op.dim, True)


def _merge(sides, k, largest):
    vals = np.concatenate([s.values for s in sides]) if sides else np.zeros(0)
    res = np.concatenate([s.residuals for s in sides]) if sides else np.zeros(0)
    order = np.argsort(-vals if largest else vals, kind="stable")[:k]
    return _Side(vals[order], res[order], sum(s.matvecs for s in sides),
                 all(s.converged for s in sides))


def _adjacency_components(op, num_top, num_bottom, tol, max_iter, seed, batch_size):
    graph = op.graph
    spec_small = component_spectra(graph, limit=COMPONENT_LIMIT)
    small = _Side(spec_small.values, spec_small.residuals, 0, True)
    tops, bots = [small], [small]
    A = graph.adjacency
    for c, verts in enumerate(spec_small.large):
        idx = np.sort(verts)
        sub = A[idx][:, idx].tocsr()
        # a bandwidth-reducing order makes the sparse products cache friendly
        perm = csgraph.reverse_cuthill_mckee(sub, symmetric_mode=True)
        sub = sub[perm][:, perm].tocsr()
        m = idx.size
        tops.append(_iterative_top(lambda v: sub @ v, m, min(num_top, m), tol, max_iter,
                                   np.random.default_rng([seed, 0, c]), batch_size, sub))
        neg = _iterative_top(lambda v: -(sub @ v), m, min(num_bottom, m), tol, max_iter,
                             np.random.default_rng([seed, 1, c]), batch_size, -sub)
        bots.append(_Side(-neg.values, neg.residuals, neg.matvecs, neg.converged))
    return _merge(tops, num_top, True), _merge(bots, num_bottom, False)


def _structured_route_available(op):
    if op.graph is None:
        return False
    if op.kind == "adjacency":
        return True
    return op.kind == "centered" and op.model is not None and op.model.kind == "homogeneous"


def extreme_eigenvalues(op: SymmetricOperator, num_top, num_bottom, tol=1e-10, max_iter=None,
                        start_seed=0, method="auto", batch_size=200) -> SpectralReport:
    """The ``num_top`` largest and ``num_bottom`` smallest eigenvalues of ``op``.

    ``max_iter`` bounds the operator applications of each iterative solve
    (``None`` uses the solver default).  Running out of budget is reported
    with ``converged=False``.  The result is a deterministic function of the
    operator, the arguments and ``start_seed``.
    """
    n = op.dim
    if num_top < 0 or num_bottom < 0 or num_top + num_bottom > n:
        raise ValueError(f"need 0 <= num_top + num_bottom <= dim={n}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "auto":
        method = "components" if _structured_route_available(op) else "lanczos"

    top = bot = None
    if method == "components":
        if not _structured_route_available(op):
            raise ValueError("the components route needs an adjacency operator or the "
                             "centered operator of a homogeneous model")
        if op.kind == "adjacency":
            top, bot = _adjacency_components(op, num_top, num_bottom, tol, max_iter,
                                             start_seed, batch_size)
        else:
            exact = centered_homogeneous_extremes(op.graph, op.model, num_top, num_bottom,
                                                  limit=COMPONENT_LIMIT)
            if exact is not None:
                tv, tr, bv, br = exact
                top, bot = _Side(tv, tr, 0, True), _Side(bv, br, 0, True)
            else:
                method = "lanczos"
    if method == "dense":
        if n > DENSE_SPECTRUM_LIMIT:
            raise CapacityError(f"dim={n} exceeds the dense limit {DENSE_SPECTRUM_LIMIT}")
        top = _dense_side(op, num_top, True)
        bot = _dense_side(op, num_bottom, False)
    if method in ("lanczos", "block"):
        cut = batch_size if method == "lanczos" else -1
        top = _iterative_top(op.apply, n, num_top, tol, max_iter,
                             np.random.default_rng([start_seed, 0]), cut)
        neg = _iterative_top(lambda v: -op.apply(v), n, num_bottom, tol, max_iter,
                             np.random.default_rng([start_seed, 1]), cut)
        bot = _Side(-neg.values, neg.residuals, neg.matvecs, neg.converged)

    converged = (top.converged and bot.converged
                 and bool(np.all(top.residuals <= tol)) and bool(np.all(bot.residuals <= tol)))
    return SpectralReport(top.values, top.residuals, bot.values, bot.residuals,
                          int(top.matvecs + bot.matvecs), converged, int(start_seed),
                          method, float(tol))
