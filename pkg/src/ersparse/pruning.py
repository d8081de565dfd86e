"""Star decomposition of a sparse graph around its high-degree vertices.

For a threshold ``t`` let ``V`` be the set of vertices of degree ``>= t``.
An edge ``{i, j}`` is a star edge when ``i`` is in ``V`` and ``j`` is
neither in ``V`` nor adjacent to another vertex of ``V``.  Star edges form
vertex-disjoint stars, one per center, whose adjacency spectrum is known
in closed form; all other edges form the residual graph.

Membership of ``j`` in ``N(V \\ {i})`` for a neighbour ``j`` of ``i`` is
decided with one count per vertex, ``cnt[j] = #(neighbours of j in V)``:
it holds exactly when ``cnt[j] >= 2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .graph_model import EdgeProbabilityModel, SampledGraph
from .spectral import centered_operator, extreme_eigenvalues
from .spectral.components import component_spectra
from .theory import TheoryPredictor

SUMMARY_COLUMNS = ["center", "degree", "star_degree", "overlap"]


def _vertex_array(graph, S):
    S = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64))
    if S.size and (S[0] < 0 or S[-1] >= graph.n):
        raise ValidationError("vertex out of range")
    return S


def neighborhood(graph: SampledGraph, S) -> np.ndarray:
    """Sorted array of vertices adjacent to some vertex of ``S``."""
    S = _vertex_array(graph, S)
    A = graph.adjacency
    if S.size == 0:
        return np.zeros(0, dtype=np.int64)
    parts = [A.indices[A.indptr[i]:A.indptr[i + 1]] for i in S]
    return np.unique(np.concatenate(parts)).astype(np.int64)


def _membership(graph, t):
    if t < 1:
        raise DomainError("threshold must be at least 1")
    in_v = graph.degrees >= t
    cnt = np.rint(graph.adjacency @ in_v.astype(float)).astype(np.int64)
    return in_v, cnt


def overlap_statistic(graph: SampledGraph, t):
    """``(max_overlap, {center: overlap})``.

    The overlap of a center ``i`` counts its neighbours lying in
    ``V ∪ N(V \\ {i})``.
    """
    in_v, cnt = _membership(graph, t)
    A = graph.adjacency
    per = {}
    for i in np.flatnonzero(in_v):
        nb = A.indices[A.indptr[i]:A.indptr[i + 1]]
        per[int(i)] = int(np.count_nonzero(in_v[nb] | (cnt[nb] >= 2)))
    return (max(per.values()) if per else 0), per


@dataclass
class StarDecomposition:
    n: int
    threshold: int
    centers: np.ndarray
    star_edges: np.ndarray        # rows (center, leaf)
    residual_edges: np.ndarray    # canonical rows (i <= j)
    central_degrees: dict
    removed_per_center: dict

    def star_graph(self) -> SampledGraph:
        return SampledGraph.from_edges(self.n, self.star_edges)

    def residual_graph(self) -> SampledGraph:
        return SampledGraph.from_edges(self.n, self.residual_edges)

    def summary_rows(self, degrees, overlaps):
        return [(int(c), int(degrees[c]), self.central_degrees[int(c)], overlaps[int(c)])
                for c in self.centers]


def star_decomposition(graph: SampledGraph, t) -> StarDecomposition:
    in_v, cnt = _membership(graph, t)
    e = graph.edges
    a, b = e[:, 0], e[:, 1]
    a_center = in_v[a] & ~in_v[b] & (cnt[b] == 1)
    b_center = in_v[b] & ~in_v[a] & (cnt[a] == 1)
    star = a_center | b_center
    centers_col = np.where(a_center, a, b)[star]
    leaves_col = np.where(a_center, b, a)[star]
    star_edges = np.column_stack([centers_col, leaves_col]).astype(np.int64)
    star_edges = star_edges[np.lexsort((star_edges[:, 1], star_edges[:, 0]))]
    centers = np.flatnonzero(in_v)
    counts = np.bincount(star_edges[:, 0], minlength=graph.n)
    central = {int(i): int(counts[i]) for i in centers}
    removed = {int(i): int(graph.degrees[i] - counts[i]) for i in centers}
    return StarDecomposition(graph.n, int(t), centers, star_edges, e[~star].copy(),
                             central, removed)


def threshold_for(n, d, delta=0.25):
    """``ceil(delta * L_1)``, the default pruning threshold."""
    return max(1, math.ceil(delta * TheoryPredictor(n, d).l_k(1)))


@dataclass
class StarSpectrumCheck:
    closed_form: np.ndarray       # nonincreasing
    numerical: np.ndarray         # nonincreasing
    discrepancy: float


def decomposition_spectrum_check(decomp: StarDecomposition, zero_tol=1e-8) -> StarSpectrumCheck:
    """Nonzero spectrum of the star part, in closed form and numerically."""
    roots = np.sqrt(np.array([v for v in decomp.central_degrees.values() if v > 0], dtype=float))
    closed = np.sort(np.concatenate([roots, -roots]))[::-1]
    spectra = component_spectra(decomp.star_graph(), limit=decomp.n)
    vals = spectra.values
    numerical = np.sort(vals[np.abs(vals) > zero_tol])[::-1]
    if numerical.size != closed.size:
        gap = math.inf
    else:
        gap = float(np.abs(numerical - closed).max()) if closed.size else 0.0
    return StarSpectrumCheck(closed, numerical, gap)


@dataclass
class ResidualNormCheck:
    norm: float
    bound_shape: float
    ratio: float
    d_prime: int
    converged: bool


def residual_norm_check(graph: SampledGraph, model: EdgeProbabilityModel,
                        decomp: StarDecomposition, tol=1e-10, seed=0) -> ResidualNormCheck:
    """``||A' - E[A]||`` against ``sqrt(n p_max) + sqrt(d')``.

    ``A'`` is the residual adjacency and ``d'`` its largest row sum.
    """
    if graph.n != model.n:
        raise ValueError(f"graph has {graph.n} vertices but model has {model.n}")
    residual = decomp.residual_graph()
    op = centered_operator(residual, model)
    rep = extreme_eigenvalues(op, 1, 1, tol=tol, start_seed=seed)
    norm = rep.norm()
    d_prime = int(residual.degrees.max()) if residual.n else 0
    shape = math.sqrt(model.n * model.p_max) + math.sqrt(d_prime)
    if shape > 0:
        ratio = norm / shape
    else:
        ratio = 0.0 if norm == 0 else math.inf
    return ResidualNormCheck(norm, shape, ratio, d_prime, rep.converged)


def write_summary(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    w.writerows(rows)
