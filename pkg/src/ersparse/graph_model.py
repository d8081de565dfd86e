"""Edge-probability models and reproducible sampling of inhomogeneous
Erdős–Rényi graphs.

A model is the symmetric matrix ``(p_ij)``; it comes in three flavours:

* ``homogeneous``: ``p_ij = p`` for every pair ``i != j``;
* ``sbm``: vertices are split into contiguous blocks and ``p_ij`` only
  depends on the blocks of ``i`` and ``j``;
* ``general``: an explicit dense matrix, allowed only for small ``n``.

Loops are off by default (``p_ii = 0``).  When they are enabled a loop adds
one to the degree and one to the diagonal adjacency entry.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, DomainError, ValidationError

DEFAULT_DENSE_LIMIT = 5000

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finaliser on a 64-bit integer."""
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replica_seed(seed: int, replica_index: int) -> int:
    """Seed of the random stream owned by one replica.

    Computed as ``splitmix64(splitmix64(seed) ^ replica_index)``.  Each replica
    depends only on ``(seed, replica_index)``, never on how many other
    replicas were drawn before it or on which worker drew it.
    """
    return splitmix64(splitmix64(seed & _MASK64) ^ (int(replica_index) & _MASK64))


def replica_rng(seed: int, replica_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(replica_seed(seed, replica_index)))


def _check_probability_array(a, what):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a < 0.0) or np.any(a > 1.0):
        raise ValidationError(f"{what}: probabilities must lie in [0, 1]")
    return a


@dataclass(frozen=True, eq=False)
class EdgeProbabilityModel:
    """Symmetric matrix of edge probabilities with cached degree summaries.

    Use :meth:`homogeneous`, :meth:`sbm`, :meth:`general` or
    :func:`build_model` rather than the raw constructor.
    """

    n: int
    kind: str
    p: float = 0.0
    block_sizes: tuple = ()
    block_matrix: np.ndarray | None = None
    matrix: np.ndarray | None = None
    allow_loops: bool = False
    mean_degrees: np.ndarray = field(init=False, repr=False)
    d: float = field(init=False)
    p_max: float = field(init=False)

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValidationError("n must be a positive integer")
        if self.kind == "homogeneous":
            _check_probability_array(self.p, "homogeneous p")
            n, p = self.n, float(self.p)
            di = (n - 1) * p + (p if self.allow_loops else 0.0)
            degrees = np.full(n, di)
            p_max = p if n >= 2 else 0.0
        elif self.kind == "sbm":
            sizes = np.asarray(self.block_sizes, dtype=np.int64)
            B = _check_probability_array(self.block_matrix, "block_matrix")
            if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 1):
                raise ValidationError("block sizes must be positive integers")
            if int(sizes.sum()) != self.n:
                raise ValidationError(f"block sizes sum to {int(sizes.sum())}, expected n={self.n}")
            if B.shape != (sizes.size, sizes.size):
                raise ValidationError("block_matrix shape does not match the number of blocks")
            if not np.array_equal(B, B.T):
                raise ValidationError("block_matrix is not symmetric")
            B = B.copy()
            B.setflags(write=False)
            object.__setattr__(self, "block_matrix", B)
            object.__setattr__(self, "block_sizes", tuple(int(s) for s in sizes))
            per_block = B @ sizes - (0.0 if self.allow_loops else np.diag(B))
            degrees = np.repeat(per_block, sizes)
            has_pairs = np.ones_like(B, dtype=bool)
            np.fill_diagonal(has_pairs, sizes >= 2)
            p_max = float(B[has_pairs].max()) if has_pairs.any() else 0.0
        elif self.kind == "general":
            P = _check_probability_array(self.matrix, "general matrix")
            if P.shape != (self.n, self.n):
                raise ValidationError("general matrix must be n x n")
            if not np.array_equal(P, P.T):
                raise ValidationError("general matrix is not symmetric")
            P = P.copy()
            if not self.allow_loops:
                np.fill_diagonal(P, 0.0)
            P.setflags(write=False)
            object.__setattr__(self, "matrix", P)
            degrees = P.sum(axis=1)
            off = P[~np.eye(self.n, dtype=bool)]
            p_max = float(off.max()) if off.size else 0.0
        else:
            raise ValidationError(f"unknown model kind {self.kind!r}")
        degrees = np.asarray(degrees, dtype=float)
        degrees.setflags(write=False)
        object.__setattr__(self, "mean_degrees", degrees)
        object.__setattr__(self, "d", float(degrees.max()))
        object.__setattr__(self, "p_max", float(p_max))

    # -- constructors -------------------------------------------------------

    @classmethod
    def homogeneous(cls, n, p, allow_loops=False):
        return cls(n=int(n), kind="homogeneous", p=float(p), allow_loops=allow_loops)

    @classmethod
    def homogeneous_mean_degree(cls, n, d, allow_loops=False):
        """Homogeneous model whose mean degree is exactly ``d``."""
        denom = n if allow_loops else n - 1
        return cls.homogeneous(n, d / denom if denom > 0 else 0.0, allow_loops)

    @classmethod
    def sbm(cls, block_sizes, block_matrix, allow_loops=False):
        sizes = tuple(int(s) for s in block_sizes)
        return cls(n=sum(sizes), kind="sbm", block_sizes=sizes,
                   block_matrix=np.asarray(block_matrix, dtype=float),
                   allow_loops=allow_loops)

    @classmethod
    def general(cls, matrix, allow_loops=False, dense_limit=DEFAULT_DENSE_LIMIT):
        P = np.asarray(matrix, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValidationError("general matrix must be square")
        if P.shape[0] > dense_limit:
            raise CapacityError(
                f"general model with n={P.shape[0]} exceeds the dense limit {dense_limit}")
        return cls(n=P.shape[0], kind="general", matrix=P, allow_loops=allow_loops)

    # -- accessors ----------------------------------------------------------

    @property
    def block_labels(self):
        """Block index of every vertex (sbm only)."""
        return np.repeat(np.arange(len(self.block_sizes)), self.block_sizes)

    @property
    def block_offsets(self):
        return np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(np.int64)

    @property
    def is_homogeneous_degree(self):
        """True when every vertex has the same mean degree ``d_i = d``."""
        return bool(np.allclose(self.mean_degrees, self.d, rtol=1e-12, atol=0.0))

    def loop_probabilities(self):
        if not self.allow_loops:
            return np.zeros(self.n)
        if self.kind == "homogeneous":
            return np.full(self.n, self.p)
        if self.kind == "sbm":
            return np.repeat(np.diag(self.block_matrix), self.block_sizes)
        return np.diag(self.matrix).copy()

    def prob(self, i, j):
        """Edge probability ``p(i, j)``; vectorised over array arguments."""
        i = np.asarray(i)
        j = np.asarray(j)
        if self.kind == "homogeneous":
            out = np.full(np.broadcast(i, j).shape, self.p)
        elif self.kind == "sbm":
            labels = self.block_labels
            out = self.block_matrix[labels[i], labels[j]]
        else:
            out = self.matrix[i, j]
        out = np.where(i == j, out if self.allow_loops else 0.0, out)
        return out[()] if np.ndim(out) == 0 else out

    def expectation_dense(self):
        """The full matrix ``E[A]`` (small ``n`` only)."""
        if self.n > DEFAULT_DENSE_LIMIT:
            raise CapacityError(f"n={self.n} exceeds the dense limit {DEFAULT_DENSE_LIMIT}")
        idx = np.arange(self.n)
        return np.asarray(self.prob(idx[:, None], idx[None, :]), dtype=float)


def build_model(params: Mapping) -> EdgeProbabilityModel:
    """Build a model from a plain description.

    Recognised keys: ``kind`` (homogeneous | sbm | general), ``n``, ``p`` or
    ``d`` (homogeneous), ``block_sizes`` and ``block_matrix`` (sbm),
    ``matrix`` and ``dense_limit`` (general), ``allow_loops``.
    """
    kind = params.get("kind", "homogeneous")
    loops = bool(params.get("allow_loops", False))
    if kind == "homogeneous":
        n = int(params["n"])
        if "p" in params:
            return EdgeProbabilityModel.homogeneous(n, params["p"], loops)
        return EdgeProbabilityModel.homogeneous_mean_degree(n, float(params["d"]), loops)
    if kind == "sbm":
        model = EdgeProbabilityModel.sbm(params["block_sizes"], params["block_matrix"], loops)
        if "n" in params and int(params["n"]) != model.n:
            raise ValidationError(f"block sizes sum to {model.n}, expected n={params['n']}")
        return model
    if kind == "general":
        return EdgeProbabilityModel.general(
            params["matrix"], loops, int(params.get("dense_limit", DEFAULT_DENSE_LIMIT)))
    raise ValidationError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class HypothesisCheck:
    kappa: float
    eta: float
    satisfied: bool
    violations: list


def check_hypotheses(model: EdgeProbabilityModel, kappa: float, eta: float) -> HypothesisCheck:
    """Check ``kappa <= d <= eta log n`` and ``p_max <= n^(-1+eta)``."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    if not 0 < eta < 1:
        raise DomainError("eta must lie in (0, 1)")
    n, d, p_max = model.n, model.d, model.p_max
    violations = []
    if d < kappa:
        violations.append(f"d < kappa (d={d:.6g}, kappa={kappa:.6g})")
    upper = eta * math.log(n) if n > 1 else 0.0
    if d > upper:
        violations.append(f"d > eta*log(n) (d={d:.6g}, eta*log(n)={upper:.6g})")
    cap = float(n) ** (-1.0 + eta)
    if p_max > cap:
        violations.append(f"p_max > n^(-1+eta) (p_max={p_max:.6g}, n^(-1+eta)={cap:.6g})")
    return HypothesisCheck(kappa, eta, not violations, violations)


@dataclass(frozen=True, eq=False)
class SampledGraph:
    """One realisation of the random graph.

    ``edges`` holds each edge once as a row ``(i, j)`` with ``i <= j``, sorted
    lexicographically; loops appear as ``(i, i)``.
    """

    n: int
    edges: np.ndarray
    seed: int = 0
    replica_index: int = 0
    adjacency: sp.csr_matrix = field(init=False, repr=False)
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = self.edges
        i, j = e[:, 0], e[:, 1]
        off = i != j
        rows = np.concatenate([i, j[off]])
        cols = np.concatenate([j, i[off]])
        A = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(self.n, self.n))
        A.sort_indices()
        degrees = np.diff(A.indptr).astype(np.int64)
        e.setflags(write=False)
        degrees.setflags(write=False)
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def from_edges(cls, n, edges, seed=0, replica_index=0):
        """Canonicalise an edge list; duplicates or bad vertices are errors."""
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValidationError("edge endpoint out of range")
        e = np.sort(e, axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        if len(e) > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            raise ValidationError("duplicate edge")
        return cls(int(n), e, int(seed), int(replica_index))

    @property
    def num_edges(self):
        return int(self.edges.shape[0])

    def neighbors(self, i):
        A = self.adjacency
        return A.indices[A.indptr[i]:A.indptr[i + 1]]


def _decode_triangle(keys, s):
    return keys // s, keys % s


def _distinct_cells(rng, m, N, draw, dense_decode):
    """Uniform random ``m``-subset of ``N`` cells.

    Sparse regime: iid draws with duplicates rejected in draw order, which is
    the sequential rejection sampler.  Dense regime: ``Generator.choice``.
    """
    if 4 * m >= N:
        return dense_decode(rng.choice(N, size=m, replace=False))
    keys = np.empty(0, dtype=np.int64)
    while keys.size < m:
        need = m - keys.size
        cand = np.concatenate([keys, draw(need + need // 8 + 16)])
        _, first = np.unique(cand, return_index=True)
        keys = cand[np.sort(first)]
    return keys[:m]


def _pairs_within(rng, s, prob):
    """Edges of ``G(s, prob)`` on local labels, without loops."""
    N = s * (s - 1) // 2
    if N == 0 or prob <= 0.0:
        return np.empty((0, 2), dtype=np.int64)
    m = int(rng.binomial(N, prob))
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)

    def draw(k):
        a = rng.integers(0, s, k)
        b = rng.integers(0, s - 1, k)
        b = b + (b >= a)
        return np.minimum(a, b) * s + np.maximum(a, b)

    def dense(idx):
        iu, ju = np.triu_indices(s, 1)
        return iu[idx] * s + ju[idx]

    keys = _distinct_cells(rng, m, N, draw, dense)
    return np.column_stack(_decode_triangle(keys, s))


def _pairs_between(rng, sa, sb, prob):
    N = sa * sb
    if N == 0 or prob <= 0.0:
        return np.empty((0, 2), dtype=np.int64)
    m = int(rng.binomial(N, prob))
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)

    def draw(k):
        return rng.integers(0, sa, k) * sb + rng.integers(0, sb, k)

    keys = _distinct_cells(rng, m, N, draw, lambda idx: idx.astype(np.int64))
    return np.column_stack((keys // sb, keys % sb))


def sample_graph(model: EdgeProbabilityModel, seed: int, replica_index: int = 0) -> SampledGraph:
    """Draw one graph; identical ``(model, seed, replica_index)`` give identical graphs.

    Homogeneous and block models draw a binomial edge count per block pair and
    then place that many distinct pairs uniformly, so the cost is
    ``O(n + #edges)``.  General models visit every pair.
    """
    rng = replica_rng(seed, replica_index)
    n = model.n
    parts = []
    if model.kind == "homogeneous":
        parts.append(_pairs_within(rng, n, model.p))
    elif model.kind == "sbm":
        offs = model.block_offsets
        sizes = model.block_sizes
        B = model.block_matrix
        for a in range(len(sizes)):
            for b in range(a, len(sizes)):
                if a == b:
                    e = _pairs_within(rng, sizes[a], B[a, a])
                    parts.append(e + offs[a])
                else:
                    e = _pairs_between(rng, sizes[a], sizes[b], B[a, b])
                    parts.append(e + np.array([offs[a], offs[b]]))
    else:
        P = model.matrix
        for i in range(n - 1):
            row = P[i, i + 1:]
            js = np.flatnonzero(rng.random(row.size) < row) + i + 1
            if js.size:
                parts.append(np.column_stack((np.full(js.size, i), js)))
    if model.allow_loops:
        loops = np.flatnonzero(rng.random(n) < model.loop_probabilities())
        parts.append(np.column_stack((loops, loops)))
    edges = np.concatenate(parts).astype(np.int64) if parts else np.empty((0, 2), np.int64)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return SampledGraph(n, edges, int(seed), int(replica_index))


def ordered_degrees(graph: SampledGraph) -> np.ndarray:
    """Degrees sorted in nonincreasing order."""
    return np.sort(graph.degrees)[::-1].copy()


def threshold_sets(graph: SampledGraph, t):
    """Vertices of degree ``>= t`` and of degree exactly ``t``."""
    if t < 0:
        raise DomainError("threshold must be nonnegative")
    deg = graph.degrees
    return np.flatnonzero(deg >= t), np.flatnonzero(deg == t)


# -- small named graphs ------------------------------------------------------

def empty_graph(n):
    return SampledGraph.from_edges(n, np.empty((0, 2), dtype=np.int64))


def complete_graph(n):
    i, j = np.triu_indices(n, 1)
    return SampledGraph.from_edges(n, np.column_stack((i, j)))


def path_graph(n):
    i = np.arange(n - 1)
    return SampledGraph.from_edges(n, np.column_stack((i, i + 1)))


def star_graph(D):
    """Star with center 0 and leaves 1..D."""
    leaves = np.arange(1, D + 1)
    return SampledGraph.from_edges(D + 1, np.column_stack((np.zeros(D, dtype=np.int64), leaves)))


def disjoint_union(graphs: Iterable[SampledGraph]) -> SampledGraph:
    graphs = list(graphs)
    offset = 0
    parts = []
    for g in graphs:
        parts.append(g.edges + offset)
        offset += g.n
    edges = np.concatenate(parts) if parts else np.empty((0, 2), np.int64)
    return SampledGraph.from_edges(offset, edges)


# -- edge-list text format ---------------------------------------------------

def write_edge_list(graph: SampledGraph, path):
    """Write ``# n=<n> seed=<seed> replica=<r>`` followed by one ``i j`` per line."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# n={graph.n} seed={graph.seed} replica={graph.replica_index}\n")
        for i, j in graph.edges:
            fh.write(f"{i} {j}\n")
    return path


def read_edge_list(path) -> SampledGraph:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if not header or header[0] != "#":
            raise ValidationError("missing edge-list header")
        meta = dict(item.split("=", 1) for item in header[1:])
        edges = np.loadtxt(fh, dtype=np.int64, ndmin=2)
    if edges.size == 0:
        edges = np.empty((0, 2), dtype=np.int64)
    return SampledGraph.from_edges(int(meta["n"]), edges, int(meta.get("seed", 0)),
                                   int(meta.get("replica", 0)))
