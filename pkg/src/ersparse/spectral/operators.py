"""Matrix-free symmetric operators for ``A``, ``E[A]`` and ``A - E[A]``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError, DomainError
from ..graph_model import EdgeProbabilityModel, SampledGraph

DENSE_SPECTRUM_LIMIT = 2000


class SymmetricOperator:
    """A symmetric linear map ``v -> M v`` on ``R^dim``.

    ``apply`` accepts a vector of length ``dim`` or a ``dim x b`` block and
    returns a new array.  ``kind`` is one of ``adjacency``, ``expectation``,
    ``centered`` or ``dense``; ``graph``, ``model`` and ``matrix`` keep the
    objects the operator was built from so solvers can exploit structure.
    """

    def __init__(self, dim, kind, matvec, graph=None, model=None, matrix=None):
        self.dim = int(dim)
        self.kind = kind
        self._matvec = matvec
        self.graph = graph
        self.model = model
        self.matrix = matrix

    def __repr__(self):
        return f"SymmetricOperator(kind={self.kind!r}, dim={self.dim})"

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.dim:
            raise ValueError(f"vector of length {v.shape[0]} for operator of dim {self.dim}")
        return self._matvec(v)

    __matmul__ = apply

    def to_dense(self, chunk=256):
        """Materialise the matrix column block by column block."""
        if self.matrix is not None:
            return np.array(self.matrix, dtype=float)
        out = np.empty((self.dim, self.dim))
        for s in range(0, self.dim, chunk):
            e = min(s + chunk, self.dim)
            block = np.zeros((self.dim, e - s))
            block[np.arange(s, e), np.arange(e - s)] = 1.0
            out[:, s:e] = self.apply(block)
        return out

    def negated(self):
        return SymmetricOperator(self.dim, self.kind, lambda v: -self._matvec(v),
                                 self.graph, self.model,
                                 None if self.matrix is None else -self.matrix)


def adjacency_operator(graph: SampledGraph) -> SymmetricOperator:
    A = graph.adjacency
    return SymmetricOperator(graph.n, "adjacency", lambda v: A @ v, graph=graph)


def _expectation_matvec(model: EdgeProbabilityModel):
    loops = model.allow_loops
    if model.kind == "homogeneous":
        p = model.p

        def mv(v):
            s = v.sum(axis=0)
            return p * (s - v) if not loops else p * np.broadcast_to(s, v.shape).copy()
        return mv
    if model.kind == "sbm":
        B = model.block_matrix
        offsets = model.block_offsets[:-1]
        labels = model.block_labels
        diag = np.diag(B)[labels]

        def mv(v):
            sums = np.add.reduceat(v, offsets, axis=0)
            out = (B @ sums)[labels]
            if not loops:
                out -= diag[:, None] * v if v.ndim == 2 else diag * v
            return out
        return mv
    P = model.matrix
    return lambda v: P @ v


def expectation_operator(model: EdgeProbabilityModel) -> SymmetricOperator:
    """``E[A]``: O(n) for homogeneous models, O(n + blocks^2) for block models."""
    return SymmetricOperator(model.n, "expectation", _expectation_matvec(model), model=model)


def centered_operator(graph: SampledGraph, model: EdgeProbabilityModel) -> SymmetricOperator:
    """``A - E[A]`` without forming either matrix."""
    if graph.n != model.n:
        raise ValueError(f"graph has {graph.n} vertices but model has {model.n}")
    A = graph.adjacency
    ev = _expectation_matvec(model)
    return SymmetricOperator(graph.n, "centered", lambda v: A @ v - ev(v),
                             graph=graph, model=model)


def dense_operator(matrix) -> SymmetricOperator:
    M = np.array(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(M, M.T, rtol=0, atol=1e-14 * max(1.0, np.abs(M).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    M.setflags(write=False)
    return SymmetricOperator(M.shape[0], "dense", lambda v: M @ v, matrix=M)


def dense_spectrum(op: SymmetricOperator, limit=DENSE_SPECTRUM_LIMIT):
    """All eigenvalues, nonincreasing, through a dense symmetric eigensolver."""
    if op.dim > limit:
        raise CapacityError(f"dim={op.dim} exceeds the dense limit {limit}")
    M = op.to_dense()
    M = 0.5 * (M + M.T)
    return np.linalg.eigvalsh(M)[::-1].copy()


def spectral_norm(eigenvalues):
    """``max(lambda_1, -lambda_n)`` of a spectrum."""
    ev = np.asarray(eigenvalues)
    return float(max(ev.max(), -ev.min())) if ev.size else 0.0


@dataclass(frozen=True)
class StarSpectrum:
    D: int
    nonzero: tuple
    zero_multiplicity: int

    def eigenvector(self, sign=1):
        """``(sign sqrt(D), 1, ..., 1)`` with the center first."""
        v = np.ones(self.D + 1)
        v[0] = sign * math.sqrt(self.D)
        return v


def star_spectrum(D) -> StarSpectrum:
    """Adjacency spectrum of the star with ``D`` leaves: ``+-sqrt(D)`` and ``D - 1`` zeros."""
    if D < 1 or int(D) != D:
        raise DomainError("star needs an integer D >= 1")
    r = math.sqrt(D)
    return StarSpectrum(int(D), (r, -r), int(D) - 1)


def sbm_expectation_eigenvalues(model: EdgeProbabilityModel):
    """Eigenvalues of ``E[A]`` on block-constant vectors, nonincreasing.

    They are the eigenvalues of ``S^(1/2) B S^(1/2) - diag(B_aa)`` with ``S``
    the diagonal of block sizes (the diagonal term is absent with loops).
    The rest of the spectrum is ``-B_aa`` with multiplicity ``s_a - 1``.
    """
    if model.kind == "homogeneous":
        B = np.array([[model.p]])
        sizes = np.array([model.n])
    elif model.kind == "sbm":
        B = model.block_matrix
        sizes = np.asarray(model.block_sizes, dtype=float)
    else:
        raise ValueError("block eigenvalues need a homogeneous or block model")
    r = np.sqrt(sizes)
    Q = r[:, None] * B * r[None, :]
    if not model.allow_loops:
        Q = Q - np.diag(np.diag(B))
    return np.linalg.eigvalsh(Q)[::-1].copy()
