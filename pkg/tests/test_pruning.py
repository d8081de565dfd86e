import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ersparse.errors import DomainError, ValidationError
from ersparse.graph_model import (EdgeProbabilityModel, SampledGraph, complete_graph, disjoint_union,
                                  empty_graph, sample_graph, star_graph)
from ersparse.pruning import (SUMMARY_COLUMNS, decomposition_spectrum_check, neighborhood,
                              overlap_statistic, residual_norm_check, star_decomposition,
                              threshold_for, write_summary)


def _adjacency_sets(g):
    nb = [set() for _ in range(g.n)]
    for i, j in g.edges.tolist():
        if i != j:
            nb[i].add(j)
            nb[j].add(i)
    return nb


def brute_force(g, t):
    """Star edges and overlaps straight from the set definitions."""
    nb = _adjacency_sets(g)
    V = {i for i in range(g.n) if g.degrees[i] >= t}

    def N(S):
        return set().union(*(nb[i] for i in S)) if S else set()

    star, overlap = set(), {}
    for i in V:
        others = N(V - {i})
        overlap[i] = len(nb[i] & (V | others))
        for j in nb[i]:
            if j not in V and j not in others:
                star.add((i, j))
    return star, overlap


def shared_leaf_graph():
    # centers 0 and 1, each with two private leaves, plus the shared leaf 4
    return SampledGraph.from_edges(7, [(0, 2), (0, 3), (1, 5), (1, 6), (0, 4), (1, 4)])


def test_neighborhood_examples():
    g = star_graph(5)
    assert neighborhood(g, []).size == 0
    assert neighborhood(g, [0]).tolist() == [1, 2, 3, 4, 5]
    assert neighborhood(complete_graph(4), [0]).tolist() == [1, 2, 3]
    with pytest.raises(ValidationError):
        neighborhood(g, [6])


def test_overlap_examples():
    assert overlap_statistic(star_graph(6), 3) == (0, {0: 0})
    joined = SampledGraph.from_edges(8, [(0, 1)] + [(0, j) for j in (2, 3, 4)]
                                     + [(1, j) for j in (5, 6, 7)])
    mx, per = overlap_statistic(joined, 4)
    assert mx >= 1 and per[0] >= 1 and per[1] >= 1
    assert overlap_statistic(shared_leaf_graph(), 3) == (1, {0: 1, 1: 1})
    with pytest.raises(DomainError):
        overlap_statistic(star_graph(3), 0)


def test_decomposition_examples():
    d = star_decomposition(star_graph(6), 3)
    assert len(d.star_edges) == 6 and len(d.residual_edges) == 0
    assert d.central_degrees == {0: 6} and d.removed_per_center == {0: 0}

    joined = SampledGraph.from_edges(8, [(0, 1)] + [(0, j) for j in (2, 3, 4)]
                                     + [(1, j) for j in (5, 6, 7)])
    d = star_decomposition(joined, 4)
    assert d.residual_edges.tolist() == [[0, 1]]
    assert d.central_degrees == {0: 3, 1: 3}

    d = star_decomposition(shared_leaf_graph(), 3)
    assert d.star_edges.tolist() == [[0, 2], [0, 3], [1, 5], [1, 6]]
    assert d.residual_edges.tolist() == [[0, 4], [1, 4]]
    assert d.removed_per_center == {0: 1, 1: 1}


def test_empty_center_set():
    g = sample_graph(EdgeProbabilityModel.homogeneous_mean_degree(100, 1.0), 0)
    d = star_decomposition(g, 1000)
    assert d.centers.size == 0 and d.star_edges.shape == (0, 2)
    assert np.array_equal(d.residual_edges, g.edges)
    chk = decomposition_spectrum_check(d)
    assert chk.closed_form.size == 0 and chk.discrepancy == 0.0


def _check_invariants(g, t):
    d = star_decomposition(g, t)
    all_edges = {tuple(e) for e in g.edges.tolist()}
    star = {tuple(sorted(e)) for e in d.star_edges.tolist()}
    resid = {tuple(e) for e in d.residual_edges.tolist()}
    assert star | resid == all_edges and not star & resid
    assert len(d.star_edges) + len(d.residual_edges) == g.num_edges
    centers = set(d.centers.tolist())
    leaves = d.star_edges[:, 1].tolist()
    assert all(c in centers for c in d.star_edges[:, 0].tolist())
    assert not centers & set(leaves)
    assert len(leaves) == len(set(leaves))
    res_deg = d.residual_graph().degrees
    for c in centers:
        assert d.central_degrees[c] <= g.degrees[c]
        assert res_deg[c] == g.degrees[c] - d.central_degrees[c] == d.removed_per_center[c]
    return d


@given(st.integers(2, 12), st.floats(0.05, 0.6), st.integers(0, 10**6), st.integers(1, 5))
@settings(max_examples=300, deadline=None)
def test_matches_brute_force_small_graphs(n, p, seed, t):
    g = sample_graph(EdgeProbabilityModel.homogeneous(n, p), seed)
    d = _check_invariants(g, t)
    star, overlap = brute_force(g, t)
    assert {tuple(e) for e in d.star_edges.tolist()} == star
    mx, per = overlap_statistic(g, t)
    assert per == overlap
    assert mx == (max(overlap.values()) if overlap else 0)


@given(st.integers(0, 10**6), st.floats(0.5, 4.0))
@settings(max_examples=30, deadline=None)
def test_invariants_on_sparse_graphs(seed, d):
    g = sample_graph(EdgeProbabilityModel.homogeneous_mean_degree(1500, d), seed)
    t = max(2, int(np.sort(g.degrees)[-30]))
    _check_invariants(g, t)


def test_spectrum_check_examples():
    chk = decomposition_spectrum_check(star_decomposition(star_graph(9), 5))
    assert np.allclose(chk.closed_form, [3, -3]) and chk.discrepancy <= 1e-10
    g = disjoint_union([star_graph(4), star_graph(9), star_graph(16)])
    chk = decomposition_spectrum_check(star_decomposition(g, 4))
    assert np.allclose(chk.closed_form, [4, 3, 2, -2, -3, -4])
    assert chk.discrepancy <= 1e-10


def test_spectrum_check_on_seeds():
    m = EdgeProbabilityModel.homogeneous_mean_degree(3000, 2.0)
    t = threshold_for(3000, 2.0)
    for s in range(20):
        chk = decomposition_spectrum_check(star_decomposition(sample_graph(m, s), t))
        assert chk.discrepancy <= 1e-10


def test_threshold_for():
    assert threshold_for(2000, 1.0) == 1
    assert threshold_for(10**5, 2.0, 0.5) == math.ceil(0.5 * math.log(1e5) / math.log(math.log(1e5) / 2))


def test_residual_norm_check():
    zero = EdgeProbabilityModel.homogeneous(20, 0.0)
    g = empty_graph(20)
    res = residual_norm_check(g, zero, star_decomposition(g, 1))
    assert res.norm == 0.0 and res.ratio == 0.0 and res.converged

    n, d = 2000, 1.0
    m = EdgeProbabilityModel.homogeneous_mean_degree(n, d)
    t = threshold_for(n, d)
    ratios = []
    for s in range(20):
        g = sample_graph(m, 3, s)
        dec = star_decomposition(g, t)
        r = residual_norm_check(g, m, dec, seed=s)
        assert r.converged and math.isfinite(r.ratio)
        removed = max(dec.removed_per_center.values(), default=0)
        assert r.d_prime <= max(t, removed)
        ratios.append(r.ratio)
    assert max(ratios) / min(ratios) <= 3.0
    with pytest.raises(ValueError):
        residual_norm_check(g, EdgeProbabilityModel.homogeneous(5, 0.1), dec)


def test_summary_csv():
    g = shared_leaf_graph()
    dec = star_decomposition(g, 3)
    _, per = overlap_statistic(g, 3)
    buf = io.StringIO()
    write_summary(dec.summary_rows(g.degrees, per), buf)
    assert buf.getvalue().splitlines() == [",".join(SUMMARY_COLUMNS), "0,3,2,1", "1,3,2,1"]
