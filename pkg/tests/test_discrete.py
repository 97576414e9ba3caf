import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from qgs.discrete import (Spectrum, cluster_multiplicities, eigenpairs, eigenvalues, normalized_laplacian,
                          rayleigh_quotient, subdivision_pairing, subdivision_spectrum_map, von_below_transform)
from qgs.generators import complete, cycle, path, random_weighted, star
from qgs.graphs import CombinatorialGraph, WeightedGraph


def oracle(W):
    """Generalized eigenproblem K f = lam M f straight from the edge list."""
    n = W.graph.n_vertices
    idx = W.graph.index
    K = np.zeros((n, n))
    for e, u, v in W.graph.edges:
        i, j = idx[u], idx[v]
        K[i, i] += W.mu[e]
        K[j, j] += W.mu[e]
        K[i, j] -= W.mu[e]
        K[j, i] -= W.mu[e]
    M = np.diag([W.m[v] for v in W.graph.vertices])
    return scipy.linalg.eigh(K, M, eigvals_only=True)


def k4(a):
    g = complete(4).graph
    return WeightedGraph(g, {v: (a if i == 0 else 1.0) for i, v in enumerate(g.vertices)},
                         {e: 1.0 for e in g.edge_map})


def test_single_edge():
    W = WeightedGraph.uniform(CombinatorialGraph.from_edges([("a", "b")]))
    assert np.allclose(eigenvalues(W).values, [0, 2], atol=1e-12)


@pytest.mark.parametrize("a", [1.0, 10.0, 100.0, 2.5])
def test_weighted_k4(a):
    vals = eigenvalues(k4(a)).values
    assert np.allclose(vals, sorted([0, (a + 3) / a, 4, 4]), atol=1e-10)


def test_path_and_cycle():
    assert np.allclose(eigenvalues(path(3).weighted()).values, [0, 1, 3], atol=1e-12)
    c4 = eigenvalues(cycle(4).weighted())
    assert np.allclose(c4.values, [0, 2, 2, 4], atol=1e-12)
    assert c4.multiplicities == [1, 2, 2, 1]
    assert c4.distinct() == [(pytest.approx(0, abs=1e-12), 1), (pytest.approx(2), 2), (pytest.approx(4), 1)]


@pytest.mark.parametrize("n", [3, 5, 8])
def test_normalized_star(n):
    vals = eigenvalues(normalized_laplacian(star(n).graph)).values
    assert np.allclose(vals, [0] + [1] * (n - 1) + [2], atol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_normalized_complete(n):
    vals = eigenvalues(normalized_laplacian(complete(n).graph)).values
    assert vals[1] == pytest.approx(n / (n - 1), rel=1e-12)


def test_normalized_single_edge_and_range():
    vals = eigenvalues(normalized_laplacian(path(2).graph)).values
    assert np.allclose(vals, [0, 2], atol=1e-12)


@given(st.integers(0, 10_000))
def test_matches_independent_oracle(seed):
    W = random_weighted(seed).weighted()
    s = eigenvalues(W)
    assert np.allclose(s.values, oracle(W), atol=1e-9)
    assert s.residual <= 1e-10
    assert s.values[0] == pytest.approx(0, abs=1e-10)
    assert np.all(np.diff(s.values) >= 0)


@given(st.integers(0, 10_000))
def test_normalized_spectrum_in_range(seed):
    inst = random_weighted(seed)
    vals = eigenvalues(normalized_laplacian(inst.graph, inst.mu)).values
    assert vals.min() >= -1e-12 and vals.max() <= 2 + 1e-12


@given(st.integers(0, 10_000))
def test_edge_orientation_does_not_matter(seed):
    W = random_weighted(seed).weighted()
    g2 = W.graph.with_reversed(list(W.graph.edge_map)[::2])
    W2 = WeightedGraph(g2, W.m, W.mu)
    assert np.allclose(eigenvalues(W).values, eigenvalues(W2).values, atol=1e-12)


def test_rayleigh_quotient():
    W = random_weighted(3).weighted()
    vals, vecs = eigenpairs(W)
    assert rayleigh_quotient(W, np.ones(W.graph.n_vertices)).energy == pytest.approx(0, abs=1e-14)
    q = rayleigh_quotient(W, vecs[:, 1])
    assert q.quotient == pytest.approx(vals[1], abs=1e-10)
    assert q.mean_residual() < 1e-10
    with pytest.raises(ValueError):
        rayleigh_quotient(W, np.zeros(W.graph.n_vertices))


def test_rayleigh_on_tetrahedral_packing():
    from qgs.packing import tetrahedral_packing
    W = complete(4).weighted()
    q = rayleigh_quotient(W, tetrahedral_packing().centers())
    lam2 = eigenvalues(W).lam(2)
    assert lam2 - 1e-12 <= q.quotient <= 8 * W.d_mu_max / W.total_mass


def test_maps():
    assert subdivision_spectrum_map(0) == 0
    assert subdivision_spectrum_map(1) == 2
    assert subdivision_spectrum_map(0.5) == 1.5
    assert von_below_transform(0) == 0
    assert von_below_transform(1) == pytest.approx(math.pi ** 2 / 4)
    for n in (3, 5, 9):
        assert von_below_transform(n / (n - 1)) == pytest.approx(math.acos(-1 / (n - 1)) ** 2)
    with pytest.raises(ValueError):
        von_below_transform(2.0)
    with pytest.raises(ValueError):
        subdivision_spectrum_map(2.5)


@given(st.floats(0, 2 - 1e-9))
def test_von_below_below_linear(lam):
    assert von_below_transform(lam) <= math.pi ** 2 / 2 * lam + 1e-12


@given(st.integers(0, 10_000))
def test_subdivision_pairing(seed):
    inst = random_weighted(seed)
    pair = subdivision_pairing(inst.graph, inst.mu)
    assert pair.max_error <= 1e-9


def test_subdivision_pairing_bipartite_skips():
    pair = subdivision_pairing(cycle(4).graph)  # eigenvalue 2 maps to lam' = 1
    assert pair.skipped_parent and pair.max_error <= 1e-9


def test_clusters_and_serialization():
    assert cluster_multiplicities([0, 1, 1 + 1e-12, 2]) == [1, 2, 2, 1]
    s = Spectrum(np.array([0.0, 2.0, 2.0]), "dense")
    d = s.to_dict()
    assert d["multiplicities"] == [1, 2, 2] and d["solver"] == "dense"
    assert s.to_csv().splitlines()[0] == "k,lambda"
    assert s.to_csv(with_solver=True).splitlines()[2] == "2,2,2,dense"
    assert s.lam(1) == 0.0
    with pytest.raises(IndexError):
        s.lam(4)
