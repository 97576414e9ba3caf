import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgs.discrete import eigenpairs, eigenvalues, normalized_laplacian, rayleigh_quotient, von_below_transform
from qgs.generators import binary_tree, complete, cycle, path, random_metric, star
from qgs.graphs import CombinatorialGraph, MetricGraph, subdivide_metric
from qgs.generators import random_connected
from qgs.metric import (HALF_PI2, compare_spectra, eigenvalues_equilateral, eigenvalues_fem, eigenvalues_metric,
                        eigenvalues_secular, embed_test_function, is_equilateral, secular_sigma_min)
from qgs.discrete import SpectrumError

PI2 = math.pi ** 2


def loop(L=1.0):
    g = CombinatorialGraph(("a",), (("e", "a", "a"),), allow_multi=True)
    return MetricGraph(g, {"e": L})


@pytest.mark.parametrize("L", [1.0, 2.0, math.pi])
def test_interval(L):
    s = eigenvalues_secular(path(2, total_length=L).metric(), 6)
    assert np.allclose(s.values, [(j * math.pi / L) ** 2 for j in range(6)], rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("L", [1.0, 2 * math.pi])
def test_loop(L):
    s = eigenvalues_secular(loop(L), 5)
    exact = [0] + [(2 * math.pi * j / L) ** 2 for j in (1, 1, 2, 2)]
    assert np.allclose(s.values, exact, rtol=1e-10, atol=1e-12)
    assert s.multiplicities[1:] == [2, 2, 2, 2]


def test_star3_first_root():
    s = eigenvalues_secular(star(3, 3.0).metric(), 4)
    assert np.allclose(s.values, [0, PI2 / 4, PI2 / 4, PI2], rtol=1e-10, atol=1e-12)
    assert s.multiplicities == [1, 2, 2, 1]


@pytest.mark.parametrize("n", [3, 5, 7])
@pytest.mark.parametrize("L", [1.0, 2.5])
def test_star_total_length(n, L):
    s = eigenvalues_secular(star(n, L).metric(), n + 1)
    lam2 = PI2 * n * n / (4 * L * L)
    assert s.values[1:n] == pytest.approx([lam2] * (n - 1), rel=1e-9)
    assert s.values[n] == pytest.approx(4 * lam2, rel=1e-9)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_complete_von_below(n):
    s = eigenvalues_secular(complete(n).metric(), 2)
    assert s.lam(2) == pytest.approx(math.acos(-1 / (n - 1)) ** 2, rel=1e-9)


def test_sigma_min_vanishes_at_roots():
    G = star(4, 4.0).metric()
    assert secular_sigma_min(G, math.pi / 2) < 1e-12
    assert secular_sigma_min(G, 1.0) > 1e-3


def test_fem_interval_and_loop():
    # P1 error is about lam h^2 / 12 with the default h = l_min / 16
    s = eigenvalues_fem(path(2, total_length=math.pi).metric(), 3)
    assert s.lam(2) == pytest.approx(1.0, rel=(math.pi / 16) ** 2 / 12 * 1.05)
    assert s.lam(2) >= 1.0
    s = eigenvalues_fem(loop(2 * math.pi), 3)
    assert s.lam(2) == pytest.approx(1.0, rel=(2 * math.pi / 16) ** 2 / 12 * 1.05) and s.lam(3) == pytest.approx(s.lam(2), rel=1e-12)


def test_fem_convergence_order():
    G = path(2, total_length=math.pi).metric()
    e1 = eigenvalues_fem(G, 3, h=math.pi / 32).lam(3) - 4
    e2 = eigenvalues_fem(G, 3, h=math.pi / 64).lam(3) - 4
    assert e1 > e2 > 0
    assert e1 / e2 == pytest.approx(4, rel=0.05)


def test_fem_rejects_coarse_mesh():
    with pytest.raises(ValueError):
        eigenvalues_fem(path(3).metric(), 2, h=0.5)


def test_fem_vs_secular_random_tree():
    rng = np.random.default_rng(11)
    g = CombinatorialGraph.from_edges([("a", "b"), ("b", "c"), ("b", "d"), ("d", "e"), ("d", "f")])
    G = MetricGraph(g, {e: float(x) for e, x in zip(g.edge_map, rng.uniform(0.5, 2, 5))})
    sec = eigenvalues_secular(G, 5)
    fem = eigenvalues_fem(G, 5, h=G.l_min / 64)
    assert np.all(fem.values >= sec.values - 1e-9)
    assert np.allclose(fem.values[1:], sec.values[1:], rtol=1e-4)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_subdivision_invariance(seed):
    G = random_metric(seed).metric()
    a = eigenvalues_secular(G, 6).values
    b = eigenvalues_secular(subdivide_metric(G, 2).graph, 6).values
    assert np.allclose(a, b, atol=1e-7)


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_equilateral_von_below(seed):
    inst = random_metric(seed, n_range=(3, 7), equilateral=True)
    G = inst.metric()
    norm = eigenvalues(normalized_laplacian(inst.graph)).values
    sec = eigenvalues_secular(G, G.graph.n_vertices + 2).values
    for lam in norm:
        if 1e-12 < lam < 2 - 1e-9:
            assert np.min(np.abs(sec - von_below_transform(lam))) <= 1e-8


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_orientation_invariance(seed):
    G = random_metric(seed).metric()
    G2 = G.with_reversed(list(G.graph.edge_map)[1::2])
    assert np.allclose(eigenvalues_secular(G, 4).values, eigenvalues_secular(G2, 4).values, atol=1e-9)


def test_embedding_constant_and_single_edge():
    G = random_metric(5).metric()
    J = embed_test_function(G, {v: 1.0 for v in G.graph.vertices})
    assert J.energy == pytest.approx(0, abs=1e-14) and J.norm2 == pytest.approx(G.total_length)
    e = path(2, total_length=0.7).metric()
    J = embed_test_function(e, {"v0": 1.0, "v1": -1.0})
    assert J.norm2 == pytest.approx(0.35) and J.energy == pytest.approx(PI2 / (2 * 0.7))


def _quad(fn, a, b, n=4001):
    x = np.linspace(a, b, n)
    y = fn(x)
    return float(np.sum((y[1:] + y[:-1]) / 2 * np.diff(x)))


@given(st.integers(0, 10_000))
def test_embedding_closed_forms_by_quadrature(seed):
    inst = random_metric(seed)
    G = inst.metric()
    rng = np.random.default_rng(seed)
    f = {v: complex(*rng.normal(size=2)) for v in G.graph.vertices}
    J = embed_test_function(G, f)
    norm = energy = 0.0
    for e, u, v in G.graph.edges:
        l = G.lengths[e]
        # f_i(x) = f(u) cos^2(pi x / 2l) + f(v) sin^2(pi x / 2l) on [0, l] up to orientation
        g = lambda x: f[u] * np.cos(math.pi * x / (2 * l)) ** 2 + f[v] * np.sin(math.pi * x / (2 * l)) ** 2
        dg = lambda x: (f[v] - f[u]) * math.pi / (2 * l) * np.sin(math.pi * x / l)
        norm += _quad(lambda x: np.abs(g(x)) ** 2, 0, l)
        energy += _quad(lambda x: np.abs(dg(x)) ** 2, 0, l)
    assert J.norm2 == pytest.approx(norm, rel=1e-6)
    assert J.energy == pytest.approx(energy, rel=1e-6)
    q = rayleigh_quotient(G.induced_weights(), [f[v] for v in G.graph.vertices])
    assert J.energy == pytest.approx(PI2 / 8 * q.energy, rel=1e-12)


def test_embedding_of_second_eigenvector():
    G = random_metric(8).metric()
    W = G.induced_weights()
    vals, vecs = eigenpairs(W)
    J = embed_test_function(G, dict(zip(W.graph.vertices, vecs[:, 1])))
    assert J.quotient <= HALF_PI2 * vals[1] + 1e-9


def test_compare_star_sharp():
    rep = compare_spectra(star(5).metric())
    assert rep.holds
    assert rep.rows[0].ratio is None
    sharp = [r.k for r in rep.rows if r.sharp]
    assert sharp == [6]


def test_compare_loop_and_tree():
    assert compare_spectra(loop(1.0)).holds
    assert compare_spectra(binary_tree(3, "dyadic").metric()).holds


# --- exact route on equilateral graphs -------------------------------------

@settings(max_examples=15)
@given(st.integers(3, 7), st.integers(0, 6), st.integers(0, 2 ** 31), st.floats(0.5, 2.0))
def test_equilateral_matches_secular(n, extra, seed, ell):
    g = random_connected(n, min(n - 1 + extra, n * (n - 1) // 2), np.random.default_rng(seed))
    G = MetricGraph.equilateral(g, ell)
    count = 2 * n + 4
    a = eigenvalues_equilateral(G, count).values
    b = eigenvalues_secular(G, count).values
    assert np.allclose(a, b, rtol=1e-9, atol=1e-10)


def test_equilateral_closed_forms():
    # C_6 of length 6: (2 pi j / 6)^2 twice each; K_4: arccos(-1/3)^2 three times
    c = eigenvalues_equilateral(cycle(6, total_length=6.0).metric(), 5).values
    assert np.allclose(c, [0] + [(math.pi / 3) ** 2] * 2 + [(2 * math.pi / 3) ** 2] * 2, rtol=1e-13)
    k = eigenvalues_equilateral(complete(4).metric(), 4).values
    assert np.allclose(k[1:], math.acos(-1 / 3) ** 2, rtol=1e-13)
    # interval: (j pi)^2, each simple
    p = eigenvalues_equilateral(path(2, total_length=1.0).metric(), 5).values
    assert np.allclose(p, [(j * math.pi) ** 2 for j in range(5)], rtol=1e-13)


def test_metric_dispatch():
    assert eigenvalues_metric(star(4, 1.0).metric(), 4).solver == "equilateral"
    G = random_metric(0, n_range=(5, 6)).metric()
    assert not is_equilateral(G)
    assert eigenvalues_metric(G, 3).solver == "secular"
    with pytest.raises(SpectrumError):
        eigenvalues_equilateral(G, 3)
    assert not is_equilateral(loop())
