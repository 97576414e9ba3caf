import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qgs.generators import binary_tree, complete, cycle, path, random_metric, random_planar, star
from qgs.graphs import (CombinatorialGraph, GraphError, MetricGraph, PlanarEmbedding, WeightedGraph,
                        betti_parts, betti_subdivision, betti_threshold, check_metric_condition,
                        check_vertex_weight_condition, embedding_from_walks, simplify_metric,
                        subdivide_combinatorial, subdivide_metric)


def loop(L=1.0):
    g = CombinatorialGraph(("a",), (("e", "a", "a"),), allow_multi=True)
    return MetricGraph(g, {"e": L})


def test_vertices_sorted_and_ids_checked():
    g = CombinatorialGraph(("b", "a", "c"), (("x", "a", "b"), ("y", "b", "c")))
    assert g.vertices == ("a", "b", "c")
    with pytest.raises(GraphError):
        CombinatorialGraph(("a", "a"), ())
    with pytest.raises(GraphError):
        CombinatorialGraph(("a", "b"), (("", "a", "b"),))


def test_rejects_disconnected_loops_parallel():
    with pytest.raises(GraphError, match="not connected"):
        CombinatorialGraph(("a", "b", "c"), (("e", "a", "b"),))
    with pytest.raises(GraphError, match="loop"):
        CombinatorialGraph(("a",), (("e", "a", "a"),))
    with pytest.raises(GraphError, match="parallel"):
        CombinatorialGraph(("a", "b"), (("e", "a", "b"), ("f", "b", "a")))
    with pytest.raises(GraphError, match="unknown endpoint"):
        CombinatorialGraph(("a", "b"), (("e", "a", "z"),))


def test_weights_must_be_positive():
    g = path(3).graph
    with pytest.raises(GraphError):
        WeightedGraph(g, {v: 1.0 for v in g.vertices}, {e: 0.0 for e in g.edge_map})
    with pytest.raises(GraphError):
        MetricGraph(g, {e: -1.0 for e in g.edge_map})
    with pytest.raises(GraphError):
        MetricGraph(g, {e: math.inf for e in g.edge_map})


def test_loop_degrees_count_twice():
    G = loop(2.0)
    assert G.graph.degree("a") == 2
    assert G.deg_inv("a") == pytest.approx(1.0)
    assert G.betti == 1 and not G.is_simple


def test_degree_quantities_of_star():
    G = star(3, total_length=3.0).metric()
    assert G.deg_len("c") == 3 and G.d_len_max == 3
    assert G.d_inv_max == 3 and G.total_length == 3
    W = G.induced_weights()
    assert W.m["c"] == 3 and W.mu[G.graph.edges[0][0]] == 1


def test_subdivide_loop_into_cycle():
    sub = subdivide_metric(loop(1.0), 4).graph
    assert sub.graph.n_vertices == 4 and sub.graph.n_edges == 4
    assert sub.graph.is_simple
    assert all(x == 0.25 for x in sub.lengths.values())
    assert sub.total_length == pytest.approx(1.0)


def test_subdivide_star_degree_quarter():
    G = star(3, total_length=3.0).metric()
    sub = subdivide_metric(G, 4).graph
    assert sub.graph.n_edges == 12
    assert all(x == 0.25 for x in sub.lengths.values())
    assert sub.deg_len("c") == pytest.approx(G.deg_len("c") / 4)


def test_subdivide_names_and_single_edge():
    G = path(2, total_length=2.0).metric()
    sub = subdivide_metric(G, 2)
    assert sub.new_vertices == ("e0@1",)
    assert sorted(sub.graph.lengths) == ["e0/0", "e0/1"]
    assert set(sub.graph.lengths.values()) == {1.0}
    with pytest.raises(GraphError):
        subdivide_metric(G, 0)


def test_simplify_loop_and_parallel():
    S = simplify_metric(loop(3.0))
    assert S.graph.is_simple and S.graph.n_edges == 3
    g = CombinatorialGraph(("a", "b"), (("e", "a", "b"), ("f", "a", "b")), allow_multi=True)
    S = simplify_metric(MetricGraph(g, {"e": 1.0, "f": 2.0}))
    assert S.graph.is_simple and S.total_length == pytest.approx(3.0)


def test_combinatorial_subdivision_examples():
    g = CombinatorialGraph.from_edges([("u", "v")])
    W = WeightedGraph(g, {"u": 1.0, "v": 1.0}, {"e0": 3.0})
    S = subdivide_combinatorial(W)
    assert S.graph.n_vertices == 3 and set(S.mu.values()) == {3.0}
    K4 = complete(4).weighted()
    S = subdivide_combinatorial(K4)
    assert (S.graph.n_vertices, S.graph.n_edges) == (10, 12)
    assert set(S.mu.values()) == {1.0}
    tri = cycle(3).graph
    om = dict(zip(tri.edge_map, (1.0, 2.0, 3.0)))
    S = subdivide_combinatorial(WeightedGraph(tri, {v: 1.0 for v in tri.vertices}, om))
    assert S.graph.n_edges == 6 and S.graph.betti == 1
    assert sorted(S.mu.values()) == [1, 1, 2, 2, 3, 3]


def test_betti_parts_loop():
    G = loop(1.0)
    assert betti_threshold(G) == 1
    parts = betti_parts(G, 4)
    assert parts == {"e": 5}
    sub = betti_subdivision(G, 4).graph
    assert all(Fraction(1, 8) <= Fraction(x).limit_denominator(100) < Fraction(1, 4) for x in sub.lengths.values())


def test_betti_parts_equilateral():
    G = complete(4).metric()  # |E| = 6, beta = 3
    k = G.graph.n_edges - G.betti + 1
    assert set(betti_parts(G, k).values()) == {2}
    with pytest.raises(GraphError, match="threshold"):
        betti_parts(G, k - 1)


@given(st.integers(0, 10_000), st.integers(0, 6))
def test_betti_subdivision_lengths_in_range(seed, extra):
    G = random_metric(seed).metric()
    k = math.ceil(betti_threshold(G)) + extra
    sub = betti_subdivision(G, k).graph
    n = k + G.betti - 1
    L = G.total_length
    assert sub.total_length == pytest.approx(L)
    for x in sub.lengths.values():
        assert L / (2 * n) * (1 - 1e-12) <= x < L / n


def test_vertex_weight_condition():
    K4 = complete(4).weighted()
    assert len(check_vertex_weight_condition(K4)) == 6
    assert check_vertex_weight_condition(cycle(6).weighted()) == []
    g = K4.graph
    m = {v: (5.0 if v == g.vertices[0] else 1.0) for v in g.vertices}
    bad = check_vertex_weight_condition(WeightedGraph(g, m, K4.mu))
    assert set(bad) == set(g.incidence[g.vertices[0]])


def test_metric_condition():
    assert check_metric_condition(cycle(6).metric()) == []
    assert check_metric_condition(path(2).metric()) == [("v0", "v1")]
    S3 = star(3, total_length=3.0).metric()
    assert len(check_metric_condition(S3)) == 3


def test_embeddings_of_generators_are_euler_valid():
    for inst in (star(5), cycle(6), path(4), complete(4), binary_tree(3), random_planar(20, 7)):
        emb = inst.embedding
        emb.validate(inst.graph)
        assert emb.genus == 0 and emb.is_oriented()
        assert inst.graph.n_vertices - inst.graph.n_edges + len(emb.faces) == 2


def test_embedding_validation_errors():
    g = cycle(4).graph
    es = list(g.edge_map)
    with pytest.raises(GraphError):
        PlanarEmbedding(0, ((es[0], es[1], es[2], es[3]),)).validate(g)
    with pytest.raises(GraphError):
        PlanarEmbedding(-1)
    with pytest.raises(GraphError, match="Euler"):
        PlanarEmbedding(1, ((es[0], es[1], es[2], es[3]), tuple("-" + e for e in reversed(es)))).validate(g)


def test_embedding_from_walks_roundtrip():
    inst = cycle(5)
    walks = inst.embedding.vertex_walks(inst.graph)
    emb = embedding_from_walks(inst.graph, walks)
    emb.validate(inst.graph)
    assert len(emb.faces) == 2


def test_complete_graph_genus_metadata():
    for n, g in ((4, 0), (5, 1), (6, 1), (7, 1), (8, 2)):
        inst = complete(n)
        assert inst.params["genus"] == g == inst.embedding.genus


@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_subdivision_conserves_length(seed, p):
    G = random_metric(seed).metric()
    sub = subdivide_metric(G, p).graph
    assert sub.total_length == pytest.approx(G.total_length, rel=1e-14)
    assert sub.betti == G.betti
    assert sub.graph.n_edges == p * G.graph.n_edges
