"""Graph families used in the experiments. All generators are deterministic in
their arguments (random ones through ``numpy.random.default_rng(seed)``)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from .graphs import (CombinatorialGraph, GraphError, MetricGraph, PlanarEmbedding, WeightedGraph,
                     embedding_from_positions)


@dataclass
class Instance:
    name: str
    graph: CombinatorialGraph
    lengths: dict | None = None
    m: dict | None = None
    mu: dict | None = None
    embedding: PlanarEmbedding | None = None
    pos: dict | None = None
    params: dict = field(default_factory=dict)

    def metric(self) -> MetricGraph:
        lengths = self.lengths or {e: 1.0 for e in self.graph.edge_map}
        return MetricGraph(self.graph, lengths)

    def weighted(self) -> WeightedGraph:
        m = self.m or {v: 1.0 for v in self.graph.vertices}
        mu = self.mu or {e: 1.0 for e in self.graph.edge_map}
        return WeightedGraph(self.graph, m, mu)


def _ids(prefix, n):
    w = len(str(max(n - 1, 0)))
    return [f"{prefix}{i:0{w}d}" for i in range(n)]


def _circle(ids, radius=1.0, phase=0.0):
    n = len(ids)
    return {v: (radius * math.cos(phase + 2 * math.pi * i / n), radius * math.sin(phase + 2 * math.pi * i / n))
            for i, v in enumerate(ids)}


def star(n: int, total_length: float = 1.0) -> Instance:
    if n < 1:
        raise GraphError("star needs n >= 1")
    leaves = _ids("l", n)
    g = CombinatorialGraph.from_edges([("c", v) for v in leaves])
    pos = {"c": (0.0, 0.0), **_circle(leaves)}
    emb = embedding_from_positions(g, pos)
    return Instance(f"star-{n}", g, {e: total_length / n for e in g.edge_map}, embedding=emb, pos=pos,
                    params={"n": n, "L": total_length})


def cycle(n: int, total_length: float | None = None) -> Instance:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    vs = _ids("v", n)
    g = CombinatorialGraph.from_edges([(vs[i], vs[(i + 1) % n]) for i in range(n)])
    pos = _circle(vs)
    L = float(n) if total_length is None else total_length
    return Instance(f"cycle-{n}", g, {e: L / n for e in g.edge_map}, embedding=embedding_from_positions(g, pos),
                    pos=pos, params={"n": n, "L": L})


def path(n: int, total_length: float | None = None) -> Instance:
    """Path with n vertices."""
    if n < 2:
        raise GraphError("path needs n >= 2")
    vs = _ids("v", n)
    g = CombinatorialGraph.from_edges([(vs[i], vs[i + 1]) for i in range(n - 1)])
    pos = {v: (float(i), 0.0) for i, v in enumerate(vs)}
    L = float(n - 1) if total_length is None else total_length
    return Instance(f"path-{n}", g, {e: L / (n - 1) for e in g.edge_map},
                    embedding=embedding_from_positions(g, pos), pos=pos, params={"n": n, "L": L})


def ringel_youngs_genus(n: int) -> int:
    """Genus of K_n (Ringel-Youngs), used as declared metadata."""
    return max(0, -(-((n - 3) * (n - 4)) // 12))


def complete(n: int, length: float = 1.0) -> Instance:
    if n < 2:
        raise GraphError("complete graph needs n >= 2")
    vs = _ids("v", n)
    g = CombinatorialGraph.from_edges([(vs[i], vs[j]) for i in range(n) for j in range(i + 1, n)])
    genus = ringel_youngs_genus(n)
    pos = None
    if n <= 4:
        pos = {vs[0]: (0.0, 0.0), **_circle(vs[1:], phase=math.pi / 2)} if n == 4 else _circle(vs)
        emb = embedding_from_positions(g, pos)
    else:
        emb = PlanarEmbedding(genus)
    return Instance(f"complete-{n}", g, {e: length for e in g.edge_map}, embedding=emb, pos=pos,
                    params={"n": n, "genus": genus, "genus_source": "Ringel-Youngs"})


def binary_tree(h: int, profile: str = "equilateral") -> Instance:
    """Complete rooted binary tree of height h (2^k edges in generation k).

    Vertex ids are the root ``t`` followed by the 0/1 branch string.
    ``profile`` is ``equilateral`` (l = 1) or ``dyadic`` (l(e) = 2^-gen(e)).
    """
    if h < 1:
        raise GraphError("binary tree needs h >= 1")
    if profile not in ("equilateral", "dyadic"):
        raise GraphError(f"unknown length profile {profile!r}")
    edges, lengths, pos = [], {}, {"t": (0.0, 0.0)}
    frontier = ["t"]
    for gen in range(1, h + 1):
        nxt = []
        for v in frontier:
            for b in "01":
                w = v + b
                e = "e" + w[1:]
                edges.append((e, v, w))
                lengths[e] = 1.0 if profile == "equilateral" else 2.0 ** (-gen)
                x = int(w[1:], 2)
                pos[w] = ((x + 0.5) / 2 ** gen - 0.5, -float(gen))
                nxt.append(w)
        frontier = nxt
    verts = ["t"] + [w for _, _, w in edges]
    g = CombinatorialGraph(tuple(verts), tuple(edges))
    emb = embedding_from_positions(g, pos) if h <= 10 else PlanarEmbedding(0, None)
    return Instance(f"binary-tree-{h}-{profile}", g, lengths, embedding=emb,
                    pos=pos, params={"h": h, "profile": profile})


def random_planar(n: int, seed: int) -> Instance:
    """Delaunay triangulation of n uniform points in the unit disk."""
    if n < 3:
        raise GraphError("random planar graph needs n >= 3")
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 1, n))
    t = rng.uniform(0, 2 * math.pi, n)
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    tri = Delaunay(pts)
    pairs = set()
    for s in tri.simplices:
        for a, b in ((s[0], s[1]), (s[1], s[2]), (s[0], s[2])):
            pairs.add((min(a, b), max(a, b)))
    vs = _ids("v", n)
    g = CombinatorialGraph.from_edges([(vs[a], vs[b]) for a, b in sorted(pairs)])
    pos = {vs[i]: (float(pts[i, 0]), float(pts[i, 1])) for i in range(n)}
    return Instance(f"random-planar-{n}-{seed}", g, {e: 1.0 for e in g.edge_map},
                    embedding=embedding_from_positions(g, pos), pos=pos, params={"n": n, "seed": seed})


def random_connected(n: int, n_edges: int, rng: np.random.Generator) -> CombinatorialGraph:
    """Random spanning tree plus uniformly chosen extra edges (simple, connected)."""
    max_e = n * (n - 1) // 2
    n_edges = min(max(n_edges, n - 1), max_e)
    vs = _ids("v", n)
    order = rng.permutation(n)
    pairs = set()
    for i in range(1, n):
        j = order[rng.integers(0, i)]
        a, b = order[i], j
        pairs.add((min(a, b), max(a, b)))
    rest = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in pairs]
    extra = n_edges - len(pairs)
    if extra > 0:
        pick = rng.choice(len(rest), size=extra, replace=False)
        pairs.update(rest[i] for i in pick)
    return CombinatorialGraph.from_edges([(vs[a], vs[b]) for a, b in sorted(pairs)])


def random_metric(seed: int, n_range=(3, 8), extra_range=(0, 4), length_range=(0.5, 2.0),
                  equilateral: bool = False) -> Instance:
    """Random connected simple graph with log-uniform edge lengths."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    extra = int(rng.integers(extra_range[0], extra_range[1] + 1))
    g = random_connected(n, n - 1 + extra, rng)
    if equilateral:
        lengths = {e: 1.0 for e in g.edge_map}
    else:
        lo, hi = np.log(length_range[0]), np.log(length_range[1])
        lengths = {e: float(np.exp(rng.uniform(lo, hi))) for e, _, _ in g.edges}
    return Instance(f"random-metric-{seed}", g, lengths, params={"seed": seed})


def random_weighted(seed: int, n_range=(3, 10), extra_range=(0, 6), weight_range=(0.5, 2.0)) -> Instance:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    extra = int(rng.integers(extra_range[0], extra_range[1] + 1))
    g = random_connected(n, n - 1 + extra, rng)
    mu = {e: float(rng.uniform(*weight_range)) for e, _, _ in g.edges}
    m = {v: float(rng.uniform(*weight_range)) for v in g.vertices}
    return Instance(f"random-weighted-{seed}", g, m=m, mu=mu, params={"seed": seed})


def perturbed_weights(inst: Instance, seed: int, spread: float = 0.3) -> Instance:
    """Vertex weights 1 + U(-spread, spread); the planar weight condition is left to the caller to check."""
    rng = np.random.default_rng(seed)
    m = {v: float(1.0 + rng.uniform(-spread, spread)) for v in inst.graph.vertices}
    return Instance(inst.name + f"-perturbed-{seed}", inst.graph, inst.lengths, m=m, mu=inst.mu,
                    embedding=inst.embedding, pos=inst.pos, params={**inst.params, "weight_seed": seed})


FAMILIES = ("star", "complete", "cycle", "path", "binary-tree", "random-planar", "random-metric")


def generate(family: str, seed: int = 0, **params) -> list[Instance]:
    """Family dispatcher used by the CLI. Size parameters accept an ``n`` or a
    list ``sizes``; random families draw one instance per seed in ``count``."""
    sizes = params.get("sizes") or ([params["n"]] if "n" in params else None)
    if family == "star":
        L = params.get("L", 1.0)
        return [star(n, L) for n in sizes]
    if family == "cycle":
        return [cycle(n, params.get("L")) for n in sizes]
    if family == "path":
        return [path(n, params.get("L")) for n in sizes]
    if family == "complete":
        return [complete(n) for n in sizes]
    if family == "binary-tree":
        prof = params.get("profile", "equilateral")
        return [binary_tree(h, prof) for h in sizes]
    if family == "random-planar":
        count = params.get("count", 1)
        if sizes is None:
            rng = np.random.default_rng(seed)
            return [random_planar(int(rng.integers(10, 31)), seed + i) for i in range(count)]
        return [random_planar(n, seed + i) for n in sizes for i in range(count)]
    if family == "random-metric":
        count = params.get("count", 1)
        eq = params.get("profile") == "equilateral"
        return [random_metric(seed + i, equilateral=eq) for i in range(count)]
    raise GraphError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
