"""Graph data model: combinatorial, weighted and metric graphs, embeddings,
subdivisions and the hypothesis checks used by the planar bounds."""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

import numpy as np


class GraphError(ValueError):
    """Raised when a graph or embedding violates its structural invariants."""


@dataclass(frozen=True)
class CombinatorialGraph:
    """Connected graph with string ids.

    Vertices are kept in lexicographic order; edges keep their given
    (source, target) orientation. Loops and parallel edges are rejected
    unless ``allow_multi`` is set (metric graphs only).
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]  # (edge id, source, target)
    allow_multi: bool = False

    def __post_init__(self):
        verts = tuple(sorted(self.vertices))
        edges = tuple(sorted((str(e), str(u), str(v)) for e, u, v in self.edges))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        if not verts:
            raise GraphError("graph has no vertices")
        if any(not v for v in verts) or len(set(verts)) != len(verts):
            raise GraphError("vertex ids must be nonempty and unique")
        eids = [e for e, _, _ in edges]
        if any(not e for e in eids) or len(set(eids)) != len(eids):
            raise GraphError("edge ids must be nonempty and unique")
        vset = set(verts)
        seen_pairs = set()
        for e, u, v in edges:
            if u not in vset or v not in vset:
                raise GraphError(f"edge {e!r} has an unknown endpoint")
            if not self.allow_multi:
                if u == v:
                    raise GraphError(f"edge {e!r} is a loop; graph must be simple")
                pair = frozenset((u, v))
                if pair in seen_pairs:
                    raise GraphError(f"edge {e!r} is parallel to another edge; graph must be simple")
                seen_pairs.add(pair)
        if not self._is_connected():
            raise GraphError("graph is not connected")

    def _is_connected(self) -> bool:
        adj = defaultdict(set)
        for _, u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        start = self.vertices[0]
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    @classmethod
    def from_edges(cls, pairs: Iterable[tuple[str, str]], vertices: Iterable[str] | None = None,
                   prefix: str = "e", allow_multi: bool = False) -> "CombinatorialGraph":
        pairs = [(str(u), str(v)) for u, v in pairs]
        width = len(str(max(len(pairs) - 1, 0)))
        edges = [(f"{prefix}{i:0{width}d}", u, v) for i, (u, v) in enumerate(pairs)]
        verts = set(vertices or ())
        for _, u, v in edges:
            verts.update((u, v))
        return cls(tuple(verts), tuple(edges), allow_multi=allow_multi)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_map(self) -> dict[str, tuple[str, str]]:
        return {e: (u, v) for e, u, v in self.edges}

    @cached_property
    def incidence(self) -> dict[str, list[str]]:
        """Edges at each vertex; a loop appears twice."""
        inc = {v: [] for v in self.vertices}
        for e, u, v in self.edges:
            inc[u].append(e)
            inc[v].append(e)
        return inc

    @cached_property
    def neighbors(self) -> dict[str, set[str]]:
        nb = {v: set() for v in self.vertices}
        for _, u, v in self.edges:
            if u != v:
                nb[u].add(v)
                nb[v].add(u)
        return nb

    def degree(self, v: str) -> int:
        return len(self.incidence[v])

    @property
    def max_degree(self) -> int:
        return max(self.degree(v) for v in self.vertices)

    @property
    def betti(self) -> int:
        return self.n_edges - self.n_vertices + 1

    @cached_property
    def is_simple(self) -> bool:
        pairs = [frozenset((u, v)) for _, u, v in self.edges]
        return all(len(p) == 2 for p in pairs) and len(set(pairs)) == len(pairs)

    def adjacency_matrix(self, weights: Mapping[str, float] | None = None) -> np.ndarray:
        n = self.n_vertices
        A = np.zeros((n, n))
        idx = self.index
        for e, u, v in self.edges:
            w = 1.0 if weights is None else weights[e]
            A[idx[u], idx[v]] += w
            A[idx[v], idx[u]] += w
        return A

    def with_reversed(self, edge_ids: Iterable[str]) -> "CombinatorialGraph":
        flip = set(edge_ids)
        edges = tuple((e, v, u) if e in flip else (e, u, v) for e, u, v in self.edges)
        return CombinatorialGraph(self.vertices, edges, allow_multi=self.allow_multi)


def _check_positive(name: str, values: Mapping[str, float], keys: Iterable[str]) -> dict[str, float]:
    out = {}
    for k in keys:
        if k not in values:
            raise GraphError(f"{name} missing for {k!r}")
        x = float(values[k])
        if not (x > 0 and math.isfinite(x)):
            raise GraphError(f"{name}[{k!r}] = {x} must be positive and finite")
        out[k] = x
    return out


@dataclass(frozen=True)
class WeightedGraph:
    """Simple connected graph with vertex weight ``m`` and edge weight ``mu``."""

    graph: CombinatorialGraph
    m: Mapping[str, float]
    mu: Mapping[str, float]

    def __post_init__(self):
        if not self.graph.is_simple:
            raise GraphError("weighted graphs must be simple")
        object.__setattr__(self, "m", _check_positive("m", self.m, self.graph.vertices))
        object.__setattr__(self, "mu", _check_positive("mu", self.mu, self.graph.edge_map))

    @classmethod
    def uniform(cls, graph: CombinatorialGraph, m: float = 1.0, mu: float = 1.0) -> "WeightedGraph":
        return cls(graph, {v: m for v in graph.vertices}, {e: mu for e, _, _ in graph.edges})

    @property
    def total_mass(self) -> float:
        return float(sum(self.m.values()))

    def deg_mu(self, v: str) -> float:
        return float(sum(self.mu[e] for e in self.graph.incidence[v]))

    @property
    def d_mu_max(self) -> float:
        return max(self.deg_mu(v) for v in self.graph.vertices)

    @property
    def total_edge_weight(self) -> float:
        return float(sum(self.mu.values()))

    def mass_vector(self) -> np.ndarray:
        return np.array([self.m[v] for v in self.graph.vertices])


@dataclass(frozen=True)
class MetricGraph:
    """Compact metric graph: a (multi)graph with positive edge lengths."""

    graph: CombinatorialGraph
    lengths: Mapping[str, float]

    def __post_init__(self):
        if not self.graph.allow_multi:
            g = self.graph
            object.__setattr__(self, "graph", CombinatorialGraph(g.vertices, g.edges, allow_multi=True))
        object.__setattr__(self, "lengths", _check_positive("length", self.lengths, self.graph.edge_map))

    @classmethod
    def equilateral(cls, graph: CombinatorialGraph, length: float = 1.0) -> "MetricGraph":
        return cls(graph, {e: length for e, _, _ in graph.edges})

    @property
    def total_length(self) -> float:
        return float(math.fsum(self.lengths.values()))

    @property
    def l_min(self) -> float:
        return min(self.lengths.values())

    @property
    def l_max(self) -> float:
        return max(self.lengths.values())

    def deg_len(self, v: str) -> float:
        return float(math.fsum(self.lengths[e] for e in self.graph.incidence[v]))

    def deg_inv(self, v: str) -> float:
        return float(math.fsum(1.0 / self.lengths[e] for e in self.graph.incidence[v]))

    @property
    def d_len_max(self) -> float:
        return max(self.deg_len(v) for v in self.graph.vertices)

    @property
    def d_inv_max(self) -> float:
        return max(self.deg_inv(v) for v in self.graph.vertices)

    @property
    def d_max(self) -> int:
        return self.graph.max_degree

    @property
    def betti(self) -> int:
        return self.graph.betti

    @property
    def is_simple(self) -> bool:
        return self.graph.is_simple

    def induced_weights(self) -> WeightedGraph:
        """Weights m(v) = metric degree, mu(e) = 1/length on the (simple) graph."""
        g = self.graph
        simple = CombinatorialGraph(g.vertices, g.edges)
        return WeightedGraph(simple,
                             {v: self.deg_len(v) for v in g.vertices},
                             {e: 1.0 / self.lengths[e] for e in g.edge_map})

    def with_reversed(self, edge_ids: Iterable[str]) -> "MetricGraph":
        return MetricGraph(self.graph.with_reversed(edge_ids), self.lengths)


@dataclass(frozen=True)
class PlanarEmbedding:
    """Cellular embedding given by oriented face walks on a surface of genus ``genus``.

    Face entries are edge ids, prefixed with ``-`` when traversed target to
    source. ``faces`` may be omitted when only the genus is known.
    """

    genus: int
    faces: tuple[tuple[str, ...], ...] | None = None

    def __post_init__(self):
        if int(self.genus) != self.genus or self.genus < 0:
            raise GraphError("genus must be a nonnegative integer")
        object.__setattr__(self, "genus", int(self.genus))
        if self.faces is not None:
            object.__setattr__(self, "faces", tuple(tuple(f) for f in self.faces))

    @staticmethod
    def parse_dart(token: str) -> tuple[str, bool]:
        """Return (edge id, forward?) for a signed face entry."""
        if token.startswith("-"):
            return token[1:], False
        if token.startswith("+"):
            return token[1:], True
        return token, True

    def vertex_walks(self, graph: CombinatorialGraph) -> list[list[str]]:
        """Each face as its cyclic sequence of corner vertices."""
        walks = []
        for face in self.faces or ():
            walk = []
            for tok in face:
                e, fwd = self.parse_dart(tok)
                u, v = graph.edge_map[e]
                walk.append(u if fwd else v)
            walks.append(walk)
        return walks

    def validate(self, graph: CombinatorialGraph) -> None:
        if self.faces is None:
            return
        count = defaultdict(int)
        directed = defaultdict(int)
        for face in self.faces:
            if not face:
                raise GraphError("empty face walk")
            ends = []
            for tok in face:
                e, fwd = self.parse_dart(tok)
                if e not in graph.edge_map:
                    raise GraphError(f"face references unknown edge {e!r}")
                count[e] += 1
                directed[(e, fwd)] += 1
                u, v = graph.edge_map[e]
                ends.append((u, v) if fwd else (v, u))
            for (a, b), (c, d) in zip(ends, ends[1:] + ends[:1]):
                if b != c:
                    raise GraphError(f"face walk is not closed at {b!r} -> {c!r}")
        for e in graph.edge_map:
            if count[e] != 2:
                raise GraphError(f"edge {e!r} appears {count[e]} times in faces, expected 2")
        lhs = graph.n_vertices - graph.n_edges + len(self.faces)
        if lhs != 2 - 2 * self.genus:
            raise GraphError(f"Euler relation fails: V-E+F = {lhs} != {2 - 2 * self.genus}")

    def is_oriented(self) -> bool:
        seen = set()
        for face in self.faces or ():
            for tok in face:
                d = self.parse_dart(tok)
                if d in seen:
                    return False
                seen.add(d)
        return True


def faces_from_rotation(graph: CombinatorialGraph, rotation: Mapping[str, list[str]]) -> tuple[tuple[str, ...], ...]:
    """Trace faces of a rotation system (counterclockwise neighbor order per vertex).

    Bounded faces of a straight-line drawing come out counterclockwise.
    Simple graphs only.
    """
    pair_edge = {}
    for e, u, v in graph.edges:
        pair_edge[(u, v)] = "+" + e
        pair_edge[(v, u)] = "-" + e
    pos_in = {v: {w: i for i, w in enumerate(rot)} for v, rot in rotation.items()}
    unused = set(pair_edge)
    faces = []
    for start in sorted(pair_edge):
        if start not in unused:
            continue
        face = []
        u, v = start
        while (u, v) in unused:
            unused.discard((u, v))
            face.append(pair_edge[(u, v)])
            rot = rotation[v]
            i = pos_in[v][u]
            w = rot[(i - 1) % len(rot)]
            u, v = v, w
        faces.append(tuple(face))
    return tuple(faces)


def embedding_from_positions(graph: CombinatorialGraph, pos: Mapping[str, tuple[float, float]],
                             genus: int = 0) -> PlanarEmbedding:
    """Embedding of a crossing-free straight-line drawing."""
    rotation = {}
    for v in graph.vertices:
        x0, y0 = pos[v]
        nbrs = sorted(graph.neighbors[v], key=lambda w: math.atan2(pos[w][1] - y0, pos[w][0] - x0))
        rotation[v] = nbrs
    emb = PlanarEmbedding(genus, faces_from_rotation(graph, rotation))
    emb.validate(graph)
    return emb


def embedding_from_walks(graph: CombinatorialGraph, walks: Iterable[Iterable[str]], genus: int = 0) -> PlanarEmbedding:
    """Embedding from faces given as cyclic vertex sequences (simple graphs)."""
    pair_edge = {}
    for e, u, v in graph.edges:
        pair_edge[(u, v)] = "+" + e
        pair_edge[(v, u)] = "-" + e
    faces = []
    for walk in walks:
        walk = list(walk)
        faces.append(tuple(pair_edge[(a, b)] for a, b in zip(walk, walk[1:] + walk[:1])))
    emb = PlanarEmbedding(genus, tuple(faces))
    emb.validate(graph)
    return emb


# ---------------------------------------------------------------------------
# subdivisions
# ---------------------------------------------------------------------------

class MetricSubdivision(NamedTuple):
    graph: MetricGraph
    old_vertices: tuple[str, ...]
    new_vertices: tuple[str, ...]


def subdivide_metric(G: MetricGraph, parts: Mapping[str, int] | int) -> MetricSubdivision:
    """Split each edge e into ``parts[e]`` edges of equal length.

    Pieces of edge ``e`` are named ``e/0 .. e/(p-1)`` from source to target and the
    inserted vertices ``e@1 .. e@(p-1)``.
    """
    if isinstance(parts, int):
        parts = {e: parts for e in G.graph.edge_map}
    verts = list(G.graph.vertices)
    new_verts = []
    edges = []
    lengths = {}
    for e, u, v in G.graph.edges:
        p = int(parts.get(e, 1))
        if p < 1:
            raise GraphError(f"parts[{e!r}] = {p}; must be >= 1")
        if p == 1:
            edges.append((e, u, v))
            lengths[e] = G.lengths[e]
            continue
        chain = [u] + [f"{e}@{i}" for i in range(1, p)] + [v]
        new_verts.extend(chain[1:-1])
        piece = G.lengths[e] / p
        for j in range(p):
            eid = f"{e}/{j}"
            edges.append((eid, chain[j], chain[j + 1]))
            lengths[eid] = piece
    graph = CombinatorialGraph(tuple(verts + new_verts), tuple(edges), allow_multi=True)
    return MetricSubdivision(MetricGraph(graph, lengths), tuple(sorted(verts)), tuple(sorted(new_verts)))


def simplify_metric(G: MetricGraph) -> MetricGraph:
    """Insert degree-2 vertices so that the underlying graph becomes simple.

    Loops get 3 pieces, members of a parallel class get 2; other edges untouched.
    """
    if G.is_simple:
        return G
    classes = defaultdict(list)
    for e, u, v in G.graph.edges:
        classes[frozenset((u, v))].append(e)
    parts = {}
    for pair, members in classes.items():
        if len(pair) == 1:
            for e in members:
                parts[e] = 3
        elif len(members) > 1:
            for e in members:
                parts[e] = 2
    return subdivide_metric(G, parts).graph


def subdivide_combinatorial(G: WeightedGraph) -> WeightedGraph:
    """Subdivision graph with a new vertex ``[e]`` on each edge.

    Both halves carry the parent weight. The vertex weight of the result is
    the weighted degree, i.e. the result is set up for the normalized Laplacian.
    """
    verts = list(G.graph.vertices)
    edges = []
    mu = {}
    for e, u, v in G.graph.edges:
        mid = f"[{e}]"
        verts.append(mid)
        for end in (u, v):
            eid = f"{e}:{end}"
            edges.append((eid, end, mid))
            mu[eid] = G.mu[e]
    graph = CombinatorialGraph(tuple(verts), tuple(edges))
    m = {v: sum(mu[e] for e in graph.incidence[v]) for v in graph.vertices}
    return WeightedGraph(graph, m, mu)


def betti_threshold(G: MetricGraph) -> Fraction:
    """Smallest admissible k for the Betti-number bound: L/l_min - beta + 1."""
    L = sum(Fraction(x) for x in G.lengths.values())
    return L / Fraction(G.l_min) - G.betti + 1


def betti_parts(G: MetricGraph, k: int) -> dict[str, int]:
    """Piece counts m_e with m_e - 1 <= n l_e / L < m_e, n = k + beta - 1 (exact arithmetic)."""
    thr = betti_threshold(G)
    if k < thr:
        raise GraphError(f"k = {k} is below the admissible threshold L/l_min - beta + 1 = {float(thr):.12g}")
    n = k + G.betti - 1
    L = sum(Fraction(x) for x in G.lengths.values())
    return {e: math.floor(n * Fraction(l) / L) + 1 for e, l in G.lengths.items()}


def betti_subdivision(G: MetricGraph, k: int) -> MetricSubdivision:
    parts = betti_parts(G, k)
    sub = subdivide_metric(G, parts)
    n = k + G.betti - 1
    L = G.total_length
    for x in sub.graph.lengths.values():
        if not (L / (2 * n) * (1 - 1e-12) <= x < L / n):
            raise AssertionError(f"piece length {x} outside [L/2n, L/n)")
    return sub


# ---------------------------------------------------------------------------
# hypothesis checks
# ---------------------------------------------------------------------------

def check_vertex_weight_condition(G: WeightedGraph) -> list[str]:
    """Edges {u,v} with 2(m(u)+m(v)) >= m(V)."""
    mV = G.total_mass
    return [e for e, u, v in G.graph.edges if 2 * (G.m[u] + G.m[v]) >= mV]


def check_metric_condition(G: MetricGraph) -> list[tuple[str, str]]:
    """Adjacent pairs with d_l(u) + d_l(v) >= L."""
    L = G.total_length
    bad = set()
    for _, u, v in G.graph.edges:
        if G.deg_len(u) + G.deg_len(v) >= L:
            bad.add(tuple(sorted((u, v))))
    return sorted(bad)
