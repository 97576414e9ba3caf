"""Graph JSON documents.

Schema::

    {"vertices": [{"id": "a", "m": 1.0}, ...],
     "edges": [{"id": "e0", "source": "a", "target": "b",
                "length": 1.0, "mu": 1.0, "omega": 1.0}, ...],
     "embedding": {"genus": 0, "faces": [["e0", "-e1", ...], ...]}}

Only ids and endpoints are required. Defaults: ``length`` 1, ``mu``/``omega`` 1,
``m`` 1 for weighted graphs and the weighted degree for normalized ones.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .graphs import CombinatorialGraph, GraphError, MetricGraph, PlanarEmbedding, WeightedGraph


@dataclass
class GraphDocument:
    graph: CombinatorialGraph
    m: dict[str, float] = field(default_factory=dict)
    length: dict[str, float] = field(default_factory=dict)
    mu: dict[str, float] = field(default_factory=dict)
    omega: dict[str, float] = field(default_factory=dict)
    embedding: PlanarEmbedding | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def metric(self) -> MetricGraph:
        return MetricGraph(self.graph, {e: self.length.get(e, 1.0) for e in self.graph.edge_map})

    def weighted(self) -> WeightedGraph:
        g = CombinatorialGraph(self.graph.vertices, self.graph.edges)
        return WeightedGraph(g, {v: self.m.get(v, 1.0) for v in g.vertices},
                             {e: self.mu.get(e, 1.0) for e in g.edge_map})

    def omega_weights(self) -> dict[str, float]:
        src = self.omega or self.mu
        return {e: src.get(e, 1.0) for e in self.graph.edge_map}

    def to_dict(self) -> dict:
        verts = []
        for v in self.graph.vertices:
            item = {"id": v}
            if v in self.m:
                item["m"] = self.m[v]
            verts.append(item)
        edges = []
        for e, u, v in self.graph.edges:
            item = {"id": e, "source": u, "target": v}
            for key, table in (("length", self.length), ("mu", self.mu), ("omega", self.omega)):
                if e in table:
                    item[key] = table[e]
            edges.append(item)
        out = {"vertices": verts, "edges": edges}
        if self.embedding is not None:
            emb = {"genus": self.embedding.genus}
            if self.embedding.faces is not None:
                emb["faces"] = [list(f) for f in self.embedding.faces]
            out["embedding"] = emb
        if self.meta:
            out["meta"] = self.meta
        return out


def _num(x, what):
    try:
        val = float(x)
    except (TypeError, ValueError):
        raise GraphError(f"{what} is not a number: {x!r}")
    if not math.isfinite(val):
        raise GraphError(f"{what} is not finite")
    return val


def document_from_dict(data: dict) -> GraphDocument:
    try:
        vitems = data["vertices"]
        eitems = data["edges"]
    except (KeyError, TypeError):
        raise GraphError("graph document needs 'vertices' and 'edges'")
    verts, m = [], {}
    for item in vitems:
        vid = str(item["id"])
        verts.append(vid)
        if "m" in item:
            m[vid] = _num(item["m"], f"m[{vid}]")
    edges, length, mu, omega = [], {}, {}, {}
    for item in eitems:
        eid = str(item["id"])
        edges.append((eid, str(item["source"]), str(item["target"])))
        for key, table in (("length", length), ("mu", mu), ("omega", omega)):
            if key in item:
                table[eid] = _num(item[key], f"{key}[{eid}]")
    graph = CombinatorialGraph(tuple(verts), tuple(edges), allow_multi=True)
    embedding = None
    if data.get("embedding") is not None:
        emb = data["embedding"]
        faces = emb.get("faces")
        embedding = PlanarEmbedding(emb.get("genus", 0), None if faces is None else tuple(tuple(f) for f in faces))
        embedding.validate(graph)
    return GraphDocument(graph, m, length, mu, omega, embedding, dict(data.get("meta", {})))


def load_graph(path: str | Path) -> GraphDocument:
    with open(path, encoding="utf-8") as fh:
        return document_from_dict(json.load(fh))


def dump_graph(doc: GraphDocument, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc.to_dict(), fh, indent=2)
        fh.write("\n")


def document_from_metric(G: MetricGraph, embedding: PlanarEmbedding | None = None, **meta) -> GraphDocument:
    return GraphDocument(G.graph, length=dict(G.lengths), embedding=embedding, meta=meta)


def document_from_weighted(G: WeightedGraph, embedding: PlanarEmbedding | None = None, **meta) -> GraphDocument:
    return GraphDocument(G.graph, m=dict(G.m), mu=dict(G.mu), embedding=embedding, meta=meta)
