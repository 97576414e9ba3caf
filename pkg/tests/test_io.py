import json

import pytest

from qgs.generators import complete, cycle, star
from qgs.graphs import GraphError
from qgs.io import document_from_dict, document_from_metric, document_from_weighted, dump_graph, load_graph


def test_roundtrip_metric(tmp_path):
    inst = star(4, 2.0)
    doc = document_from_metric(inst.metric(), inst.embedding, name="s4")
    p = tmp_path / "g.json"
    dump_graph(doc, p)
    back = load_graph(p)
    assert back.graph == doc.graph
    assert back.metric().lengths == inst.metric().lengths
    assert back.embedding.faces == inst.embedding.faces
    assert back.meta == {"name": "s4"}


def test_roundtrip_weighted():
    W = complete(4).weighted()
    doc = document_from_weighted(W)
    back = document_from_dict(json.loads(json.dumps(doc.to_dict())))
    assert back.weighted().m == W.m and back.weighted().mu == W.mu


def test_defaults_and_omega():
    doc = document_from_dict({"vertices": [{"id": "a"}, {"id": "b"}],
                              "edges": [{"id": "e", "source": "a", "target": "b", "mu": 2.0}]})
    assert doc.metric().lengths == {"e": 1.0}
    assert doc.weighted().m == {"a": 1.0, "b": 1.0}
    assert doc.omega_weights() == {"e": 2.0}


def test_multigraph_allowed_for_metric():
    doc = document_from_dict({"vertices": [{"id": "a"}],
                              "edges": [{"id": "e", "source": "a", "target": "a", "length": 2}]})
    assert doc.metric().betti == 1


@pytest.mark.parametrize("bad", [
    {"vertices": []},
    {"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "source": "a", "target": "b", "length": "x"}]},
    {"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "source": "a", "target": "b", "length": -1}]},
    {"vertices": [{"id": "a"}, {"id": "b"}], "edges": []},
])
def test_bad_documents(bad):
    with pytest.raises(GraphError):
        document_from_dict(bad).metric()


def test_bad_embedding_rejected():
    d = document_from_metric(cycle(4).metric(), cycle(4).embedding).to_dict()
    d["embedding"]["faces"] = d["embedding"]["faces"][:1]
    with pytest.raises(GraphError):
        document_from_dict(d)
