"""Sweeps over generated families: bound reports, CSV/JSON tables and figures."""

from __future__ import annotations

import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import bounds as B
from .generators import Instance, complete, generate
from .graphs import GraphError, betti_threshold
from .io import load_graph
from .reports import VIOLATED, BoundReport, reports_to_csv, reports_to_json

log = logging.getLogger(__name__)

BOUND_IDS = ("spielman_teng", "weighted_planar", "packing_certificate", "metric_planar", "comparison",
             "normalized_genus", "metric_genus", "betti_genus", "tree_diameter")
GENUS_BOUNDS = ("normalized_genus", "metric_genus", "betti_genus")


@dataclass
class ExperimentSpec:
    family: str  # a generator family, "k4-weighted" or "file"
    sizes: list = field(default_factory=list)
    profile: str = "equilateral"  # equilateral | dyadic | log-uniform
    bounds: list = field(default_factory=lambda: ["comparison"])
    seed: int = 0
    count: int = 1
    weights: list = field(default_factory=list)  # K_4 vertex weight a
    k: int | None = None
    inputs: list = field(default_factory=list)  # graph files for family "file"
    output: str | None = None  # directory; nothing is written when None
    figures: bool = True
    svg_packings: bool = False
    jobs: int = 1
    name: str = "experiment"


BUILTIN = {
    "star-sweep": ExperimentSpec("star", sizes=list(range(3, 9)), bounds=["comparison"], name="star-sweep"),
    "k4-weights": ExperimentSpec("k4-weighted", weights=[1, 10, 100], bounds=["weighted_planar"], name="k4-weights"),
    "binary-tree": ExperimentSpec("binary-tree", sizes=list(range(3, 7)), profile="both", bounds=["tree_diameter", "metric_planar"],
                                  name="binary-tree"),
}


def k4_weighted(a: float) -> Instance:
    inst = complete(4)
    g = inst.graph
    m = {v: (float(a) if i == 0 else 1.0) for i, v in enumerate(g.vertices)}
    return Instance(f"k4-a{a:g}", g, inst.lengths, m=m, embedding=inst.embedding, pos=inst.pos, params={"a": a})


def build_instances(spec: ExperimentSpec) -> list[Instance]:
    if spec.family == "k4-weighted":
        return [k4_weighted(a) for a in spec.weights]
    if spec.family == "file":
        out = []
        for path in spec.inputs:
            doc = load_graph(path)
            out.append(Instance(Path(path).stem, doc.graph, doc.metric().lengths, m=doc.weighted().m,
                                mu=doc.weighted().mu, embedding=doc.embedding, params=dict(doc.meta)))
        return out
    params = {"sizes": spec.sizes or None, "count": spec.count}
    if spec.family == "binary-tree":
        profiles = ["equilateral", "dyadic"] if spec.profile in ("both", "equilateral-dyadic") else [spec.profile]
        return [i for p in profiles for i in generate("binary-tree", spec.seed, sizes=spec.sizes,
                                                      profile=_profile(p))]
    if spec.family == "random-metric" and spec.profile == "equilateral":
        params["profile"] = "equilateral"
    return generate(spec.family, spec.seed, **params)


def _profile(p):
    return "dyadic" if p in ("dyadic", "dyadic-decay") else p


def _genus(inst: Instance) -> int:
    if inst.embedding is None:
        raise GraphError(f"{inst.name}: bound needs a genus but the instance has no embedding")
    return inst.embedding.genus


def evaluate(inst: Instance, bound_ids, k: int | None = None) -> list[BoundReport]:
    """All requested bounds on one instance; not-applicable ones are skipped with a log line."""
    out = []
    G = inst.metric()
    W = inst.weighted()
    for bid in bound_ids:
        if bid not in BOUND_IDS:
            raise ValueError(f"unknown bound {bid!r}; choose from {', '.join(BOUND_IDS)}")
        if bid in GENUS_BOUNDS or bid == "packing_certificate":
            g = _genus(inst)
        if bid == "spielman_teng":
            out.append(B.bound_spielman_teng(W, inst.embedding))
        elif bid == "weighted_planar":
            out.append(B.bound_weighted_planar(W, inst.embedding))
        elif bid == "packing_certificate":
            if g != 0:
                log.info("%s: packing certificate needs a planar graph, skipped", inst.name)
                continue
            from .packing import balance, pack_planar
            pk = pack_planar(W.graph, inst.embedding)
            _, bal, _ = balance(pk, W.m, require_condition=False)
            out.append(B.packing_gap_bound(bal, W))
        elif bid == "metric_planar":
            out.append(B.bound_metric_planar(G, inst.embedding))
        elif bid == "comparison":
            out.extend(B.bound_comparison(G, k))
        elif bid == "normalized_genus":
            out.append(B.bound_normalized_genus(W.graph, inst.mu, g, k or 2))
        elif bid == "metric_genus":
            out.append(B.bound_metric_genus(G, g, k or 2))
        elif bid == "betti_genus":
            kk = max(k or 2, math.ceil(betti_threshold(G)))
            out.append(B.bound_betti_genus(G, g, kk))
        elif bid == "tree_diameter":
            if G.betti != 0:
                log.info("%s: not a tree, diameter bound skipped", inst.name)
                continue
            out.append(B.bound_tree_diameter(G))
    for rep in out:
        rep.instance = inst.name
    return out


def _task(args):
    inst, bound_ids, k = args
    return evaluate(inst, bound_ids, k)


def run_sweep(instances, bound_ids, k=None, jobs: int = 1) -> list[BoundReport]:
    """Evaluate instances, in parallel when jobs > 1; rows come back in instance order."""
    tasks = [(inst, list(bound_ids), k) for inst in instances]
    if jobs <= 1 or len(tasks) <= 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_task, tasks))
    return [r for rows in results for r in rows]


def write_artifacts(spec: ExperimentSpec, reports, instances=()) -> list[Path]:
    out = Path(spec.output)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{spec.name}.csv", out / f"{spec.name}.json"]
    paths[0].write_text(reports_to_csv(reports), encoding="utf-8")
    paths[1].write_text(reports_to_json(reports) + "\n", encoding="utf-8")
    if spec.figures:
        from .plotting import plot_bound_ratios, plot_tree_table
        p = out / f"{spec.name}-ratios.svg"
        plot_bound_ratios(reports, p, title=spec.name)
        paths.append(p)
        if spec.family == "binary-tree":
            rows = B.binary_tree_table(spec.sizes or range(3, 7), with_spectrum=False)
            p = out / f"{spec.name}-table.svg"
            plot_tree_table(rows, p)
            paths.append(p)
            p = out / f"{spec.name}-table.json"
            p.write_text(json.dumps([r.to_dict() for r in rows], indent=2) + "\n", encoding="utf-8")
            paths.append(p)
    if spec.svg_packings:
        from .packing import pack_planar
        from .plotting import plot_planar_packing, plot_sphere_packing
        for inst in instances:
            if inst.embedding is None or inst.embedding.genus != 0:
                continue
            pk = pack_planar(inst.graph, inst.embedding)
            for fn, suffix in ((plot_planar_packing, "planar"), (plot_sphere_packing, "sphere")):
                p = out / f"{inst.name}-{suffix}.svg"
                fn(pk, p)
                paths.append(p)
    return paths


def run_experiment(spec: ExperimentSpec, stream=None) -> tuple[int, list[BoundReport]]:
    """Exit code 0 when every exact-constant bound holds, 2 on a violation.

    Operational errors propagate; the CLI maps them to exit code 1.
    """
    stream = stream or sys.stderr
    instances = build_instances(spec)
    reports = run_sweep(instances, spec.bounds, spec.k, spec.jobs)
    if spec.output:
        write_artifacts(spec, reports, instances)
    bad = [r for r in reports if r.verdict == VIOLATED]
    for r in bad:
        print("VIOLATION " + ",".join(r.csv_row()), file=stream)
    return (2 if bad else 0), reports
