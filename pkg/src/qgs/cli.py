"""Command line interface: ``qgs <command> ...``.

Exit codes: 0 success, 1 operational error, 2 a bound with exact constant is violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .experiments import BOUND_IDS, BUILTIN, ExperimentSpec, evaluate, run_experiment
from .generators import FAMILIES, Instance, generate
from .graphs import GraphError, betti_subdivision, subdivide_combinatorial, subdivide_metric
from .io import GraphDocument, document_from_metric, document_from_weighted, dump_graph, load_graph
from .reports import VIOLATED, reports_to_csv, reports_to_json

log = logging.getLogger("qgs")


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args) -> GraphDocument:
    if not args.input:
        raise GraphError("--input is required")
    return load_graph(args.input)


def _instance(doc: GraphDocument, name: str) -> Instance:
    return Instance(name, doc.graph, doc.metric().lengths, m=doc.weighted().m, mu=doc.weighted().mu,
                    embedding=doc.embedding, params=dict(doc.meta))


def _doc_of(inst: Instance) -> dict:
    doc = GraphDocument(inst.graph, m=dict(inst.m or {}), length=dict(inst.lengths or {}), mu=dict(inst.mu or {}),
                        embedding=inst.embedding, meta={"name": inst.name, **inst.params})
    return doc.to_dict()


# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    params = {"count": args.count}
    if args.n:
        params["sizes"] = args.n
    if args.profile:
        params["profile"] = "dyadic" if args.profile.startswith("dyadic") else args.profile
    if args.length is not None:
        params["L"] = args.length
    insts = generate(args.family, args.seed, **params)
    if len(insts) == 1 and not (args.output and Path(args.output).is_dir()):
        _emit(json.dumps(_doc_of(insts[0]), indent=2) + "\n", args.output)
        return 0
    if not args.output:
        _emit(json.dumps([_doc_of(i) for i in insts], indent=2) + "\n", None)
        return 0
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for inst in insts:
        (out / f"{inst.name}.json").write_text(json.dumps(_doc_of(inst), indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_spectrum(args) -> int:
    from .discrete import eigenvalues, normalized_laplacian
    from .metric import ROOT_TOL, eigenvalues_fem, eigenvalues_metric, eigenvalues_secular
    doc = _load(args)
    specs = []
    if args.kind == "metric":
        G = doc.metric()
        count = args.count or G.graph.n_vertices
        if args.solver == "auto":
            specs.append(eigenvalues_metric(G, count, tol=args.tol or ROOT_TOL))
        if args.solver in ("secular", "both"):
            specs.append(eigenvalues_secular(G, count, tol=args.tol or ROOT_TOL))
        if args.solver in ("fem", "both"):
            specs.append(eigenvalues_fem(G, count, h=args.h))
    elif args.kind == "weighted":
        specs.append(eigenvalues(doc.weighted()))
    else:
        specs.append(eigenvalues(normalized_laplacian(doc.graph, doc.omega_weights())))
    if args.count:
        for s in specs:
            s.values = s.values[: args.count]
    if args.format == "csv":
        text = specs[0].to_csv(with_solver=True)
        for s in specs[1:]:
            text += s.to_csv(with_solver=True).split("\n", 1)[1]
    else:
        text = json.dumps([s.to_dict() for s in specs] if len(specs) > 1 else specs[0].to_dict(), indent=2) + "\n"
    _emit(text, args.output)
    return 0


def cmd_bounds(args) -> int:
    doc = _load(args)
    inst = _instance(doc, Path(args.input).stem)
    if args.all:
        ids = list(BOUND_IDS)
        if doc.embedding is None:
            ids = [b for b in ids if b not in ("packing_certificate", "normalized_genus", "metric_genus", "betti_genus")]
            log.warning("no embedding or genus in input: genus-dependent bounds skipped")
        if doc.graph.betti != 0:
            ids.remove("tree_diameter")
    elif args.bound:
        ids = args.bound
    else:
        raise GraphError("give --all or --bound")
    reports = evaluate(inst, ids, args.k)
    text = reports_to_csv(reports) if args.format == "csv" else reports_to_json(reports) + "\n"
    _emit(text, args.output)
    bad = [r for r in reports if r.verdict == VIOLATED]
    for r in bad:
        print("VIOLATION " + ",".join(r.csv_row()), file=sys.stderr)
    return 2 if bad else 0


def _pack(doc, args, balanced: bool):
    from .packing import balance, pack_planar
    if doc.embedding is None or doc.embedding.faces is None:
        raise GraphError("packing needs a planar embedding with faces")
    pk = pack_planar(doc.graph, doc.embedding, tol=args.tol or 1e-13)
    if balanced:
        m = doc.weighted().m
        _, pk, state = balance(pk, m, require_condition=not args.ignore_condition)
    if args.svg:
        from .plotting import plot_planar_packing, plot_sphere_packing
        plot_planar_packing(pk, args.svg)
        root, ext = os.path.splitext(args.svg)
        plot_sphere_packing(pk, root + "-sphere" + (ext or ".svg"))
    return pk


def cmd_pack(args) -> int:
    pk = _pack(_load(args), args, False)
    _emit(json.dumps(pk.to_dict(), indent=2) + "\n", args.output)
    return 0


def cmd_balance(args) -> int:
    pk = _pack(_load(args), args, True)
    out = pk.to_dict()
    out["balance"] = pk.info.get("balance")
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def cmd_subdivide(args) -> int:
    doc = _load(args)
    if args.combinatorial:
        W = subdivide_combinatorial(doc.weighted())
        new = document_from_weighted(W)
    elif args.betti is not None:
        new = document_from_metric(betti_subdivision(doc.metric(), args.betti).graph)
    else:
        new = document_from_metric(subdivide_metric(doc.metric(), args.parts).graph)
    if args.output:
        dump_graph(new, args.output)
    else:
        _emit(json.dumps(new.to_dict(), indent=2) + "\n", None)
    return 0


def cmd_report(args) -> int:
    if args.experiment:
        spec = replace(BUILTIN[args.experiment])
    else:
        if not args.family and not args.input:
            raise GraphError("give --experiment, --family or --input")
        spec = ExperimentSpec(args.family or "file", sizes=args.n or [], profile=args.profile or "equilateral",
                              bounds=args.bound or ["comparison"], count=args.count, weights=args.weights or [],
                              inputs=[args.input] if args.input else [], name=args.name)
    spec.seed = args.seed
    spec.jobs = args.jobs
    spec.k = args.k if args.k is not None else spec.k
    spec.output = args.output or "qgs-report"
    spec.svg_packings = args.svg_packings
    spec.figures = not args.no_figures
    code, reports = run_experiment(spec)
    if args.format == "csv":
        sys.stdout.write(reports_to_csv(reports))
    log.info("wrote %d rows to %s", len(reports), spec.output)
    return code


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i")
    common.add_argument("--output", "-o")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--tol", type=float, default=None)

    p = argparse.ArgumentParser(prog="qgs", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write generated graphs as JSON")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--n", type=int, nargs="+", help="size(s); height for binary-tree")
    g.add_argument("--profile", choices=("equilateral", "dyadic", "dyadic-decay", "log-uniform"))
    g.add_argument("--length", type=float, help="total length (star, cycle, path)")
    g.add_argument("--count", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a graph")
    s.add_argument("kind", choices=("metric", "weighted", "normalized"))
    s.add_argument("--count", type=int)
    s.add_argument("--solver", choices=("auto", "secular", "fem", "both"), default="auto",
                   help="auto: exact on simple equilateral graphs, secular otherwise")
    s.add_argument("--h", type=float, help="FEM mesh width")
    s.set_defaults(func=cmd_spectrum)

    b = sub.add_parser("bounds", parents=[common], help="evaluate eigenvalue bounds")
    b.add_argument("--all", action="store_true")
    b.add_argument("--bound", nargs="+", choices=BOUND_IDS)
    b.add_argument("--k", type=int)
    b.set_defaults(func=cmd_bounds)

    for name, fn, text in (("pack", cmd_pack, "circle packing on the sphere"),
                           ("balance", cmd_balance, "balanced circle packing")):
        q = sub.add_parser(name, parents=[common], help=text)
        q.add_argument("--svg", help="planar view; the sphere view goes next to it")
        q.add_argument("--ignore-condition", action="store_true",
                       help="balance even when 2(m(u)+m(v)) < m(V) fails")
        q.set_defaults(func=fn)

    d = sub.add_parser("subdivide", parents=[common], help="subdivided graph as JSON")
    d.add_argument("--parts", type=int, default=4)
    d.add_argument("--betti", type=int, metavar="K", help="subdivision used by the Betti-number bound")
    d.add_argument("--combinatorial", action="store_true", help="one new vertex per edge")
    d.set_defaults(func=cmd_subdivide)

    r = sub.add_parser("report", parents=[common], help="run a sweep and write CSV/JSON/figures")
    r.add_argument("--experiment", choices=sorted(BUILTIN))
    r.add_argument("--family", choices=FAMILIES + ("k4-weighted",))
    r.add_argument("--n", type=int, nargs="+")
    r.add_argument("--profile", choices=("equilateral", "dyadic", "dyadic-decay", "log-uniform", "both"))
    r.add_argument("--bound", nargs="+", choices=BOUND_IDS)
    r.add_argument("--weights", type=float, nargs="+", help="vertex weight a for k4-weighted")
    r.add_argument("--count", type=int, default=1)
    r.add_argument("--k", type=int)
    r.add_argument("--name", default="experiment")
    r.add_argument("--svg-packings", action="store_true")
    r.add_argument("--no-figures", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QGS_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"qgs: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
