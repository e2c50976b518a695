"""Command-line interface; every subcommand is a thin shell over the
library (no geometry logic lives here).

JSON goes to stdout (or --out); human-readable tables only under --pretty.
Exit codes: 0 success, 1 usage error, 2 data/processing error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import dataset as ds
from .errors import PolyvisError
from .generators import (
    AugmentConfig,
    GenConfig,
    augment,
    gen_anchor,
    gen_convex,
    gen_convex_fan,
    gen_spiral,
    gen_star,
    gen_terrain,
    random_simple_polygon,
)
from .geometry import Polygon
from .metrics import dataset_score, edge_confusion, recognize, threshold_sweep
from .render import render_adjacency_svg, render_polygon_svg
from .sdf import SdfGrid, boundary_hausdorff, extract_contour, normalize_unit, rasterize_sdf, sdf_round_trip
from .triangulation import Triangulation, cdt, flip_path
from .visibility import VisGraph, graph_density, link_diameter, visibility_graph

CONFIG_ENV = "POLYVIS_CONFIG"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def _load_polygon(path) -> Polygon:
    data = _load_json(path)
    if isinstance(data, list):
        return Polygon(data)
    return Polygon(data["vertices"])


def _load_graph(path) -> VisGraph:
    data = _load_json(path)
    if "vis_b64" in data and data.get("vis_b64"):
        return VisGraph.from_b64(int(data["n"]), data["vis_b64"])
    return visibility_graph(Polygon(data["vertices"]))


def _load_triangulation(path) -> Triangulation:
    data = _load_json(path)
    if "diagonals" in data:
        return Triangulation(int(data["n"]), [tuple(d) for d in data["diagonals"]])
    if "tri_diagonals" in data and data["tri_diagonals"]:
        return Triangulation(int(data["n"]), [tuple(d) for d in data["tri_diagonals"]])
    return cdt(_load_polygon(path))


def _emit(payload, out: str | None, pretty: bool = False) -> None:
    text = json.dumps(payload, indent=2 if pretty else None, sort_keys=False)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _read_records(path) -> list[ds.DatasetRecord]:
    return ds.read_jsonl(path)


_FAMILY_GEN = {
    "random": lambda n, rng, args: random_simple_polygon(GenConfig(n=n), rng),
    "star": lambda n, rng, args: gen_star(n, rng),
    "terrain": lambda n, rng, args: gen_terrain(n, rng),
    "fan": lambda n, rng, args: gen_convex_fan(n, rng),
    "anchor": lambda n, rng, args: gen_anchor(n, rng),
    "spiral": lambda n, rng, args: gen_spiral(n, rng, min_diameter=args.spiral_min_diameter),
    "convex": lambda n, rng, args: gen_convex(n, rng),
}


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    records = []
    for k in range(args.count):
        poly = _FAMILY_GEN[args.family](args.n, rng, args)
        family = args.family if args.family in ds.FAMILIES else "random"
        records.append(ds.make_record(f"{args.family}-{k:06d}", poly, family, "train"))
    if args.count == 1 and not args.jsonl:
        _emit(records[0].to_dict(), args.out, args.pretty)
    else:
        if not args.out:
            for rec in records:
                print(json.dumps(rec.to_dict()))
        else:
            ds.write_jsonl(records, args.out)
    return 0


def cmd_vis(args) -> int:
    poly = _load_polygon(args.infile)
    g = visibility_graph(poly)
    payload = {
        "n": g.n,
        "vis_b64": g.to_b64(),
        "edges": g.edge_count(),
        "density": graph_density(g),
        "link_diameter": link_diameter(g),
    }
    _emit(payload, args.out, args.pretty)
    return 0


def cmd_sdf(args) -> int:
    poly = _load_polygon(args.infile)
    norm, frame = normalize_unit(poly, margin=args.margin)
    grid = rasterize_sdf(norm, args.res, frame)
    grid.save(args.out)
    if args.pgm:
        grid.to_pgm(args.pgm)
    return 0


def cmd_contour(args) -> int:
    grid = SdfGrid.load(args.infile)
    line = extract_contour(grid)
    _emit({"points": [[float(x), float(y)] for x, y in line]}, args.out, args.pretty)
    return 0


def cmd_roundtrip(args) -> int:
    poly = _load_polygon(args.infile)
    norm, _ = normalize_unit(poly, margin=args.margin)
    recovered = sdf_round_trip(poly, res=args.res, k=args.k, margin=args.margin)
    report = {
        "res": args.res,
        "k": args.k,
        "cell_width": 1.0 / args.res,
        "hausdorff": boundary_hausdorff(recovered, norm),
    }
    if args.k == poly.n:
        conf = edge_confusion(visibility_graph(recovered), visibility_graph(norm))
        report.update(conf.to_dict())
    if args.out_poly:
        rec = ds.make_record("roundtrip-000000", recovered, "random", "train")
        Path(args.out_poly).write_text(json.dumps(rec.to_dict()) + "\n")
    _emit(report, args.out, args.pretty)
    return 0


def cmd_tri(args) -> int:
    poly = _load_polygon(args.infile)
    t = cdt(poly)
    payload = {
        "n": t.n,
        "diagonals": [list(d) for d in t.sorted_diagonals()],
        "triangles": [list(tr) for tr in t.triangles],
    }
    _emit(payload, args.out, args.pretty)
    return 0


def cmd_flip_path(args) -> int:
    ta = _load_triangulation(args.a)
    tb = _load_triangulation(args.b)
    path = flip_path(ta, tb)
    path.validate()
    payload = {
        "n": ta.n,
        "length": path.length,
        "steps": [[list(d) for d in t.sorted_diagonals()] for t in path],
    }
    _emit(payload, args.out, args.pretty)
    return 0


def cmd_augment(args) -> int:
    poly = _load_polygon(args.infile)
    cfg = AugmentConfig(
        shear_range=(args.shear_lo, args.shear_hi),
        perturb_sigma=args.sigma,
        max_attempts=args.max_attempts,
        copies=args.copies,
    )
    rng = np.random.default_rng(args.seed)
    base = visibility_graph(poly)
    records = [
        ds.make_record(f"aug-{k:04d}", child, "random", "train", parent_id="input",
                       graph=base)
        for k, child in enumerate(augment(poly, cfg, rng))
    ]
    if args.out:
        ds.write_jsonl(records, args.out)
    else:
        for rec in records:
            print(json.dumps(rec.to_dict()))
    return 0


def cmd_pipeline(args) -> int:
    if args.config:
        cfg = ds.PipelineConfig.from_file(args.config)
    elif os.environ.get(CONFIG_ENV):
        cfg = ds.PipelineConfig.from_file(os.environ[CONFIG_ENV])
    else:
        cfg = ds.PipelineConfig()
    overrides = {}
    for name in (
        "n_vertices", "n_raw", "n_rebalanced", "copies", "seed",
        "reserve_per_diameter", "ood_per_family", "recognition_cases",
    ):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if overrides:
        cfg = ds.PipelineConfig.from_dict({**asdict(cfg), **overrides})
    manifest = ds.run_pipeline(cfg, args.out_dir, jobs=args.jobs)
    _emit(manifest, None, args.pretty)
    return 0


def _pair_graph(rec: ds.DatasetRecord) -> VisGraph:
    if rec.vis_b64:
        return rec.graph()
    return visibility_graph(rec.polygon())


def cmd_score(args) -> int:
    preds = _read_records(args.pred)
    truths = _read_records(args.truth)
    if len(preds) != len(truths):
        raise PolyvisError(f"prediction/truth counts differ: {len(preds)} vs {len(truths)}")
    pairs = [(_pair_graph(p), _pair_graph(t)) for p, t in zip(preds, truths)]
    agg = dataset_score(pairs, micro=args.micro)
    payload = {"cases": len(pairs), "averaging": "micro" if args.micro else "macro"}
    payload.update(agg.to_dict())
    _emit(payload, args.out, args.pretty)
    return 0


def cmd_recognize(args) -> int:
    candidates = [rec.polygon() for rec in _read_records(args.candidates)]
    target = _load_graph(args.target)
    verdict = recognize(candidates, target, args.threshold)
    _emit(
        {
            "is_valid": verdict.is_valid,
            "best_f1": verdict.best_f1,
            "best_index": verdict.best_index,
            "threshold": args.threshold,
        },
        args.out,
        args.pretty,
    )
    return 0


def cmd_sweep(args) -> int:
    cases = []
    with Path(args.cases).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            case = json.loads(line)
            candidates = [Polygon(c["vertices"]) for c in case["candidates"]]
            target = VisGraph.from_b64(int(case["target"]["n"]), case["target"]["vis_b64"])
            cases.append((candidates, target, bool(case["label"])))
    curve = threshold_sweep(cases)
    if args.csv:
        lines = ["threshold,accuracy"] + [f"{t:.2f},{a:.6f}" for t, a in curve]
        Path(args.csv).write_text("\n".join(lines) + "\n")
    best = max(curve, key=lambda ta: ta[1])
    _emit(
        {
            "cases": len(cases),
            "best_threshold": best[0],
            "best_accuracy": best[1],
            "curve": [[t, a] for t, a in curve],
        },
        args.out,
        args.pretty,
    )
    return 0


def cmd_render(args) -> int:
    poly = _load_polygon(args.infile)
    graph = visibility_graph(poly) if args.graph else None
    Path(args.out).write_text(render_polygon_svg(poly, graph=graph))
    if args.matrix:
        g = graph if graph is not None else visibility_graph(poly)
        Path(args.matrix).write_text(render_adjacency_svg(g))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polyvis", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--out", default=None, help="write JSON here instead of stdout")
        sp.add_argument("--pretty", action="store_true", help="indent JSON output")

    sp = sub.add_parser("gen", help="generate polygons")
    sp.add_argument("--n", type=int, default=25)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--family", choices=sorted(_FAMILY_GEN), default="random")
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--jsonl", action="store_true", help="force JSONL output")
    sp.add_argument("--spiral-min-diameter", type=int, default=6)
    add_common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("vis", help="visibility graph of a polygon file")
    sp.add_argument("--in", dest="infile", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_vis)

    sp = sub.add_parser("sdf", help="rasterize a polygon to a signed distance grid")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--res", type=int, default=40)
    sp.add_argument("--margin", type=float, default=0.05)
    sp.add_argument("--out", required=True, help="binary grid path (.sdf)")
    sp.add_argument("--pgm", default=None, help="also write a PGM preview")
    sp.set_defaults(func=cmd_sdf)

    sp = sub.add_parser("contour", help="zero level set of a stored SDF grid")
    sp.add_argument("--in", dest="infile", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_contour)

    sp = sub.add_parser("roundtrip", help="normalize/rasterize/contour/simplify report")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--res", type=int, default=40)
    sp.add_argument("--k", type=int, default=25)
    sp.add_argument("--margin", type=float, default=0.05)
    sp.add_argument("--out-poly", default=None, help="write the recovered polygon here")
    sp.add_argument("--report", action="store_true",
                    help="accepted for compatibility; the report is always emitted")
    add_common(sp)
    sp.set_defaults(func=cmd_roundtrip)

    sp = sub.add_parser("tri", help="constrained Delaunay triangulation")
    sp.add_argument("--in", dest="infile", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_tri)

    sp = sub.add_parser("flip-path", help="edge-flip path between two triangulations")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    add_common(sp)
    sp.set_defaults(func=cmd_flip_path)

    sp = sub.add_parser("augment", help="visibility-preserving augmentations")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--copies", type=int, default=20)
    sp.add_argument("--sigma", type=float, default=0.01)
    sp.add_argument("--shear-lo", type=float, default=-0.5)
    sp.add_argument("--shear-hi", type=float, default=0.5)
    sp.add_argument("--max-attempts", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("pipeline", help="full dataset build")
    sp.add_argument("--config", default=None, help=f"TOML/JSON config (or ${CONFIG_ENV})")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--jobs", type=int, default=1)
    for name in ("n-vertices", "n-raw", "n-rebalanced", "copies", "seed",
                 "reserve-per-diameter", "ood-per-family", "recognition-cases"):
        sp.add_argument(f"--{name}", type=int, default=None, dest=name.replace("-", "_"))
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("score", help="edge metrics over prediction/truth JSONL pairs")
    sp.add_argument("--pred", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--micro", action="store_true")
    add_common(sp)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("recognize", help="threshold classification of one graph")
    sp.add_argument("--candidates", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--threshold", type=float, default=0.85)
    add_common(sp)
    sp.set_defaults(func=cmd_recognize)

    sp = sub.add_parser("sweep", help="accuracy vs F1 threshold over recognition cases")
    sp.add_argument("--cases", required=True, help="JSONL of {target, candidates, label}")
    sp.add_argument("--csv", default=None, help="write threshold,accuracy CSV here")
    add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("render", help="SVG rendering of a polygon")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--graph", action="store_true", help="overlay visible edges in green")
    sp.add_argument("--matrix", default=None, help="also write the adjacency matrix SVG")
    sp.set_defaults(func=cmd_render)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PolyvisError as exc:
        print(f"polyvis: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"polyvis: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
