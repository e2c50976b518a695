"""End-to-end dataset pipeline: generate, rebalance, augment, split, persist.

Records are one JSON object per line. Vertices are stored at full float
precision so every stored graph recomputes exactly from its polygon;
`verify_record` checks that referential integrity. Visibility graphs travel
as base64-packed strict-lower-triangle bitstrings, triangulations as sorted
diagonal lists. SDF grids, when requested, are written as sidecar binary
files referenced by path (see `polyvis.sdf`).

Determinism: every record derives its RNG stream from (seed, realm, index),
so identical configs produce byte-identical JSONL files regardless of job
count or platform.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    AugmentExhausted,
    ClassConstructionFailed,
    HoleNotInside,
    InsufficientPool,
    IterationLimit,
    NonSimpleInput,
)
from .generators import (
    AugmentConfig,
    GenConfig,
    augment,
    gen_anchor,
    gen_convex_fan,
    gen_spiral,
    gen_star,
    gen_terrain,
    random_simple_polygon,
    rotate_augment,
)
from .geometry import Polygon
from .sdf import normalize_unit, rasterize_sdf
from .triangulation import cdt
from .visibility import (
    HolePolygon,
    VisGraph,
    graph_density,
    link_diameter,
    visibility_graph,
    visibility_graph_with_hole,
)

FAMILIES = ("random", "star", "terrain", "fan", "anchor", "spiral", "hole_invalid")
SPLITS = ("train", "test_in", "test_out", "recognition")

# RNG stream realms; (seed, realm, index) seeds one record's generator
_REALM_RAW = 0
_REALM_AUG = 1
_REALM_OOD = 2
_REALM_RECOG = 3


@dataclass
class DatasetRecord:
    id: str
    family: str
    split: str
    n: int
    vertices: list
    vis_b64: str
    tri_diagonals: list
    link_diameter: int
    density: float
    parent_id: str | None = None
    hole_vertices: list | None = None
    sdf_path: str | None = None

    def polygon(self) -> Polygon:
        return Polygon(self.vertices)

    def graph(self) -> VisGraph:
        return VisGraph.from_b64(self.n, self.vis_b64)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetRecord":
        return cls(**d)


def make_record(rec_id: str, poly: Polygon, family: str, split: str,
                parent_id: str | None = None, graph: VisGraph | None = None) -> DatasetRecord:
    g = graph if graph is not None else visibility_graph(poly)
    tri = cdt(poly)
    return DatasetRecord(
        id=rec_id,
        family=family,
        split=split,
        n=poly.n,
        vertices=[[float(x), float(y)] for x, y in poly.pts],
        vis_b64=g.to_b64(),
        tri_diagonals=[list(d) for d in tri.sorted_diagonals()],
        link_diameter=link_diameter(g),
        density=graph_density(g),
        parent_id=parent_id,
    )


def verify_record(rec: DatasetRecord) -> bool:
    """Stored graphs recompute exactly from the stored geometry."""
    poly = rec.polygon()
    if rec.family == "hole_invalid":
        hp = HolePolygon(poly, Polygon(rec.hole_vertices))
        g = visibility_graph_with_hole(hp)
    else:
        g = visibility_graph(poly)
    if g.to_b64() != rec.vis_b64:
        return False
    if rec.family == "hole_invalid":
        return True
    tri = cdt(poly)
    return [list(d) for d in tri.sorted_diagonals()] == rec.tri_diagonals


def write_jsonl(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=True) + "\n")


def read_jsonl(path) -> list[DatasetRecord]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(DatasetRecord.from_dict(json.loads(line)))
    return out


@dataclass(frozen=True)
class PipelineConfig:
    """Scaled-down mirror of the full dataset construction.

    The reference scale is 60,000 raw polygons resampled to 18,500 and
    augmented 20x; the desk-scale defaults below are one tenth of the raw
    and rebalanced counts with augmentation off (copies=0) so a single core
    finishes in minutes. All knobs are file- and CLI-configurable.
    """

    n_vertices: int = 25
    n_raw: int = 6000
    n_rebalanced: int = 1850
    copies: int = 0
    seed: int = 0
    shear_lo: float = -0.5
    shear_hi: float = 0.5
    perturb_sigma: float = 0.01
    max_attempts: int = 200
    sigma_decay: float = 0.5
    decay_every: int = 25
    aug_kind: str = "shear"  # "shear" (visibility track) or "rotate" (triangulation track)
    reserve_per_diameter: int = 5
    reserve_min_bucket: int | None = 25  # buckets smaller than this are exempt; None = strict
    rebalance_max_ratio: float | None = 2.0
    ood_per_family: int = 10
    recognition_cases: int = 50
    spiral_min_diameter: int = 6
    sdf_dir: str | None = None
    sdf_res: int = 40

    def __post_init__(self):
        if self.n_rebalanced > self.n_raw:
            raise ValueError("n_rebalanced must be <= n_raw")
        if self.copies < 0:
            raise ValueError("copies must be >= 0")
        if self.aug_kind not in ("shear", "rotate"):
            raise ValueError("aug_kind must be 'shear' or 'rotate'")
        if self.recognition_cases % 2 != 0:
            raise ValueError("recognition_cases must be even (balanced labels)")

    def aug_config(self) -> AugmentConfig:
        return AugmentConfig(
            shear_range=(self.shear_lo, self.shear_hi),
            perturb_sigma=self.perturb_sigma,
            max_attempts=self.max_attempts,
            copies=max(self.copies, 1),
            sigma_decay=self.sigma_decay,
            decay_every=self.decay_every,
        )

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        valid = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - valid
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        return cls.from_dict(load_config_file(path))


def load_config_file(path) -> dict:
    """Read a TOML or JSON mapping (by extension, JSON fallback)."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text.decode("utf-8"))
    return json.loads(text.decode("utf-8"))


def _record_rng(seed: int, realm: int, index: int) -> np.random.Generator:
    return np.random.default_rng((seed, realm, index))


def build_one_raw(cfg: PipelineConfig, index: int) -> DatasetRecord:
    rng = _record_rng(cfg.seed, _REALM_RAW, index)
    gen_cfg = GenConfig(n=cfg.n_vertices)
    while True:
        try:
            poly = random_simple_polygon(gen_cfg, rng)
            break
        except IterationLimit:
            continue  # fresh points from the same stream
    return make_record(f"raw-{index:06d}", poly, "random", "train")


def _raw_chunk(args) -> list[dict]:
    cfg_dict, lo, hi = args
    cfg = PipelineConfig(**cfg_dict)
    return [build_one_raw(cfg, i).to_dict() for i in range(lo, hi)]


def build_raw(cfg: PipelineConfig, jobs: int = 1) -> list[DatasetRecord]:
    """n_raw random-polygon records; deterministic per (seed, index)."""
    if jobs <= 1:
        return [build_one_raw(cfg, i) for i in range(cfg.n_raw)]
    from concurrent.futures import ProcessPoolExecutor

    chunk = math.ceil(cfg.n_raw / (jobs * 4))
    ranges = [
        (asdict(cfg), lo, min(lo + chunk, cfg.n_raw)) for lo in range(0, cfg.n_raw, chunk)
    ]
    out: list[DatasetRecord] = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_raw_chunk, ranges):
            out.extend(DatasetRecord.from_dict(d) for d in part)
    return out


def rebalance_by_diameter(records, target_total: int,
                          max_ratio: float | None = None) -> list[DatasetRecord]:
    """Downsample link-diameter buckets toward equal counts.

    Each bucket contributes min(size, ceil(target/#buckets)); shortfall goes
    one at a time to the bucket with the most remaining capacity, overshoot
    comes off the largest takes. With `max_ratio`, buckets too small to keep
    the max/min kept-count ratio within bound are dropped entirely and their
    quota redistributed (the flat-histogram guarantee used by the pipeline).
    """
    records = list(records)
    if not records:
        return []
    buckets: dict[int, list[DatasetRecord]] = {}
    for rec in records:
        buckets.setdefault(rec.link_diameter, []).append(rec)
    active = sorted(buckets)

    def takes_for(active_list):
        sizes = {d: len(buckets[d]) for d in active_list}
        if not active_list:
            return {}
        quota = math.ceil(target_total / len(active_list))
        take = {d: min(sizes[d], quota) for d in active_list}
        total = sum(take.values())
        while total < target_total:
            open_b = [d for d in active_list if take[d] < sizes[d]]
            if not open_b:
                break
            d = max(open_b, key=lambda d: (sizes[d] - take[d], -d))
            take[d] += 1
            total += 1
        while total > target_total:
            d = max(active_list, key=lambda d: (take[d], d))
            take[d] -= 1
            total -= 1
        return take

    take = takes_for(active)
    if max_ratio is not None:
        while len(active) > 1:
            mx = max(take.values())
            mn = min(take.values())
            if mn * max_ratio >= mx:
                break
            drop = min(active, key=lambda d: (take[d], -d))
            active.remove(drop)
            take = takes_for(active)
    return [rec for d in active for rec in buckets[d][: take[d]]]


def _augment_one(cfg: PipelineConfig, parent: DatasetRecord, copy_idx: int,
                 global_idx: int) -> DatasetRecord:
    rng = _record_rng(cfg.seed, _REALM_AUG, global_idx)
    poly = parent.polygon()
    child_id = f"{parent.id}-a{copy_idx:02d}"
    if cfg.aug_kind == "shear":
        aug_cfg = replace(cfg.aug_config(), copies=1)
        child = augment(poly, aug_cfg, rng)[0]
        rec = make_record(child_id, child, parent.family, "train", parent_id=parent.id,
                          graph=VisGraph.from_b64(parent.n, parent.vis_b64))
        return rec
    # rotation track: both the visibility graph and the CDT diagonals are
    # similarity-invariant; reject float-degenerate angles
    target_tri = parent.tri_diagonals
    target_graph = parent.vis_b64
    for _ in range(cfg.max_attempts):
        child = rotate_augment(poly, float(rng.uniform(0.0, 2.0 * math.pi)))
        rec = make_record(child_id, child, parent.family, "train", parent_id=parent.id)
        if rec.vis_b64 == target_graph and rec.tri_diagonals == target_tri:
            return rec
    raise AugmentExhausted(f"no invariant rotation for {parent.id} in {cfg.max_attempts} tries")


def _aug_chunk(args) -> tuple[list[dict], list[str]]:
    cfg_dict, parents, lo, hi = args
    cfg = PipelineConfig(**cfg_dict)
    out, failures = [], []
    for g in range(lo, hi):
        parent = DatasetRecord.from_dict(parents[g // cfg.copies])
        try:
            out.append(_augment_one(cfg, parent, g % cfg.copies, g).to_dict())
        except AugmentExhausted as exc:
            failures.append(str(exc))
    return out, failures


def expand_augment(records, cfg: PipelineConfig, jobs: int = 1) -> list[DatasetRecord]:
    """`copies` children per record, graphs bit-identical to the parent.

    Per-record AugmentExhausted is collected, reported on stderr, and the
    pipeline continues without that child.
    """
    records = list(records)
    total = len(records) * cfg.copies
    if total == 0:
        return []
    children: list[DatasetRecord] = []
    failures: list[str] = []
    if jobs <= 1:
        for g in range(total):
            parent = records[g // cfg.copies]
            try:
                children.append(_augment_one(cfg, parent, g % cfg.copies, g))
            except AugmentExhausted as exc:
                failures.append(str(exc))
    else:
        from concurrent.futures import ProcessPoolExecutor

        parent_dicts = [r.to_dict() for r in records]
        chunk = math.ceil(total / (jobs * 4))
        ranges = [
            (asdict(cfg), parent_dicts, lo, min(lo + chunk, total))
            for lo in range(0, total, chunk)
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part, errs in pool.map(_aug_chunk, ranges):
                children.extend(DatasetRecord.from_dict(d) for d in part)
                failures.extend(errs)
    if failures:
        import sys

        print(f"expand_augment: {len(failures)} copies failed", file=sys.stderr)
    return children


def reserve_in_distribution(records, reserve: int,
                            min_bucket: int | None = None) -> tuple[list, list]:
    """Set aside `reserve` records per link-diameter bucket for the
    in-distribution test split; the rest stay in the training pool.

    Buckets smaller than `min_bucket` are exempt (their diameters go
    untested); with min_bucket=None every nonempty bucket must supply the
    reserve or InsufficientPool is raised.
    """
    records = list(records)
    buckets: dict[int, int] = Counter(r.link_diameter for r in records)
    eligible = set()
    for d, size in sorted(buckets.items()):
        if min_bucket is not None and size < min_bucket:
            continue
        if size < reserve:
            raise InsufficientPool(
                f"diameter bucket {d} holds {size} records, reserve needs {reserve}"
            )
        eligible.add(d)
    reserved, remaining = [], []
    taken: Counter = Counter()
    for rec in records:
        d = rec.link_diameter
        if d in eligible and taken[d] < reserve:
            taken[d] += 1
            reserved.append(replace(rec, split="test_in"))
        else:
            remaining.append(rec)
    return reserved, remaining


_OOD_GENERATORS = {
    "star": lambda n, rng, cfg: gen_star(n, rng),
    "terrain": lambda n, rng, cfg: gen_terrain(n, rng),
    "fan": lambda n, rng, cfg: gen_convex_fan(n, rng),
    "anchor": lambda n, rng, cfg: gen_anchor(n, rng),
    "spiral": lambda n, rng, cfg: gen_spiral(n, rng, min_diameter=cfg.spiral_min_diameter),
}


def build_ood(cfg: PipelineConfig) -> list[DatasetRecord]:
    """Out-of-distribution test set from the five typed families."""
    out = []
    idx = 0
    for family in ("star", "terrain", "fan", "anchor", "spiral"):
        make = _OOD_GENERATORS[family]
        for k in range(cfg.ood_per_family):
            rng = _record_rng(cfg.seed, _REALM_OOD, idx)
            poly = make(cfg.n_vertices, rng, cfg)
            out.append(make_record(f"{family}-{k:04d}", poly, family, "test_out"))
            idx += 1
    return out


def make_hole_case(n: int, rng: np.random.Generator, min_blocked: int = 3) -> HolePolygon:
    """Random simple outer polygon plus a small convex hole strictly inside
    it that blocks at least `min_blocked` sightlines."""
    from .sdf import signed_distance

    gen_cfg = GenConfig(n=n)
    for _ in range(200):
        try:
            outer = random_simple_polygon(gen_cfg, rng)
        except IterationLimit:
            continue
        base = visibility_graph(outer)
        for _ in range(50):
            center = rng.uniform(-0.8, 0.8, size=2)
            radius = rng.uniform(0.08, 0.22)
            if signed_distance(outer, [center])[0] > -(radius + 0.03):
                continue
            k = int(rng.integers(3, 6))
            phase = rng.uniform(0.0, 2.0 * math.pi)
            ang = phase + np.arange(k) * 2.0 * math.pi / k
            hole = Polygon(center + radius * np.column_stack([np.cos(ang), np.sin(ang)]))
            try:
                hp = HolePolygon(outer, hole)
            except (HoleNotInside, NonSimpleInput):
                continue
            blocked = int(base.edge_count() - visibility_graph_with_hole(hp).edge_count())
            if blocked >= min_blocked:
                return hp
    raise ClassConstructionFailed("could not construct a blocking hole polygon")


def build_recognition_set(cfg: PipelineConfig) -> list[DatasetRecord]:
    """Balanced targets for the recognition task: half hole-polygon graphs
    (invalid), half visibility graphs of simple polygons (valid)."""
    half = cfg.recognition_cases // 2
    out = []
    for k in range(half):
        rng = _record_rng(cfg.seed, _REALM_RECOG, k)
        hp = make_hole_case(cfg.n_vertices, rng)
        g = visibility_graph_with_hole(hp)
        rec = DatasetRecord(
            id=f"hole-{k:04d}",
            family="hole_invalid",
            split="recognition",
            n=hp.outer.n,
            vertices=[[float(x), float(y)] for x, y in hp.outer.pts],
            vis_b64=g.to_b64(),
            tri_diagonals=[],
            link_diameter=link_diameter(g),
            density=graph_density(g),
            hole_vertices=[[float(x), float(y)] for x, y in hp.hole.pts],
        )
        out.append(rec)
    for k in range(half):
        rng = _record_rng(cfg.seed, _REALM_RECOG, half + k)
        gen_cfg = GenConfig(n=cfg.n_vertices)
        while True:
            try:
                poly = random_simple_polygon(gen_cfg, rng)
                break
            except IterationLimit:
                continue
        out.append(make_record(f"validrec-{k:04d}", poly, "random", "recognition"))
    return out


def build_test_sets(raw_records, cfg: PipelineConfig):
    """(test_in, test_out, recognition) splits; test_in comes out of the raw
    pool, which the caller should shrink accordingly (see run_pipeline)."""
    reserved, _ = reserve_in_distribution(
        raw_records, cfg.reserve_per_diameter, cfg.reserve_min_bucket
    )
    return reserved, build_ood(cfg), build_recognition_set(cfg)


def run_pipeline(cfg: PipelineConfig, out_dir, jobs: int = 1) -> dict:
    """Full build: raw pool -> in-distribution reserve -> rebalance ->
    augment -> typed OOD set -> recognition set; writes JSONL files plus a
    manifest and returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    raw = build_raw(cfg, jobs=jobs)
    reserved, pool = reserve_in_distribution(
        raw, cfg.reserve_per_diameter, cfg.reserve_min_bucket
    )
    train_base = rebalance_by_diameter(pool, cfg.n_rebalanced, cfg.rebalance_max_ratio)
    children = expand_augment(train_base, cfg, jobs=jobs) if cfg.copies > 0 else []
    train = train_base + children
    test_out = build_ood(cfg) if cfg.ood_per_family > 0 else []
    recognition = build_recognition_set(cfg) if cfg.recognition_cases > 0 else []

    if cfg.sdf_dir is not None:
        sdf_dir = out_dir / cfg.sdf_dir
        sdf_dir.mkdir(parents=True, exist_ok=True)
        stamped = []
        for rec in train:
            norm, frame = normalize_unit(rec.polygon())
            grid = rasterize_sdf(norm, cfg.sdf_res, frame)
            rel = f"{cfg.sdf_dir}/{rec.id}.sdf"
            grid.save(out_dir / rel)
            stamped.append(replace(rec, sdf_path=rel))
        train = stamped

    write_jsonl(train, out_dir / "train.jsonl")
    write_jsonl(reserved, out_dir / "test_in.jsonl")
    write_jsonl(test_out, out_dir / "test_out.jsonl")
    write_jsonl(recognition, out_dir / "recognition.jsonl")

    manifest = {
        "config": asdict(cfg),
        "counts": {
            "raw": len(raw),
            "train_base": len(train_base),
            "train": len(train),
            "test_in": len(reserved),
            "test_out": len(test_out),
            "recognition": len(recognition),
        },
        "diameter_histogram": {
            "raw": dict(sorted(Counter(r.link_diameter for r in raw).items())),
            "train_base": dict(sorted(Counter(r.link_diameter for r in train_base).items())),
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
