"""Edge-classification metrics, best-of-K selection, and the recognition
threshold classifier.

The positive class is "visible edge"; metrics run over all unordered vertex
pairs. Each graph is scored individually and dataset results are the
unweighted (macro) mean of the per-graph metrics; a micro option (pooled
confusion counts) is available behind a flag. Precision, recall and F1 fall
back to 0 when their denominator is 0, except for the vacuous case of two
graphs with no visible edges at all, which scores 1 (impossible for real
polygons, whose boundary cycle is always present).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, SizeMismatch
from .geometry import Polygon, is_simple
from .visibility import VisGraph, visibility_graph


@dataclass(frozen=True)
class EdgeConfusion:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _from_counts(tp: int, fp: int, tn: int, fn: int) -> EdgeConfusion:
    total = tp + fp + tn + fn
    if tp + fp + fn == 0:
        return EdgeConfusion(tp, fp, tn, fn, 1.0, 1.0, 1.0, 1.0)
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EdgeConfusion(tp, fp, tn, fn, accuracy, precision, recall, f1)


def edge_confusion(pred: VisGraph, truth: VisGraph) -> EdgeConfusion:
    """Per-pair confusion counts between two graphs on the same vertices."""
    if pred.n != truth.n:
        raise SizeMismatch(f"graph sizes differ: {pred.n} vs {truth.n}")
    iu = np.triu_indices(pred.n, k=1)
    p = pred.adj[iu]
    t = truth.adj[iu]
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    fn = int(np.sum(~p & t))
    tn = int(np.sum(~p & ~t))
    return _from_counts(tp, fp, tn, fn)


def dataset_score(pairs, micro: bool = False) -> EdgeConfusion:
    """Average metrics over (pred, truth) graph pairs.

    Macro (default): mean of the per-graph metrics, counts summed for
    reference. Micro: metrics recomputed from the pooled counts.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("dataset_score needs at least one pair")
    per = [edge_confusion(p, t) for p, t in pairs]
    tp = sum(c.tp for c in per)
    fp = sum(c.fp for c in per)
    tn = sum(c.tn for c in per)
    fn = sum(c.fn for c in per)
    if micro:
        return _from_counts(tp, fp, tn, fn)
    m = len(per)
    return EdgeConfusion(
        tp,
        fp,
        tn,
        fn,
        sum(c.accuracy for c in per) / m,
        sum(c.precision for c in per) / m,
        sum(c.recall for c in per) / m,
        sum(c.f1 for c in per) / m,
    )


def best_of_k(candidates, target: VisGraph) -> tuple[Polygon, float, int]:
    """Candidate whose visibility graph has the highest F1 against the
    target; ties broken toward the lowest index. Non-simple candidates are
    skipped; raises EmptyInput when no candidate qualifies."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyInput("best_of_k needs at least one candidate")
    best_poly, best_f1, best_idx = None, -1.0, -1
    for idx, cand in enumerate(candidates):
        if cand.n != target.n or not is_simple(cand):
            continue
        score = edge_confusion(visibility_graph(cand), target).f1
        if score > best_f1:
            best_poly, best_f1, best_idx = cand, score, idx
    if best_poly is None:
        raise EmptyInput("no simple candidate with matching vertex count")
    return best_poly, best_f1, best_idx


@dataclass(frozen=True)
class RecognitionVerdict:
    is_valid: bool
    best_f1: float
    best_index: int


def recognize(candidates, target: VisGraph, threshold: float) -> RecognitionVerdict:
    """Valid iff some simple candidate scores F1 >= threshold against the
    target graph; non-simple candidates never qualify."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    candidates = list(candidates)
    if not candidates:
        raise EmptyInput("recognize needs at least one candidate")
    try:
        _, best_f1, best_idx = best_of_k(candidates, target)
    except EmptyInput:
        return RecognitionVerdict(False, 0.0, -1)
    return RecognitionVerdict(best_f1 >= threshold, best_f1, best_idx)


def threshold_sweep(cases, thresholds=None) -> list[tuple[float, float]]:
    """Recognition accuracy across an F1-threshold grid.

    `cases` is a list of (candidates, target, label) with label True for
    valid targets. Best-F1 per case is computed once and reused across the
    grid (default 0.50..1.00 step 0.01).
    """
    cases = list(cases)
    if not cases:
        raise EmptyInput("threshold_sweep needs at least one case")
    if thresholds is None:
        thresholds = np.round(np.arange(0.50, 1.0 + 1e-9, 0.01), 2)
    scored = []
    for candidates, target, label in cases:
        try:
            _, best_f1, _ = best_of_k(candidates, target)
            scored.append((best_f1, True, bool(label)))
        except EmptyInput:
            scored.append((0.0, False, bool(label)))
    curve = []
    for t in thresholds:
        correct = sum(
            1
            for best_f1, any_simple, label in scored
            if (any_simple and best_f1 >= t) == label
        )
        curve.append((float(t), correct / len(scored)))
    return curve
