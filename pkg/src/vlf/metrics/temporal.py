"""Interval-overlap metrics for predicted vs gold time spans."""

from __future__ import annotations

from ..errors import InputError


def _bounds(span) -> tuple[float, float]:
    if hasattr(span, "start_s"):
        return float(span.start_s), float(span.end_s)
    start, end = span
    return float(start), float(end)


def iou(pred, gold) -> float:
    """Intersection over union of two intervals, in [0, 1].

    Two equal zero-length spans count as 1; distinct points count as 0.
    """
    ps, pe = _bounds(pred)
    gs, ge = _bounds(gold)
    if pe < ps or ge < gs:
        raise InputError("spans must not end before they start")
    inter = max(0.0, min(pe, ge) - max(ps, gs))
    union = max(pe, ge) - min(ps, gs)
    if union <= 0.0:
        return 1.0 if ps == gs else 0.0
    return inter / union


def r_at_1(pairs, mu: float) -> float:
    """Percentage of pairs whose IoU strictly exceeds ``mu``."""
    if not 0.0 < mu < 1.0:
        raise InputError(f"threshold must lie in (0, 1), got {mu}")
    pairs = list(pairs)
    if not pairs:
        raise InputError("cannot score an empty prediction set")
    hits = sum(1 for pred, gold in pairs if iou(pred, gold) > mu)
    return 100.0 * hits / len(pairs)


def miou(pairs) -> float:
    """Arithmetic mean IoU over all pairs."""
    pairs = list(pairs)
    if not pairs:
        raise InputError("cannot score an empty prediction set")
    return sum(iou(pred, gold) for pred, gold in pairs) / len(pairs)
