"""Binary classification F1 for the video selector baseline."""

from __future__ import annotations

from ..errors import InputError


def cls_f1(preds, golds, positive_label) -> float:
    """F1 of the positive class; degenerate denominators score 0."""
    preds = list(preds)
    golds = list(golds)
    if len(preds) != len(golds):
        raise InputError(f"got {len(preds)} predictions for {len(golds)} labels")
    if not preds:
        raise InputError("cannot score an empty prediction set")
    tp = sum(1 for p, g in zip(preds, golds) if p == positive_label and g == positive_label)
    fp = sum(1 for p, g in zip(preds, golds) if p == positive_label and g != positive_label)
    fn = sum(1 for p, g in zip(preds, golds) if p != positive_label and g == positive_label)
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)
