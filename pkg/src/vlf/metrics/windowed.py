"""Window-relaxed F1 over segment-boundary tags.

The match unit is B-Seg positions. A predicted boundary at i matches an
unconsumed gold boundary at j when |i - j| is within the window radius;
matching is greedy, one-to-one, left to right. Under the default
semantics w = 1 means exact position match (radius w - 1); the
alternative reading (radius w) sits behind the ``semantics`` flag.
"""

from __future__ import annotations

from ..errors import InputError

RADIUS_W_MINUS_1 = "radius_w_minus_1"
RADIUS_W = "radius_w"


def _window_radius(w: int, semantics: str) -> int:
    if w < 1:
        raise InputError(f"window must be >= 1, got {w}")
    if semantics == RADIUS_W_MINUS_1:
        return w - 1
    if semantics == RADIUS_W:
        return w
    raise InputError(f"unknown window semantics {semantics!r}")


def boundary_match_counts(
    pred: list[str], gold: list[str], w: int, semantics: str = RADIUS_W_MINUS_1
) -> tuple[int, int, int]:
    """(matched, predicted boundaries, gold boundaries) for one pair."""
    if len(pred) != len(gold):
        raise InputError(
            f"tag sequences differ in length: {len(pred)} vs {len(gold)}"
        )
    radius = _window_radius(w, semantics)
    pred_b = [i for i, t in enumerate(pred) if t == "B-Seg"]
    gold_b = [i for i, t in enumerate(gold) if t == "B-Seg"]
    used = [False] * len(gold_b)
    matched = 0
    for i in pred_b:
        for gj, j in enumerate(gold_b):
            if not used[gj] and abs(i - j) <= radius:
                used[gj] = True
                matched += 1
                break
    return matched, len(pred_b), len(gold_b)


def prf_from_counts(matched: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_gold == 0:
        return 1.0, 1.0, 1.0
    precision = matched / n_pred if n_pred else 0.0
    recall = matched / n_gold if n_gold else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)


def windowed_f1(
    pred: list[str], gold: list[str], w: int, semantics: str = RADIUS_W_MINUS_1
) -> tuple[float, float, float]:
    """(precision, recall, F1) of boundary predictions at window ``w``."""
    return prf_from_counts(*boundary_match_counts(pred, gold, w, semantics))
