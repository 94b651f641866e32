"""Text-overlap metrics for generated questions."""

from __future__ import annotations

import math
from collections import Counter
from typing import NamedTuple

from ..errors import InputError


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: list[str], references: list[list[str]], n: int = 4) -> float:
    """Geometric mean of modified n-gram precisions with brevity penalty.

    Higher-order zero counts take add-1 smoothing; a zero unigram
    precision (or an empty candidate) scores 0. Orders longer than the
    candidate are skipped.
    """
    if n not in (1, 2, 3, 4):
        raise InputError(f"BLEU order must be 1..4, got {n}")
    if not references or not all(references):
        raise InputError("need at least one non-empty reference")
    if not candidate:
        return 0.0
    precisions = []
    for k in range(1, n + 1):
        cand = _ngrams(candidate, k)
        total = sum(cand.values())
        if total == 0:
            continue
        best: Counter = Counter()
        for ref in references:
            ref_counts = _ngrams(ref, k)
            for gram, count in ref_counts.items():
                best[gram] = max(best[gram], count)
        matched = sum(min(c, best[gram]) for gram, c in cand.items())
        if matched == 0:
            if k == 1:
                return 0.0
            precisions.append(1.0 / (total + 1.0))
        else:
            precisions.append(matched / total)
    c = len(candidate)
    r = min((len(ref) for ref in references), key=lambda L: (abs(L - c), L))
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(sum(math.log(p) for p in precisions) / len(precisions))


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge(candidate: list[str], reference: list[str], variant) -> PRF:
    """ROUGE-1/2 n-gram overlap or ROUGE-L via longest common subsequence."""
    if not reference:
        raise InputError("reference must be non-empty")
    variant = str(variant).upper()
    if variant in ("1", "2"):
        k = int(variant)
        cand = _ngrams(candidate, k)
        ref = _ngrams(reference, k)
        overlap = sum(min(c, ref[g]) for g, c in cand.items())
        n_cand = sum(cand.values())
        n_ref = sum(ref.values())
        precision = overlap / n_cand if n_cand else 0.0
        recall = overlap / n_ref if n_ref else 0.0
    elif variant == "L":
        lcs = _lcs_length(candidate, reference)
        precision = lcs / len(candidate) if candidate else 0.0
        recall = lcs / len(reference)
    else:
        raise InputError(f"unknown ROUGE variant {variant!r}")
    if precision + recall == 0.0:
        return PRF(precision, recall, 0.0)
    return PRF(precision, recall, 2.0 * precision * recall / (precision + recall))
