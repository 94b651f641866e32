"""Topic-aware segmentation of a word timeline.

A segmenter is anything that proposes cut indices; the built-in splits
on sentence-final punctuation and merges sentences up to a word budget.
Segments always partition the timeline, and their spans are recomputed
from the first and last word they cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from .errors import InputError, IntegrityError
from .subtitles import TimeSpan, WordTimeline

_SENTENCE_END = (".", "!", "?")


@dataclass(frozen=True)
class Segment:
    """Half-open word interval with its aligned time span."""

    word_range: tuple[int, int]
    span: TimeSpan
    text: str


class TopicSegmenter(Protocol):
    """Boundary-index provider: cut points strictly inside (0, n)."""

    def boundaries(self, timeline: WordTimeline) -> list[int]: ...


class PunctuationBudgetSegmenter:
    """Split at sentence-final punctuation, merge up to a word budget.

    Sentences longer than the budget are chunked to budget-sized pieces
    first; consecutive pieces then merge until the running word count
    reaches the budget.
    """

    def __init__(self, word_budget: int = 40):
        if word_budget < 1:
            raise InputError(f"word budget must be positive, got {word_budget}")
        self.word_budget = word_budget

    def boundaries(self, timeline: WordTimeline) -> list[int]:
        n = len(timeline)
        sentence_ends = [
            i + 1 for i, w in enumerate(timeline.words) if w.endswith(_SENTENCE_END)
        ]
        if not sentence_ends or sentence_ends[-1] != n:
            sentence_ends.append(n)

        pieces: list[int] = []
        prev = 0
        for end in sentence_ends:
            length = end - prev
            while length > self.word_budget:
                prev += self.word_budget
                pieces.append(prev)
                length -= self.word_budget
            pieces.append(end)
            prev = end

        cuts: list[int] = []
        count = 0
        prev = 0
        for end in pieces:
            count += end - prev
            prev = end
            if count >= self.word_budget and end != n:
                cuts.append(end)
                count = 0
        return cuts


def _check_boundaries(cuts: list[int], n: int) -> list[int]:
    previous = 0
    for cut in cuts:
        if not previous < cut < n:
            raise IntegrityError(
                f"segmenter produced non-partition boundary {cut} for {n} words"
            )
        previous = cut
    return cuts


def _segment_from_range(timeline: WordTimeline, lo: int, hi: int) -> Segment:
    span = TimeSpan(timeline.spans[lo].start_s, timeline.spans[hi - 1].end_s)
    return Segment((lo, hi), span, " ".join(timeline.words[lo:hi]))


def topic_segment(
    timeline: WordTimeline, segmenter: TopicSegmenter | None = None
) -> list[Segment]:
    """Partition the timeline into ordered, non-overlapping segments."""
    n = len(timeline)
    if n == 0:
        raise InputError("cannot segment an empty timeline")
    segmenter = segmenter or PunctuationBudgetSegmenter()
    cuts = _check_boundaries(list(segmenter.boundaries(timeline)), n)
    edges = [0] + cuts + [n]
    return [
        _segment_from_range(timeline, lo, hi) for lo, hi in zip(edges, edges[1:])
    ]


def align_timestamps(
    segments: list[Segment], timeline: WordTimeline
) -> list[Segment]:
    """Recompute each segment's span from its first and last word."""
    out = []
    for seg in segments:
        lo, hi = seg.word_range
        if not (0 <= lo < hi <= len(timeline)):
            raise InputError(f"segment range {seg.word_range} outside timeline")
        out.append(_segment_from_range(timeline, lo, hi))
    return out


def segment_records(video_id: str, segments: list[Segment]) -> list[dict]:
    """JSON-lines rows: one object per segment."""
    return [
        {
            "video_id": video_id,
            "index": i,
            "start_s": seg.span.start_s,
            "end_s": seg.span.end_s,
            "text": seg.text,
        }
        for i, seg in enumerate(segments)
    ]
