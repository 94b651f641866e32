"""Packing question and subtitle words into one scored sequence."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InputError
from ..subtitles import WordTimeline

SEPARATOR = "<sep>"


@dataclass
class PackedInput:
    """Question tokens, one separator, then (possibly truncated) subtitle.

    ``word_map[p]`` is the timeline word index behind position ``p``, or
    -1 for question and separator positions.
    """

    tokens: list[str]
    word_map: list[int]
    n_question: int

    def __len__(self) -> int:
        return len(self.tokens)

    def subtitle_positions(self) -> list[int]:
        return [p for p, w in enumerate(self.word_map) if w >= 0]

    def position_of_word(self, word_idx: int) -> int | None:
        offset = self.n_question + 1
        p = offset + word_idx
        if p < len(self.tokens) and self.word_map[p] == word_idx:
            return p
        return None


def pack_input(
    question_tokens: list[str], timeline: WordTimeline, max_len: int = 1024
) -> PackedInput:
    """Pack question and subtitle, truncating only the subtitle tail."""
    if not question_tokens:
        raise InputError("question must be non-empty")
    n_q = len(question_tokens)
    if n_q + 1 >= max_len:
        raise InputError(
            f"question of {n_q} tokens leaves no room for subtitle words "
            f"under max length {max_len}"
        )
    keep = min(len(timeline), max_len - n_q - 1)
    tokens = list(question_tokens) + [SEPARATOR] + timeline.words[:keep]
    word_map = [-1] * (n_q + 1) + list(range(keep))
    return PackedInput(tokens, word_map, n_q)
