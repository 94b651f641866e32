"""Subtitle parsing and the word-level timeline.

Supported formats are SRT (``HH:MM:SS,mmm``) and WebVTT
(``HH:MM:SS.mmm``). Parsed cues are normalized: markup tags stripped,
whitespace collapsed, cues sorted by start time. The word timeline
divides each cue's span among its words proportionally to character
length, so word spans tile the cue span exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import InputError, ParseError

_TAG_RE = re.compile(r"<[^>]*>")
_SRT_TIME_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")
_VTT_TIME_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d)\.(\d{3})$")


@dataclass(frozen=True)
class TimeSpan:
    """Closed interval in seconds; start never exceeds end."""

    start_s: float
    end_s: float

    def __post_init__(self):
        if not (self.start_s == self.start_s and self.end_s == self.end_s):
            raise InputError("time span contains NaN")
        if self.start_s < 0:
            raise InputError(f"time span starts before zero: {self.start_s}")
        if self.end_s < self.start_s:
            raise InputError(
                f"time span ends ({self.end_s}) before it starts ({self.start_s})"
            )

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s

    def intersects(self, other: "TimeSpan") -> bool:
        return max(self.start_s, other.start_s) <= min(self.end_s, other.end_s)

    def overlaps(self, other: "TimeSpan") -> bool:
        """Positive-length intersection; point spans use containment.

        Unlike :meth:`intersects`, spans that merely touch at a boundary
        instant do not overlap, so cue-aligned windows never leak the
        neighboring cue's edge word.
        """
        if self.duration == 0.0 or other.duration == 0.0:
            return self.intersects(other)
        return max(self.start_s, other.start_s) < min(self.end_s, other.end_s)


@dataclass(frozen=True)
class Cue:
    text: str
    span: TimeSpan


CueList = list


def _parse_timestamp(token: str, fmt: str, line_no: int) -> float:
    pattern = _SRT_TIME_RE if fmt == "srt" else _VTT_TIME_RE
    m = pattern.match(token)
    if m is None:
        raise ParseError(f"malformed {fmt} timestamp {token!r}", line=line_no)
    h, mi, s, ms = (int(g) for g in m.groups())
    return (h * 3_600_000 + mi * 60_000 + s * 1000 + ms) / 1000.0


def _format_timestamp(seconds: float, fmt: str) -> str:
    total_ms = round(seconds * 1000)
    h, rem = divmod(total_ms, 3_600_000)
    mi, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    sep = "," if fmt == "srt" else "."
    return f"{h:02d}:{mi:02d}:{s:02d}{sep}{ms:03d}"


def _clean_text(lines: list[str]) -> str:
    joined = " ".join(lines)
    return " ".join(_TAG_RE.sub(" ", joined).split())


def parse_subtitles(data: bytes | str, format: str) -> list[Cue]:
    """Parse SRT or WebVTT bytes into a sorted cue list.

    Empty input yields an empty list. Malformed timestamp lines raise
    :class:`ParseError` carrying the 1-based line number.
    """
    if format not in ("srt", "webvtt"):
        raise InputError(f"unknown subtitle format {format!r}")
    if isinstance(data, bytes):
        text = data.decode("utf-8-sig")
    else:
        text = data.lstrip("﻿")
    lines = text.splitlines()

    cues: list[Cue] = []
    i = 0
    n = len(lines)
    skip_block = False
    while i < n:
        line = lines[i].strip()
        if not line:
            skip_block = False
            i += 1
            continue
        if format == "webvtt" and i == 0 and line.startswith("WEBVTT"):
            i += 1
            continue
        if format == "webvtt" and line.split(":")[0] in ("NOTE", "STYLE", "REGION"):
            skip_block = True
            i += 1
            continue
        if "-->" in line:
            skip_block = False
            left, _, right = line.partition("-->")
            start_tok = left.strip()
            # WebVTT allows cue settings after the end timestamp.
            right_parts = right.strip().split()
            if not right_parts:
                raise ParseError("missing end timestamp", line=i + 1)
            end_tok = right_parts[0]
            start = _parse_timestamp(start_tok, format, i + 1)
            end = _parse_timestamp(end_tok, format, i + 1)
            if end < start:
                raise ParseError(
                    f"cue ends ({end_tok}) before it starts ({start_tok})", line=i + 1
                )
            i += 1
            block: list[str] = []
            while i < n and lines[i].strip():
                block.append(lines[i].strip())
                i += 1
            cue_text = _clean_text(block)
            if cue_text:
                cues.append(Cue(cue_text, TimeSpan(start, end)))
            continue
        if skip_block:
            i += 1
            continue
        # SRT counters and WebVTT cue identifiers sit on their own line.
        i += 1

    cues.sort(key=lambda c: (c.span.start_s, c.span.end_s))
    return cues


def serialize_subtitles(cues: Iterable[Cue], format: str) -> str:
    """Render cues back to SRT or WebVTT text."""
    if format not in ("srt", "webvtt"):
        raise InputError(f"unknown subtitle format {format!r}")
    blocks = []
    for idx, cue in enumerate(cues, start=1):
        stamp = (
            f"{_format_timestamp(cue.span.start_s, format)} --> "
            f"{_format_timestamp(cue.span.end_s, format)}"
        )
        if format == "srt":
            blocks.append(f"{idx}\n{stamp}\n{cue.text}")
        else:
            blocks.append(f"{stamp}\n{cue.text}")
    body = "\n\n".join(blocks)
    if format == "webvtt":
        return "WEBVTT\n\n" + body + ("\n" if body else "")
    return body + ("\n" if body else "")


def dedup_overlap(cues: list[Cue], min_shared_words: int = 3) -> list[Cue]:
    """Strip text repeated from the previous cue's tail.

    When the next cue starts with the longest suffix of the previous
    cue's words and that overlap reaches ``min_shared_words``, the
    repeated prefix is removed; cues emptied this way are dropped.
    """
    out: list[Cue] = []
    for cue in cues:
        words = cue.text.split()
        if out:
            prev_words = out[-1].text.split()
            limit = min(len(prev_words), len(words))
            for k in range(limit, min_shared_words - 1, -1):
                if prev_words[-k:] == words[:k]:
                    words = words[k:]
                    break
        if words:
            out.append(Cue(" ".join(words), cue.span))
    return out


@dataclass
class WordTimeline:
    """One entry per word: its span, and the cue it came from."""

    words: list[str]
    spans: list[TimeSpan]
    cue_index: list[int]
    cue_spans: list[TimeSpan]

    def __post_init__(self):
        if not (len(self.words) == len(self.spans) == len(self.cue_index)):
            raise InputError("timeline columns must have equal length")

    def __len__(self) -> int:
        return len(self.words)

    def cue_span_of_word(self, word_idx: int) -> TimeSpan:
        return self.cue_spans[self.cue_index[word_idx]]


def build_word_timeline(cues: list[Cue]) -> WordTimeline:
    """Split cues into words with character-proportional spans."""
    words: list[str] = []
    spans: list[TimeSpan] = []
    cue_index: list[int] = []
    cue_spans: list[TimeSpan] = []
    for ci, cue in enumerate(cues):
        cue_spans.append(cue.span)
        tokens = cue.text.split()
        if not tokens:
            continue
        total = sum(len(t) for t in tokens)
        duration = cue.span.duration
        cum = 0
        prev_edge = cue.span.start_s
        for ti, token in enumerate(tokens):
            cum += len(token)
            if ti == len(tokens) - 1:
                edge = cue.span.end_s
            else:
                # min() guards against float drift past the cue end.
                edge = min(
                    cue.span.start_s + duration * (cum / total), cue.span.end_s
                )
            words.append(token)
            spans.append(TimeSpan(prev_edge, edge))
            cue_index.append(ci)
            prev_edge = edge
    return WordTimeline(words, spans, cue_index, cue_spans)
