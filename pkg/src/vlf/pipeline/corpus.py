"""Corpus manifests and the bundled synthetic mini corpus.

The mini corpus stands in for a real video collection: ten synthetic
"videos", each an SRT subtitle file interleaving filler chatter with
procedure blocks whose boundaries are known, plus gold questions and
answer spans, and one random feature track per video.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..jsonl import read_jsonl, write_jsonl
from ..seeding import rng as seeded_rng
from ..subtitles import Cue, TimeSpan, serialize_subtitles

CATEGORIES = ("Personal Care and Style", "Health", "Sports and Fitness")


@dataclass
class VideoRecord:
    video_id: str
    subtitle_path: str
    duration_s: float
    category: str = "Health"
    feature_path: str | None = None
    url: str | None = None

    def __post_init__(self):
        if self.duration_s <= 0:
            raise InputError(f"video {self.video_id}: duration must be positive")


def save_manifest(records: list[VideoRecord], path: str | Path) -> None:
    rows = []
    for r in records:
        row = {
            "video_id": r.video_id,
            "subtitle_path": r.subtitle_path,
            "duration_s": r.duration_s,
            "category": r.category,
        }
        if r.feature_path:
            row["feature_path"] = r.feature_path
        if r.url:
            row["url"] = r.url
        rows.append(row)
    Path(path).write_text(
        json.dumps(rows, indent=2, sort_keys=True), encoding="utf-8"
    )


def load_manifest(path: str | Path) -> list[VideoRecord]:
    path = Path(path)
    base = path.parent
    records = []
    for row in json.loads(path.read_text(encoding="utf-8")):
        sub = base / row["subtitle_path"]
        feature = row.get("feature_path")
        records.append(
            VideoRecord(
                video_id=row["video_id"],
                subtitle_path=str(sub),
                duration_s=float(row["duration_s"]),
                category=row.get("category", "Health"),
                feature_path=str(base / feature) if feature else None,
                url=row.get("url"),
            )
        )
    return records


_FILLER = [
    "welcome back to the channel everyone .",
    "thanks for watching and please subscribe .",
    "today we have a really useful video for you .",
    "do not forget to leave a comment below .",
    "this channel posts new videos every single week .",
    "let us know what topics you want to see next .",
]

_PROCEDURES = [
    ("clean", "wound"),
    ("stretch", "hamstring"),
    ("apply", "bandage"),
    ("wrap", "ankle"),
    ("massage", "shoulder"),
    ("ice", "knee"),
    ("measure", "pulse"),
    ("brace", "wrist"),
    ("rinse", "burn"),
    ("support", "elbow"),
]

_ANSWER_TEMPLATES = [
    "first you gently {verb} the {noun} with steady hands .",
    "then you {verb} the {noun} again working slowly outward .",
    "keep holding the {noun} firmly while you {verb} it once more .",
    "finally check the {noun} carefully after you {verb} it .",
]


def _sentences_for_topic(verb: str, noun: str, count: int) -> list[str]:
    return [
        _ANSWER_TEMPLATES[i % len(_ANSWER_TEMPLATES)].format(verb=verb, noun=noun)
        for i in range(count)
    ]


def gold_question(verb: str, noun: str) -> str:
    return f"how do you {verb} the {noun} safely?"


def make_mini_corpus(
    out_dir: str | Path,
    n_videos: int = 10,
    seed: int = 0,
    with_tracks: bool = True,
    d_v: int = 16,
    words_per_second: float = 2.0,
) -> Path:
    """Write the synthetic corpus; returns the manifest path."""
    out = Path(out_dir)
    (out / "subs").mkdir(parents=True, exist_ok=True)
    if with_tracks:
        (out / "tracks").mkdir(exist_ok=True)
    gen = seeded_rng(seed, "mini-corpus")
    records: list[VideoRecord] = []
    qa_rows: list[dict] = []
    for v in range(n_videos):
        video_id = f"vid{v:03d}"
        n_answers = 1 + int(gen.integers(0, 3))
        topics = list(gen.choice(len(_PROCEDURES), size=n_answers, replace=False))
        blocks: list[tuple[str | None, list[str]]] = []
        blocks.append((None, list(gen.choice(_FILLER, size=2, replace=False))))
        for t in topics:
            verb, noun = _PROCEDURES[int(t)]
            blocks.append(
                (gold_question(verb, noun), _sentences_for_topic(verb, noun, 3))
            )
            blocks.append((None, list(gen.choice(_FILLER, size=2, replace=False))))

        cues: list[Cue] = []
        clock = 0.0
        for question, sentences in blocks:
            block_start = clock
            for sentence in sentences:
                n_words = len(sentence.split())
                duration = n_words / words_per_second
                cues.append(Cue(sentence, TimeSpan(clock, clock + duration)))
                clock += duration
            if question is not None:
                qa_rows.append(
                    {
                        "video_id": video_id,
                        "question": question,
                        "answer_start_s": block_start,
                        "answer_end_s": clock,
                    }
                )
        duration_s = clock + 1.0
        sub_rel = f"subs/{video_id}.srt"
        (out / sub_rel).write_text(serialize_subtitles(cues, "srt"), encoding="utf-8")
        feature_rel = None
        if with_tracks:
            from ..localize import FrameFeatureTrack, save_track

            n_frames = math.ceil(duration_s)
            features = gen.normal(0.0, 1.0, size=(n_frames, d_v)).astype(np.float32)
            feature_rel = f"tracks/{video_id}.vftr"
            save_track(FrameFeatureTrack(features, duration_s), out / feature_rel)
        records.append(
            VideoRecord(
                video_id=video_id,
                subtitle_path=sub_rel,
                duration_s=duration_s,
                category=CATEGORIES[v % len(CATEGORIES)],
                feature_path=feature_rel,
            )
        )
    manifest = out / "manifest.json"
    save_manifest(records, manifest)
    write_jsonl(out / "qa.jsonl", qa_rows)
    return manifest


def load_gold_qa(path: str | Path) -> list[dict]:
    return list(read_jsonl(path))
