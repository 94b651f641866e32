"""Review sampling and the append-only judgment store."""

from __future__ import annotations

import datetime as _dt
import json
import threading
from pathlib import Path

from ..errors import InputError
from ..jsonl import dumps_record
from ..metrics import Judgment
from ..qgen import answer_window
from ..subtitles import TimeSpan
from .build import VqaTriplet, ingest_video
from .corpus import VideoRecord

DEFAULT_REVIEW_SIZE = 308


def sample_for_review(
    triplets: list[VqaTriplet], n: int = DEFAULT_REVIEW_SIZE, seed: int = 0
) -> list[VqaTriplet]:
    """Uniform sample without replacement, stable under the seed."""
    if n > len(triplets):
        raise InputError(f"cannot sample {n} from {len(triplets)} triplets")
    import numpy as np

    gen = np.random.default_rng(seed)
    chosen = sorted(gen.choice(len(triplets), size=n, replace=False).tolist())
    return [triplets[i] for i in chosen]


def build_review_set(
    triplets: list[VqaTriplet],
    videos: list[VideoRecord],
    n: int = DEFAULT_REVIEW_SIZE,
    seed: int = 0,
    excerpt_margin_s: float = 5.0,
    excerpt_max_words: int = 60,
) -> list[dict]:
    """Review cards: sampled triplets with subtitle excerpts and links."""
    by_id = {v.video_id: v for v in videos}
    sampled = sample_for_review(triplets, n, seed)
    timelines: dict[str, object] = {}
    cards = []
    for i, triplet in enumerate(sampled):
        record = by_id.get(triplet.video_id)
        excerpt = ""
        if record is not None:
            if triplet.video_id not in timelines:
                timelines[triplet.video_id], _ = ingest_video(record)
            timeline = timelines[triplet.video_id]
            widened = TimeSpan(
                max(0.0, triplet.answer.start_s - excerpt_margin_s),
                triplet.answer.end_s + excerpt_margin_s,
            )
            excerpt = " ".join(answer_window(timeline, widened)[:excerpt_max_words])
        url = record.url if record and record.url else f"video://{triplet.video_id}"
        cards.append(
            {
                "sample_id": f"s{i:05d}",
                "video_id": triplet.video_id,
                "question": triplet.question,
                "start_s": triplet.answer.start_s,
                "end_s": triplet.answer.end_s,
                "subtitle_excerpt": excerpt,
                "video_link": url,
            }
        )
    return cards


def save_review_set(cards: list[dict], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(cards, indent=2, sort_keys=True), encoding="utf-8"
    )


def load_review_set(path: str | Path) -> list[dict]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


class DuplicateJudgment(Exception):
    """Same annotator already judged this sample on this criterion."""


class JudgmentStore:
    """Append-only JSON-lines log with duplicate detection.

    A single lock serializes appends; replaying the file reconstructs
    the store exactly.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._seen: set[tuple[str, str, str]] = set()
        self._judgments: list[Judgment] = []
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        row = json.loads(line)
                        j = Judgment(**row)
                        self._judgments.append(j)
                        self._seen.add((j.sample_id, j.annotator_id, j.criterion))

    def __len__(self) -> int:
        return len(self._judgments)

    def all(self) -> list[Judgment]:
        return list(self._judgments)

    def judged_criteria(self, sample_id: str, annotator_id: str) -> set[str]:
        return {
            j.criterion
            for j in self._judgments
            if j.sample_id == sample_id and j.annotator_id == annotator_id
        }

    def append(self, judgment: Judgment) -> Judgment:
        key = (judgment.sample_id, judgment.annotator_id, judgment.criterion)
        with self._lock:
            if key in self._seen:
                raise DuplicateJudgment(
                    f"{judgment.annotator_id} already judged {judgment.sample_id} "
                    f"on {judgment.criterion}"
                )
            if not judgment.timestamp:
                stamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
                judgment = Judgment(
                    judgment.sample_id,
                    judgment.annotator_id,
                    judgment.criterion,
                    judgment.label,
                    stamp,
                )
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(dumps_record(judgment.__dict__) + "\n")
            self._judgments.append(judgment)
            self._seen.add(key)
        return judgment
