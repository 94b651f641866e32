"""Dataset generation: tag segments, group runs, generate questions.

Each emitted record is a (video, question, answer span) triplet that
passed all validity gates: question length within [5, 19] words, answer
at least 5 seconds long and contained in the video. Failures are
isolated per video and collected into a manifest instead of aborting
the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import InputError
from ..jsonl import read_jsonl, write_jsonl
from ..metrics import EvalReport, format_table
from ..qgen import QuestionGenerator
from ..segmentation import PunctuationBudgetSegmenter, Segment, topic_segment
from ..subtitles import TimeSpan, build_word_timeline, dedup_overlap, parse_subtitles
from .corpus import VideoRecord

MIN_QUESTION_WORDS = 5
MAX_QUESTION_WORDS = 19
MIN_ANSWER_SECONDS = 5.0


@dataclass(frozen=True)
class VqaTriplet:
    video_id: str
    question: str
    answer: TimeSpan
    provenance: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "video_id": self.video_id,
            "question": self.question,
            "answer_start_s": self.answer.start_s,
            "answer_end_s": self.answer.end_s,
            "provenance": self.provenance,
        }

    @classmethod
    def from_record(cls, row: dict) -> "VqaTriplet":
        return cls(
            video_id=row["video_id"],
            question=row["question"],
            answer=TimeSpan(row["answer_start_s"], row["answer_end_s"]),
            provenance=dict(row.get("provenance", {})),
        )


def triplet_violations(triplet: VqaTriplet, video_duration_s: float) -> list[str]:
    """Invariant failures for one candidate triplet; empty means valid."""
    problems = []
    n_words = len(triplet.question.split())
    if not MIN_QUESTION_WORDS <= n_words <= MAX_QUESTION_WORDS:
        problems.append(f"question has {n_words} words")
    if triplet.answer.duration < MIN_ANSWER_SECONDS:
        problems.append(f"answer lasts {triplet.answer.duration:.2f}s")
    if triplet.answer.start_s < 0 or triplet.answer.end_s > video_duration_s + 1e-9:
        problems.append("answer extends outside the video")
    return problems


def repair_tags(tags: list[str]) -> list[str]:
    """Turn leading or orphan I-Seg tags into B-Seg before span grouping."""
    out = []
    for i, tag in enumerate(tags):
        if tag == "I-Seg" and (i == 0 or tags[i - 1] == "O"):
            out.append("B-Seg")
        else:
            out.append(tag)
    return out


def tag_runs(tags: list[str]) -> list[tuple[int, int]]:
    """Half-open segment-index runs: one B-Seg plus trailing I-Seg tags."""
    runs = []
    i = 0
    while i < len(tags):
        if tags[i] == "B-Seg":
            j = i + 1
            while j < len(tags) and tags[j] == "I-Seg":
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def derive_gold_tags(segments: list[Segment], answers: list[TimeSpan]) -> list[str]:
    """Label segments against known answer spans by majority time overlap."""
    assignment: list[int | None] = []
    for seg in segments:
        best = None
        best_overlap = 0.0
        for k, ans in enumerate(answers):
            overlap = max(
                0.0,
                min(seg.span.end_s, ans.end_s) - max(seg.span.start_s, ans.start_s),
            )
            if overlap > best_overlap:
                best, best_overlap = k, overlap
        duration = max(seg.span.duration, 1e-9)
        assignment.append(best if best_overlap / duration > 0.5 else None)
    tags = []
    for i, a in enumerate(assignment):
        if a is None:
            tags.append("O")
        elif i == 0 or assignment[i - 1] != a:
            tags.append("B-Seg")
        else:
            tags.append("I-Seg")
    return tags


def ingest_video(record: VideoRecord, word_budget: int = 40):
    """Subtitles to timeline and segments for one video."""
    data = Path(record.subtitle_path).read_bytes()
    fmt = "webvtt" if record.subtitle_path.endswith(".vtt") else "srt"
    cues = dedup_overlap(parse_subtitles(data, fmt))
    timeline = build_word_timeline(cues)
    if len(timeline) == 0:
        return timeline, []
    segments = topic_segment(timeline, PunctuationBudgetSegmenter(word_budget))
    return timeline, segments


def finalize_question(tokens: list[str]) -> str | None:
    """Clamp to the length bounds and normalize the trailing question mark."""
    tokens = list(tokens)[:MAX_QUESTION_WORDS]
    if len(tokens) < MIN_QUESTION_WORDS:
        return None
    text = " ".join(tokens)
    return text if text.endswith("?") else text + "?"


def generate_dataset(
    videos: list[VideoRecord],
    tagger_mode: str,
    tagger,
    generator: QuestionGenerator,
    word_budget: int = 40,
    max_window_tokens: int = 256,
    template_id: str | None = None,
    seed: int = 0,
) -> tuple[list[VqaTriplet], list[dict]]:
    """Run the full per-video pipeline; failures are isolated per video."""
    if tagger_mode not in ("crf", "prompt"):
        raise InputError(f"unknown tagger mode {tagger_mode!r}")
    triplets: list[VqaTriplet] = []
    failures: list[dict] = []
    provenance: dict = {"tagger": tagger_mode}
    if tagger_mode == "prompt" and template_id is not None:
        provenance["template_id"] = template_id
    for record in sorted(videos, key=lambda r: r.video_id):
        stage = "ingest"
        try:
            timeline, segments = ingest_video(record, word_budget)
            if not segments:
                continue
            stage = "tag"
            tags = repair_tags(tagger.predict_one([s.text for s in segments]))
            stage = "question"
            for lo, hi in tag_runs(tags):
                span = TimeSpan(segments[lo].span.start_s, segments[hi - 1].span.end_s)
                window = " ".join(s.text for s in segments[lo:hi]).split()
                tokens = generator.generate(window[:max_window_tokens])
                question = finalize_question(tokens)
                if question is None:
                    continue
                candidate = VqaTriplet(
                    record.video_id, question, span, dict(provenance)
                )
                if not triplet_violations(candidate, record.duration_s):
                    triplets.append(candidate)
        except Exception as exc:
            failures.append(
                {"video_id": record.video_id, "stage": stage, "error": str(exc)}
            )
    return triplets, failures


def write_dataset(triplets: list[VqaTriplet], path: str | Path) -> None:
    write_jsonl(path, [t.to_record() for t in triplets])


def make_splits(
    triplets: list[VqaTriplet],
    out_dir: str | Path,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> dict[str, list[str]]:
    """Split by video id (never by triplet) and write one JSON list per split."""
    import json

    import numpy as np

    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InputError(f"split ratios must sum to 1, got {ratios}")
    video_ids = sorted({t.video_id for t in triplets})
    order = np.random.default_rng(seed).permutation(len(video_ids))
    shuffled = [video_ids[i] for i in order]
    n = len(shuffled)
    n_train = int(round(ratios[0] * n))
    n_val = int(round(ratios[1] * n))
    splits = {
        "train": sorted(shuffled[:n_train]),
        "val": sorted(shuffled[n_train : n_train + n_val]),
        "test": sorted(shuffled[n_train + n_val :]),
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, ids in splits.items():
        (out / f"{name}.json").write_text(
            json.dumps(ids, indent=2), encoding="utf-8"
        )
    return splits


def read_dataset(path: str | Path) -> list[VqaTriplet]:
    return [VqaTriplet.from_record(row) for row in read_jsonl(path)]


def _stats(values) -> dict[str, float]:
    values = list(values)
    return {
        "mean": sum(values) / len(values),
        "max": float(max(values)),
        "min": float(min(values)),
    }


def dataset_stats(triplets: list[VqaTriplet], videos: list[VideoRecord]) -> EvalReport:
    """Corpus statistics: counts plus question/subtitle/answer lengths."""
    if not triplets:
        raise InputError("cannot compute statistics for an empty dataset")
    contributing = {t.video_id for t in triplets}
    question_words = [len(t.question.split()) for t in triplets]
    answer_seconds = [t.answer.duration for t in triplets]
    by_id = {v.video_id: v for v in videos}
    subtitle_words = []
    for vid in sorted(contributing):
        record = by_id.get(vid)
        if record is None:
            continue
        timeline, _ = ingest_video(record)
        subtitle_words.append(len(timeline))
    values: dict[str, float] = {
        "question_answer_count": float(len(triplets)),
        "video_count": float(len(contributing)),
    }
    for prefix, stats in (
        ("question_len", _stats(question_words)),
        ("subtitle_len", _stats(subtitle_words) if subtitle_words else {}),
        ("answer_len_s", _stats(answer_seconds)),
    ):
        for key, value in stats.items():
            values[f"{prefix}_{key}"] = value
    return EvalReport(name="dataset_stats", values=values)


def stats_text(report: EvalReport) -> str:
    """Render the statistics block as an aligned two-column table."""
    rows = [
        ("# Question-Answer", "question_answer_count", "{:.0f}"),
        ("# Videos", "video_count", "{:.0f}"),
        ("Mean Question Length", "question_len_mean", "{:.2f}"),
        ("Max Question Length", "question_len_max", "{:.0f}"),
        ("Min Question Length", "question_len_min", "{:.0f}"),
        ("Mean Subtitle Length", "subtitle_len_mean", "{:.2f}"),
        ("Max Subtitle Length", "subtitle_len_max", "{:.0f}"),
        ("Min Subtitle Length", "subtitle_len_min", "{:.0f}"),
        ("Mean Visual Answer Length", "answer_len_s_mean", "{:.2f}"),
        ("Max Visual Answer Length", "answer_len_s_max", "{:.2f}"),
        ("Min Visual Answer Length", "answer_len_s_min", "{:.2f}"),
    ]
    table_rows = []
    for label, key, fmt in rows:
        if key in report.values:
            table_rows.append([label, fmt.format(report.values[key])])
    return format_table(["Statistic", "Value"], table_rows)
