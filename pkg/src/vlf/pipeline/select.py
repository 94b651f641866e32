"""Selecting instructional videos by subtitle text classification.

Any classifier exposing the three-label contract can plug in; the
built-in baseline is a bag-of-words linear model.
"""

from __future__ import annotations

import logging
from typing import Protocol

from sklearn.feature_extraction.text import CountVectorizer
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import Pipeline

from ..subtitles import parse_subtitles
from .corpus import VideoRecord

logger = logging.getLogger(__name__)

MEDICAL_INSTRUCTIONAL = "Medical Instructional"
MEDICAL_NON_INSTRUCTIONAL = "Medical Non-instructional"
NON_MEDICAL = "Non-Medical"
VIDEO_LABELS = (MEDICAL_INSTRUCTIONAL, MEDICAL_NON_INSTRUCTIONAL, NON_MEDICAL)


class TextClassifier(Protocol):
    def predict(self, texts: list[str]) -> list[str]: ...


class BagOfWordsVideoClassifier:
    """CountVectorizer + logistic regression over subtitle text."""

    def __init__(self, seed: int = 0):
        self.pipeline = Pipeline(
            [
                ("counts", CountVectorizer()),
                ("linear", LogisticRegression(max_iter=1000, random_state=seed)),
            ]
        )

    def fit(self, texts: list[str], labels: list[str]) -> "BagOfWordsVideoClassifier":
        unknown = set(labels) - set(VIDEO_LABELS)
        if unknown:
            raise ValueError(f"unknown video labels {sorted(unknown)}")
        self.pipeline.fit(texts, labels)
        return self

    def predict(self, texts: list[str]) -> list[str]:
        return list(self.pipeline.predict(texts))


def subtitle_text(record: VideoRecord) -> str:
    with open(record.subtitle_path, "rb") as fh:
        data = fh.read()
    fmt = "webvtt" if record.subtitle_path.endswith(".vtt") else "srt"
    cues = parse_subtitles(data, fmt)
    return " ".join(c.text for c in cues)


def select_instructional(
    videos: list[VideoRecord], classifier: TextClassifier
) -> list[VideoRecord]:
    """Keep videos the classifier labels as medical instructional.

    Videos whose subtitles cannot be read are skipped and logged.
    """
    readable: list[tuple[VideoRecord, str]] = []
    for record in videos:
        try:
            readable.append((record, subtitle_text(record)))
        except Exception as exc:
            logger.warning("skipping %s: unreadable subtitles (%s)", record.video_id, exc)
    if not readable:
        return []
    labels = classifier.predict([text for _, text in readable])
    return [
        record
        for (record, _), label in zip(readable, labels)
        if label == MEDICAL_INSTRUCTIONAL
    ]
