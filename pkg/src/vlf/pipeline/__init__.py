"""Dataset pipeline: corpus, selection, generation, stats, review."""

from .build import (
    MAX_QUESTION_WORDS,
    MIN_ANSWER_SECONDS,
    MIN_QUESTION_WORDS,
    VqaTriplet,
    dataset_stats,
    derive_gold_tags,
    finalize_question,
    generate_dataset,
    ingest_video,
    make_splits,
    read_dataset,
    repair_tags,
    stats_text,
    tag_runs,
    triplet_violations,
    write_dataset,
)
from .corpus import (
    VideoRecord,
    gold_question,
    load_gold_qa,
    load_manifest,
    make_mini_corpus,
    save_manifest,
)
from .review import (
    DEFAULT_REVIEW_SIZE,
    DuplicateJudgment,
    JudgmentStore,
    build_review_set,
    load_review_set,
    sample_for_review,
    save_review_set,
)
from .select import (
    MEDICAL_INSTRUCTIONAL,
    VIDEO_LABELS,
    BagOfWordsVideoClassifier,
    TextClassifier,
    select_instructional,
    subtitle_text,
)
from .service import create_app

__all__ = [
    "BagOfWordsVideoClassifier",
    "DEFAULT_REVIEW_SIZE",
    "DuplicateJudgment",
    "JudgmentStore",
    "MAX_QUESTION_WORDS",
    "MEDICAL_INSTRUCTIONAL",
    "MIN_ANSWER_SECONDS",
    "MIN_QUESTION_WORDS",
    "TextClassifier",
    "VIDEO_LABELS",
    "VideoRecord",
    "VqaTriplet",
    "build_review_set",
    "create_app",
    "dataset_stats",
    "derive_gold_tags",
    "finalize_question",
    "generate_dataset",
    "gold_question",
    "ingest_video",
    "load_gold_qa",
    "load_manifest",
    "load_review_set",
    "make_mini_corpus",
    "make_splits",
    "read_dataset",
    "repair_tags",
    "sample_for_review",
    "save_manifest",
    "save_review_set",
    "select_instructional",
    "stats_text",
    "subtitle_text",
    "tag_runs",
    "triplet_violations",
    "write_dataset",
]
