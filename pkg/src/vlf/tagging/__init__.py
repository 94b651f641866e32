"""Segment taggers: CRF sequence decoding and prompt-based labeling."""

from .crf import (
    N_TAGS,
    TAGS,
    crf_log_partition,
    crf_nll_grad,
    crf_score,
    indices_to_tags,
    tags_to_indices,
    viterbi,
)
from .crf_tagger import (
    CrfSegmentTagger,
    contextualize,
    emission_scores,
    encode_segments,
)
from .encoders import (
    MASK_TOKEN,
    SEP_TOKEN,
    HashedRecurrentEncoder,
    SegmentEncoder,
    hash_bucket,
)
from .prompt import (
    DEFAULT_VERBALIZER,
    PromptConfig,
    PromptSegmentTagger,
    apply_prompt,
    load_templates,
    prompt_label_distribution,
    verbalize,
)

__all__ = [
    "CrfSegmentTagger",
    "DEFAULT_VERBALIZER",
    "HashedRecurrentEncoder",
    "MASK_TOKEN",
    "N_TAGS",
    "PromptConfig",
    "PromptSegmentTagger",
    "SEP_TOKEN",
    "SegmentEncoder",
    "TAGS",
    "apply_prompt",
    "contextualize",
    "crf_log_partition",
    "crf_nll_grad",
    "crf_score",
    "emission_scores",
    "encode_segments",
    "hash_bucket",
    "indices_to_tags",
    "load_templates",
    "prompt_label_distribution",
    "tags_to_indices",
    "verbalize",
    "viterbi",
]
