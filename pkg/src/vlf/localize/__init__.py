"""Span localization: packing, vision features, and the span model."""

from .localizer import (
    LocalizerExample,
    SpanLocalizer,
    decode_span,
    gold_packed_positions,
    span_logits,
    span_to_timestamps,
    train_rc,
)
from .packing import SEPARATOR, PackedInput, pack_input
from .vision import (
    FrameFeatureTrack,
    MeanPoolVisionEncoder,
    VisionEncoder,
    align_frames,
    fuse_rows_vjp,
    fuse_vision,
    fuse_vision_vjp,
    init_fusion_params,
    load_track,
    save_track,
    vision_encode,
)

__all__ = [
    "FrameFeatureTrack",
    "LocalizerExample",
    "MeanPoolVisionEncoder",
    "PackedInput",
    "SEPARATOR",
    "SpanLocalizer",
    "VisionEncoder",
    "align_frames",
    "decode_span",
    "fuse_rows_vjp",
    "fuse_vision",
    "fuse_vision_vjp",
    "gold_packed_positions",
    "init_fusion_params",
    "load_track",
    "pack_input",
    "save_track",
    "span_logits",
    "span_to_timestamps",
    "train_rc",
    "vision_encode",
]
