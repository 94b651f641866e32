"""Evaluation metrics: temporal IoU, windowed F1, BLEU/ROUGE, agreement."""

from .agreement import CRITERIA, Judgment, agreement_table, agreement_text, validate_label
from .classify import cls_f1
from .report import EvalReport, format_table
from .temporal import iou, miou, r_at_1
from .text import PRF, bleu, rouge
from .windowed import (
    RADIUS_W,
    RADIUS_W_MINUS_1,
    boundary_match_counts,
    prf_from_counts,
    windowed_f1,
)

__all__ = [
    "CRITERIA",
    "EvalReport",
    "Judgment",
    "PRF",
    "RADIUS_W",
    "RADIUS_W_MINUS_1",
    "agreement_table",
    "agreement_text",
    "bleu",
    "boundary_match_counts",
    "cls_f1",
    "format_table",
    "iou",
    "miou",
    "prf_from_counts",
    "r_at_1",
    "rouge",
    "validate_label",
    "windowed_f1",
]
