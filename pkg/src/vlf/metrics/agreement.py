"""Annotator-agreement summaries over review judgments.

Four review criteria, each with its own label set. Because the source
never states whether agreement means unanimity or majority, the report
carries both views: per criterion, the label distribution over samples
where every annotator agreed, and the distribution of per-sample
majority labels (ties excluded).
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

from ..errors import SchemaError
from .report import EvalReport, format_table

CRITERIA: dict[str, tuple[str, ...]] = {
    "instructional": ("Yes", "No"),
    "segment_answer": ("Yes", "No", "Partial"),
    "question_quality": ("Correct", "Incorrect", "Partial Correct"),
    "alignment": ("Yes", "No", "Partial"),
}


@dataclass(frozen=True)
class Judgment:
    sample_id: str
    annotator_id: str
    criterion: str
    label: str
    timestamp: str = ""

    def __post_init__(self):
        validate_label(self.criterion, self.label)


def validate_label(criterion: str, label: str) -> None:
    if criterion not in CRITERIA:
        raise SchemaError(
            f"unknown criterion {criterion!r}; expected one of {sorted(CRITERIA)}"
        )
    allowed = CRITERIA[criterion]
    if label not in allowed:
        raise SchemaError(
            f"label {label!r} not allowed for {criterion!r}; expected one of {allowed}"
        )


def _distribution(labels: list[str], label_set: tuple[str, ...]) -> dict[str, float]:
    counts = Counter(labels)
    total = sum(counts.values())
    if total == 0:
        return {label: 0.0 for label in label_set}
    return {label: 100.0 * counts[label] / total for label in label_set}


def agreement_table(judgments, expected_samples: int | None = None) -> EvalReport:
    """Per-criterion label distributions under unanimity and majority."""
    by_criterion: dict[str, dict[str, list[str]]] = defaultdict(lambda: defaultdict(list))
    samples = set()
    for j in judgments:
        validate_label(j.criterion, j.label)
        by_criterion[j.criterion][j.sample_id].append(j.label)
        samples.add(j.sample_id)

    values: dict[str, float] = {}
    per_criterion_config = {}
    for criterion, label_set in CRITERIA.items():
        sample_labels = by_criterion.get(criterion, {})
        unanimous = [
            labels[0]
            for labels in sample_labels.values()
            if len(set(labels)) == 1
        ]
        majority = []
        for labels in sample_labels.values():
            top = Counter(labels).most_common()
            if len(top) == 1 or top[0][1] > top[1][1]:
                majority.append(top[0][0])
        for label, pct in _distribution(unanimous, label_set).items():
            values[f"{criterion}|unanimous|{label}"] = pct
        for label, pct in _distribution(majority, label_set).items():
            values[f"{criterion}|majority|{label}"] = pct
        per_criterion_config[criterion] = {
            "samples_judged": len(sample_labels),
            "unanimous_samples": len(unanimous),
            "majority_samples": len(majority),
        }

    return EvalReport(
        name="agreement",
        values=values,
        config={
            "samples": expected_samples if expected_samples is not None else len(samples),
            "criteria": per_criterion_config,
        },
    )


def agreement_text(report: EvalReport) -> str:
    """Four criterion blocks, one row of percentages per view."""
    blocks = []
    for criterion, label_set in CRITERIA.items():
        headers = [criterion] + list(label_set)
        rows = []
        for view in ("unanimous", "majority"):
            rows.append(
                [view]
                + [
                    f"{report.values.get(f'{criterion}|{view}|{label}', 0.0):.2f}"
                    for label in label_set
                ]
            )
        blocks.append(format_table(headers, rows))
    return "\n\n".join(blocks)
