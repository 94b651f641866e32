"""Saving and loading trained estimators as config + checkpoint pairs.

A model directory holds ``config.json`` (estimator class and
constructor parameters) plus a binary parameter checkpoint, and for the
question generator its vocabulary file.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError
from .localize import SpanLocalizer
from .qgen import QuestionGenerator
from .tagging import CrfSegmentTagger, PromptSegmentTagger

_CLASSES = {
    cls.__name__: cls
    for cls in (CrfSegmentTagger, PromptSegmentTagger, QuestionGenerator, SpanLocalizer)
}

CHECKPOINT = "params.vlfk"
VOCAB = "vocab.json"
CONFIG = "config.json"


def _json_params(estimator) -> dict:
    params = {}
    for key, value in estimator.get_params().items():
        if isinstance(value, (int, float, str, bool)) or value is None:
            params[key] = value
    return params


def save_estimator(estimator, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = {"class": type(estimator).__name__, "params": _json_params(estimator)}
    (out / CONFIG).write_text(json.dumps(config, indent=2, sort_keys=True), "utf-8")
    if isinstance(estimator, QuestionGenerator):
        estimator.save(out / CHECKPOINT, out / VOCAB)
    else:
        estimator.save(out / CHECKPOINT)
    return out


def load_estimator(model_dir: str | Path):
    model_dir = Path(model_dir)
    config = json.loads((model_dir / CONFIG).read_text("utf-8"))
    cls = _CLASSES.get(config["class"])
    if cls is None:
        raise ConfigError(f"unknown estimator class {config['class']!r}")
    estimator = cls(**config["params"])
    if cls is QuestionGenerator:
        estimator.load(model_dir / CHECKPOINT, model_dir / VOCAB)
    else:
        estimator.load(model_dir / CHECKPOINT)
    return estimator
