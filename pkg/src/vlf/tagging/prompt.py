"""Prompt-based segment tagging via masked label words.

Each segment is spliced into a template holding one MASK and one SEG
placeholder. The encoder's state at the mask position is scored against
one trainable embedding per label word, and the verbalizer maps the
winning word back to a tag. Bundled templates live in
``vlf/data/templates.json``, keyed "1" through "9".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ConfigError
from ..kernel import (
    OptimState,
    ParamSet,
    adam_step,
    load_params,
    save_params,
    softmax_rows,
    softmax_xent,
)
from ..seeding import rng as seeded_rng
from .crf import TAGS
from .encoders import MASK_TOKEN, SEP_TOKEN, HashedRecurrentEncoder, SegmentEncoder

DEFAULT_VERBALIZER = {"B-Seg": "first", "I-Seg": "next", "O": "other"}


def load_templates() -> dict[str, str]:
    """Bundled prompt templates keyed by id."""
    text = resources.files("vlf.data").joinpath("templates.json").read_text("utf-8")
    return json.loads(text)


@dataclass
class PromptConfig:
    """One template plus the label-word mapping."""

    template: str
    verbalizer: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_VERBALIZER)
    )

    def __post_init__(self):
        tokens = self.template.split()
        if tokens.count("MASK") != 1:
            raise ConfigError(
                f"template must contain exactly one MASK placeholder: {self.template!r}"
            )
        if tokens.count("SEG") != 1:
            raise ConfigError(
                f"template must contain exactly one SEG placeholder: {self.template!r}"
            )
        if set(self.verbalizer) != set(TAGS):
            raise ConfigError(f"verbalizer must cover exactly the tags {TAGS}")
        words = list(self.verbalizer.values())
        if len(set(words)) != len(words):
            raise ConfigError(f"label words must be distinct, got {words}")
        for word in words:
            if len(word.split()) != 1:
                raise ConfigError(f"label word must be a single token: {word!r}")

    @property
    def label_words(self) -> list[str]:
        return [self.verbalizer[t] for t in TAGS]


def apply_prompt(
    segment_text: str,
    cfg: PromptConfig,
    mask_token: str = MASK_TOKEN,
    sep_token: str = SEP_TOKEN,
) -> tuple[str, int]:
    """Fill the template; returns the prompt text and the mask token index.

    Only the placeholder tokens are substituted; a literal "MASK" inside
    the segment text passes through untouched.
    """
    out: list[str] = []
    mask_index = -1
    for token in cfg.template.split():
        if token == "MASK":
            mask_index = len(out)
            out.append(mask_token)
        elif token == "SEG":
            out.extend(segment_text.split())
        elif token == "SEP":
            out.append(sep_token)
        else:
            out.append(token)
    return " ".join(out), mask_index


def prompt_label_distribution(
    mask_state: np.ndarray, label_embeddings: np.ndarray
) -> np.ndarray:
    """Softmax over label words by dot product with the mask state."""
    mask_state = np.asarray(mask_state, dtype=np.float64).reshape(-1)
    if label_embeddings.shape[1] != mask_state.shape[0]:
        raise ConfigError(
            f"label embeddings of width {label_embeddings.shape[1]} cannot score "
            f"a state of width {mask_state.shape[0]}"
        )
    return softmax_rows((label_embeddings @ mask_state)[None, :])[0]


def verbalize(dist: np.ndarray) -> str:
    """Tag with the most probable label word; any tie falls back to O."""
    dist = np.asarray(dist, dtype=np.float64).reshape(-1)
    best = dist.max()
    winners = np.flatnonzero(dist == best)
    if len(winners) != 1:
        return "O"
    return TAGS[int(winners[0])]


class PromptSegmentTagger(BaseEstimator):
    """Per-segment tagger trained to predict label words at the mask."""

    def __init__(
        self,
        template: str = "MASK SEG",
        dim: int = 32,
        n_buckets: int = 1024,
        max_tokens: int = 128,
        lr: float = 4e-3,
        weight_decay: float = 1e-4,
        batch_size: int = 4,
        epochs: int = 50,
        seed: int = 0,
        encoder: SegmentEncoder | None = None,
    ):
        self.template = template
        self.dim = dim
        self.n_buckets = n_buckets
        self.max_tokens = max_tokens
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.encoder = encoder

    def _build(self):
        self.config_ = PromptConfig(self.template)
        self.encoder_ = self.encoder or HashedRecurrentEncoder(
            dim=self.dim,
            n_buckets=self.n_buckets,
            max_tokens=self.max_tokens,
            seed=self.seed,
        )
        gen = seeded_rng(self.seed, "prompt-tagger")
        head = ParamSet()
        head.add(
            "labels", gen.normal(0.0, self.dim**-0.5, size=(len(TAGS), self.dim))
        )
        self.head_ = head
        if hasattr(self.encoder_, "params"):
            self.params_ = ParamSet.union(("enc", self.encoder_.params), ("head", head))
        else:
            self.params_ = ParamSet.union(("head", head))

    def _prompt_tokens(self, text: str) -> tuple[list[str], int]:
        capped = " ".join(text.split()[: self.max_tokens])
        prompt, mask_index = apply_prompt(capped, self.config_)
        return prompt.split(), mask_index

    def _segment_loss(self, text: str, tag_index: int, train: bool) -> float:
        tokens, mask_index = self._prompt_tokens(text)
        if train and hasattr(self.encoder_, "encode_masked_vjp"):
            state, enc_bwd = self.encoder_.encode_masked_vjp(tokens, mask_index)
        else:
            state, enc_bwd = self.encoder_.encode_masked(tokens, mask_index), None
        labels = self.head_["labels"]
        logits = labels @ state
        loss, dlogits = softmax_xent(logits, tag_index)
        if train:
            self.head_.add_grad("labels", np.outer(dlogits, state))
            if enc_bwd is not None:
                enc_bwd(dlogits @ labels)
        return loss

    def fit(self, X: list[list[str]], y: list[list[str]]):
        if not X:
            raise ValueError("training corpus is empty")
        if len(X) != len(y):
            raise ValueError(f"got {len(X)} sequences but {len(y)} tag sequences")
        items: list[tuple[str, int]] = []
        for texts, tags in zip(X, y):
            if len(texts) != len(tags):
                raise ValueError(
                    f"sequence of {len(texts)} segments has {len(tags)} tags"
                )
            for text, tag in zip(texts, tags):
                items.append((text, TAGS.index(tag)))
        self._build()
        state = OptimState(self.params_, lr=self.lr, weight_decay=self.weight_decay)
        self.loss_trace_ = []
        for _ in range(self.epochs):
            for start in range(0, len(items), self.batch_size):
                batch = items[start : start + self.batch_size]
                self.params_.zero_grads()
                total = sum(
                    self._segment_loss(text, tag, train=True) for text, tag in batch
                )
                self.params_.scale_grads(1.0 / len(batch))
                adam_step(self.params_, state)
                self.loss_trace_.append(total / len(batch))
        return self

    def predict_one(self, texts: list[str]) -> list[str]:
        out = []
        for text in texts:
            tokens, mask_index = self._prompt_tokens(text)
            state = self.encoder_.encode_masked(tokens, mask_index)
            dist = prompt_label_distribution(state, self.head_["labels"])
            out.append(verbalize(dist))
        return out

    def predict(self, X: list[list[str]]) -> list[list[str]]:
        return [self.predict_one(texts) for texts in X]

    def save(self, path) -> None:
        save_params(self.params_, path)

    def load(self, path) -> "PromptSegmentTagger":
        self._build()
        self.params_.load_values(load_params(path))
        return self
