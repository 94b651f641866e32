"""Span localization with optional cycle-consistent question training.

The localizer scores every packed position with start and end heads and
decodes the best constrained span. When a question generator rides
along, each training step also regenerates the question from the
currently predicted span (hard selection) and adds that loss; both
parameter sets update in one optimizer step. With the question weight
at zero the trainer reduces exactly to the plain span model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ConfigError, InputError, IntegrityError
from ..kernel import (
    NEG_MASK,
    OptimState,
    ParamSet,
    adam_step,
    attention_layer_vjp,
    embedding_rows_vjp,
    init_attention_params,
    load_params,
    save_params,
    scalar_head_vjp,
    sinusoidal_positions,
    softmax_xent,
)
from ..qgen import QuestionGenerator, answer_window, answer_window_indices
from ..seeding import rng as seeded_rng
from ..subtitles import TimeSpan, WordTimeline
from ..tagging.encoders import hash_bucket
from .packing import PackedInput, pack_input
from .vision import (
    FrameFeatureTrack,
    MeanPoolVisionEncoder,
    align_frames,
    fuse_rows_vjp,
    init_fusion_params,
)


def decode_span(
    start_logits: np.ndarray, end_logits: np.ndarray, max_span: int = 256
) -> tuple[int, int]:
    """Argmax over pairs i <= j with j - i < max_span.

    Ties resolve to the smallest start, then the smallest end.
    """
    start_logits = np.asarray(start_logits, dtype=np.float64)
    end_logits = np.asarray(end_logits, dtype=np.float64)
    n = start_logits.shape[0]
    if n < 1:
        raise InputError("cannot decode an empty sequence")
    best = (-np.inf, -1, -1)
    for i in range(n):
        hi = min(n, i + max_span)
        window = end_logits[i:hi]
        j_rel = int(np.argmax(window))
        score = float(start_logits[i] + window[j_rel])
        if score > best[0]:
            best = (score, i, i + j_rel)
    return best[1], best[2]


def span_to_timestamps(
    i: int, j: int, packed: PackedInput, timeline: WordTimeline
) -> TimeSpan:
    """Cue-granular span: start of word(i)'s cue to end of word(j)'s cue."""
    wi, wj = packed.word_map[i], packed.word_map[j]
    if wi < 0 or wj < 0:
        raise IntegrityError(
            f"decoded positions ({i}, {j}) do not map to subtitle words"
        )
    return TimeSpan(
        timeline.cue_span_of_word(wi).start_s, timeline.cue_span_of_word(wj).end_s
    )


def gold_packed_positions(
    gold: TimeSpan, packed: PackedInput, timeline: WordTimeline
) -> tuple[int, int] | None:
    """Packed (start, end) of the gold span, or None if truncated away."""
    word_idx = answer_window_indices(timeline, gold)
    if not word_idx:
        return None
    i = packed.position_of_word(word_idx[0])
    j = packed.position_of_word(word_idx[-1])
    if i is None or j is None:
        return None
    return i, j


@dataclass
class LocalizerExample:
    question_tokens: list[str]
    timeline: WordTimeline
    track: FrameFeatureTrack | None = None
    gold_question_tokens: list[str] | None = None

    @property
    def cycle_question(self) -> list[str]:
        return self.gold_question_tokens or self.question_tokens


@dataclass
class _Prepared:
    example: LocalizerExample
    packed: PackedInput
    gold: tuple[int, int]


class SpanLocalizer(BaseEstimator):
    """Reading-comprehension span model over packed question + subtitle."""

    def __init__(
        self,
        dim: int = 32,
        heads: int = 2,
        n_buckets: int = 1024,
        max_len: int = 1024,
        max_span: int = 256,
        qg_weight: float = 0.0,
        fusion: bool = False,
        fusion_mode: str = "global",
        d_v: int = 16,
        lr: float = 4e-3,
        weight_decay: float = 1e-4,
        batch_size: int = 4,
        epochs: int = 50,
        seed: int = 0,
        qg_dim: int = 32,
        qg_ff: int | None = None,
        qg_max_len: int = 19,
    ):
        self.dim = dim
        self.heads = heads
        self.n_buckets = n_buckets
        self.max_len = max_len
        self.max_span = max_span
        self.qg_weight = qg_weight
        self.fusion = fusion
        self.fusion_mode = fusion_mode
        self.d_v = d_v
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.qg_dim = qg_dim
        self.qg_ff = qg_ff
        self.qg_max_len = qg_max_len

    # -- construction ---------------------------------------------------------

    def _build(self, fusion_init_zero: bool = False):
        if self.fusion_mode not in ("global", "per_word"):
            raise ConfigError(f"unknown fusion mode {self.fusion_mode!r}")
        gen = seeded_rng(self.seed, "span-localizer")
        params = ParamSet()
        params.add(
            "embed", gen.normal(0.0, self.dim**-0.5, size=(self.n_buckets, self.dim))
        )
        init_attention_params(params, self.dim, self.heads, gen, prefix="attn.")
        params.add("start.w", gen.normal(0.0, self.dim**-0.5, size=self.dim))
        params.add("start.b", np.zeros(1))
        params.add("end.w", gen.normal(0.0, self.dim**-0.5, size=self.dim))
        params.add("end.b", np.zeros(1))
        self.vision_encoder_ = None
        if self.fusion:
            init_fusion_params(
                params, self.dim, self.d_v, gen, prefix="fuse.", zero=fusion_init_zero
            )
            if self.fusion_mode == "global":
                self.vision_encoder_ = MeanPoolVisionEncoder(self.d_v, seed=self.seed)
        self.params_ = params

    def _inference_groups(self) -> list[tuple[str, ParamSet]]:
        groups = [("rc", self.params_)]
        if self.vision_encoder_ is not None:
            groups.append(("vision", self.vision_encoder_.params))
        return groups

    def _groups(self) -> list[tuple[str, ParamSet]]:
        groups = self._inference_groups()
        if getattr(self, "qg_", None) is not None:
            groups.append(("qg", self.qg_.params_))
        return groups

    # -- forward --------------------------------------------------------------

    def _vision_rows(
        self,
        packed: PackedInput,
        track: FrameFeatureTrack | None,
        timeline: WordTimeline | None,
    ):
        """Per-position vision inputs plus the encoder's backward hook."""
        n = len(packed)
        if track is None:
            raise InputError("fusion is enabled but the example has no feature track")
        if self.fusion_mode == "global":
            v, bwd = self.vision_encoder_.encode_vjp(track)
            rows = np.repeat(v.reshape(1, -1), n, axis=0)

            def backward(d_rows: np.ndarray) -> None:
                bwd(d_rows.sum(axis=0))

            return rows, backward
        # Per-word pooling reads fixed frame rows; nothing trains upstream.
        if timeline is None:
            raise InputError("per-word fusion needs the source timeline")
        rows = np.zeros((n, track.d_v))
        for p, w in enumerate(packed.word_map):
            if w >= 0:
                span = timeline.spans[w]
                rows[p] = align_frames(track, span.start_s, span.end_s)
        return rows, lambda d_rows: None

    def _forward_vjp(
        self,
        packed: PackedInput,
        track: FrameFeatureTrack | None,
        timeline: WordTimeline | None = None,
    ):
        ids = [hash_bucket(t, self.n_buckets) for t in packed.tokens]
        rows, emb_bwd = embedding_rows_vjp(self.params_, "embed", ids)
        x = rows + sinusoidal_positions(len(ids), self.dim)
        states, attn_bwd = attention_layer_vjp(
            x, self.params_, self.heads, prefix="attn."
        )
        fuse_bwd = None
        vision_bwd = None
        if self.fusion:
            v_rows, vision_bwd = self._vision_rows(packed, track, timeline)
            fused, fuse_bwd = fuse_rows_vjp(states, v_rows, self.params_, "fuse.")
            final = states + fused
        else:
            final = states
        sub_mask = np.asarray([w >= 0 for w in packed.word_map])
        start_raw, start_bwd = scalar_head_vjp(final, self.params_, "start.")
        end_raw, end_bwd = scalar_head_vjp(final, self.params_, "end.")
        start = np.where(sub_mask, start_raw, NEG_MASK)
        end = np.where(sub_mask, end_raw, NEG_MASK)

        def backward(d_start: np.ndarray, d_end: np.ndarray) -> None:
            d_final = start_bwd(d_start * sub_mask) + end_bwd(d_end * sub_mask)
            if fuse_bwd is not None:
                dh, d_rows = fuse_bwd(d_final)
                vision_bwd(d_rows)
                d_states = d_final + dh
            else:
                d_states = d_final
            dx = attn_bwd(d_states)
            emb_bwd(dx)

        return start, end, backward

    # -- training -------------------------------------------------------------

    def _prepare(self, X, y) -> list[_Prepared]:
        prepared = []
        self.skipped_ = 0
        for example, gold_span in zip(X, y):
            packed = pack_input(example.question_tokens, example.timeline, self.max_len)
            gold = gold_packed_positions(gold_span, packed, example.timeline)
            if gold is None:
                self.skipped_ += 1
                continue
            prepared.append(_Prepared(example, packed, gold))
        if self.skipped_:
            warnings.warn(
                f"skipped {self.skipped_} items whose gold span fell outside "
                "the truncated subtitle",
                RuntimeWarning,
                stacklevel=2,
            )
        return prepared

    def ccal_step(self, batch: list[_Prepared]) -> float:
        """One joint update: span loss plus weighted question-cycle loss."""
        self.combined_.zero_grads()
        total = 0.0
        for item in batch:
            start, end, bwd = self._forward_vjp(
                item.packed, item.example.track, item.example.timeline
            )
            gi, gj = item.gold
            loss_s, d_start = softmax_xent(start, gi)
            loss_e, d_end = softmax_xent(end, gj)
            bwd(d_start, d_end)
            loss = loss_s + loss_e
            if self.qg_ is not None:
                i, j = decode_span(start, end, self.max_span)
                predicted = span_to_timestamps(i, j, item.packed, item.example.timeline)
                window = answer_window(item.example.timeline, predicted)
                loss += self.qg_weight * self.qg_.loss_one(
                    window, item.example.cycle_question, train=True
                )
            total += loss
        if self.qg_ is not None:
            self.qg_.params_.scale_grads(self.qg_weight)
        self.combined_.scale_grads(1.0 / len(batch))
        adam_step(self.combined_, self.optim_)
        return total / len(batch)

    def fit(self, X: list[LocalizerExample], y: list[TimeSpan]):
        if not X or len(X) != len(y):
            raise ValueError("need matching non-empty example and span lists")
        self._build()
        self.qg_ = None
        if self.qg_weight > 0.0:
            sources = [list(ex.timeline.words) for ex in X]
            questions = [ex.cycle_question for ex in X]
            self.qg_ = QuestionGenerator(
                dim=self.qg_dim,
                ff=self.qg_ff,
                max_len=self.qg_max_len,
                seed=self.seed,
            )
            self.qg_.build_vocab(sources + questions)
        self.combined_ = ParamSet.union(*self._groups())
        self.optim_ = OptimState(
            self.combined_, lr=self.lr, weight_decay=self.weight_decay
        )
        prepared = self._prepare(X, y)
        if not prepared:
            raise ValueError("every training item was skipped")
        self.loss_trace_ = []
        for _ in range(self.epochs):
            for lo in range(0, len(prepared), self.batch_size):
                batch = prepared[lo : lo + self.batch_size]
                self.loss_trace_.append(self.ccal_step(batch))
        return self

    # -- inference ------------------------------------------------------------

    def predict_positions(self, example: LocalizerExample) -> tuple[int, int, PackedInput]:
        packed = pack_input(example.question_tokens, example.timeline, self.max_len)
        start, end, _ = self._forward_vjp(packed, example.track, example.timeline)
        i, j = decode_span(start, end, self.max_span)
        return i, j, packed

    def predict_one(self, example: LocalizerExample) -> TimeSpan:
        i, j, packed = self.predict_positions(example)
        return span_to_timestamps(i, j, packed, example.timeline)

    def predict(self, X: list[LocalizerExample]) -> list[TimeSpan]:
        return [self.predict_one(ex) for ex in X]

    def exact_match_rate(self, X: list[LocalizerExample], y: list[TimeSpan]) -> float:
        prepared = self._prepare(X, y)
        hits = 0
        for item in prepared:
            start, end, _ = self._forward_vjp(
                item.packed, item.example.track, item.example.timeline
            )
            if decode_span(start, end, self.max_span) == item.gold:
                hits += 1
        return hits / len(prepared) if prepared else 0.0

    def save(self, path) -> None:
        """Persist the span model and vision encoder (not the cycle QG)."""
        save_params(ParamSet.union(*self._inference_groups()), path)

    def load(self, path) -> "SpanLocalizer":
        self._build()
        self.qg_ = None
        self.combined_ = ParamSet.union(*self._inference_groups())
        self.combined_.load_values(load_params(path))
        return self


def span_logits(
    packed: PackedInput,
    localizer: SpanLocalizer,
    track: FrameFeatureTrack | None = None,
    timeline: WordTimeline | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Masked per-position start and end logits."""
    start, end, _ = localizer._forward_vjp(packed, track, timeline)
    return start, end


def train_rc(X: list[LocalizerExample], y: list[TimeSpan], **config) -> SpanLocalizer:
    """Plain span-model training: the cycle weight pinned to zero."""
    config["qg_weight"] = 0.0
    return SpanLocalizer(**config).fit(X, y)
