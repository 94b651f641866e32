"""Toy encoder-decoder question generator.

One attention layer encodes the answer-window tokens (always prefixed
with BOS, so an empty window still encodes); the decoder runs one block
of causal self-attention, cross-attention over the encoder memory, and
a feed-forward sublayer. Training is teacher-forced mean token
cross-entropy; decoding is beam search with length-normalized scores.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ConfigError
from ..kernel import (
    OptimState,
    ParamSet,
    adam_step,
    attention_layer_vjp,
    embedding_rows_vjp,
    feed_forward_vjp,
    init_attention_params,
    init_ffn_params,
    init_layer_norm_params,
    init_mha_params,
    layer_norm_vjp,
    load_params,
    multihead_attention_vjp,
    save_params,
    sinusoidal_positions,
    softmax_xent,
)
from ..seeding import rng as seeded_rng
from ..subtitles import TimeSpan, WordTimeline
from .vocab import BOS, MASK, PAD, Vocab


def answer_window(timeline: WordTimeline, span: TimeSpan) -> list[str]:
    """Words whose spans overlap the given span."""
    return [
        w for w, s in zip(timeline.words, timeline.spans) if s.overlaps(span)
    ]


def answer_window_indices(timeline: WordTimeline, span: TimeSpan) -> list[int]:
    return [
        i for i, s in enumerate(timeline.spans) if s.overlaps(span)
    ]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max()
    shifted = logits - m
    return shifted - math.log(np.exp(shifted).sum())


class QuestionGenerator(BaseEstimator):
    """fit(X, y) on (window tokens, question tokens) pairs; predict decodes."""

    def __init__(
        self,
        dim: int = 32,
        heads: int = 2,
        ff: int | None = None,
        max_len: int = 19,
        beam: int = 5,
        lr: float = 4e-3,
        weight_decay: float = 1e-4,
        batch_size: int = 4,
        epochs: int = 60,
        max_source_len: int = 256,
        seed: int = 0,
    ):
        self.dim = dim
        self.heads = heads
        self.ff = ff
        self.max_len = max_len
        self.beam = beam
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.max_source_len = max_source_len
        self.seed = seed

    # -- model construction -------------------------------------------------

    def _build(self, vocab: Vocab):
        if self.max_len < 5:
            raise ConfigError(f"max question length must be >= 5, got {self.max_len}")
        self.vocab_ = vocab
        d, v = self.dim, len(vocab)
        ff = self.ff or 2 * d
        gen = seeded_rng(self.seed, "question-generator")
        params = ParamSet()
        std = 1.0 / math.sqrt(d)
        params.add("enc.embed", gen.normal(0.0, std, size=(v, d)))
        init_attention_params(params, d, self.heads, gen, prefix="enc.attn.", ff=ff)
        params.add("dec.embed", gen.normal(0.0, std, size=(v, d)))
        init_layer_norm_params(params, d, prefix="dec.self.ln.")
        init_mha_params(params, d, self.heads, gen, prefix="dec.self.")
        init_layer_norm_params(params, d, prefix="dec.cross.ln.")
        init_mha_params(params, d, self.heads, gen, prefix="dec.cross.")
        init_layer_norm_params(params, d, prefix="dec.ffn.ln.")
        init_ffn_params(params, d, ff, gen, prefix="dec.ffn.")
        # Zero-init output projection: an untrained model predicts the
        # exact uniform distribution over the vocabulary.
        params.add("out.w", np.zeros((d, v)))
        params.add("out.b", np.zeros(v))
        self.params_ = params

    def _source_ids(self, window_tokens: list[str]) -> list[int]:
        ids = self.vocab_.encode(window_tokens[: self.max_source_len - 1])
        return [self.vocab_.bos_id] + ids

    def _encode_vjp(self, src_ids: list[int]):
        rows, emb_bwd = embedding_rows_vjp(self.params_, "enc.embed", src_ids)
        x = rows + sinusoidal_positions(len(src_ids), self.dim)
        memory, attn_bwd = attention_layer_vjp(
            x, self.params_, self.heads, prefix="enc.attn."
        )

        def backward(d_memory: np.ndarray) -> np.ndarray:
            dx = attn_bwd(d_memory)
            emb_bwd(dx)
            return dx

        return memory, backward

    def _decode_vjp(self, memory: np.ndarray, y_in: list[int]):
        p = self.params_
        rows, emb_bwd = embedding_rows_vjp(p, "dec.embed", y_in)
        t0 = rows + sinusoidal_positions(len(y_in), self.dim)
        n1, ln1_bwd = layer_norm_vjp(t0, p["dec.self.ln.g"], p["dec.self.ln.b"])
        a, self_bwd = multihead_attention_vjp(
            n1, n1, p, self.heads, prefix="dec.self.", causal=True
        )
        t1 = t0 + a
        n2, ln2_bwd = layer_norm_vjp(t1, p["dec.cross.ln.g"], p["dec.cross.ln.b"])
        c, cross_bwd = multihead_attention_vjp(
            n2, memory, p, self.heads, prefix="dec.cross."
        )
        t2 = t1 + c
        n3, ln3_bwd = layer_norm_vjp(t2, p["dec.ffn.ln.g"], p["dec.ffn.ln.b"])
        f, ffn_bwd = feed_forward_vjp(n3, p, prefix="dec.ffn.")
        t3 = t2 + f
        logits = t3 @ p["out.w"] + p["out.b"]

        def backward(d_logits: np.ndarray) -> np.ndarray:
            p.add_grad("out.w", t3.T @ d_logits)
            p.add_grad("out.b", d_logits.sum(axis=0))
            dt3 = d_logits @ p["out.w"].T
            dn3 = ffn_bwd(dt3)
            dt2, dg3, db3 = ln3_bwd(dn3)
            p.add_grad("dec.ffn.ln.g", dg3)
            p.add_grad("dec.ffn.ln.b", db3)
            dt2 = dt2 + dt3
            dn2, d_memory = cross_bwd(dt2)
            dt1, dg2, db2 = ln2_bwd(dn2)
            p.add_grad("dec.cross.ln.g", dg2)
            p.add_grad("dec.cross.ln.b", db2)
            dt1 = dt1 + dt2
            dq, dkv = self_bwd(dt1)
            dn1 = dq + dkv
            dt0, dg1, db1 = ln1_bwd(dn1)
            p.add_grad("dec.self.ln.g", dg1)
            p.add_grad("dec.self.ln.b", db1)
            dt0 = dt0 + dt1
            emb_bwd(dt0)
            return d_memory

        return logits, backward

    # -- loss ----------------------------------------------------------------

    def loss_one(
        self, window_tokens: list[str], question_tokens: list[str], train: bool = False
    ) -> float:
        """Teacher-forced mean token cross-entropy of the question.

        With ``train`` the gradients accumulate into the parameter set,
        including the path into the embedded source states.
        """
        if not question_tokens:
            raise ConfigError("question must be non-empty")
        if len(question_tokens) > self.max_len:
            raise ConfigError(
                f"question has {len(question_tokens)} words, cap is {self.max_len}"
            )
        q_ids = self.vocab_.encode(question_tokens)
        y_in = [self.vocab_.bos_id] + q_ids
        targets = q_ids + [self.vocab_.eos_id]
        memory, enc_bwd = self._encode_vjp(self._source_ids(window_tokens))
        logits, dec_bwd = self._decode_vjp(memory, y_in)
        total = 0.0
        d_logits = np.zeros_like(logits)
        for t, target in enumerate(targets):
            loss_t, grad_t = softmax_xent(logits[t], target)
            total += loss_t
            d_logits[t] = grad_t
        n = len(targets)
        if train:
            d_memory = dec_bwd(d_logits / n)
            enc_bwd(d_memory)
        return total / n

    # -- decoding ------------------------------------------------------------

    def _blocked_ids(self) -> list[int]:
        return [self.vocab_.token_to_id[t] for t in (PAD, BOS, MASK)]

    def _beam_from_memory(self, memory: np.ndarray, beam_width: int) -> tuple:
        eos = self.vocab_.eos_id
        blocked = self._blocked_ids()
        live: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
        finished: list[tuple[tuple[int, ...], float]] = []
        while live:
            candidates = []
            for ids, lp in live:
                logits = self._decode_vjp(memory, [self.vocab_.bos_id] + list(ids))[0][-1]
                logits = logits.copy()
                logits[blocked] = -1e30
                logprobs = _log_softmax(logits)
                order = np.argsort(-logprobs, kind="stable")[:beam_width]
                for tok in order:
                    candidates.append((ids + (int(tok),), lp + float(logprobs[tok])))
            candidates.sort(key=lambda c: (-c[1], c[0]))
            live = []
            for ids, lp in candidates:
                if ids[-1] == eos or len(ids) >= self.max_len:
                    finished.append((ids, lp))
                elif len(live) < beam_width:
                    live.append((ids, lp))
        return min(
            finished, key=lambda c: (-(c[1] / len(c[0])), len(c[0]), c[0])
        )

    def generate(
        self,
        window_tokens: list[str],
        beam: int | None = None,
        return_score: bool = False,
    ):
        """Best decoded question tokens (EOS stripped).

        With ``return_score`` also returns the normalized log-probability
        of the winning hypothesis.
        """
        beam_width = self.beam if beam is None else beam
        if beam_width < 1:
            raise ConfigError(f"beam width must be >= 1, got {beam_width}")
        memory, _ = self._encode_vjp(self._source_ids(window_tokens))
        best = self._beam_from_memory(memory, beam_width)
        if beam_width > 1:
            # Greedy fallback keeps the normalized score >= the beam=1 score.
            greedy = self._beam_from_memory(memory, 1)
            best = min(
                (best, greedy), key=lambda c: (-(c[1] / len(c[0])), len(c[0]), c[0])
            )
        ids = [i for i in best[0] if i != self.vocab_.eos_id]
        tokens = self.vocab_.decode(ids)
        if return_score:
            return tokens, best[1] / len(best[0])
        return tokens

    def sequence_score(self, window_tokens: list[str], question_tokens: list[str]) -> float:
        """Length-normalized log-probability of a full question plus EOS."""
        q_ids = self.vocab_.encode(question_tokens)
        memory, _ = self._encode_vjp(self._source_ids(window_tokens))
        logits, _ = self._decode_vjp(memory, [self.vocab_.bos_id] + q_ids)
        targets = q_ids + [self.vocab_.eos_id]
        total = sum(
            float(_log_softmax(logits[t])[target]) for t, target in enumerate(targets)
        )
        return total / len(targets)

    # -- estimator surface ----------------------------------------------------

    def build_vocab(self, token_sequences: list[list[str]]) -> "QuestionGenerator":
        """Initialize parameters over a corpus without training."""
        self._build(Vocab.build(token_sequences))
        return self

    def fit(self, X: list[list[str]], y: list[list[str]]):
        if not X or len(X) != len(y):
            raise ValueError("need matching non-empty window and question lists")
        self._build(Vocab.build(list(X) + list(y)))
        state = OptimState(self.params_, lr=self.lr, weight_decay=self.weight_decay)
        self.loss_trace_ = []
        for _ in range(self.epochs):
            for start in range(0, len(X), self.batch_size):
                idx = range(start, min(start + self.batch_size, len(X)))
                self.params_.zero_grads()
                total = sum(self.loss_one(X[i], y[i], train=True) for i in idx)
                self.params_.scale_grads(1.0 / len(idx))
                adam_step(self.params_, state)
                self.loss_trace_.append(total / len(idx))
        return self

    def predict(self, X: list[list[str]]) -> list[list[str]]:
        return [self.generate(window) for window in X]

    def save(self, checkpoint_path, vocab_path) -> None:
        save_params(self.params_, checkpoint_path)
        self.vocab_.save(vocab_path)

    def load(self, checkpoint_path, vocab_path) -> "QuestionGenerator":
        self._build(Vocab.load(vocab_path))
        self.params_.load_values(load_params(checkpoint_path))
        return self


def qg_loss(
    generator: QuestionGenerator,
    window_tokens: list[str],
    question_tokens: list[str],
    train: bool = True,
) -> float:
    """Question loss for one pair; gradients land in the generator."""
    return generator.loss_one(window_tokens, question_tokens, train=train)
