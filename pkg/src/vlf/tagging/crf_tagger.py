"""CRF segment tagger: encode, contextualize, project, decode.

Segments are encoded one vector each, mixed with sinusoidal position
signals through one attention layer, projected to per-tag emission
scores, and decoded jointly by the CRF. Training minimizes the mean
sequence negative log-likelihood.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import IntegrityError
from ..kernel import (
    OptimState,
    ParamSet,
    adam_step,
    affine_vjp,
    attention_layer_vjp,
    init_attention_params,
    load_params,
    save_params,
    sinusoidal_positions,
)
from ..seeding import rng as seeded_rng
from .crf import N_TAGS, crf_nll_grad, viterbi
from .encoders import HashedRecurrentEncoder, SegmentEncoder


def encode_segments(texts: list[str], encoder: SegmentEncoder) -> np.ndarray:
    """Stack one encoder vector per segment text into [k x d]."""
    rows = []
    for text in texts:
        vec = np.asarray(encoder.encode(text), dtype=np.float64).reshape(-1)
        if rows and vec.shape != rows[-1].shape:
            raise IntegrityError(
                f"encoder dimension drifted: {rows[-1].shape} then {vec.shape}"
            )
        rows.append(vec)
    return np.stack(rows)


def contextualize_vjp(h: np.ndarray, params: ParamSet, heads: int):
    """Positions added, one attention layer applied; backward returns dh."""
    k, d = h.shape
    x = h + sinusoidal_positions(k, d)
    out, bwd = attention_layer_vjp(x, params, heads, prefix="ctx.")
    return out, bwd


def contextualize(h: np.ndarray, params: ParamSet, heads: int) -> np.ndarray:
    out, _ = contextualize_vjp(h, params, heads)
    return out


def emission_scores(u: np.ndarray, params: ParamSet) -> np.ndarray:
    out, _ = affine_vjp(u, params["proj.w"], params["proj.b"])
    return out


class CrfSegmentTagger(BaseEstimator):
    """Sequence tagger marking segments as B-Seg, I-Seg, or O.

    fit(X, y) takes X as a list of segment-text sequences and y as the
    matching tag sequences; predict(X) returns decoded tag sequences.
    """

    def __init__(
        self,
        dim: int = 32,
        heads: int = 2,
        n_buckets: int = 1024,
        max_tokens: int = 128,
        lr: float = 4e-3,
        weight_decay: float = 1e-4,
        batch_size: int = 4,
        epochs: int = 50,
        seed: int = 0,
        encoder: SegmentEncoder | None = None,
    ):
        self.dim = dim
        self.heads = heads
        self.n_buckets = n_buckets
        self.max_tokens = max_tokens
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.encoder = encoder

    def _build(self):
        self.encoder_ = self.encoder or HashedRecurrentEncoder(
            dim=self.dim,
            n_buckets=self.n_buckets,
            max_tokens=self.max_tokens,
            seed=self.seed,
        )
        gen = seeded_rng(self.seed, "crf-tagger")
        head = ParamSet()
        init_attention_params(head, self.dim, self.heads, gen, prefix="ctx.")
        head.add("proj.w", gen.normal(0.0, self.dim**-0.5, size=(self.dim, N_TAGS)))
        head.add("proj.b", np.zeros(N_TAGS))
        head.add("trans", np.zeros((N_TAGS, N_TAGS)))
        self.head_ = head
        if hasattr(self.encoder_, "params"):
            self.params_ = ParamSet.union(("enc", self.encoder_.params), ("head", head))
        else:
            self.params_ = ParamSet.union(("head", head))

    def _sequence_loss(self, texts: list[str], tags: list[str], train: bool) -> float:
        trainable = hasattr(self.encoder_, "encode_vjp")
        if train and trainable:
            pairs = [self.encoder_.encode_vjp(t) for t in texts]
            h = np.stack([p[0] for p in pairs])
        else:
            h = encode_segments(texts, self.encoder_)
        u, ctx_bwd = contextualize_vjp(h, self.head_, self.heads)
        l, proj_bwd = affine_vjp(u, self.head_["proj.w"], self.head_["proj.b"])
        loss, grad_l, grad_t = crf_nll_grad(l, self.head_["trans"], tags)
        if train:
            self.head_.add_grad("trans", grad_t)
            du, dw, db = proj_bwd(grad_l)
            self.head_.add_grad("proj.w", dw)
            self.head_.add_grad("proj.b", db)
            dh = ctx_bwd(du)
            if trainable:
                for (_, bwd), g in zip(pairs, dh):
                    bwd(g)
        return loss

    def fit(self, X: list[list[str]], y: list[list[str]]):
        if not X:
            raise ValueError("training corpus is empty")
        if len(X) != len(y):
            raise ValueError(f"got {len(X)} sequences but {len(y)} tag sequences")
        for texts, tags in zip(X, y):
            if len(texts) != len(tags):
                raise ValueError(
                    f"sequence of {len(texts)} segments has {len(tags)} tags"
                )
        self._build()
        state = OptimState(self.params_, lr=self.lr, weight_decay=self.weight_decay)
        self.loss_trace_ = []
        previous_epoch = None
        for _ in range(self.epochs):
            epoch_total = 0.0
            for start in range(0, len(X), self.batch_size):
                batch = list(range(start, min(start + self.batch_size, len(X))))
                self.params_.zero_grads()
                total = 0.0
                for i in batch:
                    total += self._sequence_loss(X[i], y[i], train=True)
                self.params_.scale_grads(1.0 / len(batch))
                adam_step(self.params_, state)
                mean_loss = total / len(batch)
                self.loss_trace_.append(mean_loss)
                epoch_total += total
            epoch_mean = epoch_total / len(X)
            if previous_epoch is not None and epoch_mean >= previous_epoch:
                warnings.warn(
                    f"tagger loss did not decrease over an epoch "
                    f"({previous_epoch:.6f} -> {epoch_mean:.6f})",
                    RuntimeWarning,
                    stacklevel=2,
                )
            previous_epoch = epoch_mean
        return self

    def predict_one(self, texts: list[str]) -> list[str]:
        h = encode_segments(texts, self.encoder_)
        u = contextualize(h, self.head_, self.heads)
        l = emission_scores(u, self.head_)
        tags, _ = viterbi(l, self.head_["trans"])
        return tags

    def predict(self, X: list[list[str]]) -> list[list[str]]:
        return [self.predict_one(texts) for texts in X]

    def save(self, path) -> None:
        save_params(self.params_, path)

    def load(self, path) -> "CrfSegmentTagger":
        self._build()
        self.params_.load_values(load_params(path))
        return self
