"""Segment encoders: text in, fixed-width vector out.

The built-in encoder hashes words into a trainable embedding table,
seeds a recurrence with the mean embedding, and takes the final state,
so plain encodings are order-sensitive. Its masked mode sums a forward
chain ending at the mask with a backward chain from the sequence end to
the mask, so the state at the mask position sees the whole prompt no
matter where the template puts the mask. Any object matching
:class:`SegmentEncoder` can plug in instead.
"""

from __future__ import annotations

import zlib
from typing import Protocol

import numpy as np

from ..kernel import ParamSet, Tensor
from ..seeding import rng as seeded_rng

MASK_TOKEN = "<mask>"
SEP_TOKEN = "<sep>"


class SegmentEncoder(Protocol):
    dim: int

    def encode(self, text: str) -> Tensor: ...

    def encode_masked(self, tokens: list[str], mask_position: int) -> Tensor: ...


def hash_bucket(token: str, n_buckets: int) -> int:
    return zlib.crc32(token.encode("utf-8")) % n_buckets


class HashedRecurrentEncoder:
    """Trainable toy encoder: hashed embeddings + tanh recurrences."""

    def __init__(
        self,
        dim: int = 32,
        n_buckets: int = 1024,
        max_tokens: int = 128,
        seed: int = 0,
    ):
        self.dim = dim
        self.n_buckets = n_buckets
        self.max_tokens = max_tokens
        self.params = ParamSet()
        gen = seeded_rng(seed, "segment-encoder")
        std = 1.0 / np.sqrt(dim)
        self.params.add("embed", gen.normal(0.0, std, size=(n_buckets, dim)))
        for prefix in ("fwd.", "bwd."):
            self.params.add(prefix + "wx", gen.normal(0.0, std, size=(dim, dim)))
            self.params.add(prefix + "wh", gen.normal(0.0, 0.5 * std, size=(dim, dim)))
            self.params.add(prefix + "b", np.zeros(dim))

    def _chain_vjp(self, tokens: list[str], prefix: str):
        """One recurrence over ``tokens``; returns its final state."""
        if not tokens:
            zero = np.zeros(self.dim)
            return zero, lambda d_out: None
        buckets = np.array(
            [hash_bucket(t, self.n_buckets) for t in tokens], dtype=np.int64
        )
        table = self.params["embed"]
        wx = self.params[prefix + "wx"]
        wh = self.params[prefix + "wh"]
        b = self.params[prefix + "b"]
        embeds = table[buckets]
        states = [embeds.mean(axis=0)]
        for e in embeds:
            states.append(np.tanh(e @ wx + states[-1] @ wh + b))

        def backward(d_out: Tensor) -> None:
            t_count = len(tokens)
            d_embeds = np.zeros_like(embeds)
            d_wx = np.zeros_like(wx)
            d_wh = np.zeros_like(wh)
            d_b = np.zeros_like(b)
            ds = np.asarray(d_out, dtype=np.float64)
            for t in range(t_count, 0, -1):
                da = ds * (1.0 - states[t] ** 2)
                d_wx += np.outer(embeds[t - 1], da)
                d_wh += np.outer(states[t - 1], da)
                d_b += da
                d_embeds[t - 1] += da @ wx.T
                ds = da @ wh.T
            d_embeds += ds / t_count  # mean-embedding seed state
            d_table = np.zeros_like(table)
            np.add.at(d_table, buckets, d_embeds)
            self.params.add_grad("embed", d_table)
            self.params.add_grad(prefix + "wx", d_wx)
            self.params.add_grad(prefix + "wh", d_wh)
            self.params.add_grad(prefix + "b", d_b)

        return states[-1], backward

    def encode_vjp(self, text: str):
        return self._chain_vjp(text.split()[: self.max_tokens], "fwd.")

    def encode(self, text: str) -> Tensor:
        out, _ = self.encode_vjp(text)
        return out

    def encode_masked_vjp(self, tokens: list[str], mask_position: int):
        if not 0 <= mask_position < len(tokens):
            raise IndexError(
                f"mask position {mask_position} outside sequence of {len(tokens)}"
            )
        fwd, fwd_bwd = self._chain_vjp(tokens[: mask_position + 1], "fwd.")
        rev, rev_bwd = self._chain_vjp(tokens[mask_position:][::-1], "bwd.")
        out = fwd + rev

        def backward(d_out: Tensor) -> None:
            fwd_bwd(d_out)
            rev_bwd(d_out)

        return out, backward

    def encode_masked(self, tokens: list[str], mask_position: int) -> Tensor:
        out, _ = self.encode_masked_vjp(tokens, mask_position)
        return out
